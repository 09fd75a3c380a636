
use super::{Matrix, Tolerance, Vector};
use crate::error::{Error, Result};

/// Solution set of `A x = b` (or `A x = 0`).
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    /// Minimum-norm particular solution; zero vector for homogeneous systems.
    pub particular: Vector,
    /// Orthonormal basis of the nullspace of `A`.
    pub null_basis: Vec<Vector>,
    /// `||A x_particular - b||`.
    pub residual: f64,
    pub rank: usize,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        self.null_basis.len()
    }
}

/// Solves a linear system whose rows are the constraints; rank is decided on
/// singular values at `cluster_eps * sigma_max`.
///
/// With `rhs = None` the system is homogeneous and the returned basis spans its
/// solution set. With a right-hand side the minimum-norm solution is checked
/// against `verify_eps * max(1, ||b||)` and [`Error::NoSolution`] is returned
/// when the system is inconsistent.
pub fn solve_linear_subspace(
    a: &Matrix,
    rhs: Option<&Vector>,
    tol: &Tolerance,
) -> Result<SolutionSpace> {
    let (m, n) = a.shape();
    let b = match rhs {
        Some(b) => {
            if n > 0 && b.len() != m {
                return Err(Error::ShapeMismatch {
                    context: "right-hand side".into(),
                    expected: (m, 1),
                    found: (b.len(), 1),
                });
            }
            b.clone()
        }
        None => Vector::zeros(m),
    };
    // An empty unknown set may come with an empty constraint matrix of any
    // nominal row count.
    if n == 0 {
        let residual = b.norm();
        return check(
            SolutionSpace {
                particular: Vector::zeros(0),
                null_basis: Vec::new(),
                residual,
                rank: 0,
            },
            &b,
            tol,
        );
    }
    if m == 0 {
        let null_basis = (0..n)
            .map(|k| {
                let mut e = Vector::zeros(n);
                e[k] = super::ONE;
                e
            })
            .collect();
        return Ok(SolutionSpace {
            particular: Vector::zeros(n),
            null_basis,
            residual: 0.0,
            rank: 0,
        });
    }

    // Wide systems are zero padded to square so the right singular vectors
    // span all n unknowns; tall ones are first reduced to their R factor.
    let (square, reduced_rhs) = if m > n {
        let qr = a.clone().qr();
        let mut qb = b.clone();
        qr.q_tr_mul(&mut qb);
        (qr.r(), qb.rows(0, n).into_owned())
    } else if m == n {
        (a.clone(), b.clone())
    } else {
        let mut padded = Matrix::zeros(n, n);
        padded.rows_mut(0, m).copy_from(a);
        let mut c = Vector::zeros(n);
        c.rows_mut(0, m).copy_from(&b);
        (padded, c)
    };
    let svd = super::decomp::checked_svd(&square)?;
    let (u, v_t, sigma) = (svd.u, svd.v_t, svd.sigma);
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    // Roundoff in an exactly zero system must not count as rank.
    let floor = 64.0 * f64::EPSILON * m.max(n) as f64;
    let cut = (tol.cluster_eps * sigma_max).max(floor);
    let rank = sigma.iter().filter(|&&s| s > cut).count();

    let mut particular = Vector::zeros(n);
    for k in 0..rank {
        let coeff = u.column(k).dotc(&reduced_rhs) / super::real(sigma[k]);
        let v_k = v_t.row(k).adjoint();
        particular.axpy(coeff, &v_k, super::ONE);
    }
    let null_basis = (rank..n).map(|k| v_t.row(k).adjoint()).collect();
    let residual = (a * &particular - &b).norm();
    check(
        SolutionSpace {
            particular,
            null_basis,
            residual,
            rank,
        },
        &b,
        tol,
    )
}

fn check(space: SolutionSpace, b: &Vector, tol: &Tolerance) -> Result<SolutionSpace> {
    if space.residual > tol.verify_eps * b.norm().max(1.0) {
        return Err(Error::NoSolution {
            residual: space.residual,
        });
    }
    Ok(space)
}

/// Minimum-norm least-squares solution of `A x ≈ b`, treating singular values
/// below `rcond * sigma_max` as zero.
pub fn least_squares(a: &Matrix, b: &Vector, rcond: f64) -> Result<Vector> {
    let n = a.ncols();
    if n == 0 {
        return Ok(Vector::zeros(0));
    }
    let svd = super::decomp::checked_svd(a)?;
    let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
    let mut x = Vector::zeros(n);
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s > rcond * sigma_max && s > 0.0 {
            let coeff = svd.u.column(k).dotc(b) / super::real(s);
            x.axpy(coeff, &svd.v_t.row(k).adjoint(), super::ONE);
        }
    }
    Ok(x)
}
