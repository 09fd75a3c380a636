//! Dense complex linear algebra used by every higher layer.
//!
//! Matrices are `nalgebra` dense matrices over `Complex64`. The decompositions
//! here (polar, Hermitian square root, idempotent splitting, spectral
//! idempotents, nullspace solves) are the only places where rank and
//! eigenvalue-clustering decisions are made, so every caller inherits the same
//! thresholds from [`Tolerance`].

mod decomp;
mod optimize;
pub mod random;
mod solve;
mod sparse;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use decomp::{
    eigenvalues, hermitian_eigen, hermitian_inv_sqrt, hermitian_sqrt, inverse, polar_decompose,
    spectral_idempotents, split_idempotent,
};
pub use optimize::{minimize_defect, DefectObjective, SolverOptions, SolverOutcome};
pub(crate) use optimize::minimize_defect_best;
pub use solve::{least_squares, solve_linear_subspace, SolutionSpace};
pub use sparse::Lin;

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Numerical thresholds shared by verification, solvers and rank decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Pass/fail threshold for identity checks.
    pub verify_eps: f64,
    /// Acceptance threshold for solver output and certificates.
    pub solver_eps: f64,
    /// Relative threshold for rank decisions and eigenvalue grouping.
    pub cluster_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            verify_eps: 1e-10,
            solver_eps: 1e-8,
            cluster_eps: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(verify_eps: f64, solver_eps: f64, cluster_eps: f64) -> Result<Self> {
        let tol = Tolerance {
            verify_eps,
            solver_eps,
            cluster_eps,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.verify_eps, self.solver_eps, self.cluster_eps];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidTolerance(format!(
                "all tolerances must be finite and positive, got {self:?}"
            )));
        }
        if self.verify_eps > self.solver_eps {
            return Err(Error::InvalidTolerance(format!(
                "verify_eps {} exceeds solver_eps {}",
                self.verify_eps, self.solver_eps
            )));
        }
        Ok(())
    }

    /// Replaces `verify_eps`, raising `solver_eps` if needed to keep the ordering.
    pub fn with_verify_eps(mut self, eps: f64) -> Result<Self> {
        self.verify_eps = eps;
        if self.solver_eps < eps {
            self.solver_eps = eps;
        }
        self.validate()?;
        Ok(self)
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Frobenius norm.
pub fn norm(m: &Matrix) -> f64 {
    m.norm()
}

/// Frobenius inner product `tr(a* b)`.
pub fn inner(a: &Matrix, b: &Matrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn adjoint(m: &Matrix) -> Matrix {
    m.adjoint()
}

pub fn trace(m: &Matrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Distance between `a` and `b` in Frobenius norm; infinite on shape mismatch.
pub fn distance(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).norm()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Builds a matrix from row-major entries.
pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> Matrix {
    Matrix::from_row_slice(rows, cols, data)
}

pub fn from_real_rows(rows: &[&[f64]]) -> Matrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    Matrix::from_fn(r, cols, |i, j| real(rows[i][j]))
}

pub fn diag(values: &[C64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(values))
}

pub fn real_diag(values: &[f64]) -> Matrix {
    Matrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            real(values[i])
        } else {
            ZERO
        }
    })
}

pub fn is_square(m: &Matrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Column-major flattening (`vec`), matching nalgebra storage order.
pub fn vectorize(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &Vector, rows: usize, cols: usize) -> Matrix {
    Matrix::from_column_slice(rows, cols, v.as_slice())
}

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt with one
/// reorthogonalization pass), dropping columns whose remaining norm falls below
/// `drop_tol` times their original norm.
pub fn orthonormalize(vectors: &[Vector], drop_tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vectors {
        let original = v.norm();
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let proj = q.dotc(&w);
                w.axpy(-proj, q, ONE);
            }
        }
        let n = w.norm();
        if n > drop_tol * original {
            out.push(w.unscale(n));
        }
    }
    out
}
