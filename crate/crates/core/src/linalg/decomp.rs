use nalgebra::linalg::{Schur, SymmetricEigen, SVD};

use super::{identity, is_square, norm, real, Matrix, Tolerance, Vector, C64, ONE};
use crate::error::{Error, Result};

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `p`.
pub fn hermitian_eigen(p: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = is_square(p)?;
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    let herm = (p + p.adjoint()) * real(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

fn check_hermitian(p: &Matrix, tol: &Tolerance) -> Result<()> {
    let residual = (p - p.adjoint()).norm();
    if residual > tol.verify_eps * (1.0 + norm(p)) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

fn clamped_spectrum(p: &Matrix, tol: &Tolerance) -> Result<(Vec<f64>, Matrix)> {
    check_hermitian(p, tol)?;
    let (values, vectors) = hermitian_eigen(p)?;
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = values.first().copied().unwrap_or(0.0);
    if min < -tol.verify_eps * scale {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok((values.into_iter().map(|v| v.max(0.0)).collect(), vectors))
}

fn spectral_map(values: &[f64], vectors: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let fv = real(f(v));
        for r in 0..n {
            scaled[(r, k)] *= fv;
        }
    }
    let out = scaled * vectors.adjoint();
    (&out + out.adjoint()) * real(0.5)
}

/// Positive square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues down to `-verify_eps * ||P||` are treated as rounding noise and
/// clamped to zero.
pub fn hermitian_sqrt(p: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    let (values, vectors) = clamped_spectrum(p, tol)?;
    Ok(spectral_map(&values, &vectors, f64::sqrt))
}

/// Inverse of the positive square root; fails on (numerically) singular input.
pub fn hermitian_inv_sqrt(p: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    let (values, vectors) = clamped_spectrum(p, tol)?;
    let max = values.last().copied().unwrap_or(0.0);
    let min = values.first().copied().unwrap_or(0.0);
    if values.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    if min <= 1e-14 * max || max == 0.0 {
        return Err(Error::Singular {
            rcond: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    Ok(spectral_map(&values, &vectors, |v| 1.0 / v.sqrt()))
}

/// Thin singular value decomposition `m = u diag(sigma) v_t`, sigma descending.
pub(crate) struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v_t: Matrix,
}

fn raw_svd(m: &Matrix) -> Svd {
    let svd = SVD::new(m.clone(), true, true);
    Svd {
        u: svd.u.expect("left singular vectors requested"),
        sigma: svd.singular_values.iter().copied().collect(),
        v_t: svd.v_t.expect("right singular vectors requested"),
    }
}

fn reconstruction_error(m: &Matrix, s: &Svd) -> f64 {
    let mut us = s.u.clone();
    for (k, &sk) in s.sigma.iter().enumerate() {
        us.column_mut(k).scale_mut(sk);
    }
    (us * &s.v_t - m).norm()
}

/// One-sided Jacobi SVD after a Householder QR of the (tall) input; slower
/// than the bidiagonal method but accurate on structured inputs.
fn jacobi_svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows < cols {
        let t = jacobi_svd(&m.adjoint());
        return Svd {
            u: t.v_t.adjoint(),
            sigma: t.sigma,
            v_t: t.u.adjoint(),
        };
    }
    let qr = m.clone().qr();
    let q = qr.q();
    let mut a = qr.r();
    let n = cols;
    let mut v = identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for r in (p + 1)..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(r).norm_squared();
                let gamma = a.column(p).dotc(&a.column(r));
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = (gamma / real(g)).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for k in 0..mat.nrows() {
                        let x = mat[(k, p)];
                        let y = mat[(k, r)] * phase;
                        mat[(k, p)] = x * c - y * s;
                        mat[(k, r)] = x * s + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..n).map(|k| (k, a.column(k).norm())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let sigma_max = order.first().map_or(0.0, |o| o.1);
    let mut ur: Vec<Vector> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut vcols = Vec::with_capacity(n);
    for &(k, s) in &order {
        sigma.push(s);
        vcols.push(v.column(k).into_owned());
        if s > 1e-300 && s > 1e-15 * sigma_max {
            ur.push(a.column(k) / real(s));
        }
    }
    // Complete the left factor to an orthonormal basis.
    let mut e = 0;
    while ur.len() < n {
        let mut x = Vector::zeros(n);
        x[e] = ONE;
        e += 1;
        for _ in 0..2 {
            for u in &ur {
                let overlap = u.dotc(&x);
                x -= u * overlap;
            }
        }
        let norm = x.norm();
        if norm > 1e-8 {
            ur.push(x / real(norm));
        }
    }
    let u = q * Matrix::from_columns(&ur);
    let v_t = Matrix::from_columns(&vcols).adjoint();
    Svd { u, sigma, v_t }
}

/// SVD whose factorization is checked against the input.
///
/// nalgebra's complex SVD occasionally returns an inaccurate factorization on
/// highly structured inputs (exact zeros in triangular patterns); those are
/// recomputed with [`jacobi_svd`].
pub(crate) fn checked_svd(m: &Matrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        let k = rows.min(cols);
        return Ok(Svd {
            u: Matrix::zeros(rows, k),
            sigma: Vec::new(),
            v_t: Matrix::zeros(k, cols),
        });
    }
    let budget = 1e-12 * (1.0 + m.norm()) * ((rows.max(cols)) as f64).sqrt();
    let first = raw_svd(m);
    if reconstruction_error(m, &first) <= budget {
        return Ok(first);
    }
    let second = jacobi_svd(m);
    let err = reconstruction_error(m, &second);
    if err <= budget {
        return Ok(second);
    }
    Err(Error::Internal(format!(
        "singular value decomposition of a {rows}x{cols} matrix did not converge (error {err:e}, norm {:e})",
        m.norm()
    )))
}

/// Polar decomposition `M = H U` with `H = sqrt(M M*)` and `U` unitary.
pub fn polar_decompose(m: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = is_square(m)?;
    if n == 0 {
        return Ok((Matrix::zeros(0, 0), Matrix::zeros(0, 0)));
    }
    let svd = checked_svd(m)?;
    let (u, v_t) = (svd.u, svd.v_t);
    let mut us = u.clone();
    for k in 0..n {
        let s = real(svd.sigma[k]);
        for r in 0..n {
            us[(r, k)] *= s;
        }
    }
    let h = us * u.adjoint();
    let h = (&h + h.adjoint()) * real(0.5);
    Ok((h, u * v_t))
}

/// Inverse with a condition-number guard.
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let n = is_square(m)?;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let sv = checked_svd(m)?.sigma;
    let max = sv[0];
    let min = sv[n - 1];
    if max == 0.0 || min / max < 1e-13 {
        return Err(Error::Singular {
            rcond: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::Singular { rcond: min / max })
}

/// Splits an idempotent `p = w v` with `v w = 1`.
///
/// `w` is an isometry onto the range of `p` and `v = w* p`, so the image of a
/// self-adjoint-free idempotent still carries an orthonormal basis.
pub fn split_idempotent(p: &Matrix, tol: &Tolerance) -> Result<(Matrix, Matrix)> {
    let n = is_square(p)?;
    let scale = 1.0 + norm(p);
    let residual = (p * p - p).norm();
    if residual > tol.verify_eps * scale {
        return Err(Error::NotIdempotent { residual });
    }
    if n == 0 {
        return Ok((Matrix::zeros(0, 0), Matrix::zeros(0, 0)));
    }
    let svd = checked_svd(p)?;
    let u = svd.u;
    // Nonzero singular values of an idempotent are >= 1.
    let rank = svd.sigma.iter().filter(|&&s| s > 0.5).count();
    let w = u.columns(0, rank).into_owned();
    let v = w.adjoint() * p;
    let check = (&v * &w - identity(rank)).norm() + (&w * &v - p).norm();
    if check > tol.verify_eps * scale {
        return Err(Error::NotIdempotent { residual: check });
    }
    Ok((v, w))
}

/// Eigenvalues of a square matrix (complex Schur form diagonal).
pub fn eigenvalues(m: &Matrix) -> Result<Vec<C64>> {
    let n = is_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Groups eigenvalues: sort by (re, im), then merge neighbours closer than
/// `eps * (1 + |lambda|)`. Returns cluster means in sorted order.
pub(crate) fn cluster_values(values: &[C64], eps: f64) -> Vec<C64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for v in sorted {
        let merge = clusters.iter_mut().find(|cl| {
            cl.iter()
                .any(|w| (v - w).norm() < eps * (1.0 + v.norm().max(w.norm())))
        });
        match merge {
            Some(cl) => cl.push(v),
            None => clusters.push(vec![v]),
        }
    }
    clusters
        .into_iter()
        .map(|cl| cl.iter().sum::<C64>() / real(cl.len() as f64))
        .collect()
}

/// Spectral projections of a diagonalizable matrix, as Lagrange interpolation
/// polynomials in `m` over the clustered eigenvalues.
///
/// The projections sum to the identity, are mutually orthogonal and lie in the
/// unital algebra generated by `m`.
pub fn spectral_idempotents(m: &Matrix, tol: &Tolerance) -> Result<Vec<Matrix>> {
    let n = is_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let values = eigenvalues(m)?;
    let means = cluster_values(&values, tol.cluster_eps);
    let id = identity(n);
    let mut projections = Vec::with_capacity(means.len());
    for (k, mu_k) in means.iter().enumerate() {
        let mut p = id.clone();
        for (l, mu_l) in means.iter().enumerate() {
            if l != k {
                p = (m - &id * *mu_l) * p / (mu_k - mu_l);
            }
        }
        // Newton polish towards the nearest idempotent; stays polynomial in m.
        for _ in 0..2 {
            let p2 = &p * &p;
            p = &p2 * real(3.0) - &p2 * &p * real(2.0);
        }
        projections.push(p);
    }
    let scale = 1.0 + norm(m);
    let mut worst = 0.0f64;
    for (p, mu) in projections.iter().zip(&means) {
        worst = worst.max((p * p - p).norm() / (1.0 + norm(p)));
        worst = worst.max(((m - &id * *mu) * p).norm() / scale);
    }
    if worst > tol.cluster_eps {
        return Err(Error::Defective { residual: worst });
    }
    Ok(projections)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(m: &Matrix) {
        let s = jacobi_svd(m);
        assert!(reconstruction_error(m, &s) < 1e-12 * (1.0 + m.norm()));
        let k = s.sigma.len();
        assert!((s.u.adjoint() * &s.u - identity(k)).norm() < 1e-12);
        assert!((&s.v_t * s.v_t.adjoint() - identity(k)).norm() < 1e-12);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn jacobi_svd_on_random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (r, c) in [(5, 5), (9, 4), (3, 7), (1, 1)] {
            check(&super::super::random::gaussian(r, c, &mut rng));
        }
    }

    #[test]
    fn jacobi_svd_on_rank_deficient_structured_input() {
        let mut m = Matrix::zeros(8, 4);
        m[(0, 0)] = ONE;
        m[(1, 0)] = ONE;
        m[(5, 2)] = real(3.0);
        check(&m);
        let s = jacobi_svd(&m);
        assert!((s.sigma[0] - 3.0).abs() < 1e-14);
        assert!((s.sigma[1] - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(s.sigma[2], 0.0);
    }
}
