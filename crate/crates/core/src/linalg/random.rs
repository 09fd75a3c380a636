//! Seeded random matrices for generators and tests.

use nalgebra::linalg::QR;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{c, real, Matrix};

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * real(std::f64::consts::FRAC_1_SQRT_2)
    })
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let qr = QR::new(gaussian(n, n, rng));
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / real(d.norm()) } else { real(1.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Invertible matrix `U diag(s) V` with singular values drawn from `[lo, hi]`.
pub fn invertible<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Matrix {
    let u = unitary(n, rng);
    let v = unitary(n, rng);
    let s = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            real(rng.random_range(lo..=hi))
        } else {
            real(0.0)
        }
    });
    u * s * v
}

/// Random Hermitian positive definite matrix with spectrum in `[lo, hi]`.
pub fn positive<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Matrix {
    let u = unitary(n, rng);
    let s = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            real(rng.random_range(lo..=hi))
        } else {
            real(0.0)
        }
    });
    let p = &u * s * u.adjoint();
    (&p + p.adjoint()) * real(0.5)
}
