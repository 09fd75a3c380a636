use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::{Matrix, C64};

/// A linear map stored either densely or in CSR form.
///
/// Whiskered morphisms (`f ⊗ 1`, `1 ⊗ g`) and duality vectors are very sparse,
/// and long composites of them are evaluated without densifying the
/// intermediate Kronecker-sized factors.
#[derive(Debug, Clone)]
pub enum Lin {
    Dense(Matrix),
    Sparse(CsrMatrix<C64>),
}

impl Lin {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Lin::Dense(m) => m.shape(),
            Lin::Sparse(s) => (s.nrows(), s.ncols()),
        }
    }

    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, C64)]) -> Lin {
        let mut coo = CooMatrix::new(rows, cols);
        for &(r, c, v) in entries {
            if v != super::ZERO {
                coo.push(r, c, v);
            }
        }
        Lin::Sparse(CsrMatrix::from(&coo))
    }

    pub fn nnz(&self) -> usize {
        match self {
            Lin::Dense(m) => m.len(),
            Lin::Sparse(s) => s.nnz(),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Lin::Dense(m) => m.clone(),
            Lin::Sparse(s) => {
                let mut out = Matrix::zeros(s.nrows(), s.ncols());
                for (r, c, v) in s.triplet_iter() {
                    out[(r, c)] += *v;
                }
                out
            }
        }
    }

    pub fn into_dense(self) -> Matrix {
        match self {
            Lin::Dense(m) => m,
            other => other.to_dense(),
        }
    }

    /// Composition `self ∘ rhs`.
    pub fn mul(&self, rhs: &Lin) -> Lin {
        assert_eq!(
            self.shape().1,
            rhs.shape().0,
            "composite of incompatible linear maps"
        );
        match (self, rhs) {
            (Lin::Dense(a), Lin::Dense(b)) => Lin::Dense(a * b),
            (Lin::Sparse(a), Lin::Dense(b)) => Lin::Dense(a * b),
            (Lin::Dense(a), Lin::Sparse(b)) => {
                // (B^T A^T)^T keeps the sparse factor on the left.
                let bt = b.transpose();
                let at = a.transpose();
                let prod: Matrix = &bt * &at;
                Lin::Dense(prod.transpose())
            }
            (Lin::Sparse(a), Lin::Sparse(b)) => Lin::Sparse(a * b),
        }
    }

    /// Evaluates a composite `maps[0] ∘ maps[1] ∘ ... ∘ maps[k]` right to left.
    pub fn chain(maps: &[Lin]) -> Lin {
        let mut iter = maps.iter().rev();
        let mut acc = iter.next().expect("empty composite").clone();
        for next in iter {
            acc = next.mul(&acc);
        }
        acc
    }
}

impl From<Matrix> for Lin {
    fn from(m: Matrix) -> Self {
        Lin::Dense(m)
    }
}
