//! Index contractions over the composable pairs of `X ⊗ X`.

use super::{Category, Obj};
use crate::linalg::{Matrix, ZERO};

/// Composable pairs of `X ⊗ X`, for contracting `X ⊗ X ⊗ X` composites
/// without forming the triple tensor product. `X ⊗ 1` and `1 ⊗ X` are
/// identified with `X` through the unitors.
pub struct PairTable {
    pub d: usize,
    pub dd: usize,
    /// `(a, b, ab)` for every composable pair.
    pairs: Vec<(usize, usize, usize)>,
    /// `by_left[a]` lists `(b, ab)`, `by_right[b]` lists `(a, ab)`.
    by_left: Vec<Vec<(usize, usize)>>,
    by_right: Vec<Vec<(usize, usize)>>,
    /// Unit carrier index of the left and right cell of each basis vector.
    unit_left: Vec<usize>,
    unit_right: Vec<usize>,
}

impl PairTable {
    pub fn new(cat: &Category, x: &Obj) -> PairTable {
        let d = x.dim();
        let layout = cat.tensor_index(x, x);
        let mut pairs = Vec::new();
        let mut by_left = vec![Vec::new(); d];
        let mut by_right = vec![Vec::new(); d];
        for p in 0..d {
            for q in 0..d {
                if let Some(pq) = layout.get(p, q) {
                    pairs.push((p, q, pq));
                    by_left[p].push((q, pq));
                    by_right[q].push((p, pq));
                }
            }
        }
        let unit_col = |k: usize| if x.is_grid() { k } else { 0 };
        PairTable {
            d,
            dd: pairs.len(),
            pairs,
            by_left,
            by_right,
            unit_left: (0..d).map(|i| unit_col(x.label(i).0)).collect(),
            unit_right: (0..d).map(|i| unit_col(x.label(i).1)).collect(),
        }
    }

    /// `m (K ⊗ 1)` for `m: A ⊗ A → A`.
    pub fn after_right(&self, m: &Matrix, k: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(m.nrows(), self.dd);
        for &(a, b, ab) in &self.pairs {
            for &(a2, a2b) in &self.by_right[b] {
                let kv = k[(a2, a)];
                if kv != ZERO {
                    for p in 0..m.nrows() {
                        out[(p, ab)] += m[(p, a2b)] * kv;
                    }
                }
            }
        }
        out
    }

    /// `m (1 ⊗ K)` for `m: A ⊗ A → A`.
    pub fn after_left(&self, m: &Matrix, k: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(m.nrows(), self.dd);
        for &(a, b, ab) in &self.pairs {
            for &(b2, ab2) in &self.by_left[a] {
                let kv = k[(b2, b)];
                if kv != ZERO {
                    for p in 0..m.nrows() {
                        out[(p, ab)] += m[(p, ab2)] * kv;
                    }
                }
            }
        }
        out
    }

    /// `(m ⊗ 1)(1 ⊗ c)` for `m: A ⊗ A → A`, `c: 1 → A ⊗ A`.
    pub fn right_snake(&self, m: &Matrix, c: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dd, self.d);
        for a in 0..self.d {
            let u = self.unit_right[a];
            for &(r, ar) in &self.by_left[a] {
                for &(q, rq) in &self.by_left[r] {
                    let cv = c[(rq, u)];
                    if cv == ZERO {
                        continue;
                    }
                    for &(p, pq) in &self.by_right[q] {
                        out[(pq, a)] += m[(p, ar)] * cv;
                    }
                }
            }
        }
        out
    }

    /// `(1 ⊗ m)(c ⊗ 1)` for `m: A ⊗ A → A`, `c: 1 → A ⊗ A`.
    pub fn left_snake(&self, m: &Matrix, c: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dd, self.d);
        for b in 0..self.d {
            let u = self.unit_left[b];
            for &(r, rb) in &self.by_right[b] {
                for &(p, pr) in &self.by_right[r] {
                    let cv = c[(pr, u)];
                    if cv == ZERO {
                        continue;
                    }
                    for &(q, pq) in &self.by_left[p] {
                        out[(pq, b)] += cv * m[(q, rb)];
                    }
                }
            }
        }
        out
    }
}
