//! Concrete strict multitensor C*-categories.
//!
//! Every object has a finite orthonormal carrier basis and every morphism is a
//! complex matrix between carriers. Two backends share this representation:
//!
//! * `GridHilb(n)`: each basis vector carries a cell label `(i, j)`; the object
//!   is the grid of Hilbert spaces `X_ij` and morphisms are block diagonal
//!   with respect to the labels. The tensor unit has one vector labelled
//!   `(i, i)` for each `i`. Carrier bases are grouped by the left index `i`.
//! * `RepG`: objects are unitary representations of a finite group, stored as
//!   one matrix per group element; morphisms are intertwiners.
//!
//! # Tensor layout
//!
//! The carrier of `X ⊗ Y` is spanned by the composable pairs `(a, b)` of
//! carrier indices, where `a` labelled `(i, j)` and `b` labelled `(j', k)` are
//! composable iff `j = j'`; the pair is labelled `(i, k)`. Pairs are ordered
//! lexicographically (`a` major, `b` minor), which is the Kronecker order with
//! non-composable pairs deleted. For `RepG` every pair is composable and the
//! layout is exactly the Kronecker product. This ordering makes the
//! associator and both unitors literal identities: `(X ⊗ Y) ⊗ Z` and
//! `X ⊗ (Y ⊗ Z)` have the same carrier basis, and `X ⊗ 1 = 1 ⊗ X = X` (the
//! latter because carriers are grouped by left index).

mod duality;
mod pairs;
mod simple;

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra_sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{self, Lin, Matrix, Tolerance, Vector, C64, ONE, ZERO};

pub use pairs::PairTable;
pub use duality::{DualityComparison, DualityForm, DualitySolution, ScalarDimension};
pub use simple::{SimpleDecomposition, SimpleSummand};

/// Which concrete category a [`Category`] realizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    GridHilb { n: usize },
    RepG { group: FiniteGroup },
}

#[derive(Debug, PartialEq)]
enum ObjData {
    Grid { labels: Vec<(usize, usize)> },
    Rep { mats: Vec<Matrix> },
}

/// An object: a carrier basis with cell labels (`GridHilb`) or a unitary
/// representation (`RepG`).
#[derive(Debug, Clone)]
pub struct Obj(Arc<ObjData>);

impl Obj {
    fn grid(labels: Vec<(usize, usize)>) -> Obj {
        debug_assert!(left_sorted(&labels), "grid carrier not grouped by left cell");
        Obj(Arc::new(ObjData::Grid { labels }))
    }

    fn rep(mats: Vec<Matrix>) -> Obj {
        Obj(Arc::new(ObjData::Rep { mats }))
    }

    pub fn dim(&self) -> usize {
        match &*self.0 {
            ObjData::Grid { labels } => labels.len(),
            ObjData::Rep { mats } => mats[0].nrows(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Cell label of carrier vector `a`; always `(0, 0)` for `RepG`.
    pub fn label(&self, a: usize) -> (usize, usize) {
        match &*self.0 {
            ObjData::Grid { labels } => labels[a],
            ObjData::Rep { .. } => (0, 0),
        }
    }

    pub fn labels(&self) -> Vec<(usize, usize)> {
        (0..self.dim()).map(|a| self.label(a)).collect()
    }

    pub fn is_grid(&self) -> bool {
        matches!(&*self.0, ObjData::Grid { .. })
    }

    /// Representation matrices, one per group element (`RepG` only).
    pub fn rep_matrices(&self) -> Option<&[Matrix]> {
        match &*self.0 {
            ObjData::Rep { mats } => Some(mats),
            ObjData::Grid { .. } => None,
        }
    }

    /// Carrier dimensions per cell, `dims[i][j] = dim X_ij`.
    pub fn cell_dims(&self, n: usize) -> Vec<Vec<usize>> {
        let mut dims = vec![vec![0; n]; n];
        for a in 0..self.dim() {
            let (i, j) = self.label(a);
            dims[i][j] += 1;
        }
        dims
    }

    /// True when every group element acts as the identity.
    pub fn has_trivial_action(&self) -> bool {
        match &*self.0 {
            ObjData::Rep { mats } => {
                let id = linalg::identity(self.dim());
                mats.iter().all(|m| *m == id)
            }
            ObjData::Grid { .. } => false,
        }
    }
}

impl PartialEq for Obj {
    fn eq(&self, other: &Obj) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (&*self.0, &*other.0) {
            (ObjData::Grid { labels: a }, ObjData::Grid { labels: b }) => a == b,
            (ObjData::Rep { mats: a }, ObjData::Rep { mats: b }) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| {
                        x.shape() == y.shape()
                            && x.iter().zip(y.iter()).all(|(u, v)| (u - v).norm() <= 1e-9)
                    })
            }
            _ => false,
        }
    }
}

/// A morphism `source -> target`, stored densely or sparsely.
#[derive(Debug, Clone)]
pub struct Mor {
    src: Obj,
    tgt: Obj,
    map: Lin,
}

impl Mor {
    /// Wraps a matrix without checking the morphism law; used for values
    /// produced by category operations.
    pub(crate) fn raw(src: Obj, tgt: Obj, map: Lin) -> Mor {
        debug_assert_eq!(map.shape(), (tgt.dim(), src.dim()));
        Mor { src, tgt, map }
    }

    pub fn source(&self) -> &Obj {
        &self.src
    }

    pub fn target(&self) -> &Obj {
        &self.tgt
    }

    pub fn lin(&self) -> &Lin {
        &self.map
    }

    /// Dense matrix of the morphism.
    pub fn matrix(&self) -> Cow<'_, Matrix> {
        match &self.map {
            Lin::Dense(m) => Cow::Borrowed(m),
            sparse => Cow::Owned(sparse.to_dense()),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        self.matrix().into_owned()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        match &self.map {
            Lin::Dense(m) => m.norm(),
            Lin::Sparse(s) => s.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// Composite `self ∘ f`.
    pub fn compose(&self, f: &Mor) -> Result<Mor> {
        if self.src != f.tgt {
            return Err(Error::ObjectMismatch(format!(
                "composite: source of outer ({}) differs from target of inner ({})",
                self.src.dim(),
                f.tgt.dim()
            )));
        }
        Ok(Mor::raw(f.src.clone(), self.tgt.clone(), densify(self.map.mul(&f.map))))
    }

    fn same_hom(&self, other: &Mor, context: &str) -> Result<()> {
        if self.src != other.src || self.tgt != other.tgt {
            return Err(Error::ObjectMismatch(context.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Mor) -> Result<Mor> {
        self.same_hom(other, "sum of morphisms")?;
        let m = self.matrix().into_owned() + other.matrix().as_ref();
        Ok(Mor::raw(self.src.clone(), self.tgt.clone(), Lin::Dense(m)))
    }

    pub fn sub(&self, other: &Mor) -> Result<Mor> {
        self.same_hom(other, "difference of morphisms")?;
        let m = self.matrix().into_owned() - other.matrix().as_ref();
        Ok(Mor::raw(self.src.clone(), self.tgt.clone(), Lin::Dense(m)))
    }

    pub fn scale(&self, s: C64) -> Mor {
        let map = match &self.map {
            Lin::Dense(m) => Lin::Dense(m * s),
            Lin::Sparse(sp) => Lin::Sparse(sp * s),
        };
        Mor::raw(self.src.clone(), self.tgt.clone(), map)
    }

    /// `||self - other||`, infinite when the hom spaces differ.
    pub fn distance(&self, other: &Mor) -> f64 {
        match self.sub(other) {
            Ok(d) => d.norm(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Adjoint: the blockwise conjugate transpose.
    pub fn dagger(&self) -> Mor {
        let map = match &self.map {
            Lin::Dense(m) => Lin::Dense(m.adjoint()),
            Lin::Sparse(s) => {
                let t = s.transpose();
                let (offsets, indices, values) = t.disassemble();
                let values = values.into_iter().map(|v| v.conj()).collect();
                Lin::Sparse(
                    CsrMatrix::try_from_csr_data(
                        s.ncols(),
                        s.nrows(),
                        offsets,
                        indices,
                        values,
                    )
                    .expect("transpose keeps a valid pattern"),
                )
            }
        };
        Mor::raw(self.tgt.clone(), self.src.clone(), map)
    }

    /// Inverse of an invertible morphism. The inverse of an intertwiner is an
    /// intertwiner, so the morphism law is not rechecked.
    pub fn inverse(&self) -> Result<Mor> {
        let inv = linalg::inverse(&self.matrix())?;
        Ok(Mor::raw(self.tgt.clone(), self.src.clone(), Lin::Dense(inv)))
    }

    /// Frobenius inner product `tr(self* other)`.
    pub fn inner(&self, other: &Mor) -> C64 {
        linalg::inner(&self.matrix(), &other.matrix())
    }

    fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        lin_nonzeros(&self.map)
    }
}

fn lin_nonzeros(map: &Lin) -> Vec<(usize, usize, C64)> {
    match map {
        Lin::Dense(m) => {
            let mut out = Vec::new();
            for c in 0..m.ncols() {
                for r in 0..m.nrows() {
                    let v = m[(r, c)];
                    if v != ZERO {
                        out.push((r, c, v));
                    }
                }
            }
            out
        }
        Lin::Sparse(s) => s
            .triplet_iter()
            .filter(|(_, _, v)| **v != ZERO)
            .map(|(r, c, v)| (r, c, *v))
            .collect(),
    }
}

fn densify(map: Lin) -> Lin {
    match map {
        Lin::Sparse(ref s) if s.nnz() * 4 > s.nrows() * s.ncols() => Lin::Dense(map.to_dense()),
        other => other,
    }
}

fn left_sorted(labels: &[(usize, usize)]) -> bool {
    labels.windows(2).all(|w| w[0].0 <= w[1].0)
}

/// Stable order of `keys` by value: `order[k]` is the index placed at
/// position `k`, `position[a]` the position of index `a`.
fn stable_order(keys: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&a| keys[a]);
    let mut position = vec![0; keys.len()];
    for (k, &a) in order.iter().enumerate() {
        position[a] = k;
    }
    (order, position)
}

/// Position of `ē_a` in the carrier of the conjugate object, for each `a`.
fn dual_positions(x: &Obj) -> Vec<usize> {
    stable_order(&x.labels().iter().map(|l| l.1).collect::<Vec<_>>()).1
}

/// Index table for the composable pairs of `X ⊗ Y`.
pub struct PairLayout {
    right: usize,
    index: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

const NO_PAIR: usize = usize::MAX;

impl PairLayout {
    fn new(x: &Obj, y: &Obj) -> PairLayout {
        let (dx, dy) = (x.dim(), y.dim());
        let mut index = vec![NO_PAIR; dx * dy];
        let mut pairs = Vec::new();
        let x_labels = x.labels();
        let y_labels = y.labels();
        for a in 0..dx {
            for b in 0..dy {
                if x_labels[a].1 == y_labels[b].0 {
                    index[a * dy + b] = pairs.len();
                    pairs.push((a, b));
                }
            }
        }
        PairLayout {
            right: dy,
            index,
            pairs,
        }
    }

    /// Carrier index of `e_a ⊗ e_b` in `X ⊗ Y`, if the pair is composable.
    pub fn get(&self, a: usize, b: usize) -> Option<usize> {
        match self.index[a * self.right + b] {
            NO_PAIR => None,
            k => Some(k),
        }
    }
}

/// A concrete strict multitensor C*-category.
#[derive(Debug, Clone)]
pub struct Category {
    backend: Backend,
    tol: Tolerance,
    unit: Obj,
}

impl Category {
    pub fn grid_hilb(n: usize) -> Result<Category> {
        if n == 0 {
            return Err(Error::Precondition("GridHilb needs n >= 1".into()));
        }
        Ok(Category {
            backend: Backend::GridHilb { n },
            tol: Tolerance::default(),
            unit: Obj::grid((0..n).map(|i| (i, i)).collect()),
        })
    }

    pub fn rep_g(group: FiniteGroup) -> Category {
        let unit = Obj::rep(vec![linalg::identity(1); group.order()]);
        Category {
            backend: Backend::RepG { group },
            tol: Tolerance::default(),
            unit,
        }
    }

    /// `Rep` of the trivial group: plain finite-dimensional Hilbert spaces.
    pub fn hilb() -> Category {
        Category::rep_g(FiniteGroup::trivial())
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Result<Category> {
        tol.validate()?;
        self.tol = tol;
        Ok(self)
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn group(&self) -> Option<&FiniteGroup> {
        match &self.backend {
            Backend::RepG { group } => Some(group),
            Backend::GridHilb { .. } => None,
        }
    }

    /// Number of simple summands of the tensor unit.
    pub fn unit_rank(&self) -> usize {
        match &self.backend {
            Backend::GridHilb { n } => *n,
            Backend::RepG { .. } => 1,
        }
    }

    pub fn unit(&self) -> Obj {
        self.unit.clone()
    }

    /// The simple summand `1_i` of the unit, with its isometric inclusion.
    pub fn unit_summand(&self, i: usize) -> Result<(Obj, Mor)> {
        match &self.backend {
            Backend::GridHilb { n } if i < *n => {
                let obj = Obj::grid(vec![(i, i)]);
                let mut m = Matrix::zeros(*n, 1);
                m[(i, 0)] = ONE;
                Ok((obj.clone(), Mor::raw(obj, self.unit(), Lin::Dense(m))))
            }
            Backend::RepG { .. } if i == 0 => Ok((self.unit(), self.id(&self.unit()))),
            _ => Err(Error::Precondition(format!("unit has no summand {i}"))),
        }
    }

    fn check_backend(&self, x: &Obj) -> Result<()> {
        match (&self.backend, &*x.0) {
            (Backend::GridHilb { n }, ObjData::Grid { labels }) => {
                if labels.iter().any(|&(i, j)| i >= *n || j >= *n) {
                    return Err(Error::BackendMismatch);
                }
                Ok(())
            }
            (Backend::RepG { group }, ObjData::Rep { mats }) if mats.len() == group.order() => {
                Ok(())
            }
            _ => Err(Error::BackendMismatch),
        }
    }

    // ----- objects -----

    /// `GridHilb` object from cell dimensions; carrier vectors are ordered by
    /// cell in row-major order.
    pub fn grid_object(&self, dims: &[Vec<usize>]) -> Result<Obj> {
        let n = match &self.backend {
            Backend::GridHilb { n } => *n,
            _ => return Err(Error::BackendMismatch),
        };
        if dims.len() != n || dims.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch {
                context: "cell dimensions".into(),
                expected: (n, n),
                found: (dims.len(), dims.first().map_or(0, |r| r.len())),
            });
        }
        let mut labels = Vec::new();
        for (i, row) in dims.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                labels.extend(std::iter::repeat((i, j)).take(d));
            }
        }
        Ok(Obj::grid(labels))
    }

    /// `GridHilb` object with an explicit label per carrier vector. Labels
    /// must be grouped by left index (non-decreasing `i`).
    pub fn grid_object_from_labels(&self, labels: Vec<(usize, usize)>) -> Result<Obj> {
        if !left_sorted(&labels) {
            return Err(Error::Precondition(
                "grid labels must be grouped by left cell index".into(),
            ));
        }
        let obj = Obj::grid(labels);
        self.check_backend(&obj)?;
        Ok(obj)
    }

    /// `d`-dimensional object concentrated in cell `(i, j)`.
    pub fn cell_object(&self, i: usize, j: usize, d: usize) -> Result<Obj> {
        self.grid_object_from_labels(vec![(i, j); d])
    }

    /// `RepG` object; checks the homomorphism law and unitarity.
    pub fn rep_object(&self, mats: Vec<Matrix>) -> Result<Obj> {
        let group = self.group().ok_or(Error::BackendMismatch)?;
        if mats.len() != group.order() {
            return Err(Error::ShapeMismatch {
                context: "representation matrices".into(),
                expected: (group.order(), 1),
                found: (mats.len(), 1),
            });
        }
        let d = mats[0].nrows();
        for m in &mats {
            if m.shape() != (d, d) {
                return Err(Error::ShapeMismatch {
                    context: "representation matrix".into(),
                    expected: (d, d),
                    found: m.shape(),
                });
            }
        }
        let eps = self.tol.verify_eps;
        let id = linalg::identity(d);
        let mut worst = (&mats[group.identity()] - &id).norm();
        for g in 0..group.order() {
            worst = worst.max((mats[g].adjoint() * &mats[g] - &id).norm());
            for h in 0..group.order() {
                worst = worst.max((&mats[g] * &mats[h] - &mats[group.mul(g, h)]).norm());
            }
        }
        if worst > eps * (1.0 + d as f64) {
            return Err(Error::Precondition(format!(
                "not a unitary representation (residual {worst:e})"
            )));
        }
        Ok(Obj::rep(mats))
    }

    /// Carrier `C^d` with trivial group action.
    pub fn trivial_rep(&self, d: usize) -> Result<Obj> {
        let group = self.group().ok_or(Error::BackendMismatch)?;
        Ok(Obj::rep(vec![linalg::identity(d); group.order()]))
    }

    /// Permutation representation from an action `g -> permutation`, where
    /// `action[g][x]` is the image of point `x`.
    pub fn permutation_rep(&self, action: &[Vec<usize>]) -> Result<Obj> {
        let mats = action
            .iter()
            .map(|perm| {
                let d = perm.len();
                let mut m = Matrix::zeros(d, d);
                for (x, &y) in perm.iter().enumerate() {
                    m[(y, x)] = ONE;
                }
                m
            })
            .collect();
        self.rep_object(mats)
    }

    /// Left-regular representation on `C[G]`.
    pub fn regular_rep(&self) -> Result<Obj> {
        let group = self.group().ok_or(Error::BackendMismatch)?;
        let action: Vec<Vec<usize>> = (0..group.order())
            .map(|g| (0..group.order()).map(|x| group.mul(g, x)).collect())
            .collect();
        self.permutation_rep(&action)
    }

    /// Conjugation representation on `C[G]`: `h . e_g = e_{h g h^-1}`.
    pub fn conjugation_rep(&self) -> Result<Obj> {
        let group = self.group().ok_or(Error::BackendMismatch)?;
        let action: Vec<Vec<usize>> = (0..group.order())
            .map(|h| {
                (0..group.order())
                    .map(|g| group.mul(group.mul(h, g), group.inverse(h)))
                    .collect()
            })
            .collect();
        self.permutation_rep(&action)
    }

    /// Permutation representation on the left cosets `G/H`.
    pub fn coset_rep(&self, subgroup: &[usize]) -> Result<Obj> {
        let group = self.group().ok_or(Error::BackendMismatch)?;
        let cosets = group.left_cosets(subgroup)?;
        let coset_of = |x: usize| cosets.iter().position(|c| c.contains(&x)).expect("partition");
        let action: Vec<Vec<usize>> = (0..group.order())
            .map(|g| cosets.iter().map(|c| coset_of(group.mul(g, c[0]))).collect())
            .collect();
        self.permutation_rep(&action)
    }

    /// Direct sum with its isometric coordinate inclusions.
    pub fn direct_sum(&self, objs: &[Obj]) -> Result<(Obj, Vec<Mor>)> {
        for x in objs {
            self.check_backend(x)?;
        }
        let total: usize = objs.iter().map(Obj::dim).sum();
        let mut position: Vec<usize> = (0..total).collect();
        let sum = match &self.backend {
            Backend::GridHilb { .. } => {
                let labels: Vec<_> = objs.iter().flat_map(|x| x.labels()).collect();
                let (order, pos) = stable_order(&labels.iter().map(|l| l.0).collect::<Vec<_>>());
                position = pos;
                Obj::grid(order.iter().map(|&a| labels[a]).collect())
            }
            Backend::RepG { group } => {
                let mats = (0..group.order())
                    .map(|g| {
                        let mut m = Matrix::zeros(total, total);
                        let mut offset = 0;
                        for x in objs {
                            let d = x.dim();
                            m.view_mut((offset, offset), (d, d))
                                .copy_from(&x.rep_matrices().expect("rep object")[g]);
                            offset += d;
                        }
                        m
                    })
                    .collect();
                Obj::rep(mats)
            }
        };
        let mut inclusions = Vec::with_capacity(objs.len());
        let mut offset = 0;
        for x in objs {
            let triplets: Vec<_> = (0..x.dim()).map(|a| (position[offset + a], a, ONE)).collect();
            inclusions.push(Mor::raw(
                x.clone(),
                sum.clone(),
                Lin::from_triplets(total, x.dim(), &triplets),
            ));
            offset += x.dim();
        }
        Ok((sum, inclusions))
    }

    /// Subobject spanned by the orthonormal columns of `w`, which must span an
    /// invariant subspace of `x`; returns the object and the isometry into `x`.
    pub fn subobject(&self, x: &Obj, w: &Matrix) -> Result<(Obj, Mor)> {
        if w.nrows() != x.dim() {
            return Err(Error::ShapeMismatch {
                context: "subobject isometry".into(),
                expected: (x.dim(), w.ncols()),
                found: w.shape(),
            });
        }
        let mut w_sorted = w.clone();
        let sub = match &*x.0 {
            ObjData::Grid { labels } => {
                let mut sub_labels = Vec::with_capacity(w.ncols());
                for k in 0..w.ncols() {
                    let col = w.column(k);
                    let (best, _) = (0..w.nrows())
                        .map(|a| (a, col[a].norm()))
                        .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                    let label = labels[best];
                    let leak: f64 = (0..w.nrows())
                        .filter(|&a| labels[a] != label)
                        .map(|a| col[a].norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    if leak > self.tol.verify_eps.sqrt() {
                        return Err(Error::Precondition(format!(
                            "subobject column {k} is not supported in a single cell ({leak:e})"
                        )));
                    }
                    sub_labels.push(label);
                }
                let (order, _) = stable_order(&sub_labels.iter().map(|l| l.0).collect::<Vec<_>>());
                w_sorted = Matrix::from_fn(w.nrows(), w.ncols(), |r, k| w[(r, order[k])]);
                Obj::grid(order.iter().map(|&k| sub_labels[k]).collect())
            }
            ObjData::Rep { mats } => {
                let wa = w.adjoint();
                let sub_mats = mats.iter().map(|m| &wa * m * w).collect();
                Obj::rep(sub_mats)
            }
        };
        let mut w = w_sorted;
        if let ObjData::Grid { labels } = &*x.0 {
            for k in 0..w.ncols() {
                let label = sub.label(k);
                for a in 0..w.nrows() {
                    if labels[a] != label {
                        w[(a, k)] = ZERO;
                    }
                }
            }
        }
        let inc = Mor::raw(sub.clone(), x.clone(), Lin::Dense(w));
        Ok((sub, inc))
    }

    // ----- morphisms -----

    pub fn id(&self, x: &Obj) -> Mor {
        Mor::raw(x.clone(), x.clone(), Lin::Sparse(CsrMatrix::identity(x.dim())))
    }

    pub fn zero(&self, x: &Obj, y: &Obj) -> Mor {
        Mor::raw(x.clone(), y.clone(), Lin::Dense(Matrix::zeros(y.dim(), x.dim())))
    }

    /// Intertwiner-law residual of a matrix as a map `x -> y`.
    pub fn morphism_defect(&self, x: &Obj, y: &Obj, m: &Matrix) -> f64 {
        match (&*x.0, &*y.0) {
            (ObjData::Grid { labels: lx }, ObjData::Grid { labels: ly }) => {
                let mut leak = 0.0;
                for c in 0..m.ncols() {
                    for r in 0..m.nrows() {
                        if lx[c] != ly[r] {
                            leak += m[(r, c)].norm_sqr();
                        }
                    }
                }
                leak.sqrt()
            }
            (ObjData::Rep { mats: mx }, ObjData::Rep { mats: my }) => mx
                .iter()
                .zip(my)
                .map(|(gx, gy)| (m * gx - gy * m).norm())
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }

    /// Checked morphism constructor.
    pub fn mor(&self, src: &Obj, tgt: &Obj, m: Matrix) -> Result<Mor> {
        self.check_backend(src)?;
        self.check_backend(tgt)?;
        if m.shape() != (tgt.dim(), src.dim()) {
            return Err(Error::ShapeMismatch {
                context: "morphism matrix".into(),
                expected: (tgt.dim(), src.dim()),
                found: m.shape(),
            });
        }
        let residual = self.morphism_defect(src, tgt, &m);
        if residual > self.tol.verify_eps * (1.0 + m.norm()) {
            return Err(Error::NotIntertwiner { residual });
        }
        let mut m = m;
        if src.is_grid() {
            for c in 0..m.ncols() {
                for r in 0..m.nrows() {
                    if src.label(c) != tgt.label(r) {
                        m[(r, c)] = ZERO;
                    }
                }
            }
        }
        Ok(Mor::raw(src.clone(), tgt.clone(), Lin::Dense(m)))
    }

    pub fn tensor_obj(&self, x: &Obj, y: &Obj) -> Result<Obj> {
        match (&*x.0, &*y.0) {
            (ObjData::Grid { .. }, ObjData::Grid { .. }) => {
                let layout = PairLayout::new(x, y);
                Ok(Obj::grid(
                    layout
                        .pairs
                        .iter()
                        .map(|&(a, b)| (x.label(a).0, y.label(b).1))
                        .collect(),
                ))
            }
            (ObjData::Rep { mats: mx }, ObjData::Rep { mats: my }) if mx.len() == my.len() => {
                Ok(Obj::rep(mx.iter().zip(my).map(|(a, b)| a.kronecker(b)).collect()))
            }
            _ => Err(Error::BackendMismatch),
        }
    }

    /// Carrier positions of basis pairs in `x ⊗ y`.
    pub fn tensor_index(&self, x: &Obj, y: &Obj) -> PairLayout {
        PairLayout::new(x, y)
    }

    /// Tensor product of several objects, left to right.
    pub fn tensor_objs(&self, objs: &[&Obj]) -> Result<Obj> {
        let mut acc = self.unit();
        for x in objs {
            acc = self.tensor_obj(&acc, x)?;
        }
        Ok(acc)
    }

    fn tensor_lin(
        &self,
        f: &[(usize, usize, C64)],
        (fx, fy): (&Obj, &Obj),
        g: &[(usize, usize, C64)],
        (gx, gy): (&Obj, &Obj),
    ) -> Result<(Obj, Obj, Lin)> {
        let src = self.tensor_obj(fx, gx)?;
        let tgt = self.tensor_obj(fy, gy)?;
        let src_layout = PairLayout::new(fx, gx);
        let tgt_layout = PairLayout::new(fy, gy);
        let mut triplets = Vec::with_capacity(f.len() * g.len());
        for &(fr, fc, fv) in f {
            for &(gr, gc, gv) in g {
                if let (Some(r), Some(c)) = (tgt_layout.get(fr, gr), src_layout.get(fc, gc)) {
                    triplets.push((r, c, fv * gv));
                }
            }
        }
        let lin = Lin::from_triplets(tgt.dim(), src.dim(), &triplets);
        Ok((src, tgt, densify(lin)))
    }

    /// `f ⊗ g` in the pair layout described at module level.
    pub fn tensor_mor(&self, f: &Mor, g: &Mor) -> Result<Mor> {
        let (src, tgt, lin) = self.tensor_lin(
            &f.nonzeros(),
            (&f.src, &f.tgt),
            &g.nonzeros(),
            (&g.src, &g.tgt),
        )?;
        Ok(Mor::raw(src, tgt, lin))
    }

    /// Tensor product of several morphisms, left to right.
    pub fn tensor_mors(&self, mors: &[&Mor]) -> Result<Mor> {
        let mut acc = self.id(&self.unit());
        for f in mors {
            acc = self.tensor_mor(&acc, f)?;
        }
        Ok(acc)
    }

    /// `1_x ⊗ g`.
    pub fn whisker_left(&self, x: &Obj, g: &Mor) -> Result<Mor> {
        self.tensor_mor(&self.id(x), g)
    }

    /// `f ⊗ 1_y`.
    pub fn whisker_right(&self, f: &Mor, y: &Obj) -> Result<Mor> {
        self.tensor_mor(f, &self.id(y))
    }

    /// Composite `maps[0] ∘ maps[1] ∘ ... ∘ maps[k]`.
    pub fn chain(&self, maps: &[&Mor]) -> Result<Mor> {
        let mut iter = maps.iter().rev();
        let mut acc = (*iter.next().ok_or(Error::Precondition("empty composite".into()))?).clone();
        for next in iter {
            acc = next.compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn dagger(&self, f: &Mor) -> Mor {
        f.dagger()
    }

    /// Orthonormal basis of `Hom(x, y)` under the Frobenius inner product.
    pub fn hom_basis(&self, x: &Obj, y: &Obj) -> Result<Vec<Mor>> {
        self.check_backend(x)?;
        self.check_backend(y)?;
        let (dx, dy) = (x.dim(), y.dim());
        match (&*x.0, &*y.0) {
            (ObjData::Grid { .. }, ObjData::Grid { .. }) => {
                let mut basis = Vec::new();
                for r in 0..dy {
                    for c in 0..dx {
                        if x.label(c) == y.label(r) {
                            basis.push(Mor::raw(
                                x.clone(),
                                y.clone(),
                                Lin::from_triplets(dy, dx, &[(r, c, ONE)]),
                            ));
                        }
                    }
                }
                Ok(basis)
            }
            (ObjData::Rep { mats: mx }, ObjData::Rep { mats: my }) => {
                if x.has_trivial_action() && y.has_trivial_action() {
                    let mut basis = Vec::with_capacity(dx * dy);
                    for r in 0..dy {
                        for c in 0..dx {
                            basis.push(Mor::raw(
                                x.clone(),
                                y.clone(),
                                Lin::from_triplets(dy, dx, &[(r, c, ONE)]),
                            ));
                        }
                    }
                    return Ok(basis);
                }
                let order = mx.len() as f64;
                let character = |m: &Matrix| linalg::trace(m);
                let dim: C64 = mx
                    .iter()
                    .zip(my)
                    .map(|(a, b)| character(a).conj() * character(b))
                    .sum::<C64>()
                    / linalg::real(order);
                let dim = dim.re.round() as usize;
                let mut found: Vec<Vector> = Vec::with_capacity(dim);
                'outer: for r in 0..dy {
                    for c in 0..dx {
                        if found.len() == dim {
                            break 'outer;
                        }
                        // Group average of the matrix unit E_rc.
                        let mut avg = Matrix::zeros(dy, dx);
                        for (gx, gy) in mx.iter().zip(my) {
                            let col = gy.column(r);
                            let row = gx.column(c).map(|v| v.conj());
                            avg += col * row.transpose();
                        }
                        avg /= linalg::real(order);
                        let v = linalg::vectorize(&avg);
                        let original = v.norm();
                        if original < 1e-12 {
                            continue;
                        }
                        let mut w = v;
                        for _ in 0..2 {
                            for q in &found {
                                let proj = q.dotc(&w);
                                w.axpy(-proj, q, ONE);
                            }
                        }
                        let rest = w.norm();
                        if rest > 1e-8 * original {
                            found.push(w.unscale(rest));
                        }
                    }
                }
                if found.len() != dim {
                    return Err(Error::Internal(format!(
                        "intertwiner space: expected dimension {dim}, found {}",
                        found.len()
                    )));
                }
                Ok(found
                    .iter()
                    .map(|v| {
                        Mor::raw(x.clone(), y.clone(), Lin::Dense(linalg::unvectorize(v, dy, dx)))
                    })
                    .collect())
            }
            _ => Err(Error::BackendMismatch),
        }
    }

    /// Trace-like functional on `End(1)`: the sum of the coefficients on the
    /// simple summands of the unit.
    pub fn tau(&self, f: &Mor) -> Result<C64> {
        if f.src != self.unit || f.tgt != self.unit {
            return Err(Error::NotUnitObject);
        }
        Ok(linalg::trace(&f.matrix()))
    }

    /// Coordinates of `f` in an orthonormal basis.
    pub fn coordinates(&self, basis: &[Mor], f: &Mor) -> Vector {
        let fm = f.matrix();
        Vector::from_iterator(
            basis.len(),
            basis.iter().map(|b| linalg::inner(&b.matrix(), &fm)),
        )
    }

    /// Linear combination `sum_k coeffs[k] basis[k]` in `Hom(x, y)`.
    pub fn combine(&self, x: &Obj, y: &Obj, basis: &[Mor], coeffs: &Vector) -> Mor {
        let mut m = Matrix::zeros(y.dim(), x.dim());
        for (b, &c) in basis.iter().zip(coeffs.iter()) {
            if c != ZERO {
                for (r, col, v) in b.nonzeros() {
                    m[(r, col)] += v * c;
                }
            }
        }
        Mor::raw(x.clone(), y.clone(), Lin::Dense(m))
    }

    /// Splits an idempotent endomorphism through its image: returns `(B, v, w)`
    /// with `v: X -> B`, `w: B -> X`, `v w = 1_B`, `w v = p`, and `w` isometric.
    pub fn split_idempotent(&self, p: &Mor) -> Result<(Obj, Mor, Mor)> {
        let x = p.src.clone();
        if p.tgt != x {
            return Err(Error::ObjectMismatch("idempotent must be an endomorphism".into()));
        }
        let pm = p.to_matrix();
        let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for a in 0..x.dim() {
            groups.entry(x.label(a)).or_default().push(a);
        }
        let mut columns: Vec<Vector> = Vec::new();
        for idx in groups.values() {
            let block = Matrix::from_fn(idx.len(), idx.len(), |r, c| pm[(idx[r], idx[c])]);
            let (_, w_block) = linalg::split_idempotent(&block, &self.tol)?;
            for k in 0..w_block.ncols() {
                let mut col = Vector::zeros(x.dim());
                for (r, &a) in idx.iter().enumerate() {
                    col[a] = w_block[(r, k)];
                }
                columns.push(col);
            }
        }
        let w = if columns.is_empty() {
            Matrix::zeros(x.dim(), 0)
        } else {
            Matrix::from_columns(&columns)
        };
        let (image, w_mor) = self.subobject(&x, &w)?;
        let v = Mor::raw(x.clone(), image.clone(), Lin::Dense(w.adjoint() * &pm));
        let scale = 1.0 + pm.norm();
        let check = v.compose(&w_mor)?.distance(&self.id(&image))
            + w_mor.compose(&v)?.distance(p);
        if check > self.tol.verify_eps * scale {
            return Err(Error::NotIdempotent { residual: check });
        }
        Ok((image, v, w_mor))
    }

    /// Entrywise conjugate of `f: X -> Y`, a morphism `X̄ -> Ȳ`.
    pub fn conjugate_mor(&self, f: &Mor) -> Result<Mor> {
        let src = self.dual_obj(&f.src)?;
        let tgt = self.dual_obj(&f.tgt)?;
        let (src_pos, tgt_pos) = (dual_positions(&f.src), dual_positions(&f.tgt));
        let fm = f.matrix();
        let mut m = Matrix::zeros(tgt.dim(), src.dim());
        for c in 0..fm.ncols() {
            for r in 0..fm.nrows() {
                m[(tgt_pos[r], src_pos[c])] = fm[(r, c)].conj();
            }
        }
        Ok(Mor::raw(src, tgt, Lin::Dense(m)))
    }

    /// Builds the matrix whose `k`-th column is the concatenated `vec` of the
    /// outputs of `apply(basis[k])`; used to turn linear conditions on hom
    /// spaces into a linear system over basis coordinates.
    pub fn constraint_matrix<F>(&self, basis: &[Mor], apply: F) -> Result<Matrix>
    where
        F: Fn(&Mor) -> Result<Vec<Mor>>,
    {
        let mut columns: Vec<Vector> = Vec::with_capacity(basis.len());
        for b in basis {
            let outputs = apply(b)?;
            let mut entries = Vec::new();
            for out in &outputs {
                entries.extend_from_slice(out.matrix().as_slice());
            }
            columns.push(Vector::from_vec(entries));
        }
        if columns.is_empty() {
            return Ok(Matrix::zeros(0, 0));
        }
        Ok(Matrix::from_columns(&columns))
    }
}

/// Stacks the `vec` of several morphisms into one vector, matching the row
/// order produced by [`Category::constraint_matrix`].
pub fn stack(mors: &[&Mor]) -> Vector {
    let mut entries = Vec::new();
    for m in mors {
        entries.extend_from_slice(m.matrix().as_slice());
    }
    Vector::from_vec(entries)
}
