//! Orthogonal decomposition of objects into simple summands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Backend, Category, Mor, Obj};
use crate::error::{Error, Result};
use crate::linalg::{self, Lin, Matrix, ONE};

/// One isotypic component: a simple object `Z_s` and isometries
/// `u_{s,k}: Z_s -> X`, one per copy.
#[derive(Debug, Clone)]
pub struct SimpleSummand {
    pub object: Obj,
    pub isometries: Vec<Mor>,
}

impl SimpleSummand {
    pub fn multiplicity(&self) -> usize {
        self.isometries.len()
    }
}

/// `X ≅ ⊕_s Z_s^{⊕ n_s}` realized by isometries with `Σ u u* = 1_X`.
#[derive(Debug, Clone)]
pub struct SimpleDecomposition {
    pub summands: Vec<SimpleSummand>,
}

impl SimpleDecomposition {
    pub fn isometries(&self) -> impl Iterator<Item = &Mor> {
        self.summands.iter().flat_map(|s| s.isometries.iter())
    }
}

const SPLITTING_SEED: u64 = 0x51_6e_91_e5;
const ATTEMPTS: u64 = 6;

impl Category {
    /// Decomposes `x` into simples. `GridHilb` uses the cells directly;
    /// `RepG` diagonalizes a generic self-adjoint element of `End(x)` and
    /// groups its eigenspaces by isomorphism type.
    pub fn simple_decomposition(&self, x: &Obj) -> Result<SimpleDecomposition> {
        self.check_backend(x)?;
        match &self.backend {
            Backend::GridHilb { n } => {
                let mut summands = Vec::new();
                for i in 0..*n {
                    for j in 0..*n {
                        let copies: Vec<usize> =
                            (0..x.dim()).filter(|&a| x.label(a) == (i, j)).collect();
                        if copies.is_empty() {
                            continue;
                        }
                        let object = Obj::grid(vec![(i, j)]);
                        let isometries = copies
                            .into_iter()
                            .map(|a| {
                                Mor::raw(
                                    object.clone(),
                                    x.clone(),
                                    Lin::from_triplets(x.dim(), 1, &[(a, 0, ONE)]),
                                )
                            })
                            .collect();
                        summands.push(SimpleSummand { object, isometries });
                    }
                }
                Ok(SimpleDecomposition { summands })
            }
            Backend::RepG { .. } => {
                let mut last = None;
                for attempt in 0..ATTEMPTS {
                    match self.split_by_generic_element(x, SPLITTING_SEED + attempt) {
                        Ok(d) => return Ok(d),
                        Err(e) => last = Some(e),
                    }
                }
                Err(last.expect("at least one attempt"))
            }
        }
    }

    fn split_by_generic_element(&self, x: &Obj, seed: u64) -> Result<SimpleDecomposition> {
        if x.is_zero() {
            return Ok(SimpleDecomposition { summands: vec![] });
        }
        let basis = self.hom_basis(x, x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = Matrix::zeros(x.dim(), x.dim());
        for b in &basis {
            let coeff = linalg::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let bm = b.matrix();
            h += bm.as_ref() * coeff + bm.adjoint() * coeff.conj();
        }
        let (values, vectors) = linalg::hermitian_eigen(&h)?;
        let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in values.iter().enumerate() {
            match clusters.last_mut() {
                Some(c) if (v - values[c[c.len() - 1]]).abs() <= self.tol.cluster_eps * scale => {
                    c.push(k)
                }
                _ => clusters.push(vec![k]),
            }
        }

        let mut summands: Vec<SimpleSummand> = Vec::new();
        for cluster in clusters {
            let cols: Vec<_> = cluster.iter().map(|&k| vectors.column(k).into_owned()).collect();
            let v = Matrix::from_columns(&cols);
            let (z, inc) = self.subobject(x, &v)?;
            if self.hom_basis(&z, &z)?.len() != 1 {
                return Err(Error::Internal(
                    "eigenspace of a generic element is not simple".into(),
                ));
            }
            let mut placed = false;
            for summand in summands.iter_mut() {
                let hom = self.hom_basis(&summand.object, &z)?;
                if hom.len() == 1 {
                    let d = z.dim() as f64;
                    let w = hom[0].scale(linalg::real(d.sqrt()));
                    summand.isometries.push(inc.compose(&w)?);
                    placed = true;
                    break;
                }
            }
            if !placed {
                summands.push(SimpleSummand {
                    object: z,
                    isometries: vec![inc],
                });
            }
        }
        let dec = SimpleDecomposition { summands };
        let defect = self.decomposition_defect(x, &dec)?;
        if defect > self.tol.verify_eps.sqrt() {
            return Err(Error::Internal(format!(
                "simple decomposition defect {defect:e}"
            )));
        }
        Ok(dec)
    }

    /// Largest residual among `u* u = 1`, `u_a* u_b = 0` (a ≠ b) and
    /// `Σ u u* = 1_X`.
    pub fn decomposition_defect(&self, x: &Obj, dec: &SimpleDecomposition) -> Result<f64> {
        let isos: Vec<&Mor> = dec.isometries().collect();
        let mut worst: f64 = 0.0;
        let mut total = self.zero(x, x);
        for (a, u) in isos.iter().enumerate() {
            for (b, w) in isos.iter().enumerate() {
                let prod = u.dagger().compose(w)?.to_matrix();
                let expected = if a == b {
                    linalg::identity(prod.nrows())
                } else {
                    Matrix::zeros(prod.nrows(), prod.ncols())
                };
                worst = worst.max((prod - expected).norm());
            }
            total = total.add(&u.compose(&u.dagger())?)?;
        }
        Ok(worst.max(total.distance(&self.id(x))))
    }

    /// A representative of every isomorphism class of simple objects.
    pub fn simple_objects(&self) -> Result<Vec<Obj>> {
        match &self.backend {
            Backend::GridHilb { n } => Ok((0..*n)
                .flat_map(|i| (0..*n).map(move |j| Obj::grid(vec![(i, j)])))
                .collect()),
            Backend::RepG { .. } => {
                let regular = self.regular_rep()?;
                Ok(self
                    .simple_decomposition(&regular)?
                    .summands
                    .into_iter()
                    .map(|s| s.object)
                    .collect())
            }
        }
    }
}
