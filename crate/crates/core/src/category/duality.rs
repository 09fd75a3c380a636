//! Conjugates, standard solutions of the conjugate equations, and scalar
//! dimensions.

use super::{dual_positions, stack, Category, Mor, Obj, ObjData, PairLayout, SimpleDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{self, Lin, Matrix, ONE};

/// A solution `(γ, γ̄)` of the conjugate equations for `X`:
/// `γ: 1 -> X̄ ⊗ X`, `γ̄: 1 -> X ⊗ X̄`,
/// `(γ̄* ⊗ 1_X)(1_X ⊗ γ) = 1_X` and `(γ* ⊗ 1_X̄)(1_X̄ ⊗ γ̄) = 1_X̄`.
#[derive(Debug, Clone)]
pub struct DualitySolution {
    pub object: Obj,
    pub dual: Obj,
    pub gamma: Mor,
    pub gamma_bar: Mor,
}

/// Which side the comparing unitary acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualityForm {
    /// `ω = (1 ⊗ u) γ`, `ω̄ = (u ⊗ 1) γ̄` with `u ∈ End(X)`.
    OnObject,
    /// `ω = (v ⊗ 1) γ`, `ω̄ = (1 ⊗ v) γ̄` with `v ∈ End(X̄)`.
    OnDual,
}

#[derive(Debug, Clone)]
pub struct DualityComparison {
    pub form: DualityForm,
    pub unitary: Mor,
    pub residual: f64,
}

/// Scalar dimension of an object, split over the cells of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDimension {
    /// `((i, j), τ(γ_ij* γ_ij))` for every non-empty cell.
    pub cells: Vec<((usize, usize), f64)>,
    pub total: f64,
}

impl Category {
    /// Conjugate object: labels transposed (`GridHilb`, regrouped by the new
    /// left index) or the complex conjugate representation (`RepG`).
    pub fn dual_obj(&self, x: &Obj) -> Result<Obj> {
        self.check_backend(x)?;
        Ok(match &*x.0 {
            ObjData::Grid { labels } => {
                let pos = dual_positions(x);
                let mut out = vec![(0, 0); labels.len()];
                for (a, &(i, j)) in labels.iter().enumerate() {
                    out[pos[a]] = (j, i);
                }
                Obj::grid(out)
            }
            ObjData::Rep { mats } => Obj::rep(mats.iter().map(|m| m.map(|v| v.conj())).collect()),
        })
    }

    /// Index of the unit summand labelled `(k, k)` in the carrier of `1`.
    fn unit_index(&self, k: usize) -> usize {
        if self.unit.is_grid() {
            k
        } else {
            0
        }
    }

    /// The standard solution `γ = Σ_a ē_a ⊗ e_a`, `γ̄ = Σ_a e_a ⊗ ē_a` over the
    /// carrier basis. It is balanced and `τ(γ*γ) = τ(γ̄*γ̄) = dim X`.
    pub fn balanced_duality(&self, x: &Obj) -> Result<DualitySolution> {
        let dual = self.dual_obj(x)?;
        let unit = self.unit();
        let left = self.tensor_obj(&dual, x)?;
        let right = self.tensor_obj(x, &dual)?;
        let left_layout = PairLayout::new(&dual, x);
        let right_layout = PairLayout::new(x, &dual);
        let mut g = Vec::with_capacity(x.dim());
        let mut gb = Vec::with_capacity(x.dim());
        let pos = dual_positions(x);
        for a in 0..x.dim() {
            let (i, j) = x.label(a);
            let p = left_layout.get(pos[a], a).expect("ē_a ⊗ e_a is composable");
            let q = right_layout.get(a, pos[a]).expect("e_a ⊗ ē_a is composable");
            g.push((p, self.unit_index(j), ONE));
            gb.push((q, self.unit_index(i), ONE));
        }
        let gamma = Mor::raw(
            unit.clone(),
            left.clone(),
            Lin::from_triplets(left.dim(), unit.dim(), &g),
        );
        let gamma_bar = Mor::raw(
            unit.clone(),
            right.clone(),
            Lin::from_triplets(right.dim(), unit.dim(), &gb),
        );
        Ok(DualitySolution {
            object: x.clone(),
            dual,
            gamma,
            gamma_bar,
        })
    }

    /// Checks shapes of a user-supplied pair and packages it.
    pub fn duality_solution(&self, x: &Obj, gamma: Mor, gamma_bar: Mor) -> Result<DualitySolution> {
        let dual = self.dual_obj(x)?;
        let unit = self.unit();
        if gamma.source() != &unit || gamma_bar.source() != &unit {
            return Err(Error::ObjectMismatch("duality maps start at the unit".into()));
        }
        if gamma.target() != &self.tensor_obj(&dual, x)?
            || gamma_bar.target() != &self.tensor_obj(x, &dual)?
        {
            return Err(Error::ObjectMismatch(
                "duality maps land in X̄ ⊗ X and X ⊗ X̄".into(),
            ));
        }
        Ok(DualitySolution {
            object: x.clone(),
            dual,
            gamma,
            gamma_bar,
        })
    }

    /// Largest residual of the two conjugate equations.
    pub fn duality_defect(&self, sol: &DualitySolution) -> Result<f64> {
        let x = &sol.object;
        let xb = &sol.dual;
        let first = self
            .whisker_right(&sol.gamma_bar.dagger(), x)?
            .compose(&self.whisker_left(x, &sol.gamma)?)?;
        let second = self
            .whisker_right(&sol.gamma.dagger(), xb)?
            .compose(&self.whisker_left(xb, &sol.gamma_bar)?)?;
        Ok(first
            .distance(&self.id(x))
            .max(second.distance(&self.id(xb))))
    }

    /// Largest `|τ(γ*(1 ⊗ f)γ) - τ(γ̄*(f ⊗ 1)γ̄)|` over an orthonormal basis of
    /// `End(X)`; zero exactly when the solution is balanced.
    pub fn balance_defect(&self, sol: &DualitySolution) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for f in self.hom_basis(&sol.object, &sol.object)? {
            let left = sol
                .gamma
                .dagger()
                .compose(&self.whisker_left(&sol.dual, &f)?)?
                .compose(&sol.gamma)?;
            let right = sol
                .gamma_bar
                .dagger()
                .compose(&self.whisker_right(&f, &sol.dual)?)?
                .compose(&sol.gamma_bar)?;
            worst = worst.max((self.tau(&left)? - self.tau(&right)?).norm());
        }
        Ok(worst)
    }

    /// Scalar dimension `τ(γ*γ)` and its per-cell parts `τ(γ_ij* γ_ij)` with
    /// `γ_ij = (1 ⊗ P_ij) γ`, `P_ij` the projection onto cell `(i, j)`.
    pub fn scalar_dimension(&self, sol: &DualitySolution) -> Result<ScalarDimension> {
        let x = &sol.object;
        let mut cells: Vec<(usize, usize)> = x.labels();
        cells.sort_unstable();
        cells.dedup();
        let mut out = Vec::with_capacity(cells.len());
        for cell in cells {
            let mut p = Matrix::zeros(x.dim(), x.dim());
            for a in 0..x.dim() {
                if x.label(a) == cell {
                    p[(a, a)] = ONE;
                }
            }
            let p = Mor::raw(x.clone(), x.clone(), Lin::Dense(p));
            let g = self.whisker_left(&sol.dual, &p)?.compose(&sol.gamma)?;
            out.push((cell, self.tau(&g.dagger().compose(&g)?)?.re));
        }
        let total = self.tau(&sol.gamma.dagger().compose(&sol.gamma)?)?.re;
        Ok(ScalarDimension { cells: out, total })
    }

    /// Twists a solution by an invertible `h ∈ End(X)`:
    /// `ω = (1 ⊗ h) γ`, `ω̄ = ((h^-1)* ⊗ 1) γ̄`.
    pub fn twist_duality(&self, sol: &DualitySolution, h: &Mor) -> Result<DualitySolution> {
        let hinv = linalg::inverse(&h.matrix())?;
        let hinv_star = Mor::raw(
            sol.object.clone(),
            sol.object.clone(),
            Lin::Dense(hinv.adjoint()),
        );
        Ok(DualitySolution {
            object: sol.object.clone(),
            dual: sol.dual.clone(),
            gamma: self.whisker_left(&sol.dual, h)?.compose(&sol.gamma)?,
            gamma_bar: self
                .whisker_right(&hinv_star, &sol.dual)?
                .compose(&sol.gamma_bar)?,
        })
    }

    /// Finds a unitary relating two standard solutions for the same object, or
    /// reports [`Error::NotEquivalent`] with the smallest residual found.
    pub fn compare_duality(
        &self,
        a: &DualitySolution,
        b: &DualitySolution,
    ) -> Result<DualityComparison> {
        if a.object != b.object || a.dual != b.dual {
            return Err(Error::ObjectMismatch(
                "duality solutions for different objects".into(),
            ));
        }
        let target = stack(&[&b.gamma, &b.gamma_bar]);
        let scale = 1.0 + target.norm();
        let mut best = f64::INFINITY;
        for form in [DualityForm::OnObject, DualityForm::OnDual] {
            let space = match form {
                DualityForm::OnObject => &a.object,
                DualityForm::OnDual => &a.dual,
            };
            let basis = self.hom_basis(space, space)?;
            let system = self.constraint_matrix(&basis, |u| {
                let (g, gb) = match form {
                    DualityForm::OnObject => (
                        self.whisker_left(&a.dual, u)?.compose(&a.gamma)?,
                        self.whisker_right(u, &a.dual)?.compose(&a.gamma_bar)?,
                    ),
                    DualityForm::OnDual => (
                        self.whisker_right(u, &a.object)?.compose(&a.gamma)?,
                        self.whisker_left(&a.object, u)?.compose(&a.gamma_bar)?,
                    ),
                };
                Ok(vec![g, gb])
            })?;
            let solution = match linalg::solve_linear_subspace(&system, Some(&target), &self.tol) {
                Ok(s) => s,
                Err(Error::NoSolution { residual }) => {
                    best = best.min(residual);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let u = self.combine(space, space, &basis, &solution.particular);
            let unitarity = u.dagger().compose(&u)?.distance(&self.id(space));
            let residual = solution.residual + unitarity;
            if residual <= self.tol.verify_eps * scale {
                return Ok(DualityComparison {
                    form,
                    unitary: u,
                    residual,
                });
            }
            best = best.min(residual);
        }
        Err(Error::NotEquivalent { residual: best })
    }

    /// Solution assembled from a simple decomposition:
    /// `γ = Σ (ū_{s,k} ⊗ u_{s,k}) γ_s`, `γ̄ = Σ (u_{s,k} ⊗ ū_{s,k}) γ̄_s` with the
    /// standard solutions `γ_s` of the simple summands.
    pub fn duality_from_decomposition(
        &self,
        x: &Obj,
        decomposition: &SimpleDecomposition,
    ) -> Result<DualitySolution> {
        let dual = self.dual_obj(x)?;
        let unit = self.unit();
        let left = self.tensor_obj(&dual, x)?;
        let right = self.tensor_obj(x, &dual)?;
        let mut gamma = self.zero(&unit, &left);
        let mut gamma_bar = self.zero(&unit, &right);
        for summand in &decomposition.summands {
            let simple = self.balanced_duality(&summand.object)?;
            for u in &summand.isometries {
                if u.target() != x {
                    return Err(Error::ObjectMismatch(
                        "decomposition belongs to another object".into(),
                    ));
                }
                let ub = self.conjugate_mor(u)?;
                gamma = gamma.add(&self.tensor_mor(&ub, u)?.compose(&simple.gamma)?)?;
                gamma_bar = gamma_bar.add(&self.tensor_mor(u, &ub)?.compose(&simple.gamma_bar)?)?;
            }
        }
        Ok(DualitySolution {
            object: x.clone(),
            dual,
            gamma,
            gamma_bar,
        })
    }
}
