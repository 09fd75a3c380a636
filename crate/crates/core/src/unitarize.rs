//! Unitarization: rescaling C*-Frobenius algebras to special ones, unitarizing
//! module actions, splitting separable algebras into indecomposable summands,
//! and producing an explicit isomorphism onto a special C*-Frobenius algebra.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{
    is_connected, is_special, separability_witness, verify_action, verify_algebra,
    verify_cstar_frobenius, verify_frobenius, verify_iso, transport_algebra, ActionModule,
    AlgebraIso, AlgebraObject, FrobeniusStructure,
};
use crate::category::{Backend, Category, Mor, Obj, PairTable};
use crate::error::{Error, Result};
use crate::linalg::{
    self, minimize_defect_best, DefectObjective, Matrix, SolverOptions, SolverOutcome, Vector,
    ONE,
};
use crate::module_theory::{end_algebra, semisimple_split};
use crate::report::Report;

// ----- specialization -----

/// Rescales a C*-Frobenius algebra to a special one: with `c = m m*` (a
/// bimodule endomorphism) and `u = √c`, returns `transport_algebra(A, u)`.
pub fn specialize(cat: &Category, a: &AlgebraObject) -> Result<(AlgebraObject, AlgebraIso)> {
    let frob = verify_cstar_frobenius(cat, a)?;
    if !frob.pass {
        return Err(Error::Precondition(format!(
            "algebra is not C*-Frobenius (residual {:e})",
            frob.max_residual()
        )));
    }
    let x = &a.carrier;
    let m = &a.mult;
    let c = m.compose(&m.dagger())?;
    let cm = c.compose(m)?;
    let left = m.compose(&cat.whisker_right(&c, x)?)?;
    let right = m.compose(&cat.whisker_left(x, &c)?)?;
    let defect = cm
        .distance(&left)
        .max(cm.distance(&right))
        .max(left.distance(&right));
    let scale = 1.0 + c.norm() * m.norm();
    if defect > cat.tolerance().verify_eps * scale {
        return Err(Error::Precondition(format!(
            "m m* is not a bimodule endomorphism (residual {defect:e})"
        )));
    }
    let u = linalg::hermitian_sqrt(&c.matrix(), cat.tolerance())?;
    let u = cat.mor(x, x, u)?;
    transport_algebra(cat, a, &u)
}

// ----- modules -----

/// A right module with unitarized action `r' = h⁻¹ r (h ⊗ 1)`, `h = √(r r*)`.
#[derive(Debug, Clone)]
pub struct ModuleUnitarization {
    pub module: ActionModule,
    pub h: Mor,
    pub h_inv: Mor,
}

impl ModuleUnitarization {
    /// `h²`, the positive operator that transports adjoints into this module.
    pub fn h_squared(&self) -> Result<Mor> {
        self.h.compose(&self.h)
    }
}

/// `h_X² f* h_Y⁻²` for `f: X -> Y`: the adjoint of `f` read through the
/// unitarized structures of `X` and `Y`.
pub fn transported_adjoint(
    f: &Mor,
    x: &ModuleUnitarization,
    y: &ModuleUnitarization,
) -> Result<Mor> {
    let hy_inv2 = y.h_inv.compose(&y.h_inv)?;
    x.h_squared()?.compose(&f.dagger())?.compose(&hy_inv2)
}

/// The polar rescaling of an action map, without checking any module law.
/// Positively homogeneous of degree one in `r`.
pub fn rescale_action(cat: &Category, r: &Mor, alg: &Obj) -> Result<(Mor, Mor, Mor)> {
    let x = r.target().clone();
    let rr = r.compose(&r.dagger())?;
    let h = cat.mor(&x, &x, linalg::hermitian_sqrt(&rr.matrix(), cat.tolerance())?)?;
    let h_inv = cat.mor(&x, &x, linalg::hermitian_inv_sqrt(&rr.matrix(), cat.tolerance())?)?;
    let r_new = cat.chain(&[&h_inv, r, &cat.whisker_right(&h, alg)?])?;
    Ok((r_new, h, h_inv))
}

/// Unitarizes a right module over a special algebra.
pub fn unitarize_module(
    cat: &Category,
    q: &AlgebraObject,
    x: &ActionModule,
) -> Result<ModuleUnitarization> {
    let special = is_special(cat, q)?;
    if !special.pass {
        return Err(Error::Precondition(format!(
            "algebra is not special (residual {:e})",
            special.max_residual()
        )));
    }
    let r = x
        .right
        .as_ref()
        .ok_or_else(|| Error::Precondition("module has no right action".into()))?;
    let laws = verify_action(cat, q, x)?;
    if !laws.pass {
        return Err(Error::Precondition(format!(
            "module laws fail (residual {:e})",
            laws.max_residual()
        )));
    }
    let (r_new, h, h_inv) = rescale_action(cat, r, &q.carrier)?;
    Ok(ModuleUnitarization {
        module: ActionModule {
            carrier: x.carrier.clone(),
            left: None,
            right: Some(r_new),
        },
        h,
        h_inv,
    })
}

/// Residuals of `r' r'* = 1`, the module laws of `r'`, and `h⁻¹` being a
/// module map `(X, r) -> (X, r')`.
pub fn verify_module_unitarization(
    cat: &Category,
    q: &AlgebraObject,
    original: &ActionModule,
    u: &ModuleUnitarization,
) -> Result<Report> {
    let mut report = Report::new("module_unitarization", *cat.tolerance());
    let r = original
        .right
        .as_ref()
        .ok_or_else(|| Error::Precondition("module has no right action".into()))?;
    let r_new = u.module.right.as_ref().expect("unitarized modules are right modules");
    let x = &original.carrier;
    report.verify(
        "coisometry",
        r_new.compose(&r_new.dagger())?.distance(&cat.id(x)),
    );
    let laws = verify_action(cat, q, &u.module)?;
    report.absorb("action", laws);
    let lhs = u.h_inv.compose(r)?;
    let rhs = r_new.compose(&cat.whisker_right(&u.h_inv, &q.carrier)?)?;
    report.verify("module_iso", lhs.distance(&rhs));
    report.verify(
        "h_inverse",
        u.h.compose(&u.h_inv)?.distance(&cat.id(x)),
    );
    Ok(report)
}

// ----- decomposition -----

/// An indecomposable summand `B` of an algebra `A` with `v: A -> B`,
/// `w: B -> A`, `v w = 1_B`.
#[derive(Debug, Clone)]
pub struct AlgebraSummand {
    pub algebra: AlgebraObject,
    pub projection: Mor,
    pub inclusion: Mor,
}

const MAX_SPLIT_DEPTH: usize = 32;

/// Splits a separable algebra along the central idempotents of its bimodule
/// endomorphism algebra, recursively, until every summand is indecomposable.
pub fn decompose_algebra(cat: &Category, a: &AlgebraObject) -> Result<Vec<AlgebraSummand>> {
    separability_witness(cat, a)?;
    let mut out = Vec::new();
    let id = cat.id(&a.carrier);
    split_summand(cat, a.clone(), id.clone(), id, &mut out, 0)?;
    Ok(out)
}

fn split_summand(
    cat: &Category,
    b: AlgebraObject,
    v: Mor,
    w: Mor,
    out: &mut Vec<AlgebraSummand>,
    depth: usize,
) -> Result<()> {
    if depth > MAX_SPLIT_DEPTH {
        return Err(Error::Internal("algebra decomposition did not terminate".into()));
    }
    let e = end_algebra(cat, &b, &ActionModule::regular_bimodule(&b))?;
    if e.dim() <= 1 {
        out.push(AlgebraSummand {
            algebra: b,
            projection: v,
            inclusion: w,
        });
        return Ok(());
    }
    let ps = semisimple_split(cat, &e)?;
    if ps.len() <= 1 {
        return Err(Error::Internal(format!(
            "bimodule endomorphisms have dimension {} but trivial center",
            e.dim()
        )));
    }
    let x = &b.carrier;
    for p in &ps {
        let (obj, vk, wk) = cat.split_idempotent(p)?;
        let mult = cat.chain(&[&vk, &b.mult, &cat.tensor_mor(&wk, &wk)?])?;
        let unit = vk.compose(&b.unit)?;
        let bk = AlgebraObject::new(cat, obj, mult, unit)?;
        debug_assert!(wk.target() == x);
        split_summand(cat, bk, vk.compose(&v)?, w.compose(&wk)?, out, depth + 1)?;
    }
    Ok(())
}

/// `||Σ w_k v_k - 1_A||`.
pub fn assembly_defect(cat: &Category, a: &AlgebraObject, parts: &[AlgebraSummand]) -> Result<f64> {
    let x = &a.carrier;
    let mut total = cat.zero(x, x);
    for p in parts {
        total = total.add(&p.inclusion.compose(&p.projection)?)?;
    }
    Ok(total.distance(&cat.id(x)))
}

// ----- Frobenius promotion -----

/// Frobenius structure on a connected separable algebra from the pairing
/// `ι* m`: with `f = ((ι* m) ⊗ 1)(1 ⊗ γ̄): A -> Ā` and copairing
/// `b = (1 ⊗ f⁻¹) γ̄`, the counit is `ι*` and `Δ = (m ⊗ 1)(1 ⊗ b)`.
pub fn frobenius_promotion(cat: &Category, a: &AlgebraObject) -> Result<FrobeniusStructure> {
    let (connected, dim) = is_connected(cat, a)?;
    if !connected {
        return Err(Error::NotConnected { dim });
    }
    separability_witness(cat, a)?;
    let x = &a.carrier;
    let duality = cat.balanced_duality(x)?;
    let pairing = a.unit.dagger().compose(&a.mult)?;
    let f = cat
        .whisker_right(&pairing, &duality.dual)?
        .compose(&cat.whisker_left(x, &duality.gamma_bar)?)?;
    let f_inv = f.inverse().map_err(|err| {
        Error::Internal(format!("promotion map A -> Ā is not invertible: {err}"))
    })?;
    let copairing = cat.whisker_left(x, &f_inv)?.compose(&duality.gamma_bar)?;
    let comult = cat
        .whisker_right(&a.mult, x)?
        .compose(&cat.whisker_left(x, &copairing)?)?;
    Ok(FrobeniusStructure {
        comult,
        counit: a.unit.dagger(),
    })
}

// ----- solver -----

/// Solver budget and seed for the special-structure search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitarizeOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for UnitarizeOptions {
    fn default() -> Self {
        UnitarizeOptions {
            seed: 0,
            restarts: 10,
            max_iterations: 200,
        }
    }
}

/// Orthonormal (real inner product) basis of the Hermitian elements of `End(X)`.
pub fn hermitian_basis(cat: &Category, x: &Obj) -> Result<Vec<Mor>> {
    let basis = cat.hom_basis(x, x)?;
    let mut out: Vec<Mor> = Vec::with_capacity(basis.len());
    for b in &basis {
        let bd = b.dagger();
        let candidates = [b.add(&bd)?, b.sub(&bd)?.scale(linalg::c(0.0, 1.0))];
        for mut h in candidates {
            for prev in &out {
                let overlap = prev.inner(&h).re;
                h = h.sub(&prev.scale(linalg::real(overlap)))?;
            }
            let norm = h.norm();
            if norm > 1e-8 {
                out.push(h.scale(linalg::real(1.0 / norm)));
            }
        }
        if out.len() == basis.len() {
            break;
        }
    }
    if out.len() != basis.len() {
        return Err(Error::Internal(format!(
            "End(X) is not closed under adjoints: {} Hermitian directions for dimension {}",
            out.len(),
            basis.len()
        )));
    }
    Ok(out)
}

/// `Σ_a L_a* L_a` with `L_a = m(e_a ⊗ -)`: the partial trace of `m* m` over
/// the left factor. Positive definite for a unital algebra.
fn left_gram(cat: &Category, a: &AlgebraObject) -> Result<Mor> {
    let x = &a.carrier;
    let d = x.dim();
    let index = cat.tensor_index(x, x);
    let m = a.mult.matrix();
    let mut g = Matrix::zeros(d, d);
    for av in 0..d {
        let cols: Vec<Option<usize>> = (0..d).map(|b| index.get(av, b)).collect();
        for (b, cb) in cols.iter().enumerate() {
            let Some(cb) = cb else { continue };
            for (b2, cb2) in cols.iter().enumerate() {
                let Some(cb2) = cb2 else { continue };
                g[(b, b2)] += m.column(*cb).dotc(&m.column(*cb2));
            }
        }
    }
    let g = (&g + g.adjoint()) * linalg::real(0.5);
    cat.mor(x, x, g)
}

struct State {
    t_inv: Matrix,
    m: Matrix,
    ms: Matrix,
    unit: Matrix,
    copair: Matrix,
}

/// Residuals `m_t m_t* - 1`, `m_t* - (m_t ⊗ 1)(1 ⊗ c)` and
/// `m_t* - (1 ⊗ m_t)(c ⊗ 1)` with `c = m_t* ι_t`, where
/// `m_t = t m (t⁻¹ ⊗ t⁻¹)`, `ι_t = t ι`. The last two say that `m_t*` is a
/// bimodule map, which is the C*-Frobenius condition.
struct SpecialityObjective<'a> {
    cat: &'a Category,
    a: &'a AlgebraObject,
    basis: Vec<Mor>,
    basis_m: Vec<Matrix>,
    mult: Matrix,
    unit: Matrix,
    pairs: PairTable,
    len: usize,
}

impl<'a> SpecialityObjective<'a> {
    fn new(cat: &'a Category, a: &'a AlgebraObject) -> Result<Self> {
        let x = &a.carrier;
        let basis = hermitian_basis(cat, x)?;
        let basis_m = basis.iter().map(|h| h.matrix().into_owned()).collect();
        let pairs = PairTable::new(cat, x);
        let len = 2 * (pairs.d * pairs.d + 2 * pairs.dd * pairs.d);
        Ok(SpecialityObjective {
            cat,
            a,
            basis,
            basis_m,
            mult: a.mult.matrix().into_owned(),
            unit: a.unit.matrix().into_owned(),
            pairs,
            len,
        })
    }

    fn t_of(&self, params: &DVector<f64>) -> Mor {
        let x = &self.a.carrier;
        let coeffs = Vector::from_iterator(params.len(), params.iter().map(|&p| linalg::real(p)));
        self.cat.combine(x, x, &self.basis, &coeffs)
    }

    fn params_of(&self, t: &Mor) -> DVector<f64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|h| h.inner(t).re))
    }

    fn state(&self, t: &Mor) -> Result<State> {
        let t_inv = t.inverse()?.matrix().into_owned();
        let t = t.matrix();
        let m = &*t * self.pairs.after_left(&self.pairs.after_right(&self.mult, &t_inv), &t_inv);
        let ms = m.adjoint();
        let unit = &*t * &self.unit;
        let copair = &ms * &unit;
        Ok(State {
            t_inv,
            m,
            ms,
            unit,
            copair,
        })
    }

    fn residuals(&self, s: &State) -> [Matrix; 3] {
        let r1 = &s.m * &s.ms - Matrix::identity(self.pairs.d, self.pairs.d);
        let r2 = &s.ms - self.pairs.right_snake(&s.m, &s.copair);
        let r3 = &s.ms - self.pairs.left_snake(&s.m, &s.copair);
        [r1, r2, r3]
    }

    /// Directional derivative of the residuals along `t ↦ t + H`. With
    /// `K = H t⁻¹`: `dm = K m - m (K ⊗ 1 + 1 ⊗ K)`, `dι = K ι`.
    fn derivative(&self, s: &State, h: &Matrix) -> [Matrix; 3] {
        let k = h * &s.t_inv;
        let dm = &k * &s.m - self.pairs.after_right(&s.m, &k) - self.pairs.after_left(&s.m, &k);
        let dms = dm.adjoint();
        let dunit = &k * &s.unit;
        let dcopair = &dms * &s.unit + &s.ms * &dunit;
        let d1 = &dm * &s.ms + &s.m * &dms;
        let d2 = &dms - self.pairs.right_snake(&dm, &s.copair) - self.pairs.right_snake(&s.m, &dcopair);
        let d3 = &dms - self.pairs.left_snake(&dm, &s.copair) - self.pairs.left_snake(&s.m, &dcopair);
        [d1, d2, d3]
    }

    fn flatten(&self, mats: &[Matrix; 3]) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.len);
        for f in mats {
            for v in f.iter() {
                out.push(v.re);
                out.push(v.im);
            }
        }
        DVector::from_vec(out)
    }

    fn evaluate(&self, params: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.state(&self.t_of(params))?;
        Ok(self.flatten(&self.residuals(&s)))
    }
}

impl DefectObjective for SpecialityObjective<'_> {
    fn residual(&self, params: &DVector<f64>) -> DVector<f64> {
        self.evaluate(params)
            .unwrap_or_else(|_| DVector::from_element(self.len, f64::INFINITY))
    }

    fn jacobian(&self, params: &DVector<f64>) -> nalgebra::DMatrix<f64> {
        let mut jac = nalgebra::DMatrix::zeros(self.len, params.len());
        let Ok(s) = self.state(&self.t_of(params)) else {
            return jac;
        };
        for (k, h) in self.basis_m.iter().enumerate() {
            jac.set_column(k, &self.flatten(&self.derivative(&s, h)));
        }
        jac
    }
}

/// Outcome of the special-structure search on one algebra.
#[derive(Debug, Clone)]
pub struct SpecialSolution {
    pub algebra: AlgebraObject,
    pub iso: AlgebraIso,
    pub outcome: SolverOutcome,
}

/// Searches for a positive `t ∈ End(A)` such that `transport_algebra(A, t)`
/// is special and C*-Frobenius, by Gauss-Newton over Hermitian `t` started at
/// `√G` (`G` the Gram operator of the left regular action), then replaces `t`
/// by `|t|`.
pub fn solve_special_structure(
    cat: &Category,
    a: &AlgebraObject,
    options: &UnitarizeOptions,
) -> Result<SpecialSolution> {
    let tol = *cat.tolerance();
    let objective = SpecialityObjective::new(cat, a)?;
    let g = left_gram(cat, a)?;
    let t0 = cat.mor(
        &a.carrier,
        &a.carrier,
        linalg::hermitian_sqrt(&g.matrix(), &tol)?,
    )?;
    let init = objective.params_of(&t0);
    let solver = SolverOptions {
        max_iterations: options.max_iterations,
        restarts: options.restarts,
        tolerance: 0.1 * tol.verify_eps,
        acceptable: tol.verify_eps,
        ..SolverOptions::default()
    };
    let outcome = minimize_defect_best(&objective, &init, options.seed, &solver)?;
    let fail = |residual: f64| Error::SolverFailed {
        residual,
        restarts: options.restarts,
        iterations: outcome.iterations,
    };
    if !(outcome.residual <= tol.solver_eps) {
        return Err(fail(outcome.residual));
    }
    let t = objective.t_of(&outcome.params);
    let tt = t.dagger().compose(&t)?;
    let abs_t = cat.mor(
        &a.carrier,
        &a.carrier,
        linalg::hermitian_sqrt(&tt.matrix(), &tol)?,
    )?;
    let (q, iso) = transport_algebra(cat, a, &abs_t)?;
    let residual = is_special(cat, &q)?
        .max_residual()
        .max(verify_cstar_frobenius(cat, &q)?.max_residual());
    if residual > tol.solver_eps {
        return Err(fail(residual));
    }
    Ok(SpecialSolution {
        algebra: q,
        iso,
        outcome,
    })
}

/// [`solve_special_structure`] for connected separable algebras.
pub fn connected_unitarize(
    cat: &Category,
    a: &AlgebraObject,
    options: &UnitarizeOptions,
) -> Result<SpecialSolution> {
    let (connected, dim) = is_connected(cat, a)?;
    if !connected {
        return Err(Error::NotConnected { dim });
    }
    separability_witness(cat, a)?;
    solve_special_structure(cat, a, options)
}

// ----- reassembly -----

/// Rebuilds a special algebra on the carrier of `A` from special structures on
/// its summands: with `u_k` the isometries from the unitary part of
/// `[w_1 ... w_K]`, `m_Q = Σ u_k m_k (u_k* ⊗ u_k*)`, `ι_Q = Σ u_k ι_k` and
/// `t = Σ u_k t_k v_k`.
fn assemble(
    cat: &Category,
    a: &AlgebraObject,
    parts: &[(AlgebraSummand, AlgebraObject, AlgebraIso)],
) -> Result<(AlgebraObject, AlgebraIso)> {
    let x = &a.carrier;
    let carriers: Vec<Obj> = parts.iter().map(|(s, _, _)| s.algebra.carrier.clone()).collect();
    let (sum, incs) = cat.direct_sum(&carriers)?;
    let mut v_all = cat.zero(&sum, x);
    for ((s, _, _), inc) in parts.iter().zip(&incs) {
        v_all = v_all.add(&s.inclusion.compose(&inc.dagger())?)?;
    }
    let (_, u) = linalg::polar_decompose(&v_all.matrix())?;
    let u = cat.mor(&sum, x, u)?;
    let mut mult = cat.zero(&cat.tensor_obj(x, x)?, x);
    let mut unit = cat.zero(&cat.unit(), x);
    let mut t = cat.zero(x, x);
    let mut t_inv = cat.zero(x, x);
    for ((s, q, iso), inc) in parts.iter().zip(&incs) {
        let uk = u.compose(inc)?;
        let uks = uk.dagger();
        mult = mult.add(&cat.chain(&[&uk, &q.mult, &cat.tensor_mor(&uks, &uks)?])?)?;
        unit = unit.add(&uk.compose(&q.unit)?)?;
        t = t.add(&cat.chain(&[&uk, &iso.map, &s.projection])?)?;
        t_inv = t_inv.add(&cat.chain(&[&s.inclusion, &iso.inverse, &uks])?)?;
    }
    let q = AlgebraObject::new(cat, x.clone(), mult, unit)?;
    Ok((q, AlgebraIso { map: t, inverse: t_inv }))
}

// ----- pipeline -----

/// How an isomorphism onto a special algebra was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Closed form: identity, rescaling by `√(m m*)`, or matrix units.
    Exact,
    Solver {
        seed: u64,
        restarts: usize,
        iterations: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub special: f64,
    pub frobenius: f64,
    pub iso: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.special.max(self.frobenius).max(self.iso)
    }
}

/// What happened to one indecomposable summand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummandTrace {
    pub dim: usize,
    pub connected: bool,
    pub method: Method,
    pub residual: f64,
    /// Largest Frobenius-law residual of the promoted structure, for
    /// connected summands.
    pub promotion_residual: Option<f64>,
}

/// An isomorphism `t: A -> Q` onto a special C*-Frobenius algebra `Q` on the
/// same carrier, with the residuals that certify it.
#[derive(Debug, Clone)]
pub struct UnitarizationCertificate {
    pub input_hash: String,
    pub algebra: AlgebraObject,
    pub iso: AlgebraIso,
    pub residuals: Residuals,
    pub method: Method,
    pub summands: Vec<SummandTrace>,
}

fn hash_matrix(hasher: &mut Sha256, m: &Matrix) {
    hasher.update(format!("{}x{}:", m.nrows(), m.ncols()));
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            hasher.update(format!("{:.16e},{:.16e};", v.re, v.im));
        }
    }
}

/// SHA-256 over the carrier description and the structure maps, with floats
/// printed to 17 significant digits.
pub fn algebra_hash(a: &AlgebraObject) -> String {
    let mut hasher = Sha256::new();
    let x = &a.carrier;
    match x.rep_matrices() {
        Some(mats) => {
            hasher.update(b"rep;");
            for g in mats {
                hash_matrix(&mut hasher, g);
            }
        }
        None => {
            hasher.update(b"grid;");
            for (i, j) in x.labels() {
                hasher.update(format!("{i},{j};"));
            }
        }
    }
    hash_matrix(&mut hasher, &a.mult.matrix());
    hash_matrix(&mut hasher, &a.unit.matrix());
    hex::encode(hasher.finalize())
}

fn residuals(cat: &Category, a: &AlgebraObject, q: &AlgebraObject, iso: &AlgebraIso) -> Result<Residuals> {
    Ok(Residuals {
        special: is_special(cat, q)?.max_residual(),
        frobenius: verify_cstar_frobenius(cat, q)?.max_residual(),
        iso: verify_iso(cat, a, q, iso)?.max_residual(),
    })
}

fn is_qsystem(cat: &Category, a: &AlgebraObject) -> Result<bool> {
    Ok(is_special(cat, a)?.pass && verify_cstar_frobenius(cat, a)?.pass)
}

/// Unitarizes one indecomposable summand: closed form when it is already
/// C*-Frobenius, the solver otherwise.
fn unitarize_summand(
    cat: &Category,
    b: &AlgebraObject,
    options: &UnitarizeOptions,
) -> Result<(AlgebraObject, AlgebraIso, SummandTrace)> {
    let (connected, _) = is_connected(cat, b)?;
    let promotion_residual = if connected {
        let f = frobenius_promotion(cat, b)?;
        Some(verify_frobenius(cat, b, &f)?.max_residual())
    } else {
        None
    };
    let (q, iso, method) = if verify_cstar_frobenius(cat, b)?.pass {
        let (q, iso) = specialize(cat, b)?;
        (q, iso, Method::Exact)
    } else {
        let sol = solve_special_structure(cat, b, options)?;
        let method = Method::Solver {
            seed: options.seed,
            restarts: options.restarts,
            iterations: sol.outcome.iterations,
        };
        (sol.algebra, sol.iso, method)
    };
    let residual = residuals(cat, b, &q, &iso)?.max();
    Ok((
        q,
        iso,
        SummandTrace {
            dim: b.dim(),
            connected,
            method,
            residual,
            promotion_residual,
        },
    ))
}

/// The full pipeline: refuse non-separable input, split into indecomposable
/// summands, unitarize each, and reassemble.
///
/// A special C*-Frobenius input returns the identity; a C*-Frobenius input is
/// rescaled in closed form.
pub fn unitarize(
    cat: &Category,
    a: &AlgebraObject,
    options: &UnitarizeOptions,
) -> Result<UnitarizationCertificate> {
    let laws = verify_algebra(cat, a)?;
    if !laws.pass {
        return Err(Error::Precondition(format!(
            "input is not an algebra (residual {:e})",
            laws.max_residual()
        )));
    }
    let input_hash = algebra_hash(a);
    let finish = |q: AlgebraObject, iso: AlgebraIso, method: Method, summands: Vec<SummandTrace>| {
        let residuals = residuals(cat, a, &q, &iso)?;
        if residuals.max() > cat.tolerance().solver_eps {
            return Err(Error::SolverFailed {
                residual: residuals.max(),
                restarts: options.restarts,
                iterations: 0,
            });
        }
        Ok(UnitarizationCertificate {
            input_hash: input_hash.clone(),
            algebra: q,
            iso,
            residuals,
            method,
            summands,
        })
    };
    if is_qsystem(cat, a)? {
        let id = cat.id(&a.carrier);
        let iso = AlgebraIso {
            map: id.clone(),
            inverse: id,
        };
        return finish(a.clone(), iso, Method::Exact, Vec::new());
    }
    separability_witness(cat, a)?;
    if verify_cstar_frobenius(cat, a)?.pass {
        let (q, iso) = specialize(cat, a)?;
        return finish(q, iso, Method::Exact, Vec::new());
    }
    let summands = decompose_algebra(cat, a)?;
    let mut parts = Vec::with_capacity(summands.len());
    let mut traces = Vec::with_capacity(summands.len());
    let mut iterations = 0;
    let mut exact = true;
    for (k, s) in summands.into_iter().enumerate() {
        let local = UnitarizeOptions {
            seed: options.seed.wrapping_add(k as u64),
            ..*options
        };
        let (q, iso, trace) = unitarize_summand(cat, &s.algebra, &local)?;
        if let Method::Solver { iterations: it, .. } = trace.method {
            iterations += it;
            exact = false;
        }
        log::debug!(
            "summand {k}: dim {}, connected {}, residual {:e}",
            trace.dim,
            trace.connected,
            trace.residual
        );
        traces.push(trace);
        parts.push((s, q, iso));
    }
    let (q, iso) = assemble(cat, a, &parts)?;
    let method = if exact {
        Method::Exact
    } else {
        Method::Solver {
            seed: options.seed,
            restarts: options.restarts,
            iterations,
        }
    };
    finish(q, iso, method, traces)
}

/// Recomputes every residual of a certificate from scratch.
pub fn verify_certificate(
    cat: &Category,
    cert: &UnitarizationCertificate,
    a: &AlgebraObject,
) -> Result<Report> {
    let eps = cat.tolerance().solver_eps;
    let mut report = Report::new("certificate", *cat.tolerance());
    let hash_ok = algebra_hash(a) == cert.input_hash;
    report.check("input_hash", if hash_ok { 0.0 } else { 1.0 }, 0.0);
    let q = &cert.algebra;
    let shapes_ok = q.carrier == a.carrier
        || (cert.iso.map.source() == &a.carrier && cert.iso.map.target() == &q.carrier);
    if !shapes_ok {
        report.check("shapes", 1.0, 0.0);
        return Ok(report);
    }
    report.check("algebra", verify_algebra(cat, q)?.max_residual(), eps);
    report.check("special", is_special(cat, q)?.max_residual(), eps);
    report.check("frobenius", verify_cstar_frobenius(cat, q)?.max_residual(), eps);
    report.check("iso", verify_iso(cat, a, q, &cert.iso)?.max_residual(), eps);
    Ok(report)
}

// ----- Wedderburn -----

/// `A ≅ ⊕ M_{n_k}` with the blocks in summand order and an isomorphism onto
/// the special matrix algebras (product scaled by `n_k^{-1/2}`) placed on the
/// carrier of `A`.
#[derive(Debug, Clone)]
pub struct Wedderburn {
    pub blocks: Vec<usize>,
    pub algebra: AlgebraObject,
    pub iso: AlgebraIso,
}

const UNITS_SEED: u64 = 0x9E37_79B9_7F4A_7C15;
const UNITS_ATTEMPTS: u64 = 6;

fn is_plain(cat: &Category, x: &Obj) -> bool {
    match cat.backend() {
        Backend::GridHilb { .. } => {
            let labels = x.labels();
            labels.windows(2).all(|w| w[0] == w[1])
        }
        Backend::RepG { .. } => x.has_trivial_action(),
    }
}

/// Left multiplication operator `L_x` in the basis of the carrier.
fn left_mult(cat: &Category, b: &AlgebraObject, x: &Vector) -> Matrix {
    let d = b.dim();
    let index = cat.tensor_index(&b.carrier, &b.carrier);
    let m = b.mult.matrix();
    let mut l = Matrix::zeros(d, d);
    for a in 0..d {
        if x[a] == linalg::ZERO {
            continue;
        }
        for c in 0..d {
            if let Some(p) = index.get(a, c) {
                let col = m.column(p) * x[a];
                let mut target = l.column_mut(c);
                target += col;
            }
        }
    }
    l
}

fn product(cat: &Category, b: &AlgebraObject, x: &Vector, y: &Vector) -> Vector {
    left_mult(cat, b, x) * y
}

/// Matrix units `E_pq` of a simple algebra, returned as the columns (index
/// `p n + q`) of a `d x d` matrix.
fn matrix_units(cat: &Category, b: &AlgebraObject, n: usize) -> Result<Matrix> {
    let d = b.dim();
    let one = b.unit.matrix().column_sum();
    if n == 1 {
        return Ok(Matrix::from_columns(&[one]));
    }
    let tol = cat.tolerance();
    let mut last = None;
    for attempt in 0..UNITS_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(UNITS_SEED ^ attempt);
        let x = Vector::from_fn(d, |_, _| linalg::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let ps = match linalg::spectral_idempotents(&left_mult(cat, b, &x), tol) {
            Ok(ps) if ps.len() == n => ps,
            Ok(ps) => {
                last = Some(Error::Internal(format!(
                    "generic element has {} eigenvalues in a simple algebra of degree {n}",
                    ps.len()
                )));
                continue;
            }
            Err(err) => {
                last = Some(err);
                continue;
            }
        };
        let e: Vec<Vector> = ps.iter().map(|p| p * &one).collect();
        // One nonzero vector in e_1 B e_j and in e_j B e_1.
        let corner = |i: usize, j: usize| -> Vector {
            let op = left_mult(cat, b, &e[i]) * right_mult(cat, b, &e[j]);
            let best = (0..d)
                .max_by(|&p, &q| op.column(p).norm().total_cmp(&op.column(q).norm()))
                .expect("nonempty");
            op.column(best).into_owned()
        };
        let mut row = vec![e[0].clone()];
        let mut col = vec![e[0].clone()];
        for j in 1..n {
            let u = corner(0, j);
            let v = corner(j, 0);
            let uv = product(cat, b, &u, &v);
            let lambda = e[0].dotc(&uv) / e[0].dotc(&e[0]);
            if lambda.norm() < 1e-12 {
                last = Some(Error::Internal("degenerate matrix unit".into()));
                break;
            }
            row.push(u);
            col.push(v / lambda);
        }
        if row.len() != n {
            continue;
        }
        let mut units = Vec::with_capacity(d);
        for p in 0..n {
            for q in 0..n {
                units.push(product(cat, b, &col[p], &row[q]));
            }
        }
        let units = Matrix::from_columns(&units);
        // E_pq E_rs = δ_qr E_ps, checked on every pair.
        let mut defect: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let lhs = product(
                            cat,
                            b,
                            &units.column(p * n + q).into_owned(),
                            &units.column(r * n + s).into_owned(),
                        );
                        let rhs = if q == r {
                            units.column(p * n + s).into_owned()
                        } else {
                            Vector::zeros(d)
                        };
                        defect = defect.max((lhs - rhs).norm());
                    }
                }
            }
        }
        if defect <= tol.verify_eps.sqrt() * (1.0 + units.norm()) {
            return Ok(units);
        }
        last = Some(Error::Defective { residual: defect });
    }
    Err(last.expect("at least one attempt"))
}

/// Right multiplication operator `R_y`.
fn right_mult(cat: &Category, b: &AlgebraObject, y: &Vector) -> Matrix {
    let d = b.dim();
    let mut r = Matrix::zeros(d, d);
    for c in 0..d {
        let mut e = Vector::zeros(d);
        e[c] = ONE;
        r.set_column(c, &product(cat, b, &e, y));
    }
    r
}

/// Classical Artin-Wedderburn decomposition of a separable algebra whose
/// carrier carries no group action (or sits in one cell).
pub fn wedderburn_exact(cat: &Category, a: &AlgebraObject) -> Result<Wedderburn> {
    if !is_plain(cat, &a.carrier) {
        return Err(Error::Precondition(
            "matrix-unit decomposition needs a carrier without group action in a single cell"
                .into(),
        ));
    }
    let summands = decompose_algebra(cat, a)?;
    let mut parts = Vec::with_capacity(summands.len());
    let mut blocks = Vec::with_capacity(summands.len());
    for s in summands {
        let b = &s.algebra;
        let d = b.dim();
        let n = (d as f64).sqrt().round() as usize;
        if n * n != d {
            return Err(Error::Internal(format!(
                "indecomposable summand of dimension {d} is not a matrix algebra"
            )));
        }
        let units = matrix_units(cat, b, n)?;
        let phi_inv = linalg::inverse(&units)? * linalg::real((n as f64).sqrt());
        let t = cat.mor(&b.carrier, &b.carrier, phi_inv)?;
        let q = AlgebraObject::matrix_algebra(cat, &b.carrier, n, 1.0 / (n as f64).sqrt())?;
        let t_inv = t.inverse()?;
        blocks.push(n);
        parts.push((s, q, AlgebraIso { map: t, inverse: t_inv }));
    }
    let (algebra, iso) = assemble(cat, a, &parts)?;
    Ok(Wedderburn {
        blocks,
        algebra,
        iso,
    })
}
