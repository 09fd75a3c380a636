//! Algebras, Frobenius structures and action modules, with the predicates that
//! check their axioms.
//!
//! Every predicate returns a [`Report`] with one residual per identity rather
//! than a bare boolean.

use crate::category::{Category, Mor, Obj, PairTable};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector, ONE};
use crate::report::Report;

/// An algebra `(A, m, ι)`.
#[derive(Debug, Clone)]
pub struct AlgebraObject {
    pub carrier: Obj,
    pub mult: Mor,
    pub unit: Mor,
}

/// A comultiplication and counit on an algebra.
#[derive(Debug, Clone)]
pub struct FrobeniusStructure {
    pub comult: Mor,
    pub counit: Mor,
}

/// An object with a left and/or right action of an algebra.
#[derive(Debug, Clone)]
pub struct ActionModule {
    pub carrier: Obj,
    pub left: Option<Mor>,
    pub right: Option<Mor>,
}

/// An algebra isomorphism `t: A -> A'` with its inverse.
#[derive(Debug, Clone)]
pub struct AlgebraIso {
    pub map: Mor,
    pub inverse: Mor,
}

fn expect(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ObjectMismatch(what.to_string()))
    }
}

impl AlgebraObject {
    /// Checks that `mult: A ⊗ A -> A` and `unit: 1 -> A`.
    pub fn new(cat: &Category, carrier: Obj, mult: Mor, unit: Mor) -> Result<AlgebraObject> {
        let aa = cat.tensor_obj(&carrier, &carrier)?;
        expect(
            mult.source() == &aa && mult.target() == &carrier,
            "multiplication must map A ⊗ A to A",
        )?;
        expect(
            unit.source() == &cat.unit() && unit.target() == &carrier,
            "unit must map the tensor unit to A",
        )?;
        Ok(AlgebraObject {
            carrier,
            mult,
            unit,
        })
    }

    /// Builds an algebra from raw matrices; the columns of `mult` follow the
    /// carrier order of `A ⊗ A`.
    pub fn from_matrices(
        cat: &Category,
        carrier: &Obj,
        mult: Matrix,
        unit: Matrix,
    ) -> Result<AlgebraObject> {
        let aa = cat.tensor_obj(carrier, carrier)?;
        let m = cat.mor(&aa, carrier, mult)?;
        let i = cat.mor(&cat.unit(), carrier, unit)?;
        AlgebraObject::new(cat, carrier.clone(), m, i)
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    /// The tensor unit with `m = 1`, `ι = 1`.
    pub fn trivial(cat: &Category) -> AlgebraObject {
        let u = cat.unit();
        AlgebraObject {
            carrier: u.clone(),
            mult: cat.id(&u),
            unit: cat.id(&u),
        }
    }

    /// Pointwise algebra on a carrier whose basis vectors all sit in diagonal
    /// cells and are permuted by the group: `e_a e_b = δ_ab e_a`.
    pub fn pointwise(cat: &Category, carrier: &Obj) -> Result<AlgebraObject> {
        let d = carrier.dim();
        let index = cat.tensor_index(carrier, carrier);
        let aa = cat.tensor_obj(carrier, carrier)?;
        let mut m = Matrix::zeros(d, aa.dim());
        let mut iota = Matrix::zeros(d, cat.unit().dim());
        for a in 0..d {
            let (i, j) = carrier.label(a);
            if i != j {
                return Err(Error::Precondition(
                    "pointwise algebra needs diagonal cells".into(),
                ));
            }
            let p = index.get(a, a).expect("diagonal pairs compose");
            m[(a, p)] = ONE;
            iota[(a, if carrier.is_grid() { i } else { 0 })] = ONE;
        }
        AlgebraObject::from_matrices(cat, carrier, m, iota)
    }

    /// `M_n(C)` on the basis `E_pq` (index `p n + q`) of a carrier of
    /// dimension `n²`, with product scaled by `scale`.
    pub fn matrix_algebra(cat: &Category, carrier: &Obj, n: usize, scale: f64) -> Result<AlgebraObject> {
        if carrier.dim() != n * n {
            return Err(Error::ShapeMismatch {
                context: "matrix algebra carrier".into(),
                expected: (n * n, 1),
                found: (carrier.dim(), 1),
            });
        }
        let index = cat.tensor_index(carrier, carrier);
        let aa = cat.tensor_obj(carrier, carrier)?;
        let mut m = Matrix::zeros(n * n, aa.dim());
        let mut iota = Matrix::zeros(n * n, cat.unit().dim());
        let cell = |a: usize| carrier.label(a).0;
        for p in 0..n {
            for q in 0..n {
                for s in 0..n {
                    let pair = index
                        .get(p * n + q, q * n + s)
                        .ok_or_else(|| Error::Precondition("matrix algebra needs one diagonal cell".into()))?;
                    m[(p * n + s, pair)] = linalg::real(scale);
                }
            }
            let unit_col = if carrier.is_grid() { cell(p * n + p) } else { 0 };
            iota[(p * n + p, unit_col)] = linalg::real(1.0 / scale);
        }
        AlgebraObject::from_matrices(cat, carrier, m, iota)
    }

    /// Group algebra `C[G]` on a carrier of dimension `|G|` (basis `e_g`),
    /// `e_g e_h = e_{gh}`. The carrier action must preserve the product, e.g.
    /// the conjugation representation.
    pub fn group_algebra(cat: &Category, carrier: &Obj) -> Result<AlgebraObject> {
        let group = cat.group().ok_or(Error::BackendMismatch)?;
        let n = group.order();
        if carrier.dim() != n {
            return Err(Error::ShapeMismatch {
                context: "group algebra carrier".into(),
                expected: (n, 1),
                found: (carrier.dim(), 1),
            });
        }
        let mut m = Matrix::zeros(n, n * n);
        for g in 0..n {
            for h in 0..n {
                m[(group.mul(g, h), g * n + h)] = ONE;
            }
        }
        let mut iota = Matrix::zeros(n, 1);
        iota[(group.identity(), 0)] = ONE;
        AlgebraObject::from_matrices(cat, carrier, m, iota)
    }

    /// Truncated polynomial algebra `C[x]/(x^k)` with trivial action.
    pub fn truncated_polynomial(cat: &Category, k: usize) -> Result<AlgebraObject> {
        let carrier = cat.trivial_rep(k)?;
        let mut m = Matrix::zeros(k, k * k);
        for a in 0..k {
            for b in 0..k {
                if a + b < k {
                    m[(a + b, a * k + b)] = ONE;
                }
            }
        }
        let mut iota = Matrix::zeros(k, 1);
        iota[(0, 0)] = ONE;
        AlgebraObject::from_matrices(cat, &carrier, m, iota)
    }
}

/// Finds a unit for a multiplication by solving the two unit laws; fails with
/// [`Error::NoSolution`] when none exists.
pub fn solve_unit(cat: &Category, carrier: &Obj, mult: &Mor) -> Result<Mor> {
    let unit = cat.unit();
    let basis = cat.hom_basis(&unit, carrier)?;
    let system = cat.constraint_matrix(&basis, |i| {
        Ok(vec![
            mult.compose(&cat.whisker_right(i, carrier)?)?,
            mult.compose(&cat.whisker_left(carrier, i)?)?,
        ])
    })?;
    let id = cat.id(carrier);
    let rhs = crate::category::stack(&[&id, &id]);
    let sol = linalg::solve_linear_subspace(&system, Some(&rhs), cat.tolerance())?;
    Ok(cat.combine(&unit, carrier, &basis, &sol.particular))
}

/// Residuals of associativity and both unit laws.
pub fn verify_algebra(cat: &Category, a: &AlgebraObject) -> Result<Report> {
    let x = &a.carrier;
    let m = &a.mult;
    let mut report = Report::new("algebra", *cat.tolerance());
    let assoc_l = m.compose(&cat.whisker_right(m, x)?)?;
    let assoc_r = m.compose(&cat.whisker_left(x, m)?)?;
    report.verify("associativity", assoc_l.distance(&assoc_r));
    let id = cat.id(x);
    let left = m.compose(&cat.whisker_right(&a.unit, x)?)?;
    let right = m.compose(&cat.whisker_left(x, &a.unit)?)?;
    report.verify("left_unit", left.distance(&id));
    report.verify("right_unit", right.distance(&id));
    report.value("dim", x.dim());
    Ok(report)
}

/// Residuals of `(m ⊗ 1)(1 ⊗ m*) = m* m = (1 ⊗ m)(m* ⊗ 1)`; both sides are
/// checked separately.
pub fn verify_cstar_frobenius(cat: &Category, a: &AlgebraObject) -> Result<Report> {
    let x = &a.carrier;
    let m = &a.mult;
    let ms = m.dagger();
    let mut report = Report::new("cstar_frobenius", *cat.tolerance());
    let middle = ms.compose(m)?;
    let left = cat.whisker_right(m, x)?.compose(&cat.whisker_left(x, &ms)?)?;
    let right = cat.whisker_left(x, m)?.compose(&cat.whisker_right(&ms, x)?)?;
    report.verify("left_module", left.distance(&middle));
    report.verify("right_module", right.distance(&middle));
    Ok(report)
}

/// Residual `||m m* - 1||`; also records `τ(ι*ι)`, which speciality leaves
/// unconstrained.
pub fn is_special(cat: &Category, a: &AlgebraObject) -> Result<Report> {
    let mut report = Report::new("special", *cat.tolerance());
    let mms = a.mult.compose(&a.mult.dagger())?;
    report.verify("coisometry", mms.distance(&cat.id(&a.carrier)));
    let unit_norm = cat.tau(&a.unit.dagger().compose(&a.unit)?)?;
    report.value("unit_norm_sq", unit_norm.re);
    Ok(report)
}

/// The canonical Frobenius structure `Δ = m*`, `ε = ι*`.
pub fn adjoint_frobenius(a: &AlgebraObject) -> FrobeniusStructure {
    FrobeniusStructure {
        comult: a.mult.dagger(),
        counit: a.unit.dagger(),
    }
}

/// Residuals of coassociativity, both counit laws and the Frobenius law.
pub fn verify_frobenius(
    cat: &Category,
    a: &AlgebraObject,
    f: &FrobeniusStructure,
) -> Result<Report> {
    let x = &a.carrier;
    let (m, d, e) = (&a.mult, &f.comult, &f.counit);
    let mut report = Report::new("frobenius", *cat.tolerance());
    let co_l = cat.whisker_right(d, x)?.compose(d)?;
    let co_r = cat.whisker_left(x, d)?.compose(d)?;
    report.verify("coassociativity", co_l.distance(&co_r));
    let id = cat.id(x);
    report.verify(
        "left_counit",
        cat.whisker_right(e, x)?.compose(d)?.distance(&id),
    );
    report.verify(
        "right_counit",
        cat.whisker_left(x, e)?.compose(d)?.distance(&id),
    );
    let middle = d.compose(m)?;
    let left = cat.whisker_right(m, x)?.compose(&cat.whisker_left(x, d)?)?;
    let right = cat.whisker_left(x, m)?.compose(&cat.whisker_right(d, x)?)?;
    report.verify("frobenius_left", left.distance(&middle));
    report.verify("frobenius_right", right.distance(&middle));
    Ok(report)
}

/// A splitting `f: A -> A ⊗ A` of the multiplication as a bimodule map.
#[derive(Debug, Clone)]
pub struct SeparabilityWitness {
    pub f: Mor,
    /// `e = f ι ∈ Hom(1, A ⊗ A)`, the separability idempotent.
    pub idempotent: Mor,
}

/// Solves for a bimodule section of `m`.
///
/// A bimodule map `f` is determined by `e = f ι`; the unknown is `e` with
/// `(m ⊗ 1)(1 ⊗ e) = (1 ⊗ m)(e ⊗ 1)` and `m e = ι`, and then
/// `f = (m ⊗ 1)(1 ⊗ e)`. Among all solutions the one with the smallest
/// Frobenius norm of `f` is returned.
pub fn separability_witness(cat: &Category, a: &AlgebraObject) -> Result<SeparabilityWitness> {
    let x = &a.carrier;
    let unit = cat.unit();
    let aa = cat.tensor_obj(x, x)?;
    let basis = cat.hom_basis(&unit, &aa)?;
    let table = PairTable::new(cat, x);
    let m = a.mult.matrix();
    let section = |e: &Matrix| table.right_snake(&m, e);
    let combine = |c: &Vector| -> Matrix {
        let mut e = Matrix::zeros(aa.dim(), unit.dim());
        for (b, &w) in basis.iter().zip(c.iter()) {
            e += &*b.matrix() * w;
        }
        e
    };
    let (head, tail) = (aa.dim() * x.dim(), x.dim() * unit.dim());
    let mut system = Matrix::zeros(head + tail, basis.len());
    for (k, b) in basis.iter().enumerate() {
        let e = b.matrix();
        let balance = section(&e) - table.left_snake(&m, &e);
        let unital = &*m * &*e;
        let mut col = system.column_mut(k);
        col.rows_mut(0, head).copy_from_slice(balance.as_slice());
        col.rows_mut(head, tail).copy_from_slice(unital.as_slice());
    }
    let mut rhs = Vector::zeros(head + tail);
    rhs.rows_mut(head, tail).copy_from_slice(a.unit.matrix().as_slice());
    let space = match linalg::solve_linear_subspace(&system, Some(&rhs), cat.tolerance()) {
        Ok(s) => s,
        Err(Error::NoSolution { residual }) => return Err(Error::NotSeparable { residual }),
        Err(e) => return Err(e),
    };
    let mut coeffs = space.particular.clone();
    if !space.null_basis.is_empty() {
        // minimize ||F(e0 + N z)|| over z, F the linear map e -> f
        let f_of = |c: &Vector| linalg::vectorize(&section(&combine(c)));
        let f0 = f_of(&space.particular);
        let cols: Vec<Vector> = space.null_basis.iter().map(|n| f_of(n)).collect();
        let fn_mat = Matrix::from_columns(&cols);
        let z = linalg::least_squares(&fn_mat, &(-f0), 1e-12)?;
        for (k, n) in space.null_basis.iter().enumerate() {
            coeffs.axpy(z[k], n, ONE);
        }
    }
    let idempotent = cat.combine(&unit, &aa, &basis, &coeffs);
    let f = cat.mor(x, &aa, section(&idempotent.matrix()))?;
    Ok(SeparabilityWitness { f, idempotent })
}

/// Residuals of `m f = 1`, `f m = (m ⊗ 1)(1 ⊗ f)` and `f m = (1 ⊗ m)(f ⊗ 1)`.
pub fn verify_witness(cat: &Category, a: &AlgebraObject, f: &Mor) -> Result<Report> {
    let x = &a.carrier;
    let m = &a.mult;
    let mut report = Report::new("separability", *cat.tolerance());
    report.verify("section", m.compose(f)?.distance(&cat.id(x)));
    let fm = f.compose(m)?;
    let left = cat.whisker_right(m, x)?.compose(&cat.whisker_left(x, f)?)?;
    let right = cat.whisker_left(x, m)?.compose(&cat.whisker_right(f, x)?)?;
    report.verify("left_module", fm.distance(&left));
    report.verify("right_module", fm.distance(&right));
    Ok(report)
}

/// `(dim Hom(1, A) == 1, dim Hom(1, A))`.
pub fn is_connected(cat: &Category, a: &AlgebraObject) -> Result<(bool, usize)> {
    let dim = cat.hom_basis(&cat.unit(), &a.carrier)?.len();
    Ok((dim == 1, dim))
}

/// For a connected algebra in `GridHilb`, the unique `j` with `A = A_jj`.
///
/// The block is read off the support of the unit `ι`; an algebra whose unit
/// touches two or more diagonal cells is reported as not connected. Connectedness
/// itself is the caller's precondition: a full matrix algebra in one cell has
/// `dim Hom(1, A) = n²` but is still supported in a single block.
pub fn support_block(cat: &Category, a: &AlgebraObject) -> Result<usize> {
    if !a.carrier.is_grid() {
        return Ok(0);
    }
    let iota = a.unit.matrix();
    let eps = cat.tolerance().verify_eps;
    let blocks: Vec<usize> = (0..iota.ncols())
        .filter(|&j| iota.column(j).norm() > eps)
        .collect();
    if blocks.len() != 1 {
        return Err(Error::NotConnected { dim: blocks.len() });
    }
    let j = blocks[0];
    if let Some(a_idx) = (0..a.dim()).find(|&k| a.carrier.label(k) != (j, j)) {
        return Err(Error::Precondition(format!(
            "algebra has a vector in cell {:?} outside block {j}",
            a.carrier.label(a_idx)
        )));
    }
    Ok(j)
}

/// Residuals of the action laws for each present side, and the bimodule
/// compatibility when both are present.
pub fn verify_action(cat: &Category, a: &AlgebraObject, module: &ActionModule) -> Result<Report> {
    let x = &module.carrier;
    let alg = &a.carrier;
    let m = &a.mult;
    let id = cat.id(x);
    let mut report = Report::new("action", *cat.tolerance());
    if let Some(r) = &module.right {
        expect(
            r.source() == &cat.tensor_obj(x, alg)? && r.target() == x,
            "right action must map X ⊗ A to X",
        )?;
        let lhs = r.compose(&cat.whisker_right(r, alg)?)?;
        let rhs = r.compose(&cat.whisker_left(x, m)?)?;
        report.verify("right_associativity", lhs.distance(&rhs));
        report.verify(
            "right_unit",
            r.compose(&cat.whisker_left(x, &a.unit)?)?.distance(&id),
        );
    }
    if let Some(l) = &module.left {
        expect(
            l.source() == &cat.tensor_obj(alg, x)? && l.target() == x,
            "left action must map A ⊗ X to X",
        )?;
        let lhs = l.compose(&cat.whisker_left(alg, l)?)?;
        let rhs = l.compose(&cat.whisker_right(m, x)?)?;
        report.verify("left_associativity", lhs.distance(&rhs));
        report.verify(
            "left_unit",
            l.compose(&cat.whisker_right(&a.unit, x)?)?.distance(&id),
        );
    }
    if let (Some(l), Some(r)) = (&module.left, &module.right) {
        let lr = l.compose(&cat.whisker_left(alg, r)?)?;
        let rl = r.compose(&cat.whisker_right(l, alg)?)?;
        report.verify("bimodule", lr.distance(&rl));
    }
    Ok(report)
}

impl ActionModule {
    /// `A` acting on itself from the right.
    pub fn free_right(a: &AlgebraObject) -> ActionModule {
        ActionModule {
            carrier: a.carrier.clone(),
            left: None,
            right: Some(a.mult.clone()),
        }
    }

    /// `A` as an `A`-`A` bimodule.
    pub fn regular_bimodule(a: &AlgebraObject) -> ActionModule {
        ActionModule {
            carrier: a.carrier.clone(),
            left: Some(a.mult.clone()),
            right: Some(a.mult.clone()),
        }
    }
}

/// Direct sum of algebras: blockwise product and summed units.
pub fn direct_sum_algebra(cat: &Category, parts: &[AlgebraObject]) -> Result<AlgebraObject> {
    let carriers: Vec<Obj> = parts.iter().map(|p| p.carrier.clone()).collect();
    let (sum, incs) = cat.direct_sum(&carriers)?;
    let mut mult = cat.zero(&cat.tensor_obj(&sum, &sum)?, &sum);
    let mut unit = cat.zero(&cat.unit(), &sum);
    for (p, inc) in parts.iter().zip(&incs) {
        let proj = inc.dagger();
        mult = mult.add(&cat.chain(&[inc, &p.mult, &cat.tensor_mor(&proj, &proj)?])?)?;
        unit = unit.add(&inc.compose(&p.unit)?)?;
    }
    AlgebraObject::new(cat, sum, mult, unit)
}

/// `m' = t m (t⁻¹ ⊗ t⁻¹)`, `ι' = t ι`.
pub fn transport_algebra(
    cat: &Category,
    a: &AlgebraObject,
    t: &Mor,
) -> Result<(AlgebraObject, AlgebraIso)> {
    if t.source() != &a.carrier {
        return Err(Error::ObjectMismatch("transport map must start at A".into()));
    }
    let tinv = t.inverse()?;
    let target = t.target().clone();
    let mult = t
        .compose(&a.mult)?
        .compose(&cat.tensor_mor(&tinv, &tinv)?)?;
    let unit = t.compose(&a.unit)?;
    let b = AlgebraObject::new(cat, target, mult, unit)?;
    Ok((
        b,
        AlgebraIso {
            map: t.clone(),
            inverse: tinv,
        },
    ))
}

/// Residuals of `t m = m' (t ⊗ t)`, `t ι = ι'` and `t t⁻¹ = 1`, `t⁻¹ t = 1`.
pub fn verify_iso(
    cat: &Category,
    a: &AlgebraObject,
    b: &AlgebraObject,
    iso: &AlgebraIso,
) -> Result<Report> {
    let t = &iso.map;
    let mut report = Report::new("isomorphism", *cat.tolerance());
    let lhs = t.compose(&a.mult)?;
    let rhs = b.mult.compose(&cat.tensor_mor(t, t)?)?;
    report.verify("multiplicative", lhs.distance(&rhs));
    report.verify("unital", t.compose(&a.unit)?.distance(&b.unit));
    report.verify(
        "inverse",
        t.compose(&iso.inverse)?
            .distance(&cat.id(&b.carrier))
            .max(iso.inverse.compose(t)?.distance(&cat.id(&a.carrier))),
    );
    Ok(report)
}

#[cfg(test)]
mod tests;
