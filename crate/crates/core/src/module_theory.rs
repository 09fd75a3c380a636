//! Hom spaces of modules and bimodules, endomorphism algebras and their
//! central splitting, relative tensor products and internal homs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ActionModule, AlgebraObject};
use crate::category::{Category, Mor, Obj};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector, ONE, ZERO};
use crate::report::Report;

/// A finite-dimensional algebra of module endomorphisms, with structure
/// constants in an orthonormal basis.
#[derive(Debug, Clone)]
pub struct HomAlgebra {
    pub module: ActionModule,
    pub basis: Vec<Mor>,
    /// `constants[k][l]` holds the coordinates of `b_k ∘ b_l`.
    pub constants: Vec<Vec<Vector>>,
    /// Coordinates of the identity.
    pub identity: Vector,
}

impl HomAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn element(&self, cat: &Category, coeffs: &Vector) -> Mor {
        let x = &self.module.carrier;
        cat.combine(x, x, &self.basis, coeffs)
    }

    pub fn coordinates(&self, cat: &Category, f: &Mor) -> Vector {
        cat.coordinates(&self.basis, f)
    }

    /// Coordinates of the product of two elements given by coordinates.
    pub fn mul(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for (k, &xk) in x.iter().enumerate() {
            if xk == ZERO {
                continue;
            }
            for (l, &yl) in y.iter().enumerate() {
                if yl != ZERO {
                    out.axpy(xk * yl, &self.constants[k][l], ONE);
                }
            }
        }
        out
    }
}

fn same_sides(m: &ActionModule, n: &ActionModule) -> Result<()> {
    if m.left.is_some() != n.left.is_some() || m.right.is_some() != n.right.is_some() {
        return Err(Error::Precondition(
            "modules must carry actions on the same sides".into(),
        ));
    }
    Ok(())
}

/// Orthonormal basis of the maps `M -> N` commuting with every present action.
pub fn bimodule_hom_basis(
    cat: &Category,
    a: &AlgebraObject,
    m: &ActionModule,
    n: &ActionModule,
) -> Result<Vec<Mor>> {
    same_sides(m, n)?;
    let (x, y) = (&m.carrier, &n.carrier);
    let basis = cat.hom_basis(x, y)?;
    if basis.is_empty() {
        return Ok(basis);
    }
    let alg = &a.carrier;
    let system = cat.constraint_matrix(&basis, |f| {
        let mut out = Vec::new();
        if let (Some(rm), Some(rn)) = (&m.right, &n.right) {
            out.push(f.compose(rm)?.sub(&rn.compose(&cat.whisker_right(f, alg)?)?)?);
        }
        if let (Some(lm), Some(ln)) = (&m.left, &n.left) {
            out.push(f.compose(lm)?.sub(&ln.compose(&cat.whisker_left(alg, f)?)?)?);
        }
        Ok(out)
    })?;
    if system.nrows() == 0 {
        return Ok(basis);
    }
    let space = linalg::solve_linear_subspace(&system, None, cat.tolerance())?;
    Ok(space
        .null_basis
        .iter()
        .map(|c| cat.combine(x, y, &basis, c))
        .collect())
}

/// Endomorphism algebra of a module with its structure constants.
pub fn end_algebra(cat: &Category, a: &AlgebraObject, m: &ActionModule) -> Result<HomAlgebra> {
    let basis = bimodule_hom_basis(cat, a, m, m)?;
    let constants = basis
        .iter()
        .map(|bk| {
            basis
                .iter()
                .map(|bl| Ok(cat.coordinates(&basis, &bk.compose(bl)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let identity = cat.coordinates(&basis, &cat.id(&m.carrier));
    let back = cat.combine(&m.carrier, &m.carrier, &basis, &identity);
    let defect = back.distance(&cat.id(&m.carrier));
    if defect > cat.tolerance().verify_eps.sqrt() {
        return Err(Error::Internal(format!(
            "identity is not in the endomorphism algebra ({defect:e})"
        )));
    }
    Ok(HomAlgebra {
        module: m.clone(),
        basis,
        constants,
        identity,
    })
}

const SPLIT_SEED: u64 = 0xC3A5_C85C_97CB_3127;
const SPLIT_ATTEMPTS: u64 = 6;

fn generic_combination(basis: &[Vector], seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vector::zeros(basis[0].len());
    for b in basis {
        out.axpy(linalg::real(rng.random_range(0.5..1.5)), b, ONE);
    }
    out
}

/// Coordinate basis of the center of `e`.
pub fn center_basis(cat: &Category, e: &HomAlgebra) -> Result<Vec<Vector>> {
    let d = e.dim();
    let mut system = Matrix::zeros(d * d, d);
    for k in 0..d {
        for l in 0..d {
            let comm = &e.constants[k][l] - &e.constants[l][k];
            for (mm, &v) in comm.iter().enumerate() {
                system[(l * d + mm, k)] = v;
            }
        }
    }
    Ok(linalg::solve_linear_subspace(&system, None, cat.tolerance())?.null_basis)
}

/// Primitive central idempotents of a semisimple endomorphism algebra, as
/// endomorphisms of the module carrier.
///
/// A generic (seeded) element of the center is diagonalized on the carrier;
/// its spectral projections are polynomials in it and therefore central.
pub fn semisimple_split(cat: &Category, e: &HomAlgebra) -> Result<Vec<Mor>> {
    let x = e.module.carrier.clone();
    let center = center_basis(cat, e)?;
    if center.len() <= 1 {
        return Ok(vec![cat.id(&x)]);
    }
    let mut last = None;
    for attempt in 0..SPLIT_ATTEMPTS {
        let z = e.element(cat, &generic_combination(&center, SPLIT_SEED + attempt));
        match linalg::spectral_idempotents(&z.matrix(), cat.tolerance()) {
            Ok(ps) if ps.len() == center.len() => {
                let idempotents: Vec<Mor> = ps
                    .into_iter()
                    .map(|p| cat.mor(&x, &x, p))
                    .collect::<Result<_>>()?;
                let defect = idempotent_family_defect(cat, &x, &idempotents, Some(&e.basis))?;
                if defect <= cat.tolerance().verify_eps.sqrt() {
                    return Ok(idempotents);
                }
                last = Some(Error::Defective { residual: defect });
            }
            Ok(ps) => {
                last = Some(Error::Internal(format!(
                    "generic central element has {} eigenvalue clusters, center has dimension {}",
                    ps.len(),
                    center.len()
                )))
            }
            Err(err) => last = Some(err),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Largest residual among idempotence, pairwise orthogonality, completeness
/// and (when `commute_with` is given) centrality.
pub fn idempotent_family_defect(
    cat: &Category,
    x: &Obj,
    family: &[Mor],
    commute_with: Option<&[Mor]>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut total = cat.zero(x, x);
    for (i, p) in family.iter().enumerate() {
        for (j, q) in family.iter().enumerate() {
            let pq = p.compose(q)?;
            let expected = if i == j { p.clone() } else { cat.zero(x, x) };
            worst = worst.max(pq.distance(&expected));
        }
        if let Some(others) = commute_with {
            for b in others {
                worst = worst.max(p.compose(b)?.distance(&b.compose(p)?));
            }
        }
        total = total.add(p)?;
    }
    Ok(worst.max(total.distance(&cat.id(x))))
}

/// `X ⊗_A Y`, realized as the image of the idempotent
/// `Π = (r ⊗ l)(1_X ⊗ e ⊗ 1_Y)` on `X ⊗ Y`.
#[derive(Debug, Clone)]
pub struct RelativeTensor {
    pub object: Obj,
    pub projection: Mor,
    pub inclusion: Mor,
    pub idempotent: Mor,
}

/// Relative tensor product of a right module `x` and a left module `y`,
/// given a separability idempotent `e ∈ Hom(1, A ⊗ A)`.
pub fn relative_tensor(
    cat: &Category,
    e: &Mor,
    x: &ActionModule,
    y: &ActionModule,
) -> Result<(RelativeTensor, Report)> {
    let r = x
        .right
        .as_ref()
        .ok_or_else(|| Error::Precondition("first factor needs a right action".into()))?;
    let l = y
        .left
        .as_ref()
        .ok_or_else(|| Error::Precondition("second factor needs a left action".into()))?;
    let (xo, yo) = (&x.carrier, &y.carrier);
    let spread = cat.tensor_mors(&[&cat.id(xo), e, &cat.id(yo)])?;
    let pi = cat.tensor_mor(r, l)?.compose(&spread)?;
    let (object, projection, inclusion) = cat.split_idempotent(&pi)?;
    let mut report = Report::new("relative_tensor", *cat.tolerance());
    report.verify("idempotent", pi.compose(&pi)?.distance(&pi));
    let via_x = projection.compose(&cat.whisker_right(r, yo)?)?;
    let via_y = projection.compose(&cat.whisker_left(xo, l)?)?;
    report.verify("coequalizer", via_x.distance(&via_y));
    report.verify(
        "splitting",
        projection
            .compose(&inclusion)?
            .distance(&cat.id(&object))
            .max(inclusion.compose(&projection)?.distance(&pi)),
    );
    Ok((
        RelativeTensor {
            object,
            projection,
            inclusion,
            idempotent: pi,
        },
        report,
    ))
}

/// Internal hom `[X, Y]` of right modules, realized as the image of an
/// idempotent on `Y ⊗ X̄`, with the data of the adjunction
/// `Hom(C, [X, Y]) ≅ Hom_A(C ⊗ X, Y)`.
#[derive(Debug, Clone)]
pub struct InternalHom {
    pub object: Obj,
    /// `v: Y ⊗ X̄ -> [X, Y]`.
    pub projection: Mor,
    /// `w: [X, Y] -> Y ⊗ X̄`.
    pub inclusion: Mor,
    /// `ev: [X, Y] ⊗ X -> Y`.
    pub evaluation: Mor,
    x: ActionModule,
    y: ActionModule,
    x_dual: Obj,
    gamma: Mor,
    gamma_bar: Mor,
}

impl InternalHom {
    /// Module map `C ⊗ X -> Y` corresponding to `ψ: C -> [X, Y]`.
    pub fn to_module_map(&self, cat: &Category, psi: &Mor) -> Result<Mor> {
        let g = self.inclusion.compose(psi)?;
        let cap = cat.whisker_left(&self.y.carrier, &self.gamma.dagger())?;
        cap.compose(&cat.whisker_right(&g, &self.x.carrier)?)
    }

    /// `ψ: C -> [X, Y]` corresponding to a map `φ: C ⊗ X -> Y`.
    pub fn from_module_map(&self, cat: &Category, c: &Obj, phi: &Mor) -> Result<Mor> {
        let cup = cat.whisker_left(c, &self.gamma_bar)?;
        self.projection
            .compose(&cat.whisker_right(phi, &self.x_dual)?)?
            .compose(&cup)
    }
}

/// `C ⊗ X` with right action `1_C ⊗ r`.
pub fn free_module(cat: &Category, c: &Obj, x: &ActionModule) -> Result<ActionModule> {
    let r = x
        .right
        .as_ref()
        .ok_or_else(|| Error::Precondition("module needs a right action".into()))?;
    Ok(ActionModule {
        carrier: cat.tensor_obj(c, &x.carrier)?,
        left: None,
        right: Some(cat.whisker_left(c, r)?),
    })
}

/// Internal hom of right modules over `a`, given a separability idempotent.
pub fn internal_hom(
    cat: &Category,
    a: &AlgebraObject,
    e: &Mor,
    x: &ActionModule,
    y: &ActionModule,
) -> Result<InternalHom> {
    let rx = x
        .right
        .as_ref()
        .ok_or_else(|| Error::Precondition("internal hom needs right modules".into()))?;
    let ry = y
        .right
        .as_ref()
        .ok_or_else(|| Error::Precondition("internal hom needs right modules".into()))?;
    let alg = &a.carrier;
    let (xo, yo) = (&x.carrier, &y.carrier);
    let duality = cat.balanced_duality(xo)?;
    let xb = duality.dual.clone();
    let yxb = cat.tensor_obj(yo, &xb)?;

    // K = r_Y (1_Y ⊗ γ_X* ⊗ 1_A)(1_{Y ⊗ X̄} ⊗ r_X ⊗ 1_A)(1_{Y ⊗ X̄ ⊗ X} ⊗ e)
    let cap = cat.whisker_left(yo, &duality.gamma.dagger())?;
    let yxbx = cat.tensor_obj(&yxb, xo)?;
    let k = cat.chain(&[
        ry,
        &cat.whisker_right(&cap, alg)?,
        &cat.whisker_left(&yxb, &cat.whisker_right(rx, alg)?)?,
        &cat.whisker_left(&yxbx, e)?,
    ])?;
    // Π' = (K ⊗ 1_X̄)(1_{Y ⊗ X̄} ⊗ γ̄_X)
    let pi = cat
        .whisker_right(&k, &xb)?
        .compose(&cat.whisker_left(&yxb, &duality.gamma_bar)?)?;
    let (object, projection, inclusion) = cat.split_idempotent(&pi)?;
    let evaluation = cap.compose(&cat.whisker_right(&inclusion, xo)?)?;
    Ok(InternalHom {
        object,
        projection,
        inclusion,
        evaluation,
        x: x.clone(),
        y: y.clone(),
        x_dual: xb,
        gamma: duality.gamma,
        gamma_bar: duality.gamma_bar,
    })
}

/// Checks the adjunction on every test object `C`: dimensions of both sides
/// agree, adjuncts of a basis of `Hom(C, [X, Y])` are module maps, and the two
/// directions are mutually inverse.
pub fn verify_internal_hom(
    cat: &Category,
    a: &AlgebraObject,
    ih: &InternalHom,
    tests: &[Obj],
) -> Result<Report> {
    let mut report = Report::new("internal_hom", *cat.tolerance());
    let ry = ih.y.right.as_ref().expect("checked at construction");
    let mut dim_gap: usize = 0;
    let mut module_defect: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for c in tests {
        let hom = cat.hom_basis(c, &ih.object)?;
        let cx = free_module(cat, c, &ih.x)?;
        let maps = bimodule_hom_basis(cat, a, &cx, &ih.y)?;
        dim_gap += hom.len().abs_diff(maps.len());
        for psi in &hom {
            let phi = ih.to_module_map(cat, psi)?;
            let lhs = phi.compose(cx.right.as_ref().expect("free module"))?;
            let rhs = ry.compose(&cat.whisker_right(&phi, &a.carrier)?)?;
            module_defect = module_defect.max(lhs.distance(&rhs));
            round_trip = round_trip.max(ih.from_module_map(cat, c, &phi)?.distance(psi));
        }
    }
    report.check("dimension_gap", dim_gap as f64, 0.0);
    report.verify("module_map", module_defect);
    report.verify("round_trip", round_trip);
    Ok(report)
}

/// The algebra structure on `[X, X]`: multiplication is the adjunct of
/// `ev (1 ⊗ ev)`, the unit is the adjunct of `1_X`.
pub fn internal_hom_algebra(
    cat: &Category,
    a: &AlgebraObject,
    e: &Mor,
    x: &ActionModule,
) -> Result<(AlgebraObject, InternalHom)> {
    if x.carrier.is_zero() {
        return Err(Error::ZeroObject);
    }
    let ih = internal_hom(cat, a, e, x, x)?;
    let h = ih.object.clone();
    let hh = cat.tensor_obj(&h, &h)?;
    let double_ev = ih
        .evaluation
        .compose(&cat.whisker_left(&h, &ih.evaluation)?)?;
    let mult = ih.from_module_map(cat, &hh, &double_ev)?;
    let unit = ih.from_module_map(cat, &cat.unit(), &cat.id(&x.carrier))?;
    let alg = AlgebraObject::new(cat, h, mult, unit)?;
    Ok((alg, ih))
}

/// A summand of a module decomposition.
#[derive(Debug, Clone)]
pub struct ModuleSummand {
    pub module: ActionModule,
    pub projection: Mor,
    pub inclusion: Mor,
    pub simple: bool,
}

/// Splits a module into indecomposable summands using the spectral
/// projections of a generic element of its endomorphism algebra.
pub fn decompose_module(
    cat: &Category,
    a: &AlgebraObject,
    m: &ActionModule,
) -> Result<Vec<ModuleSummand>> {
    let x = m.carrier.clone();
    let e = end_algebra(cat, a, m)?;
    let basis_coords: Vec<Vector> = (0..e.dim())
        .map(|k| {
            let mut v = Vector::zeros(e.dim());
            v[k] = ONE;
            v
        })
        .collect();
    let mut last = None;
    let mut idempotents = None;
    for attempt in 0..SPLIT_ATTEMPTS {
        let g = e.element(cat, &generic_combination(&basis_coords, SPLIT_SEED ^ attempt));
        match linalg::spectral_idempotents(&g.matrix(), cat.tolerance()) {
            Ok(ps) => {
                let family: Vec<Mor> =
                    ps.into_iter().map(|p| cat.mor(&x, &x, p)).collect::<Result<_>>()?;
                let defect = idempotent_family_defect(cat, &x, &family, None)?;
                if defect > cat.tolerance().verify_eps.sqrt() {
                    last = Some(Error::Defective { residual: defect });
                    continue;
                }
                idempotents = Some(family);
                break;
            }
            Err(err) => last = Some(err),
        }
    }
    let idempotents = idempotents.ok_or_else(|| last.expect("at least one attempt"))?;
    let mut out = Vec::with_capacity(idempotents.len());
    for p in &idempotents {
        let (object, v, w) = cat.split_idempotent(p)?;
        let restrict = |act: &Mor, left: bool| -> Result<Mor> {
            let inner = if left {
                cat.whisker_left(&a.carrier, &w)?
            } else {
                cat.whisker_right(&w, &a.carrier)?
            };
            v.compose(act)?.compose(&inner)
        };
        let module = ActionModule {
            carrier: object,
            left: m.left.as_ref().map(|l| restrict(l, true)).transpose()?,
            right: m.right.as_ref().map(|r| restrict(r, false)).transpose()?,
        };
        let simple = end_algebra(cat, a, &module)?.dim() == 1;
        out.push(ModuleSummand {
            module,
            projection: v,
            inclusion: w,
            simple,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
