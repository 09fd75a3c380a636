use super::*;
use crate::algebra::{separability_witness, verify_action, verify_algebra, is_connected};
use crate::group::FiniteGroup;

fn pointwise(n: usize) -> (Category, AlgebraObject) {
    let cat = Category::hilb();
    let carrier = cat.trivial_rep(n).unwrap();
    let a = AlgebraObject::pointwise(&cat, &carrier).unwrap();
    (cat, a)
}

fn m2() -> (Category, AlgebraObject) {
    let cat = Category::hilb();
    let carrier = cat.trivial_rep(4).unwrap();
    let a = AlgebraObject::matrix_algebra(&cat, &carrier, 2, 1.0).unwrap();
    (cat, a)
}

/// Right module over a pointwise algebra of dimension `n` on which basis
/// vector `t` is acted on by the point `coords[t]`.
fn coordinate_module(cat: &Category, n: usize, coords: &[usize], left: bool) -> ActionModule {
    let k = coords.len();
    let x = cat.trivial_rep(k).unwrap();
    let mut act = Matrix::zeros(k, k * n);
    for (t, &c) in coords.iter().enumerate() {
        let col = if left { c * k + t } else { t * n + c };
        act[(t, col)] = ONE;
    }
    let src = if left {
        cat.tensor_obj(&cat.trivial_rep(n).unwrap(), &x).unwrap()
    } else {
        cat.tensor_obj(&x, &cat.trivial_rep(n).unwrap()).unwrap()
    };
    let act = cat.mor(&src, &x, act).unwrap();
    ActionModule {
        carrier: x,
        left: if left { Some(act.clone()) } else { None },
        right: if left { None } else { Some(act) },
    }
}

fn idempotent(cat: &Category, a: &AlgebraObject) -> Mor {
    separability_witness(cat, a).unwrap().idempotent
}

#[test]
fn bimodule_endomorphisms_are_the_center() {
    let (cat, a) = pointwise(2);
    let bi = ActionModule::regular_bimodule(&a);
    assert_eq!(bimodule_hom_basis(&cat, &a, &bi, &bi).unwrap().len(), 2);

    let (cat, a) = m2();
    let bi = ActionModule::regular_bimodule(&a);
    assert_eq!(bimodule_hom_basis(&cat, &a, &bi, &bi).unwrap().len(), 1);
    let right = ActionModule::free_right(&a);
    assert_eq!(bimodule_hom_basis(&cat, &a, &right, &right).unwrap().len(), 4);
}

#[test]
fn end_algebra_structure_constants() {
    let (cat, a) = pointwise(3);
    let e = end_algebra(&cat, &a, &ActionModule::regular_bimodule(&a)).unwrap();
    assert_eq!(e.dim(), 3);
    for k in 0..3 {
        for l in 0..3 {
            assert!((&e.constants[k][l] - &e.constants[l][k]).norm() < 1e-12);
        }
    }
    let one = e.identity.clone();
    let x = Vector::from_fn(3, |k, _| linalg::real(k as f64 + 1.0));
    assert!((e.mul(&one, &x) - &x).norm() < 1e-12);

    let (cat, a) = m2();
    let e = end_algebra(&cat, &a, &ActionModule::regular_bimodule(&a)).unwrap();
    assert_eq!(e.dim(), 1);

    // End_A(A ⊕ A) for A = M₂ is M₂(End_A(A)) ≅ M₄.
    let (sum, inc) = cat.direct_sum(&[a.carrier.clone(), a.carrier.clone()]).unwrap();
    let proj: Vec<Mor> = inc.iter().map(Mor::dagger).collect();
    let mut r = cat.zero(&cat.tensor_obj(&sum, &a.carrier).unwrap(), &sum);
    for (i, p) in inc.iter().zip(&proj) {
        let piece = i
            .compose(&a.mult)
            .unwrap()
            .compose(&cat.whisker_right(p, &a.carrier).unwrap())
            .unwrap();
        r = r.add(&piece).unwrap();
    }
    let module = ActionModule {
        carrier: sum,
        left: None,
        right: Some(r),
    };
    assert!(verify_action(&cat, &a, &module).unwrap().pass);
    let e = end_algebra(&cat, &a, &module).unwrap();
    assert_eq!(e.dim(), 16);
    assert_eq!(center_basis(&cat, &e).unwrap().len(), 1);
}

#[test]
fn central_splitting() {
    let (cat, a) = pointwise(1);
    let e = end_algebra(&cat, &a, &ActionModule::regular_bimodule(&a)).unwrap();
    assert_eq!(semisimple_split(&cat, &e).unwrap().len(), 1);

    let (cat, a) = pointwise(3);
    let e = end_algebra(&cat, &a, &ActionModule::regular_bimodule(&a)).unwrap();
    let ps = semisimple_split(&cat, &e).unwrap();
    assert_eq!(ps.len(), 3);
    assert!(idempotent_family_defect(&cat, &a.carrier, &ps, Some(&e.basis)).unwrap() < 1e-10);

    // C_1 ⊕ C_2 ⊕ C_2 over C²: End ≅ C ⊕ M₂, two central idempotents
    let (cat, a) = pointwise(2);
    let x = coordinate_module(&cat, 2, &[0, 1, 1], false);
    assert!(verify_action(&cat, &a, &x).unwrap().pass);
    let e = end_algebra(&cat, &a, &x).unwrap();
    assert_eq!(e.dim(), 5);
    let ps = semisimple_split(&cat, &e).unwrap();
    assert_eq!(ps.len(), 2);
    let mut ranks: Vec<usize> = ps
        .iter()
        .map(|p| linalg::trace(&p.matrix()).re.round() as usize)
        .collect();
    ranks.sort_unstable();
    assert_eq!(ranks, vec![1, 2]);
}

#[test]
fn relative_tensor_examples() {
    let (cat, a) = pointwise(2);
    let e = idempotent(&cat, &a);
    let bi = ActionModule::regular_bimodule(&a);
    let (t, report) = relative_tensor(&cat, &e, &bi, &bi).unwrap();
    assert!(report.pass, "{report:?}");
    assert_eq!(t.object.dim(), 2);

    let first_r = coordinate_module(&cat, 2, &[0], false);
    let first_l = coordinate_module(&cat, 2, &[0], true);
    let second_l = coordinate_module(&cat, 2, &[1], true);
    let (zero, report) = relative_tensor(&cat, &e, &first_r, &second_l).unwrap();
    assert!(report.pass);
    assert_eq!(zero.object.dim(), 0);
    let (one, report) = relative_tensor(&cat, &e, &first_r, &first_l).unwrap();
    assert!(report.pass);
    assert_eq!(one.object.dim(), 1);
}

#[test]
fn relative_tensor_with_algebra_is_neutral() {
    let (cat, a) = m2();
    let e = idempotent(&cat, &a);
    let x = ActionModule::free_right(&a);
    let bi = ActionModule::regular_bimodule(&a);
    let (xa, report) = relative_tensor(&cat, &e, &x, &bi).unwrap();
    assert!(report.pass);
    assert_eq!(xa.object.dim(), a.dim());
}

#[test]
fn internal_hom_dimensions() {
    let (cat, a) = pointwise(2);
    let e = idempotent(&cat, &a);
    let x = ActionModule::free_right(&a);
    let ih = internal_hom(&cat, &a, &e, &x, &x).unwrap();
    assert_eq!(ih.object.dim(), 2);
    let tests = [cat.unit(), cat.trivial_rep(2).unwrap()];
    let report = verify_internal_hom(&cat, &a, &ih, &tests).unwrap();
    assert!(report.pass, "{report:?}");

    let simple = coordinate_module(&cat, 2, &[0], false);
    let ih = internal_hom(&cat, &a, &e, &simple, &simple).unwrap();
    assert_eq!(ih.object.dim(), 1);
    assert!(verify_internal_hom(&cat, &a, &ih, &tests).unwrap().pass);

    let zero = ActionModule {
        carrier: cat.trivial_rep(0).unwrap(),
        left: None,
        right: Some(cat.zero(
            &cat.tensor_obj(&cat.trivial_rep(0).unwrap(), &a.carrier).unwrap(),
            &cat.trivial_rep(0).unwrap(),
        )),
    };
    assert_eq!(internal_hom(&cat, &a, &e, &simple, &zero).unwrap().object.dim(), 0);
}

#[test]
fn internal_hom_algebras() {
    let (cat, a) = pointwise(2);
    let e = idempotent(&cat, &a);
    let (b, _) = internal_hom_algebra(&cat, &a, &e, &ActionModule::free_right(&a)).unwrap();
    assert!(verify_algebra(&cat, &b).unwrap().pass);
    assert_eq!(b.dim(), 2);
    assert!(separability_witness(&cat, &b).is_ok());

    let simple = coordinate_module(&cat, 2, &[1], false);
    let (c, _) = internal_hom_algebra(&cat, &a, &e, &simple).unwrap();
    assert!(verify_algebra(&cat, &c).unwrap().pass);
    assert_eq!(is_connected(&cat, &c).unwrap(), (true, 1));
}

#[test]
fn internal_end_of_regular_representation() {
    let cat = Category::rep_g(FiniteGroup::symmetric(3));
    let unit = AlgebraObject::trivial(&cat);
    let e = idempotent(&cat, &unit);
    let x = cat.regular_rep().unwrap();
    let module = ActionModule {
        carrier: x.clone(),
        left: None,
        right: Some(cat.id(&x)),
    };
    let ih = internal_hom(&cat, &unit, &e, &module, &module).unwrap();
    assert_eq!(ih.object.dim(), 36);
    assert_eq!(cat.hom_basis(&cat.unit(), &ih.object).unwrap().len(), 6);
    let report = verify_internal_hom(&cat, &unit, &ih, &[cat.unit()]).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn module_decomposition() {
    let (cat, a) = pointwise(3);
    let parts = decompose_module(&cat, &a, &ActionModule::free_right(&a)).unwrap();
    assert_eq!(parts.len(), 3);
    assert!(parts.iter().all(|p| p.simple));

    let (cat, a) = m2();
    let x = ActionModule::free_right(&a);
    let parts = decompose_module(&cat, &a, &x).unwrap();
    assert_eq!(parts.len(), 2);
    let mut total = cat.zero(&a.carrier, &a.carrier);
    for p in &parts {
        assert!(p.simple);
        assert_eq!(p.module.carrier.dim(), 2);
        assert!(verify_action(&cat, &a, &p.module).unwrap().pass);
        total = total.add(&p.inclusion.compose(&p.projection).unwrap()).unwrap();
    }
    assert!(total.distance(&cat.id(&a.carrier)) < 1e-10);

    let (cat, a) = pointwise(2);
    let simple = coordinate_module(&cat, 2, &[1], false);
    let parts = decompose_module(&cat, &a, &simple).unwrap();
    assert_eq!(parts.len(), 1);
}
