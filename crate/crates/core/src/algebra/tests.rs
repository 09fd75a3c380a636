use super::*;
use crate::group::FiniteGroup;
use crate::linalg::{real, Tolerance};

fn hilb() -> Category {
    Category::hilb()
}

fn pointwise(n: usize) -> (Category, AlgebraObject) {
    let cat = hilb();
    let carrier = cat.trivial_rep(n).unwrap();
    let a = AlgebraObject::pointwise(&cat, &carrier).unwrap();
    (cat, a)
}

fn matrix_algebra(n: usize, scale: f64) -> (Category, AlgebraObject) {
    let cat = hilb();
    let carrier = cat.trivial_rep(n * n).unwrap();
    let a = AlgebraObject::matrix_algebra(&cat, &carrier, n, scale).unwrap();
    (cat, a)
}

fn shear(cat: &Category, a: &AlgebraObject) -> Mor {
    let t = crate::linalg::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
    cat.mor(&a.carrier, &a.carrier, t).unwrap()
}

#[test]
fn unit_object_is_an_algebra() {
    let cat = Category::grid_hilb(2).unwrap();
    let a = AlgebraObject::trivial(&cat);
    assert!(verify_algebra(&cat, &a).unwrap().pass);
    assert!(is_special(&cat, &a).unwrap().pass);
}

#[test]
fn pointwise_algebra_is_special_with_unit_norm_n() {
    let (cat, a) = pointwise(3);
    assert!(verify_algebra(&cat, &a).unwrap().pass);
    assert!(verify_cstar_frobenius(&cat, &a).unwrap().pass);
    let special = is_special(&cat, &a).unwrap();
    assert!(special.pass);
    assert_eq!(special.values["unit_norm_sq"], serde_json::json!(3.0));
}

#[test]
fn product_without_unit_has_no_unit_solution() {
    let cat = hilb();
    let carrier = cat.trivial_rep(2).unwrap();
    let aa = cat.tensor_obj(&carrier, &carrier).unwrap();
    let mut m = Matrix::zeros(2, 4);
    m[(1, 0)] = ONE;
    let m = cat.mor(&aa, &carrier, m).unwrap();
    assert!(matches!(solve_unit(&cat, &carrier, &m), Err(Error::NoSolution { .. })));
    let bogus = cat.zero(&cat.unit(), &carrier);
    let a = AlgebraObject::new(&cat, carrier, m, bogus).unwrap();
    assert!(!verify_algebra(&cat, &a).unwrap().pass);
}

#[test]
fn unit_solver_recovers_known_unit() {
    let (cat, a) = matrix_algebra(2, 1.0);
    let unit = solve_unit(&cat, &a.carrier, &a.mult).unwrap();
    assert!(unit.distance(&a.unit) < 1e-12);
}

#[test]
fn plain_matrix_product_is_cstar_frobenius_not_special() {
    let (cat, a) = matrix_algebra(2, 1.0);
    assert!(verify_cstar_frobenius(&cat, &a).unwrap().pass);
    let special = is_special(&cat, &a).unwrap();
    assert!(!special.pass);
    let mms = a.mult.compose(&a.mult.dagger()).unwrap();
    assert!(mms.distance(&cat.id(&a.carrier).scale(real(2.0))) < 1e-12);

    let (cat, b) = matrix_algebra(2, 0.5f64.sqrt());
    assert!(is_special(&cat, &b).unwrap().pass);
    assert!(verify_algebra(&cat, &b).unwrap().pass);
}

#[test]
fn sheared_pointwise_algebra_is_separable_but_not_frobenius() {
    let (cat, a) = pointwise(2);
    let t = shear(&cat, &a);
    let (b, iso) = transport_algebra(&cat, &a, &t).unwrap();
    assert!(verify_algebra(&cat, &b).unwrap().pass);
    assert!(verify_iso(&cat, &a, &b, &iso).unwrap().pass);
    assert!(!verify_cstar_frobenius(&cat, &b).unwrap().pass);
    assert!(!is_special(&cat, &b).unwrap().pass);
    let w = separability_witness(&cat, &b).unwrap();
    assert!(verify_witness(&cat, &b, &w.f).unwrap().pass);
}

#[test]
fn transport_round_trip_restores_algebra() {
    let (cat, a) = pointwise(2);
    let t = shear(&cat, &a);
    let (b, iso) = transport_algebra(&cat, &a, &t).unwrap();
    let (c, _) = transport_algebra(&cat, &b, &iso.inverse).unwrap();
    assert!(c.mult.distance(&a.mult) < 1e-10);
    assert!(c.unit.distance(&a.unit) < 1e-10);
    let (same, _) = transport_algebra(&cat, &a, &cat.id(&a.carrier)).unwrap();
    assert!(same.mult.distance(&a.mult) == 0.0);
}

#[test]
fn pointwise_witness_is_diagonal_copy() {
    let (cat, a) = pointwise(2);
    let w = separability_witness(&cat, &a).unwrap();
    let f = w.f.to_matrix();
    let mut expected = Matrix::zeros(4, 2);
    expected[(0, 0)] = ONE;
    expected[(3, 1)] = ONE;
    assert!((f - expected).norm() < 1e-12);
}

#[test]
fn matrix_algebra_witness_satisfies_equations() {
    let (cat, a) = matrix_algebra(3, 1.0);
    let w = separability_witness(&cat, &a).unwrap();
    let report = verify_witness(&cat, &a, &w.f).unwrap();
    assert!(report.pass, "{report:?}");
    // e = Σ_k E_k1 ⊗ E_1k up to the choice among solutions; m e = ι holds.
    assert!(a.mult.compose(&w.idempotent).unwrap().distance(&a.unit) < 1e-10);
}

#[test]
fn dual_numbers_are_not_separable() {
    let cat = hilb();
    let a = AlgebraObject::truncated_polynomial(&cat, 2).unwrap();
    assert!(verify_algebra(&cat, &a).unwrap().pass);
    assert!(matches!(
        separability_witness(&cat, &a),
        Err(Error::NotSeparable { .. })
    ));
}

#[test]
fn connectedness_counts_invariants() {
    let cat = hilb();
    let a = AlgebraObject::trivial(&cat);
    assert_eq!(is_connected(&cat, &a).unwrap(), (true, 1));

    let s3 = Category::rep_g(FiniteGroup::symmetric(3));
    let functions = AlgebraObject::pointwise(&s3, &s3.regular_rep().unwrap()).unwrap();
    assert!(verify_algebra(&s3, &functions).unwrap().pass);
    assert_eq!(is_connected(&s3, &functions).unwrap(), (true, 1));

    let group_alg = AlgebraObject::group_algebra(&s3, &s3.conjugation_rep().unwrap()).unwrap();
    assert!(verify_algebra(&s3, &group_alg).unwrap().pass);
    assert_eq!(is_connected(&s3, &group_alg).unwrap(), (false, 3));
}

#[test]
fn support_block_finds_the_diagonal_cell() {
    let cat = Category::grid_hilb(3).unwrap();
    let carrier = cat.cell_object(2, 2, 1).unwrap();
    let a = AlgebraObject::pointwise(&cat, &carrier).unwrap();
    assert_eq!(support_block(&cat, &a).unwrap(), 2);

    let unit = AlgebraObject::trivial(&Category::grid_hilb(2).unwrap());
    assert!(matches!(
        support_block(&Category::grid_hilb(2).unwrap(), &unit),
        Err(Error::NotConnected { dim: 2 })
    ));

    let cat2 = Category::grid_hilb(2).unwrap();
    let carrier = cat2.cell_object(1, 1, 4).unwrap();
    let m2 = AlgebraObject::matrix_algebra(&cat2, &carrier, 2, 1.0).unwrap();
    assert!(verify_algebra(&cat2, &m2).unwrap().pass);
    assert_eq!(support_block(&cat2, &m2).unwrap(), 1);
}

#[test]
fn action_checks() {
    let (cat, a) = pointwise(2);
    assert!(verify_action(&cat, &a, &ActionModule::free_right(&a)).unwrap().pass);
    assert!(verify_action(&cat, &a, &ActionModule::regular_bimodule(&a)).unwrap().pass);

    // C with r(x ⊗ e_1) = x, r(x ⊗ e_2) = 0
    let x = cat.trivial_rep(1).unwrap();
    let xa = cat.tensor_obj(&x, &a.carrier).unwrap();
    let r = cat.mor(&xa, &x, crate::linalg::from_real_rows(&[&[1.0, 0.0]])).unwrap();
    let module = ActionModule {
        carrier: x.clone(),
        left: None,
        right: Some(r),
    };
    assert!(verify_action(&cat, &a, &module).unwrap().pass);

    let zero = ActionModule {
        carrier: x.clone(),
        left: None,
        right: Some(cat.zero(&xa, &x)),
    };
    let report = verify_action(&cat, &a, &zero).unwrap();
    assert!(!report.pass);
    assert!(report.residual("right_unit").unwrap() > 0.5);
}

#[test]
fn adjoint_structure_of_special_algebra_is_frobenius() {
    let (cat, a) = matrix_algebra(2, 0.5f64.sqrt());
    let f = adjoint_frobenius(&a);
    assert!(verify_frobenius(&cat, &a, &f).unwrap().pass);
}

#[test]
fn reports_are_monotone_in_tolerance() {
    let (cat, a) = pointwise(2);
    let t = shear(&cat, &a);
    let (b, _) = transport_algebra(&cat, &a, &t).unwrap();
    let tight = verify_cstar_frobenius(&cat, &b).unwrap();
    let loose_cat = cat
        .clone()
        .with_tolerance(Tolerance::new(10.0, 10.0, 1e-7).unwrap())
        .unwrap();
    let loose = verify_cstar_frobenius(&loose_cat, &b).unwrap();
    assert!(!tight.pass);
    assert!(loose.pass);
}

