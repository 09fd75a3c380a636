use std::collections::BTreeMap;

use approx::assert_relative_eq;
use proptest::prelude::*;
use qsys_core::algebra::{is_special, verify_algebra, verify_cstar_frobenius};
use qsys_core::generate::generate;
use qsys_core::io::{from_json, to_canonical_json, InstanceFile};
use qsys_core::unitarize::{
    rescale_action, unitarize, verify_certificate, wedderburn_exact, UnitarizeOptions,
};
use qsys_core::{ActionModule, AlgebraObject, Category, FiniteGroup, Tolerance, C64};

fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn blocks_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=2usize, 1..=3)
}

fn list(blocks: &[usize]) -> String {
    blocks.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_json_is_a_fixed_point(kind in 0..6usize, seed in 0u64..500) {
        let (name, p) = match kind {
            0 => ("scrambled-semisimple", params(&[("blocks", "1,2")])),
            1 => ("group-algebra", params(&[("group", "C3")])),
            2 => ("coset-algebra", params(&[])),
            3 => ("dual-numbers", params(&[("k", "3")])),
            4 => ("frobenius-nonspecial", params(&[("blocks", "2")])),
            _ => ("mixed", params(&[("max-dim", "4")])),
        };
        let file = generate(name, &p, seed).unwrap();
        let text = to_canonical_json(&file).unwrap();
        let back: InstanceFile = from_json(&text).unwrap();
        prop_assert_eq!(to_canonical_json(&back).unwrap(), text);
        let inst = back.build(Tolerance::default()).unwrap();
        prop_assert!(verify_algebra(&inst.category, &inst.algebras["A"]).unwrap().pass);
    }

    #[test]
    fn certificates_verify_and_match_wedderburn(blocks in blocks_strategy(), seed in 0u64..1000) {
        let file = generate("scrambled-semisimple", &params(&[("blocks", &list(&blocks))]), seed).unwrap();
        let inst = file.build(Tolerance::default()).unwrap();
        let (cat, a) = (&inst.category, &inst.algebras["A"]);
        let cert = unitarize(cat, a, &UnitarizeOptions { seed, ..UnitarizeOptions::default() }).unwrap();
        prop_assert!(verify_certificate(cat, &cert, a).unwrap().pass);
        prop_assert!(is_special(cat, &cert.algebra).unwrap().pass);
        prop_assert!(verify_cstar_frobenius(cat, &cert.algebra).unwrap().pass);
        let mut found = wedderburn_exact(cat, a).unwrap().blocks;
        let mut want = blocks.clone();
        found.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(found, want);
    }

    #[test]
    fn action_rescaling_is_homogeneous(n in 1..=3usize, re in 0.1f64..5.0, im in -5.0f64..5.0) {
        let cat = Category::rep_g(FiniteGroup::cyclic(2));
        let a = AlgebraObject::pointwise(&cat, &cat.trivial_rep(n).unwrap()).unwrap();
        let r = ActionModule::free_right(&a).right.unwrap();
        let c = C64::new(re, im);
        let (r1, h1, _) = rescale_action(&cat, &r, &a.carrier).unwrap();
        let (rc, hc, _) = rescale_action(&cat, &r.scale(c), &a.carrier).unwrap();
        // h ↦ |c| h and r' = h⁻¹ r (h ⊗ 1) ↦ c r'
        prop_assert!(hc.distance(&h1.scale(C64::new(c.norm(), 0.0))) < 1e-10 * c.norm());
        prop_assert!(rc.distance(&r1.scale(c)) < 1e-10 * c.norm());
    }
}

#[test]
fn scalar_dimensions_of_representations_are_carrier_dimensions() {
    let s3 = Category::rep_g(FiniteGroup::symmetric(3));
    let objects = [
        s3.trivial_rep(2).unwrap(),
        s3.regular_rep().unwrap(),
        s3.conjugation_rep().unwrap(),
        s3.coset_rep(&[0, 1]).unwrap(),
    ];
    for x in &objects {
        let sol = s3.balanced_duality(x).unwrap();
        let d = s3.scalar_dimension(&sol).unwrap().total;
        assert_relative_eq!(d, x.dim() as f64, epsilon = 1e-12);
        let xb = s3.dual_obj(x).unwrap();
        let d_bar = s3.scalar_dimension(&s3.balanced_duality(&xb).unwrap()).unwrap().total;
        assert_relative_eq!(d, d_bar, epsilon = 1e-12);
    }
}

#[test]
fn grid_scalar_dimension_splits_over_cells() {
    let cat = Category::grid_hilb(3).unwrap();
    let x = cat
        .grid_object(&[vec![1, 0, 2], vec![0, 1, 0], vec![3, 0, 0]])
        .unwrap();
    let dim = cat.scalar_dimension(&cat.balanced_duality(&x).unwrap()).unwrap();
    let from_cells: f64 = dim.cells.iter().map(|(_, d)| d).sum();
    assert_relative_eq!(dim.total, from_cells, epsilon = 1e-12);
    assert_relative_eq!(dim.total, 7.0, epsilon = 1e-12);
}
