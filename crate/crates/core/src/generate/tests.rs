use super::*;
use crate::algebra::{is_connected, is_special, separability_witness, verify_algebra, verify_cstar_frobenius};
use crate::io::{from_json, to_canonical_json};
use crate::linalg::Tolerance;

fn params(words: &[&str]) -> BTreeMap<String, String> {
    parse_params(words).unwrap()
}

fn label(file: &InstanceFile, key: &str) -> Value {
    file.metadata.labels[key].clone()
}

/// Checks each embedded label against the library's own tests.
fn assert_labels_hold(file: &InstanceFile) {
    let inst = file.build(Tolerance::default()).unwrap();
    let cat = &inst.category;
    let a = &inst.algebras["A"];
    assert!(verify_algebra(cat, a).unwrap().pass);
    let separable = separability_witness(cat, a).is_ok();
    assert_eq!(label(file, "separable"), Value::from(separable), "{}", file.metadata.provenance);
    let special = is_special(cat, a).unwrap().pass;
    assert_eq!(label(file, "special"), Value::from(special), "{}", file.metadata.provenance);
    if separable {
        let (connected, _) = is_connected(cat, a).unwrap();
        assert_eq!(label(file, "connected"), Value::from(connected));
    }
    if let Some(v) = file.metadata.labels.get("cstar_frobenius") {
        assert_eq!(*v, Value::from(verify_cstar_frobenius(cat, a).unwrap().pass));
    }
    assert_eq!(label(file, "dim"), Value::from(a.dim()));
}

#[test]
fn scrambled_semisimple_example() {
    let f = generate("scrambled-semisimple", &params(&["blocks=1,2"]), 7).unwrap();
    assert_eq!(label(&f, "dim"), Value::from(5));
    assert_eq!(label(&f, "separable"), Value::from(true));
    assert_eq!(label(&f, "blocks"), Value::from(vec![1, 2]));
    assert_labels_hold(&f);
}

#[test]
fn dual_numbers_are_not_separable() {
    let f = generate("dual-numbers", &BTreeMap::new(), 1).unwrap();
    assert_eq!(label(&f, "separable"), Value::from(false));
    assert_labels_hold(&f);
    let plain = generate("dual-numbers", &params(&["spread=1", "k=3"]), 1).unwrap();
    assert_labels_hold(&plain);
}

#[test]
fn coset_algebra_is_connected() {
    let f = generate("coset-algebra", &params(&["group=S3", "subgroup-order=2"]), 0).unwrap();
    assert_eq!(label(&f, "connected"), Value::from(true));
    assert_eq!(label(&f, "dim"), Value::from(3));
    assert_labels_hold(&f);
    let g = generate("coset-algebra", &params(&["group=C6", "subgroup=2"]), 0).unwrap();
    assert_eq!(label(&g, "dim"), Value::from(2));
    assert_labels_hold(&g);
}

#[test]
fn group_algebras() {
    for words in [
        vec!["group=S3"],
        vec!["group=C4", "action=trivial"],
        vec!["group=trivial"],
        vec!["group=C2"],
    ] {
        let f = generate("group-algebra", &params(&words), 0).unwrap();
        assert_labels_hold(&f);
    }
}

#[test]
fn frobenius_nonspecial_labels() {
    for seed in 0..5 {
        let f = generate("frobenius-nonspecial", &params(&["blocks=1,2,1"]), seed).unwrap();
        assert_labels_hold(&f);
    }
}

#[test]
fn mixed_corpus_labels() {
    let mut separable = 0;
    for seed in 0..40 {
        let f = generate("mixed", &BTreeMap::new(), seed).unwrap();
        let dim = label(&f, "dim").as_u64().unwrap();
        assert!((1..=6).contains(&dim));
        assert_labels_hold(&f);
        separable += usize::from(label(&f, "separable") == Value::from(true));
    }
    // both outcomes occur
    assert!(separable > 5 && separable < 35, "{separable}");
}

#[test]
fn generation_is_deterministic() {
    for kind in KINDS {
        let p = match kind {
            "scrambled-semisimple" | "frobenius-nonspecial" => params(&["blocks=2,1"]),
            _ => BTreeMap::new(),
        };
        let a = to_canonical_json(&generate(kind, &p, 11).unwrap()).unwrap();
        let b = to_canonical_json(&generate(kind, &p, 11).unwrap()).unwrap();
        assert_eq!(a, b, "{kind}");
        let back: InstanceFile = from_json(&a).unwrap();
        assert_eq!(to_canonical_json(&back).unwrap(), a);
    }
    let a = generate("mixed", &BTreeMap::new(), 1).unwrap();
    let b = generate("mixed", &BTreeMap::new(), 2).unwrap();
    assert_ne!(a, b);
}

#[test]
fn bad_arguments() {
    let loc = |r: Result<InstanceFile>| match r.unwrap_err() {
        Error::Parse { location, .. } => location,
        e => panic!("{e:?}"),
    };
    assert_eq!(loc(generate("nonsense", &BTreeMap::new(), 0)), "kind");
    assert_eq!(loc(generate("scrambled-semisimple", &BTreeMap::new(), 0)), "params.blocks");
    assert_eq!(loc(generate("dual-numbers", &params(&["colour=red"]), 0)), "params.colour");
    assert_eq!(loc(generate("group-algebra", &params(&["group=Q8"]), 0)), "params.group");
    assert_eq!(loc(generate("coset-algebra", &params(&["subgroup-order=5"]), 0)), "params.subgroup-order");
    assert!(parse_params(&["blocks"]).is_err());
    assert!(parse_params(&["k=1", "k=2"]).is_err());
}
