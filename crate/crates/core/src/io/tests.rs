use super::*;
use crate::algebra::verify_algebra;
use crate::unitarize::{unitarize, verify_certificate, UnitarizeOptions};

fn s3_instance() -> (Category, InstanceFile) {
    let cat = Category::rep_g(FiniteGroup::symmetric(3));
    let x = cat.conjugation_rep().unwrap();
    let a = AlgebraObject::group_algebra(&cat, &x).unwrap();
    let mut file = InstanceFile::new(&cat);
    file.insert_algebra("A", &a);
    file.insert_module("AA", "A", &ActionModule::regular_bimodule(&a));
    file.metadata.seed = Some(7);
    file.metadata.provenance = "test".into();
    file.metadata.labels.insert("separable".into(), true.into());
    (cat, file)
}

#[test]
fn floats_are_printed_in_full() {
    let text = to_canonical_json(&vec![0.1f64, 1.0, -2.5e-300]).unwrap();
    assert!(text.contains("1.0000000000000001e-1"));
    assert!(text.contains("1.0000000000000000e0"));
    assert!(text.contains("-2.5000000000000000e-300"));
    let back: Vec<f64> = from_json(&text).unwrap();
    assert_eq!(back, vec![0.1, 1.0, -2.5e-300]);
}

#[test]
fn keys_are_sorted() {
    let (_, file) = s3_instance();
    let text = to_canonical_json(&file).unwrap();
    let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("algebras") < pos("backend"));
    assert!(pos("backend") < pos("format_version"));
    assert!(pos("format_version") < pos("metadata"));
    assert!(text.ends_with("}\n"));
}

#[test]
fn instance_round_trip_is_byte_identical() {
    let (_, file) = s3_instance();
    let text = to_canonical_json(&file).unwrap();
    let back: InstanceFile = from_json(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(to_canonical_json(&back).unwrap(), text);

    let inst = back.build(Tolerance::default()).unwrap();
    let a = &inst.algebras["A"];
    assert!(verify_algebra(&inst.category, a).unwrap().pass);
    assert_eq!(inst.modules["AA"].algebra, "A");
    assert_eq!(inst.metadata.seed, Some(7));
}

#[test]
fn grid_instance_round_trip() {
    let cat = Category::grid_hilb(2).unwrap();
    let x = cat.grid_object_from_labels(vec![(0, 0), (1, 1), (1, 1)]).unwrap();
    let a = AlgebraObject::pointwise(&cat, &x).unwrap();
    let mut file = InstanceFile::new(&cat);
    file.insert_algebra("P", &a);
    let text = to_canonical_json(&file).unwrap();
    let inst = from_json::<InstanceFile>(&text).unwrap().build(Tolerance::default()).unwrap();
    let b = &inst.algebras["P"];
    assert_eq!(b.carrier.labels(), x.labels());
    assert!(b.mult.distance(&a.mult) == 0.0);
}

#[test]
fn trivial_objects_are_written_compactly() {
    let cat = Category::rep_g(FiniteGroup::cyclic(2));
    let x = cat.trivial_rep(3).unwrap();
    assert_eq!(ObjectSpec::from_object(&x), ObjectSpec::Trivial { dim: 3 });
}

fn location_of(err: Error) -> String {
    match err {
        Error::Parse { location, .. } => location,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn syntax_errors_report_line_and_column() {
    let err = from_json::<InstanceFile>("{\n  \"format_version\": 1,\n  oops\n}").unwrap_err();
    assert_eq!(location_of(err), "line 3 column 3");
}

#[test]
fn unknown_fields_are_rejected() {
    let (_, file) = s3_instance();
    let mut value = serde_json::to_value(&file).unwrap();
    value["extra"] = 1.into();
    assert!(from_json::<InstanceFile>(&value.to_string()).is_err());
}

#[test]
fn schema_errors_name_the_field() {
    let (_, file) = s3_instance();

    let mut bad = file.clone();
    bad.algebras.get_mut("A").unwrap().mult.data.pop();
    assert_eq!(location_of(bad.build(Tolerance::default()).unwrap_err()), "algebras.A.mult");

    let mut bad = file.clone();
    bad.algebras.get_mut("A").unwrap().unit.rows = 5;
    assert_eq!(location_of(bad.build(Tolerance::default()).unwrap_err()), "algebras.A.unit");

    let mut bad = file.clone();
    bad.modules.get_mut("AA").unwrap().algebra = "B".into();
    assert_eq!(location_of(bad.build(Tolerance::default()).unwrap_err()), "modules.AA.algebra");

    let mut bad = file.clone();
    bad.algebras.get_mut("A").unwrap().object = "nope".into();
    assert_eq!(location_of(bad.build(Tolerance::default()).unwrap_err()), "algebras.A.object");

    let mut bad = file.clone();
    bad.format_version = 9;
    assert_eq!(location_of(bad.build(Tolerance::default()).unwrap_err()), "format_version");

    let mut bad = file.clone();
    bad.objects.insert("L".into(), ObjectSpec::Labels { labels: vec![[0, 0]] });
    assert_eq!(location_of(bad.build(Tolerance::default()).unwrap_err()), "objects.L");
}

#[test]
fn non_intertwiners_are_rejected() {
    let (_, mut file) = s3_instance();
    // e_(12) * e_(12) -> e_(12) breaks equivariance
    let spec = file.algebras.get_mut("A").unwrap();
    let cols = spec.mult.cols;
    spec.mult.data[cols + 7] = [1.0, 0.0];
    assert_eq!(location_of(file.build(Tolerance::default()).unwrap_err()), "algebras.A.mult");
}

#[test]
fn certificate_round_trip() {
    let (_, file) = s3_instance();
    let inst = file.build(Tolerance::default()).unwrap();
    let cat = &inst.category;
    let a = &inst.algebras["A"];
    let cert = unitarize(cat, a, &UnitarizeOptions::default()).unwrap();
    let cf = CertificateFile::new("A", &cert, *cat.tolerance());
    let text = to_canonical_json(&cf).unwrap();
    let back: CertificateFile = from_json(&text).unwrap();
    assert_eq!(back, cf);
    let rebuilt = back.certificate(cat, a).unwrap();
    assert!(verify_certificate(cat, &rebuilt, a).unwrap().pass);
    assert_eq!(rebuilt.input_hash, cert.input_hash);
}

#[test]
fn files_on_disk() {
    let (_, file) = s3_instance();
    let dir = std::env::temp_dir().join(format!("qsys-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s3.json");
    save(&file, &path).unwrap();
    assert_eq!(load(&path).unwrap(), file);
    std::fs::write(&path, "[").unwrap();
    let loc = location_of(load(&path).unwrap_err());
    assert!(loc.starts_with(&path.display().to_string()));
    assert!(matches!(load(&dir.join("missing.json")), Err(Error::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ungrouped_grid_labels_are_rejected() {
    let cat = Category::grid_hilb(2).unwrap();
    let x = cat.grid_object_from_labels(vec![(0, 0), (1, 1)]).unwrap();
    let mut file = InstanceFile::new(&cat);
    file.insert_object("X", &x);
    file.objects.insert(
        "X".into(),
        ObjectSpec::Labels {
            labels: vec![[1, 1], [0, 0]],
        },
    );
    let err = file.build(Tolerance::default()).unwrap_err();
    assert_eq!(location_of(err), "objects.X");
}
