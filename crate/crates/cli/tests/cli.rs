use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qsys_core::io::{self, CertificateFile, InstanceFile};
use qsys_core::unitarize::verify_certificate;
use qsys_core::Tolerance;
use serde_json::Value;

fn qsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsys"))
        .args(args)
        .env_remove("QSF_LOG")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}):\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn canonical_fixture_loads_and_round_trips() {
    let path = fixture("c2_pointwise.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let file: InstanceFile = io::load(&path).unwrap();
    assert_eq!(io::to_canonical_json(&file).unwrap(), text);

    let out = qsys(&["verify", s(&path)]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["pass"], Value::Bool(true));
    assert_eq!(r["values"]["A.special"], Value::Bool(true));
    assert!(r["values"]["A.special_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn shape_mismatch_is_a_parse_error_naming_the_field() {
    let out = qsys(&["verify", s(&fixture("c2_bad_shape.json"))]);
    assert_eq!(code(&out), 2);
    let r = report(&out);
    assert_eq!(r["values"]["reason"], "Parse");
    assert!(r["values"]["error"].as_str().unwrap().contains("algebras.A.mult"));
}

#[test]
fn syntax_errors_give_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\n  \"format_version\": 1,\n  \"backend\": \n").unwrap();
    let out = qsys(&["decompose", s(&path)]);
    assert_eq!(code(&out), 2);
    assert!(report(&out)["values"]["error"].as_str().unwrap().contains("line 4"));
    let missing = qsys(&["verify", s(&dir.path().join("absent.json"))]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn generated_golden_file_is_reproduced() {
    let golden = std::fs::read_to_string(fixture("scrambled_blocks_1_2_seed7.json")).unwrap();
    let out = qsys(&["gen", "scrambled-semisimple", "blocks=1,2", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = qsys(&["gen", "scrambled-semisimple", "blocks=1,2", "--seed", "7", "--out", s(&path)]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["values"]["label.dim"], 5);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden);
    let file = io::load(&path).unwrap();
    io::save(&file, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden);
}

#[test]
fn unitarize_scrambled_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.json");
    std::fs::copy(fixture("scrambled_blocks_1_2_seed7.json"), &input).unwrap();
    let out = qsys(&["unitarize", s(&input), "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert_path = dir.path().join("s.cert.json");
    assert_eq!(report(&out)["values"]["certificate_path"], s(&cert_path));

    let inst = io::load(&input).unwrap().build(Tolerance::default()).unwrap();
    let cf: CertificateFile = io::read_json(&cert_path).unwrap();
    let a = &inst.algebras["A"];
    let cert = cf.certificate(&inst.category, a).unwrap();
    assert!(verify_certificate(&inst.category, &cert, a).unwrap().pass);

    let out = qsys(&["verify", s(&input), "--certificate", s(&cert_path)]);
    assert_eq!(code(&out), 0);
    assert!(report(&out)["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"] == "certificate.input_hash"));
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("scrambled_blocks_1_2_seed7.json");
    let cert_path = dir.path().join("c.json");
    assert_eq!(code(&qsys(&["unitarize", s(&input), "--out", s(&cert_path)])), 0);
    let mut cf: CertificateFile = io::read_json(&cert_path).unwrap();
    cf.mult.data[0][0] += 1e-3;
    io::write_json(&cf, &cert_path).unwrap();
    assert_eq!(code(&qsys(&["verify", s(&input), "--certificate", s(&cert_path)])), 1);
}

#[test]
fn dual_numbers_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dn.json");
    assert_eq!(code(&qsys(&["gen", "dual-numbers", "--seed", "4", "--out", s(&path)])), 0);
    assert_eq!(code(&qsys(&["verify", s(&path)])), 0);
    let out = qsys(&["unitarize", s(&path)]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["values"]["reason"], "NotSeparable");
    assert!(!dir.path().join("dn.cert.json").exists());
    let out = qsys(&["decompose", s(&path)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn every_kind_verifies_against_its_labels() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 7] = [
        &["scrambled-semisimple", "blocks=2,1,1"],
        &["group-algebra", "group=S3"],
        &["group-algebra", "group=C3", "action=trivial"],
        &["coset-algebra", "group=S3", "subgroup-order=2"],
        &["dual-numbers", "k=3"],
        &["frobenius-nonspecial", "blocks=1,2"],
        &["mixed", "max-dim=5"],
    ];
    let mut paths = Vec::new();
    for (k, args) in cases.iter().enumerate() {
        let path = dir.path().join(format!("{k}.json"));
        let mut full = vec!["gen"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--seed", "5", "--out", s(&path)]);
        assert_eq!(code(&qsys(&full)), 0, "{args:?}");
        paths.push(path);
    }
    let mut args = vec!["verify"];
    args.extend(paths.iter().map(|p| s(p)));
    let out = qsys(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports = report(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), cases.len());
    for r in reports {
        let labels = r["checks"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| c["name"].as_str().unwrap().starts_with("label."))
            .count();
        assert!(labels >= 2, "{r}");
    }
}

#[test]
fn decompose_reports_summands() {
    let out = qsys(&["decompose", s(&fixture("scrambled_blocks_1_2_seed7.json"))]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let mut dims: Vec<u64> = r["values"]["A.summand_dims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    dims.sort_unstable();
    assert_eq!(dims, vec![1, 4]);
    assert_eq!(r["values"]["A.blocks"], serde_json::json!([1, 2]));
}

fn without_timing(mut v: Value) -> Value {
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_time_s");
    }
    v
}

#[test]
fn identical_seeds_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.json");
    let args = ["gen", "scrambled-semisimple", "blocks=1,1,2", "--seed", "9", "--out", s(&input)];
    assert_eq!(code(&qsys(&args)), 0);
    let run = |name: &str| {
        let cert = dir.path().join(name);
        let out = qsys(&["unitarize", s(&input), "--seed", "2", "--out", s(&cert)]);
        assert_eq!(code(&out), 0);
        let mut r = without_timing(report(&out));
        r["values"]["certificate_path"] = Value::Null;
        (std::fs::read(&cert).unwrap(), r)
    };
    let (c1, r1) = run("c1.json");
    let (c2, r2) = run("c2.json");
    assert_eq!(c1, c2);
    assert_eq!(r1, r2);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&qsys(&["gen", "no-such-kind"])), 2);
    assert_eq!(code(&qsys(&["gen", "dual-numbers", "k"])), 2);
    assert_eq!(code(&qsys(&["verify", s(&fixture("c2_pointwise.json")), "--tol", "-1"])), 2);
    assert_eq!(code(&qsys(&["frobnicate"])), 2);
}

#[test]
fn log_level_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qsys"))
        .args(["decompose", s(&fixture("c2_pointwise.json"))])
        .env("QSF_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("indecomposable summands"));
    let quiet = qsys(&["decompose", s(&fixture("c2_pointwise.json"))]);
    assert!(!String::from_utf8_lossy(&quiet.stderr).contains("indecomposable summands"));
}
