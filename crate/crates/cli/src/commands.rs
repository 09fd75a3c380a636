use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use log::{debug, info};
use qsys_core::algebra::{
    is_connected, is_special, separability_witness, verify_action, verify_algebra,
    verify_cstar_frobenius, verify_witness,
};
use qsys_core::generate::{generate, parse_params};
use qsys_core::io::{self, CertificateFile, Instance};
use qsys_core::unitarize::{
    assembly_defect, decompose_algebra, unitarize as run_unitarize, verify_certificate,
    wedderburn_exact, UnitarizeOptions,
};
use qsys_core::{AlgebraObject, Error, Report, Result, Tolerance};
use serde_json::Value;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

/// The result of one command on one input.
pub struct Outcome {
    pub label: String,
    pub report: Report,
    pub exit: u8,
    /// Replaces the JSON report on stdout (`gen` without `--out`).
    pub stdout: Option<String>,
}

impl Outcome {
    fn finished(label: String, mut report: Report, start: Instant) -> Outcome {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
        let exit = if report.pass { EXIT_PASS } else { EXIT_VIOLATION };
        Outcome {
            label,
            report,
            exit,
            stdout: None,
        }
    }

    fn failed(label: String, tol: Tolerance, err: &Error, start: Instant) -> Outcome {
        let mut report = Report::new(label.clone(), tol);
        report.pass = false;
        report.value("error", err.to_string());
        report.value("reason", reason(err));
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
        Outcome {
            label,
            report,
            exit: exit_code(err),
            stdout: None,
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Io(_) | Error::InvalidTolerance(_) => EXIT_PARSE,
        Error::SolverFailed { .. } => EXIT_SOLVER,
        _ => EXIT_VIOLATION,
    }
}

/// Variant name of an error, e.g. `NotSeparable`.
pub fn reason(err: &Error) -> String {
    let debug = format!("{err:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

fn tolerance(tol: f64) -> Result<Tolerance> {
    Tolerance::default().with_verify_eps(tol)
}

/// Runs `f` on every file concurrently, keeping the input order.
pub fn for_each_file<F>(files: &[PathBuf], f: F) -> Vec<Outcome>
where
    F: Fn(&Path) -> Outcome + Sync,
{
    if files.len() == 1 {
        return vec![f(&files[0])];
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = files.iter().map(|p| s.spawn(|| f(p))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

fn load(path: &Path, tol: Tolerance) -> Result<Instance> {
    let file = io::load(path)?;
    debug!("{}: format version {}", path.display(), file.format_version);
    file.build(tol).map_err(|err| match err {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

fn run(label: String, tol: f64, body: impl FnOnce(Tolerance) -> Result<Report>) -> Outcome {
    let start = Instant::now();
    let tol_checked = tolerance(tol);
    let fallback = tol_checked.clone().unwrap_or_default();
    match tol_checked.and_then(body) {
        Ok(report) => Outcome::finished(label, report, start),
        Err(err) => Outcome::failed(label, fallback, &err, start),
    }
}

pub fn verify(path: &Path, tol: f64, certificate: Option<&Path>) -> Outcome {
    let label = format!("verify {}", path.display());
    run(label.clone(), tol, |tol| {
        let inst = load(path, tol)?;
        let cat = &inst.category;
        let mut report = Report::new(label, tol);
        for (name, a) in &inst.algebras {
            let laws = verify_algebra(cat, a)?;
            let lawful = laws.pass;
            report.absorb(&format!("{name}.algebra"), laws);
            if !lawful {
                continue;
            }
            properties(&inst, name, a, &mut report)?;
        }
        for (name, m) in &inst.modules {
            let a = &inst.algebras[&m.algebra];
            report.absorb(&format!("{name}.action"), verify_action(cat, a, &m.module)?);
        }
        check_labels(&inst, &mut report);
        if let Some(cert_path) = certificate {
            let cf: CertificateFile = io::read_json(cert_path)?;
            let a = inst.algebras.get(&cf.input_algebra).ok_or_else(|| Error::Parse {
                location: format!("{}: input_algebra", cert_path.display()),
                message: format!("no algebra `{}` in the instance", cf.input_algebra),
            })?;
            let cert = cf.certificate(cat, a)?;
            report.absorb("certificate", verify_certificate(cat, &cert, a)?);
        }
        Ok(report)
    })
}

/// Records speciality, the C*-Frobenius law, separability and connectedness
/// as values; none of them is a pass/fail criterion on its own.
fn properties(inst: &Instance, name: &str, a: &AlgebraObject, report: &mut Report) -> Result<()> {
    let cat = &inst.category;
    let special = is_special(cat, a)?;
    report.value(format!("{name}.special"), special.pass);
    report.value(format!("{name}.special_residual"), special.max_residual());
    let frob = verify_cstar_frobenius(cat, a)?;
    report.value(format!("{name}.cstar_frobenius"), frob.pass);
    report.value(format!("{name}.cstar_frobenius_residual"), frob.max_residual());
    match separability_witness(cat, a) {
        Ok(w) => {
            let check = verify_witness(cat, a, &w.f)?;
            report.value(format!("{name}.separable"), check.pass);
            report.value(format!("{name}.separable_residual"), check.max_residual());
            let (connected, units) = is_connected(cat, a)?;
            report.value(format!("{name}.connected"), connected);
            report.value(format!("{name}.dim_hom_unit"), units);
        }
        Err(Error::NotSeparable { residual }) => {
            report.value(format!("{name}.separable"), false);
            report.value(format!("{name}.separable_residual"), residual);
        }
        Err(e) => return Err(e),
    }
    report.value(format!("{name}.dim"), a.dim());
    Ok(())
}

/// Ground-truth labels in the metadata refer to algebra `A`.
fn check_labels(inst: &Instance, report: &mut Report) {
    if !inst.algebras.contains_key("A") {
        return;
    }
    for key in ["separable", "special", "connected", "cstar_frobenius"] {
        let (Some(expected), Some(found)) = (
            inst.metadata.labels.get(key),
            report.values.get(&format!("A.{key}")).cloned(),
        ) else {
            continue;
        };
        let agree = *expected == found;
        report.check(format!("label.{key}"), if agree { 0.0 } else { 1.0 }, 0.0);
    }
}

pub fn decompose(path: &Path, tol: f64) -> Outcome {
    let label = format!("decompose {}", path.display());
    run(label.clone(), tol, |tol| {
        let inst = load(path, tol)?;
        let cat = &inst.category;
        let mut report = Report::new(label, tol);
        for (name, a) in &inst.algebras {
            let summands = decompose_algebra(cat, a)?;
            info!("{name}: {} indecomposable summands", summands.len());
            let dims: Vec<usize> = summands.iter().map(|s| s.algebra.dim()).collect();
            let mut connected = Vec::with_capacity(summands.len());
            for (k, s) in summands.iter().enumerate() {
                report.absorb(&format!("{name}.summand{k}"), verify_algebra(cat, &s.algebra)?);
                connected.push(is_connected(cat, &s.algebra)?.0);
            }
            report.verify(format!("{name}.reassembly"), assembly_defect(cat, a, &summands)?);
            report.value(format!("{name}.summand_dims"), dims);
            report.value(format!("{name}.summand_connected"), connected);
            if let Ok(w) = wedderburn_exact(cat, a) {
                let mut blocks = w.blocks;
                blocks.sort_unstable();
                report.value(format!("{name}.blocks"), blocks);
            }
        }
        Ok(report)
    })
}

pub struct UnitarizeArgs {
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
    pub algebra: Option<String>,
    pub out: Option<PathBuf>,
}

pub fn default_certificate_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    input.with_file_name(format!("{stem}.cert.json"))
}

pub fn unitarize(path: &Path, args: &UnitarizeArgs) -> Outcome {
    let label = format!("unitarize {}", path.display());
    run(label.clone(), args.tol, |tol| {
        let inst = load(path, tol)?;
        let cat = &inst.category;
        let name = match &args.algebra {
            Some(n) => n.clone(),
            None if inst.algebras.len() == 1 => inst.algebras.keys().next().cloned().expect("one algebra"),
            None => {
                return Err(Error::Parse {
                    location: "algebras".into(),
                    message: format!("{} algebras in the file, pick one with --algebra", inst.algebras.len()),
                })
            }
        };
        let a = inst.algebras.get(&name).ok_or_else(|| Error::Parse {
            location: "--algebra".into(),
            message: format!("no algebra `{name}`"),
        })?;
        let opts = UnitarizeOptions {
            seed: args.seed,
            restarts: args.restarts,
            ..UnitarizeOptions::default()
        };
        let cert = run_unitarize(cat, a, &opts)?;
        let out = args.out.clone().unwrap_or_else(|| default_certificate_path(path));
        io::write_json(&CertificateFile::new(&name, &cert, tol), &out)?;
        info!("certificate written to {}", out.display());

        let mut report = Report::new(label, tol);
        report.absorb("certificate", verify_certificate(cat, &cert, a)?);
        report.value("algebra", name);
        report.value("certificate_path", out.display().to_string());
        report.value("input_hash", cert.input_hash.clone());
        report.value("method", serde_json::to_value(&cert.method).unwrap_or(Value::Null));
        report.value("residuals", serde_json::to_value(&cert.residuals).unwrap_or(Value::Null));
        report.value("summands", serde_json::to_value(&cert.summands).unwrap_or(Value::Null));
        Ok(report)
    })
}

pub fn gen(kind: &str, params: &[String], seed: u64, out: Option<&Path>) -> Outcome {
    let label = format!("gen {kind}");
    let start = Instant::now();
    let tol = Tolerance::default();
    let result = parse_params(params).and_then(|p| generate(kind, &p, seed));
    let file = match result {
        Ok(f) => f,
        Err(err) => return Outcome::failed(label, tol, &err, start),
    };
    let mut report = Report::new(label.clone(), tol);
    report.value("seed", seed);
    for (k, v) in &file.metadata.labels {
        report.value(format!("label.{k}"), v.clone());
    }
    let mut outcome = match out {
        Some(path) => match io::save(&file, path) {
            Ok(()) => {
                report.value("path", path.display().to_string());
                Outcome::finished(label, report, start)
            }
            Err(err) => return Outcome::failed(label, tol, &err, start),
        },
        None => Outcome::finished(label, report, start),
    };
    if out.is_none() {
        match io::to_canonical_json(&file) {
            Ok(text) => outcome.stdout = Some(text),
            Err(err) => return Outcome::failed(outcome.label, tol, &err, start),
        }
    }
    outcome
}

fn summarize(o: &Outcome) {
    let verdict = if o.exit == EXIT_PASS { "PASS" } else { "FAIL" };
    eprintln!("{}: {verdict} (exit {})", o.label, o.exit);
    let r = &o.report;
    if let Some(Value::String(e)) = r.values.get("error") {
        eprintln!("  error: {e}");
    }
    if !r.checks.is_empty() {
        eprintln!(
            "  {} checks, {} failed, max residual {:.3e}",
            r.checks.len(),
            r.failures().count(),
            r.max_residual()
        );
    }
    for c in r.failures() {
        eprintln!("  failed {}: {:.3e} > {:.3e}", c.name, c.residual, c.threshold);
    }
    for (k, v) in &r.values {
        let flat = match v {
            Value::Object(_) | Value::Null => false,
            Value::Array(items) => items.iter().all(|x| !x.is_object()),
            _ => true,
        };
        if k != "error" && flat {
            eprintln!("  {k} = {v}");
        }
    }
}

/// Prints summaries and reports; the exit code is the largest one.
pub fn emit(outcomes: &[Outcome]) -> ExitCode {
    for o in outcomes {
        summarize(o);
    }
    let text = if let [single] = outcomes {
        match &single.stdout {
            Some(s) => Ok(s.clone()),
            None => io::to_canonical_json(&single.report),
        }
    } else {
        let reports: Vec<&Report> = outcomes.iter().map(|o| &o.report).collect();
        io::to_canonical_json(&reports)
    };
    match text {
        Ok(t) => print!("{t}"),
        Err(e) => eprintln!("error: cannot render report: {e}"),
    }
    ExitCode::from(outcomes.iter().map(|o| o.exit).max().unwrap_or(EXIT_PASS))
}
