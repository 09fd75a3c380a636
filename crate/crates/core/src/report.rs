//! Residual reports returned by every verification predicate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::Tolerance;

/// One identity check: a residual norm against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub subject: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub tolerance: Tolerance,
    /// Derived quantities that are not pass/fail (dimensions, norms, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, serde_json::Value>,
    pub tool_version: String,
    /// Only field allowed to differ between otherwise identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(subject: impl Into<String>, tolerance: Tolerance) -> Report {
        Report {
            subject: subject.into(),
            checks: Vec::new(),
            pass: true,
            tolerance,
            values: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: None,
        }
    }

    /// Records `residual <= threshold`. NaN residuals fail.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, threshold: f64) -> bool {
        let pass = residual <= threshold;
        self.checks.push(Check {
            name: name.into(),
            residual,
            threshold,
            pass,
        });
        self.pass &= pass;
        pass
    }

    /// Check against `verify_eps`.
    pub fn verify(&mut self, name: impl Into<String>, residual: f64) -> bool {
        let eps = self.tolerance.verify_eps;
        self.check(name, residual, eps)
    }

    pub fn value(&mut self, name: impl Into<String>, value: impl Into<serde_json::Value>) {
        self.values.insert(name.into(), value.into());
    }

    /// Appends the checks of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.pass &= c.pass;
            self.checks.push(c);
        }
        for (k, v) in other.values {
            self.values.insert(format!("{prefix}.{k}"), v);
        }
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.residual)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracks_every_check() {
        let mut r = Report::new("x", Tolerance::default());
        assert!(r.verify("a", 1e-12));
        assert!(r.pass);
        assert!(!r.verify("b", 1e-3));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        assert!(!r.check("nan", f64::NAN, 1.0));
    }

    #[test]
    fn absorb_prefixes_names() {
        let mut outer = Report::new("outer", Tolerance::default());
        let mut inner = Report::new("inner", Tolerance::default());
        inner.verify("assoc", 0.0);
        inner.value("dim", 3);
        outer.absorb("summand0", inner);
        assert_eq!(outer.residual("summand0.assoc"), Some(0.0));
        assert_eq!(outer.values["summand0.dim"], serde_json::json!(3));
    }
}
