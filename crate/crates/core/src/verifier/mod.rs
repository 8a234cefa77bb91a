//! Certification of exact identities on random data and on solver output, plus
//! report-only diagnostics for estimates whose constants are not explicit.

mod identities;
mod solution;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use identities::{
    check_correspondence, check_det_convention, check_eta_relations, check_magic_identity,
    check_star_involution, identity_suite, check_eigenvalue_tail,
};
pub use solution::{
    check_cherrier, check_comparison_uniqueness, check_corollary_root, check_lemma32_pointwise,
    check_ma1_fww_equivalence, check_second_order_quantities, hessian_pairing_decomposition,
    solution_suite, CHERRIER_P,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Exact relation, gated at its tolerance.
    Identity,
    /// Report-only estimate; passes when every value is finite and any exact
    /// sub-identity it carries holds.
    Diagnostic,
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub kind: CheckKind,
    pub instances: usize,
    pub max_residual: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub notes: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn hard(name: impl Into<String>, instances: usize, max_residual: f64, tolerance: f64) -> Self {
        Self {
            check_name: name.into(),
            kind: CheckKind::Identity,
            instances,
            max_residual,
            tolerance: Some(tolerance),
            pass: max_residual <= tolerance,
            notes: String::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn diagnostic(name: impl Into<String>, instances: usize, values: BTreeMap<String, f64>) -> Self {
        let pass = values.values().all(|v| v.is_finite());
        Self {
            check_name: name.into(),
            kind: CheckKind::Diagnostic,
            instances,
            max_residual: 0.0,
            tolerance: None,
            pass,
            notes: String::new(),
            values,
        }
    }

    pub fn failed(name: impl Into<String>, notes: impl Into<String>) -> Self {
        Self {
            check_name: name.into(),
            kind: CheckKind::Identity,
            instances: 0,
            max_residual: f64::INFINITY,
            tolerance: None,
            pass: false,
            notes: notes.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn with_value(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        if !value.is_finite() {
            self.pass = false;
        }
        self
    }

    /// A diagnostic that also carries an exact sub-identity gated at `tolerance`.
    pub fn with_sub_identity(mut self, residual: f64, tolerance: f64) -> Self {
        self.max_residual = self.max_residual.max(residual);
        self.tolerance = Some(tolerance);
        self.pass = self.pass && self.max_residual <= tolerance;
        self
    }

    /// One JSON object, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

pub fn to_jsonl(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| r.to_json_line() + "\n").collect()
}

pub fn summary_table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.check_name.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>10}  {:>9}  {:>11}  {:>9}  result", "check", "kind", "instances", "max_resid", "tol");
    for r in reports {
        let tol = r.tolerance.map_or_else(|| "-".to_string(), |t| format!("{t:.1e}"));
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        let kind = match r.kind {
            CheckKind::Identity => "identity",
            CheckKind::Diagnostic => "diagnostic",
        };
        let _ = writeln!(
            out,
            "{:<width$}  {kind:>10}  {:>9}  {:>11.3e}  {:>9}  {verdict}",
            r.check_name, r.instances, r.max_residual, tol
        );
    }
    out
}

/// `err / scale`, guarded against a vanishing scale.
pub(crate) fn relative(err: f64, scale: f64) -> f64 {
    err / scale.abs().max(1e-300)
}
