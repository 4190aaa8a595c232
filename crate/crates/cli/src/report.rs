//! The JSON report document.

use std::collections::BTreeMap;

use hsoliton_core::suites::{CheckOptions, SuiteOutcome};
use hsoliton_core::ResidualReport;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!("hsoliton ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Settings {
    pub points: usize,
    pub tol: f64,
    pub seed: u64,
}

impl From<&CheckOptions> for Settings {
    fn from(o: &CheckOptions) -> Settings {
        Settings {
            points: o.points,
            tol: o.tol,
            seed: o.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub points: usize,
    pub sup_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// The verdict this check is supposed to reach.
    pub expected: bool,
    pub worst_point: Vec<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckEntry {
    pub fn new(r: &ResidualReport, expected: bool) -> CheckEntry {
        CheckEntry {
            name: r.name.clone(),
            points: r.points,
            sup_residual: r.sup_residual,
            tolerance: r.tolerance,
            pass: r.pass,
            expected,
            worst_point: r.worst_point.clone(),
            metadata: r.metadata.clone(),
            notes: r.notes.clone(),
        }
    }

    pub fn realized(&self) -> bool {
        self.pass == self.expected
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportDocument {
    pub version: String,
    pub command: String,
    pub subject: String,
    /// SHA-256 of the manifest bytes, or of the canonical JSON describing
    /// the built-in input.
    pub manifest_digest: String,
    pub settings: Settings,
    pub checks: Vec<CheckEntry>,
    pub classification: Option<String>,
    pub trivial: Option<bool>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ReportDocument {
    pub fn new(command: &str, subject: &str, digest: String, opts: &CheckOptions) -> ReportDocument {
        ReportDocument {
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            subject: subject.to_string(),
            manifest_digest: digest,
            settings: opts.into(),
            checks: Vec::new(),
            classification: None,
            trivial: None,
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn from_suite(command: &str, digest: String, opts: &CheckOptions, suite: &SuiteOutcome) -> ReportDocument {
        let mut doc = ReportDocument::new(command, &suite.name, digest, opts);
        doc.checks = suite
            .checks
            .iter()
            .map(|c| CheckEntry::new(&c.report, c.expected))
            .collect();
        doc.classification = suite.classification.map(|c| c.as_str().to_string());
        doc.trivial = suite.trivial;
        if let (Some(want), Some(got)) = (suite.expected_classification, suite.classification) {
            if want != got {
                doc.notes.push(format!("classification {got}, expected {want}"));
            }
        }
        if let (Some(want), Some(got)) = (suite.expected_trivial, suite.trivial) {
            if want != got {
                doc.notes.push(format!("trivial = {got}, expected {want}"));
            }
        }
        doc.pass = suite.pass();
        doc
    }

    pub fn push(&mut self, r: &ResidualReport, expected: bool) {
        let e = CheckEntry::new(r, expected);
        self.pass &= e.realized();
        self.checks.push(e);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text summary for the terminal.
    pub fn summary(&self) -> String {
        let mut out = format!("{} {}\n", self.command, self.subject);
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            let note = match (c.expected, c.realized()) {
                (false, true) => " (expected failure)",
                (_, false) => " (UNEXPECTED)",
                _ => "",
            };
            out.push_str(&format!(
                "  {verdict:4} {:<28} sup {:.3e}  tol {:.1e}{note}\n",
                c.name, c.sup_residual, c.tolerance
            ));
        }
        if let Some(c) = &self.classification {
            out.push_str(&format!("  classification: {c}\n"));
        }
        if let Some(t) = self.trivial {
            out.push_str(&format!("  trivial: {t}\n"));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out.push_str(if self.pass {
            "verdict: ok\n"
        } else {
            "verdict: MISMATCH\n"
        });
        out
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}
