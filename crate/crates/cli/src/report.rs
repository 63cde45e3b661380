//! The machine-readable report and its text and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mggs::verifier::{Classification, Report, Status, Witness};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "mggs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub p: u32,
    pub vectors: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub status: Status,
    pub level: usize,
    pub details: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub spec: SpecEcho,
    pub depth: usize,
    pub classification: Classification,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    /// SHA-256 of the report with wall times zeroed and this field empty.
    pub fingerprint: String,
}

impl ReportFile {
    pub fn new(report: &Report, label: Option<String>) -> Self {
        let checks = report
            .verdicts
            .iter()
            .zip(&report.timings_ms)
            .map(|(v, &t)| CheckRecord {
                id: v.claim.as_str().to_string(),
                status: v.status,
                level: v.level,
                details: v.details.clone(),
                notes: v.notes.clone(),
                reason: v.reason.clone(),
                witness: v.witness.clone(),
                wall_time_ms: (t * 1000.0).round() / 1000.0,
            })
            .collect();
        let mut file = ReportFile {
            tool: TOOL.into(),
            version: VERSION.into(),
            spec: SpecEcho {
                p: report.spec.p(),
                vectors: report.spec.vectors().to_vec(),
                label,
            },
            depth: report.depth,
            classification: report.classification,
            passed: report.passed(),
            checks,
            notes: report.notes.clone(),
            fingerprint: String::new(),
        };
        file.fingerprint = file.compute_fingerprint();
        file
    }

    /// The same report with every timing-dependent field cleared.
    pub fn without_timings(&self) -> ReportFile {
        let mut copy = self.clone();
        for c in &mut copy.checks {
            c.wall_time_ms = 0.0;
        }
        copy
    }

    pub fn compute_fingerprint(&self) -> String {
        let mut copy = self.without_timings();
        copy.fingerprint.clear();
        let bytes = serde_json::to_vec(&copy).expect("reports serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let vectors: Vec<String> = self
            .spec
            .vectors
            .iter()
            .map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        let _ = writeln!(out, "spec: p={} vectors={}", self.spec.p, vectors.join(";"));
        if let Some(label) = &self.spec.label {
            let _ = writeln!(out, "label: {label}");
        }
        let _ = writeln!(out, "depth: {}", self.depth);
        let _ = writeln!(out, "classification: {}", self.classification);
        for c in &self.checks {
            let details: Vec<String> = c.details.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(
                out,
                "{:<30} {:<8} {:>10.1} ms  {}",
                c.id,
                c.status.to_string(),
                c.wall_time_ms,
                details.join(" ")
            );
            if let Some(reason) = &c.reason {
                let _ = writeln!(out, "    reason: {reason}");
            }
            for note in &c.notes {
                let _ = writeln!(out, "    note: {note}");
            }
            if let Some(w) = &c.witness {
                let _ = writeln!(out, "    witness: {}", serde_json::to_string(w).expect("witness serializes"));
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        let _ = writeln!(out, "result: {}", if self.passed { "pass" } else { "FAIL" });
        out
    }

    /// One row per detail value; checks without details get one empty row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,status,level,quantity,value,wall_time_ms\n");
        for c in &self.checks {
            if c.details.is_empty() {
                let _ = writeln!(out, "{},{},{},,,{}", c.id, c.status, c.level, c.wall_time_ms);
            }
            for (k, v) in &c.details {
                let _ = writeln!(out, "{},{},{},{k},{v},{}", c.id, c.status, c.level, c.wall_time_ms);
            }
        }
        out
    }
}
