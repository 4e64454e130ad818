use contactkit::integrability::{CheckReport, RankReport};
use serde::Serialize;

use crate::config::LoadedConfig;
use crate::error::{EXIT_CHECK_FAILED, EXIT_PASS};

/// How a residual is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass iff `residual < tolerance`.
    Below,
    /// Pass iff `residual > tolerance` (determinants, singular values).
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// `null` when the residual is not finite.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub samples: usize,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl Check {
    /// A `Below` check on a maximum residual.
    pub fn below(name: &str, residual: f64, tolerance: f64, samples: usize, seed: Option<u64>) -> Self {
        Check {
            name: name.into(),
            pass: residual < tolerance,
            residual: residual.is_finite().then_some(residual),
            tolerance,
            comparison: Comparison::Below,
            samples,
            seed,
            worst_point: None,
            note: None,
            detail: None,
        }
    }

    pub fn with_worst(mut self, x: Option<Vec<f64>>) -> Self {
        self.worst_point = x;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }

    /// A check that could not run; it fails without a residual.
    pub fn skipped(name: &str, tolerance: f64, comparison: Comparison, why: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass: false,
            residual: None,
            tolerance,
            comparison,
            samples: 0,
            seed: None,
            worst_point: None,
            note: Some(why.into()),
            detail: None,
        }
    }
}

impl From<CheckReport> for Check {
    fn from(r: CheckReport) -> Self {
        Check {
            pass: r.pass,
            ..Check::below(r.check, r.residual, r.tolerance, r.samples, r.seed)
        }
        .with_worst(r.worst_point)
    }
}

impl From<RankReport> for Check {
    fn from(r: RankReport) -> Self {
        let residual = r.min_relative_singular_value;
        Check {
            name: "rank".into(),
            pass: r.pass,
            residual: residual.is_finite().then_some(residual),
            tolerance: r.tolerance,
            comparison: Comparison::Above,
            samples: r.samples,
            seed: r.seed,
            worst_point: r.worst_point,
            note: None,
            detail: Some(serde_json::json!({ "min_rank": r.min_rank, "required": r.required })),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigStamp {
    pub name: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: ConfigStamp,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    /// Wall-clock time; only present when asked for, since it breaks
    /// byte-identical reruns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &'static str, loaded: &LoadedConfig, seed: Option<u64>, checks: Vec<Check>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Report {
            tool: "contactkit",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: ConfigStamp {
                name: loaded.config.name.clone(),
                digest: loaded.digest.clone(),
            },
            seed,
            checks,
            pass,
            details: None,
            timing_ms: None,
        }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A finished command: its report and the process exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

impl Outcome {
    /// Exit code from the checks alone.
    pub fn from_report(report: Report) -> Self {
        let exit_code = if report.pass { EXIT_PASS } else { EXIT_CHECK_FAILED };
        Outcome { report, exit_code }
    }
}
