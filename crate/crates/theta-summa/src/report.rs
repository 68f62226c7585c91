//! Verification reports.

use serde::Serialize;
use serde_json::Value;

use crate::format::SCHEMA;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub seed: u64,
    pub inputs: Value,
    /// `None` when the trial raised an error instead of producing a residual.
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub identity: String,
    pub genus: usize,
    pub seed: u64,
    pub trials: usize,
    pub n_max: Option<usize>,
    pub tol: f64,
    /// Largest residual over the trials; `null` if any trial errored.
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub resamples: usize,
    /// Sorted by trial seed.
    pub failures: Vec<Failure>,
    pub passed: bool,
    pub wall_time: f64,
}

impl Report {
    pub fn summary_line(&self) -> String {
        let num = |x: Option<f64>| x.map_or_else(|| "error".to_string(), |v| format!("{v:.2e}"));
        format!(
            "{} {:<14} g={} trials={:<4} max={:<9} mean={:<9} tol={:.0e} resamples={:<4} failures={} time={:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.identity,
            self.genus,
            self.trials,
            num(self.max_residual),
            num(self.mean_residual),
            self.tol,
            self.resamples,
            self.failures.len(),
            self.wall_time
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Combined {
    pub schema: &'static str,
    pub reports: Vec<Report>,
    pub passed: bool,
}

impl Combined {
    pub fn new(reports: Vec<Report>) -> Self {
        let passed = reports.iter().all(|r| r.passed);
        Combined { schema: SCHEMA, reports, passed }
    }
}

/// Drops `wall_time` fields so two runs can be compared byte for byte.
pub fn without_wall_time(mut v: Value) -> Value {
    match &mut v {
        Value::Object(map) => {
            map.remove("wall_time");
            for x in map.values_mut() {
                *x = without_wall_time(x.take());
            }
        }
        Value::Array(items) => {
            for x in items.iter_mut() {
                *x = without_wall_time(x.take());
            }
        }
        _ => {}
    }
    v
}
