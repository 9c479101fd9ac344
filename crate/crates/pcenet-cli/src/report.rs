//! Machine-readable verification reports: one record per check with the
//! residual, its tolerance and an optional grid location. The process
//! exit status is 0 exactly when every check passes.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ReportFile {
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
}

impl ReportFile {
    pub fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.push_at(name, residual, tolerance, None);
    }

    pub fn push_at(
        &mut self,
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        location: Option<(usize, usize)>,
    ) {
        self.checks.push(CheckRecord {
            name: name.into(),
            pass: residual.is_finite() && residual < tolerance,
            residual,
            tolerance,
            location,
        });
    }

    /// Flag-style check: pass/fail without a numeric residual scale.
    pub fn push_flag(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(CheckRecord {
            name: name.into(),
            pass,
            residual: if pass { 0.0 } else { 1.0 },
            tolerance: 0.5,
            location: None,
        });
    }

    pub fn finalize(mut self) -> ReportFile {
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        let mut data = serde_json::to_string_pretty(self).expect("report serialization");
        data.push('\n');
        std::fs::write(path, data)
    }
}
