//! Machine-readable verification reports: one record per checked identity,
//! assembled in name order so identical runs produce byte-identical output.

use serde::Serialize;

use crate::config::JobConfig;

#[derive(Debug, Serialize)]
pub struct ToolStamp {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub identity: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct VerificationReport {
    pub tool: ToolStamp,
    pub config: JobConfig,
    pub checks: Vec<CheckRecord>,
    pub overall_pass: bool,
}

impl VerificationReport {
    pub fn new(config: JobConfig, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let overall_pass = checks.iter().all(|c| c.pass);
        VerificationReport {
            tool: ToolStamp {
                name: "freestate",
                version: env!("CARGO_PKG_VERSION"),
            },
            config,
            checks,
            overall_pass,
        }
    }

    pub fn to_json(&self) -> String {
        let mut body = serde_json::to_string_pretty(self).expect("report serializes");
        body.push('\n');
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn record(name: &str, pass: bool) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            identity: "x = x".into(),
            max_residual: 0.0,
            tolerance: 1e-12,
            pass,
        }
    }

    fn config() -> JobConfig {
        JobConfig {
            n: 2,
            c: vec![1.0, 1.0],
            lambda: 1.0,
            max_word_len: 5,
            seed: 7,
            tolerances: BTreeMap::new(),
        }
    }

    #[test]
    fn checks_are_sorted_and_overall_is_conjunction() {
        let report = VerificationReport::new(config(), vec![record("b", true), record("a", true)]);
        assert_eq!(report.checks[0].name, "a");
        assert!(report.overall_pass);
        let report = VerificationReport::new(config(), vec![record("a", true), record("b", false)]);
        assert!(!report.overall_pass);
    }

    #[test]
    fn serialization_is_stable() {
        let a = VerificationReport::new(config(), vec![record("a", true)]).to_json();
        let b = VerificationReport::new(config(), vec![record("a", true)]).to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"overall_pass\": true"));
        assert!(a.ends_with('\n'));
    }
}
