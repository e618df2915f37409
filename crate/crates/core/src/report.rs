//! Structured pass/fail and measured-constant records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measured: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool_version: String,
    #[serde(default)]
    pub input_digests: BTreeMap<String, String>,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport {
            tool_version: crate::VERSION.to_string(),
            ..Default::default()
        }
    }

    /// Records an exact check. A failing check must come with a witness.
    pub fn exact(&mut self, name: &str, anchor: &str, ok: bool, witness: Option<Value>) -> &mut CheckRecord {
        debug_assert!(ok || witness.is_some(), "failing check {name} needs a witness");
        self.checks.push(CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            witness: if ok { None } else { witness },
            measured: BTreeMap::new(),
        });
        self.checks.last_mut().unwrap()
    }

    pub fn measured(&mut self, name: &str, anchor: &str, values: &[(&str, f64)]) -> &mut CheckRecord {
        self.checks.push(CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            status: Status::Measured,
            witness: None,
            measured: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        });
        self.checks.last_mut().unwrap()
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.input_digests.extend(other.input_digests);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl CheckRecord {
    pub fn with(&mut self, key: &str, value: f64) -> &mut Self {
        self.measured.insert(key.into(), value);
        self
    }
}

/// True when all values are finite and either all zero or with
/// `max / min ≤ factor`.
pub fn within_factor(values: &[f64], factor: f64) -> bool {
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return false;
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max == 0.0 || (min > 0.0 && max <= factor * min)
}
