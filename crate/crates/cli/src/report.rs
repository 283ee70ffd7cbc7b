use crate::config::{Experiment, ResolvedConfig};
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, max: f64) -> Self {
        Check { name: name.into(), value, bound: format!("<= {max}"), passed: value <= max }
    }

    pub fn at_least(name: &str, value: f64, min: f64) -> Self {
        Check { name: name.into(), value, bound: format!(">= {min}"), passed: value >= min }
    }

    pub fn within(name: &str, value: f64, band: [f64; 2]) -> Self {
        Check {
            name: name.into(),
            value,
            bound: format!("in [{}, {}]", band[0], band[1]),
            passed: band[0] <= value && value <= band[1],
        }
    }

    pub fn holds(name: &str, value: f64, bound: &str, passed: bool) -> Self {
        Check { name: name.into(), value, bound: bound.into(), passed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub config: ResolvedConfig,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub timestamp_unix: u64,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The JSON report without its timestamp.
    pub fn numeric_content(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut v {
            map.remove("timestamp_unix");
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}
