//! Machine-readable run reports.
//!
//! Every rational is written as `{"exact": "7/2", "decimal": 3.5}` with the
//! exact part in lowest terms. Subsets are written as lists of user ids.

use serde::Serialize;
use serde_json::{json, Value};

use crate::combinatorics::{Partition, Subset};
use crate::entropy::SourceModel;
use crate::game::RateVector;
use crate::rational::{format_rational, to_f64, Rational};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub model_digest: Option<String>,
    pub inputs: Value,
    pub results: Value,
    pub certificates: Value,
    pub timing_ms: f64,
    pub exit_code: i32,
}

impl RunReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are plain JSON")
    }
}

pub fn rational(value: &Rational) -> Value {
    json!({"exact": format_rational(value), "decimal": to_f64(value)})
}

pub fn subset(model: &SourceModel, x: Subset) -> Value {
    json!(x.iter().map(|i| model.users()[i].as_str()).collect::<Vec<_>>())
}

pub fn partition(model: &SourceModel, p: &Partition) -> Value {
    json!(p.blocks().iter().map(|&b| subset(model, b)).collect::<Vec<_>>())
}

pub fn rates(r: &RateVector) -> Value {
    json!(r.rates().iter().map(rational).collect::<Vec<_>>())
}

pub fn exact_rates(r: &RateVector) -> Vec<String> {
    r.rates().iter().map(format_rational).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rational_json_is_lowest_terms() {
        let v = rational(&ratio(14, 4));
        assert_eq!(v["exact"], "7/2");
        assert_eq!(v["decimal"], 3.5);
    }
}
