//! The JSON report every command can emit.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

/// Fields serialize in declaration order; maps inside `parameters` and
/// `values` are key-sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub parameters: Value,
    pub verdict: String,
    pub checks: Vec<Check>,
    pub values: Value,
    pub wall_time_seconds: Value,
}

impl Report {
    pub fn new(command: &str, parameters: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            parameters,
            verdict: String::new(),
            checks: Vec::new(),
            values: Value::Null,
            wall_time_seconds: Value::Null,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool) {
        self.checks.push(Check { name: name.into(), passed });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A float rounded to 12 significant digits; magnitudes below `1e-12` are
/// numerical noise and print as 0.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    if x.abs() < 1e-12 {
        return Value::from(0.0);
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

/// Display form with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    let v = num(x);
    match v.as_f64() {
        Some(r) if r == 0.0 => "0".into(),
        Some(r) => r.to_string(),
        None => "nan".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(num(1.0 / 3.0).as_f64().unwrap(), 0.333333333333);
        assert_eq!(num(-2.0 / 3.0e-5).as_f64().unwrap(), -66666.6666667);
        assert_eq!(fmt12(1e-17), "0");
        assert_eq!(fmt12(2.5e-9), "0.0000000025");
        assert_eq!(fmt12(-0.0), "0");
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn report_round_trips_with_fixed_field_order() {
        let mut r = Report::new("sweep", serde_json::json!({"from": 2, "to": 3}));
        r.verdict = "ok".into();
        r.check("x", true);
        r.values = serde_json::json!({"b": num(0.1), "a": [1, 2]});
        r.wall_time_seconds = num(0.25);
        let text = r.to_json();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let keys = ["schema_version", "command", "parameters", "verdict", "checks", "values", "wall_time_seconds"];
        let positions: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }
}
