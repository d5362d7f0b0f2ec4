//! JSON reports with floats rounded to six significant digits.

use holobound_core::holobound::{BoundReport, ThresholdReport};
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` rounded to six significant digits; non-finite values become strings.
pub fn sig6(x: f64) -> Value {
    if x.is_finite() {
        let r: f64 = format!("{x:.5e}").parse().expect("formatted float");
        json!(r)
    } else if x.is_nan() {
        json!("NaN")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn sig6_all(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| sig6(*x)).collect())
}

#[derive(Serialize)]
pub struct Provenance {
    pub grid_n: usize,
    pub version: &'static str,
}

pub fn bound_json(name: &str, r: &BoundReport, grid_n: usize) -> Value {
    json!({
        "name": name,
        "numerator": sig6(r.numerator),
        "numerator_error": sig6(r.numerator_error),
        "denominator": sig6(r.denominator),
        "bound": sig6(r.bound),
        "feasible": r.feasible,
        "kappa_threshold": r.kappa_threshold.map(sig6),
        "side_condition_ok": r.side_condition_ok,
        "argmax": sig6_all(&r.argmax),
        "provenance": Provenance { grid_n, version: VERSION },
    })
}

pub fn threshold_json(name: &str, t: &ThresholdReport, target_m: f64, grid_n: usize) -> Value {
    json!({
        "name": name,
        "target_m": sig6(target_m),
        "kappa": sig6(t.kappa),
        "kappa_interval": sig6_all(&[t.interval.0, t.interval.1]),
        "limit_bound": sig6(t.limit.bound),
        "at_threshold": bound_json(name, &t.at_threshold, grid_n),
        "provenance": Provenance { grid_n, version: VERSION },
    })
}

pub fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}
