//! Stable JSON rendering: every float is rounded to 9 significant digits so
//! that output files and protocol replies compare byte for byte.

use serde::Serialize;
use serde_json::{Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 9;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every non-integer number in place.
pub fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_rounded_value<T: Serialize + ?Sized>(item: &T) -> serde_json::Result<Value> {
    let mut value = serde_json::to_value(item)?;
    round_value(&mut value);
    Ok(value)
}

/// One JSON line, floats rounded, no trailing newline.
pub fn to_line<T: Serialize + ?Sized>(item: &T) -> serde_json::Result<String> {
    serde_json::to_string(&to_rounded_value(item)?)
}

/// Rounded float as CSV text; `None` renders empty.
pub fn csv_float(x: Option<f64>) -> String {
    x.map(|v| Value::from(round_sig(v)).to_string())
        .unwrap_or_default()
}
