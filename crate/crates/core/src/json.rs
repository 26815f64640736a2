//! Deterministic JSON rendering: object keys sorted, reals written with
//! exactly six decimal places, integers raw.

use serde_json::{Number, Value};

pub const DECIMALS: usize = 6;

/// Formats a real with the fixed number of decimals used in every output.
pub fn format_fixed(x: f64) -> String {
    let s = format!("{x:.DECIMALS$}");
    // "-0.000000" and "0.000000" must not differ between platforms/paths
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_owned()
    } else {
        s
    }
}

/// A JSON number whose textual form is [`format_fixed`]. Non-finite values
/// become `null`.
pub fn fixed(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format_fixed(x);
    match serde_json::from_str::<Number>(&text) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn to_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}
