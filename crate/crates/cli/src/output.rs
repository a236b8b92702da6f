use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::Failure;

pub const SCHEMA: &str = "caperc/1";
const SIG_DIGITS: usize = 12;

/// Rounds every float to 12 significant digits, recursively.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => {
            let x = num.as_f64().expect("f64");
            let r: f64 = format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("own output");
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Top-level document: rounded, with the schema tag added.
pub fn document(body: Value) -> Value {
    let mut obj = match round_floats(body) {
        Value::Object(o) => o,
        other => {
            let mut m = Map::new();
            m.insert("data".into(), other);
            m
        }
    };
    obj.insert("schema".into(), Value::String(SCHEMA.into()));
    Value::Object(obj)
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// CSV cell for an optional float.
pub fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        let v = round_floats(serde_json::json!({"a": 0.1234567890123456, "b": [1.0, 2u32]}));
        assert_eq!(v["a"], serde_json::json!(0.123456789012));
        assert_eq!(v["b"][1], serde_json::json!(2));
    }

    #[test]
    fn document_keys_sorted() {
        let d = document(serde_json::json!({"zeta": 1, "alpha": 2}));
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"{"alpha":2,"schema":"caperc/1","zeta":1}"#);
    }
}
