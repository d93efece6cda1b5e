//! Byte-stable text output: CSV tables and JSON with sorted keys, every float
//! printed as `%.12e`.

use std::fmt::Write as _;

use serde_json::Value;

/// C-style `%.12e`, e.g. `-1.250000000000e-03`. Non-finite values print as
/// `nan`, `inf` and `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// CSV text with a header line; fields are joined by `,`, rows end in `\n`.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_float).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON with keys in sorted order and floats in `%.12e`. Integers
/// stay integers. The output ends with a newline.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                out.push_str(&format_float(x));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], indent + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// JSON number for `x`, or `null` when `x` is not finite (JSON has no NaN).
pub fn json_float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn c_style_exponent() {
        assert_eq!(format_float(1.0), "1.000000000000e+00");
        assert_eq!(format_float(-0.00125), "-1.250000000000e-03");
        assert_eq!(format_float(6.02e23), "6.020000000000e+23");
        assert_eq!(format_float(1e-300), "1.000000000000e-300");
        assert_eq!(format_float(0.0), "0.000000000000e+00");
    }

    #[test]
    fn json_sorted_and_reparsable() {
        let v = json!({"b": 1.5, "a": [1, 2.0, "x"], "c": {"z": null, "y": true}});
        let s = to_json_string(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.500000000000e+00"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(1.5));
        assert_eq!(back["a"][0].as_i64(), Some(1));
        assert_eq!(back["c"]["y"], json!(true));
    }

    #[test]
    fn csv_layout() {
        let s = csv(&["s", "f_re", "f_im"], vec![vec![0.5, 1.0, 0.0]]);
        assert_eq!(s, "s,f_re,f_im\n5.000000000000e-01,1.000000000000e+00,0.000000000000e+00\n");
    }
}
