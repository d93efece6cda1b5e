//! JSON description of test functions.
//!
//! Leaves carry a `family` field:
//! `{"family":"bump","d":1.0,"center":0.0,"scale":1.0}` (`scale` is the
//! amplitude), `{"family":"mollified_polynomial","d":..,"center":..,"coeffs":[..]}`
//! and `{"family":"gaussian","width":..,"center":..}`.
//! Composite nodes are `{"sum":[..],"coeffs":[..]}` (coefficients optional,
//! each a number or `[re, im]`), `{"product":[..]}`, `{"shift":node,"by":a}`,
//! `{"scale":node,"lambda":λ}`, `{"conj":node}` and
//! `{"derivative":node,"order":k}`.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::{Node, TestFunction};
use crate::error::{Error, Result};

fn input(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("{path}: {msg}"))
}

fn number(obj: &Map<String, Value>, key: &str, path: &str, default: Option<f64>) -> Result<f64> {
    match obj.get(key) {
        Some(v) => v
            .as_f64()
            .ok_or_else(|| input(&format!("{path}.{key}"), "expected a number")),
        None => default.ok_or_else(|| input(path, format!("missing field \"{key}\""))),
    }
}

pub(crate) fn parse_complex(v: &Value, path: &str) -> Result<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(input(path, "expected [re, im] numbers")),
        },
        _ => Err(input(path, "expected a number or [re, im]")),
    }
}

fn children(v: &Value, path: &str) -> Result<Vec<TestFunction>> {
    let arr = v.as_array().ok_or_else(|| input(path, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, c)| parse(c, &format!("{path}[{i}]")))
        .collect()
}

fn parse(v: &Value, path: &str) -> Result<TestFunction> {
    let obj = v
        .as_object()
        .ok_or_else(|| input(path, "expected an object"))?;
    let wrap = |r: Result<TestFunction>| r.map_err(|e| input(path, e));
    if let Some(fam) = obj.get("family") {
        let fam = fam
            .as_str()
            .ok_or_else(|| input(&format!("{path}.family"), "expected a string"))?;
        let center = number(obj, "center", path, Some(0.0))?;
        return match fam {
            "bump" | "standard_bump" => {
                let d = number(obj, "d", path, Some(1.0))?;
                let amp = number(obj, "scale", path, Some(1.0))?;
                wrap(TestFunction::bump(center, d, amp))
            }
            "mollified_polynomial" => {
                let d = number(obj, "d", path, Some(1.0))?;
                let coeffs = obj
                    .get("coeffs")
                    .and_then(Value::as_array)
                    .ok_or_else(|| input(path, "missing array field \"coeffs\""))?
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        c.as_f64()
                            .ok_or_else(|| input(&format!("{path}.coeffs[{i}]"), "expected a number"))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                wrap(TestFunction::mollified_polynomial(center, d, coeffs))
            }
            "gaussian" => {
                let width = number(obj, "width", path, Some(1.0))?;
                wrap(TestFunction::gaussian(center, width))
            }
            other => Err(input(&format!("{path}.family"), format!("unknown family \"{other}\""))),
        };
    }
    if let Some(terms) = obj.get("sum") {
        let fs = children(terms, &format!("{path}.sum"))?;
        let coeffs = match obj.get("coeffs") {
            None => vec![Complex64::new(1.0, 0.0); fs.len()],
            Some(c) => {
                let arr = c
                    .as_array()
                    .ok_or_else(|| input(&format!("{path}.coeffs"), "expected an array"))?;
                if arr.len() != fs.len() {
                    return Err(input(path, "coeffs and sum have different lengths"));
                }
                arr.iter()
                    .enumerate()
                    .map(|(i, c)| parse_complex(c, &format!("{path}.coeffs[{i}]")))
                    .collect::<Result<_>>()?
            }
        };
        return wrap(TestFunction::sum(coeffs.into_iter().zip(fs).collect()));
    }
    if let Some(fs) = obj.get("product") {
        return wrap(TestFunction::product(children(fs, &format!("{path}.product"))?));
    }
    if let Some(inner) = obj.get("shift") {
        let g = parse(inner, &format!("{path}.shift"))?;
        return Ok(g.shift(number(obj, "by", path, None)?));
    }
    if let Some(inner) = obj.get("scale") {
        let g = parse(inner, &format!("{path}.scale"))?;
        return wrap(g.scale(number(obj, "lambda", path, None)?));
    }
    if let Some(inner) = obj.get("conj") {
        return Ok(parse(inner, &format!("{path}.conj"))?.conj());
    }
    if let Some(inner) = obj.get("derivative") {
        let g = parse(inner, &format!("{path}.derivative"))?;
        let order = obj
            .get("order")
            .and_then(Value::as_u64)
            .ok_or_else(|| input(path, "missing non-negative integer \"order\""))?;
        return Ok(g.derivative(order as usize));
    }
    Err(input(
        path,
        "expected a \"family\" leaf or one of sum/product/shift/scale/conj/derivative",
    ))
}

impl TestFunction {
    /// Parses the JSON description; errors name the offending field.
    pub fn from_json(v: &Value) -> Result<Self> {
        parse(v, "$")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)
            .map_err(|e| Error::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        Self::from_json(&v)
    }

    /// The JSON description this function parses back from.
    pub fn to_json(&self) -> Value {
        match &*self.node {
            Node::Bump {
                center,
                radius,
                amplitude,
            } => json!({"family": "bump", "d": radius, "center": center, "scale": amplitude}),
            Node::MollifiedPolynomial {
                center,
                radius,
                coeffs,
            } => json!({"family": "mollified_polynomial", "d": radius, "center": center, "coeffs": coeffs}),
            Node::Gaussian { center, width } => {
                json!({"family": "gaussian", "width": width, "center": center})
            }
            Node::Product(fs) => json!({"product": fs.iter().map(|g| g.to_json()).collect::<Vec<_>>()}),
            Node::Shift { inner, offset } => json!({"shift": inner.to_json(), "by": offset}),
            Node::Scale { inner, lambda } => json!({"scale": inner.to_json(), "lambda": lambda}),
            Node::Sum(ts) => json!({
                "sum": ts.iter().map(|(_, g)| g.to_json()).collect::<Vec<_>>(),
                "coeffs": ts.iter().map(|(c, _)| json!([c.re, c.im])).collect::<Vec<_>>(),
            }),
            Node::Conjugate(inner) => json!({"conj": inner.to_json()}),
            Node::Derivative { inner, order } => json!({"derivative": inner.to_json(), "order": order}),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_leaf() {
        let g = TestFunction::from_json_str(r#"{"family":"bump","d":1.0,"center":0.0,"scale":1.0}"#).unwrap();
        assert_eq!(g.support(), (-1.0, 1.0));
        assert_eq!(g.value(0.0).re, (-1f64).exp());
    }

    #[test]
    fn round_trip() {
        let src = r#"{"sum":[{"family":"bump","d":0.5,"center":0.1,"scale":2.0},
            {"product":[{"family":"mollified_polynomial","d":1.0,"center":0.0,"coeffs":[1.0,2.0]},
                        {"shift":{"scale":{"family":"bump"},"lambda":0.5},"by":0.2}]}],
            "coeffs":[1.0,[0.0,1.0]]}"#;
        let g = TestFunction::from_json_str(src).unwrap();
        let h = TestFunction::from_json(&g.to_json()).unwrap();
        assert_eq!(g.to_json(), h.to_json());
        for t in [-0.3, 0.0, 0.25, 0.5] {
            assert_eq!(g.value(t), h.value(t));
        }
        assert!(!g.is_real_valued());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = TestFunction::from_json_str(r#"{"sum":[{"family":"bump","d":"x"}]}"#).unwrap_err();
        assert!(e.to_string().contains("$.sum[0].d"), "{e}");
        let e = TestFunction::from_json_str(r#"{"family":"bump","d":-1}"#).unwrap_err();
        assert!(e.to_string().contains("radius"), "{e}");
        assert!(TestFunction::from_json_str("{").is_err());
        assert!(TestFunction::from_json_str(r#"{"family":"spline"}"#).is_err());
    }
}
