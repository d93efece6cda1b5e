//! Truncated formal power series in a coupling constant `g`, with exact
//! rational coefficients.
//!
//! A series `P = Σ c_k g^k` is positive when it can be written as `Q* Q` for
//! another real series `Q`. That happens exactly when the lowest nonzero
//! coefficient sits at an even power `g^{2n}` and is positive; the root is
//! then `Q = √d₀ gⁿ √(1 + x)` with `x = P/(d₀ g^{2n}) − 1`.
//!
//! Square roots of rationals are generally irrational, so every series carries
//! a positive rational radicand `r` and stands for `√r · Σ c_k g^k`. Products
//! multiply radicands and fold perfect squares back into the coefficients,
//! which keeps `Q·Q = P` an exact identity.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Absolute threshold below which a floating coefficient counts as zero.
pub const FLOAT_ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalPowerSeries {
    /// `c_0..=c_N`; the truncation order is `len - 1`.
    coeffs: Vec<BigRational>,
    radicand: BigRational,
}

/// Result of [`fps_is_positive`]: the index `n` with `c_{2n}` the lowest
/// nonzero coefficient, and that coefficient `d₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Positivity {
    pub positive: bool,
    pub n: usize,
    pub d0: f64,
}

impl FormalPowerSeries {
    /// Series with the given coefficients, truncated at order
    /// `coeffs.len() - 1`. An empty slice gives the zero series of order 0.
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![BigRational::zero()]
        } else {
            coeffs
        };
        FormalPowerSeries {
            coeffs,
            radicand: BigRational::one(),
        }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    /// Converts floating coefficients exactly, after flushing those below
    /// [`FLOAT_ZERO_THRESHOLD`] to zero so that rounding residue cannot
    /// decide positivity.
    pub fn from_f64(coeffs: &[f64]) -> Result<Self> {
        let mut out = Vec::with_capacity(coeffs.len());
        for (k, &c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Input(format!("coefficient c_{k} = {c} is not finite")));
            }
            if c.abs() < FLOAT_ZERO_THRESHOLD {
                out.push(BigRational::zero());
            } else {
                out.push(BigRational::from_float(c).expect("finite float"));
            }
        }
        Ok(Self::new(out))
    }

    /// Parses a JSON array whose entries are numbers or exact rationals
    /// written as strings (`"3/4"`, `"-2"`).
    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Input("series must be a JSON array of coefficients".into()))?;
        let mut out = Vec::with_capacity(arr.len());
        for (k, c) in arr.iter().enumerate() {
            let r = match c {
                Value::String(s) => parse_rational(s)
                    .ok_or_else(|| Error::Input(format!("$[{k}]: \"{s}\" is not a rational number")))?,
                Value::Number(n) => {
                    if let Some(i) = n.as_i64() {
                        BigRational::from_integer(i.into())
                    } else {
                        let f = n.as_f64().ok_or_else(|| Error::Input(format!("$[{k}]: bad number")))?;
                        if f.abs() < FLOAT_ZERO_THRESHOLD {
                            BigRational::zero()
                        } else {
                            BigRational::from_float(f)
                                .ok_or_else(|| Error::Input(format!("$[{k}]: {f} is not finite")))?
                        }
                    }
                }
                _ => return Err(Error::Input(format!("$[{k}]: expected a number or a rational string"))),
            };
            out.push(r);
        }
        if out.is_empty() {
            return Err(Error::Input("series needs at least one coefficient".into()));
        }
        Ok(Self::new(out))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Rational part of the coefficients; the series is `√radicand` times
    /// these.
    pub fn rational_coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    /// `c_k` as a float (including the radicand).
    pub fn coefficient(&self, k: usize) -> f64 {
        match self.coeffs.get(k) {
            Some(c) => to_f64(c) * to_f64(&self.radicand).sqrt(),
            None => 0.0,
        }
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        (0..self.coeffs.len()).map(|k| self.coefficient(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn lowest_nonzero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Same series at a lower truncation order.
    pub fn truncate(&self, order: usize) -> Self {
        let mut s = self.clone();
        s.coeffs.truncate(order + 1);
        s
    }

    fn normalized(mut self) -> Self {
        if self.is_zero() {
            self.radicand = BigRational::one();
            return self;
        }
        if let Some(root) = rational_sqrt(&self.radicand) {
            for c in &mut self.coeffs {
                *c = &*c * &root;
            }
            self.radicand = BigRational::one();
        }
        self
    }

    /// Renders the exact series, e.g. `1 - 1/2 g^2 + 1/24 g^4`.
    pub fn to_exact_string(&self) -> String {
        self.to_string()
    }

    /// JSON array of exact coefficients as strings; a nontrivial radicand is
    /// reported alongside.
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self.coeffs.iter().map(|c| Value::String(c.to_string())).collect();
        if self.radicand.is_one() {
            Value::Array(coeffs)
        } else {
            serde_json::json!({"sqrt": self.radicand.to_string(), "coeffs": coeffs})
        }
    }
}

impl fmt::Display for FormalPowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            let body = match (k, mag.is_one()) {
                (0, _) => mag.to_string(),
                (1, true) => "g".to_string(),
                (1, false) => format!("{mag} g"),
                (_, true) => format!("g^{k}"),
                (_, false) => format!("{mag} g^{k}"),
            };
            terms.push((sign, body));
        }
        let mut s = String::new();
        for (i, (sign, body)) in terms.iter().enumerate() {
            match (i, *sign) {
                (0, "-") => s.push('-'),
                (0, _) => {}
                (_, sg) => {
                    s.push(' ');
                    s.push_str(sg);
                    s.push(' ');
                }
            }
            s.push_str(body);
        }
        if s.is_empty() {
            s.push('0');
        }
        if self.radicand.is_one() {
            write!(f, "{s}")
        } else {
            write!(f, "sqrt({}) * ({s})", self.radicand)
        }
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

fn bigint_sqrt_exact(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// `√r` when `r` is the square of a rational.
fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    Some(BigRational::new(
        bigint_sqrt_exact(r.numer())?,
        bigint_sqrt_exact(r.denom())?,
    ))
}

/// Positivity in the sense `P = Q* Q`.
pub fn fps_is_positive(p: &FormalPowerSeries) -> Positivity {
    match p.lowest_nonzero() {
        None => Positivity {
            positive: true,
            n: 0,
            d0: 0.0,
        },
        Some(k) => Positivity {
            positive: k % 2 == 0 && p.coeffs[k].is_positive(),
            n: k / 2,
            d0: p.coefficient(k),
        },
    }
}

/// Cauchy product truncated at the smaller of the two orders.
pub fn fps_mul(p: &FormalPowerSeries, q: &FormalPowerSeries) -> FormalPowerSeries {
    let order = p.order().min(q.order());
    let mut out = vec![BigRational::zero(); order + 1];
    for (i, a) in p.coeffs.iter().enumerate().take(order + 1) {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.coeffs.iter().enumerate().take(order + 1 - i) {
            out[i + j] += a * b;
        }
    }
    FormalPowerSeries {
        coeffs: out,
        radicand: &p.radicand * &q.radicand,
    }
    .normalized()
}

/// Complex conjugation of the coefficients; the identity on real series.
pub fn fps_conj(p: &FormalPowerSeries) -> FormalPowerSeries {
    p.clone()
}

/// The root `Q` of a positive series, with positive leading coefficient and
/// `Q·Q = P` exactly through the truncation order of `P`.
pub fn fps_sqrt(p: &FormalPowerSeries) -> Result<FormalPowerSeries> {
    let order = p.order();
    let Some(low) = p.lowest_nonzero() else {
        return Ok(FormalPowerSeries::new(vec![BigRational::zero(); order + 1]));
    };
    let c = &p.coeffs[low];
    if low % 2 == 1 {
        return Err(Error::precondition(format!(
            "lowest nonzero coefficient c_{low} = {} sits at an odd power of g",
            p.coefficient(low)
        )));
    }
    if !c.is_positive() {
        return Err(Error::precondition(format!(
            "lowest nonzero coefficient c_{low} = {} is negative",
            p.coefficient(low)
        )));
    }
    if !p.radicand.is_one() {
        return Err(Error::Unsupported(format!(
            "square root of a series carrying the irrational factor sqrt({})",
            p.radicand
        )));
    }
    let n = low / 2;
    // x = P / (d₀ g^{2n}) - 1, known through order N - 2n
    let m = order - low;
    let mut x: Vec<BigRational> = (0..=m).map(|k| &p.coeffs[low + k] / c).collect();
    x[0] = BigRational::zero();
    // √(1+x) = Σ_j C(1/2, j) x^j; x has no constant term, so j ≤ N - 2n
    // suffices. The root needs `S` only through order N - n - n = m as well.
    let mut s = vec![BigRational::zero(); m + 1];
    s[0] = BigRational::one();
    let mut power = vec![BigRational::zero(); m + 1];
    power[0] = BigRational::one();
    let mut binom = BigRational::one();
    let half = BigRational::new(1.into(), 2.into());
    for j in 1..=m {
        power = truncated_mul(&power, &x, m);
        binom = binom * (&half - BigRational::from_integer((j as i64 - 1).into()))
            / BigRational::from_integer((j as i64).into());
        for (sk, pk) in s.iter_mut().zip(&power) {
            if !pk.is_zero() {
                *sk += &binom * pk;
            }
        }
    }
    // Q = √d₀ gⁿ S
    let mut coeffs = vec![BigRational::zero(); order + 1];
    for (k, sk) in s.into_iter().enumerate() {
        if n + k <= order {
            coeffs[n + k] = sk;
        }
    }
    Ok(FormalPowerSeries {
        coeffs,
        radicand: c.clone(),
    }
    .normalized())
}

fn truncated_mul(a: &[BigRational], b: &[BigRational], order: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cosine(order: usize) -> FormalPowerSeries {
        let mut c = Vec::new();
        let mut fact = BigInt::one();
        for k in 0..=order {
            if k > 0 {
                fact *= BigInt::from(k);
            }
            c.push(match k % 4 {
                0 => BigRational::new(BigInt::one(), fact.clone()),
                2 => -BigRational::new(BigInt::one(), fact.clone()),
                _ => BigRational::zero(),
            });
        }
        FormalPowerSeries::new(c)
    }

    #[test]
    fn positivity_criterion() {
        let p = fps_is_positive(&cosine(4));
        assert!(p.positive);
        assert_eq!((p.n, p.d0), (0, 1.0));
        let p = fps_is_positive(&FormalPowerSeries::from_integers(&[0, 0, 2, 1]));
        assert!(p.positive);
        assert_eq!((p.n, p.d0), (1, 2.0));
        assert!(!fps_is_positive(&FormalPowerSeries::from_integers(&[-1, 1])).positive);
        assert!(!fps_is_positive(&FormalPowerSeries::from_integers(&[0, 3, 1])).positive);
        let zero = fps_is_positive(&FormalPowerSeries::from_integers(&[0, 0, 0]));
        assert!(zero.positive);
        assert_eq!(zero.n, 0);
    }

    #[test]
    fn perfect_square_root() {
        let r = fps_sqrt(&FormalPowerSeries::from_integers(&[1, 2, 1])).unwrap();
        assert_eq!(r, FormalPowerSeries::from_integers(&[1, 1, 0]));
    }

    #[test]
    fn binomial_coefficients() {
        let r = fps_sqrt(&FormalPowerSeries::from_integers(&[1, 1, 0, 0, 0])).unwrap();
        let expect = [q(1, 1), q(1, 2), q(-1, 8), q(1, 16), q(-5, 128)];
        assert_eq!(r.rational_coeffs(), &expect);
    }

    #[test]
    fn cosine_root_multiplies_back() {
        let p = cosine(8);
        let r = fps_sqrt(&p).unwrap();
        assert_eq!(fps_mul(&r, &r), p);
        assert!(r.rational_coeffs()[0].is_positive());
    }

    #[test]
    fn irrational_leading_coefficient() {
        // 2 + g: root √2 (1 + g/4 - g²/32 ...)
        let p = FormalPowerSeries::from_integers(&[2, 1, 0, 0]);
        let r = fps_sqrt(&p).unwrap();
        assert_eq!(r.radicand(), &q(2, 1));
        assert_eq!(fps_mul(&r, &r), p);
        assert!((r.coefficient(1) - 2f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_root() {
        let p = FormalPowerSeries::from_integers(&[0, 0, 0, 0, 9, 6, 1]);
        let r = fps_sqrt(&p).unwrap();
        assert_eq!(fps_mul(&r, &r), p);
        assert_eq!(&r.rational_coeffs()[..4], &[q(0, 1), q(0, 1), q(3, 1), q(1, 1)]);
    }

    #[test]
    fn precondition_names_coefficient() {
        let e = fps_sqrt(&FormalPowerSeries::from_integers(&[0, -3, 1])).unwrap_err();
        assert!(e.to_string().contains("c_1"), "{e}");
        let e = fps_sqrt(&FormalPowerSeries::from_integers(&[-1, 1])).unwrap_err();
        assert!(e.to_string().contains("c_0"), "{e}");
    }

    #[test]
    fn float_threshold() {
        let p = FormalPowerSeries::from_f64(&[1e-14, -1e-13, 0.5]).unwrap();
        let w = fps_is_positive(&p);
        assert!(w.positive);
        assert_eq!((w.n, w.d0), (1, 0.5));
    }

    #[test]
    fn json_round_trip() {
        let v: Value = serde_json::json!(["1/2", 3, -0.25, "0"]);
        let p = FormalPowerSeries::from_json(&v).unwrap();
        assert_eq!(p.rational_coeffs(), &[q(1, 2), q(3, 1), q(-1, 4), q(0, 1)]);
        assert_eq!(FormalPowerSeries::from_json(&p.to_json()).unwrap(), p);
        assert_eq!(p.to_string(), "1/2 + 3 g - 1/4 g^2");
        assert!(FormalPowerSeries::from_json(&serde_json::json!(["1/0"])).is_err());
    }

    #[test]
    fn mul_and_conj() {
        let a = FormalPowerSeries::from_integers(&[1, 1, 0]);
        let b = FormalPowerSeries::from_integers(&[1, -1, 0]);
        assert_eq!(fps_mul(&a, &b), FormalPowerSeries::from_integers(&[1, 0, -1]));
        let one = FormalPowerSeries::from_integers(&[1, 0, 0]);
        assert_eq!(fps_mul(&a, &one), a);
        assert_eq!(fps_conj(&a), a);
        // truncation at the smaller order
        let short = FormalPowerSeries::from_integers(&[1, 1]);
        assert_eq!(fps_mul(&a, &short).order(), 1);
    }
}
