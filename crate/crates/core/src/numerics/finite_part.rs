//! Hadamard finite-part integrals `FP ∫₀^R s^β u(s) ds`.
//!
//! The integral is split at a small `δ`. On `[0, δ]` the integrand is replaced
//! by its Taylor series at 0 and integrated term by term, which is the
//! finite-part prescription for the divergent powers. On `[δ, R]` ordinary
//! adaptive quadrature applies.

use num_complex::Complex64;

use super::quadrature::{Integral, Quadrature};
use crate::error::{Error, Result};

/// Fraction of the interval handled by the Taylor expansion.
pub const DEFAULT_SPLIT: f64 = 0.02;

/// `FP ∫₀^R s^β u(s) ds`, where `taylor[k] = u^{(k)}(0)/k!`.
///
/// The Taylor terms beyond `taylor.len()` are dropped on `[0, δ]`; their
/// size is bounded by the first omitted term, which is folded into the
/// error estimate using the last supplied coefficient. Terms with
/// `β + k + 1 = 0` and a nonzero coefficient produce a logarithm and are
/// rejected.
pub fn finite_part_integral<F>(
    u: F,
    taylor: &[Complex64],
    beta: f64,
    radius: f64,
    split: f64,
    quad: &Quadrature,
) -> Result<Integral<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    if !(radius > 0.0) {
        return Err(Error::precondition("finite-part radius must be positive"));
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::precondition("split fraction must lie in (0, 1)"));
    }
    let needed = (-beta - 1.0).ceil().max(0.0) as usize;
    if taylor.len() <= needed {
        return Err(Error::precondition(format!(
            "finite part at beta={beta} needs Taylor coefficients through order {needed}"
        )));
    }
    let delta = split * radius;
    let mut near = Complex64::new(0.0, 0.0);
    for (k, c) in taylor.iter().enumerate() {
        let e = beta + k as f64 + 1.0;
        if e.abs() < 1e-12 {
            if c.norm() > 1e-14 * taylor[0].norm().max(f64::MIN_POSITIVE) {
                return Err(Error::Unsupported(format!(
                    "logarithmic term at order {k} for beta={beta}"
                )));
            }
            continue;
        }
        near += c * delta.powf(e) / e;
    }
    let k_last = taylor.len();
    let e_last = beta + k_last as f64 + 1.0;
    let trunc = taylor[k_last - 1].norm() * delta.powf(e_last) / e_last.abs().max(1.0);

    let far = quad.integrate(|s| u(s) * s.powf(beta), delta, radius)?;
    Ok(Integral {
        value: near + far.value,
        error: far.error + trunc,
        evaluations: far.evaluations,
    })
}
