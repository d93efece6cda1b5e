use super::TestFunction;
use crate::error::{Error, Result};
use crate::numerics::Quadrature;

/// `‖g^{(n)}‖₁` by adaptive quadrature at relative tolerance 1e-10.
pub fn l1_norm(g: &TestFunction, n: usize) -> Result<f64> {
    let (lo, hi) = g.support();
    Ok(Quadrature::relative(1e-10, 1e-300)
        .integrate_real(|t| g.derivative_at(t, n).norm(), lo, hi)?
        .value)
}

fn check_support(g: &TestFunction, d: f64) -> Result<()> {
    if !(d > 0.0) {
        return Err(Error::precondition("d must be positive"));
    }
    if !g.supported_in(d) {
        let (lo, hi) = g.support();
        return Err(Error::precondition(format!(
            "support [{lo}, {hi}] exceeds (-{d}, {d})"
        )));
    }
    Ok(())
}

/// Scaled Sobolev norm `max_{n ≤ M} dⁿ ‖g^{(n)}‖₁`.
pub fn sobolev_norm(g: &TestFunction, d: f64, m: usize) -> Result<f64> {
    check_support(g, d)?;
    let mut best: f64 = 0.0;
    for n in 0..=m {
        best = best.max(d.powi(n as i32) * l1_norm(g, n)?);
    }
    Ok(best)
}

/// Returns `(Σ_{k≤M} ‖g^{(k)}‖₁, (M+1) max{1, d^{-M}} ‖g‖_{d,M})`; the first
/// never exceeds the second.
pub fn l1_sum_bound_check(g: &TestFunction, d: f64, m: usize) -> Result<(f64, f64)> {
    check_support(g, d)?;
    let mut lhs = 0.0;
    let mut sob: f64 = 0.0;
    for n in 0..=m {
        let l = l1_norm(g, n)?;
        lhs += l;
        sob = sob.max(d.powi(n as i32) * l);
    }
    let rhs = (m + 1) as f64 * 1f64.max(d.powi(-(m as i32))) * sob;
    Ok((lhs, rhs))
}
