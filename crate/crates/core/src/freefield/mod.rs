//! The free scalar field of mass `m` in 3+1 dimensions, seen along one time
//! axis through its frequency density `ρ_m(ω) = √(ω²-m²)/(4π²)`.
//!
//! Bounds are computed on the Fourier side from `|g̃|²`; states are the
//! vacuum mixed with a two-particle vector, whose Wick-square expectation
//! reduces to two time integrals of the one-particle profile.

mod fock;
mod verify;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::free_field_cumulative;
use crate::numerics::Quadrature;
use crate::testfn::TestFunction;

pub use fock::{
    matrix_elements, mode_transform, optimal_mixing, remainder_term, wick_square_expectation, FockStateTwo,
    MatrixElements, Mixing, ModeFunction, TimeProfile,
};
pub use verify::{verify_qei, MassScan, QIReport, ScanEntry, VerifyConfig};

const FIRST_GRID: usize = 4097;
const LAST_GRID: usize = 65537;

/// `∫_start^∞ w(u) |g̃(u)|² du` for real `g`.
///
/// The transform is evaluated from samples of `g`; values at the rounding
/// level of that transform are treated as zero. When the integrand is still
/// significant at the highest frequency the grid resolves, the grid is
/// refined, up to [`LAST_GRID`] samples.
fn spectral_energy<W>(g: &TestFunction, weight: W, start: f64, breaks: &[f64]) -> Result<f64>
where
    W: Fn(f64) -> f64,
{
    if !g.is_real_valued() {
        return Err(Error::precondition("the free-field bounds need a real-valued g"));
    }
    if !(start >= 0.0 && start.is_finite()) {
        return Err(Error::precondition(format!("mass must be finite and nonnegative, got {start}")));
    }
    let (lo, hi) = g.support();
    let panel = 2.0 * PI / (hi - lo);
    let quad = Quadrature::relative(1e-10, 0.0);
    let mut n = FIRST_GRID;
    loop {
        let sampled = g.sample(n)?;
        let cut = 8.0 * sampled.fourier_noise();
        let limit = sampled.resolvable_frequency();
        let integrand = |u: f64| {
            let v = sampled.fourier_at(u).norm();
            let v = if v <= cut { 0.0 } else { v };
            num_complex::Complex64::new(weight(u) * v * v, 0.0)
        };
        match quad.integrate_tail(integrand, start, panel, limit, breaks) {
            Ok(r) => return Ok(r.value.re),
            Err(Error::SpectralTail(_)) if n < LAST_GRID => n = 2 * n - 1,
            Err(Error::SpectralTail(_)) => {
                return Err(Error::SpectralTail(format!(
                    "more than 1e-8 of the integral lies beyond u = {limit:.4e} with {n} samples of g; \
                     sample g more finely (its derivatives are too large for the grid)"
                )))
            }
            Err(e) => return Err(e),
        }
    }
}

/// The massive-field energy-density bound `(1/16π³) ∫_m^∞ u⁴ |g̃(u)|² du`.
pub fn qei_bound(g: &TestFunction, mass: f64) -> Result<f64> {
    Ok(spectral_energy(g, |u| u.powi(4), mass, &[])? / (16.0 * PI.powi(3)))
}

/// `(1/16π³) ∫₀^∞ u⁴ N(u) |g̃(u)|² du` with `N(u)` the number of species of
/// mass at most `u`.
pub fn multi_species_bound(g: &TestFunction, masses: &[f64]) -> Result<f64> {
    if let Some(m) = masses.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
        return Err(Error::precondition(format!("mass must be finite and nonnegative, got {m}")));
    }
    if masses.is_empty() {
        return Ok(0.0);
    }
    let start = masses.iter().copied().fold(f64::INFINITY, f64::min);
    let count = |u: f64| masses.iter().filter(|&&m| m <= u).count() as f64;
    let v = spectral_energy(g, |u| u.powi(4) * count(u), start, masses)?;
    Ok(v / (16.0 * PI.powi(3)))
}

/// The Wick-square bound `c_g = (1/π) ∫_m^∞ |g̃(p)|² ∫_m^p ρ_m(ω) dω dp`, so
/// that `:φ²:(g²) ≥ -c_g` in every state.
pub fn wick_square_bound(g: &TestFunction, mass: f64) -> Result<f64> {
    Ok(spectral_energy(g, |p| free_field_cumulative(mass, p), mass, &[])? / PI)
}
