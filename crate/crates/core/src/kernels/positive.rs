//! Positive-type certification (Bochner–Schwartz) of kernels.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{pair_function, Kernel, KernelKind, PairingOptions};
use crate::error::Result;
use crate::numerics::Quadrature;
use crate::testfn::{l1_norm, random, TestFunction};

/// Number of random test functions in the numeric screen.
pub const SCREEN_SIZE: usize = 50;
const SCREEN_SEED: u64 = 0x0b0c_4e12;
const SCREEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum PositiveType {
    CertifiedPositive,
    /// A test function with `Q(g) < 0` or `Q(g)` not real was found.
    CertifiedNot { witness: usize, value: Complex64, scale: f64 },
    Unknown,
}

/// `Q(g) = ∫∫ K(s') (ḡ◇g)(s, s') ds ds'` together with a magnitude scale
/// for tolerances.
pub fn quadratic_form_value(k: &Kernel, g: &TestFunction) -> Result<(Complex64, f64)> {
    let (lo, hi) = g.support();
    if let Some(m) = k.spectral_form() {
        // Q = (1/2π) ∫ K̃(p) |g̃(p)|² dp
        let sampled = g.sample(2049)?;
        let u = |p: f64| Complex64::new(sampled.fourier_at(p).norm_sqr(), 0.0);
        let quad = Quadrature::relative(1e-11, 1e-300);
        let panel = 2.0 * std::f64::consts::PI / (hi - lo);
        let limit = sampled.resolvable_frequency();
        // |g̃|² inherits the transform's noise scaled by |g̃| ≤ ‖g‖₁
        let l1 = sampled.samples().iter().map(|v| v.norm()).sum::<f64>() * sampled.grid_step();
        let floor = 2.0 * l1 * sampled.fourier_noise();
        let value = m.pair_above_floor(u, floor, panel, limit, &quad)?.value;
        let mut abs = m.clone();
        abs.amplitude = Complex64::new(m.amplitude.norm(), 0.0);
        let scale = abs.pair_above_floor(u, floor, panel, limit, &quad)?.value.re.abs();
        return Ok((value, scale));
    }
    // A(s') = ∫ ḡ(v + s') g(v) dv, supported in |s'| < hi - lo
    let width = hi - lo;
    let inner = Quadrature::relative(1e-12, 1e-300);
    let autocorrelation = |sp: f64| {
        let a = lo.max(lo - sp);
        let b = hi.min(hi - sp);
        if a >= b {
            return Complex64::new(0.0, 0.0);
        }
        inner
            .integrate(|v| g.value(v + sp).conj() * g.value(v), a, b)
            .map(|r| r.value)
            .unwrap_or(Complex64::new(f64::NAN, 0.0))
    };
    let opts = PairingOptions {
        quad: Quadrature::relative(1e-10, 1e-300),
        ..Default::default()
    };
    let value = pair_function(k, autocorrelation, -width, width, &opts)?.value;
    let l1 = l1_norm(g, 0)?;
    let kmax = match k.kind() {
        KernelKind::Smooth { f, .. } => (0..=400)
            .map(|j| f(-width + 2.0 * width * j as f64 / 400.0).abs())
            .fold(0.0, f64::max),
        KernelKind::Homogeneous { beta, amplitude } => amplitude.norm() * width.powf(*beta),
        _ => value.norm() / (l1 * l1).max(f64::MIN_POSITIVE),
    };
    Ok((value, (l1 * l1 * kmax).max(value.norm())))
}

/// Certifies positive type from the spectral data when possible, otherwise
/// screens `Q(g)` over random complex test functions.
pub fn is_positive_type(k: &Kernel) -> PositiveType {
    if k.is_zero() {
        return PositiveType::CertifiedPositive;
    }
    if let KernelKind::Homogeneous { beta, amplitude } = k.kind() {
        if *beta < 0.0 && amplitude.im == 0.0 && amplitude.re > 0.0 {
            return PositiveType::CertifiedPositive;
        }
    }
    if k.spectral_form().is_some_and(|m| m.is_manifestly_positive()) {
        return PositiveType::CertifiedPositive;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SCREEN_SEED);
    let family: Vec<TestFunction> = (0..SCREEN_SIZE).map(|_| random::complex_bumps(&mut rng, 1.0)).collect();
    let results: Vec<Option<(Complex64, f64)>> = family
        .par_iter()
        .map(|g| quadratic_form_value(k, g).ok())
        .collect();
    for (i, r) in results.into_iter().enumerate() {
        if let Some((q, scale)) = r {
            if q.re < -SCREEN_TOL * scale || q.im.abs() > SCREEN_TOL * scale {
                return PositiveType::CertifiedNot {
                    witness: i,
                    value: q,
                    scale,
                };
            }
        }
    }
    PositiveType::Unknown
}
