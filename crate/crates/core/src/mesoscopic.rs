//! Riemann sums of short-distance bounds over a fixed smearing function.
//!
//! With `χ_λ(s) = λ^{-1} χ(s/λ)` and a sampling function
//! `φ_λ(s) = ∫ ds' C(s' - i0) (χ_λ◇χ_λ)(s, s')`, the averaged sampling function
//! is `F_λ(s) = Σ_k λ f(λk) φ_λ(s - λk)`. As `λ → 0`, `F_λ/η(λ)` tends to `f`
//! in the sense of pairings with smooth probes, where
//! `η(λ) = ∫ ds' C(s' - i0) (χ_λ * χ̂_λ)(s')`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelKind};
use crate::numerics::{Quadrature, SampledFunction};
use crate::sampling::{integrated_sampling_complex, sampling_single, SamplingFunction, SamplingOptions};
use crate::testfn::TestFunction;

/// Grid points of `φ_λ` per `λ`; the grid of `F_λ` has the same step so that
/// every shift `s - λk` lands on a sample.
const STEPS_PER_LAMBDA: usize = 100;

#[derive(Debug, Clone)]
pub struct MesoscopicConfig {
    /// Nonnegative, supported in `(-1, 1)`.
    pub chi: TestFunction,
    /// Nonnegative, supported in `(-d, d)`.
    pub f: TestFunction,
    pub d: f64,
    /// Strictly decreasing, positive, at most `d`.
    pub lambdas: Vec<f64>,
    /// The OPE coefficient `C`.
    pub kernel: Kernel,
}

fn nonnegative_on_grid(g: &TestFunction) -> bool {
    let (lo, hi) = g.support();
    let scale = g.sup_norm();
    (0..=2000).all(|j| {
        let v = g.value(lo + (hi - lo) * j as f64 / 2000.0);
        v.re >= -1e-14 * scale && v.im.abs() <= 1e-14 * scale
    })
}

impl MesoscopicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::precondition(format!("d must be positive, got {}", self.d)));
        }
        if !self.chi.supported_in(1.0) || !self.chi.is_compactly_supported() {
            return Err(Error::precondition("χ must be supported in (-1, 1)"));
        }
        if !self.f.supported_in(self.d) || !self.f.is_compactly_supported() {
            return Err(Error::precondition(format!("f must be supported in (-{0}, {0})", self.d)));
        }
        if !nonnegative_on_grid(&self.chi) {
            return Err(Error::precondition("χ must be nonnegative"));
        }
        if !nonnegative_on_grid(&self.f) {
            return Err(Error::precondition("f must be nonnegative"));
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0 && l <= self.d)) {
            return Err(Error::precondition(format!("every λ must lie in (0, {}]", self.d)));
        }
        if self.lambdas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::precondition("the λ grid must be strictly decreasing"));
        }
        Ok(())
    }
}

/// `χ_λ`, declared on `(-λ, λ)` whatever the support of `χ` inside `(-1, 1)`.
fn chi_lambda(chi: &TestFunction, lambda: f64) -> Result<TestFunction> {
    chi.with_support(-1.0, 1.0)?.scale(lambda)
}

/// `φ_λ` on `2·STEPS_PER_LAMBDA + 1` points spanning `[-λ, λ]`.
fn local_sampling(cfg: &MesoscopicConfig, lambda: f64) -> Result<SamplingFunction> {
    let opts = SamplingOptions {
        s_points: 2 * STEPS_PER_LAMBDA + 1,
        ..Default::default()
    };
    sampling_single(&cfg.kernel, &chi_lambda(&cfg.chi, lambda)?, &opts)
}

/// The averaged sampling function `F_λ` on the grid `s_j = j λ / 100`,
/// covering the support of `f` widened by `λ`.
pub fn riemann_sampling(cfg: &MesoscopicConfig, lambda: f64) -> Result<SamplingFunction> {
    if !(lambda > 0.0 && lambda <= cfg.d) {
        return Err(Error::precondition(format!("λ must lie in (0, {}], got {lambda}", cfg.d)));
    }
    let phi = local_sampling(cfg, lambda)?;
    let m = STEPS_PER_LAMBDA as i64;
    let step = lambda / STEPS_PER_LAMBDA as f64;
    let (flo, fhi) = cfg.f.support();
    let reach = flo.abs().max(fhi.abs()) + lambda;
    let half = (reach / step).ceil() as i64;
    let phi_values = phi.f();
    // weights λ f(λk) for every k whose shifted φ_λ can reach the grid
    let kmax = half / m + 2;
    let weights: Vec<f64> = (-kmax..=kmax).map(|k| lambda * cfg.f.value(lambda * k as f64).re).collect();
    let values: Vec<Complex64> = (-half..=half)
        .map(|j| {
            // φ index j - k m + m must lie in [0, 2m]: at most three k, and
            // the outer ones sit on the endpoints of φ_λ
            let k_lo = (j - m).div_euclid(m) + i64::from((j - m).rem_euclid(m) != 0);
            let k_hi = (j + m).div_euclid(m);
            (k_lo..=k_hi)
                .map(|k| phi_values[(j - k * m + m) as usize] * weights[(k + kmax) as usize])
                .sum()
        })
        .collect();
    let peak = weights.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    Ok(SamplingFunction {
        values: SampledFunction::new(values, -(half as f64) * step, step, half as f64 * step)?,
        beta: phi.beta,
        method: phi.method,
        error_estimate: 2.0 * peak * phi.error_estimate,
        warnings: phi.warnings,
    })
}

/// `η(λ) = (1/2π) ∫ C̃(p) |χ̃(λp)|² dp`. Kernels without a spectral form
/// fall back to `∫ φ_λ(s) ds`, the same quantity computed in time.
pub fn eta(cfg: &MesoscopicConfig, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::precondition(format!("λ must be positive, got {lambda}")));
    }
    let chi = chi_lambda(&cfg.chi, lambda)?;
    if cfg.kernel.spectral_form().is_some() {
        return Ok(integrated_sampling_complex(&cfg.kernel, &chi)?.value);
    }
    Ok(local_sampling(cfg, lambda)?.integral())
}

/// Order of the germ of `C` at `s' = 0`, when it can be read off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GermOrder {
    Known(u32),
    Unknown,
}

/// Smooth kernels have order 0; a homogeneous kernel of degree `β < 0` has
/// order `⌈-1-β⌉`.
pub fn germ_order_estimate(c: &Kernel) -> GermOrder {
    if c.is_smooth() {
        return GermOrder::Known(0);
    }
    match (c.kind(), c.homogeneous_degree()) {
        (KernelKind::Homogeneous { .. }, Some(beta)) | (KernelKind::SpectralForm { .. }, Some(beta)) => {
            GermOrder::Known((-1.0 - beta).ceil().max(0.0) as u32)
        }
        _ => GermOrder::Unknown,
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub lambda: f64,
    pub eta_re: f64,
    pub eta_im: f64,
    /// `⟨F_λ, u⟩`
    pub raw_pairing: f64,
    /// `⟨F_λ/η(λ), u⟩`
    pub pairing: f64,
    /// `|⟨F_λ/η(λ), u⟩ - ⟨f, u⟩|`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub target: f64,
    pub rows: Vec<ConvergenceRow>,
    pub germ_order: GermOrder,
    /// Whether `λ^{-q}/η(λ)` decreases towards zero along the grid; smooth
    /// kernels converge without it.
    pub hypothesis: bool,
    /// Fitted exponent of the residuals in `λ`; `None` when the residuals
    /// vanish (or there are too few of them).
    pub slope: Option<f64>,
    pub expected_slope: f64,
    pub passed: bool,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let rows = self.rows.iter().map(|r| {
            vec![r.lambda, r.eta_re, r.eta_im, r.raw_pairing, r.pairing, r.residual]
        });
        crate::report::csv(&["lambda", "eta_re", "eta_im", "raw_pairing", "pairing", "residual"], rows)
    }
}

/// Residuals below this fraction of the probe scale are rounding noise.
const RESIDUAL_FLOOR: f64 = 1e-11;

/// Pairs `F_λ/η(λ)` with the probe `u` along the λ grid and fits the decay of
/// the residual against `⟨f, u⟩`. The expected exponent is 1 for smooth
/// kernels and `min(1, -β-q) ` for homogeneous ones; the check passes when the
/// fit reaches it within 0.2. When the hypothesis `λ^{-q}/η → 0` fails the
/// table is still produced but never passes.
pub fn convergence_check<U>(cfg: &MesoscopicConfig, u: U) -> Result<ConvergenceTable>
where
    U: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    if cfg.lambdas.len() < 4 {
        return Err(Error::precondition("the λ grid needs at least 4 entries"));
    }
    let (flo, fhi) = cfg.f.support();
    let target = Quadrature::relative(1e-12, 1e-300)
        .integrate_real(|t| cfg.f.value(t).re * u(t), flo, fhi)?
        .value;
    let rows = cfg
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let e = eta(cfg, lambda)?;
            let big_f = riemann_sampling(cfg, lambda)?;
            let raw = big_f.pair_with(|s| Complex64::new(u(s), 0.0));
            let pairing = (raw / e).re;
            Ok(ConvergenceRow {
                lambda,
                eta_re: e.re,
                eta_im: e.im,
                raw_pairing: raw.re,
                pairing,
                residual: (pairing - target).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let germ_order = germ_order_estimate(&cfg.kernel);
    let smooth = cfg.kernel.is_smooth();
    let hypothesis = smooth
        || match germ_order {
            GermOrder::Known(q) => {
                let ratio: Vec<f64> = rows
                    .iter()
                    .map(|r| r.lambda.powi(-(q as i32)) / Complex64::new(r.eta_re, r.eta_im).norm())
                    .collect();
                ratio.windows(2).all(|w| w[1] < w[0])
            }
            GermOrder::Unknown => false,
        };
    let expected_slope = match (smooth, germ_order, cfg.kernel.homogeneous_degree()) {
        (true, _, _) => 1.0,
        (false, GermOrder::Known(q), Some(beta)) => (-beta - q as f64).min(1.0),
        _ => 1.0,
    };
    let probe_scale = rows.iter().map(|r| r.pairing.abs()).fold(target.abs(), f64::max);
    let resolved: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.residual > RESIDUAL_FLOOR * probe_scale.max(f64::MIN_POSITIVE))
        .map(|r| (r.lambda, r.residual))
        .collect();
    let slope = if resolved.len() >= 2 { log_log_slope(&resolved) } else { None };
    let passed = hypothesis && slope.map_or(true, |s| s >= expected_slope - 0.2);
    Ok(ConvergenceTable {
        target,
        rows,
        germ_order,
        hypothesis,
        slope,
        expected_slope,
        passed,
    })
}

/// The fixed probe set: a plateau equal to 1 on the support of `f`, `t`
/// times a bump, and the second derivative of a bump.
pub fn standard_probes(d: f64) -> Vec<(&'static str, Box<dyn Fn(f64) -> f64 + Send + Sync>)> {
    let bump = TestFunction::bump(0.0, d, 1.0).expect("valid bump");
    let tilted = TestFunction::mollified_polynomial(0.0, d, vec![0.0, d]).expect("valid polynomial");
    let curved = bump.derivative(2);
    vec![
        (
            "plateau",
            Box::new(move |t: f64| 0.5 * (1.0 + ((d + 0.5 - t.abs()) / 0.1).tanh())),
        ),
        ("t_bump", Box::new(move |t: f64| tilted.value(t).re)),
        ("bump_second_derivative", Box::new(move |t: f64| curved.value(t).re)),
    ]
}
