//! Sampling functions `f(s) = ∫ ds' K(s' - i0) (ḡ◇g)(s, s')`.
//!
//! Every path evaluates `f` row by row on a uniform grid in `s`. For a fixed
//! `s` the row `A_s(s') = ḡ(s + s'/2) g(s - s'/2)` is compactly supported, so
//! `f(s)` is a single boundary-value pairing. The spectral path pairs the
//! kernel's Fourier measure with the trapezoidal transform of `A_s`, which is
//! the Wigner function `W_g(s, -p)`; the homogeneous closed forms work
//! directly in `s'`.

mod quadratic;
mod wigner;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{homogeneous_kernel, pair_function, product_measure, Kernel, KernelKind, PairingMethod, PairingOptions};
use crate::numerics::{finite_part_integral, Integral, Quadrature, SampledFunction, DEFAULT_SPLIT};
use crate::report;
use crate::testfn::{diamond, DiamondProduct, TestFunction, M_MAX};
use crate::SpectralMeasure;

pub use quadratic::{quadratic_form, FormValue, TwoPointData};
pub use wigner::{wigner, WignerFunction, WignerGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    DirectIntegral,
    FinitePart,
    DeltaDerivative,
    SpectralWigner,
}

impl SamplingMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplingMethod::DirectIntegral => "direct_integral",
            SamplingMethod::FinitePart => "finite_part",
            SamplingMethod::DeltaDerivative => "delta_derivative",
            SamplingMethod::SpectralWigner => "spectral_wigner",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SamplingOptions {
    /// Grid points in `s`, endpoints included.
    pub s_points: usize,
    /// Initial number of samples of each row `A_s` for the spectral path;
    /// doubled while the transform does not resolve the kernel's tail.
    pub row_points: usize,
    pub max_row_points: usize,
    pub rel_tol: f64,
    /// Distance from an odd negative integer below which `β` is treated as
    /// that integer.
    pub odd_window: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            s_points: 201,
            row_points: 1024,
            max_row_points: 16384,
            rel_tol: 1e-10,
            odd_window: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SamplingFunction {
    pub values: SampledFunction,
    pub beta: Option<f64>,
    pub method: SamplingMethod,
    /// Largest per-point error estimate over the grid.
    pub error_estimate: f64,
    pub warnings: Vec<String>,
}

impl SamplingFunction {
    pub fn s(&self) -> Vec<f64> {
        self.values.abscissae().collect()
    }

    pub fn f(&self) -> &[Complex64] {
        self.values.samples()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.max_norm()
    }

    pub fn max_imag(&self) -> f64 {
        self.f().iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.f().iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    /// `∫ f(s) ds` by the trapezoidal rule on the grid.
    pub fn integral(&self) -> Complex64 {
        self.values.integral()
    }

    /// `∫ χ(s) f(s) ds` on the grid.
    pub fn pair_with<F: Fn(f64) -> Complex64>(&self, chi: F) -> Complex64 {
        self.values.map(|s, v| chi(s) * v).integral()
    }

    /// CSV with header `s,f_re,f_im`.
    pub fn to_csv(&self) -> String {
        report::csv(
            &["s", "f_re", "f_im"],
            self.values.abscissae().zip(self.f()).map(|(s, v)| vec![s, v.re, v.im]),
        )
    }

    fn scaled(mut self, c: Complex64) -> Self {
        self.values = self.values.map(|_, v| v * c);
        self.error_estimate *= c.norm();
        self
    }
}

/// The `s` grid and row structure shared by all paths.
struct Rows {
    dp: DiamondProduct,
    lo: f64,
    hi: f64,
    n: usize,
}

impl Rows {
    fn new(g: &TestFunction, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::precondition("need at least 3 grid points in s"));
        }
        let dp = diamond(&g.conj(), g);
        let (lo, hi) = dp.s_support();
        Ok(Rows { dp, lo, hi, n })
    }

    fn abscissa(&self, j: usize) -> f64 {
        if j == self.n - 1 {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * j as f64 / (self.n - 1) as f64
        }
    }

    /// Evaluates `row(s, (s'_lo, s'_hi))` at every grid point with a
    /// nonempty row, in parallel but with a fixed output order.
    fn evaluate<F>(&self, row: F) -> Result<(Vec<Complex64>, f64)>
    where
        F: Fn(f64, (f64, f64)) -> Result<(Complex64, f64)> + Sync,
    {
        let results: Vec<Result<(Complex64, f64)>> = (0..self.n)
            .into_par_iter()
            .map(|j| {
                let s = self.abscissa(j);
                let (a, b) = self.dp.s_prime_support(s);
                if !(b > a) {
                    return Ok((Complex64::new(0.0, 0.0), 0.0));
                }
                row(s, (a, b))
            })
            .collect();
        let mut values = Vec::with_capacity(self.n);
        let mut err: f64 = 0.0;
        for r in results {
            let (v, e) = r?;
            values.push(v);
            err = err.max(e);
        }
        Ok((values, err))
    }

    fn finish(
        &self,
        values: Vec<Complex64>,
        error: f64,
        beta: Option<f64>,
        method: SamplingMethod,
        warnings: Vec<String>,
    ) -> Result<SamplingFunction> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        let values = SampledFunction::new(values, self.lo, step, 0.5 * (self.hi - self.lo))?;
        Ok(SamplingFunction {
            values,
            beta,
            method,
            error_estimate: error,
            warnings,
        })
    }
}

fn zero_function(g: &TestFunction, opts: &SamplingOptions, beta: Option<f64>, method: SamplingMethod) -> Result<SamplingFunction> {
    let rows = Rows::new(g, opts.s_points)?;
    rows.finish(vec![Complex64::new(0.0, 0.0); rows.n], 0.0, beta, method, Vec::new())
}

/// Spectral row: `(1/2π) ∫ K̃(p) Ã_s(-p) dp` with `Ã_s = W_g(s, ·)`.
fn spectral_row(
    m: &SpectralMeasure,
    a: impl Fn(f64) -> Complex64,
    (lo, hi): (f64, f64),
    opts: &SamplingOptions,
    quad: &Quadrature,
) -> Result<(Complex64, f64)> {
    let mut n = opts.row_points.max(16);
    loop {
        let row = SampledFunction::from_fn(&a, 0.5 * (lo + hi), 0.5 * (hi - lo), n)?;
        let panel = 2.0 * PI / (hi - lo);
        match m.pair_above_floor(
            |p| row.fourier_at(-p),
            row.fourier_noise(),
            panel,
            row.resolvable_frequency(),
            quad,
        ) {
            Ok(r) => return Ok((r.value, r.error)),
            Err(Error::SpectralTail(_)) if n < opts.max_row_points => n *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn row_quadrature(opts: &SamplingOptions, scale: f64) -> Quadrature {
    Quadrature::relative(opts.rel_tol, (opts.rel_tol * 1e-3 * scale).max(f64::MIN_POSITIVE))
}

/// Rough magnitude of `f` for a kernel whose measure grows like `p^exp`,
/// used only to set absolute tolerance floors.
fn magnitude(g: &TestFunction, exponent: f64) -> f64 {
    let r = g.support_radius().max(1e-300);
    g.sup_norm().powi(2) * r.powf(-exponent) * (1.0 + exponent.abs())
}

/// `f` from a kernel with a spectral form, by pairing its measure with the
/// Wigner function row by row.
pub fn sampling_spectral(k: &Kernel, g: &TestFunction, opts: &SamplingOptions) -> Result<SamplingFunction> {
    let m = k.spectral_form().ok_or_else(|| {
        Error::Unsupported(format!(
            "{} has no spectral form; use sampling_homogeneous for homogeneous kernels of degree >= 0",
            k.label()
        ))
    })?;
    sampling_measure(m, g, opts, k.homogeneous_degree())
}

fn sampling_measure(
    m: &SpectralMeasure,
    g: &TestFunction,
    opts: &SamplingOptions,
    beta: Option<f64>,
) -> Result<SamplingFunction> {
    if m.is_zero() {
        return zero_function(g, opts, beta, SamplingMethod::SpectralWigner);
    }
    let rows = Rows::new(g, opts.s_points)?;
    let (_, growth) = m.growth_bound();
    let quad = row_quadrature(opts, magnitude(g, growth + 1.0) * m.amplitude.norm());
    let dp = &rows.dp;
    let (values, err) = rows.evaluate(|s, span| spectral_row(m, |sp| dp.eval(s, sp), span, opts, &quad))?;
    rows.finish(values, err, beta, SamplingMethod::SpectralWigner, Vec::new())
}

/// Which closed form [`sampling_homogeneous`] uses for degree `β`.
pub fn homogeneous_branch(beta: f64, odd_window: f64) -> (SamplingMethod, Option<usize>) {
    if beta > -1.0 + odd_window {
        return (SamplingMethod::DirectIntegral, None);
    }
    let k = ((-beta - 1.0) / 2.0).round();
    if k >= 0.0 && (beta + 2.0 * k + 1.0).abs() <= odd_window {
        return (SamplingMethod::DeltaDerivative, Some(k as usize));
    }
    (SamplingMethod::FinitePart, None)
}

/// `f` for the kernel `(i(s' - i0))^β`, through convergent closed forms.
///
/// Each row `A = ḡ◇g(s, ·)` splits into its even part `E` and odd part `O`
/// in `s'`, paired with `cos(πβ/2) |s'|^β` and `i sin(πβ/2) sgn(s') |s'|^β`
/// respectively: a plain integral for `β > -1`, a Taylor-subtracted
/// finite-part integral below, and a derivative at `s' = 0` where the
/// distribution has a pole (odd negative `β` for `E`, even negative `β` for
/// `O`). For real `g` the odd part vanishes.
pub fn sampling_homogeneous(beta: f64, g: &TestFunction, opts: &SamplingOptions) -> Result<SamplingFunction> {
    if !beta.is_finite() {
        return Err(Error::precondition("beta must be finite"));
    }
    let (method, odd) = homogeneous_branch(beta, opts.odd_window);
    let (odd_method, even_pole) = odd_part_branch(beta, opts.odd_window);
    let with_odd = !g.is_real_valued();
    let mut warnings = Vec::new();
    if let Some(k) = odd {
        let exact = -(2.0 * k as f64) - 1.0;
        if beta != exact {
            warnings.push(format!(
                "beta={beta} lies within {:.1e} of {exact}; evaluated as the delta-derivative case",
                opts.odd_window
            ));
        }
    }
    if let (Some(k), true) = (even_pole, with_odd) {
        let exact = -(2.0 * k as f64);
        if beta != exact {
            warnings.push(format!(
                "beta={beta} lies within {:.1e} of {exact}; odd part evaluated as the delta-derivative case",
                opts.odd_window
            ));
        }
    }
    // the full jet, so that the Taylor window can be shrunk to where the
    // dropped terms are negligible; each parity ends on a genuine coefficient
    let even_order = M_MAX - M_MAX % 2;
    let odd_order = M_MAX - 1 + M_MAX % 2;
    // for -1 < β < 0 the finite-part form is used too: it is an ordinary
    // integral there, but the Taylor window takes the endpoint singularity
    let singular = beta < 0.0;
    let even_jet = match (method, odd) {
        (SamplingMethod::DeltaDerivative, Some(k)) => Some(2 * k),
        (SamplingMethod::FinitePart, _) => Some(even_order),
        (SamplingMethod::DirectIntegral, _) if singular => Some(even_order),
        _ => None,
    };
    let odd_jet = match (with_odd, odd_method, even_pole) {
        (true, SamplingMethod::DeltaDerivative, Some(k)) => Some(2 * k - 1),
        (true, SamplingMethod::FinitePart, _) => Some(odd_order),
        (true, SamplingMethod::DirectIntegral, _) if singular => Some(odd_order),
        _ => None,
    };
    // rows whose Taylor window would be ill-conditioned go through the
    // spectral form instead
    let fallback = homogeneous_kernel(beta, Complex64::new(1.0, 0.0));
    let fallback = fallback.spectral_form();
    let fallback_quad = row_quadrature(opts, magnitude(g, -beta));
    let jet_order = even_jet.max(odd_jet);
    let needed = (-beta - 1.0).ceil().max(0.0) as usize;
    if jet_order.is_some_and(|n| n > M_MAX) || needed >= M_MAX {
        return Err(Error::Unsupported(format!(
            "beta={beta} needs derivatives beyond order {M_MAX}"
        )));
    }
    let rows = Rows::new(g, opts.s_points)?;
    let dp = &rows.dp;
    let cos = 2.0 * (0.5 * beta * PI).cos();
    let isin = Complex64::new(0.0, 2.0 * (0.5 * beta * PI).sin());
    // absolute floor at the relative tolerance: rows near the ends of the
    // s-support are flat and carry only rounding noise
    let quad = Quadrature::relative(opts.rel_tol, (opts.rel_tol * magnitude(g, -beta)).max(f64::MIN_POSITIVE));
    let zero = Complex64::new(0.0, 0.0);
    let scale = g.sup_norm().powi(2);
    let edges = g.edges();
    let (values, err) = rows.evaluate(|s, (_, hi)| {
        // `ḡ(s - s'/2) g(s + s'/2)` is analytic for `|s'| < 2 dist(s, edges)`
        let reach = edges.iter().map(|e| (s - e).abs()).fold(f64::INFINITY, f64::min);
        let even = |sp: f64| 0.5 * (dp.eval(s, sp) + dp.eval(s, -sp));
        let odd_fn = |sp: f64| 0.5 * (dp.eval(s, sp) - dp.eval(s, -sp));
        let jet = jet_order.map_or_else(Vec::new, |n| dp.s_prime_jet_at_zero(s, n));
        // Taylor coefficients of one parity, through `order`
        let taylor = |order: usize, parity: usize| -> Vec<Complex64> {
            let mut fact = 1.0;
            (0..=order)
                .map(|k| {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    if k % 2 == parity {
                        jet[k] / fact
                    } else {
                        zero
                    }
                })
                .collect()
        };
        let spectral = || match fallback {
            Some(m) => spectral_row(m, |sp| dp.eval(s, sp), (-hi, hi), opts, &fallback_quad),
            None => Err(Error::Unsupported(format!("no spectral form for beta={beta}"))),
        };
        let (ev, ee) = match method {
            SamplingMethod::DirectIntegral if !singular => {
                let r = quad.integrate(|sp| even(sp) * sp.powf(beta), 0.0, hi)?;
                (r.value * cos, r.error * cos.abs())
            }
            SamplingMethod::DirectIntegral | SamplingMethod::FinitePart => {
                match finite_part_row(even, &taylor(even_order, 0), beta, hi, reach, scale, &quad)? {
                    Some(r) => (r.value * cos, r.error * cos.abs()),
                    None => return spectral(),
                }
            }
            SamplingMethod::DeltaDerivative => {
                let k = odd.expect("odd branch has an index");
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let fact: f64 = (1..=2 * k).map(|i| i as f64).product();
                let v = jet[2 * k] * (sign * PI / fact);
                (v, 64.0 * f64::EPSILON * v.norm())
            }
            SamplingMethod::SpectralWigner => unreachable!("not a homogeneous branch"),
        };
        if !with_odd {
            return Ok((ev, ee));
        }
        let (ov, oe) = match odd_method {
            SamplingMethod::DirectIntegral if !singular => {
                let r = quad.integrate(|sp| odd_fn(sp) * sp.powf(beta), 0.0, hi)?;
                (r.value * isin, r.error * isin.norm())
            }
            SamplingMethod::DirectIntegral | SamplingMethod::FinitePart => {
                match finite_part_row(odd_fn, &taylor(odd_order, 1), beta, hi, reach, scale, &quad)? {
                    Some(r) => (r.value * isin, r.error * isin.norm()),
                    None => return spectral(),
                }
            }
            SamplingMethod::DeltaDerivative => {
                // sin(πβ/2) cancels the pole of sgn(s')|s'|^β at β = -2k
                let k = even_pole.expect("even branch has an index");
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let fact: f64 = (1..2 * k).map(|i| i as f64).product();
                let v = Complex64::new(0.0, sign * PI / fact) * jet[2 * k - 1];
                (v, 64.0 * f64::EPSILON * v.norm())
            }
            SamplingMethod::SpectralWigner => unreachable!("not a homogeneous branch"),
        };
        Ok((ev + ov, ee + oe))
    })?;
    rows.finish(values, err, Some(beta), method, warnings)
}

/// `FP ∫₀^R s^β u(s) ds` with the Taylor window `[0, δ]` inside half the
/// convergence radius `reach` and small enough that the last supplied term
/// is below `1e-14·scale` there. Near the edge of a bump the Taylor series
/// converges only on a short interval, and just outside it every
/// coefficient vanishes, so neither a fixed fraction of `R` nor the
/// coefficients alone are safe.
///
/// `None` when the window is so short that `δ^{β+1}` would amplify rounding
/// beyond `1e6`.
fn finite_part_row<F>(
    u: F,
    taylor: &[Complex64],
    beta: f64,
    radius: f64,
    reach: f64,
    scale: f64,
    quad: &Quadrature,
) -> Result<Option<Integral<Complex64>>>
where
    F: Fn(f64) -> Complex64,
{
    let n = taylor.len() - 1;
    let last = taylor[n].norm();
    let mut delta = (DEFAULT_SPLIT * radius).min(reach);
    if last > 0.0 {
        delta = delta.min((1e-14 * scale / last).powf(1.0 / n as f64));
    }
    if beta < -1.0 && (delta / radius).powf(beta + 1.0) > 1e6 {
        return Ok(None);
    }
    let split = (delta / radius).max(1e-8);
    finite_part_integral(u, taylor, beta, radius, split, quad).map(Some)
}

/// Branch for the odd part: `sgn(s')|s'|^β` has its poles at the even
/// negative integers, where the delta-derivative form takes over.
fn odd_part_branch(beta: f64, window: f64) -> (SamplingMethod, Option<usize>) {
    if beta > -1.0 {
        return (SamplingMethod::DirectIntegral, None);
    }
    let k = (-beta / 2.0).round();
    if k >= 1.0 && (beta + 2.0 * k).abs() <= window {
        return (SamplingMethod::DeltaDerivative, Some(k as usize));
    }
    (SamplingMethod::FinitePart, None)
}

/// `f(s) = ∫ ds' K(s' - i0) C(s' - i0) (ḡ◇g)(s, s')` for a kernel `K` and an
/// OPE coefficient `C`. A smooth factor is folded into the row and the other
/// factor paired as a boundary value; otherwise the product must have a
/// spectral form.
pub fn sampling_general(k: &Kernel, c: &Kernel, g: &TestFunction, opts: &SamplingOptions) -> Result<SamplingFunction> {
    if k.is_zero() || c.is_zero() {
        return zero_function(g, opts, None, SamplingMethod::DirectIntegral);
    }
    let constant = |x: &Kernel| match x.kind() {
        KernelKind::Smooth { constant: Some(v), .. } => Some(*v),
        _ => None,
    };
    if let Some(v) = constant(c) {
        return Ok(sampling_single(k, g, opts)?.scaled(Complex64::new(v, 0.0)));
    }
    if let Some(v) = constant(k) {
        return Ok(sampling_single(c, g, opts)?.scaled(Complex64::new(v, 0.0)));
    }
    let (kernel, smooth) = match (k.kind(), c.kind()) {
        (_, KernelKind::Smooth { f, .. }) => (k, f.clone()),
        (KernelKind::Smooth { f, .. }, _) => (c, f.clone()),
        _ => {
            let (Some(a), Some(b)) = (k.spectral_form(), c.spectral_form()) else {
                return Err(Error::Unsupported(format!(
                    "no representable product of {} and {}",
                    k.label(),
                    c.label()
                )));
            };
            let m = product_measure(a, b)?;
            let beta = match (k.homogeneous_degree(), c.homogeneous_degree()) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            };
            return sampling_measure(&m, g, opts, beta);
        }
    };
    let rows = Rows::new(g, opts.s_points)?;
    let dp = &rows.dp;
    let popts = PairingOptions {
        quad: row_quadrature(opts, magnitude(g, 2.0)),
        ..Default::default()
    };
    let spectral = std::sync::atomic::AtomicBool::new(false);
    let (values, err) = rows.evaluate(|s, (a, b)| {
        let r = pair_function(kernel, |sp| dp.eval(s, sp) * smooth(sp), a, b, &popts)?;
        if r.method == PairingMethod::Spectral {
            spectral.store(true, std::sync::atomic::Ordering::Relaxed);
        }
        Ok((r.value, r.error))
    })?;
    let method = if spectral.into_inner() {
        SamplingMethod::SpectralWigner
    } else {
        SamplingMethod::DirectIntegral
    };
    rows.finish(values, err, None, method, Vec::new())
}

/// `f` for a single kernel, whatever its representation.
/// Homogeneous kernels use the closed forms when `g` is real.
pub fn sampling_single(k: &Kernel, g: &TestFunction, opts: &SamplingOptions) -> Result<SamplingFunction> {
    if let KernelKind::Homogeneous { beta, amplitude } = k.kind() {
        return Ok(sampling_homogeneous(*beta, g, opts)?.scaled(*amplitude));
    }
    if let Some(m) = k.spectral_form() {
        return sampling_measure(m, g, opts, k.homogeneous_degree());
    }
    let rows = Rows::new(g, opts.s_points)?;
    let dp = &rows.dp;
    let popts = PairingOptions {
        quad: row_quadrature(opts, magnitude(g, 2.0)),
        ..Default::default()
    };
    let (values, err) = rows.evaluate(|s, (a, b)| {
        let r = pair_function(k, |sp| dp.eval(s, sp), a, b, &popts)?;
        Ok((r.value, r.error))
    })?;
    rows.finish(values, err, k.homogeneous_degree(), SamplingMethod::DirectIntegral, Vec::new())
}

/// `∫ f(s) ds = (1/2π) ∫ K̃(p) |g̃(p)|² dp` for a kernel with a spectral
/// form: the integrated sampling function without building `f`.
pub fn integrated_sampling(k: &Kernel, g: &TestFunction) -> Result<(f64, f64)> {
    let r = integrated_sampling_complex(k, g)?;
    Ok((r.value.re, r.error))
}

/// [`integrated_sampling`] keeping the imaginary part, which is nonzero for
/// kernels with a complex amplitude.
pub fn integrated_sampling_complex(k: &Kernel, g: &TestFunction) -> Result<Integral<Complex64>> {
    let m = k
        .spectral_form()
        .ok_or_else(|| Error::Unsupported(format!("{} has no spectral form", k.label())))?;
    let (lo, hi) = g.support();
    let sampled = g.sample(4097)?;
    let l1 = sampled.samples().iter().map(|v| v.norm()).sum::<f64>() * sampled.grid_step();
    let floor = 2.0 * l1 * sampled.fourier_noise();
    m.pair_above_floor(
        |p| Complex64::new(sampled.fourier_at(p).norm_sqr(), 0.0),
        floor,
        2.0 * PI / (hi - lo),
        sampled.resolvable_frequency(),
        &Quadrature::relative(1e-12, 0.0),
    )
}

#[cfg(test)]
mod tests;
