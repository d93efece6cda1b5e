//! Sampled functions and their Fourier transforms.
//!
//! One convention is used throughout the crate:
//! `g̃(u) = ∫ dt e^{iut} g(t)`, with the inverse carrying `1/(2π)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default number of samples for spectral grids.
pub const DEFAULT_GRID_POINTS: usize = 4096;
/// Default zero-padding factor for [`spectral_transform`].
pub const DEFAULT_PADDING: usize = 4;

const SUPPORT_TOL: f64 = 1e-12;

/// Complex samples on a uniform grid `t_j = grid_start + j * grid_step`.
///
/// `support_radius` is measured from the grid midpoint; samples at or beyond it
/// must vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    samples: Vec<Complex64>,
    grid_start: f64,
    grid_step: f64,
    support_radius: f64,
}

impl SampledFunction {
    pub fn new(
        samples: Vec<Complex64>,
        grid_start: f64,
        grid_step: f64,
        support_radius: f64,
    ) -> Result<Self> {
        if !(grid_step > 0.0) {
            return Err(Error::precondition("grid_step must be positive"));
        }
        if samples.len() < 2 {
            return Err(Error::precondition("at least two samples are required"));
        }
        let f = SampledFunction {
            samples,
            grid_start,
            grid_step,
            support_radius,
        };
        let centre = f.centre();
        for (j, v) in f.samples.iter().enumerate() {
            let t = f.abscissa(j);
            if (t - centre).abs() >= support_radius && v.norm() > SUPPORT_TOL {
                return Err(Error::precondition(format!(
                    "sample at t={t:.6} lies outside the declared support radius {support_radius} but is {:.3e}",
                    v.norm()
                )));
            }
        }
        Ok(f)
    }

    /// Samples `f` at `n` equispaced points spanning `[centre - radius, centre + radius]`.
    pub fn from_fn<F>(f: F, centre: f64, radius: f64, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        if n < 2 {
            return Err(Error::precondition("at least two samples are required"));
        }
        let start = centre - radius;
        let step = 2.0 * radius / (n - 1) as f64;
        let samples = (0..n).map(|j| f(start + j as f64 * step)).collect();
        Self::new(samples, start, step, radius)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn grid_start(&self) -> f64 {
        self.grid_start
    }
    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn centre(&self) -> f64 {
        self.grid_start + 0.5 * self.grid_step * (self.samples.len() - 1) as f64
    }
    pub fn abscissa(&self, j: usize) -> f64 {
        self.grid_start + j as f64 * self.grid_step
    }
    pub fn abscissae(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |j| self.abscissa(j))
    }

    /// Trapezoidal integral; spectrally accurate for smooth functions that
    /// vanish with all derivatives at the grid ends.
    pub fn integral(&self) -> Complex64 {
        let n = self.samples.len();
        let inner: Complex64 = self.samples[1..n - 1].iter().sum();
        (inner + 0.5 * (self.samples[0] + self.samples[n - 1])) * self.grid_step
    }

    pub fn max_norm(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `h Σ_j g(t_j) e^{i u t_j}`: the trapezoidal Fourier transform at a
    /// single frequency, evaluated by Horner's scheme.
    pub fn fourier_at(&self, u: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, u * self.grid_step);
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.samples.iter().rev() {
            acc = acc * z + v;
        }
        acc * Complex64::from_polar(self.grid_step, u * self.grid_start)
    }

    /// Bound on the rounding error of [`fourier_at`](Self::fourier_at).
    /// Each term carries a relative error of a few `ε` and these add up like
    /// a random walk, so the noise scales with `h ‖g‖₂` rather than `h ‖g‖₁`.
    /// Far in the tail the computed transform is nothing but this noise.
    pub fn fourier_noise(&self) -> f64 {
        let l2: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        16.0 * f64::EPSILON * self.grid_step * l2
    }

    /// Highest frequency at which [`fourier_at`](Self::fourier_at) is a
    /// faithful transform (half the Nyquist frequency).
    pub fn resolvable_frequency(&self) -> f64 {
        0.5 * PI / self.grid_step
    }

    pub fn map<F: Fn(f64, Complex64) -> Complex64>(&self, f: F) -> SampledFunction {
        SampledFunction {
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(j, v)| f(self.abscissa(j), *v))
                .collect(),
            ..self.clone()
        }
    }
}

/// Discrete approximation of `g̃` on an increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    /// Set when more than 1e-6 of the spectral energy sits above 90% of Nyquist.
    pub aliasing: bool,
    // grid of the transformed samples, needed for the inverse
    source_start: f64,
    source_step: f64,
    source_len: usize,
}

impl Spectrum {
    pub fn frequency_step(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    /// `∫ |g̃(u)|² du` by the rectangle rule on the full period.
    pub fn energy(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.frequency_step()
    }
}

/// Fourier transform of `f` under the crate convention, zero-padded by
/// `padding_factor`. Frequencies are returned in increasing order.
pub fn spectral_transform(f: &SampledFunction, padding_factor: usize) -> Result<Spectrum> {
    if padding_factor < 1 {
        return Err(Error::precondition("padding_factor must be at least 1"));
    }
    let n = f.len() * padding_factor;
    let h = f.grid_step;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..f.len()].copy_from_slice(&f.samples);
    // positive-exponent DFT
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    let du = 2.0 * PI / (n as f64 * h);
    let half = (n / 2) as isize;
    let mut frequencies = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    for k in -half..(n as isize - half) {
        let idx = k.rem_euclid(n as isize) as usize;
        let u = k as f64 * du;
        frequencies.push(u);
        amplitudes.push(buf[idx] * Complex64::from_polar(h, u * f.grid_start));
    }

    let nyquist = PI / h;
    let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let high: f64 = frequencies
        .iter()
        .zip(&amplitudes)
        .filter(|(u, _)| u.abs() > 0.9 * nyquist)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let aliasing = total > 0.0 && high > 1e-6 * total;

    Ok(Spectrum {
        frequencies,
        amplitudes,
        aliasing,
        source_start: f.grid_start,
        source_step: h,
        source_len: f.len(),
    })
}

/// Inverts [`spectral_transform`], recovering the original samples.
pub fn inverse_transform(s: &Spectrum, support_radius: f64) -> Result<SampledFunction> {
    let n = s.frequencies.len();
    let h = s.source_step;
    let half = (n / 2) as isize;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, (u, a)) in s.frequencies.iter().zip(&s.amplitudes).enumerate() {
        let k = i as isize - half;
        let idx = k.rem_euclid(n as isize) as usize;
        buf[idx] = a * Complex64::from_polar(1.0 / h, -u * s.source_start);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let samples = buf[..s.source_len].iter().map(|v| v / n as f64).collect();
    SampledFunction::new(samples, s.source_start, h, support_radius)
}
