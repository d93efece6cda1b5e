use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{free_field_spectral_density, two_point_density};
use crate::numerics::Quadrature;
use crate::sampling::TwoPointData;
use crate::testfn::{bump, TestFunction};

type Shape = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Time-grid size used for the matrix elements.
const TIME_GRID: usize = 2049;

/// A one-particle wave function `h(ω)` on the mass shell, supported in the
/// band `[lo, hi] ⊂ [m, ∞)` and normalized in `L²(dω)` unless it is zero.
#[derive(Clone)]
pub struct ModeFunction {
    mass: f64,
    band: (f64, f64),
    shape: Shape,
    /// `1/‖shape‖₂`, or 0 for the zero mode.
    norm: f64,
    /// `∫ √ρ |h| dω`, the size of the time profile.
    profile_size: f64,
}

impl std::fmt::Debug for ModeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeFunction")
            .field("mass", &self.mass)
            .field("band", &self.band)
            .field("zero", &self.is_zero())
            .finish()
    }
}

impl ModeFunction {
    /// `shape` restricted to `band` and rescaled to unit norm. A shape that
    /// vanishes on the band gives the zero mode.
    pub fn new<F>(mass: f64, band: (f64, f64), shape: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::precondition(format!("mass must be finite and nonnegative, got {mass}")));
        }
        let (lo, hi) = band;
        if !(lo >= mass && hi > lo && hi.is_finite()) {
            return Err(Error::precondition(format!(
                "mode band [{lo}, {hi}] must be a bounded interval above the mass {mass}"
            )));
        }
        let quad = Quadrature::relative(1e-12, 1e-300);
        let norm_sq = quad.integrate_real(|w| shape(w).norm_sqr(), lo, hi)?.value;
        let norm = if norm_sq > 0.0 { norm_sq.sqrt().recip() } else { 0.0 };
        let profile_size = norm
            * quad
                .integrate_real(|w| two_point_density(mass, w).sqrt() * shape(w).norm(), lo, hi)?
                .value;
        Ok(ModeFunction {
            mass,
            band,
            shape: Arc::new(shape),
            norm,
            profile_size,
        })
    }

    pub fn zero(mass: f64, band: (f64, f64)) -> Result<Self> {
        Self::new(mass, band, |_| Complex64::new(0.0, 0.0))
    }

    /// A bump across the band times `e^{iωτ}`; the time profile is then
    /// concentrated around `t = τ`.
    pub fn bump(mass: f64, band: (f64, f64), delay: f64) -> Result<Self> {
        let (lo, hi) = band;
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        Self::new(mass, band, move |w| {
            Complex64::from_polar(bump::value((w - c) / r), w * delay)
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn is_zero(&self) -> bool {
        self.norm == 0.0
    }

    /// `h(ω)`.
    pub fn value(&self, omega: f64) -> Complex64 {
        if omega < self.band.0 || omega > self.band.1 || self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        (self.shape)(omega) * self.norm
    }

    /// `H(t) = ∫ √ρ(ω) h(ω) e^{-iωt} dω`, the vacuum-to-one-particle matrix
    /// element of the positive-frequency field.
    pub fn profile(&self, t: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let (lo, hi) = self.band;
        let q = Quadrature::relative(1e-12, 1e-15 * self.profile_size);
        q.integrate(
            |w| two_point_density(self.mass, w).sqrt() * self.value(w) * Complex64::from_polar(1.0, -w * t),
            lo,
            hi,
        )
        .map(|r| r.value)
        // the integrand is bounded and smooth apart from the mass-shell
        // edge, so a failure here is a defect of the shape itself
        .unwrap_or_else(|e| panic!("time profile of a mode did not converge: {e}"))
    }
}

/// `H(t)` on the uniform grid `t_j = start + j·step`. Unlike a test
/// function it is not compactly supported.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    pub start: f64,
    pub step: f64,
    pub values: Vec<Complex64>,
}

impl TimeProfile {
    pub fn time(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }
}

/// Samples `H(t)` at `n` points spanning `[centre - radius, centre + radius]`.
pub fn mode_transform(h: &ModeFunction, centre: f64, radius: f64, n: usize) -> Result<TimeProfile> {
    if n < 2 || !(radius > 0.0) {
        return Err(Error::precondition("time grid needs a positive radius and at least two points"));
    }
    let step = 2.0 * radius / (n - 1) as f64;
    let nyquist = PI / step;
    if !h.is_zero() && h.band.1 >= nyquist {
        return Err(Error::precondition(format!(
            "mode band reaches {:.4e}, beyond the time grid's Nyquist frequency {nyquist:.4e}; use more points",
            h.band.1
        )));
    }
    let start = centre - radius;
    let values = (0..n)
        .into_par_iter()
        .map(|j| h.profile(start + j as f64 * step))
        .collect();
    Ok(TimeProfile { start, step, values })
}

/// The two numbers that fix `σ(:φ²:(f))` on the span of the vacuum and the
/// two-particle vector `|2_h⟩`: `⟨Ω|:φ²:(f)|2_h⟩ = c` and
/// `⟨2_h|:φ²:(f)|2_h⟩ = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixElements {
    pub c: Complex64,
    pub d: f64,
}

impl MatrixElements {
    /// From a time profile: `c = √2 ∫ f H²` and `d = 4 ∫ f |H|²`, by the
    /// trapezoidal rule on `n` points of `f`'s support.
    pub fn from_profile<H>(f: &TestFunction, profile: H, n: usize) -> Result<Self>
    where
        H: Fn(f64) -> Complex64,
    {
        if !f.is_real_valued() {
            return Err(Error::precondition("the smearing function must be real"));
        }
        let fs = f.sample(n)?;
        let (mut c, mut d) = (Complex64::new(0.0, 0.0), 0.0);
        for (j, t) in fs.abscissae().enumerate() {
            let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
            let (fv, hv) = (fs.samples()[j].re, profile(t));
            c += hv * hv * (w * fv);
            d += hv.norm_sqr() * w * fv;
        }
        let h = fs.grid_step();
        Ok(MatrixElements {
            c: c * (SQRT_2 * h),
            d: 4.0 * d * h,
        })
    }

    /// `⟨Ψ|:φ²:(f)|Ψ⟩` for `Ψ = (Ω + λ|2_h⟩)/√(1+|λ|²)`.
    pub fn expectation(&self, lambda: Complex64) -> f64 {
        (2.0 * (lambda * self.c).re + lambda.norm_sqr() * self.d) / (1.0 + lambda.norm_sqr())
    }

    /// Smallest expectation over `λ`: the lower eigenvalue of
    /// `[[0, c], [c̄, d]]`.
    pub fn minimum(&self) -> f64 {
        let (c, d) = (self.c.norm(), self.d);
        // stable form of (d - √(d² + 4c²))/2
        if c == 0.0 {
            d.min(0.0)
        } else if d >= 0.0 {
            -2.0 * c * c / (d + (d * d + 4.0 * c * c).sqrt())
        } else {
            0.5 * (d - (d * d + 4.0 * c * c).sqrt())
        }
    }

    /// A `λ` attaining [`minimum`](Self::minimum). For `c = 0` and `d < 0`
    /// the minimum is only approached as `λ → ∞`; `None` is returned.
    pub fn minimizer(&self) -> Option<Complex64> {
        if self.c == Complex64::new(0.0, 0.0) {
            return if self.d >= 0.0 { Some(Complex64::new(0.0, 0.0)) } else { None };
        }
        // first row of the eigenvalue equation: λ c = μ
        Some(Complex64::new(self.minimum(), 0.0) / self.c)
    }
}

/// `(Ω + λ|2_h⟩)/√(1+|λ|²)` with `|2_h⟩ = a*(h)²Ω/√2`.
#[derive(Debug, Clone)]
pub struct FockStateTwo {
    pub mode: ModeFunction,
    pub lambda: Complex64,
}

impl FockStateTwo {
    pub fn new(mode: ModeFunction, lambda: Complex64) -> Self {
        FockStateTwo { mode, lambda }
    }

    pub fn vacuum(mass: f64) -> Result<Self> {
        Ok(FockStateTwo {
            mode: ModeFunction::zero(mass, (mass, mass + 1.0))?,
            lambda: Complex64::new(0.0, 0.0),
        })
    }

    fn is_vacuum(&self) -> bool {
        self.lambda == Complex64::new(0.0, 0.0) || self.mode.is_zero()
    }

    /// Coupling of the normal-ordered part `σ(:φ(t)φ(t'):) = Σ M_ab v_a(t) v_b(t')`
    /// in the basis `v = (H, H̄)`.
    fn coupling(&self) -> [[Complex64; 2]; 2] {
        let l = self.lambda;
        let n = 1.0 + l.norm_sqr();
        let cross = Complex64::new(2.0 * l.norm_sqr() / n, 0.0);
        [[l * SQRT_2 / n, cross], [cross, l.conj() * SQRT_2 / n]]
    }

    /// `σ(:φ(t)φ(t'):)` from the profile values `H(t)` and `H(t')`.
    fn normal_ordered(&self, ht: Complex64, htp: Complex64) -> Complex64 {
        let m = self.coupling();
        let v = [ht, ht.conj()];
        let w = [htp, htp.conj()];
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                acc += m[a][b] * v[a] * w[b];
            }
        }
        acc
    }

    /// The full two-point function `σ(φ(t)φ(t'))`: the vacuum part plus the
    /// finite-rank normal-ordered part.
    pub fn two_point(&self) -> Result<TwoPointData> {
        let vacuum = TwoPointData::stationary(free_field_spectral_density(self.mode.mass)?);
        if self.is_vacuum() {
            return Ok(vacuum);
        }
        let (h1, h2) = (self.mode.clone(), self.mode.clone());
        let m = self.coupling();
        vacuum.with_finite_rank(
            vec![
                Arc::new(move |t| h1.profile(t)),
                Arc::new(move |t| h2.profile(t).conj()),
            ],
            m.iter().map(|r| r.to_vec()).collect(),
        )
    }
}

/// `σ(:φ²:(f))` for a real smearing function `f`.
pub fn wick_square_expectation(state: &FockStateTwo, f: &TestFunction) -> Result<f64> {
    if state.is_vacuum() {
        return Ok(0.0);
    }
    Ok(matrix_elements(&state.mode, f)?.expectation(state.lambda))
}

/// [`MatrixElements`] of `:φ²:(f)` for the mode `h`.
pub fn matrix_elements(h: &ModeFunction, f: &TestFunction) -> Result<MatrixElements> {
    if h.is_zero() {
        return Ok(MatrixElements {
            c: Complex64::new(0.0, 0.0),
            d: 0.0,
        });
    }
    let (lo, hi) = f.support();
    let profile = mode_transform(h, 0.5 * (lo + hi), 0.5 * (hi - lo), TIME_GRID)?;
    // the profile grid is f's sampling grid, so look samples up by index
    let (values, start, step) = (&profile.values, profile.start, profile.step);
    MatrixElements::from_profile(
        f,
        |t| values[(((t - start) / step).round() as usize).min(values.len() - 1)],
        TIME_GRID,
    )
}

/// Result of minimizing the Wick square of `g²` over the mixing amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixing {
    /// Minimizing `λ`; `None` when the infimum is only reached as `λ → ∞`.
    pub lambda: Option<Complex64>,
    pub min_value: f64,
    pub elements: MatrixElements,
}

/// Minimizes `σ(:φ²:(g²))` over the states `(Ω + λ|2_h⟩)/√(1+|λ|²)`.
pub fn optimal_mixing(g: &TestFunction, h: &ModeFunction, mass: f64) -> Result<Mixing> {
    if !g.is_real_valued() {
        return Err(Error::precondition("optimal mixing smears with g² for a real g"));
    }
    if h.mass != mass {
        return Err(Error::precondition(format!(
            "mode lives on the mass shell {} but the field has mass {mass}",
            h.mass
        )));
    }
    let f = TestFunction::product(vec![g.clone(), g.clone()])?;
    let elements = matrix_elements(h, &f)?;
    Ok(Mixing {
        lambda: elements.minimizer(),
        min_value: elements.minimum(),
        elements,
    })
}

const REMAINDER_TOL: f64 = 1e-8;

/// The remainder `∫∫ σ(R(s,s')) (ḡ◇g)(s,s') / (iπ(s'-i0))` left by
/// replacing `:φ(t)φ(t'):` with `:φ²:` at the midpoint.
///
/// For real `g` both factors are even in `s'`, only the `δ(s')` half of the
/// kernel survives, and `R(s, 0) = 0`; the remainder is exactly zero. The
/// integral is nevertheless assembled on a grid from the state's two-point
/// data, principal-value part included, and an error is returned if it is
/// not zero to `1e-8`.
pub fn remainder_term(state: &FockStateTwo, g: &TestFunction, mass: f64) -> Result<f64> {
    if !g.is_real_valued() {
        return Err(Error::precondition("the remainder vanishes only for real g"));
    }
    if state.mode.mass != mass {
        return Err(Error::precondition(format!(
            "state lives on the mass shell {} but the field has mass {mass}",
            state.mode.mass
        )));
    }
    if state.is_vacuum() {
        return Ok(0.0);
    }
    // t_i on a grid of n points; H on the half-step grid also holds every
    // midpoint (t_i + t_j)/2
    let n = 513;
    let (lo, hi) = g.support();
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let half = mode_transform(&state.mode, c, r, 2 * n - 1)?;
    let hv = &half.values;
    let step = 2.0 * half.step;
    let t = |i: usize| half.time(2 * i);
    let gv: Vec<f64> = (0..n).map(|i| g.value(t(i)).re).collect();
    let rem = |i: usize, j: usize| {
        state.normal_ordered(hv[2 * i], hv[2 * j]) - state.normal_ordered(hv[i + j], hv[i + j])
    };

    // δ(s') part: ∫ R(t, t) g(t)² dt
    let mut delta = Complex64::new(0.0, 0.0);
    for i in 0..n {
        delta += rem(i, i) * gv[i] * gv[i];
    }
    delta *= step;
    // principal value part, (1/iπ) PV∫∫ R g(t) g(t') / (t - t'), with the
    // mirrored pairs combined
    let mut pv = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..i {
            let odd = rem(i, j) - rem(j, i);
            pv += odd * (gv[i] * gv[j] / (t(i) - t(j)));
        }
    }
    pv *= step * step / Complex64::new(0.0, PI);
    let value = delta + pv;
    if value.norm() > REMAINDER_TOL {
        return Err(Error::Check(format!(
            "assembled remainder is {:.3e}, expected zero; the state's two-point data is not symmetric",
            value.norm()
        )));
    }
    Ok(value.re)
}
