use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{is_positive_type, product_measure, Kernel, PositiveType};
use crate::numerics::{Quadrature, SampledFunction};
use crate::testfn::TestFunction;
use crate::SpectralMeasure;

type Mode = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A two-point function `G(t, t')` of a state, held in spectral form:
/// a stationary part `S(t - t')` given by its Fourier measure (same
/// convention as kernels) plus a finite-rank part `Σ M_ab v_a(t) v_b(t')`.
/// With `t = s + s'/2` and `t' = s - s'/2` this is the `G(s, s')` that
/// multiplies `ḡ◇g`.
#[derive(Clone, Default)]
pub struct TwoPointData {
    pub stationary: Option<SpectralMeasure>,
    pub modes: Vec<Mode>,
    pub coupling: Vec<Vec<Complex64>>,
}

impl std::fmt::Debug for TwoPointData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwoPointData")
            .field("stationary", &self.stationary)
            .field("modes", &self.modes.len())
            .field("coupling", &self.coupling)
            .finish()
    }
}

impl TwoPointData {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn stationary(measure: SpectralMeasure) -> Self {
        TwoPointData {
            stationary: Some(measure),
            ..Default::default()
        }
    }

    /// Adds `Σ M_ab v_a(t) v_b(t')`; `coupling` must be square with one row
    /// per mode.
    pub fn with_finite_rank(mut self, modes: Vec<Mode>, coupling: Vec<Vec<Complex64>>) -> Result<Self> {
        if coupling.len() != modes.len() || coupling.iter().any(|r| r.len() != modes.len()) {
            return Err(Error::precondition("coupling matrix must be square with one row per mode"));
        }
        self.modes = modes;
        self.coupling = coupling;
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.stationary.as_ref().map_or(true, |m| m.is_zero())
            && self.coupling.iter().flatten().all(|c| *c == Complex64::new(0.0, 0.0))
    }
}

/// Value of a quadratic form with a magnitude scale for tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValue {
    pub value: f64,
    /// Imaginary part; zero up to quadrature error for hermitean data.
    pub imag: f64,
    pub error: f64,
    pub scale: f64,
}

const GRID: usize = 2049;

/// `∫∫ ds ds' K(s') G(s, s') (ḡ◇g)(s, s')` for a kernel of positive type.
///
/// In the spectral representation the stationary part becomes
/// `(1/2π) ∫ (K·S)~(p) |g̃(p)|² dp` and each finite-rank term
/// `(1/2π) ∫ K̃(p) conj(F[g v̄_a](p)) F[g v_b](p) dp`.
pub fn quadratic_form(k: &Kernel, two_point: &TwoPointData, g: &TestFunction) -> Result<FormValue> {
    if !matches!(is_positive_type(k), PositiveType::CertifiedPositive) {
        return Err(Error::precondition(format!(
            "{} is not certified to be of positive type",
            k.label()
        )));
    }
    let mk = k
        .spectral_form()
        .ok_or_else(|| Error::precondition(format!("{} has no spectral form", k.label())))?;
    let mut out = FormValue {
        value: 0.0,
        imag: 0.0,
        error: 0.0,
        scale: 0.0,
    };
    if two_point.is_zero() || mk.is_zero() {
        return Ok(out);
    }
    let (lo, hi) = g.support();
    let panel = 2.0 * PI / (hi - lo);
    let quad = Quadrature::relative(1e-10, 0.0);
    let gs = g.sample(GRID)?;
    let l1 = |f: &SampledFunction| f.samples().iter().map(|v| v.norm()).sum::<f64>() * f.grid_step();

    if let Some(ms) = two_point.stationary.as_ref().filter(|m| !m.is_zero()) {
        let prod = product_measure(mk, ms)?;
        let floor = 2.0 * l1(&gs) * gs.fourier_noise();
        let u = |p: f64| Complex64::new(gs.fourier_at(p).norm_sqr(), 0.0);
        let r = prod.pair_above_floor(u, floor, panel, gs.resolvable_frequency(), &quad)?;
        let mut abs = prod.clone();
        abs.amplitude = Complex64::new(prod.amplitude.norm(), 0.0);
        let sc = abs.pair_above_floor(u, floor, panel, gs.resolvable_frequency(), &quad)?;
        out.value += r.value.re;
        out.imag += r.value.im;
        out.error += r.error;
        out.scale += sc.value.re.abs();
    }

    if !two_point.modes.is_empty() {
        // F[g v_b] and F[g v̄_a] from samples on g's grid
        let with = |v: &Mode, conj: bool| {
            gs.map(|t, gv| {
                let m = v(t);
                gv * if conj { m.conj() } else { m }
            })
        };
        let plain: Vec<SampledFunction> = two_point.modes.iter().map(|v| with(v, false)).collect();
        let barred: Vec<SampledFunction> = two_point.modes.iter().map(|v| with(v, true)).collect();
        let mut abs_k = mk.clone();
        abs_k.amplitude = Complex64::new(mk.amplitude.norm(), 0.0);
        for (a, row) in two_point.coupling.iter().enumerate() {
            for (b, m_ab) in row.iter().enumerate() {
                if *m_ab == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (fa, fb) = (&barred[a], &plain[b]);
                let floor = (l1(fa) * fb.fourier_noise() + l1(fb) * fa.fourier_noise()) * 2.0;
                let limit = fa.resolvable_frequency();
                let r = mk.pair_above_floor(|p| fa.fourier_at(p).conj() * fb.fourier_at(p), floor, panel, limit, &quad)?;
                let sc = abs_k.pair_above_floor(
                    |p| Complex64::new(fa.fourier_at(p).norm() * fb.fourier_at(p).norm(), 0.0),
                    floor,
                    panel,
                    limit,
                    &quad,
                )?;
                let v = m_ab * r.value;
                out.value += v.re;
                out.imag += v.im;
                out.error += m_ab.norm() * r.error;
                out.scale += m_ab.norm() * sc.value.re.abs();
            }
        }
    }
    Ok(out)
}
