//! Spectral measures `K̃` on `[0, ∞)` with `K(s') = (1/2π)∫ K̃(p) e^{-ips'} dp`.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::{Integral, Quadrature};

/// Largest polynomial growth exponent accepted for products; beyond it the
/// frequency integrals are not resolvable on the default grids.
pub const MAX_GROWTH_EXPONENT: f64 = 16.0;

/// A nonnegative density on `[0, ∞)`, kept symbolic so products and shifts
/// stay exact where closed forms exist.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// `p^exponent θ(p)`, `exponent > -1`
    Power { exponent: f64 },
    /// `ρ_m(p) = √(p²-m²)/(4π²) θ(p-m)`, the time-axis two-point density
    FreeField { mass: f64 },
    /// `∫_m^p ρ_m(ω) dω`
    FreeFieldCumulative { mass: f64 },
    Scaled(f64, Box<Density>),
    /// `D(p - a)`
    Shifted(f64, Box<Density>),
    Sum(Vec<Density>),
    /// `(1/2π) ∫₀^p D₁(q) D₂(p-q) dq`
    Convolution(Box<Density>, Box<Density>),
}

/// `∫_m^p √(ω²-m²)/(4π²) dω`.
pub fn free_field_cumulative(mass: f64, p: f64) -> f64 {
    if p <= mass {
        return 0.0;
    }
    if mass == 0.0 {
        return p * p / (8.0 * PI * PI);
    }
    let root = ((p - mass) * (p + mass)).sqrt();
    (p * root - mass * mass * ((p + root) / mass).ln()) / (8.0 * PI * PI)
}

/// `ρ_m(ω) = √(ω²-m²)/(4π²)` for `ω ≥ m`, else 0.
pub fn two_point_density(mass: f64, omega: f64) -> f64 {
    if omega <= mass {
        0.0
    } else {
        ((omega - mass) * (omega + mass)).sqrt() / (4.0 * PI * PI)
    }
}

impl Density {
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            Density::Power { exponent } => {
                if p > 0.0 {
                    p.powf(*exponent)
                } else {
                    0.0
                }
            }
            Density::FreeField { mass } => two_point_density(*mass, p),
            Density::FreeFieldCumulative { mass } => free_field_cumulative(*mass, p),
            Density::Scaled(c, d) => c * d.eval(p),
            Density::Shifted(a, d) => d.eval(p - a),
            Density::Sum(ds) => ds.iter().map(|d| d.eval(p)).sum(),
            Density::Convolution(l, r) => {
                let (s1, s2) = (l.start(), r.start());
                if p <= s1 + s2 {
                    return 0.0;
                }
                let mut pts = vec![s1, p - s2];
                pts.extend(l.breakpoints().into_iter().filter(|b| *b > s1 && *b < p - s2));
                pts.extend(
                    r.breakpoints()
                        .into_iter()
                        .map(|b| p - b)
                        .filter(|b| *b > s1 && *b < p - s2),
                );
                pts.sort_by(f64::total_cmp);
                Quadrature::relative(1e-11, 1e-300)
                    .integrate_with_breaks(
                        |q| Complex64::new(l.eval(q) * r.eval(p - q), 0.0),
                        &pts,
                    )
                    .map(|i| i.value.re / (2.0 * PI))
                    .unwrap_or_else(|e| match e {
                        Error::NonConvergence { estimate, .. } => estimate / (2.0 * PI),
                        _ => f64::NAN,
                    })
            }
        }
    }

    /// Infimum of the support.
    pub fn start(&self) -> f64 {
        match self {
            Density::Power { .. } => 0.0,
            Density::FreeField { mass } | Density::FreeFieldCumulative { mass } => *mass,
            Density::Scaled(_, d) => d.start(),
            Density::Shifted(a, d) => a + d.start(),
            Density::Sum(ds) => ds.iter().map(|d| d.start()).fold(f64::INFINITY, f64::min),
            Density::Convolution(l, r) => l.start() + r.start(),
        }
    }

    /// Points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = match self {
            Density::Power { .. } => vec![0.0],
            Density::FreeField { mass } | Density::FreeFieldCumulative { mass } => vec![*mass],
            Density::Scaled(_, d) => d.breakpoints(),
            Density::Shifted(a, d) => d.breakpoints().into_iter().map(|b| b + a).collect(),
            Density::Sum(ds) => ds.iter().flat_map(|d| d.breakpoints()).collect(),
            Density::Convolution(l, r) => {
                let (bl, br) = (l.breakpoints(), r.breakpoints());
                let mut out = Vec::new();
                for x in &bl {
                    for y in &br {
                        out.push(x + y);
                    }
                }
                out
            }
        };
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `(C, N)` with `∫₀^P D ≤ C (1+P)^N`.
    pub fn growth(&self) -> (f64, f64) {
        match self {
            Density::Power { exponent } => (1.0 / (exponent + 1.0), exponent + 1.0),
            Density::FreeField { .. } => (1.0 / (8.0 * PI * PI), 2.0),
            Density::FreeFieldCumulative { .. } => (1.0 / (24.0 * PI * PI), 3.0),
            Density::Scaled(c, d) => {
                let (cc, n) = d.growth();
                (c.abs() * cc, n)
            }
            Density::Shifted(_, d) => d.growth(),
            Density::Sum(ds) => ds.iter().map(|d| d.growth()).fold((0.0, 0.0), |a, b| {
                (a.0 + b.0, a.1.max(b.1))
            }),
            Density::Convolution(l, r) => {
                let (c1, n1) = l.growth();
                let (c2, n2) = r.growth();
                (c1 * c2 / (2.0 * PI), n1 + n2)
            }
        }
    }

    /// True when every coefficient in the tree is nonnegative, which makes
    /// the density nonnegative.
    pub fn manifestly_nonnegative(&self) -> bool {
        match self {
            Density::Power { .. } | Density::FreeField { .. } | Density::FreeFieldCumulative { .. } => {
                true
            }
            Density::Scaled(c, d) => *c >= 0.0 && d.manifestly_nonnegative(),
            Density::Shifted(a, d) => *a >= 0.0 && d.manifestly_nonnegative(),
            Density::Sum(ds) => ds.iter().all(|d| d.manifestly_nonnegative()),
            Density::Convolution(l, r) => l.manifestly_nonnegative() && r.manifestly_nonnegative(),
        }
    }

    fn scaled(self, c: f64) -> Density {
        if c == 1.0 {
            self
        } else {
            Density::Scaled(c, Box::new(self))
        }
    }

    fn shifted(self, a: f64) -> Density {
        if a == 0.0 {
            self
        } else {
            Density::Shifted(a, Box::new(self))
        }
    }

    /// `(1/2π) (D₁ * D₂)` with closed forms where available.
    pub fn convolve(&self, other: &Density) -> Density {
        match (self, other) {
            (Density::Sum(ds), _) => Density::Sum(ds.iter().map(|d| d.convolve(other)).collect()),
            (_, Density::Sum(_)) => other.convolve(self),
            (Density::Scaled(c, d), _) => d.convolve(other).scaled(*c),
            (_, Density::Scaled(..)) => other.convolve(self),
            (Density::Shifted(a, d), _) => d.convolve(other).shifted(*a),
            (_, Density::Shifted(..)) => other.convolve(self),
            (Density::Power { exponent: a }, Density::Power { exponent: b }) => {
                // ∫₀^p q^a (p-q)^b dq = B(a+1, b+1) p^{a+b+1}
                let beta = (ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp();
                Density::Power {
                    exponent: a + b + 1.0,
                }
                .scaled(beta / (2.0 * PI))
            }
            (Density::Power { exponent }, Density::FreeField { mass })
            | (Density::FreeField { mass }, Density::Power { exponent })
                if *exponent == 0.0 =>
            {
                Density::FreeFieldCumulative { mass: *mass }.scaled(1.0 / (2.0 * PI))
            }
            _ => Density::Convolution(Box::new(self.clone()), Box::new(other.clone())),
        }
    }
}

/// `K̃ = amplitude · (density + Σ w δ(p - a))`, supported in `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub amplitude: Complex64,
    pub density: Option<Density>,
    /// `(location ≥ 0, weight > 0)`
    pub atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn zero() -> Self {
        SpectralMeasure {
            amplitude: Complex64::new(0.0, 0.0),
            density: None,
            atoms: Vec::new(),
        }
    }

    pub fn from_density(amplitude: Complex64, density: Density) -> Self {
        SpectralMeasure {
            amplitude,
            density: Some(density),
            atoms: Vec::new(),
        }
    }

    /// Point mass `weight · δ(p - location)` scaled by `amplitude`.
    pub fn atom(amplitude: Complex64, location: f64, weight: f64) -> Result<Self> {
        if !(location >= 0.0) {
            return Err(Error::precondition("atom location must be nonnegative"));
        }
        if !(weight > 0.0) {
            return Err(Error::precondition("atom weight must be positive"));
        }
        Ok(SpectralMeasure {
            amplitude,
            density: None,
            atoms: vec![(location, weight)],
        })
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == Complex64::new(0.0, 0.0) || (self.density.is_none() && self.atoms.is_empty())
    }

    /// Density part without the amplitude.
    pub fn density_at(&self, p: f64) -> f64 {
        self.density.as_ref().map_or(0.0, |d| d.eval(p))
    }

    /// `amplitude · density(p)`.
    pub fn value_at(&self, p: f64) -> Complex64 {
        self.amplitude * self.density_at(p)
    }

    /// `(C, N)` with `|amplitude| · μ([0, P]) ≤ C (1+P)^N`.
    pub fn growth_bound(&self) -> (f64, f64) {
        let (mut c, mut n) = self.density.as_ref().map_or((0.0, 0.0), |d| d.growth());
        let w: f64 = self.atoms.iter().map(|a| a.1).sum();
        c += w;
        n = n.max(0.0);
        (self.amplitude.norm() * c, n)
    }

    /// Whether the measure is positive by construction.
    pub fn is_manifestly_positive(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        self.amplitude.im == 0.0
            && self.amplitude.re > 0.0
            && self.density.as_ref().map_or(true, |d| d.manifestly_nonnegative())
            && self.atoms.iter().all(|a| a.0 >= 0.0 && a.1 > 0.0)
    }

    /// Where the continuous part starts.
    pub fn threshold(&self) -> f64 {
        self.density.as_ref().map_or(0.0, |d| d.start().max(0.0))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.density.as_ref().map_or(Vec::new(), |d| d.breakpoints())
    }

    /// `(1/2π) ∫ K̃(p) u(p) dp` over `[0, limit]`.
    ///
    /// `scale` is the frequency scale on which `u` varies (roughly the
    /// inverse support length of the time-side function); it sets the first
    /// integration panel. The integral fails with a tail error if `K̃ u` is
    /// still significant at `limit`.
    pub fn pair<F>(&self, u: F, scale: f64, limit: f64, quad: &Quadrature) -> Result<Integral<Complex64>>
    where
        F: Fn(f64) -> Complex64,
    {
        self.pair_above_floor(u, 0.0, scale, limit, quad)
    }

    /// [`pair`](Self::pair) for a `u` known only up to an absolute error
    /// `floor`. Values of `u` below the floor are indistinguishable from
    /// rounding noise and are dropped; the reported error then includes
    /// `floor ∫|K̃|` over the range where `u` was still resolved.
    pub fn pair_above_floor<F>(
        &self,
        u: F,
        floor: f64,
        scale: f64,
        limit: f64,
        quad: &Quadrature,
    ) -> Result<Integral<Complex64>>
    where
        F: Fn(f64) -> Complex64,
    {
        let mut total = Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        };
        if self.is_zero() {
            return Ok(total);
        }
        let resolved = |p: f64| {
            let v = u(p);
            if v.norm() <= floor {
                Complex64::new(0.0, 0.0)
            } else {
                v
            }
        };
        for &(a, w) in &self.atoms {
            if a <= limit {
                total.value += resolved(a) * w;
                total.error += floor * w.abs();
                total.evaluations += 1;
            }
        }
        if let Some(d) = &self.density {
            let start = d.start().max(0.0);
            if start < limit {
                let breaks = d.breakpoints();
                let density_mass = |lo: f64, hi: f64| {
                    let mut pts = vec![lo];
                    pts.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
                    pts.push(hi);
                    Quadrature::relative(1e-3, 0.0)
                        .integrate_with_breaks(|p| Complex64::new(d.eval(p).abs(), 0.0), &pts)
                        .map(|r| r.value.re)
                        .unwrap_or(f64::INFINITY)
                };
                let last_resolved = std::cell::Cell::new(start);
                let part = quad.integrate_tail_noisy(
                    |p| {
                        let v = resolved(p);
                        if v.norm() > 0.0 && p > last_resolved.get() {
                            last_resolved.set(p);
                        }
                        v * d.eval(p)
                    },
                    start,
                    scale,
                    limit,
                    &breaks,
                    |lo, hi| if floor > 0.0 { floor * density_mass(lo, hi) } else { 0.0 },
                )?;
                total = total + part;
                if floor > 0.0 {
                    // the dropped values are each below the floor
                    let end = (2.0 * last_resolved.get()).min(limit).max(start);
                    total.error += floor * density_mass(start, end);
                }
            }
        }
        let norm = self.amplitude / (2.0 * PI);
        Ok(Integral {
            value: total.value * norm,
            error: total.error * norm.norm(),
            evaluations: total.evaluations,
        })
    }

    /// `(1/2π) ∫ K̃(p) e^{-ipz} dp` for `Im z < 0`: the analytic function
    /// whose boundary value is the kernel.
    pub fn continuation(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im < 0.0) {
            return Err(Error::precondition("continuation needs Im z < 0"));
        }
        let decay = -z.im;
        let limit = 800.0 / decay + self.threshold();
        let q = Quadrature::relative(1e-11, 1e-300);
        let scale = 1.0 / decay.max(z.re.abs()).max(1e-3);
        let r = self.pair(|p| (Complex64::new(0.0, -p) * z).exp(), scale.min(1.0 / decay), limit, &q)?;
        Ok(r.value)
    }
}

/// Spectral measure of the product `K₁ K₂`: `(1/2π)(K̃₁ * K̃₂)`.
pub fn product_measure(a: &SpectralMeasure, b: &SpectralMeasure) -> Result<SpectralMeasure> {
    if a.is_zero() || b.is_zero() {
        return Ok(SpectralMeasure::zero());
    }
    let (_, na) = a.growth_bound();
    let (_, nb) = b.growth_bound();
    if na + nb > MAX_GROWTH_EXPONENT {
        return Err(Error::Unsupported(format!(
            "product measure grows like P^{:.2} (factors P^{na:.2} and P^{nb:.2}); frequency integrals beyond P^{MAX_GROWTH_EXPONENT} are not resolvable",
            na + nb
        )));
    }
    let mut parts = Vec::new();
    if let (Some(da), Some(db)) = (&a.density, &b.density) {
        parts.push(da.convolve(db));
    }
    // atom × density: (w/2π) D(p - a)
    for &(loc, w) in &a.atoms {
        if let Some(db) = &b.density {
            parts.push(db.clone().shifted(loc).scaled(w / (2.0 * PI)));
        }
    }
    for &(loc, w) in &b.atoms {
        if let Some(da) = &a.density {
            parts.push(da.clone().shifted(loc).scaled(w / (2.0 * PI)));
        }
    }
    let mut atoms = Vec::new();
    for &(la, wa) in &a.atoms {
        for &(lb, wb) in &b.atoms {
            atoms.push((la + lb, wa * wb / (2.0 * PI)));
        }
    }
    let density = match parts.len() {
        0 => None,
        1 => parts.pop(),
        _ => Some(Density::Sum(parts)),
    };
    Ok(SpectralMeasure {
        amplitude: a.amplitude * b.amplitude,
        density,
        atoms,
    })
}
