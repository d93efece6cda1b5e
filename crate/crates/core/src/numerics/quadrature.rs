//! Globally adaptive Gauss–Kronrod quadrature (10-point Gauss embedded in the
//! 21-point Kronrod extension) for complex-valued integrands on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980914765,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651328,
];

/// Result of a quadrature: value, absolute error estimate, number of
/// integrand evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

impl Integral<Complex64> {
    pub fn re(self) -> Integral<f64> {
        Integral {
            value: self.value.re,
            error: self.error,
            evaluations: self.evaluations,
        }
    }
}

impl<T: std::ops::Add<Output = T>> std::ops::Add for Integral<T> {
    type Output = Integral<T>;
    fn add(self, rhs: Self) -> Self {
        Integral {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

/// Settings for [`Quadrature::integrate`]. The run stops once the summed error
/// estimate drops below `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 20_000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    l1: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut l1 = fc.norm() * WGK[10];
    let mut fv = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv[j] = (f1, f2);
        kron += (f1 + f2) * WGK[j];
        l1 += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut asc = (fc - mean).norm() * WGK[10];
    for j in 0..10 {
        asc += ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm()) * WGK[j];
    }
    let value = kron * half;
    let l1 = l1 * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kron - gauss) * half).norm();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    // roundoff floor
    error = error.max(50.0 * f64::EPSILON * l1);
    Segment {
        a,
        b,
        value,
        error,
        l1,
    }
}

impl Quadrature {
    pub fn with_tol(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            ..Default::default()
        }
    }

    pub fn relative(rel_tol: f64, abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<Integral<Complex64>>
    where
        F: Fn(f64) -> Complex64,
    {
        self.integrate_with_breaks(f, &[a, b])
    }

    pub fn integrate_real<F>(&self, f: F, a: f64, b: f64) -> Result<Integral<f64>>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate(|x| Complex64::new(f(x), 0.0), a, b)
            .map(Integral::re)
    }

    /// Integrates over `[points[0], points[last]]`, starting from the given
    /// subdivision. Interior points should sit on singularities or kinks.
    pub fn integrate_with_breaks<F>(&self, f: F, points: &[f64]) -> Result<Integral<Complex64>>
    where
        F: Fn(f64) -> Complex64,
    {
        if points.len() < 2 {
            return Err(Error::precondition("need at least two interval endpoints"));
        }
        let (lo, hi) = (points[0], points[points.len() - 1]);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::precondition("integration bounds must be finite"));
        }
        if lo == hi {
            return Ok(Integral {
                value: Complex64::new(0.0, 0.0),
                error: 0.0,
                evaluations: 0,
            });
        }
        let sign = if hi < lo { -1.0 } else { 1.0 };
        let mut pts: Vec<f64> = points
            .iter()
            .copied()
            .filter(|p| p.is_finite() && (*p - lo) * sign >= 0.0 && (hi - *p) * sign >= 0.0)
            .collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(|x, y| x.total_cmp(y));
        pts.dedup();

        let mut heap = BinaryHeap::new();
        let mut evaluations = 0;
        for w in pts.windows(2) {
            heap.push(kronrod(&f, w[0], w[1]));
            evaluations += 21;
        }
        let mut subdivisions = heap.len();
        let mut value = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        let mut l1 = 0.0;
        for s in heap.iter() {
            value += s.value;
            error += s.error;
            l1 += s.l1;
        }
        loop {
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(Error::Overflow(format!(
                    "non-finite integrand on [{lo}, {hi}]"
                )));
            }
            let target = self
                .abs_tol
                .max(self.rel_tol * value.norm())
                .max(100.0 * f64::EPSILON * l1);
            if error <= target {
                // resum to shed accumulated drift
                let v = heap.iter().fold(Complex64::new(0.0, 0.0), |v, s| v + s.value);
                return Ok(Integral {
                    value: v * sign,
                    error,
                    evaluations,
                });
            }
            if subdivisions >= self.max_subdivisions {
                return Err(Error::NonConvergence {
                    estimate: value.re * sign,
                    error,
                    requested: target,
                    subdivisions,
                });
            }
            let worst = heap.pop().expect("non-empty heap");
            value -= worst.value;
            error -= worst.error;
            l1 -= worst.l1;
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) || worst.error == 0.0 {
                // interval exhausted at machine resolution; freeze it
                value += worst.value;
                l1 += worst.l1;
                heap.push(Segment {
                    error: 0.0,
                    ..worst
                });
                if heap.iter().all(|s| s.error == 0.0) {
                    error = 0.0;
                }
                continue;
            }
            for seg in [kronrod(&f, worst.a, mid), kronrod(&f, mid, worst.b)] {
                value += seg.value;
                error += seg.error;
                l1 += seg.l1;
                heap.push(seg);
            }
            error = error.max(0.0);
            evaluations += 42;
            subdivisions += 1;
        }
    }

    /// Integrates over `[a, ∞)` by doubling panels, stopping when two
    /// consecutive panels contribute less than the tolerance. Panels never
    /// extend past `limit`; if the tail is still significant there the
    /// integral is reported as unresolved.
    pub fn integrate_tail<F>(
        &self,
        f: F,
        a: f64,
        first_panel: f64,
        limit: f64,
        breaks: &[f64],
    ) -> Result<Integral<Complex64>>
    where
        F: Fn(f64) -> Complex64,
    {
        self.integrate_tail_noisy(f, a, first_panel, limit, breaks, |_, _| 0.0)
    }

    /// [`integrate_tail`](Self::integrate_tail) for an integrand carrying
    /// rounding noise; `noise(lo, hi)` bounds its integrated absolute noise
    /// over `[lo, hi]`. No panel is refined below that level.
    pub fn integrate_tail_noisy<F, N>(
        &self,
        f: F,
        a: f64,
        first_panel: f64,
        limit: f64,
        breaks: &[f64],
        noise: N,
    ) -> Result<Integral<Complex64>>
    where
        F: Fn(f64) -> Complex64,
        N: Fn(f64, f64) -> f64,
    {
        let mut total = Integral {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        };
        let mut lo = a;
        let mut width = first_panel.max(f64::MIN_POSITIVE);
        let mut quiet = 0;
        let mut magnitude = 0.0;
        while lo < limit {
            let hi = (lo + width).min(limit);
            // far panels only need accuracy relative to what has been seen so
            // far; asking for more chases the integrand's rounding noise
            let panel_q = Quadrature {
                rel_tol: self.rel_tol,
                abs_tol: (self.abs_tol * 0.25)
                    .max(self.rel_tol * 0.25 * magnitude)
                    .max(2.0 * noise(lo, hi)),
                max_subdivisions: self.max_subdivisions,
            };
            let mut pts = vec![lo];
            pts.extend(breaks.iter().copied().filter(|&p| p > lo && p < hi));
            pts.push(hi);
            let panel = panel_q.integrate_with_breaks(&f, &pts)?;
            total = total + panel;
            // cancellation between panels must not hide the integrand's size
            magnitude += panel.value.norm();
            // nothing seen yet is not quiet: the integrand may live further out
            let small = magnitude > 0.0
                && panel.value.norm() <= (self.abs_tol * 0.1).max(self.rel_tol * 0.1 * magnitude);
            quiet = if small && lo > a { quiet + 1 } else { 0 };
            if quiet >= 2 {
                return Ok(total);
            }
            lo = hi;
            width *= 2.0;
        }
        // the panel that reached the limit was clamped, so a second quiet one
        // never fits
        if magnitude == 0.0 || quiet >= 1 {
            return Ok(total);
        }
        Err(Error::SpectralTail(format!(
            "integrand still significant at the resolvable limit {limit:.4e}; enlarge the sampling grid"
        )))
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    Quadrature::with_tol(tol).integrate(f, a, b)
}
