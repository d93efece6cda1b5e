//! Independent oracles for the integration tests. Nothing here calls the
//! library's own quadrature, transforms or extrapolation.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use qiope::TestFunction;

/// Tanh-sinh quadrature on `[a, b]`, halving the step until two successive
/// levels agree to `tol` relative (or `tol·1e-3` absolute).
pub fn tanh_sinh<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let t_max = 3.2;
    let node = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let x = u.tanh();
        let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        (x, w)
    };
    let mut h = 0.5;
    let (x0, w0) = node(0.0);
    let mut sum = f(c + r * x0) * w0;
    let mut k = 1;
    while k as f64 * h <= t_max {
        let (x, w) = node(k as f64 * h);
        sum += (f(c + r * x) + f(c - r * x)) * w;
        k += 1;
    }
    let mut prev = sum * h * r;
    for _ in 0..12 {
        h *= 0.5;
        // new nodes are the odd multiples of the halved step
        let mut k = 1;
        while k as f64 * h <= t_max {
            let (x, w) = node(k as f64 * h);
            if w > 0.0 && x < 1.0 {
                sum += (f(c + r * x) + f(c - r * x)) * w;
            }
            k += 2;
        }
        let cur = sum * h * r;
        let diff = (cur - prev).norm();
        if diff <= tol * cur.norm() || diff <= tol * 1e-3 {
            return cur;
        }
        prev = cur;
    }
    prev
}

pub fn tanh_sinh_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    tanh_sinh(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// `∫ |g^{(n)}|²` by quadrature in the time domain.
pub fn derivative_norm_sq(g: &TestFunction, n: usize) -> f64 {
    let (lo, hi) = g.support();
    tanh_sinh_real(|t| g.derivative_at(t, n).norm_sqr(), lo, hi, 1e-13)
}

/// Neville extrapolation of `(h, value)` pairs to `h = 0`.
pub fn neville(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut p: Vec<f64> = points.iter().map(|p| p.1).collect();
    for k in 1..n {
        for i in 0..n - k {
            let (hi, hk) = (points[i].0, points[i + k].0);
            p[i] = (hk * p[i] - hi * p[i + 1]) / (hk - hi);
        }
    }
    p[0]
}

/// `A'(x)` for `A(x) = ∫ g(s + x/2) g(s - x/2) ds`, memoized: it does not
/// depend on the regulator, and the regulated integrals share their nodes.
struct AutocorrelationSlope<'a> {
    g: &'a TestFunction,
    cache: RefCell<HashMap<u64, f64>>,
}

impl AutocorrelationSlope<'_> {
    fn at(&self, x: f64) -> f64 {
        if let Some(v) = self.cache.borrow().get(&x.to_bits()) {
            return *v;
        }
        let g = self.g;
        let (lo, hi) = g.support();
        let (a, b) = (lo + 0.5 * x, hi - 0.5 * x);
        let v = if a >= b {
            0.0
        } else {
            0.5 * tanh_sinh_real(
                |s| {
                    (g.derivative_at(s + 0.5 * x, 1) * g.value(s - 0.5 * x)
                        - g.value(s + 0.5 * x) * g.derivative_at(s - 0.5 * x, 1))
                    .re
                },
                a,
                b,
                1e-13,
            )
        };
        self.cache.borrow_mut().insert(x.to_bits(), v);
        v
    }
}

/// The massless Wick-square constant as the double integral
/// `∫ ds ds' Δ₊(s') g(s+s'/2) g(s-s'/2) / (iπ(s' - iε))` for real `g`,
/// with `Δ₊(s') = -1/(4π²(s' - iε)²)`.
///
/// For real `g` the autocorrelation `A(s')` is even, so only the even part
/// `i(3εs'² - ε³)/(s'² + ε²)³ = -iε d/ds' [s'/(s'² + ε²)²]` of
/// `(s' - iε)^{-3}` contributes. One integration by parts leaves
/// `c(ε) = -(ε/2π³) ∫₀^L A'(s') s'/(s'² + ε²)² ds'`, an ordinary 2D
/// integral with `A'` itself an integral over `s`.
fn wick_bound_regulated(slope: &AutocorrelationSlope, eps: f64) -> f64 {
    let (lo, hi) = slope.g.support();
    let width = hi - lo;
    let kernel = |x: f64| slope.at(x) * x / (x * x + eps * eps).powi(2);
    // panels resolving the peak of width ε at the origin
    let mut cuts = vec![0.0];
    let mut x = eps;
    while x < width {
        cuts.push(x);
        x *= 4.0;
    }
    cuts.push(width);
    let total: f64 = cuts.windows(2).map(|w| tanh_sinh_real(kernel, w[0], w[1], 1e-12)).sum();
    -eps / (2.0 * PI.powi(3)) * total
}

pub fn wick_bound_at_eps(g: &TestFunction, eps: f64) -> f64 {
    let slope = AutocorrelationSlope { g, cache: RefCell::new(HashMap::new()) };
    wick_bound_regulated(&slope, eps)
}

/// [`wick_bound_at_eps`] extrapolated to `ε → 0` from `ε = 1e-2·4^{-k}`.
pub fn wick_bound_2d(g: &TestFunction) -> f64 {
    let slope = AutocorrelationSlope { g, cache: RefCell::new(HashMap::new()) };
    let pts: Vec<(f64, f64)> = (0..4)
        .map(|k| {
            let eps = 1e-2 / 4f64.powi(k);
            (eps, wick_bound_regulated(&slope, eps))
        })
        .collect();
    neville(&pts)
}

/// `(1/2)∫₀^R (u(x) - u(-x))/x dx`-style principal value `PV ∫ u(x)/x dx`
/// for `u` supported in `[-R, R]`.
pub fn principal_value<F: Fn(f64) -> Complex64>(u: F, r: f64) -> Complex64 {
    tanh_sinh(|x| (u(x) - u(-x)) / x, 0.0, r, 1e-13)
}

/// `∫∫ K G (ḡ◇g)` for `K = 1/(i(s' - i0))` and the massless vacuum two-point
/// function. The product has spectral density `p²/(4π)` on `p > 0`, so the
/// form is `(1/8π²) ∫₀^∞ p² |g̃(p)|² dp` with `g̃(p) = ∫ e^{ipt} g(t) dt`.
pub fn massless_cauchy_form(g: &TestFunction) -> f64 {
    let (lo, hi) = g.support();
    let ft = |p: f64| tanh_sinh(|t| g.value(t) * Complex64::from_polar(1.0, p * t), lo, hi, 1e-13);
    let cut = 800.0 / (hi - lo);
    tanh_sinh_real(|p| p * p * ft(p).norm_sqr(), 0.0, cut, 1e-11) / (8.0 * PI * PI)
}
