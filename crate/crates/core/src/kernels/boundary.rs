//! Pairing kernels with test functions: `lim_{y→0+} ∫ u(x) F(x - iy) dx`.

use num_complex::Complex64;

use super::{Kernel, KernelKind};
use crate::error::{Error, Result};
use crate::numerics::{extrapolate_to_zero, Quadrature, SampledFunction, DEFAULT_GRID_POINTS};
use crate::testfn::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingMethod {
    /// `(1/2π) ∫ K̃(p) ũ(-p) dp`
    Spectral,
    /// Ordinary integral against a locally integrable kernel.
    Direct,
    /// `y → 0+` extrapolation of `∫ u(x) F(x - iy) dx`.
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPairing {
    pub value: Complex64,
    pub error: f64,
    pub method: PairingMethod,
}

#[derive(Debug, Clone, Copy)]
pub struct PairingOptions {
    /// Samples of `u` used for its Fourier transform on the spectral path.
    pub grid_points: usize,
    pub quad: Quadrature,
    /// The limit path uses `y = 2^{-k}` for `k` in this inclusive range.
    pub limit_exponents: (i32, i32),
}

impl Default for PairingOptions {
    fn default() -> Self {
        PairingOptions {
            grid_points: DEFAULT_GRID_POINTS,
            quad: Quadrature::relative(1e-11, 1e-300),
            limit_exponents: (4, 14),
        }
    }
}

/// `⟨K, f⟩`: the spectral pairing for kernels with a spectral measure, a
/// direct integral for locally integrable kernels, and the `y → 0+` limit
/// otherwise.
pub fn eval_boundary(k: &Kernel, f: &TestFunction) -> Result<BoundaryPairing> {
    let (lo, hi) = f.support();
    pair_function(k, |x| f.value(x), lo, hi, &PairingOptions::default())
}

/// `⟨K, f⟩` through the `y → 0+` limit, for any kernel with an analytic
/// continuation.
pub fn eval_boundary_limit(k: &Kernel, f: &TestFunction) -> Result<BoundaryPairing> {
    let (lo, hi) = f.support();
    limit_path(k, &|x| f.value(x), lo, hi, &PairingOptions::default())
}

/// Pairs `k` with a function `u` vanishing outside `(lo, hi)`.
pub fn pair_function<F>(k: &Kernel, u: F, lo: f64, hi: f64, opts: &PairingOptions) -> Result<BoundaryPairing>
where
    F: Fn(f64) -> Complex64,
{
    if !(hi > lo) {
        return Err(Error::precondition("pairing interval is empty"));
    }
    if k.is_zero() {
        return Ok(BoundaryPairing {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            method: PairingMethod::Direct,
        });
    }
    match k.kind() {
        KernelKind::Homogeneous { beta, .. } if *beta >= 0.0 => {
            let mut pts = vec![lo];
            if lo < 0.0 && hi > 0.0 {
                pts.push(0.0);
            }
            pts.push(hi);
            let r = opts.quad.integrate_with_breaks(
                |x| if x == 0.0 { Complex64::new(0.0, 0.0) } else { u(x) * k.real_value(x).unwrap_or_default() },
                &pts,
            )?;
            Ok(BoundaryPairing {
                value: r.value,
                error: r.error,
                method: PairingMethod::Direct,
            })
        }
        KernelKind::Smooth { constant: None, f, .. } => {
            let r = opts.quad.integrate(|x| u(x) * f(x), lo, hi)?;
            Ok(BoundaryPairing {
                value: r.value,
                error: r.error,
                method: PairingMethod::Direct,
            })
        }
        KernelKind::AnalyticClosure { .. } => limit_path(k, &u, lo, hi, opts),
        _ => {
            let measure = k.spectral_form().expect("spectral form present");
            let sampled = SampledFunction::from_fn(&u, 0.5 * (lo + hi), 0.5 * (hi - lo), opts.grid_points)?;
            let panel = 2.0 * std::f64::consts::PI / (hi - lo);
            let r = measure.pair_above_floor(
                |p| sampled.fourier_at(-p),
                sampled.fourier_noise(),
                panel,
                sampled.resolvable_frequency(),
                &opts.quad,
            )?;
            Ok(BoundaryPairing {
                value: r.value,
                error: r.error,
                method: PairingMethod::Spectral,
            })
        }
    }
}

fn singular_points(k: &Kernel) -> Vec<f64> {
    match k.kind() {
        KernelKind::AnalyticClosure { singular_points, .. } => singular_points.clone(),
        KernelKind::Smooth { .. } => Vec::new(),
        _ => vec![0.0],
    }
}

fn limit_path(
    k: &Kernel,
    u: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    opts: &PairingOptions,
) -> Result<BoundaryPairing> {
    let mut pts = vec![lo];
    pts.extend(singular_points(k).into_iter().filter(|x| *x > lo && *x < hi));
    pts.push(hi);
    let (k0, k1) = opts.limit_exponents;
    let mut pairs = Vec::new();
    let mut quad_error: f64 = 0.0;
    for e in k0..=k1 {
        let y = 2f64.powi(-e);
        let bad = std::cell::Cell::new(None);
        let r = opts.quad.integrate_with_breaks(
            |x| {
                let v = u(x);
                if v == Complex64::new(0.0, 0.0) {
                    return v;
                }
                match k.continuation(Complex64::new(x, -y)) {
                    Ok(w) => v * w,
                    Err(_) => {
                        bad.set(Some(x));
                        Complex64::new(f64::NAN, 0.0)
                    }
                }
            },
            &pts,
        );
        if let Some(x) = bad.get() {
            return Err(Error::Unsupported(format!(
                "{} cannot be continued to z = {x} - {y}i",
                k.label()
            )));
        }
        let r = r?;
        quad_error = quad_error.max(r.error);
        pairs.push((y, r.value));
    }
    let ex = extrapolate_to_zero(&pairs)?;
    if ex.unreliable {
        return Err(Error::Extrapolation(format!(
            "values at y = 2^-{k0}..2^-{k1} do not settle (last {:.6e}, step {:.3e})",
            ex.limit, ex.error_estimate
        )));
    }
    Ok(BoundaryPairing {
        value: ex.limit,
        error: ex.error_estimate + quad_error,
        method: PairingMethod::Limit,
    })
}

/// Sampling grid for [`knorm_estimate`].
#[derive(Debug, Clone, Copy)]
pub struct KNormGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub n_re: usize,
    /// Points per decade in `|Im z|`.
    pub per_decade: usize,
    pub y_min: f64,
}

impl Default for KNormGrid {
    fn default() -> Self {
        KNormGrid {
            re_min: -1.0,
            re_max: 1.0,
            n_re: 201,
            per_decade: 20,
            y_min: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KNormEstimate {
    /// Grid maximum of `|F(z)| |Im z|^ℓ`; a lower bound on the supremum.
    pub value: f64,
    pub argmax: Complex64,
    /// The maximum keeps growing as `Im z → 0` on the grid: `F` is not
    /// regular of order `ℓ`.
    pub diverging: bool,
}

/// Grid estimate of `sup_{-1 ≤ Im z < 0} |F(z)| |Im z|^ℓ`.
pub fn knorm_estimate(k: &Kernel, ell: f64, grid: &KNormGrid) -> Result<KNormEstimate> {
    if !(ell > 0.0) {
        return Err(Error::precondition("ell must be positive"));
    }
    if !(grid.y_min > 0.0 && grid.y_min < 1.0) || grid.n_re < 1 || grid.per_decade < 1 {
        return Err(Error::precondition("invalid knorm grid"));
    }
    let decades = -grid.y_min.log10();
    let n_y = (decades * grid.per_decade as f64).ceil() as usize + 1;
    let mut res: Vec<f64> = if grid.n_re == 1 {
        vec![0.5 * (grid.re_min + grid.re_max)]
    } else {
        (0..grid.n_re)
            .map(|j| grid.re_min + (grid.re_max - grid.re_min) * j as f64 / (grid.n_re - 1) as f64)
            .collect()
    };
    if grid.re_min < 0.0 && grid.re_max > 0.0 && !res.contains(&0.0) {
        res.push(0.0);
    }
    // the near-boundary strip left out of the coarse maximum
    let coarse_floor = grid.y_min * 100.0;
    let mut best = (0.0, Complex64::new(0.0, -1.0));
    let mut coarse: f64 = 0.0;
    for i in 0..n_y {
        let y = 10f64.powf(-decades * i as f64 / (n_y - 1) as f64);
        for &x in &res {
            let z = Complex64::new(x, -y);
            let v = k.continuation(z)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Overflow(format!("F({x:.6e} - {y:.6e}i)")));
            }
            let w = v.norm() * y.powf(ell);
            if w > best.0 {
                best = (w, z);
            }
            if y >= coarse_floor * (1.0 - 1e-12) {
                coarse = coarse.max(w);
            }
        }
    }
    Ok(KNormEstimate {
        value: best.0,
        argmax: best.1,
        diverging: best.0 > 10.0 * coarse,
    })
}

/// `4^{ℓ+2} (ℓ+3) (1 + d^{-ℓ-2}) · knorm · sob`.
pub fn boundary_bound(ell: u32, d: f64, knorm: f64, sob: f64) -> Result<f64> {
    if !(d > 0.0) || knorm < 0.0 || sob < 0.0 {
        return Err(Error::precondition("boundary_bound needs d > 0 and nonnegative norms"));
    }
    let l = ell as i32;
    Ok(4f64.powi(l + 2) * (l + 3) as f64 * (1.0 + d.powi(-l - 2)) * knorm * sob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::homogeneous_kernel;

    fn one_over_z() -> Kernel {
        Kernel::analytic("1/z", |z| 1.0 / z, vec![0.0])
    }

    #[test]
    fn constant_closure_integrates() {
        let f = TestFunction::standard_bump().shift(0.2);
        let k = Kernel::analytic("1", |_| Complex64::new(1.0, 0.0), vec![]);
        let v = eval_boundary(&k, &f).unwrap();
        assert!((v.value - f.integral().unwrap()).norm() < 1e-10);
    }

    #[test]
    fn knorm_examples() {
        let g = KNormGrid::default();
        let e = knorm_estimate(&one_over_z(), 1.0, &g).unwrap();
        assert!((e.value - 1.0).abs() < 1e-3 && !e.diverging);
        let c = Kernel::analytic("c", |_| Complex64::new(0.0, 2.5), vec![]);
        let e = knorm_estimate(&c, 1.0, &g).unwrap();
        assert!((e.value - 2.5).abs() < 1e-12);
        assert_eq!(e.argmax.im, -1.0);
        let e = knorm_estimate(&Kernel::analytic("1/z^2", |z| 1.0 / (z * z), vec![0.0]), 1.0, &g).unwrap();
        assert!(e.diverging);
        let bad = Kernel::analytic("inf", |_| Complex64::new(f64::INFINITY, 0.0), vec![]);
        assert!(matches!(knorm_estimate(&bad, 1.0, &g), Err(Error::Overflow(_))));
    }

    #[test]
    fn constant_bound() {
        assert_eq!(boundary_bound(0, 1.0, 1.0, 1.0).unwrap(), 96.0);
        assert_eq!(boundary_bound(3, 0.5, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn limit_path_matches_spectral_path() {
        let f = TestFunction::standard_bump().scale(0.7).unwrap().shift(0.1);
        for beta in [-0.5, -1.0, -2.5] {
            let k = homogeneous_kernel(beta, Complex64::new(0.8, -0.3));
            let a = eval_boundary(&k, &f).unwrap();
            let b = eval_boundary_limit(&k, &f).unwrap();
            assert_eq!(a.method, PairingMethod::Spectral);
            assert!(
                (a.value - b.value).norm() <= a.error + b.error + 1e-9,
                "beta={beta}: {} vs {} ({} + {})",
                a.value,
                b.value,
                a.error,
                b.error
            );
        }
    }
}
