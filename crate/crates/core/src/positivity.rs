//! Sufficient conditions for the sampling function of `(i(s' - i0))^β` to be
//! pointwise nonnegative, the weaker averaged statements available when it
//! is not, and the Wigner-function obstruction behind both.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{homogeneous_kernel, Kernel};
use crate::sampling::{sampling_single, wigner, SamplingFunction, SamplingOptions, WignerGrid};
use crate::testfn::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    CertifiedPointwise,
    CertifiedAverage,
    NotCertified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `-1 < β ≤ 1` and `g ≥ 0`
    BetaRangeI,
    /// `β = -1` and `g` real, where `f = πg²`
    BetaMinusOneIi,
    /// `-3 < β < -1` and `g` log-concave on a connected support
    LogConcaveIii,
    /// `β ≤ 0`: `∫ f ≥ 0` only
    AverageBetaNonpos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub status: CertificateStatus,
    pub rule: Option<Rule>,
    /// Where the grid check of `f` found its most negative value, when that
    /// value is below the tolerance.
    pub witness: Option<f64>,
    /// `min Re f` and `max |f|` on the grid, when `f` could be built.
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    /// For uncertified inputs: whether `f` is nonetheless nonnegative on the
    /// grid. Such inputs are candidates against the necessity of the rules.
    pub nonnegative_anyway: Option<bool>,
    pub note: String,
}

/// Tolerance of the grid check, relative to `max |f|`.
pub const GRID_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 4001;

/// `(i(s' - i0))^β`; for `β = 0` the constant kernel, which carries a
/// spectral form.
fn kernel(beta: f64) -> Kernel {
    if beta == 0.0 {
        Kernel::constant(1.0)
    } else {
        homogeneous_kernel(beta, Complex64::new(1.0, 0.0))
    }
}

fn sampling(beta: f64, g: &TestFunction) -> Result<SamplingFunction> {
    sampling_single(&kernel(beta), g, &SamplingOptions::default())
}

fn scan(g: &TestFunction) -> Vec<(f64, Complex64)> {
    let (lo, hi) = g.support();
    (1..SCAN_POINTS - 1)
        .map(|j| {
            let t = lo + (hi - lo) * j as f64 / (SCAN_POINTS - 1) as f64;
            (t, g.value(t))
        })
        .collect()
}

fn is_nonnegative(g: &TestFunction) -> bool {
    if !g.is_real_valued() {
        return false;
    }
    let scale = g.sup_norm();
    scan(g).iter().all(|(_, v)| v.re >= -1e-14 * scale)
}

/// Whether `(log g)'' ≤ 0` wherever `g > 0`, tested on a grid in the form
/// `g''g - g'² ≤ 1e-9 g²`.
///
/// Requires `g ≥ 0` with a support that is one interval; a zero strictly
/// between two positive grid values counts as a gap.
pub fn is_log_concave(g: &TestFunction) -> Result<bool> {
    if !g.is_real_valued() {
        return Err(Error::precondition("log-concavity needs a real g"));
    }
    let pts = scan(g);
    let scale = g.sup_norm();
    if let Some((t, v)) = pts.iter().find(|(_, v)| v.re < -1e-14 * scale) {
        return Err(Error::precondition(format!("g is negative at t = {t:.6} (value {:.3e})", v.re)));
    }
    let first = pts.iter().position(|(_, v)| v.re > 0.0);
    let last = pts.iter().rposition(|(_, v)| v.re > 0.0);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::precondition("g vanishes on the whole grid"));
    };
    if let Some((t, _)) = pts[first..=last].iter().find(|(_, v)| v.re <= 0.0) {
        return Err(Error::precondition(format!("support of g is not connected: g vanishes at t = {t:.6}")));
    }
    Ok(pts[first..=last].iter().all(|&(t, v)| {
        if v.re <= 1e-300 {
            return true;
        }
        let j = g.jet(t, 2);
        let (g0, g1, g2) = (j[0].re, j[1].re, j[2].re);
        g2 * g0 - g1 * g1 <= 1e-9 * g0 * g0
    }))
}

fn grid_stats(f: &SamplingFunction) -> (f64, f64, f64) {
    let max = f.max_abs();
    let (at, min) = f
        .s()
        .into_iter()
        .zip(f.f())
        .fold((0.0, f64::INFINITY), |best, (s, v)| if v.re < best.1 { (s, v.re) } else { best });
    (min, max, at)
}

/// Applies the first rule whose hypotheses hold and checks the resulting `f`
/// on its grid. Inputs no rule covers are reported as not certified, never
/// as errors.
pub fn certify_pointwise(beta: f64, g: &TestFunction) -> Certificate {
    let mut cert = Certificate {
        status: CertificateStatus::NotCertified,
        rule: None,
        witness: None,
        grid_min: None,
        grid_max: None,
        nonnegative_anyway: None,
        note: String::new(),
    };
    let rule = if beta > -1.0 && beta <= 1.0 && is_nonnegative(g) {
        Some(Rule::BetaRangeI)
    } else if beta == -1.0 && g.is_real_valued() {
        Some(Rule::BetaMinusOneIi)
    } else if beta > -3.0 && beta < -1.0 {
        match is_log_concave(g) {
            Ok(true) => Some(Rule::LogConcaveIii),
            Ok(false) => {
                cert.note = "g is not log-concave".into();
                None
            }
            Err(e) => {
                cert.note = e.to_string();
                None
            }
        }
    } else {
        cert.note = format!("no rule covers β = {beta} for this g");
        None
    };
    let f = match sampling(beta, g) {
        Ok(f) => f,
        Err(e) => {
            if rule.is_some() {
                cert.note = format!("sampling function could not be built: {e}");
            }
            return cert;
        }
    };
    let (min, max, at) = grid_stats(&f);
    cert.grid_min = Some(min);
    cert.grid_max = Some(max);
    let nonnegative = min >= -GRID_TOL * max;
    match rule {
        Some(r) if nonnegative => {
            cert.status = CertificateStatus::CertifiedPointwise;
            cert.rule = Some(r);
        }
        Some(r) => {
            // a rule applied but the grid disagrees: refuse rather than certify
            cert.rule = Some(r);
            cert.witness = Some(at);
            cert.note = format!("grid check failed: f({at:.6}) = {min:.3e} below -{GRID_TOL:e}·{max:.3e}");
        }
        None => cert.nonnegative_anyway = Some(nonnegative),
    }
    cert
}

/// `∫ f(s) ds` for the kernel `(i(s' - i0))^β`, `β ≤ 0`, which is
/// nonnegative because the kernel is of positive type.
pub fn average_positivity(beta: f64, g: &TestFunction) -> Result<f64> {
    if !(beta <= 0.0) {
        return Err(Error::precondition(format!(
            "β = {beta} > 0: the kernel is not of positive type"
        )));
    }
    let opts = SamplingOptions {
        s_points: 801,
        ..Default::default()
    };
    Ok(sampling_single(&kernel(beta), g, &opts)?.integral().re)
}

/// The averaged certificate for `β ≤ 0`.
pub fn certify_average(beta: f64, g: &TestFunction) -> Result<Certificate> {
    let value = average_positivity(beta, g)?;
    let ok = value >= -GRID_TOL * g.l2_norm_sq(0)?.max(f64::MIN_POSITIVE);
    Ok(Certificate {
        status: if ok {
            CertificateStatus::CertifiedAverage
        } else {
            CertificateStatus::NotCertified
        },
        rule: Some(Rule::AverageBetaNonpos),
        witness: None,
        grid_min: None,
        grid_max: None,
        nonnegative_anyway: None,
        note: format!("∫f = {value:.6e}"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GardingRow {
    pub index: usize,
    /// `∫ χ f`
    pub chi_pairing: f64,
    pub l2_norm_sq: f64,
    /// `-∫χf / ‖g‖²`, or 0 for `g = 0`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GardingScan {
    /// Largest ratio over the family, clipped below at 0. An empirical
    /// constant for this family only.
    pub c_hat: f64,
    pub rows: Vec<GardingRow>,
}

/// Scans `-∫ χ f_g / ‖g‖²` over a family of test functions.
pub fn garding_scan(beta: f64, chi: &TestFunction, family: &[TestFunction]) -> Result<GardingScan> {
    if !(beta <= 0.0) {
        return Err(Error::precondition(format!(
            "β = {beta} > 0: the kernel is not of positive type"
        )));
    }
    if family.is_empty() {
        return Err(Error::precondition("the family must not be empty"));
    }
    let rows = family
        .par_iter()
        .enumerate()
        .map(|(index, g)| {
            let norm = g.l2_norm_sq(0)?;
            if norm == 0.0 {
                return Ok(GardingRow {
                    index,
                    chi_pairing: 0.0,
                    l2_norm_sq: 0.0,
                    ratio: 0.0,
                });
            }
            let f = sampling(beta, g)?;
            let pairing = f.pair_with(|s| chi.value(s)).re;
            Ok(GardingRow {
                index,
                chi_pairing: pairing,
                l2_norm_sq: norm,
                ratio: -pairing / norm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let c_hat = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(GardingScan { c_hat, rows })
}

/// Minimum of the Wigner function of a compactly supported `g` on the
/// default grid, with its location `(s, p)`. A nonnegative minimum means the
/// grid missed the negative region, which always exists.
pub fn hudson_negativity(g: &TestFunction) -> Result<(f64, (f64, f64))> {
    hudson_negativity_on(g, &WignerGrid::default())
}

pub fn hudson_negativity_on(g: &TestFunction, grid: &WignerGrid) -> Result<(f64, (f64, f64))> {
    if !g.is_compactly_supported() {
        return Err(Error::precondition("Wigner negativity is guaranteed only for compact support"));
    }
    if g.sup_norm() == 0.0 {
        return Err(Error::precondition("g is zero"));
    }
    let w = wigner(g, grid)?;
    let (min, at) = w.min();
    if min >= 0.0 {
        return Err(Error::Check(format!(
            "no negative Wigner value found on a {}×{} grid; refine the grid",
            grid.s_points, grid.sp_points
        )));
    }
    Ok((min, at))
}
