use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{spectral_transform, SampledFunction};
use crate::report;
use crate::testfn::{diamond, TestFunction};

#[derive(Debug, Clone, Copy)]
pub struct WignerGrid {
    /// Rows in `s`, endpoints of the support included.
    pub s_points: usize,
    /// Samples in `s'` per row; odd so that `s' = 0` is a grid point.
    pub sp_points: usize,
    /// Zero padding of each row before the FFT.
    pub padding: usize,
    /// Keep only frequencies with `|p| <= p_max`.
    pub p_max: Option<f64>,
}

impl Default for WignerGrid {
    fn default() -> Self {
        WignerGrid {
            s_points: 201,
            sp_points: 513,
            padding: 4,
            p_max: None,
        }
    }
}

/// `W_g(s, p)` on a rectangular grid, stored row-major (`s` outer).
#[derive(Debug, Clone)]
pub struct WignerFunction {
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest imaginary part encountered; zero up to rounding.
    pub max_imag: f64,
    pub aliasing: bool,
}

impl WignerFunction {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.p.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value with its `(s, p)` location.
    pub fn min(&self) -> (f64, (f64, f64)) {
        let (k, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best });
        let n = self.p.len();
        (v, (self.s[k / n], self.p[k % n]))
    }

    /// `∫ dp/2π W(s_i, p)` on the frequency grid.
    pub fn p_marginal(&self, i: usize) -> f64 {
        let dp = self.p[1] - self.p[0];
        self.row(i).iter().sum::<f64>() * dp / (2.0 * std::f64::consts::PI)
    }

    /// `∫ ds W(s, p_j)` by the trapezoidal rule over the rows.
    pub fn s_marginal(&self, j: usize) -> f64 {
        let ns = self.s.len();
        let ds = self.s[1] - self.s[0];
        let mut acc = 0.0;
        for i in 0..ns {
            let w = if i == 0 || i == ns - 1 { 0.5 } else { 1.0 };
            acc += w * self.at(i, j);
        }
        acc * ds
    }

    /// CSV with header `s,p,W`.
    pub fn to_csv(&self) -> String {
        let rows = self
            .s
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| self.p.iter().enumerate().map(move |(j, &p)| (i, j, s, p)))
            .map(|(i, j, s, p)| vec![s, p, self.at(i, j)]);
        report::csv(&["s", "p", "W"], rows)
    }
}

/// `W_g(s, p) = ∫ ds' e^{ips'} ḡ(s + s'/2) g(s - s'/2)`, one FFT per row in
/// `s`. All rows share one `s'` grid, so they share one frequency grid.
pub fn wigner(g: &TestFunction, grid: &WignerGrid) -> Result<WignerFunction> {
    if grid.s_points < 2 || grid.sp_points < 3 {
        return Err(Error::precondition("Wigner grid needs at least 2 rows and 3 samples per row"));
    }
    let sp_points = grid.sp_points | 1;
    let dp = diamond(&g.conj(), g);
    let (lo, hi) = dp.s_support();
    // |s'| < hi - lo on every row
    let reach = hi - lo;
    let s: Vec<f64> = (0..grid.s_points)
        .map(|i| lo + reach * i as f64 / (grid.s_points - 1) as f64)
        .collect();
    let rows: Vec<Result<(Vec<f64>, Vec<Complex64>, f64)>> = s
        .par_iter()
        .map(|&si| {
            let row = SampledFunction::from_fn(|sp| dp.eval(si, sp), 0.0, reach, sp_points)?;
            let nyquist = std::f64::consts::PI / row.grid_step();
            let spec = spectral_transform(&row, grid.padding.max(1))?;
            Ok((spec.frequencies, spec.amplitudes, nyquist))
        })
        .collect();
    let mut p = Vec::new();
    let mut keep = Vec::new();
    let mut values = Vec::new();
    let mut max_imag: f64 = 0.0;
    // aliasing is judged on the whole grid: rows near the support edges are
    // narrow and always look under-resolved relative to their own tiny energy
    let (mut high, mut total) = (0.0, 0.0);
    for (i, r) in rows.into_iter().enumerate() {
        let (freqs, amps, nyquist) = r?;
        for (u, a) in freqs.iter().zip(&amps) {
            total += a.norm_sqr();
            if u.abs() > 0.9 * nyquist {
                high += a.norm_sqr();
            }
        }
        if i == 0 {
            keep = freqs
                .iter()
                .map(|u| grid.p_max.map_or(true, |m| u.abs() <= m))
                .collect();
            p = freqs.iter().zip(&keep).filter(|(_, k)| **k).map(|(u, _)| *u).collect();
            values.reserve(p.len() * s.len());
        }
        for (a, k) in amps.iter().zip(&keep) {
            if *k {
                values.push(a.re);
                max_imag = max_imag.max(a.im.abs());
            }
        }
    }
    Ok(WignerFunction {
        s,
        p,
        values,
        max_imag,
        aliasing: total > 0.0 && high > 1e-6 * total,
    })
}
