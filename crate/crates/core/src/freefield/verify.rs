//! Randomized check of `:φ²:(g²) ≥ -c_g` over mixed vacuum/two-particle
//! states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::fock::{optimal_mixing, ModeFunction};
use super::wick_square_bound;
use crate::error::{Error, Result};
use crate::report;
use crate::testfn::TestFunction;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub g: TestFunction,
    pub masses: Vec<f64>,
    pub states: usize,
    pub seed: u64,
    /// Margins below `-tol·scale` count as violations.
    pub tol: f64,
}

impl VerifyConfig {
    pub fn new(g: TestFunction) -> Self {
        VerifyConfig {
            g,
            masses: vec![0.0, 1.0],
            states: 50,
            seed: 0,
            tol: 1e-9,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "g": self.g.to_json(),
            "masses": self.masses,
            "states": self.states,
            "seed": self.seed,
            "tol": self.tol,
        })
    }
}

/// One drawn state: mode band and delay, the optimal mixing and its margin
/// against the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub mass: f64,
    pub band: (f64, f64),
    pub delay: f64,
    /// `[re, im]` of the minimizing mixing amplitude, absent when the
    /// infimum is only approached as `λ → ∞`.
    pub lambda: Option<[f64; 2]>,
    pub min_value: f64,
    pub margin: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassScan {
    pub mass: f64,
    pub bound: f64,
    pub state_scan_min: f64,
    pub margin: f64,
    /// Most negative `min_value / c_g`; at most `-0.1` for a scan that
    /// probes the bound seriously.
    pub best_ratio: f64,
}

/// Outcome of [`verify_qei`]. The top-level `bound`, `state_scan_min` and
/// `margin` are those of the mass with the smallest margin. Wall-clock
/// timings are left out so that reports are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QIReport {
    pub bound: f64,
    pub state_scan_min: f64,
    pub margin: f64,
    pub passed: bool,
    pub nontrivial: bool,
    pub per_mass: Vec<MassScan>,
    pub states: Vec<ScanEntry>,
    pub config: Value,
}

impl QIReport {
    pub fn to_json_string(&self) -> String {
        report::to_json_string(&serde_json::to_value(self).expect("report serializes"))
    }
}

struct Draw {
    mass: f64,
    band: (f64, f64),
    delay: f64,
}

/// Mode bands scale with the inverse support radius of `g` so that the
/// drawn states overlap it in both time and frequency. Low bands of width
/// about `2/r` come closest to the bound; wide or high bands make `H²`
/// oscillate across the support of `g` and the mixing gains little.
fn draw<R: Rng>(rng: &mut R, mass: f64, g: &TestFunction) -> Draw {
    let r = g.support_radius();
    let lo = mass + rng.gen_range(0.0..1.0) / r;
    let width = rng.gen_range(1.0..6.0) / r;
    Draw {
        mass,
        band: (lo, lo + width),
        delay: g.center() + rng.gen_range(-0.2..0.2) * r,
    }
}

/// Draws `states` modes (masses taken in turn), minimizes the Wick square of
/// `g²` over the mixing amplitude for each and compares with `-c_g`.
pub fn verify_qei(cfg: &VerifyConfig) -> Result<QIReport> {
    if cfg.masses.is_empty() || cfg.states == 0 {
        return Err(Error::precondition("verification needs at least one mass and one state"));
    }
    let bounds = cfg
        .masses
        .iter()
        .map(|&m| wick_square_bound(&cfg.g, m))
        .collect::<Result<Vec<f64>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws: Vec<(usize, Draw)> = (0..cfg.states)
        .map(|i| {
            let k = i % cfg.masses.len();
            (k, draw(&mut rng, cfg.masses[k], &cfg.g))
        })
        .collect();
    let entries = draws
        .par_iter()
        .map(|(k, d)| {
            let mode = ModeFunction::bump(d.mass, d.band, d.delay)?;
            let mix = optimal_mixing(&cfg.g, &mode, d.mass)?;
            let scale = bounds[*k] + mix.elements.c.norm() + mix.elements.d.abs();
            Ok(ScanEntry {
                mass: d.mass,
                band: d.band,
                delay: d.delay,
                lambda: mix.lambda.map(|l: Complex64| [l.re, l.im]),
                min_value: mix.min_value,
                margin: mix.min_value + bounds[*k],
                scale,
            })
        })
        .collect::<Result<Vec<ScanEntry>>>()?;

    let passed = entries.iter().all(|e| e.margin >= -cfg.tol * e.scale);
    let per_mass: Vec<MassScan> = cfg
        .masses
        .iter()
        .zip(&bounds)
        .map(|(&mass, &bound)| {
            let mine = entries.iter().filter(|e| e.mass == mass);
            let min = mine.clone().map(|e| e.min_value).fold(f64::INFINITY, f64::min);
            MassScan {
                mass,
                bound,
                state_scan_min: min,
                margin: min + bound,
                best_ratio: if bound > 0.0 { min / bound } else { 0.0 },
            }
        })
        .collect();
    let worst = per_mass
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .expect("at least one mass")
        .clone();
    let nontrivial = per_mass.iter().any(|m| m.best_ratio <= -0.1);
    Ok(QIReport {
        bound: worst.bound,
        state_scan_min: worst.state_scan_min,
        margin: worst.margin,
        passed,
        nontrivial,
        per_mass,
        states: entries,
        config: cfg.to_json(),
    })
}
