//! Polynomial (Richardson/Neville) extrapolation of `v(h)` to `h = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub limit: Complex64,
    pub error_estimate: f64,
    /// Set when the raw sequence did not settle monotonically; `limit` is then
    /// the smallest-`h` value itself.
    pub unreliable: bool,
}

/// Extrapolates `(h, v)` pairs to `h → 0`.
///
/// Requires at least three pairs with `h` positive and strictly decreasing.
/// The error estimate is the difference between the chosen tableau entry and
/// its lower-order neighbour.
pub fn extrapolate_to_zero(pairs: &[(f64, Complex64)]) -> Result<Extrapolation> {
    if pairs.len() < 3 {
        return Err(Error::precondition(format!(
            "extrapolation needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    for w in pairs.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::precondition("h must be strictly decreasing"));
        }
    }
    if pairs.iter().any(|(h, _)| !(*h > 0.0)) {
        return Err(Error::precondition("h must be positive"));
    }

    let n = pairs.len();
    let last = pairs[n - 1].1;
    let scale = pairs.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let slack = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let diffs: Vec<f64> = pairs.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    let settles = diffs.windows(2).all(|d| d[1] <= d[0] + slack);
    if !settles {
        return Ok(Extrapolation {
            limit: last,
            error_estimate: diffs[n - 2],
            unreliable: true,
        });
    }

    // Neville tableau evaluated at 0: t[i][j] uses points i-j..=i.
    let mut prev: Vec<Complex64> = pairs.iter().map(|p| p.1).collect();
    let mut best = (last, diffs[n - 2]);
    for j in 1..n {
        let mut cur = vec![Complex64::new(0.0, 0.0); n];
        for i in j..n {
            let (hi, hj) = (pairs[i].0, pairs[i - j].0);
            cur[i] = (prev[i] * hj - prev[i - 1] * hi) / (hj - hi);
        }
        // the newest entry of this column against its lower-order predecessor
        let err = (cur[n - 1] - prev[n - 1]).norm();
        if err < best.1 {
            best = (cur[n - 1], err);
        }
        prev = cur;
    }
    Ok(Extrapolation {
        limit: best.0,
        error_estimate: best.1,
        unreliable: false,
    })
}
