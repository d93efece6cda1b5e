//! The standard bump `b(t) = exp(-1/(1-t²))` on `(-1, 1)` and its derivatives.
//!
//! With `φ(t) = -1/(1-t²) = -½(1/(1-t) + 1/(1+t))` every derivative of `φ` has a
//! closed form, and `b = e^φ` satisfies `b' = φ' b`, so
//! `b^{(n+1)} = Σ_k C(n,k) φ^{(k+1)} b^{(n-k)}`. The recursion runs on the
//! ratios `b^{(n)}/b`, which keeps it free of the cancellation that plagues
//! the expanded rational-polynomial form at high order.

/// Below this exponent `b` and all its derivatives are treated as exactly 0.
const UNDERFLOW_EXPONENT: f64 = -700.0;

/// `b(t)`.
pub fn value(t: f64) -> f64 {
    let u = 1.0 - t * t;
    if u <= 0.0 {
        return 0.0;
    }
    let e = -1.0 / u;
    if e < UNDERFLOW_EXPONENT {
        0.0
    } else {
        e.exp()
    }
}

/// Writes `b^{(k)}(t)` for `k = 0..out.len()` into `out`.
pub fn jet(t: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let u = 1.0 - t * t;
    let e = if u > 0.0 { -1.0 / u } else { f64::NEG_INFINITY };
    if e < UNDERFLOW_EXPONENT {
        out.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    // dphi[k] = φ^{(k)}(t)
    let (a, b) = (1.0 / (1.0 - t), 1.0 / (1.0 + t));
    let mut dphi = vec![0.0; n];
    let (mut pa, mut pb, mut fact) = (1.0, -1.0, 1.0);
    for (k, d) in dphi.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        pa *= a;
        pb *= -b;
        // φ^{(k)} = -½ k! (1/(1-t)^{k+1} + (-1)^k/(1+t)^{k+1})
        *d = -0.5 * fact * (pa + pb);
    }
    let mut ratio = vec![0.0; n];
    ratio[0] = 1.0;
    for m in 0..n - 1 {
        let mut binom = 1.0;
        let mut acc = 0.0;
        for k in 0..=m {
            acc += binom * dphi[k + 1] * ratio[m - k];
            binom = binom * (m - k) as f64 / (k + 1) as f64;
        }
        ratio[m + 1] = acc;
    }
    let scale = e.exp();
    for (o, r) in out.iter_mut().zip(ratio) {
        *o = scale * r;
    }
}
