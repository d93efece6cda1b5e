use num_complex::Complex64;

use super::TestFunction;

/// `(g₁◇g₂)(s, s') = g₁(s + s'/2) g₂(s - s'/2)`.
#[derive(Debug, Clone)]
pub struct DiamondProduct {
    pub left: TestFunction,
    pub right: TestFunction,
}

pub fn diamond(left: &TestFunction, right: &TestFunction) -> DiamondProduct {
    DiamondProduct {
        left: left.clone(),
        right: right.clone(),
    }
}

impl DiamondProduct {
    pub fn eval(&self, s: f64, sp: f64) -> Complex64 {
        let l = self.left.value(s + 0.5 * sp);
        if l.norm() == 0.0 {
            return l;
        }
        l * self.right.value(s - 0.5 * sp)
    }

    /// Open interval in `s'` outside which `(s, ·)` vanishes; empty when
    /// `lo >= hi`.
    pub fn s_prime_support(&self, s: f64) -> (f64, f64) {
        let (a, b) = self.left.support();
        let (c, d) = self.right.support();
        let lo = (2.0 * (a - s)).max(2.0 * (s - d));
        let hi = (2.0 * (b - s)).min(2.0 * (s - c));
        (lo, hi)
    }

    /// Open interval in `s` outside which the product vanishes for every `s'`.
    pub fn s_support(&self) -> (f64, f64) {
        let (a, b) = self.left.support();
        let (c, d) = self.right.support();
        (0.5 * (a + c), 0.5 * (b + d))
    }

    /// `∂^k/∂s'^k (g₁◇g₂)(s, s')` at `s' = 0` for `k = 0..=n`.
    pub fn s_prime_jet_at_zero(&self, s: f64, n: usize) -> Vec<Complex64> {
        let l = self.left.jet(s, n);
        let r = self.right.jet(s, n);
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for (m, o) in out.iter_mut().enumerate() {
            // Σ_k C(m,k) (1/2)^k (-1/2)^{m-k} g₁^{(k)} g₂^{(m-k)}
            let mut binom = 1.0;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=m {
                let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
                acc += l[k] * r[m - k] * (binom * sign);
                binom = binom * (m - k) as f64 / (k + 1) as f64;
            }
            *o = acc * 0.5f64.powi(m as i32);
        }
        out
    }
}
