//! Random bump superpositions for property scans.

use num_complex::Complex64;
use rand::Rng;

use super::TestFunction;

fn random_bump<R: Rng + ?Sized>(rng: &mut R, d: f64) -> TestFunction {
    let radius = d * rng.gen_range(0.3..0.8);
    let center = rng.gen_range(-(d - radius)..=(d - radius));
    TestFunction::bump(center, radius, 1.0).expect("valid bump")
}

/// `Σ a_k b_k` with 1 to 3 bumps inside `(-d, d)`. Amplitudes lie in
/// `[0.5, 1.5]`, with random signs when `signed` is set.
pub fn real_bumps<R: Rng + ?Sized>(rng: &mut R, d: f64, signed: bool) -> TestFunction {
    let n = rng.gen_range(1..=3);
    let terms = (0..n)
        .map(|_| {
            let mut a = rng.gen_range(0.5..1.5);
            if signed && rng.gen_bool(0.5) {
                a = -a;
            }
            (Complex64::new(a, 0.0), random_bump(rng, d))
        })
        .collect();
    TestFunction::sum(terms).expect("non-empty")
}

/// Like [`real_bumps`] with complex coefficients of modulus in `[0.5, 1.5]`.
pub fn complex_bumps<R: Rng + ?Sized>(rng: &mut R, d: f64) -> TestFunction {
    let n = rng.gen_range(2..=3);
    let terms = (0..n)
        .map(|_| {
            let c = Complex64::from_polar(
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            (c, random_bump(rng, d))
        })
        .collect();
    TestFunction::sum(terms).expect("non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn supports_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            assert!(real_bumps(&mut rng, 1.0, true).supported_in(1.0));
            let c = complex_bumps(&mut rng, 0.5);
            assert!(c.supported_in(0.5));
        }
    }
}
