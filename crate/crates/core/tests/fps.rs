use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use qiope::fps::{fps_is_positive, fps_mul, fps_sqrt, FormalPowerSeries};

fn rational() -> impl Strategy<Value = BigRational> {
    (-12i64..=12, 1i64..=7).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

/// Series of order 1..=9 whose first `low` coefficients vanish.
fn series() -> impl Strategy<Value = FormalPowerSeries> {
    (1usize..=9)
        .prop_flat_map(|order| (prop::collection::vec(rational(), order + 1), 0..=order))
        .prop_map(|(mut c, low)| {
            for x in c.iter_mut().take(low) {
                *x = BigRational::zero();
            }
            FormalPowerSeries::new(c)
        })
}

fn lowest(p: &FormalPowerSeries) -> Option<&BigRational> {
    p.rational_coeffs().iter().find(|c| !c.is_zero())
}

#[test]
fn truncated_cosine() {
    // 1 - g²/2 + g⁴/24 - g⁶/720 + g⁸/40320
    let c = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let p = FormalPowerSeries::new(vec![
        c(1, 1),
        c(0, 1),
        c(-1, 2),
        c(0, 1),
        c(1, 24),
        c(0, 1),
        c(-1, 720),
        c(0, 1),
        c(1, 40320),
    ]);
    let pos = fps_is_positive(&p);
    assert!(pos.positive && pos.n == 0 && pos.d0 == 1.0);
    let q = fps_sqrt(&p).unwrap();
    assert_eq!(fps_mul(&q, &q), p);
}

#[test]
fn zero_and_odd_leading_terms() {
    assert!(fps_is_positive(&FormalPowerSeries::from_integers(&[0, 0, 0])).positive);
    assert!(fps_sqrt(&FormalPowerSeries::from_integers(&[0, 0, 0])).is_ok());
    let odd = FormalPowerSeries::from_integers(&[0, 1, 5]);
    assert!(!fps_is_positive(&odd).positive);
    assert!(fps_sqrt(&odd).is_err());
    let negative = FormalPowerSeries::from_integers(&[0, 0, -1, 3]);
    assert!(!fps_is_positive(&negative).positive);
    assert!(fps_sqrt(&negative).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn positivity_iff_root(p in series()) {
        let positive = fps_is_positive(&p).positive;
        match fps_sqrt(&p) {
            Ok(q) => {
                prop_assert!(positive);
                prop_assert_eq!(fps_mul(&q, &q), p);
            }
            // an irrational leading root is a representation limit, not a
            // negative answer
            Err(qiope::Error::Unsupported(_)) => prop_assert!(positive),
            Err(_) => prop_assert!(!positive),
        }
    }

    #[test]
    fn root_of_square_is_normalized(q in series()) {
        let p = fps_mul(&q, &q);
        prop_assert!(fps_is_positive(&p).positive);
        let r = fps_sqrt(&p).unwrap();
        prop_assert_eq!(fps_mul(&r, &r), p.clone());
        if let Some(lead) = lowest(&r) {
            prop_assert!(lead.is_positive());
            let sign = lowest(&q).unwrap().signum();
            // ±q agrees with r wherever q's terms are determined by P
            let order = p.order() - p.rational_coeffs().iter().position(|c| !c.is_zero()).unwrap() / 2;
            for k in 0..=order.min(r.order()).min(q.order()) {
                prop_assert_eq!(&r.rational_coeffs()[k], &(&q.rational_coeffs()[k] * &sign));
            }
        } else {
            prop_assert!(p.is_zero());
        }
    }
}
