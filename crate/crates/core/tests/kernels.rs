mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qiope::kernels::{
    eval_boundary, eval_boundary_limit, free_field_spectral_density, homogeneous_kernel, is_positive_type,
    product_measure, quadratic_form_value, PositiveType,
};
use qiope::testfn::random::{complex_bumps, real_bumps};
use qiope::{Kernel, SpectralMeasure};

use common::{principal_value, tanh_sinh};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn positive_type_kernels_give_nonnegative_forms() {
    let kernels = vec![
        homogeneous_kernel(-0.5, one()),
        homogeneous_kernel(-1.0, one()),
        homogeneous_kernel(-2.5, one()),
        Kernel::free_field_two_point(0.0).unwrap(),
        Kernel::free_field_two_point(1.0).unwrap(),
        // positive type, but a screen can only fail to refute it
        Kernel::smooth_expr("exp(-s^2)").unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in &kernels {
        match is_positive_type(k) {
            PositiveType::CertifiedPositive => {}
            PositiveType::Unknown if k.is_smooth() => {}
            other => panic!("{}: {other:?}", k.label()),
        }
        for _ in 0..20 {
            let g = complex_bumps(&mut rng, 1.0);
            let (q, scale) = quadratic_form_value(k, &g).unwrap();
            assert!(q.re >= -1e-8 * scale, "{}: Q = {q}", k.label());
            assert!(q.im.abs() <= 1e-8 * scale, "{}: Q = {q}", k.label());
        }
    }
}

#[test]
fn indefinite_kernel_is_caught() {
    let k = Kernel::smooth_expr("cos(3*s) - 0.9").unwrap();
    assert!(matches!(is_positive_type(&k), PositiveType::CertifiedNot { .. }));
}

#[test]
fn cauchy_form_matches_position_space_oracle() {
    // ⟨1/(i(s'-i0)), A⟩ = πA(0) - i PV∫ A(x)/x dx, A(x) = ∫ ḡ(v + x) g(v) dv
    let k = homogeneous_kernel(-1.0, one());
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..3 {
        let g = complex_bumps(&mut rng, 1.0);
        let (lo, hi) = g.support();
        let a = |x: f64| {
            let (p, q) = (lo.max(lo - x), hi.min(hi - x));
            if p >= q {
                return Complex64::new(0.0, 0.0);
            }
            tanh_sinh(|v| g.value(v + x).conj() * g.value(v), p, q, 1e-13)
        };
        let oracle = PI * a(0.0) - Complex64::new(0.0, 1.0) * principal_value(a, hi - lo);
        let (q, _) = quadratic_form_value(&k, &g).unwrap();
        assert!((q - oracle).norm() <= 1e-8 * oracle.norm(), "{q} vs {oracle}");
    }
}

#[test]
fn limit_path_agrees_with_spectral_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let fs: Vec<_> = (0..3).map(|_| complex_bumps(&mut rng, 1.0)).collect();
    for beta in [-2.5, -1.5, -1.0, -0.5, 0.5] {
        let k = homogeneous_kernel(beta, Complex64::new(0.7, -0.2));
        for f in &fs {
            let s = eval_boundary(&k, f).unwrap();
            let l = eval_boundary_limit(&k, f).unwrap();
            let budget = s.error + l.error;
            assert!((s.value - l.value).norm() <= budget, "β = {beta}: {} vs {} (budget {budget:.1e})", s.value, l.value);
        }
    }
}

fn assert_nonnegative_density(m: &SpectralMeasure, label: &str) {
    for j in 0..=4000 {
        let p = -10.0 + 0.02 * j as f64;
        let v = m.density_at(p);
        assert!(v >= -1e-12, "{label}: density {v:.3e} at p = {p}");
    }
}

#[test]
fn products_of_positive_kernels_have_nonnegative_density() {
    let spectral = |k: &Kernel| k.spectral_form().cloned().unwrap();
    let pairs = [
        (spectral(&homogeneous_kernel(-0.5, one())), spectral(&homogeneous_kernel(-1.5, one()))),
        (spectral(&homogeneous_kernel(-1.0, one())), free_field_spectral_density(1.0).unwrap()),
        (free_field_spectral_density(0.0).unwrap(), free_field_spectral_density(2.0).unwrap()),
    ];
    for (i, (a, b)) in pairs.iter().enumerate() {
        let prod = product_measure(a, b).unwrap();
        assert!(prod.is_manifestly_positive());
        assert_nonnegative_density(&prod, &format!("product {i}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn homogeneous_pairing_scales(seed in any::<u64>(), beta in -2.7..1.5f64, lambda in 0.3..3.0f64) {
        // ∫ K_β(s') λ^{-1} u(s'/λ) ds' = λ^β ∫ K_β u
        prop_assume!((beta.fract()).abs() > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = real_bumps(&mut rng, 1.0, true);
        let k = homogeneous_kernel(beta, one());
        let base = eval_boundary(&k, &f).unwrap().value;
        let scaled = eval_boundary(&k, &f.scale(lambda).unwrap()).unwrap().value;
        let expect = base * lambda.powf(beta);
        prop_assert!((scaled - expect).norm() <= 1e-8 * expect.norm(), "{scaled} vs {expect}");
    }
}
