use super::*;
use crate::kernels::{homogeneous_kernel, free_field_spectral_density};
use crate::numerics::integrate;
use crate::testfn::random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn opts(n: usize) -> SamplingOptions {
    SamplingOptions {
        s_points: n,
        ..Default::default()
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn real_g() -> TestFunction {
    TestFunction::bump(0.1, 0.7, 1.3).unwrap()
}

#[test]
fn beta_minus_one_is_pi_g_squared() {
    let g = real_g();
    let f = sampling_homogeneous(-1.0, &g, &opts(101)).unwrap();
    assert_eq!(f.method, SamplingMethod::DeltaDerivative);
    let peak = PI * g.sup_norm().powi(2);
    for (s, v) in f.s().iter().zip(f.f()) {
        let expect = PI * g.value(*s).re.powi(2);
        assert!((v.re - expect).abs() <= 1e-12 * peak, "s={s}");
    }
    let k = homogeneous_kernel(-1.0, one());
    let fs = sampling_spectral(&k, &g, &opts(41)).unwrap();
    for (s, v) in fs.s().iter().zip(fs.f()) {
        let expect = PI * g.value(*s).re.powi(2);
        assert!((v - expect).norm() <= 1e-8 * peak, "s={s}: {v} vs {expect}");
    }
}

#[test]
fn beta_minus_three_closed_form() {
    // (π/4)(g'² - g g'') from the k = 1 derivative formula
    let g = real_g();
    let f = sampling_homogeneous(-3.0, &g, &opts(61)).unwrap();
    let scale = f.max_abs();
    for (s, v) in f.s().iter().zip(f.f()) {
        let j = g.jet(*s, 2);
        let expect = 0.25 * PI * (j[1].re * j[1].re - j[0].re * j[2].re);
        assert!((v.re - expect).abs() <= 1e-10 * scale, "s={s}");
    }
    let k = homogeneous_kernel(-3.0, one());
    let fs = sampling_spectral(&k, &g, &opts(21)).unwrap();
    for (a, b) in fs.f().iter().zip(sampling_homogeneous(-3.0, &g, &opts(21)).unwrap().f()) {
        assert!((a - b).norm() <= 1e-7 * scale, "{a} vs {b}");
    }
}

#[test]
fn beta_zero_direct_integral() {
    let g = real_g();
    let f = sampling_homogeneous(0.0, &g, &opts(31)).unwrap();
    assert_eq!(f.method, SamplingMethod::DirectIntegral);
    for (s, v) in f.s().iter().zip(f.f()) {
        let oracle = integrate(|sp| g.value(s + 0.5 * sp) * g.value(s - 0.5 * sp), -2.0, 2.0, 1e-13)
            .unwrap()
            .value;
        assert!((v - oracle).norm() < 1e-9, "s={s}: {v} vs {oracle}");
    }
}

#[test]
fn branches_agree_with_spectral_path() {
    let g = TestFunction::standard_bump().scale(0.8).unwrap();
    for beta in [-0.5, -1.5, -2.0, -2.5] {
        let h = sampling_homogeneous(beta, &g, &opts(17)).unwrap();
        let k = homogeneous_kernel(beta, one());
        let s = sampling_spectral(&k, &g, &opts(17)).unwrap();
        let tol = h.error_estimate + s.error_estimate + 1e-9 * h.max_abs();
        for (a, b) in h.f().iter().zip(s.f()) {
            assert!((a - b).norm() <= tol, "beta={beta}: {a} vs {b} (tol {tol})");
        }
    }
}

#[test]
fn branch_dispatch() {
    assert_eq!(homogeneous_branch(-0.3, 1e-9).0, SamplingMethod::DirectIntegral);
    assert_eq!(homogeneous_branch(-2.0, 1e-9).0, SamplingMethod::FinitePart);
    assert_eq!(homogeneous_branch(-5.0, 1e-9), (SamplingMethod::DeltaDerivative, Some(2)));
    assert_eq!(homogeneous_branch(-1.0 - 5e-10, 1e-9), (SamplingMethod::DeltaDerivative, Some(0)));
    let f = sampling_homogeneous(-1.0 - 5e-10, &real_g(), &opts(11)).unwrap();
    assert_eq!(f.warnings.len(), 1);
}

#[test]
fn complex_g_closed_forms_match_spectral_path() {
    let g = TestFunction::bump(-0.2, 0.5, 1.0)
        .unwrap()
        .plus(&TestFunction::bump(0.25, 0.4, 1.0).unwrap().times(Complex64::new(0.3, 0.8)));
    for beta in [0.5, -0.5, -1.0, -1.5, -2.0, -2.5, -3.0, -3.5, -4.0] {
        let h = sampling_homogeneous(beta, &g, &opts(17)).unwrap();
        let s = sampling_spectral(&homogeneous_kernel(beta, one()), &g, &opts(17));
        let Ok(s) = s else { continue };
        let tol = h.error_estimate + s.error_estimate + 1e-8 * h.max_abs();
        for (a, b) in h.f().iter().zip(s.f()) {
            assert!((a - b).norm() <= tol, "beta={beta}: {a} vs {b} (tol {tol})");
        }
    }
}

#[test]
fn even_pole_window_is_continuous() {
    let g = real_g().plus(&TestFunction::bump(0.3, 0.3, 1.0).unwrap().times(Complex64::new(0.0, 0.5)));
    let exact = sampling_homogeneous(-2.0, &g, &opts(11)).unwrap();
    let near = sampling_homogeneous(-2.0 + 1e-6, &g, &opts(11)).unwrap();
    for (a, b) in exact.f().iter().zip(near.f()) {
        assert!((a - b).norm() <= 1e-4 * exact.max_abs(), "{a} vs {b}");
    }
}

#[test]
fn atom_gives_wigner_value() {
    let g = real_g().plus(&TestFunction::bump(0.3, 0.3, 1.0).unwrap().times(Complex64::new(0.0, 0.5)));
    let p0 = 3.0;
    let m = SpectralMeasure::atom(one(), p0, 2.0 * PI).unwrap();
    let k = Kernel::spectral(m, "atom");
    let f = sampling_spectral(&k, &g, &opts(15)).unwrap();
    for (s, v) in f.s().iter().zip(f.f()) {
        // ∫ ds' e^{-ip₀s'} ḡ(s+s'/2) g(s-s'/2) = W_g(s, -p₀)
        let w = integrate(
            |sp| Complex64::from_polar(1.0, -p0 * sp) * g.value(s + 0.5 * sp).conj() * g.value(s - 0.5 * sp),
            -2.0,
            2.0,
            1e-13,
        )
        .unwrap()
        .value;
        assert!((v - w).norm() < 1e-9, "s={s}: {v} vs {w}");
    }
}

#[test]
fn zero_kernel_gives_zero() {
    let f = sampling_spectral(&Kernel::zero(), &real_g(), &opts(11)).unwrap();
    assert!(f.f().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn real_for_complex_g() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = random::complex_bumps(&mut rng, 1.0);
    let k = homogeneous_kernel(-1.5, one());
    let f = sampling_spectral(&k, &g, &opts(21)).unwrap();
    assert!(f.max_imag() <= 1e-9 * f.max_abs(), "{} vs {}", f.max_imag(), f.max_abs());
}

#[test]
fn general_path() {
    let g = real_g();
    let k = homogeneous_kernel(-1.0, one());
    let f = sampling_general(&k, &Kernel::constant(1.0), &g, &opts(21)).unwrap();
    let peak = PI * g.sup_norm().powi(2);
    for (s, v) in f.s().iter().zip(f.f()) {
        assert!((v.re - PI * g.value(*s).re.powi(2)).abs() <= 1e-8 * peak);
    }
    let f3 = sampling_general(&k, &Kernel::constant(3.0), &g, &opts(21)).unwrap();
    for (a, b) in f.f().iter().zip(f3.f()) {
        assert!((a * 3.0 - b).norm() <= 1e-14 * peak);
    }
    // a non-constant smooth factor folded into the row
    let c = Kernel::smooth_expr("1 + s^2").unwrap();
    let fc = sampling_general(&k, &c, &g, &opts(11)).unwrap();
    let direct = sampling_general(&k, &Kernel::constant(1.0), &g, &opts(11)).unwrap();
    // at s' = 0 the smooth factor is 1, and β = -1 only sees s' = 0
    for (a, b) in fc.f().iter().zip(direct.f()) {
        assert!((a - b).norm() <= 1e-7 * peak, "{a} vs {b}");
    }
}

#[test]
fn free_field_product_integrates_to_wick_constant() {
    let g = TestFunction::standard_bump().scale(0.6).unwrap();
    let mass = 1.0;
    let k = Kernel::free_field_two_point(mass).unwrap();
    let c = homogeneous_kernel(-1.0, Complex64::new(1.0 / PI, 0.0));
    let f = sampling_general(&k, &c, &g, &opts(81)).unwrap();
    // c_g = (1/π) ∫_m^∞ |g̃(p)|² ∫_m^p ρ dp with ρ = √(ω²-m²)/(4π²)
    let gs = g.sample(4097).unwrap();
    let q = Quadrature::relative(1e-12, 0.0);
    let rho = |w: f64| (w * w - mass * mass).max(0.0).sqrt() / (4.0 * PI * PI);
    let cg = q
        .integrate_tail(
            |p| {
                let inner = q.integrate(|w| Complex64::new(rho(w), 0.0), mass, p).unwrap().value.re;
                Complex64::new(gs.fourier_at(p).norm_sqr() * inner / PI, 0.0)
            },
            mass,
            2.0,
            gs.resolvable_frequency(),
            &[],
        )
        .unwrap()
        .value
        .re;
    let integral = f.integral().re;
    assert!((integral - cg).abs() <= 1e-6 * cg, "{integral} vs {cg}");
    let (direct, _) = integrated_sampling(&Kernel::spectral(product_measure(
        k.spectral_form().unwrap(),
        c.spectral_form().unwrap(),
    ).unwrap(), "product"), &g)
    .unwrap();
    assert!((direct - cg).abs() <= 1e-8 * cg, "{direct} vs {cg}");
    let _ = free_field_spectral_density(mass).unwrap();
}

#[test]
fn csv_header() {
    let f = sampling_homogeneous(-1.0, &real_g(), &opts(5)).unwrap();
    let csv = f.to_csv();
    assert!(csv.starts_with("s,f_re,f_im\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn wigner_marginals() {
    let g = real_g().plus(&TestFunction::bump(-0.2, 0.4, 0.5).unwrap().times(Complex64::new(0.0, 1.0)));
    let w = wigner(&g, &WignerGrid::default()).unwrap();
    assert!(!w.aliasing);
    let peak = g.sup_norm().powi(2);
    for i in (0..w.s.len()).step_by(10) {
        let expect = g.value(w.s[i]).norm_sqr();
        assert!((w.p_marginal(i) - expect).abs() <= 1e-6 * peak);
    }
    let gs = g.sample(4097).unwrap();
    let mid = w.p.len() / 2;
    for j in (mid - 40..mid + 40).step_by(7) {
        // ∫ ds W(s, p) = |g̃(-p)|²
        let expect = gs.fourier_at(-w.p[j]).norm_sqr();
        assert!((w.s_marginal(j) - expect).abs() <= 1e-6 * peak, "p={}", w.p[j]);
    }
}

#[test]
fn wigner_sign() {
    let b = wigner(&TestFunction::standard_bump(), &WignerGrid::default()).unwrap();
    let (min, _) = b.min();
    assert!(min < -1e-4 * b.max(), "{min}");
    let gauss = wigner(&TestFunction::gaussian(0.0, 0.3).unwrap(), &WignerGrid::default()).unwrap();
    assert!(gauss.min().0 >= -1e-9, "{}", gauss.min().0);
}

#[test]
fn quadratic_form_zero_and_vacuum() {
    let g = real_g();
    let k = homogeneous_kernel(-1.0, Complex64::new(1.0 / PI, 0.0));
    let z = quadratic_form(&k, &TwoPointData::zero(), &g).unwrap();
    assert_eq!(z.value, 0.0);
    let vac = TwoPointData::stationary(free_field_spectral_density(0.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let g = random::complex_bumps(&mut rng, 1.0);
        let q = quadratic_form(&k, &vac, &g).unwrap();
        assert!(q.value >= -1e-8 * q.scale, "{q:?}");
    }
    assert!(matches!(
        quadratic_form(&homogeneous_kernel(-1.0, Complex64::new(-1.0, 0.0)), &vac, &g),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn quadratic_form_matches_iterated_oracle() {
    // (1/2π)∫dp |g̃(p)|² (1/2π)∫dq K̃(q) 2πρ(p-q), K̃ = 2θ(q), massless ρ = ω/(4π²)
    let g = real_g();
    let k = homogeneous_kernel(-1.0, Complex64::new(1.0 / PI, 0.0));
    let vac = TwoPointData::stationary(free_field_spectral_density(0.0).unwrap());
    let q = quadratic_form(&k, &vac, &g).unwrap();
    let gs = g.sample(4097).unwrap();
    let quad = Quadrature::relative(1e-12, 0.0);
    let oracle = quad
        .integrate_tail(
            |p| {
                // (1/2π)∫ 2θ(q) · 2πρ(p - q) dq
                let inner = quad
                    .integrate(|qq| Complex64::new(2.0 * (p - qq) / (4.0 * PI * PI), 0.0), 0.0, p)
                    .unwrap()
                    .value
                    .re;
                Complex64::new(gs.fourier_at(p).norm_sqr() * inner / (2.0 * PI), 0.0)
            },
            0.0,
            2.0,
            gs.resolvable_frequency(),
            &[],
        )
        .unwrap()
        .value
        .re;
    assert!((q.value - oracle).abs() <= 1e-7 * oracle, "{} vs {oracle}", q.value);
}
