use num_complex::Complex64;

use qiope::kernels::homogeneous_kernel;
use qiope::mesoscopic::{eta, riemann_sampling, MesoscopicConfig};
use qiope::sampling::{sampling_single, SamplingOptions};
use qiope::{Kernel, TestFunction};

fn config(kernel: Kernel) -> MesoscopicConfig {
    MesoscopicConfig {
        chi: TestFunction::bump(0.1, 0.7, 1.0).unwrap(),
        f: TestFunction::bump(0.2, 0.6, 1.0)
            .unwrap()
            .plus(&TestFunction::bump(-0.3, 0.4, 0.5).unwrap()),
        d: 1.0,
        lambdas: vec![0.5, 0.25, 0.125, 0.0625],
        kernel,
    }
}

fn kernels() -> Vec<Kernel> {
    vec![
        Kernel::constant(1.0),
        homogeneous_kernel(-0.5, Complex64::new(1.0, 0.0)),
        homogeneous_kernel(-1.0, Complex64::new(0.5, 0.0)),
        homogeneous_kernel(-1.5, Complex64::new(2.0, 0.0)),
    ]
}

#[test]
fn riemann_sum_is_supported_near_f() {
    for k in kernels() {
        let cfg = config(k);
        let (flo, fhi) = cfg.f.support();
        for &lambda in &cfg.lambdas {
            let big_f = riemann_sampling(&cfg, lambda).unwrap();
            for (s, v) in big_f.s().iter().zip(big_f.f()) {
                if *v != Complex64::new(0.0, 0.0) {
                    assert!(*s > flo - lambda && *s < fhi + lambda, "F_λ({s}) = {v} at λ = {lambda}");
                }
            }
        }
    }
}

#[test]
fn riemann_sum_equals_the_untruncated_sum() {
    for k in kernels() {
        let cfg = config(k);
        for &lambda in &cfg.lambdas {
            let big_f = riemann_sampling(&cfg, lambda).unwrap();
            // φ_λ on the same 201-point grid over (-λ, λ)
            let chi = cfg.chi.with_support(-1.0, 1.0).unwrap().scale(lambda).unwrap();
            let opts = SamplingOptions { s_points: 201, ..Default::default() };
            let phi = sampling_single(&cfg.kernel, &chi, &opts).unwrap();
            let step = lambda / 100.0;
            let first = (big_f.s()[0] / step).round() as i64;
            for (i, v) in big_f.f().iter().enumerate() {
                let j = first + i as i64;
                // every k with λ|k| ≤ 2, active or not
                let kmax = (2.0 / lambda).ceil() as i64 + 2;
                let full: Complex64 = (-kmax..=kmax)
                    .map(|k| {
                        let idx = j - 100 * k + 100;
                        if (0..=200).contains(&idx) {
                            phi.f()[idx as usize] * (lambda * cfg.f.value(lambda * k as f64).re)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .sum();
                assert_eq!(*v, full, "s index {j}, λ = {lambda}");
            }
        }
    }
}

#[test]
fn eta_is_real_and_positive() {
    for k in kernels() {
        let cfg = config(k);
        for &lambda in &cfg.lambdas {
            let e = eta(&cfg, lambda).unwrap();
            assert!(e.im.abs() <= 1e-10 * e.norm(), "{}: η = {e}", cfg.kernel.label());
            assert!(e.re > 0.0, "{}: η = {e}", cfg.kernel.label());
        }
    }
}
