use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qiope::kernels::homogeneous_kernel;
use qiope::sampling::{sampling_single, wigner, SamplingOptions, WignerGrid};
use qiope::testfn::random::{complex_bumps, real_bumps};
use qiope::{Kernel, TestFunction};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn hermitian_kernels() -> Vec<Kernel> {
    let mut ks: Vec<Kernel> = [-2.5, -1.5, -1.0, -0.5, 0.5]
        .iter()
        .map(|&b| homogeneous_kernel(b, one()))
        .collect();
    ks.push(Kernel::free_field_two_point(0.0).unwrap());
    ks.push(Kernel::free_field_two_point(1.0).unwrap());
    ks.push(Kernel::smooth_expr("exp(-s^2)").unwrap());
    ks
}

#[test]
fn sampling_functions_are_real_for_complex_g() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let gs: Vec<_> = (0..4).map(|_| complex_bumps(&mut rng, 1.0)).collect();
    // realness is pointwise, a coarse grid suffices
    let opts = SamplingOptions { s_points: 51, ..Default::default() };
    for k in hermitian_kernels() {
        for g in &gs {
            let f = sampling_single(&k, g, &opts).unwrap();
            assert!(f.max_imag() <= 1e-9 * f.max_abs(), "{}: Im f up to {:.2e}", k.label(), f.max_imag());
        }
    }
}

#[test]
fn sampling_functions_live_on_the_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for k in hermitian_kernels() {
        let d = 0.7;
        let g = real_bumps(&mut rng, d, true).shift(0.1);
        let (lo, hi) = g.support();
        let f = sampling_single(&k, &g, &SamplingOptions::default()).unwrap();
        let s = f.s();
        assert!(s.iter().all(|x| (lo..=hi).contains(x)), "{}: grid leaves the support", k.label());
        assert_eq!(f.f()[0], Complex64::new(0.0, 0.0));
        assert_eq!(*f.f().last().unwrap(), Complex64::new(0.0, 0.0));
    }
}

#[test]
fn parallel_and_serial_runs_agree_bitwise() {
    let g = complex_bumps(&mut ChaCha8Rng::seed_from_u64(33), 1.0);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let f = sampling_single(&homogeneous_kernel(-1.5, one()), &g, &SamplingOptions::default()).unwrap();
            let w = wigner(&g, &WignerGrid::default()).unwrap();
            (f.f().to_vec(), f.error_estimate, w.to_csv())
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn hudson_negativity_for_compact_bumps() {
    let mut gs = vec![
        TestFunction::standard_bump(),
        TestFunction::bump(0.2, 0.3, 1.0).unwrap(),
        TestFunction::mollified_polynomial(0.0, 0.8, vec![1.0, 0.5, -0.3]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    gs.extend((0..4).map(|_| complex_bumps(&mut rng, 1.0)));
    for g in &gs {
        let w = wigner(g, &WignerGrid::default()).unwrap();
        assert!(w.min().0 < -1e-4 * w.max(), "min {:.3e}, max {:.3e}", w.min().0, w.max());
    }
}
