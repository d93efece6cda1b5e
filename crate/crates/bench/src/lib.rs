//! Fixed inputs shared by the benchmarks.

use qiope::testfn::random::{complex_bumps, real_bumps};
use qiope::TestFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn real_g() -> TestFunction {
    real_bumps(&mut ChaCha8Rng::seed_from_u64(7), 1.0, true)
}

pub fn complex_g() -> TestFunction {
    complex_bumps(&mut ChaCha8Rng::seed_from_u64(7), 1.0)
}
