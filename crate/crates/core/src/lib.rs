pub mod error;
pub mod fps;
pub mod freefield;
pub mod kernels;
pub mod mesoscopic;
pub mod numerics;
pub mod positivity;
pub mod report;
pub mod sampling;
pub mod testfn;

pub use error::{Error, Result};
pub use kernels::{Kernel, SpectralMeasure};
pub use testfn::TestFunction;
