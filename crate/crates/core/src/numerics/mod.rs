//! Quadrature, Fourier transforms on sampled data, extrapolation and
//! finite-part integrals.

mod extrapolate;
mod finite_part;
mod quadrature;
mod spectral;

pub use extrapolate::{extrapolate_to_zero, Extrapolation};
pub use finite_part::{finite_part_integral, DEFAULT_SPLIT};
pub use quadrature::{integrate, Integral, Quadrature};
pub use spectral::{
    inverse_transform, spectral_transform, SampledFunction, Spectrum, DEFAULT_GRID_POINTS,
    DEFAULT_PADDING,
};
