// `!(x > 0)` also rejects NaN; coefficient tables keep full digits
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod constants;
pub mod energy;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod interp;
pub mod kernels;
pub mod quad;
pub mod record;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations.
pub type Field64 = fields::Field<f64>;
pub type Domain64 = geometry::Domain<f64>;
pub type Kernel64 = kernels::RadialKernel<f64>;
pub type Estimate64 = energy::EnergyEstimate<f64>;

/// Single-precision instantiations.
pub type Field32 = fields::Field<f32>;
pub type Domain32 = geometry::Domain<f32>;
pub type Kernel32 = kernels::RadialKernel<f32>;
pub type Estimate32 = energy::EnergyEstimate<f32>;
