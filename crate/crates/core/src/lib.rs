//! Steady water waves over constant vorticity: laminar flows, dispersion,
//! Stokes-branch expansion coefficients, exchange-of-stability quantities,
//! a spectral eigenvalue oracle and parameter-plane region tracing.
//!
//! The closed-form modules are generic over [`Scalar`] (`f32` or `f64`);
//! the spectral oracle and the region mapper work in `f64`.

pub mod dispersion;
pub mod error;
pub mod expansion;
pub mod hyperbolic;
pub mod laminar;
pub mod oracle;
pub mod regions;
pub mod roots;
pub mod scalar;
pub mod stability;
pub mod verify;

pub use error::{Result, WaveError};
pub use scalar::Scalar;

pub type Flow = laminar::FlowParams<f64>;
pub type Flow32 = laminar::FlowParams<f32>;
pub type Dispersion = dispersion::DispersionSolution<f64>;
pub type Coefficients = expansion::ExpansionCoefficients<f64>;
pub type Branch = expansion::BranchState<f64>;
pub type Report = stability::StabilityReport<f64>;
pub type Report32 = stability::StabilityReport<f32>;
