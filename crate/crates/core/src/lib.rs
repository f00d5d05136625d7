//! Numerical laboratory for correlation functions of characteristic
//! polynomials of sparse weighted Erdős–Rényi matrices.
//!
//! The generic pieces (log-signed arithmetic, landscape functions, special
//! functions, Grassmann and exterior algebra) are parameterized over
//! [`Real`]; the `f64` aliases below are what the drivers use.

pub mod algebra;
pub mod asymptotics;
pub mod detkit;
pub mod ensemble;
pub mod error;
pub mod intrep;
pub mod saddle;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type LogSigned = detkit::LogSignedValue<f64>;
pub type Couplings = ensemble::CouplingSet<f64>;

pub type Landscape = saddle::LandscapePoint<f64>;
pub type OutsideSolution = saddle::OutsideRegimeSolution<f64>;
pub type Airy = asymptotics::AiryValue<f64>;
pub type Grassmann = algebra::GrassmannElement<num_complex::Complex64>;
pub type Exterior = algebra::ExteriorOperator<num_complex::Complex64>;
