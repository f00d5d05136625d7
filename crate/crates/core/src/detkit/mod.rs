//! Overflow-safe determinant arithmetic and Monte Carlo estimation of
//! `F_{2m}(Λ) = E ∏_j det(M - λ_j)` and its normalized ratio `D_{2m}`.

mod logsigned;
mod lu;
mod montecarlo;
mod window;

pub use logsigned::LogSignedValue;
pub use lu::{signed_log_det, signed_log_det_general};
pub use montecarlo::{
    mc_estimate_d, mc_estimate_f, mc_estimate_lambdas, DEstimate, MCEstimate, DENOMINATOR_STREAM_STRIDE,
};
pub use window::{SpectralWindow, WindowScale};
