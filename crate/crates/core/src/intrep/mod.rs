//! Finite-`n` evaluation of `F_2` and `D_2` through the exact `m = 1`
//! integral representation
//!
//! ```text
//! F_2 = C_n(X) · i e^{λ0(x1+x2)} / (x1 - x2)
//!       · ∫ (t1 - t2) e^{-i(x1 t1 + x2 t2)} e^{n f(t1, t2, s)} dt1 dt2 ds
//! ```
//!
//! with `C_n(X) = n (n/2π)^{3/2} e^{(x1² + x2²)/2n}`, integrated over the
//! horizontal contours `Im t1 = Im t2 = -γ` and real `s`.

mod advisor;
mod integrand;
mod mesh;
mod quadrature;

use serde::{Deserialize, Serialize};

pub use advisor::contour_advisor;
pub use integrand::{f_value, log_c_n, log_c_n_2m, IntegrandPoint, RepresentationConstants};
pub use quadrature::{
    quadrature_d2, quadrature_f2, quadrature_f2_confluent, D2Outcome, QuadratureOutcome, Representation,
    IMAG_RESIDUAL_TOL,
};

/// Integration rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Composite Gauss–Legendre on saddle-centred boxes; `nodes` per panel.
    GaussLegendreTensor,
    /// Uniform trapezoid on `[-R, R]^3`; `nodes` per axis.
    Trapezoid,
}

/// Truncation, rule, node budget and contour shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub truncation: f64,
    pub nodes: usize,
    pub rule: QuadratureRule,
    pub contour_shift: f64,
}

impl QuadratureSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(crate::error::invalid("truncation must be positive"));
        }
        if self.nodes < 16 {
            return Err(crate::error::invalid("at least 16 nodes are required"));
        }
        if !self.contour_shift.is_finite() {
            return Err(crate::error::invalid("contour shift must be finite"));
        }
        Ok(())
    }
}
