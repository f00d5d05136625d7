use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::saddle::f_eval;

/// A point `(t1, t2, s)` on the contour `Im t_j = -γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrandPoint {
    pub t1: Complex64,
    pub t2: Complex64,
    pub s: f64,
    pub contour_shift: f64,
}

impl IntegrandPoint {
    /// The point `(u1 - iγ, u2 - iγ, s)`.
    pub fn on_contour(u1: f64, u2: f64, s: f64, gamma: f64) -> Self {
        Self { t1: Complex64::new(u1, -gamma), t2: Complex64::new(u2, -gamma), s, contour_shift: gamma }
    }
}

/// `f = Log(b2 s - t1 t2) - ((t1 + iλ0)² + (t2 + iλ0)² + s²)/2`.
///
/// Only `e^{n f}` with integer `n` enters the representation, and
/// `e^{n Log z} = z^n` on every branch, so the principal logarithm is exact.
pub fn f_value(pt: &IntegrandPoint, b2: f64, lambda0: f64) -> Result<Complex64> {
    f_eval(pt.t1, pt.t2, Complex64::new(pt.s, 0.0), b2, lambda0)
        .ok_or_else(|| Error::SingularContour(format!("{pt:?}")))
}

/// `log C_n(X) = log n + (3/2) log(n / 2π) + (x1² + x2²) / 2n`.
pub fn log_c_n(n: usize, x1: f64, x2: f64) -> f64 {
    let nf = n as f64;
    nf.ln() + 1.5 * (nf / (2.0 * PI)).ln() + (x1 * x1 + x2 * x2) / (2.0 * nf)
}

/// `log C_n^{(2m)}(X) = m log π - ((4^m - 1)/2) log 2 + ((C(4m, 2m) - 1)/2) log(n/π) + Σ x_j² / 2n`.
///
/// Reduces to [`log_c_n`] at `m = 1`.
pub fn log_c_n_2m(n: usize, offsets: &[f64]) -> f64 {
    let m = offsets.len() / 2;
    let nf = n as f64;
    let binom = (1..=2 * m).fold(1.0, |acc, k| acc * (2 * m + k) as f64 / k as f64);
    let four_m = 4f64.powi(m as i32);
    m as f64 * PI.ln() - 0.5 * (four_m - 1.0) * 2f64.ln()
        + 0.5 * (binom - 1.0) * (nf / PI).ln()
        + offsets.iter().map(|x| x * x).sum::<f64>() / (2.0 * nf)
}

/// Prefactor data of the `m = 1` representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationConstants {
    pub log_c_n: f64,
    /// `λ0 (x1 + x2)`, the exponent of the external factor.
    pub shift_exponent: f64,
}

impl RepresentationConstants {
    pub fn new(n: usize, lambda0: f64, x1: f64, x2: f64) -> Self {
        Self { log_c_n: log_c_n(n, x1, x2), shift_exponent: lambda0 * (x1 + x2) }
    }

    pub fn c_n(&self) -> f64 {
        self.log_c_n.exp()
    }
}
