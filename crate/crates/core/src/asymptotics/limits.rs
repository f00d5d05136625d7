use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{AsymptoticPrediction, PredictionRegime};
use crate::detkit::LogSignedValue;
use crate::ensemble::b2 as coupling_b2;
use crate::error::{Error, Result};
use crate::saddle::solve_alpha;
use crate::scalar::{c, Real};

/// Bulk threshold: `√(4 - 8/p)` for `p > 2`, else `0`.
pub fn lambda_star<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p:?}")));
    }
    let two = c::<T>(2.0);
    if p <= two {
        return Ok(T::zero());
    }
    Ok((c::<T>(4.0) - c::<T>(8.0) / p).sqrt())
}

/// Semicircle density `√(4 - λ²) / 2π` on `[-2, 2]`.
pub fn rho_sc<T: Real>(lambda: T) -> T {
    let r = c::<T>(4.0) - lambda * lambda;
    if r <= T::zero() {
        T::zero()
    } else {
        r.sqrt() / c::<T>(2.0 * PI)
    }
}

fn sinc(v: f64) -> f64 {
    if v.abs() < 1e-4 {
        1.0 - v * v / 6.0 + v.powi(4) / 120.0
    } else {
        v.sin() / v
    }
}

/// `sinc((x1 - x2) √(λ*² - λ0²) / 2)`.
pub fn d2_bulk_limit(lambda0: f64, x1: f64, x2: f64, p: f64) -> Result<f64> {
    let ls = lambda_star(p)?;
    if !(lambda0.abs() < ls) {
        return Err(Error::Regime(format!(
            "|λ0| = {} is not below λ*({p}) = {ls}; the limit is 1 (outside predictor)",
            lambda0.abs()
        )));
    }
    Ok(sinc((x1 - x2) * (ls * ls - lambda0 * lambda0).sqrt() / 2.0))
}

/// `D_2` limit for `(p, λ0)`: the sine kernel inside `(-λ*, λ*)`, `1` outside.
pub fn predict_d2(p: f64, lambda0: f64, x1: f64, x2: f64) -> Result<AsymptoticPrediction> {
    let ls = lambda_star(p)?;
    if lambda0.abs() < ls {
        Ok(AsymptoticPrediction {
            regime: PredictionRegime::BulkSine,
            value: d2_bulk_limit(lambda0, x1, x2, p)?,
            valid_for: format!("fixed p = {p}, |λ0| < λ* = {ls:.6}, n → ∞"),
        })
    } else {
        Ok(AsymptoticPrediction {
            regime: PredictionRegime::OutsideFactorized,
            value: 1.0,
            valid_for: format!("fixed p = {p}, |λ0| ≥ λ* = {ls:.6}, n → ∞"),
        })
    }
}

/// Leading-order `F_2` inside the finite-`n` window `λ0² < 4 - 4b2²`:
/// `2n exp{n(λ0² + b2² - 2)/2 + λ0(x1 + x2)/2} sin((x1 - x2)√(4 - 4b2² - λ0²)/2) / (x1 - x2)`.
pub fn f2_bulk_asymptotic(n: usize, p: f64, lambda0: f64, x1: f64, x2: f64) -> Result<LogSignedValue<f64>> {
    let b2 = coupling_b2(n, p)?;
    let disc = 4.0 - 4.0 * b2 * b2 - lambda0 * lambda0;
    if !(disc > 0.0) {
        return Err(Error::Regime(format!("λ0² = {} is not below 4 - 4b2² = {}", lambda0 * lambda0, 4.0 - 4.0 * b2 * b2)));
    }
    let nf = n as f64;
    let k = disc.sqrt() / 2.0;
    let factor = if x1 == x2 { k } else { ((x1 - x2) * k).sin() / (x1 - x2) };
    if factor == 0.0 {
        return Ok(LogSignedValue::zero());
    }
    let log = (2.0 * nf).ln() + nf * (lambda0 * lambda0 + b2 * b2 - 2.0) / 2.0 + lambda0 * (x1 + x2) / 2.0 + factor.abs().ln();
    Ok(LogSignedValue::from_log(factor.signum(), log))
}

/// Leading-order `F_2` outside the window.
///
/// For `λ0 ≠ 0`: `α² e^{nÂ + (1-α)λ0(x1+x2)} / ((2α-1)^{3/2} (2 - α(1-α)(3-2α)λ0²)^{1/2})`.
/// For `λ0 = 0`: `B^n e^{-n/2} B² (B + 1 + (-1)^n (B - 1)) / (B² - 1)^{3/2}` with
/// `B = |b2|`, the magnitude entering the stationary points `(0, 0, ±1)` of the
/// contour `Im t = 0`.
pub fn f2_outside_asymptotic(n: usize, p: f64, lambda0: f64, x1: f64, x2: f64) -> Result<LogSignedValue<f64>> {
    let b2 = coupling_b2(n, p)?;
    if !(lambda0 * lambda0 > 4.0 - 4.0 * b2 * b2) {
        return Err(Error::Regime(format!(
            "λ0² = {} is not above 4 - 4b2² = {}; use the bulk predictor",
            lambda0 * lambda0,
            4.0 - 4.0 * b2 * b2
        )));
    }
    let nf = n as f64;
    if lambda0 == 0.0 {
        let b = b2.abs();
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        let bracket = b + 1.0 + parity * (b - 1.0);
        let log = nf * b.ln() - nf / 2.0 + 2.0 * b.ln() - 1.5 * (b * b - 1.0).ln() + bracket.ln();
        return Ok(LogSignedValue::from_log(1.0, log));
    }
    let sol = solve_alpha(b2, lambda0)?;
    let a = sol.alpha;
    let tail = 2.0 - a * (1.0 - a) * (3.0 - 2.0 * a) * lambda0 * lambda0;
    if !(tail > 0.0) {
        return Err(Error::Regime(format!("Hessian factor 2 - α(1-α)(3-2α)λ0² = {tail} is not positive")));
    }
    let log = 2.0 * a.ln() + nf * sol.a_hat + (1.0 - a) * lambda0 * (x1 + x2)
        - 1.5 * (2.0 * a - 1.0).ln()
        - 0.5 * tail.ln();
    Ok(LogSignedValue::from_log(1.0, log))
}

/// Branches of the prefactor `Y_n` near `λ0² = 4 - 4b2²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverBranch {
    /// `δ > 0`, `nδ² → ∞`: `Y_n = n δ^{1/2}`.
    Inside,
    /// `nδ² → const`: `Y_n = C n^{3/4}`.
    Critical,
    /// `δ < 0`, `nδ² → ∞`: `Y_n = C (-δ)^{-3/2}`.
    Outside,
}

/// Scaling class of `Y_n`. Constants `C` are not predicted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverScale {
    pub branch: CrossoverBranch,
    /// Power of `n` in `Y_n`.
    pub n_power: f64,
    /// Power of `|δ|` in `Y_n`.
    pub delta_power: f64,
    /// `ln(n^{n_power} |δ|^{delta_power})`.
    pub log_scale: f64,
}

impl CrossoverScale {
    /// Exponent of `n` in `Y_n` along `δ = ±n^{-e}`.
    pub fn exponent_along(&self, e: f64) -> f64 {
        self.n_power - e * self.delta_power
    }
}

/// Classifies `δ_n` at size `n`: branch 2 when `nδ² ≤ 1`, otherwise by the
/// sign of `δ`.
pub fn crossover_scale(n: usize, delta: f64) -> CrossoverScale {
    let nf = n as f64;
    let (branch, n_power, delta_power) = if nf * delta * delta <= 1.0 {
        (CrossoverBranch::Critical, 0.75, 0.0)
    } else if delta > 0.0 {
        (CrossoverBranch::Inside, 1.0, 0.5)
    } else {
        (CrossoverBranch::Outside, 0.0, -1.5)
    };
    let log_delta = if delta_power == 0.0 { 0.0 } else { delta_power * delta.abs().ln() };
    CrossoverScale { branch, n_power, delta_power, log_scale: n_power * nf.ln() + log_delta }
}

/// `n(2 - 3b2² - δ)/2 + λ0(x1 + x2)/2`, the exponent that `Y_n` multiplies.
pub fn crossover_log_normalizer(n: usize, b2: f64, delta: f64, lambda0: f64, x1: f64, x2: f64) -> f64 {
    n as f64 * (2.0 - 3.0 * b2 * b2 - delta) / 2.0 + lambda0 * (x1 + x2) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_values() {
        assert_eq!(lambda_star(2.0f64).unwrap(), 0.0);
        assert_eq!(lambda_star(1.0f64).unwrap(), 0.0);
        assert!((lambda_star(8.0f64 / 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(lambda_star(1e9f64).unwrap() > 1.999999);
        assert!(lambda_star(0.0f64).is_err());
        assert!((lambda_star(8.0f32).unwrap() - 3f32.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn semicircle() {
        assert!((rho_sc(0.0) - 1.0 / PI).abs() < 1e-16);
        assert_eq!(rho_sc(2.0), 0.0);
        assert_eq!(rho_sc(-3.0), 0.0);
        let (x, w) = crate::special::gauss_legendre(200);
        // substitute λ = 2 sin θ to remove the square-root endpoints
        let mass: f64 = x.iter().zip(&w).map(|(t, w)| {
            let th = t * PI / 2.0;
            w * rho_sc(2.0 * th.sin()) * 2.0 * th.cos() * PI / 2.0
        }).sum();
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bulk_limit_values() {
        assert_eq!(d2_bulk_limit(0.0, 1.0, 1.0, 8.0).unwrap(), 1.0);
        let ls = 3f64.sqrt();
        let dx = 2.0 * PI / ls;
        assert!(d2_bulk_limit(0.0, dx, 0.0, 8.0).unwrap().abs() < 1e-15);
        // sin(√3)/√3 to 16 digits
        assert!((d2_bulk_limit(0.0, 2.0, 0.0, 8.0).unwrap() - 0.5698600991825139).abs() < 1e-15);
        assert!(matches!(d2_bulk_limit(1.8, 0.0, 1.0, 8.0), Err(Error::Regime(_))));
        assert_eq!(predict_d2(1.5, 0.0, 0.0, 1.0).unwrap().value, 1.0);
    }

    proptest! {
        #[test]
        fn bulk_limit_is_the_sine_kernel_at_large_p(l0 in -1.9f64..1.9, x1 in -5.0f64..5.0, x2 in -5.0f64..5.0) {
            // λ*(p) → 2, and √(4 - λ0²)/2 = πρ_sc(λ0)
            let a = sinc((x1 - x2) * PI * rho_sc(l0));
            let b = sinc((x1 - x2) * (4.0 - l0 * l0).sqrt() / 2.0);
            prop_assert!((a - b).abs() < 1e-12);
            let d = d2_bulk_limit(l0, x1, x2, 1e12).unwrap();
            prop_assert!((d - a).abs() < 1e-9);
            prop_assert!(d.abs() <= 1.0);
        }
    }

    #[test]
    fn bulk_asymptotic_shape() {
        let v = f2_bulk_asymptotic(100, 100.0, 0.5, 1.0, 1.0).unwrap();
        let direct = (200.0f64).ln() + 100.0 * (0.25 - 2.0) / 2.0 + 0.5 + (3.75f64).sqrt().ln() - 2f64.ln();
        assert!((v.log_magnitude - direct).abs() < 1e-12);
        let k = (3.75f64).sqrt() / 2.0;
        let zero = PI / k;
        let a = f2_bulk_asymptotic(100, 100.0, 0.5, zero * 0.999, 0.0).unwrap();
        let b = f2_bulk_asymptotic(100, 100.0, 0.5, zero * 1.001, 0.0).unwrap();
        assert_eq!(a.sign(), 1.0);
        assert_eq!(b.sign(), -1.0);
        assert!(f2_bulk_asymptotic(100, 1.5, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn outside_asymptotic_shape() {
        let n = 3200;
        let a = f2_outside_asymptotic(n, 8.0, 1.9, 1.0, -1.0).unwrap();
        let b = f2_outside_asymptotic(n, 8.0, 1.9, 3.0, -0.5).unwrap();
        let alpha = solve_alpha(coupling_b2(n, 8.0).unwrap(), 1.9).unwrap().alpha;
        assert!((b.log_magnitude - a.log_magnitude - (1.0 - alpha) * 1.9 * 2.5).abs() < 1e-9);
        let even = f2_outside_asymptotic(200, 1.5, 0.0, 0.0, 0.0).unwrap();
        let odd = f2_outside_asymptotic(201, 1.5, 0.0, 0.0, 0.0).unwrap();
        let be = coupling_b2(200, 1.5).unwrap().abs();
        let bo = coupling_b2(201, 1.5).unwrap().abs();
        let pe = 200.0 * be.ln() - 100.0 + 2.0 * be.ln() - 1.5 * (be * be - 1.0).ln() + (2.0 * be).ln();
        let po = 201.0 * bo.ln() - 100.5 + 2.0 * bo.ln() - 1.5 * (bo * bo - 1.0).ln() + 2f64.ln();
        assert!((even.log_magnitude - pe).abs() < 1e-9);
        assert!((odd.log_magnitude - po).abs() < 1e-9);
        assert!(f2_outside_asymptotic(100, 8.0, 0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn crossover_branches() {
        let n = 10_000usize;
        let nf = n as f64;
        let s = crossover_scale(n, nf.powf(-0.25));
        assert_eq!(s.branch, CrossoverBranch::Inside);
        assert!((s.exponent_along(0.25) - 0.875).abs() < 1e-15);
        assert!((s.log_scale - 0.875 * nf.ln()).abs() < 1e-9);
        let s = crossover_scale(n, nf.powf(-0.5));
        assert_eq!(s.branch, CrossoverBranch::Critical);
        assert_eq!(s.exponent_along(0.5), 0.75);
        let s = crossover_scale(n, -nf.powf(-0.25));
        assert_eq!(s.branch, CrossoverBranch::Outside);
        assert!((s.exponent_along(0.25) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn crossover_switches_at_the_comparison_rule() {
        // δ = 2 n^{-1/2} keeps nδ² = 4 > 1; δ = n^{-1/2}(1 - 1e-9) falls into branch 2
        for n in [100usize, 400, 1600] {
            let nf = n as f64;
            assert_eq!(crossover_scale(n, 2.0 / nf.sqrt()).branch, CrossoverBranch::Inside);
            assert_eq!(crossover_scale(n, -2.0 / nf.sqrt()).branch, CrossoverBranch::Outside);
            assert_eq!(crossover_scale(n, (1.0 - 1e-9) / nf.sqrt()).branch, CrossoverBranch::Critical);
        }
    }
}
