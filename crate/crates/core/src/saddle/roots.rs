use serde::{Deserialize, Serialize};

use crate::ensemble::b2 as coupling_b2;
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Stationary-point data for the outside regime `λ0² > 4 - 4b2²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutsideRegimeSolution<T: Real> {
    pub alpha: T,
    /// `Â = d²/2 + (1-α)λ0² + log(α/(1-α)) - 1` with `d = (1-α) b2 / α`.
    pub a_hat: T,
    /// `β = 2α - 1`.
    pub beta: T,
}

/// Left side of `α(1-α)λ0² + ((1-α)/α)² b2² - 1 = 0`, decreasing on `(1/2, 1)`.
fn alpha_equation<T: Real>(alpha: T, b2: T, lambda0: T) -> T {
    let r = (T::one() - alpha) / alpha;
    alpha * (T::one() - alpha) * lambda0 * lambda0 + r * r * b2 * b2 - T::one()
}

/// Bisection to the floating-point limit on `(lo, hi)` for a decreasing `g`.
fn bisect_decreasing<T: Real>(mut lo: T, mut hi: T, g: impl Fn(T) -> T) -> T {
    for _ in 0..400 {
        let mid = c::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    c::<T>(0.5) * (lo + hi)
}

/// Solves for `α ∈ (1/2, 1)` by bisection.
pub fn solve_alpha<T: Real>(b2: T, lambda0: T) -> Result<OutsideRegimeSolution<T>> {
    let half = c::<T>(0.5);
    if !(alpha_equation(half, b2, lambda0) > T::zero()) {
        return Err(Error::Regime(format!(
            "inside the bulk window: λ0²/4 + b2² ≤ 1 for b2 = {b2:?}, λ0 = {lambda0:?}"
        )));
    }
    let alpha = bisect_decreasing(half, T::one(), |a| alpha_equation(a, b2, lambda0));
    let d = (T::one() - alpha) * b2 / alpha;
    let a_hat = half * d * d + (T::one() - alpha) * lambda0 * lambda0 + (alpha / (T::one() - alpha)).ln() - T::one();
    Ok(OutsideRegimeSolution { alpha, a_hat, beta: c::<T>(2.0) * alpha - T::one() })
}

/// Solves `|b2| = β(1+β)/(1-β)` for `β ∈ [0, 1)`.
pub fn edge_beta<T: Real>(b2: T) -> Result<T> {
    let target = b2.abs();
    if !target.is_finite() {
        return Err(Error::NoRoot(format!("|b2| = {target:?}")));
    }
    if target == T::zero() {
        return Ok(T::zero());
    }
    let g = |beta: T| target - beta * (T::one() + beta) / (T::one() - beta);
    let beta = bisect_decreasing(T::zero(), T::one(), g);
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::NoRoot(format!("|b2| = {target:?}")));
    }
    Ok(beta)
}

/// Edge parameters `(β, |b2|)` for sparsity `p` at size `n`.
pub fn edge_parameters(n: usize, p: f64) -> Result<(f64, f64)> {
    let b2 = coupling_b2(n, p)?.abs();
    Ok((edge_beta(b2)?, b2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_solutions() {
        let s = solve_alpha(3.0f64, 0.0).unwrap();
        assert!((s.alpha - 0.75).abs() < 1e-13);
        let s = solve_alpha(-3.0f64, 0.0).unwrap();
        assert!((s.alpha - 0.75).abs() < 1e-13);
        let s = solve_alpha(0.0f64, 8f64.sqrt()).unwrap();
        assert!((s.alpha - (1.0 + 0.5f64.sqrt()) / 2.0).abs() < 1e-13);
        assert!((s.beta - (2.0 * s.alpha - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn residual_and_monotonicity() {
        let s = solve_alpha(0.5f64, 2.5).unwrap();
        assert!(alpha_equation(s.alpha, 0.5, 2.5).abs() < 1e-12);
        let mut prev = 0.5;
        for k in 0..20 {
            let lambda0 = 2.0 + 0.1 * k as f64;
            let a = solve_alpha(0.3f64, lambda0).unwrap().alpha;
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn bulk_window_is_rejected() {
        assert!(matches!(solve_alpha(0.1f64, 1.0), Err(Error::Regime(_))));
    }

    #[test]
    fn edge_beta_roundtrip() {
        assert_eq!(edge_beta(0.0f64).unwrap(), 0.0);
        let (beta, b2) = edge_parameters(1_000_000, 200.0).unwrap();
        assert!((beta * (1.0 + beta) / (1.0 - beta) - b2).abs() < 1e-12);
        // The first correction is β ≈ |b2|(1 - 2|b2|), so p = 200 sits 16% low.
        assert!((beta - 0.0844).abs() < 1e-3);
        let mut prev = f64::INFINITY;
        for p in [200.0, 2_000.0, 20_000.0, 200_000.0] {
            let (beta, _) = edge_parameters(1_000_000_000, p).unwrap();
            let gap = (beta * (p / 2.0).sqrt() - 1.0).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn single_precision_alpha() {
        let s = solve_alpha(3.0f32, 0.0).unwrap();
        assert!((s.alpha - 0.75).abs() < 1e-6);
    }
}
