use super::{QuadratureRule, QuadratureSpec};
use crate::ensemble::b2 as coupling_b2;
use crate::saddle::solve_alpha;

/// Default Gauss–Legendre nodes per panel.
pub const DEFAULT_NODES: usize = 16;

/// Recommends a contour and truncation.
///
/// `γ = λ0/2` inside the bulk window `λ0² < 4 - 4b2²`, otherwise `γ = αλ0`;
/// on the boundary, where the α bisection has no interior root, `γ = λ0/2`.
/// `R = max(4, √(64 ln 10 / n) + |λ0| + 2)` keeps the tail `e^{-nR²/4}`
/// below `1e-16`.
pub fn contour_advisor(n: usize, p: f64, lambda0: f64) -> crate::Result<QuadratureSpec> {
    let b2 = coupling_b2(n, p)?;
    let disc = 4.0 - 4.0 * b2 * b2 - lambda0 * lambda0;
    let gamma = if disc > 0.0 {
        lambda0 / 2.0
    } else {
        solve_alpha(b2, lambda0).map(|s| s.alpha * lambda0).unwrap_or(lambda0 / 2.0)
    };
    let truncation = 4f64.max((64.0 * 10f64.ln() / n as f64).sqrt() + lambda0.abs() + 2.0);
    Ok(QuadratureSpec { truncation, nodes: DEFAULT_NODES, rule: QuadratureRule::GaussLegendreTensor, contour_shift: gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_choices() {
        assert_eq!(contour_advisor(100, 8.0, 0.0).unwrap().contour_shift, 0.0);
        assert!((contour_advisor(1_000_000, 8.0, 1.0).unwrap().contour_shift - 0.5).abs() < 1e-15);
        let spec = contour_advisor(1000, 1.5, 0.5).unwrap();
        let b2 = coupling_b2(1000, 1.5).unwrap();
        let alpha = solve_alpha(b2, 0.5).unwrap().alpha;
        assert!((spec.contour_shift - alpha * 0.5).abs() < 1e-15);
        let edge = contour_advisor(64, 64.0, 2.0).unwrap();
        assert_eq!(edge.contour_shift, 1.0);
        assert!(spec.truncation >= 4.0);
    }
}
