use num_complex::Complex64;

use super::GrassmannElement;
use crate::error::{invalid, Result};
use crate::special::gauss_hermite;

const HERMITE_NODES: usize = 80;

/// `|e^{y²} - (a/√π)∫ e^{2axy - a²x²} dx|` with the integral done by
/// Gauss–Hermite after `u = a x - Re y`.
pub fn hubbard_stratonovich_check(y: Complex64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(invalid(format!("a must be positive, got {a}")));
    }
    // (1/√π)∫ e^{2uy - u²} du with u = v + Re y
    let shift = y.re;
    let (nodes, weights) = gauss_hermite(HERMITE_NODES);
    let iy = y - shift;
    let sum: Complex64 = nodes.iter().zip(&weights).map(|(&v, &w)| w * (2.0 * v * iy).exp()).sum();
    let rhs = sum * (2.0 * shift * y - shift * shift).exp() / std::f64::consts::PI.sqrt();
    Ok(((y * y).exp() - rhs).norm())
}

/// `|e^{yt} - (a²/π)∫∫ e^{ay(u+iv) + at(u-iv) - a²u² - a²v²} du dv|` by a
/// tensor Gauss–Hermite rule.
pub fn hubbard_stratonovich_pair_check(y: Complex64, t: Complex64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(invalid(format!("a must be positive, got {a}")));
    }
    let (nodes, weights) = gauss_hermite(HERMITE_NODES);
    let i = Complex64::i();
    let mut rhs = Complex64::new(0.0, 0.0);
    for (&u, &wu) in nodes.iter().zip(&weights) {
        for (&v, &wv) in nodes.iter().zip(&weights) {
            rhs += wu * wv * (y * (u + i * v) + t * (u - i * v)).exp();
        }
    }
    rhs /= std::f64::consts::PI;
    Ok(((y * t).exp() - rhs).norm())
}

/// Both sides of the scalar Hubbard–Stratonovich identity for an even
/// Grassmann `y`: `(e^{y²}, (a/√π)∫ e^{-a²x²} Σ_k (2axy)^k/k! dx)`, the
/// right side from exact Gaussian moments.
pub fn hubbard_stratonovich_grassmann(
    y: &GrassmannElement<Complex64>,
    a: f64,
) -> Result<(GrassmannElement<Complex64>, GrassmannElement<Complex64>)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(invalid(format!("a must be positive, got {a}")));
    }
    if !y.is_even() || y.body() != Complex64::new(0.0, 0.0) {
        return Err(invalid("y must be even with zero free term"));
    }
    let n = y.generators();
    let lhs = y.mul(y)?.exp_nilpotent()?;

    let mut rhs = GrassmannElement::zero(n)?;
    let mut y_pow = GrassmannElement::one(n)?;
    let mut k = 0usize;
    let mut coeff = 1.0; // (2a)^k / k!
    while !y_pow.is_empty() {
        if k.is_multiple_of(2) {
            // (a/√π)∫ x^k e^{-a²x²} dx = (k-1)!! / (2a²)^{k/2}
            let mut moment = 1.0;
            for j in (1..k).step_by(2) {
                moment *= j as f64;
            }
            moment /= (2.0 * a * a).powi((k / 2) as i32);
            rhs = rhs.add(&y_pow.scale(Complex64::new(coeff * moment, 0.0)))?;
        }
        k += 1;
        coeff *= 2.0 * a / k as f64;
        y_pow = y_pow.mul(y)?;
    }
    Ok((lhs, rhs))
}
