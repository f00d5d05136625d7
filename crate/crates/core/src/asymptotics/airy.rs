//! Airy function and kernel.
//!
//! Maclaurin series on `[-6, 6]`; Taylor stepping of `Ai'' = x Ai` from `-6`
//! to `-8`; the large-argument expansions beyond `6` and below `-8`, truncated
//! at their smallest term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{AsymptoticPrediction, PredictionRegime};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Supported argument range `|x| <= 25`.
pub const AIRY_RANGE: f64 = 25.0;

const AI0: f64 = 0.355_028_053_887_817_239;
const AIP0: f64 = -0.258_819_403_792_806_798;
const SERIES_EDGE: f64 = 6.0;
const OSCILLATORY_EDGE: f64 = -8.0;

/// `Ai` and `Ai'` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryValue<T: Real> {
    pub x: T,
    pub ai: T,
    pub ai_prime: T,
}

fn series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ a_k x^{3k}, g = Σ b_k x^{3k+1}
    let (mut a, mut b) = (1.0, 1.0);
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, x, 1.0);
    let mut xp = 1.0; // x^{3k}
    for k in 0..200 {
        let kf = k as f64;
        a /= (3.0 * kf + 2.0) * (3.0 * kf + 3.0);
        b /= (3.0 * kf + 3.0) * (3.0 * kf + 4.0);
        let xk = xp * x3;
        let tf = a * xk;
        let tg = b * xk * x;
        f += tf;
        fp += 3.0 * (kf + 1.0) * a * xp * x * x;
        g += tg;
        gp += (3.0 * kf + 4.0) * b * xk;
        xp = xk;
        if tf.abs() < 1e-18 * f.abs().max(1.0) && tg.abs() < 1e-18 * g.abs().max(1.0) && k > 2 {
            break;
        }
    }
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

/// Coefficients `u_k`, `v_k` of the large-argument expansions.
fn uv(k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..=k_max {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// Sums `Σ sign^k c_k / ζ^k` over the indices `start, start + 2, ...` (or all
/// when `step = 1`) up to the smallest term.
fn truncated(c: &[f64], zeta: f64, start: usize, step: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut j = 0;
    let mut k = start;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        let sign = if alternate && j % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * term;
        prev = term.abs();
        j += 1;
        k += step;
    }
    sum
}

fn positive_asymptotic(x: f64) -> (f64, f64) {
    let (u, v) = uv(40);
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let su = truncated(&u, -zeta, 0, 1, false);
    let sv = truncated(&v, -zeta, 0, 1, false);
    (e / x.powf(0.25) * su, -e * x.powf(0.25) * sv)
}

fn negative_asymptotic(x: f64) -> (f64, f64) {
    let z = -x;
    let (u, v) = uv(40);
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (s, c) = (zeta - PI / 4.0).sin_cos();
    let ue = truncated(&u, zeta, 0, 2, true);
    let uo = truncated(&u, zeta, 1, 2, true);
    let ve = truncated(&v, zeta, 0, 2, true);
    let vo = truncated(&v, zeta, 1, 2, true);
    let ai = (c * ue + s * uo) / (PI.sqrt() * z.powf(0.25));
    let aip = z.powf(0.25) / PI.sqrt() * (s * ve - c * vo);
    (ai, aip)
}

/// Taylor stepping of `y'' = x y` from `(x0, y, y')` to `x1`.
fn ode_step(mut x0: f64, mut y: f64, mut yp: f64, x1: f64) -> (f64, f64) {
    let steps = ((x1 - x0).abs() / 0.25).ceil().max(1.0) as usize;
    let h = (x1 - x0) / steps as f64;
    for _ in 0..steps {
        let mut c = vec![y, yp];
        for k in 0..40 {
            let prev = if k == 0 { 0.0 } else { c[k - 1] };
            c.push((x0 * c[k] + prev) / ((k + 2) as f64 * (k + 1) as f64));
        }
        let (mut ny, mut nyp) = (0.0, 0.0);
        for (k, ck) in c.iter().enumerate().rev() {
            ny = ny * h + ck;
            if k > 0 {
                nyp = nyp * h + k as f64 * ck;
            }
        }
        y = ny;
        yp = nyp;
        x0 += h;
    }
    (y, yp)
}

fn airy_f64(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() <= AIRY_RANGE) {
        return Err(Error::OutOfRange(x));
    }
    Ok(if x > SERIES_EDGE {
        positive_asymptotic(x)
    } else if x >= -SERIES_EDGE {
        series(x)
    } else if x >= OSCILLATORY_EDGE {
        let (y, yp) = series(-SERIES_EDGE);
        ode_step(-SERIES_EDGE, y, yp, x)
    } else {
        negative_asymptotic(x)
    })
}

/// `Ai(x)` and `Ai'(x)` for `|x| <= 25`.
pub fn airy<T: Real>(x: T) -> Result<AiryValue<T>> {
    let (ai, aip) = airy_f64(x.as_f64())?;
    Ok(AiryValue { x, ai: T::lit(ai), ai_prime: T::lit(aip) })
}

/// `(Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)`, with `Ai'(x)² - x Ai(x)²` on the
/// diagonal and its first-order expansion for `|x - y| < 1e-6`.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    let (a, ap) = airy_f64(x)?;
    let h = y - x;
    if h.abs() < 1e-6 {
        let m = 0.5 * (x + y);
        let (am, apm) = if h == 0.0 { (a, ap) } else { airy_f64(m)? };
        return Ok(apm * apm - m * am * am);
    }
    let (b, bp) = airy_f64(y)?;
    Ok((a * bp - ap * b) / (x - y))
}

/// `𝔸(x1 + 2c, x2 + 2c) / √(𝔸(x1 + 2c, x1 + 2c) 𝔸(x2 + 2c, x2 + 2c))`.
pub fn d2_edge_limit(x1: f64, x2: f64, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("c must be non-negative, got {c}")));
    }
    if x1 == x2 {
        return Ok(1.0);
    }
    let (y1, y2) = (x1 + 2.0 * c, x2 + 2.0 * c);
    let k = airy_kernel(y1, y2)?;
    let d1 = airy_kernel(y1, y1)?;
    let d2 = airy_kernel(y2, y2)?;
    if !(d1 > 0.0 && d2 > 0.0) {
        return Err(Error::Regime(format!("kernel diagonal not positive at {y1}, {y2}")));
    }
    Ok(k / (d1 * d2).sqrt())
}

/// Limit of `D_2(2I + n^{-2/3} X)` when `n^{2/3}/p → ∞`.
pub fn d2_edge_trivial(_x1: f64, _x2: f64) -> f64 {
    1.0
}

/// Edge prediction with `c = n^{2/3} / p`; `c = ∞` selects the trivial regime.
pub fn predict_edge(c: f64, x1: f64, x2: f64) -> Result<AsymptoticPrediction> {
    if c.is_infinite() && c > 0.0 {
        return Ok(AsymptoticPrediction {
            regime: PredictionRegime::EdgeTrivial,
            value: d2_edge_trivial(x1, x2),
            valid_for: "λ0 = ±2, n^{2/3}/p → ∞".into(),
        });
    }
    Ok(AsymptoticPrediction {
        regime: PredictionRegime::EdgeAiry,
        value: d2_edge_limit(x1, x2, c)?,
        valid_for: format!("λ0 = ±2, n^{{2/3}}/p → {c}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_constants() {
        let g13 = statrs::function::gamma::gamma(1.0 / 3.0);
        let g23 = statrs::function::gamma::gamma(2.0 / 3.0);
        let v = airy(0.0f64).unwrap();
        assert!((v.ai - 3f64.powf(-2.0 / 3.0) / g23).abs() < 1e-12);
        assert!((v.ai_prime + 3f64.powf(-1.0 / 3.0) / g13).abs() < 1e-12);
    }

    #[test]
    fn reference_values() {
        // 25-digit reference values
        let cases: [(f64, f64, f64); 4] = [
            (1.0, 0.135_292_416_312_881_4, -0.159_147_441_296_793_2),
            (-1.0, 0.535_560_883_292_352_1, -0.010_160_567_116_645_2),
            (-10.0, 0.040_241_238_486_443_19, 0.996_265_044_132_790_1),
            (10.0, 1.104_753_255_289_868_6e-10, -3.520_633_676_738_923_6e-10),
        ];
        for (x, ai, aip) in cases {
            let v = airy(x).unwrap();
            assert!((v.ai - ai).abs() < 1e-11, "Ai({x}) = {}", v.ai);
            assert!((v.ai_prime - aip).abs() < 1e-10, "Ai'({x}) = {}", v.ai_prime);
        }
        assert!(airy(26.0).is_err());
    }

    #[test]
    fn methods_agree_in_overlaps() {
        for k in 0..=40 {
            let x = 5.0 + 2.0 * k as f64 / 40.0;
            let (a, ap) = series(x);
            let (b, bp) = positive_asymptotic(x);
            assert!((a - b).abs() < 1e-10 && (ap - bp).abs() < 1e-10, "x={x}");
            let (ode, odep) = ode_step(-6.0, series(-6.0).0, series(-6.0).1, -x - 2.0);
            let (asy, asyp) = negative_asymptotic(-x - 2.0);
            assert!((ode - asy).abs() < 1e-10 && (odep - asyp).abs() < 1e-10, "x={}", -x - 2.0);
        }
    }

    #[test]
    fn satisfies_the_ode() {
        let h = 1e-2;
        let mut x = -10.0;
        while x <= 5.0 {
            let f = |t: f64| airy(t).unwrap().ai;
            let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
            assert!((d2 - x * f(x)).abs() < 1e-6, "x={x}");
            x += 0.37;
        }
        let a = |t: f64| airy(t).unwrap().ai;
        assert!(a(5.0) < a(4.0) && a(4.0) < a(3.0) && a(5.0) > 0.0);
    }

    #[test]
    fn kernel_properties() {
        for &(x, y) in &[(0.3, -1.2), (-4.0, 1.5), (2.0, 2.5)] {
            assert_eq!(airy_kernel(x, y).unwrap(), airy_kernel(y, x).unwrap());
        }
        let mut x = -5.0;
        while x <= 2.0 {
            let d = airy_kernel(x, x).unwrap();
            assert!(d > 0.0);
            let eps = 1e-5;
            let rich = 2.0 * airy_kernel(x, x + eps / 2.0).unwrap() - airy_kernel(x, x + eps).unwrap();
            let centered = 0.5 * (airy_kernel(x, x + eps).unwrap() + airy_kernel(x, x - eps).unwrap());
            assert!((centered - d).abs() < 1e-8, "x={x}");
            assert!((rich - d).abs() < 1e-8, "x={x}");
            let far = (airy_kernel(x, x + 1e-3).unwrap() - d).abs();
            let near = (airy_kernel(x, x + 1e-4).unwrap() - d).abs();
            assert!(near < 0.2 * far || far < 1e-12);
            x += 0.5;
        }
    }

    #[test]
    fn edge_limit_properties() {
        assert_eq!(d2_edge_limit(0.4, 0.4, 1.0).unwrap(), 1.0);
        let k = airy_kernel(0.0, 1.0).unwrap();
        let want = k / (airy_kernel(0.0, 0.0).unwrap() * airy_kernel(1.0, 1.0).unwrap()).sqrt();
        assert_eq!(d2_edge_limit(0.0, 1.0, 0.0).unwrap(), want);
        for &(a, b, c) in &[(0.0, 1.0, 0.0), (-2.0, 1.0, 0.5), (1.0, -3.0, 2.0)] {
            let v = d2_edge_limit(a, b, c).unwrap();
            assert!(v > 0.0 && v <= 1.0);
            assert_eq!(v, d2_edge_limit(b, a, c).unwrap());
        }
        assert_eq!(predict_edge(f64::INFINITY, 0.0, 1.0).unwrap().regime, PredictionRegime::EdgeTrivial);
    }
}
