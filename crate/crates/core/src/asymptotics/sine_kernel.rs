//! The sine-kernel determinant ratio `Ŝ_{2m}`.
//!
//! `Ŝ_{2m}(X) = det[K(x_j - y_k)] / (Δ(x) Δ(y))` with `K(u) = sinc(cu)`,
//! `c = πρ_sc(λ0)`. Dividing by the Vandermondes is the same as replacing the
//! matrix by bivariate Newton divided differences
//! `D_{jk} = [x_1..x_j; y_1..y_k] K(x - y)`, which stay finite when offsets
//! coincide. They are computed without subtracting nearby values: for the
//! upper bidiagonal `Z` with the nodes on its diagonal, `[x_1..x_j] g` is the
//! `(1, j)` entry of `g(Z)`, and `K` is expanded in a Taylor series around
//! the centre pair `(x̄, ȳ)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::limits::rho_sc;
use crate::error::{Error, Result};
use crate::special::gauss_legendre;

/// `∏_{j<k} (y_k - y_j)`.
pub fn vandermonde(values: &[f64]) -> f64 {
    let mut prod = 1.0;
    for k in 0..values.len() {
        for j in 0..k {
            prod *= values[k] - values[j];
        }
    }
    prod
}

/// `d^q/dv^q (sin v / v) = ∫_0^1 t^q cos(vt + qπ/2) dt`.
pub fn sinc_derivative(q: usize, v: f64) -> f64 {
    if v.abs() <= 8.0 {
        // Σ_j v^j / j! · cos((q+j)π/2) / (q+j+1)
        let mut sum = 0.0;
        let mut pow = 1.0;
        for j in 0..120 {
            if j > 0 {
                pow *= v / j as f64;
            }
            let r = (q + j) % 4;
            let c = match r {
                0 => 1.0,
                2 => -1.0,
                _ => 0.0,
            };
            if c != 0.0 {
                sum += c * pow / (q + j + 1) as f64;
            }
            if j > 2 * v.abs() as usize + 20 && pow.abs() < 1e-18 {
                break;
            }
        }
        return sum;
    }
    let (x, w) = gauss_legendre(24);
    let panels = (v.abs() / 4.0).ceil() as usize;
    let h = 1.0 / panels as f64;
    let phase = q as f64 * PI / 2.0;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + 0.5 * h * xi;
            sum += 0.5 * h * wi * t.powi(q as i32) * (v * t + phase).cos();
        }
    }
    sum
}

/// `K^{(q)}(u) = c^q sinc^{(q)}(cu)`.
fn kernel_derivative(c: f64, q: usize, u: f64) -> f64 {
    c.powi(q as i32) * sinc_derivative(q, c * u)
}

/// Row `(1, ·)` of `(Z - centre)^i` for `i = 0..=order`.
fn bidiagonal_powers(nodes: &[f64], centre: f64, order: usize) -> Vec<Vec<f64>> {
    let m = nodes.len();
    let mut row = vec![0.0; m];
    row[0] = 1.0;
    let mut out = vec![row.clone()];
    for _ in 0..order {
        let mut next = vec![0.0; m];
        for j in 0..m {
            next[j] = row[j] * (nodes[j] - centre) + if j > 0 { row[j - 1] } else { 0.0 };
        }
        out.push(next.clone());
        row = next;
    }
    out
}

/// `[x_1..x_j; y_1..y_k] K(x - y)` for all `j, k`.
fn divided_difference_matrix(xs: &[f64], ys: &[f64], c: f64) -> DMatrix<f64> {
    let m = xs.len();
    let xbar = xs.iter().sum::<f64>() / m as f64;
    let ybar = ys.iter().sum::<f64>() / m as f64;
    let spread = xs.iter().map(|x| (x - xbar).abs()).chain(ys.iter().map(|y| (y - ybar).abs())).fold(0.0, f64::max);
    let order = (30.0 + 3.0 * c * spread).ceil().min(200.0) as usize;
    let px = bidiagonal_powers(xs, xbar, order);
    let py = bidiagonal_powers(ys, ybar, order);
    let a = xbar - ybar;
    let derivs: Vec<f64> = (0..=2 * order).map(|q| kernel_derivative(c, q, a)).collect();
    let mut inv_fact = vec![1.0; order + 1];
    for i in 1..=order {
        inv_fact[i] = inv_fact[i - 1] / i as f64;
    }
    DMatrix::from_fn(m, m, |j, k| {
        let mut sum = 0.0;
        for i in 0..=order {
            if px[i][j] == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for l in 0..=order {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                inner += sign * derivs[i + l] * inv_fact[l] * py[l][k];
            }
            sum += inv_fact[i] * px[i][j] * inner;
        }
        sum
    })
}

/// Offsets closer than this within a half use the divided-difference path.
const DIRECT_MIN_GAP: f64 = 0.25;

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn min_gap(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// `Ŝ_{2m}` for offsets `x_1..x_m, x_{m+1}..x_{2m}` at `λ0 ∈ (-2, 2)`.
///
/// Well-separated offsets use the determinant over Vandermondes directly;
/// coinciding or nearby offsets (gap below `0.25`) use divided differences.
pub fn s_hat_2m(offsets: &[f64], lambda0: f64) -> Result<f64> {
    if offsets.is_empty() || offsets.len() % 2 != 0 {
        return Err(Error::InvalidParameter(format!("need 2m offsets, got {}", offsets.len())));
    }
    if !(lambda0.abs() < 2.0) {
        return Err(Error::Regime(format!("λ0 = {lambda0} is outside (-2, 2)")));
    }
    if offsets.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("offsets must be finite".into()));
    }
    let m = offsets.len() / 2;
    let c = PI * rho_sc(lambda0);
    let (xs, ys) = offsets.split_at(m);
    let (xs, ys) = (sorted(xs), sorted(ys));
    if min_gap(&xs).min(min_gap(&ys)) >= DIRECT_MIN_GAP {
        let k = DMatrix::from_fn(m, m, |j, l| kernel_derivative(c, 0, xs[j] - ys[l]));
        return Ok(k.determinant() / (vandermonde(&xs) * vandermonde(&ys)));
    }
    Ok(divided_difference_matrix(&xs, &ys, c).determinant())
}

/// Bulk `D_{2m}` limit `Ŝ_{2m}(X) / Ŝ_{2m}(I)`.
pub fn d2m_bulk_limit(offsets: &[f64], lambda0: f64) -> Result<f64> {
    let zeros = vec![0.0; offsets.len()];
    Ok(s_hat_2m(offsets, lambda0)? / s_hat_2m(&zeros, lambda0)?)
}
