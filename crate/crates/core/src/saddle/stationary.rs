use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::solve_alpha;
use crate::error::{Error, Result};

/// Which family a stationary point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaddleClass {
    BulkPair,
    Outside,
    Edge,
}

/// A stationary point of `f` with its value and Hessian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub t1: Complex64,
    pub t2: Complex64,
    pub s: f64,
    pub f_value: Complex64,
    pub hessian: [[Complex64; 3]; 3],
    pub classification: SaddleClass,
}

impl SaddlePoint {
    pub fn hessian_det(&self) -> Complex64 {
        to_matrix(&self.hessian).determinant()
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `f` on the principal branch; `None` when `b2 s - t1 t2 = 0`.
pub fn f_eval(t1: Complex64, t2: Complex64, s: Complex64, b2: f64, lambda0: f64) -> Option<Complex64> {
    let z = b2 * s - t1 * t2;
    if z == Complex64::new(0.0, 0.0) {
        return None;
    }
    let il = I * lambda0;
    Some(z.ln() - 0.5 * ((t1 + il).powi(2) + (t2 + il).powi(2) + s * s))
}

/// Holomorphic gradient `(∂_{t1}, ∂_{t2}, ∂_s) f`.
pub fn f_gradient(t1: Complex64, t2: Complex64, s: Complex64, b2: f64, lambda0: f64) -> [Complex64; 3] {
    let z = b2 * s - t1 * t2;
    let il = I * lambda0;
    [-t2 / z - (t1 + il), -t1 / z - (t2 + il), b2 / z - s]
}

/// Holomorphic Hessian of `f`.
pub fn f_hessian(t1: Complex64, t2: Complex64, s: Complex64, b2: f64, _lambda0: f64) -> [[Complex64; 3]; 3] {
    let z = b2 * s - t1 * t2;
    let z2 = z * z;
    let one = Complex64::new(1.0, 0.0);
    let h11 = -t2 * t2 / z2 - one;
    let h22 = -t1 * t1 / z2 - one;
    let h12 = -one / z - t1 * t2 / z2;
    let h13 = t2 * b2 / z2;
    let h23 = t1 * b2 / z2;
    let h33 = -(b2 * b2) / z2 - one;
    [[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]]
}

fn to_matrix(h: &[[Complex64; 3]; 3]) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| h[i][j])
}

const RESIDUAL_TOL: f64 = 1e-10;
const EDGE_TOL: f64 = 1e-12;

/// Stationary points of the `m = 1` integrand.
///
/// Bulk (`4 - 4b2² - λ0² > 0`): the pair `(±t* - iλ0/2, ∓t* - iλ0/2, b2)`,
/// plus `(±t*, ±t*, -b2)` when `b2 λ0 = 0`. Outside: `(-iαλ0, -iαλ0, d)` with
/// `d = (1-α) b2 / α`, plus `(0, 0, -d)` when `λ0 = 0`. On the boundary a
/// single degenerate point `(-iλ0/2, -iλ0/2, b2)` is returned. Each point is
/// polished by Newton's method on the analytic gradient.
pub fn stationary_points_m1(b2: f64, lambda0: f64) -> Result<Vec<SaddlePoint>> {
    let disc = 4.0 - 4.0 * b2 * b2 - lambda0 * lambda0;
    let mut seeds: Vec<(Complex64, Complex64, f64, SaddleClass)> = Vec::new();
    if disc.abs() <= EDGE_TOL {
        let t = Complex64::new(0.0, -lambda0 / 2.0);
        seeds.push((t, t, b2, SaddleClass::Edge));
    } else if disc > 0.0 {
        let ts = disc.sqrt() / 2.0;
        let shift = Complex64::new(0.0, -lambda0 / 2.0);
        for sign in [1.0, -1.0] {
            seeds.push((shift + sign * ts, shift - sign * ts, b2, SaddleClass::BulkPair));
        }
        if b2 * lambda0 == 0.0 {
            for sign in [1.0, -1.0] {
                seeds.push((shift + sign * ts, shift + sign * ts, -b2, SaddleClass::BulkPair));
            }
        }
    } else {
        let sol = solve_alpha(b2, lambda0)?;
        let t = Complex64::new(0.0, -sol.alpha * lambda0);
        let d = (1.0 - sol.alpha) * b2 / sol.alpha;
        seeds.push((t, t, d, SaddleClass::Outside));
        if lambda0 == 0.0 && d != 0.0 {
            seeds.push((t, t, -d, SaddleClass::Outside));
        }
    }
    seeds.into_iter().map(|(t1, t2, s, class)| polish(t1, t2, s, b2, lambda0, class)).collect()
}

fn residual(g: &[Complex64; 3]) -> f64 {
    g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn polish(t1: Complex64, t2: Complex64, s: f64, b2: f64, lambda0: f64, class: SaddleClass) -> Result<SaddlePoint> {
    let mut x = Vector3::new(t1, t2, Complex64::new(s, 0.0));
    let mut res = residual(&f_gradient(x[0], x[1], x[2], b2, lambda0));
    let mut iterations = 0;
    while res > 1e-14 && iterations < 20 && class != SaddleClass::Edge {
        let g = f_gradient(x[0], x[1], x[2], b2, lambda0);
        let h = to_matrix(&f_hessian(x[0], x[1], x[2], b2, lambda0));
        let Some(step) = h.lu().solve(&Vector3::new(-g[0], -g[1], -g[2])) else {
            break;
        };
        let trial = x + step;
        let trial_res = residual(&f_gradient(trial[0], trial[1], trial[2], b2, lambda0));
        if !(trial_res < res) {
            break;
        }
        x = trial;
        res = trial_res;
        iterations += 1;
    }
    if !(res < RESIDUAL_TOL) || x[2].im.abs() > RESIDUAL_TOL {
        return Err(Error::NewtonFailed { residual: res, iterations });
    }
    let s = Complex64::new(x[2].re, 0.0);
    let f_value = f_eval(x[0], x[1], s, b2, lambda0)
        .ok_or_else(|| Error::SingularContour(format!("stationary point ({}, {}, {})", x[0], x[1], s.re)))?;
    Ok(SaddlePoint {
        t1: x[0],
        t2: x[1],
        s: s.re,
        f_value,
        hessian: f_hessian(x[0], x[1], s, b2, lambda0),
        classification: class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f` on the branch of the logarithm continuous around `x0`, so finite
    /// differences never straddle the principal cut.
    fn f_local(v: [Complex64; 3], x0: [Complex64; 3], b2: f64, lambda0: f64) -> Complex64 {
        let z = |w: [Complex64; 3]| b2 * w[2] - w[0] * w[1];
        let quad = f_eval(v[0], v[1], v[2], b2, lambda0).unwrap() - z(v).ln();
        (z(v) / z(x0)).ln() + z(x0).ln() + quad
    }

    fn fd_gradient(p: &SaddlePoint, b2: f64, lambda0: f64) -> [Complex64; 3] {
        let h = 1e-6;
        let x = [p.t1, p.t2, Complex64::new(p.s, 0.0)];
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for k in 0..3 {
            let (mut a, mut b) = (x, x);
            a[k] += h;
            b[k] -= h;
            out[k] = (f_local(a, x, b2, lambda0) - f_local(b, x, b2, lambda0)) / (2.0 * h);
        }
        out
    }

    fn fd_hessian(p: &SaddlePoint, b2: f64, lambda0: f64) -> [[Complex64; 3]; 3] {
        let h = 1e-4;
        let x = [p.t1, p.t2, Complex64::new(p.s, 0.0)];
        let f = |v: [Complex64; 3]| f_local(v, x, b2, lambda0);
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let shift = |si: f64, sj: f64| {
                    let mut v = x;
                    v[i] += si * h;
                    v[j] += sj * h;
                    f(v)
                };
                out[i][j] = (shift(1.0, 1.0) - shift(1.0, -1.0) - shift(-1.0, 1.0) + shift(-1.0, -1.0)) / (4.0 * h * h);
            }
        }
        out
    }

    #[test]
    fn gue_bulk_pair() {
        let pts = stationary_points_m1(0.0, 0.0).unwrap();
        assert_eq!(pts.len(), 4);
        let p = &pts[0];
        assert!((p.t1 - 1.0).norm() < 1e-14 && (p.t2 + 1.0).norm() < 1e-14);
        assert!((p.hessian_det() + 4.0).norm() < 1e-8);
        assert!((p.f_value + 1.0).norm() < 1e-14);
    }

    #[test]
    fn bulk_value_and_determinant() {
        let (b2, lambda0) = (-0.4, 0.9);
        let disc = 4.0 - 4.0 * b2 * b2 - lambda0 * lambda0;
        for p in stationary_points_m1(b2, lambda0).unwrap() {
            assert!((p.hessian_det() + disc).norm() < 1e-8);
            let want = b2 * b2 / 2.0 + lambda0 * lambda0 / 2.0 - 1.0;
            assert!((p.f_value - want).norm() < 1e-12);
            assert!(residual(&fd_gradient(&p, b2, lambda0)) < 1e-8);
        }
    }

    #[test]
    fn outside_point_matches_finite_differences() {
        for (b2, lambda0) in [(0.0, 8f64.sqrt()), (-0.5, 2.5), (-3.0, 0.0)] {
            for p in stationary_points_m1(b2, lambda0).unwrap() {
                assert_eq!(p.classification, SaddleClass::Outside);
                let r = residual(&fd_gradient(&p, b2, lambda0));
                assert!(r < 1e-8, "{b2} {lambda0} {r} {p:?}");
                let fd = fd_hessian(&p, b2, lambda0);
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((fd[i][j] - p.hessian[i][j]).norm() < 1e-6, "{i}{j}");
                    }
                }
                assert!(p.hessian_det().re < 0.0);
            }
        }
    }

    #[test]
    fn outside_determinant_closed_form() {
        let (b2, lambda0) = (-0.5, 2.5);
        let a = solve_alpha(b2, lambda0).unwrap().alpha;
        let r = (1.0 - a) / a;
        let want = -(2.0 * a - 1.0) / (a * a) * (a * (1.0 - a) * (2.0 * a - 1.0) * lambda0 * lambda0 + 2.0 * b2 * b2 * r * r);
        let p = &stationary_points_m1(b2, lambda0).unwrap()[0];
        assert!((p.hessian_det() - want).norm() < 1e-10);
    }

    #[test]
    fn boundary_is_edge() {
        let pts = stationary_points_m1(0.0, 2.0).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].classification, SaddleClass::Edge);
    }
}
