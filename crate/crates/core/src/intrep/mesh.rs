//! Saddle-centred integration boxes and graded Gauss–Legendre meshes.
//!
//! Each dominant maximum of `Re f` on the contour gets a box sized by line
//! scans (coordinate axes and principal axes of the real Hessian) out to the
//! level `n(Re f - max) = -DECAY`. Overlapping boxes are merged. Outside the
//! union the integrand is below `e^{-DECAY}` of its peak. Panel widths inside
//! a box follow an envelope of the local rate `n |∂f| + |x|` so that no panel
//! spans more than `PANEL_PHASE` radians of exponent variation.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::saddle::{f_eval, f_gradient, f_hessian, stationary_points_m1};
use crate::special::gauss_legendre;

pub(crate) const DECAY: f64 = 32.0;
const SAFETY: f64 = 1.1;
const PANEL_PHASE: f64 = 12.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Landscape {
    pub n: f64,
    pub b2: f64,
    pub lambda0: f64,
    pub gamma: f64,
    pub x_rate: f64,
    pub truncation: f64,
}

impl Landscape {
    fn args(&self, u: &[f64; 3]) -> (Complex64, Complex64, Complex64) {
        (Complex64::new(u[0], -self.gamma), Complex64::new(u[1], -self.gamma), Complex64::new(u[2], 0.0))
    }

    /// `n Re f` at the contour point over `u`.
    pub fn phi(&self, u: &[f64; 3]) -> f64 {
        let (t1, t2, s) = self.args(u);
        f_eval(t1, t2, s, self.b2, self.lambda0).map_or(f64::NEG_INFINITY, |f| self.n * f.re)
    }

    /// Local rates `n |∂_a f| + |x|`. The `Log z` part is capped at
    /// `n |∂_a z| / (|z_c| / 4)`: near zeros of `z` the factor `z^n` is a
    /// low-degree polynomial, not a fast oscillation.
    fn rates(&self, u: &[f64; 3], z_center: f64) -> [f64; 3] {
        let (t1, t2, s) = self.args(u);
        let il = Complex64::new(0.0, self.lambda0);
        let z = self.b2 * s - t1 * t2;
        let dz = [-t2, -t1, Complex64::new(self.b2, 0.0)];
        let dq = [t1 + il, t2 + il, s];
        let z_eff = z * (0.25 * z_center / z.norm()).max(1.0);
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = self.n * (dz[k] / z_eff - dq[k]).norm();
        }
        out[0] += self.x_rate;
        out[1] += self.x_rate;
        out
    }

    fn z_abs(&self, u: &[f64; 3]) -> f64 {
        let (t1, t2, s) = self.args(u);
        (self.b2 * s - t1 * t2).norm()
    }

    fn real_gradient(&self, u: &[f64; 3]) -> Vector3<f64> {
        let (t1, t2, s) = self.args(u);
        let g = f_gradient(t1, t2, s, self.b2, self.lambda0);
        Vector3::new(g[0].re, g[1].re, g[2].re)
    }

    fn real_hessian(&self, u: &[f64; 3]) -> Matrix3<f64> {
        let (t1, t2, s) = self.args(u);
        let h = f_hessian(t1, t2, s, self.b2, self.lambda0);
        Matrix3::from_fn(|i, j| h[i][j].re)
    }
}

/// Local maxima of `Re f` on the contour within `DECAY` of the largest one,
/// seeded by the stationary points and a coarse grid.
pub(crate) fn contour_maxima(ls: &Landscape) -> Vec<[f64; 3]> {
    let mut seeds: Vec<[f64; 3]> = match stationary_points_m1(ls.b2, ls.lambda0) {
        Ok(pts) => pts.iter().map(|p| [p.t1.re, p.t2.re, p.s]).collect(),
        Err(_) => Vec::new(),
    };
    let half = (ls.truncation / 2.0).min(3.0);
    let grid: Vec<f64> = (0..7).map(|k| -half + half * k as f64 / 3.0).collect();
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                seeds.push([a, b, c]);
            }
        }
    }
    let mut out: Vec<([f64; 3], f64)> = Vec::new();
    for seed in seeds {
        let c = ascend(ls, seed);
        let v = ls.phi(&c);
        if !v.is_finite() || ls.real_gradient(&c).norm() > 1e-8 {
            continue;
        }
        if !out.iter().any(|(o, _)| dist(o, &c) < 1e-6) {
            out.push((c, v));
        }
    }
    let top = out.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    out.into_iter().filter(|o| o.1 >= top - DECAY).map(|o| o.0).collect()
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

fn ascend(ls: &Landscape, start: [f64; 3]) -> [f64; 3] {
    let mut u = start;
    let mut val = ls.phi(&u);
    for _ in 0..200 {
        let g = ls.real_gradient(&u);
        if g.norm() < 1e-13 {
            break;
        }
        let h = -ls.real_hessian(&u);
        let newton = h.cholesky().map(|c| c.solve(&g));
        let mut step = newton.unwrap_or_else(|| g * 0.1);
        let mut accepted = false;
        for _ in 0..60 {
            let trial = [u[0] + step[0], u[1] + step[1], u[2] + step[2]];
            let tv = ls.phi(&trial);
            if tv >= val {
                u = trial;
                val = tv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    u
}

/// One-directional scan: distance to the decay level and rate samples
/// `(axis distance, rate)` per axis.
fn scan(ls: &Landscape, c: &[f64; 3], d: &Vector3<f64>, mut samples: Option<&mut [Vec<(f64, f64)>; 3]>) -> f64 {
    let base = (0.25 / ls.n.sqrt()).min(0.02);
    let z_center = ls.z_abs(c);
    let mut top = ls.phi(c);
    let mut r = 0.0;
    loop {
        r += base.max(0.01 * r);
        let u = [c[0] + r * d[0], c[1] + r * d[1], c[2] + r * d[2]];
        if u.iter().any(|v| v.abs() > ls.truncation) {
            return r;
        }
        let v = ls.phi(&u);
        top = top.max(v);
        if let Some(samples) = samples.as_deref_mut() {
            if v >= top - DECAY {
                let w = ls.rates(&u, z_center);
                for k in 0..3 {
                    samples[k].push(((u[k] - c[k]).abs(), w[k]));
                }
            }
        }
        if !(v >= top - DECAY) {
            return r;
        }
    }
}

/// A box with the data needed to grade its meshes.
#[derive(Debug, Clone)]
pub(crate) struct Region {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub centers: Vec<[f64; 3]>,
    pub samples: [Vec<(f64, f64)>; 3],
}

impl Region {
    fn overlaps(&self, o: &Region) -> bool {
        (0..3).all(|k| self.lo[k] <= o.hi[k] && o.lo[k] <= self.hi[k])
    }

    fn absorb(&mut self, o: Region) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(o.lo[k]);
            self.hi[k] = self.hi[k].max(o.hi[k]);
        }
        self.centers.extend(o.centers);
        for (k, s) in o.samples.into_iter().enumerate() {
            self.samples[k].extend(s);
        }
    }

    /// The region with `t1` and `t2` exchanged.
    pub fn mirrored(&self) -> Region {
        let sw = |a: [f64; 3]| [a[1], a[0], a[2]];
        Region {
            lo: sw(self.lo),
            hi: sw(self.hi),
            centers: self.centers.iter().map(|c| sw(*c)).collect(),
            samples: [self.samples[1].clone(), self.samples[0].clone(), self.samples[2].clone()],
        }
    }

    fn close_to(&self, o: &Region, tol: f64) -> bool {
        (0..3).all(|k| (self.lo[k] - o.lo[k]).abs() <= tol && (self.hi[k] - o.hi[k]).abs() <= tol)
    }

    fn symmetrize(&mut self) {
        let lo = self.lo[0].min(self.lo[1]);
        let hi = self.hi[0].max(self.hi[1]);
        self.lo[0] = lo;
        self.lo[1] = lo;
        self.hi[0] = hi;
        self.hi[1] = hi;
        let mut both = self.samples[0].clone();
        both.extend(self.samples[1].iter().copied());
        self.samples[0] = both.clone();
        self.samples[1] = both;
        let mirrored: Vec<[f64; 3]> = self.centers.iter().map(|c| [c[1], c[0], c[2]]).collect();
        self.centers.extend(mirrored);
    }
}

fn region_for(ls: &Landscape, c: [f64; 3]) -> Region {
    let mut samples: [Vec<(f64, f64)>; 3] = Default::default();
    let mut half = [0.0f64; 3];
    for k in 0..3 {
        let mut e = Vector3::zeros();
        e[k] = 1.0;
        let r = scan(ls, &c, &e, Some(&mut samples)).max(scan(ls, &c, &-e, Some(&mut samples)));
        half[k] = half[k].max(r);
    }
    let h = ls.real_hessian(&c);
    if h.iter().all(|v| v.is_finite()) {
        let eig = SymmetricEigen::new(h);
        let mut bbox = [0.0f64; 3];
        for j in 0..3 {
            let v: Vector3<f64> = eig.eigenvectors.column(j).into();
            let r = scan(ls, &c, &v, None).max(scan(ls, &c, &-v, None));
            for k in 0..3 {
                bbox[k] += (r * v[k]).powi(2);
            }
        }
        for k in 0..3 {
            half[k] = half[k].max(bbox[k].sqrt());
        }
    }
    let r = ls.truncation;
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for k in 0..3 {
        lo[k] = (c[k] - SAFETY * half[k]).max(-r);
        hi[k] = (c[k] + SAFETY * half[k]).min(r);
    }
    Region { lo, hi, centers: vec![c], samples }
}

/// Disjoint, mirror-consistent boxes covering every dominant maximum.
pub(crate) fn plan_regions(ls: &Landscape, centers: &[[f64; 3]]) -> Vec<Region> {
    let mut regions: Vec<Region> = centers.iter().map(|&c| region_for(ls, c)).collect();
    loop {
        let mut merged = false;
        'outer: for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                if regions[i].overlaps(&regions[j]) {
                    let o = regions.remove(j);
                    regions[i].absorb(o);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
        let tol = 1e-6 * ls.truncation;
    for r in regions.iter_mut() {
        if r.close_to(&r.mirrored(), tol) {
            r.symmetrize();
        }
    }
    regions
}

/// Monotone upper envelope of rate samples as a function of axis distance.
#[derive(Debug, Clone)]
struct Envelope(Vec<(f64, f64)>);

impl Envelope {
    fn new(mut s: Vec<(f64, f64)>) -> Self {
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut run = 0.0f64;
        for p in s.iter_mut() {
            run = run.max(p.1);
            p.1 = run;
        }
        Envelope(s)
    }

    fn at(&self, r: f64, fallback: f64) -> f64 {
        let Some(last) = self.0.last() else { return fallback };
        let idx = self.0.partition_point(|p| p.0 < r);
        if idx < self.0.len() {
            self.0[idx].1
        } else {
            last.1 * (r / last.0.max(1e-300)).max(1.0)
        }
    }
}

/// Nodes and weights along one axis.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AxisMesh {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Composite Gauss–Legendre on `[lo, hi]` with rate-graded panels.
    pub fn graded(lo: f64, hi: f64, centers: &[f64], samples: &[(f64, f64)], n: f64, per_panel: usize) -> Self {
        let env = Envelope::new(samples.to_vec());
        let len = hi - lo;
        let h_max = len / 4.0;
        let h_min = len * 1e-5;
        let near = |x: f64| centers.iter().map(|c| (x - c).abs()).fold(f64::INFINITY, f64::min);
        let fallback = n.sqrt();
        let mut breaks = vec![lo];
        let mut x = lo;
        while x < hi {
            let mut h = h_max;
            for _ in 0..3 {
                let r = near(x).max(near((x + h).min(hi)));
                h = (PANEL_PHASE / env.at(r, fallback)).clamp(h_min, h_max);
            }
            if hi - (x + h) < 0.3 * h {
                h = hi - x;
            }
            x += h;
            breaks.push(x.min(hi));
        }
        let (gx, gw) = gauss_legendre(per_panel);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            for (xi, wi) in gx.iter().zip(&gw) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        AxisMesh { nodes, weights }
    }

    /// Trapezoid rule with `count` points on `[-r, r]`.
    pub fn trapezoid(r: f64, count: usize) -> Self {
        let h = 2.0 * r / (count - 1) as f64;
        let nodes = (0..count).map(|k| -r + h * k as f64).collect();
        let weights = (0..count).map(|k| if k == 0 || k == count - 1 { h / 2.0 } else { h }).collect();
        AxisMesh { nodes, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_mesh_integrates_gaussian() {
        let n = 3200.0;
        let samples: Vec<(f64, f64)> = (1..200).map(|k| (k as f64 * 0.002, n * k as f64 * 0.002)).collect();
        let m = AxisMesh::graded(-0.5, 0.5, &[0.0], &samples, n, 16);
        let sum: f64 = m.nodes.iter().zip(&m.weights).map(|(x, w)| w * (-n * x * x / 2.0).exp()).sum();
        let want = (2.0 * std::f64::consts::PI / n).sqrt();
        assert!((sum / want - 1.0).abs() < 1e-13, "{sum} {want}");
    }

    #[test]
    fn bulk_regions_are_mirror_pairs() {
        let ls = Landscape { n: 400.0, b2: -0.5, lambda0: 0.0, gamma: 0.0, x_rate: 1.0, truncation: 5.0 };
        let centers = contour_maxima(&ls);
        assert_eq!(centers.len(), 4);
        let regions = plan_regions(&ls, &centers);
        assert_eq!(regions.len(), 4);
        let tol = 1e-6;
        for r in &regions {
            let m = r.mirrored();
            assert!(regions.iter().any(|o| o.close_to(&m, tol)));
        }
    }

    #[test]
    fn small_n_regions_merge() {
        let ls = Landscape { n: 2.0, b2: -0.5, lambda0: 0.3, gamma: 0.15, x_rate: 1.0, truncation: 10.0 };
        let regions = plan_regions(&ls, &contour_maxima(&ls));
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].lo[0], regions[0].lo[1]);
    }
}
