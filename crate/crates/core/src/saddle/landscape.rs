use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{normal_pair, substream};
use crate::error::{invalid, Result};
use crate::scalar::{c, Real};

/// A point `(t1, t2, s)` of the real landscape with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint<T: Real> {
    pub t1: T,
    pub t2: T,
    pub s: T,
    pub b2: T,
    pub lambda0: T,
    pub alpha: T,
}

/// `h_α = (log A - t1² - t2² - s² - ((1-α)/α)² b2² - 2α(1-α)λ0²) / 2` with
/// `A = (b2 s - t1 t2 + α²λ0²)² + α²λ0²(t1 + t2)²`; `-∞` when `A = 0`.
pub fn h_alpha<T: Real>(pt: &LandscapePoint<T>) -> T {
    let LandscapePoint { t1, t2, s, b2, lambda0, alpha } = *pt;
    let al2 = alpha * alpha * lambda0 * lambda0;
    let u = b2 * s - t1 * t2 + al2;
    let a = u * u + al2 * (t1 + t2) * (t1 + t2);
    if a == T::zero() {
        return T::neg_infinity();
    }
    let r = (T::one() - alpha) / alpha;
    let rest = t1 * t1 + t2 * t2 + s * s + r * r * b2 * b2 + c::<T>(2.0) * alpha * (T::one() - alpha) * lambda0 * lambda0;
    c::<T>(0.5) * (a.ln() - rest)
}

/// The upper bound `log(α / (1 - α)) - 1`.
pub fn h_alpha_bound<T: Real>(alpha: T) -> T {
    (alpha / (T::one() - alpha)).ln() - T::one()
}

/// Outcome of one equality family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub label: char,
    pub points: usize,
    /// Largest `|h_α - bound|` over the family.
    pub max_gap: f64,
    /// Perturbed points that failed to decrease strictly.
    pub non_strict: usize,
}

/// Outcome of [`verify_lemma2`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub samples: usize,
    pub violations: usize,
    /// Largest `h_α - bound` over the random samples.
    pub max_excess: f64,
    pub witness: Option<LandscapePoint<f64>>,
    pub families: Vec<FamilyReport>,
}

impl Lemma2Report {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.families.iter().all(|f| f.max_gap <= 1e-10 && f.non_strict == 0)
    }
}

const VIOLATION_TOL: f64 = 1e-12;
const BATCH: usize = 4096;

/// Random and grid verification of `h_α ≤ log(α/(1-α)) - 1`.
///
/// Samples are uniform in `[-half_width, half_width]^5 × [0.5, 0.99]`, drawn
/// in batches of 4096 with batch `k` on substream `k` of `seed`. Each equality
/// family (a)–(d) is instantiated on a 100-point parameter grid, and every
/// grid point is perturbed by `1e-3` in four random directions of `(t1, t2, s)`.
pub fn verify_lemma2(sample_count: usize, half_width: f64, seed: u64) -> Result<Lemma2Report> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(invalid("box half-width must be positive and finite"));
    }
    let batches = sample_count.div_ceil(BATCH);
    let per_batch: Vec<(usize, f64, Option<LandscapePoint<f64>>)> = (0..batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, k as u64);
            let count = BATCH.min(sample_count - k * BATCH);
            let mut violations = 0;
            let mut worst = f64::NEG_INFINITY;
            let mut witness = None;
            for _ in 0..count {
                let mut u = || half_width * (2.0 * rng.gen::<f64>() - 1.0);
                let (t1, t2, s, b2, lambda0) = (u(), u(), u(), u(), u());
                let alpha = 0.5 + 0.49 * rng.gen::<f64>();
                let pt = LandscapePoint { t1, t2, s, b2, lambda0, alpha };
                let excess = h_alpha(&pt) - h_alpha_bound(alpha);
                if excess > worst {
                    worst = excess;
                }
                if excess > VIOLATION_TOL {
                    violations += 1;
                    witness.get_or_insert(pt);
                }
            }
            (violations, worst, witness)
        })
        .collect();

    let mut report = Lemma2Report {
        samples: sample_count,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        witness: None,
        families: Vec::new(),
    };
    for (v, w, wit) in per_batch {
        report.violations += v;
        report.max_excess = report.max_excess.max(w);
        if report.witness.is_none() {
            report.witness = wit;
        }
    }
    let mut rng = substream(seed, u64::MAX);
    for (label, points) in [('a', family_a()), ('b', family_b()), ('c', family_c()), ('d', family_d())] {
        report.families.push(check_family(label, &points, &mut rng));
    }
    Ok(report)
}

fn check_family<R: Rng>(label: char, points: &[LandscapePoint<f64>], rng: &mut R) -> FamilyReport {
    let mut max_gap: f64 = 0.0;
    let mut non_strict = 0;
    for pt in points {
        let h0 = h_alpha(pt);
        max_gap = max_gap.max((h0 - h_alpha_bound(pt.alpha)).abs());
        for _ in 0..4 {
            let (g1, g2) = normal_pair(rng);
            let (g3, _) = normal_pair(rng);
            let norm = (g1 * g1 + g2 * g2 + g3 * g3).sqrt();
            let e = 1e-3 / norm;
            let moved = LandscapePoint { t1: pt.t1 + e * g1, t2: pt.t2 + e * g2, s: pt.s + e * g3, ..*pt };
            if !(h_alpha(&moved) < h0) {
                non_strict += 1;
            }
        }
    }
    FamilyReport { label, points: points.len(), max_gap, non_strict }
}

fn grid(lo: f64, hi: f64, k: usize, i: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (k - 1) as f64
}

/// `α = 1/2`, `t1 = -t2 = ±√(4 - 4b2² - λ0²)/2`, `s = b2`.
fn family_a() -> Vec<LandscapePoint<f64>> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            let rho = grid(0.1, 1.9, 10, i);
            let theta = grid(0.0, 2.0 * std::f64::consts::PI, 11, j);
            let (b2, lambda0) = (0.5 * rho * theta.cos(), rho * theta.sin());
            let t = (4.0 - 4.0 * b2 * b2 - lambda0 * lambda0).sqrt() / 2.0;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out.push(LandscapePoint { t1: sign * t, t2: -sign * t, s: b2, b2, lambda0, alpha: 0.5 });
        }
    }
    out
}

/// `α = 1/2`, `t1 = t2 = ±√(4 - 4b2² - λ0²)/2`, `s = -b2`, `b2 λ0 = 0`.
fn family_b() -> Vec<LandscapePoint<f64>> {
    (0..100)
        .map(|i| {
            let (b2, lambda0) = if i < 50 { (0.0, grid(-1.9, 1.9, 50, i)) } else { (grid(-0.95, 0.95, 50, i - 50), 0.0) };
            let t = (4.0 - 4.0 * b2 * b2 - lambda0 * lambda0).sqrt() / 2.0;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            LandscapePoint { t1: sign * t, t2: sign * t, s: -b2, b2, lambda0, alpha: 0.5 }
        })
        .collect()
}

/// `t = 0`, `s = b2(1-α)/α`, `α(1-α)λ0² + ((1-α)/α)² b2² = 1`.
fn family_c() -> Vec<LandscapePoint<f64>> {
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            let alpha = grid(0.55, 0.95, 10, i);
            let lambda0 = grid(-0.95, 0.95, 10, j) / (alpha * (1.0 - alpha)).sqrt();
            let r = alpha / (1.0 - alpha);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let b2 = sign * r * (1.0 - alpha * (1.0 - alpha) * lambda0 * lambda0).sqrt();
            out.push(LandscapePoint { t1: 0.0, t2: 0.0, s: b2 / r, b2, lambda0, alpha });
        }
    }
    out
}

/// `t = 0`, `s = -b2(1-α)/α`, `b2 = ±α/(1-α)`, `λ0 = 0`.
fn family_d() -> Vec<LandscapePoint<f64>> {
    (0..100)
        .map(|i| {
            let alpha = grid(0.55, 0.95, 100, i);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let b2 = sign * alpha / (1.0 - alpha);
            LandscapePoint { t1: 0.0, t2: 0.0, s: -sign, b2, lambda0: 0.0, alpha }
        })
        .collect()
}
