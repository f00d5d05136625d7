use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{normal_pair, substream};
use crate::error::{invalid, Error, Result};
use crate::special::pairwise_sum;

/// Closed form versus Haar Monte Carlo for `∫ exp{z tr A U*BU} dU`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcizReport {
    pub closed_form: Complex64,
    pub estimate: Complex64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    /// Largest componentwise `|estimate - closed_form| / std_error`.
    pub z_score: f64,
    pub samples: usize,
}

const BATCH: usize = 4096;
/// Below this value of `|z| max|a| max|b|` the Schur-function series replaces
/// the determinant ratio.
const SERIES_RADIUS: f64 = 0.5;
const SERIES_DEGREE: usize = 40;
const DISTINCT_TOL: f64 = 1e-10;

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag R` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = DMatrix::from_fn(n, n, |_, _| {
        let (x, y) = normal_pair(rng);
        Complex64::new(x * scale, y * scale)
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn vandermonde(x: &[Complex64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for j in 0..x.len() {
        for k in j + 1..x.len() {
            v *= x[k] - x[j];
        }
    }
    v
}

fn check_distinct(label: &str, x: &[Complex64]) -> Result<()> {
    let scale = x.iter().map(|v| v.norm()).fold(1.0, f64::max);
    for j in 0..x.len() {
        for k in j + 1..x.len() {
            if (x[j] - x[k]).norm() <= DISTINCT_TOL * scale {
                return Err(Error::DegenerateEigenvalues(format!("{label}_{j} = {label}_{k} = {}", x[j])));
            }
        }
    }
    Ok(())
}

fn det(m: DMatrix<Complex64>) -> Complex64 {
    m.determinant()
}

/// `∏_{j<n} j! det[e^{z a_j b_k}] / (z^{(n²-n)/2} Δ(a) Δ(b))`, switching to the
/// Schur-function expansion `∏_{j<n} j! Σ_λ z^{|λ|} s_λ(a) s_λ(b) / ∏_i (λ_i+n-i)!`
/// for small `z`.
pub fn hciz_closed_form(a: &[Complex64], b: &[f64], z: Complex64) -> Result<Complex64> {
    let n = a.len();
    if b.len() != n || n == 0 {
        return Err(Error::Dimension(format!("{} eigenvalues of A vs {} of B", n, b.len())));
    }
    let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    check_distinct("a", a)?;
    check_distinct("b", &bc)?;
    let prefactor: f64 = (1..n).map(|j| (1..=j).product::<usize>() as f64).product();
    let size = z.norm() * a.iter().map(|v| v.norm()).fold(0.0, f64::max) * b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if size < SERIES_RADIUS {
        return Ok(prefactor * schur_series(a, &bc, z, n));
    }
    let num = det(DMatrix::from_fn(n, n, |j, k| (z * a[j] * b[k]).exp()));
    let zpow = z.powu(((n * n - n) / 2) as u32);
    Ok(prefactor * num / (zpow * vandermonde(a) * vandermonde(&bc)))
}

fn schur_series(a: &[Complex64], b: &[Complex64], z: Complex64, n: usize) -> Complex64 {
    // Bialternant with the same Vandermonde convention in numerator and denominator.
    let bialt = |x: &[Complex64], exps: &[usize]| det(DMatrix::from_fn(n, n, |j, k| x[j].powu(exps[k] as u32)));
    let delta: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
    let (da, db) = (bialt(a, &delta), bialt(b, &delta));
    let mut total = Complex64::new(0.0, 0.0);
    let mut lambda = vec![0usize; n];
    partitions(SERIES_DEGREE, n, 0, &mut lambda, &mut |lam| {
        let exps: Vec<usize> = (0..n).map(|i| lam[i] + n - 1 - i).collect();
        let weight: f64 = exps.iter().map(|&e| (1..=e).map(|v| v as f64).product::<f64>()).product();
        let deg: usize = lam.iter().sum();
        total += z.powu(deg as u32) * (bialt(a, &exps) / da) * (bialt(b, &exps) / db) / weight;
    });
    total
}

/// Visits every partition with at most `parts` parts and size at most `max`.
fn partitions(max: usize, parts: usize, idx: usize, lam: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if idx == parts {
        visit(lam);
        return;
    }
    let used: usize = lam[..idx].iter().sum();
    let cap = if idx == 0 { max } else { lam[idx - 1] };
    for v in 0..=cap.min(max - used) {
        lam[idx] = v;
        partitions(max, parts, idx + 1, lam, visit);
    }
    lam[idx] = 0;
}

/// Haar Monte Carlo estimate of `∫ exp{z tr A U*BU} dU` with componentwise
/// standard errors; batches use substreams `(seed, batch)`.
pub fn hciz_haar_mc(a: &DMatrix<Complex64>, b: &[f64], z: Complex64, samples: usize, seed: u64) -> Result<(Complex64, f64, f64)> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension(format!("A is {}x{}, B has {} entries", a.nrows(), a.ncols(), b.len())));
    }
    if samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let bm = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, b.iter().map(|&v| Complex64::new(v, 0.0))));
    let batches = samples.div_ceil(BATCH);
    let sums: Vec<[f64; 4]> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = substream(seed, batch as u64);
            let count = BATCH.min(samples - batch * BATCH);
            let mut vals = Vec::with_capacity(count);
            for _ in 0..count {
                let u = haar_unitary(n, &mut rng);
                let x = (z * (a * u.adjoint() * &bm * &u).trace()).exp();
                vals.push([x.re, x.im, x.re * x.re, x.im * x.im]);
            }
            let col = |c: usize| pairwise_sum(&vals.iter().map(|v| v[c]).collect::<Vec<_>>());
            [col(0), col(1), col(2), col(3)]
        })
        .collect();
    let col = |c: usize| pairwise_sum(&sums.iter().map(|v| v[c]).collect::<Vec<_>>());
    let nf = samples as f64;
    let (mr, mi) = (col(0) / nf, col(1) / nf);
    let var = |sq: f64, mean: f64| ((sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    let se_re = (var(col(2), mr) / nf).sqrt();
    let se_im = (var(col(3), mi) / nf).sqrt();
    Ok((Complex64::new(mr, mi), se_re, se_im))
}

/// Compares the closed form with Haar Monte Carlo for a normal `A` and real
/// diagonal `B`.
pub fn hciz_check(a: &DMatrix<Complex64>, b: &[f64], z: Complex64, samples: usize, seed: u64) -> Result<HcizReport> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
    }
    let comm = a * a.adjoint() - a.adjoint() * a;
    if comm.norm() > 1e-10 * a.norm().max(1.0).powi(2) {
        return Err(invalid("A must be normal"));
    }
    let (_, t) = a.clone().schur().unpack();
    let eig: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let closed_form = hciz_closed_form(&eig, b, z)?;
    let (estimate, se_re, se_im) = hciz_haar_mc(a, b, z, samples, seed)?;
    let score = |diff: f64, se: f64| if se > 0.0 { diff.abs() / se } else if diff.abs() < 1e-12 { 0.0 } else { f64::INFINITY };
    let diff = estimate - closed_form;
    Ok(HcizReport {
        closed_form,
        estimate,
        std_error_re: se_re,
        std_error_im: se_im,
        z_score: score(diff.re, se_re).max(score(diff.im, se_im)),
        samples,
    })
}
