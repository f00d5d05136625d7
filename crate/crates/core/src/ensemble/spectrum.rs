use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::sampling::{sample_matrix, EnsembleParams};
use crate::error::{invalid, Error, Result};

/// Uniform histogram grid `[lo, hi]` split into `bins` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramGrid {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for HistogramGrid {
    fn default() -> Self {
        Self { lo: -3.0, hi: 3.0, bins: 120 }
    }
}

/// Pooled eigenvalues of several samples with their histogram.
#[derive(Debug, Clone)]
pub struct EmpiricalSpectrum {
    pub grid: HistogramGrid,
    /// Sorted eigenvalues of all samples.
    pub eigenvalues: Vec<f64>,
    /// Probability mass per bin.
    pub mass: Vec<f64>,
    /// Mass below `grid.lo`.
    pub below: f64,
    /// Mass above `grid.hi`.
    pub above: f64,
}

impl EmpiricalSpectrum {
    /// Total mass, including both overflow cells.
    pub fn total_mass(&self) -> f64 {
        self.below + self.above + self.mass.iter().sum::<f64>()
    }

    /// Mass outside `[-r, r]`.
    pub fn mass_outside(&self, r: f64) -> f64 {
        let outside = self.eigenvalues.iter().filter(|x| x.abs() > r).count();
        outside as f64 / self.eigenvalues.len() as f64
    }

    /// Kolmogorov distance between the empirical CDF and `cdf`.
    pub fn kolmogorov_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let total = self.eigenvalues.len() as f64;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / total).abs().max((f - (i + 1) as f64 / total).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenvalue histogram over the default grid `[-3, 3]` with 120 bins.
pub fn empirical_spectrum(params: &EnsembleParams, n_samples: usize) -> Result<EmpiricalSpectrum> {
    empirical_spectrum_on(params, n_samples, HistogramGrid::default())
}

/// Eigenvalue histogram over `grid`, pooling samples `0..n_samples`.
pub fn empirical_spectrum_on(
    params: &EnsembleParams,
    n_samples: usize,
    grid: HistogramGrid,
) -> Result<EmpiricalSpectrum> {
    if params.n < 2 {
        return Err(invalid("spectrum requires n >= 2"));
    }
    if n_samples == 0 || grid.bins == 0 || !(grid.hi > grid.lo) {
        return Err(invalid("empty sample set or grid"));
    }
    let per_sample: Vec<Result<Vec<f64>>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| eigenvalues(sample_matrix(params, i)?.as_matrix()))
        .collect();
    let mut eigenvalues = Vec::with_capacity(n_samples * params.n);
    for values in per_sample {
        eigenvalues.extend(values?);
    }
    eigenvalues.sort_by(f64::total_cmp);

    let total = eigenvalues.len() as f64;
    let width = (grid.hi - grid.lo) / grid.bins as f64;
    let mut counts = vec![0usize; grid.bins];
    let (mut below, mut above) = (0usize, 0usize);
    for &x in &eigenvalues {
        if x < grid.lo {
            below += 1;
        } else if x >= grid.hi {
            above += 1;
        } else {
            let bin = (((x - grid.lo) / width) as usize).min(grid.bins - 1);
            counts[bin] += 1;
        }
    }
    Ok(EmpiricalSpectrum {
        grid,
        eigenvalues,
        mass: counts.into_iter().map(|c| c as f64 / total).collect(),
        below: below as f64 / total,
        above: above as f64 / total,
    })
}

/// Eigenvalues of a Hermitian matrix via nalgebra's symmetric eigen-solver.
pub(crate) fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let values = m.symmetric_eigenvalues();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolver("non-finite eigenvalue".into()));
    }
    Ok(values.iter().copied().collect())
}
