use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{normal_pair, substream};
use crate::error::{invalid, Error, Result};

/// Parameters of the random matrix law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

impl EnsembleParams {
    pub fn new(n: usize, p: f64, seed: u64) -> Result<Self> {
        let params = Self { n, p, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !(self.p > 0.0) || self.p > self.n as f64 {
            return Err(invalid(format!("p must lie in (0, n], got {}", self.p)));
        }
        Ok(())
    }
}

/// Dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Wraps `m` after checking exact Hermitian symmetry.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        let n = m.nrows();
        for j in 0..n {
            for k in j..n {
                if m[(j, k)] != m[(k, j)].conj() {
                    return Err(invalid(format!("entry ({j},{k}) breaks Hermitian symmetry")));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.0[(j, k)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }
}

/// Draws sample `sample_index` of the ensemble.
///
/// Weights use stream `2 * sample_index` and the dilution pattern uses stream
/// `2 * sample_index + 1`, so the weight stream is the same for every `p`.
/// Entries are visited row by row over the upper triangle.
pub fn sample_matrix(params: &EnsembleParams, sample_index: u64) -> Result<HermitianMatrix> {
    params.validate()?;
    Ok(build(params, sample_index, params.p < params.n as f64))
}

fn build(params: &EnsembleParams, sample_index: u64, dilute: bool) -> HermitianMatrix {
    let n = params.n;
    let mut weights = substream(params.seed, 2 * sample_index);
    let mut dilution = substream(params.seed, 2 * sample_index + 1);
    let keep = params.p / n as f64;
    let on = params.p.recip().sqrt();
    let half = std::f64::consts::FRAC_1_SQRT_2;

    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let (g1, g2) = normal_pair(&mut weights);
            let d = if dilute {
                if dilution.gen::<f64>() < keep {
                    on
                } else {
                    0.0
                }
            } else {
                on
            };
            if j == k {
                m[(j, j)] = Complex64::new(d * g1, 0.0);
            } else {
                let z = Complex64::new(d * g1 * half, d * g2 * half);
                m[(j, k)] = z;
                m[(k, j)] = z.conj();
            }
        }
    }
    HermitianMatrix(m)
}
