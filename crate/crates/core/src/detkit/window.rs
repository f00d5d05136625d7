use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How offsets are scaled around the base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowScale {
    /// `λ_j = λ0 + x_j / n`.
    Bulk,
    /// `λ_j = λ0 + x_j n^{-2/3}` with `λ0 = ±2`.
    Edge,
}

/// Spectral arguments `Λ = λ0 I + X / n` (or the edge scaling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub m: usize,
    pub lambda0: f64,
    pub offsets: Vec<f64>,
    pub scale: WindowScale,
}

impl SpectralWindow {
    pub fn new(lambda0: f64, offsets: Vec<f64>, scale: WindowScale) -> Result<Self> {
        if offsets.is_empty() || offsets.len() % 2 != 0 {
            return Err(invalid(format!("expected an even, nonzero number of offsets, got {}", offsets.len())));
        }
        if offsets.iter().any(|x| !x.is_finite()) || !lambda0.is_finite() {
            return Err(invalid("non-finite spectral argument"));
        }
        if scale == WindowScale::Edge && lambda0.abs() != 2.0 {
            return Err(invalid("edge scaling requires lambda0 = ±2"));
        }
        Ok(Self { m: offsets.len() / 2, lambda0, offsets, scale })
    }

    pub fn bulk(lambda0: f64, offsets: Vec<f64>) -> Result<Self> {
        Self::new(lambda0, offsets, WindowScale::Bulk)
    }

    /// The scaled offset `x / n` or `x n^{-2/3}`.
    pub fn step(&self, n: usize, x: f64) -> f64 {
        match self.scale {
            WindowScale::Bulk => x / n as f64,
            WindowScale::Edge => x * (n as f64).powf(-2.0 / 3.0),
        }
    }

    /// Spectral arguments `λ_1..λ_{2m}` in offset order.
    pub fn lambdas(&self, n: usize) -> Vec<f64> {
        self.offsets.iter().map(|&x| self.lambda0 + self.step(n, x)).collect()
    }

    /// The same window expressed with bulk offsets `x n^{1/3}` when edge-scaled.
    pub fn bulk_offsets(&self, n: usize) -> Vec<f64> {
        match self.scale {
            WindowScale::Bulk => self.offsets.clone(),
            WindowScale::Edge => self.offsets.iter().map(|x| x * (n as f64).cbrt()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalings() {
        let w = SpectralWindow::bulk(0.5, vec![1.0, -1.0]).unwrap();
        assert_eq!(w.lambdas(10), vec![0.6, 0.4]);
        let e = SpectralWindow::new(2.0, vec![0.0, 8.0], WindowScale::Edge).unwrap();
        let l = e.lambdas(8);
        assert!((l[1] - 4.0).abs() < 1e-14);
        assert!((e.bulk_offsets(8)[1] - 16.0).abs() < 1e-12);
        assert!(SpectralWindow::new(1.0, vec![0.0, 1.0], WindowScale::Edge).is_err());
        assert!(SpectralWindow::bulk(0.0, vec![0.0]).is_err());
    }
}
