use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{signed_log_det, LogSignedValue, SpectralWindow};
use crate::ensemble::{sample_matrix, EnsembleParams};
use crate::error::{invalid, Error, Result};
use crate::special::pairwise_sum;

/// Sample-index offset between the numerator and each denominator of `D_{2m}`.
///
/// The numerator uses indices `0..N`; the `k`-th distinct denominator
/// argument (in ascending order) uses `(k + 1) · STRIDE + 0..N`.
pub const DENOMINATOR_STREAM_STRIDE: u64 = 1 << 32;

/// Monte Carlo mean in log-signed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: LogSignedValue<f64>,
    pub std_error_rel: f64,
    pub n_samples: usize,
}

/// Ratio estimate of `D_{2m}` with first-order error propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DEstimate {
    pub value: f64,
    pub std_error: f64,
    pub numerator: Option<MCEstimate>,
    pub denominators: Vec<(f64, MCEstimate)>,
}

/// Estimates `F_{2m}(Λ)` from samples `0..n_samples`.
pub fn mc_estimate_f(params: &EnsembleParams, window: &SpectralWindow, n_samples: usize) -> Result<MCEstimate> {
    mc_estimate_lambdas(params, &window.lambdas(params.n), n_samples, 0)
}

/// Estimates `E ∏_j det(M - λ_j)` from samples `offset..offset + n_samples`.
///
/// Per-sample factors are multiplied in ascending `λ` order, so the result
/// does not depend on how the arguments are listed.
pub fn mc_estimate_lambdas(
    params: &EnsembleParams,
    lambdas: &[f64],
    n_samples: usize,
    offset: u64,
) -> Result<MCEstimate> {
    params.validate()?;
    if n_samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);

    let samples: Vec<LogSignedValue<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let m = sample_matrix(params, offset + i)?;
            sorted
                .iter()
                .try_fold(LogSignedValue::one(), |acc, &l| Ok(acc * signed_log_det(&m, l)?))
        })
        .collect::<Result<_>>()?;
    aggregate(&samples)
}

/// Log-sum-exp mean `exp(L*) · mean(phase_i exp(L_i - L*))` with the
/// relative standard error taken in the shifted linear domain.
pub(crate) fn aggregate(samples: &[LogSignedValue<f64>]) -> Result<MCEstimate> {
    let n = samples.len();
    let top = samples
        .iter()
        .filter(|s| !s.zero_flag)
        .map(|s| s.log_magnitude)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::DegenerateEstimate(n));
    }
    let shifted: Vec<Complex64> = samples
        .iter()
        .map(|s| if s.zero_flag { Complex64::new(0.0, 0.0) } else { s.phase * (s.log_magnitude - top).exp() })
        .collect();
    let mean = pairwise_sum(&shifted) / n as f64;
    let dev: Vec<f64> = shifted.iter().map(|y| (y - mean).norm_sqr()).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    let abs = mean.norm();
    let std_error_rel = if abs > 0.0 { (var / n as f64).sqrt() / abs } else { f64::INFINITY };
    let mut value = LogSignedValue::from_complex(mean);
    if !value.zero_flag {
        value.log_magnitude += top;
    }
    if shifted.iter().all(|y| y.im == 0.0) {
        value = value.into_real();
    }
    Ok(MCEstimate { mean: value, std_error_rel, n_samples: n })
}

/// Estimates `D_{2m}(Λ) = F(Λ) / (∏_j F(λ_j I))^{1/2m}`.
///
/// When all offsets coincide the ratio is `1` by definition and no sampling
/// is done. Denominators are estimated once per distinct argument.
pub fn mc_estimate_d(params: &EnsembleParams, window: &SpectralWindow, n_samples: usize) -> Result<DEstimate> {
    params.validate()?;
    let lambdas = window.lambdas(params.n);
    let two_m = lambdas.len();
    if window.offsets.iter().all(|&x| x == window.offsets[0]) {
        return Ok(DEstimate { value: 1.0, std_error: 0.0, numerator: None, denominators: Vec::new() });
    }
    let numerator = mc_estimate_lambdas(params, &lambdas, n_samples, 0)?;

    let mut distinct = lambdas.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut log_den = 0.0;
    let mut rel2 = numerator.std_error_rel.powi(2);
    let mut denominators = Vec::with_capacity(distinct.len());
    for (k, &l) in distinct.iter().enumerate() {
        let args = vec![l; two_m];
        let offset = (k as u64 + 1) * DENOMINATOR_STREAM_STRIDE;
        let est = mc_estimate_lambdas(params, &args, n_samples, offset)?;
        if est.std_error_rel >= 1.0 / 3.0 || est.mean.sign() <= 0.0 {
            return Err(Error::UnresolvedDenominator { lambda: l, rel_error: est.std_error_rel });
        }
        let mult = lambdas.iter().filter(|&&x| x == l).count() as f64;
        let w = mult / two_m as f64;
        log_den += w * est.mean.log_magnitude;
        rel2 += (w * est.std_error_rel).powi(2);
        denominators.push((l, est));
    }
    let value = numerator.mean.sign() * (numerator.mean.log_magnitude - log_den).exp();
    Ok(DEstimate { value, std_error: value.abs() * rel2.sqrt(), numerator: Some(numerator), denominators })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_closed_form() {
        let params = EnsembleParams::new(1, 1.0, 3).unwrap();
        let w = SpectralWindow::bulk(0.0, vec![0.0, 0.0]).unwrap();
        let est = mc_estimate_f(&params, &w, 20_000).unwrap();
        let v = est.mean.to_real();
        assert!((v - 1.0).abs() < 3.0 * est.std_error_rel * v);
        assert_eq!(est.mean.phase.re, 1.0);
    }

    #[test]
    fn coincident_arguments_give_positive_samples() {
        let params = EnsembleParams::new(6, 2.0, 4).unwrap();
        let w = SpectralWindow::bulk(0.4, vec![1.0, 1.0]).unwrap();
        let lambdas = w.lambdas(6);
        for i in 0..50 {
            let m = sample_matrix(&params, i).unwrap();
            let d = signed_log_det(&m, lambdas[0]).unwrap();
            assert_eq!((d * d).phase, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn aggregation_is_order_independent() {
        let params = EnsembleParams::new(5, 2.0, 8).unwrap();
        let samples: Vec<LogSignedValue<f64>> = (0..257)
            .map(|i| {
                let m = sample_matrix(&params, i).unwrap();
                signed_log_det(&m, 0.3).unwrap() * signed_log_det(&m, -0.2).unwrap()
            })
            .collect();
        let a = aggregate(&samples).unwrap();
        let mut rev = samples.clone();
        rev.reverse();
        rev.rotate_left(17);
        let b = aggregate(&rev).unwrap();
        assert!(a.mean.rel_diff(&b.mean) < 1e-12);
    }

    #[test]
    fn d_is_one_for_equal_offsets_and_symmetric() {
        let params = EnsembleParams::new(4, 2.0, 1).unwrap();
        let eq = SpectralWindow::bulk(0.2, vec![0.5, 0.5]).unwrap();
        assert_eq!(mc_estimate_d(&params, &eq, 10).unwrap().value, 1.0);

        let a = SpectralWindow::bulk(0.2, vec![1.0, -1.0]).unwrap();
        let b = SpectralWindow::bulk(0.2, vec![-1.0, 1.0]).unwrap();
        let da = mc_estimate_d(&params, &a, 2000).unwrap();
        let db = mc_estimate_d(&params, &b, 2000).unwrap();
        assert_eq!(da.value, db.value);
    }

    #[test]
    fn all_zero_samples_are_flagged() {
        let samples = vec![LogSignedValue::<f64>::zero(); 4];
        assert!(matches!(aggregate(&samples), Err(Error::DegenerateEstimate(4))));
    }
}
