//! Closed-form limit predictors.

mod airy;
mod limits;
mod sine_kernel;

use serde::{Deserialize, Serialize};

pub use airy::{airy, airy_kernel, d2_edge_limit, d2_edge_trivial, predict_edge, AiryValue, AIRY_RANGE};
pub use limits::{
    crossover_log_normalizer, crossover_scale, d2_bulk_limit, f2_bulk_asymptotic, f2_outside_asymptotic,
    lambda_star, predict_d2, rho_sc, CrossoverBranch, CrossoverScale,
};
pub use sine_kernel::{d2m_bulk_limit, s_hat_2m, sinc_derivative, vandermonde};

/// Which limit a prediction comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionRegime {
    BulkSine,
    OutsideFactorized,
    Crossover,
    EdgeAiry,
    EdgeTrivial,
}

impl PredictionRegime {
    pub fn label(&self) -> &'static str {
        match self {
            Self::BulkSine => "bulk_sine",
            Self::OutsideFactorized => "outside_factorized",
            Self::Crossover => "crossover",
            Self::EdgeAiry => "edge_airy",
            Self::EdgeTrivial => "edge_trivial",
        }
    }
}

/// A limiting value together with the domain it was derived for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub regime: PredictionRegime,
    pub value: f64,
    pub valid_for: String,
}
