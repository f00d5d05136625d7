//! The sparse weighted Erdős–Rényi law, its coupling constants, and sampling.
//!
//! A sample is `M = (d_jk w_jk)` with `d_jk = p^{-1/2}` with probability `p/n`
//! and `0` otherwise. Off-diagonal weights are complex Gaussians whose real
//! and imaginary parts have variance `1/2`; diagonal weights are real with
//! variance `1`.

mod coupling;
mod rng;
mod sampling;
mod spectrum;

pub use coupling::{b2, coupling_constants, CouplingSet};
pub use rng::{normal_pair, substream, Substream};
pub use sampling::{sample_matrix, EnsembleParams, HermitianMatrix};
pub use spectrum::{empirical_spectrum, empirical_spectrum_on, EmpiricalSpectrum, HistogramGrid};
