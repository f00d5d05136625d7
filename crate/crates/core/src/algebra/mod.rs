//! Grassmann variables, Berezin integration, exterior products of operators,
//! the `A_{2m}` builder and the HCIZ formula, all in brute-force form so that
//! every identity can be checked term by term at desk scale.

mod a2m;
mod exterior;
mod grassmann;
mod hciz;
mod hs;

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::Num;

pub use a2m::{a2m_partitions, build_a2m, grassmann_a2m, A2mPartition};
pub use exterior::{exterior_power, grassmann_form, wedge_all, wedge_operators, wedge_via_tensor, ExteriorOperator, MultiIndex};
pub use grassmann::{berezin_integrate_full, grassmann_multiply, GrassmannElement, Monomial, MAX_GENERATORS};
pub use hciz::{haar_unitary, hciz_check, hciz_closed_form, hciz_haar_mc, HcizReport};
pub use hs::{hubbard_stratonovich_check, hubbard_stratonovich_grassmann, hubbard_stratonovich_pair_check};

/// Coefficient ring of the brute-force algebra: complex floats for numerics,
/// rationals for exact sign checks.
pub trait Coefficient: Clone + PartialEq + Debug + Num + Neg<Output = Self> + Send + Sync {}

impl<C: Clone + PartialEq + Debug + Num + Neg<Output = C> + Send + Sync> Coefficient for C {}

/// `k` as a ring element, by repeated addition of one.
pub(crate) fn from_count<C: Coefficient>(k: usize) -> C {
    let mut out = C::zero();
    for _ in 0..k {
        out = out + C::one();
    }
    out
}
