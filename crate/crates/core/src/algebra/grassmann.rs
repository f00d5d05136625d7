use std::collections::BTreeMap;

use super::{from_count, Coefficient};
use crate::error::{invalid, Error, Result};

/// Largest generator count accepted by the brute-force algebra.
pub const MAX_GENERATORS: usize = 12;

/// A monomial in canonical order `ψ̄_0 ψ_0 ψ̄_1 ψ_1 …`.
///
/// Bit `2j` marks `ψ̄_j` and bit `2j + 1` marks `ψ_j`; the monomial is the
/// product of the marked symbols taken in increasing bit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub u32);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_masks(psi_bar: u32, psi: u32) -> Self {
        let mut bits = 0;
        for j in 0..16 {
            bits |= ((psi_bar >> j) & 1) << (2 * j);
            bits |= ((psi >> j) & 1) << (2 * j + 1);
        }
        Monomial(bits)
    }

    /// Bitset of the `ψ̄` factors, bit `j` for `ψ̄_j`.
    pub fn psi_bar_mask(self) -> u32 {
        (0..16).fold(0, |acc, j| acc | (((self.0 >> (2 * j)) & 1) << j))
    }

    /// Bitset of the `ψ` factors, bit `j` for `ψ_j`.
    pub fn psi_mask(self) -> u32 {
        (0..16).fold(0, |acc, j| acc | (((self.0 >> (2 * j + 1)) & 1) << j))
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_even(self) -> bool {
        self.degree().is_multiple_of(2)
    }

    /// The product `self · other` as `(sign, monomial)`, or `None` when a
    /// symbol repeats.
    pub fn times(self, other: Monomial) -> Option<(bool, Monomial)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // Moving each symbol of `other` left past the larger symbols of `self`.
        let mut swaps = 0;
        let mut rest = other.0;
        while rest != 0 {
            let bit = rest.trailing_zeros();
            swaps += (self.0 >> bit).count_ones();
            rest &= rest - 1;
        }
        Some((swaps % 2 == 1, Monomial(self.0 | other.0)))
    }
}

/// Element of the Grassmann algebra on `N` pairs `ψ̄_j, ψ_j` (`j < N`).
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannElement<C: Coefficient> {
    generators: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> GrassmannElement<C> {
    pub fn zero(generators: usize) -> Result<Self> {
        if generators > MAX_GENERATORS {
            return Err(invalid(format!("at most {MAX_GENERATORS} generators, got {generators}")));
        }
        Ok(Self { generators, terms: BTreeMap::new() })
    }

    pub fn scalar(generators: usize, c: C) -> Result<Self> {
        let mut out = Self::zero(generators)?;
        out.insert(Monomial::ONE, c);
        Ok(out)
    }

    pub fn one(generators: usize) -> Result<Self> {
        Self::scalar(generators, C::one())
    }

    pub fn monomial(generators: usize, m: Monomial, c: C) -> Result<Self> {
        let mut out = Self::zero(generators)?;
        if m.0 >> (2 * generators) != 0 {
            return Err(invalid(format!("monomial {:#b} uses generators beyond {generators}", m.0)));
        }
        out.insert(m, c);
        Ok(out)
    }

    /// The generator `ψ_j`.
    pub fn psi(generators: usize, j: usize) -> Result<Self> {
        Self::check_index(generators, j)?;
        Self::monomial(generators, Monomial(1 << (2 * j + 1)), C::one())
    }

    /// The generator `ψ̄_j`.
    pub fn psi_bar(generators: usize, j: usize) -> Result<Self> {
        Self::check_index(generators, j)?;
        Self::monomial(generators, Monomial(1 << (2 * j)), C::one())
    }

    fn check_index(generators: usize, j: usize) -> Result<()> {
        if j >= generators {
            return Err(invalid(format!("generator index {j} out of range for N = {generators}")));
        }
        Ok(())
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: Monomial) -> C {
        self.terms.get(&m).cloned().unwrap_or_else(C::zero)
    }

    /// The free term.
    pub fn body(&self) -> C {
        self.coefficient(Monomial::ONE)
    }

    /// Every monomial has even degree.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.is_even())
    }

    fn insert(&mut self, m: Monomial, c: C) {
        let sum = match self.terms.remove(&m) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    fn same_n(&self, other: &Self) -> Result<()> {
        if self.generators != other.generators {
            return Err(Error::GeneratorMismatch(self.generators, other.generators));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-C::one()))
    }

    pub fn scale(&self, c: C) -> Self {
        let mut out = Self { generators: self.generators, terms: BTreeMap::new() };
        for (m, v) in &self.terms {
            out.insert(*m, v.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let mut out = Self { generators: self.generators, terms: BTreeMap::new() };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((negative, m)) = ma.times(*mb) {
                    let c = ca.clone() * cb.clone();
                    out.insert(m, if negative { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Result<Self> {
        let mut out = Self::one(self.generators)?;
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `exp` of an element with zero free term, by the terminating series.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        if !self.body().is_zero() {
            return Err(invalid("exp_nilpotent needs a zero free term"));
        }
        let mut out = Self::one(self.generators)?;
        let mut term = out.clone();
        for k in 1..=2 * self.generators {
            term = term.mul(self)?.scale(C::one() / from_count(k));
            if term.is_empty() {
                break;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// The bilinear element `-Σ_{jk} ψ̄_j A_{jk} ψ_k` for a row-major `N × N`
    /// matrix.
    pub fn neg_bilinear(generators: usize, a: &[C]) -> Result<Self> {
        if a.len() != generators * generators {
            return Err(Error::Dimension(format!("expected {} entries, got {}", generators * generators, a.len())));
        }
        let mut out = Self::zero(generators)?;
        for j in 0..generators {
            for k in 0..generators {
                let term = Self::psi_bar(generators, j)?.mul(&Self::psi(generators, k)?)?;
                out = out.add(&term.scale(-a[j * generators + k].clone()))?;
            }
        }
        Ok(out)
    }
}

/// Sign-exact product of two elements over the same generators.
pub fn grassmann_multiply<C: Coefficient>(a: &GrassmannElement<C>, b: &GrassmannElement<C>) -> Result<GrassmannElement<C>> {
    a.mul(b)
}

/// `∫ e ∏_j dψ̄_j dψ_j` with the differentials ordered `dψ̄_0 dψ_0 dψ̄_1 dψ_1 …`
/// and the innermost differential written first.
///
/// Each pair `ψ̄_j ψ_j` integrates to `-1` against `dψ̄_j dψ_j`, so the result
/// is `(-1)^N` times the coefficient of the canonical top monomial. With this
/// ordering `∫ exp{-ψ̄Aψ} = det A`.
pub fn berezin_integrate_full<C: Coefficient>(e: &GrassmannElement<C>) -> C {
    let n = e.generators();
    if n == 0 {
        return e.body();
    }
    let top = Monomial(((1u64 << (2 * n)) - 1) as u32);
    let c = e.coefficient(top);
    if n % 2 == 1 {
        -c
    } else {
        c
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use num_rational::Ratio;
    use proptest::prelude::*;

    use super::*;

    type Q = Ratio<i64>;
    type G = GrassmannElement<Q>;

    fn q(v: i64) -> Q {
        Q::from_integer(v)
    }

    /// Reference determinant.
    fn det(a: &[Complex64], n: usize) -> Complex64 {
        let m = nalgebra::DMatrix::from_row_slice(n, n, a);
        m.determinant()
    }

    #[test]
    fn nilpotency_and_anticommutation() {
        let p1 = G::psi(2, 0).unwrap();
        let p2 = G::psi(2, 1).unwrap();
        assert!(p1.mul(&p1).unwrap().is_empty());
        let s = p1.mul(&p2).unwrap().add(&p2.mul(&p1).unwrap()).unwrap();
        assert!(s.is_empty());
        let b1 = G::psi_bar(2, 0).unwrap();
        assert!(b1.mul(&p1).unwrap().add(&p1.mul(&b1).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn product_of_pair_factors() {
        let one = G::one(2).unwrap();
        let pair = |j| G::psi_bar(2, j).unwrap().mul(&G::psi(2, j).unwrap()).unwrap();
        let lhs = one.add(&pair(0)).unwrap().mul(&one.add(&pair(1)).unwrap()).unwrap();
        let full = pair(0).mul(&pair(1)).unwrap();
        let want = one.add(&pair(0)).unwrap().add(&pair(1)).unwrap().add(&full).unwrap();
        assert_eq!(lhs, want);
        // ψ̄_0ψ_0ψ̄_1ψ_1 is already canonical.
        assert_eq!(full.coefficient(Monomial(0b1111)), q(1));
    }

    #[test]
    fn reordering_signs() {
        // ψ_1 ψ̄_0 = -ψ̄_0 ψ_1
        let e = G::psi(2, 1).unwrap().mul(&G::psi_bar(2, 0).unwrap()).unwrap();
        assert_eq!(e.coefficient(Monomial::from_masks(0b01, 0b10)), q(-1));
        // ψ_0 ψ̄_1 ψ̄_0 = +ψ̄_0 ψ_0 ψ̄_1 (two transpositions)
        let e = G::psi(2, 0)
            .unwrap()
            .mul(&G::psi_bar(2, 1).unwrap())
            .unwrap()
            .mul(&G::psi_bar(2, 0).unwrap())
            .unwrap();
        assert_eq!(e.coefficient(Monomial(0b0111)), q(1));
    }

    #[test]
    fn masks_round_trip() {
        let m = Monomial::from_masks(0b101, 0b110);
        assert_eq!(m.psi_bar_mask(), 0b101);
        assert_eq!(m.psi_mask(), 0b110);
    }

    #[test]
    fn berezin_basics() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let e = GrassmannElement::neg_bilinear(2, &a).unwrap().exp_nilpotent().unwrap();
        assert!((berezin_integrate_full(&e) - 1.0).norm() < 1e-15);
        let c = GrassmannElement::scalar(3, Complex64::new(2.0, 1.0)).unwrap();
        assert_eq!(berezin_integrate_full(&c), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_pair_integral() {
        let e = G::psi_bar(1, 0).unwrap().mul(&G::psi(1, 0).unwrap()).unwrap();
        assert_eq!(berezin_integrate_full(&e), q(-1));
        let e = G::psi(1, 0).unwrap().mul(&G::psi_bar(1, 0).unwrap()).unwrap();
        assert_eq!(berezin_integrate_full(&e), q(1));
    }

    #[test]
    fn exact_determinant_identity() {
        let a: Vec<Q> = [2, -1, 3, 0, 4, 1, 5, -2, 1].iter().map(|&v| q(v)).collect();
        let e = G::neg_bilinear(3, &a).unwrap().exp_nilpotent().unwrap();
        // 2(4+2) + 1(0-5) + 3(0-20)
        assert_eq!(berezin_integrate_full(&e), q(12 - 5 - 60));
    }

    #[test]
    fn mismatched_generators() {
        let a = G::one(2).unwrap();
        let b = G::one(3).unwrap();
        assert_eq!(a.mul(&b), Err(Error::GeneratorMismatch(2, 3)));
        assert!(G::zero(MAX_GENERATORS + 1).is_err());
        assert!(G::psi(2, 2).is_err());
    }

    fn element(n: usize) -> impl Strategy<Value = G> {
        prop::collection::vec((0u32..(1 << (2 * n)), -3i64..4), 0..6).prop_map(move |terms| {
            let mut e = G::zero(n).unwrap();
            for (m, c) in terms {
                e = e.add(&G::monomial(n, Monomial(m), q(c)).unwrap()).unwrap();
            }
            e
        })
    }

    fn parity(e: &G, even: bool) -> G {
        let mut out = G::zero(e.generators()).unwrap();
        for (m, c) in e.terms() {
            if m.is_even() == even {
                out = out.add(&G::monomial(e.generators(), *m, c.clone()).unwrap()).unwrap();
            }
        }
        out
    }

    proptest! {
        #[test]
        fn associative(a in element(3), b in element(3), c in element(3)) {
            let l = a.mul(&b).unwrap().mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn graded_commutation(a in element(3), b in element(3)) {
            // Even parts commute with everything; odd parts anticommute.
            let (ae, ao) = (parity(&a, true), parity(&a, false));
            let (be, bo) = (parity(&b, true), parity(&b, false));
            prop_assert_eq!(ae.mul(&b).unwrap(), b.mul(&ae).unwrap());
            prop_assert_eq!(ao.mul(&bo).unwrap(), bo.mul(&ao).unwrap().scale(q(-1)));
            prop_assert_eq!(ao.mul(&be).unwrap(), be.mul(&ao).unwrap());
        }

        #[test]
        fn determinant_identity(n in 1usize..5, seed in 0u64..1000) {
            use rand::Rng;
            let mut rng = crate::ensemble::substream(seed, 0);
            let a: Vec<Complex64> = (0..n * n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let e = GrassmannElement::neg_bilinear(n, &a).unwrap().exp_nilpotent().unwrap();
            let got = berezin_integrate_full(&e);
            prop_assert!((got - det(&a, n)).norm() < 1e-12);
        }
    }
}
