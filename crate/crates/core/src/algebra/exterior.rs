use std::cmp::Ordering;

use num_complex::{Complex, Complex64};

use super::{from_count, Coefficient, GrassmannElement};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// A strictly increasing zero-based tuple `α ∈ I_{n,k}`; the derived order
/// is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl MultiIndex {
    pub fn new(n: usize, idx: Vec<usize>) -> Result<Self> {
        if idx.windows(2).any(|w| w[0] >= w[1]) || idx.last().is_some_and(|&l| l >= n) {
            return Err(invalid(format!("{idx:?} is not strictly increasing in 0..{n}")));
        }
        Ok(Self(idx))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All of `I_{n,k}` in lexicographic order.
    pub fn all(n: usize, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(binomial(n, k));
        let mut cur: Vec<usize> = (0..k).collect();
        if k > n {
            return out;
        }
        loop {
            out.push(MultiIndex(cur.clone()));
            let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
                return out;
            };
            cur[i] += 1;
            for j in i + 1..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
    }

    /// Position of `self` in the lexicographic listing of `I_{n,k}`.
    pub fn rank(&self, n: usize) -> usize {
        let k = self.0.len();
        let mut r = 0;
        let mut start = 0;
        for (i, &a) in self.0.iter().enumerate() {
            for v in start..a {
                r += binomial(n - 1 - v, k - 1 - i);
            }
            start = a + 1;
        }
        r
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Operator on `Λ^k C^n`, stored densely in the basis `e_α`, `α ∈ I_{n,k}`
/// in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorOperator<C: Coefficient> {
    n: usize,
    k: usize,
    data: Vec<C>,
}

impl<C: Coefficient> ExteriorOperator<C> {
    /// From a row-major `C(n,k) × C(n,k)` matrix.
    pub fn new(n: usize, k: usize, data: Vec<C>) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Dimension(format!("level {k} outside 1..={n}")));
        }
        let dim = binomial(n, k);
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!("Λ^{k} C^{n} needs {} entries, got {}", dim * dim, data.len())));
        }
        Ok(Self { n, k, data })
    }

    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(usize, usize) -> C) -> Result<Self> {
        let dim = binomial(n, k);
        let data = (0..dim * dim).map(|i| f(i / dim, i % dim)).collect();
        Self::new(n, k, data)
    }

    pub fn zeros(n: usize, k: usize) -> Result<Self> {
        Self::from_fn(n, k, |_, _| C::zero())
    }

    pub fn identity(n: usize, k: usize) -> Result<Self> {
        Self::from_fn(n, k, |i, j| if i == j { C::one() } else { C::zero() })
    }

    /// Level-one diagonal operator.
    pub fn diagonal(values: &[C]) -> Result<Self> {
        Self::from_fn(values.len(), 1, |i, j| if i == j { values[i].clone() } else { C::zero() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        binomial(self.n, self.k)
    }

    pub fn entry(&self, i: usize, j: usize) -> &C {
        &self.data[i * self.dim() + j]
    }

    pub fn get(&self, alpha: &MultiIndex, beta: &MultiIndex) -> &C {
        self.entry(alpha.rank(self.n), beta.rank(self.n))
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::Dimension(format!(
                "Λ^{} C^{} vs Λ^{} C^{}",
                self.k, self.n, other.k, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Self::new(self.n, self.k, data)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-C::one()))
    }

    pub fn scale(&self, c: C) -> Self {
        Self { n: self.n, k: self.k, data: self.data.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// Composition `self ∘ other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let d = self.dim();
        Self::from_fn(self.n, self.k, |i, j| {
            (0..d).fold(C::zero(), |acc, l| acc + self.entry(i, l).clone() * other.entry(l, j).clone())
        })
    }

    /// Largest entrywise distance under a caller-supplied modulus.
    pub fn max_diff(&self, other: &Self, modulus: impl Fn(&C) -> f64) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| modulus(&(a.clone() - b.clone())))
            .fold(0.0, f64::max))
    }
}

impl<T: Real> ExteriorOperator<Complex<T>> {
    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        Self { n: self.n, k: self.k, data: (0..d * d).map(|i| self.entry(i % d, i / d).conj()).collect() }
    }
}

/// Shuffles of `q + r` slots: `(sign, first-part positions, second-part
/// positions)` for every `q`-subset of positions.
fn shuffles(q: usize, r: usize) -> Vec<(bool, Vec<usize>, Vec<usize>)> {
    let len = q + r;
    (0u32..1 << len)
        .filter(|m| m.count_ones() as usize == q)
        .map(|m| {
            let first: Vec<usize> = (0..len).filter(|&p| m >> p & 1 == 1).collect();
            let second: Vec<usize> = (0..len).filter(|&p| m >> p & 1 == 0).collect();
            let inversions: usize = first.iter().enumerate().map(|(i, &p)| p - i).sum();
            (inversions % 2 == 1, first, second)
        })
        .collect()
}

/// Exterior product `A ∧ B` on `Λ^{q+r} C^n`:
/// `(A∧B)_{αβ} = q!r!/(q+r)! Σ_{π,σ ∈ S_{q,r}} sgn π sgn σ A_{α'_π β'_σ} B_{α''_π β''_σ}`.
pub fn wedge_operators<C: Coefficient>(a: &ExteriorOperator<C>, b: &ExteriorOperator<C>) -> Result<ExteriorOperator<C>> {
    if a.n != b.n {
        return Err(Error::Dimension(format!("ambient dimensions {} and {}", a.n, b.n)));
    }
    let (n, q, r) = (a.n, a.k, b.k);
    if q + r > n {
        return Err(Error::Dimension(format!("level {} exceeds ambient dimension {n}", q + r)));
    }
    let basis = MultiIndex::all(n, q + r);
    let sh = shuffles(q, r);
    // Per basis element: (sign, rank of the q-part, rank of the r-part) per shuffle.
    let split: Vec<Vec<(bool, usize, usize)>> = basis
        .iter()
        .map(|alpha| {
            sh.iter()
                .map(|(neg, f, s)| {
                    let first = MultiIndex(f.iter().map(|&p| alpha.0[p]).collect());
                    let second = MultiIndex(s.iter().map(|&p| alpha.0[p]).collect());
                    (*neg, first.rank(n), second.rank(n))
                })
                .collect()
        })
        .collect();
    let norm = C::one() / from_count::<C>(binomial(q + r, q));
    ExteriorOperator::from_fn(n, q + r, |i, j| {
        let mut acc = C::zero();
        for &(ni, ai, bi) in &split[i] {
            for &(nj, aj, bj) in &split[j] {
                let term = a.entry(ai, aj).clone() * b.entry(bi, bj).clone();
                acc = if ni == nj { acc + term } else { acc - term };
            }
        }
        acc * norm.clone()
    })
}

/// `A_1 ∧ … ∧ A_k`, left to right.
pub fn wedge_all<C: Coefficient>(ops: &[&ExteriorOperator<C>]) -> Result<ExteriorOperator<C>> {
    let (first, rest) = ops.split_first().ok_or_else(|| invalid("empty wedge product"))?;
    rest.iter().try_fold((*first).clone(), |acc, op| wedge_operators(&acc, op))
}

/// `B^{∧q}` for a level-one `B`: the matrix of `q × q` minors.
pub fn exterior_power<C: Coefficient>(b: &ExteriorOperator<C>, q: usize) -> Result<ExteriorOperator<C>> {
    if b.k != 1 {
        return Err(Error::Dimension(format!("exterior_power needs a level-one operator, got level {}", b.k)));
    }
    let n = b.n;
    let basis = MultiIndex::all(n, q);
    let perms = permutations(q);
    ExteriorOperator::from_fn(n, q, |i, j| {
        let (alpha, beta) = (&basis[i].0, &basis[j].0);
        perms.iter().fold(C::zero(), |acc, (neg, p)| {
            let term = (0..q).fold(C::one(), |t, l| t * b.entry(alpha[l], beta[p[l]]).clone());
            if *neg {
                acc - term
            } else {
                acc + term
            }
        })
    })
}

/// All permutations of `0..k` with their parity (`true` for odd).
pub(crate) fn permutations(k: usize) -> Vec<(bool, Vec<usize>)> {
    let mut out = vec![(false, Vec::new())];
    for len in 1..=k {
        let mut next = Vec::with_capacity(out.len() * len);
        for (neg, p) in &out {
            // Insert `len - 1` at every position; each step left is one transposition.
            for pos in 0..len {
                let mut q = p.clone();
                q.insert(pos, len - 1);
                next.push((*neg ^ ((len - 1 - pos) % 2 == 1), q));
            }
        }
        out = next;
    }
    out
}

/// `Σ_{α,β ∈ I_{n,k}} A_{αβ} ∏_{j=1}^k ψ̄_{α_j} ψ_{β_j}` over `N = n` generators.
pub fn grassmann_form<C: Coefficient>(op: &ExteriorOperator<C>) -> Result<GrassmannElement<C>> {
    let basis = MultiIndex::all(op.n, op.k);
    let mut out = GrassmannElement::zero(op.n)?;
    for (i, alpha) in basis.iter().enumerate() {
        for (j, beta) in basis.iter().enumerate() {
            let c = op.entry(i, j);
            if c.is_zero() {
                continue;
            }
            let mut mono = GrassmannElement::one(op.n)?;
            for (&a, &b) in alpha.0.iter().zip(&beta.0) {
                mono = mono.mul(&GrassmannElement::psi_bar(op.n, a)?)?.mul(&GrassmannElement::psi(op.n, b)?)?;
            }
            out = out.add(&mono.scale(c.clone()))?;
        }
    }
    Ok(out)
}

/// Slow reference for [`wedge_operators`]: `Alt ∘ (A ⊗ B)` built on the
/// full tensor space `(C^n)^{⊗(q+r)}`.
///
/// `e_α` is embedded as `Alt(e_{α_1} ⊗ … ⊗ e_{α_k})`; an operator `A` on
/// `Λ^q` acts on `V^{⊗q}` through the coordinates `c_α = Σ_π sgn π t[α_π]`.
pub fn wedge_via_tensor(a: &ExteriorOperator<Complex64>, b: &ExteriorOperator<Complex64>) -> Result<ExteriorOperator<Complex64>> {
    type Op = ExteriorOperator<Complex64>;
    let n = a.n();
    let (q, r) = (a.level(), b.level());
    let len = q + r;
    if b.n() != n || len > n {
        return Err(Error::Dimension(format!("cannot wedge Λ^{q} C^{n} with Λ^{r} C^{}", b.n())));
    }
    let size = n.pow(len as u32);
    let digits = |mut idx: usize, k: usize| {
        let mut d = vec![0; k];
        for slot in (0..k).rev() {
            d[slot] = idx % n;
            idx /= n;
        }
        d
    };
    let flat = |d: &[usize]| d.iter().fold(0, |acc, &x| acc * n + x);
    let fact = |k: usize| (1..=k).product::<usize>() as f64;
    let embed = |alpha: &[usize]| {
        let mut t = vec![Complex64::new(0.0, 0.0); n.pow(alpha.len() as u32)];
        for (neg, p) in permutations(alpha.len()) {
            let d: Vec<usize> = p.iter().map(|&i| alpha[i]).collect();
            t[flat(&d)] += if neg { -1.0 } else { 1.0 } / fact(alpha.len());
        }
        t
    };
    let coords = |t: &[Complex64], k: usize| -> Vec<Complex64> {
        MultiIndex::all(n, k)
            .iter()
            .map(|alpha| {
                permutations(k).iter().fold(Complex64::new(0.0, 0.0), |acc, (neg, p)| {
                    let d: Vec<usize> = p.iter().map(|&i| alpha.0[i]).collect();
                    if *neg {
                        acc - t[flat(&d)]
                    } else {
                        acc + t[flat(&d)]
                    }
                })
            })
            .collect()
    };
    // Ã on V^{⊗k}: basis tensor -> embedded image of A applied to its coordinates.
    let extend = |op: &Op, k: usize| -> Vec<Vec<Complex64>> {
        let basis = MultiIndex::all(n, k);
        (0..n.pow(k as u32))
            .map(|idx| {
                let mut e = vec![Complex64::new(0.0, 0.0); n.pow(k as u32)];
                e[idx] = Complex64::new(1.0, 0.0);
                let c = coords(&e, k);
                let mut out = vec![Complex64::new(0.0, 0.0); n.pow(k as u32)];
                for (i, alpha) in basis.iter().enumerate() {
                    let img: Complex64 = (0..basis.len()).map(|j| op.entry(i, j) * c[j]).sum();
                    if img != Complex64::new(0.0, 0.0) {
                        for (o, v) in out.iter_mut().zip(embed(&alpha.0)) {
                            *o += img * v;
                        }
                    }
                }
                out
            })
            .collect()
    };
    let ea = extend(a, q);
    let eb = extend(b, r);
    let basis = MultiIndex::all(n, len);
    let cols: Vec<Vec<Complex64>> = basis
        .iter()
        .map(|beta| {
            let t = embed(&beta.0);
            let mut img = vec![Complex64::new(0.0, 0.0); size];
            for (idx, &v) in t.iter().enumerate() {
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let d = digits(idx, len);
                let ia = flat(&d[..q]);
                let ib = flat(&d[q..]);
                for (ja, &va) in ea[ia].iter().enumerate() {
                    if va == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (jb, &vb) in eb[ib].iter().enumerate() {
                        img[ja * n.pow(r as u32) + jb] += v * va * vb;
                    }
                }
            }
            // The coordinates of Alt(img) in the basis e_α.
            coords(&img, len)
        })
        .collect();
    Op::from_fn(n, len, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use num_rational::Ratio;
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;
    use crate::ensemble::substream;

    type Q = Ratio<i64>;
    type Op = ExteriorOperator<Complex64>;

    fn random_op(n: usize, k: usize, rng: &mut impl Rng) -> Op {
        Op::from_fn(n, k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
    }

    fn rational_op(n: usize, k: usize, rng: &mut impl Rng) -> ExteriorOperator<Q> {
        ExteriorOperator::from_fn(n, k, |_, _| Q::from_integer(rng.gen_range(-4..5))).unwrap()
    }

    fn norm(c: &Complex64) -> f64 {
        c.norm()
    }

    #[test]
    fn multi_index_listing_and_rank() {
        let all = MultiIndex::all(4, 2);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].as_slice(), &[0, 1]);
        assert_eq!(all[5].as_slice(), &[2, 3]);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.rank(4), i);
        }
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(MultiIndex::new(3, vec![1, 1]).is_err());
        assert!(MultiIndex::new(3, vec![0, 3]).is_err());
        assert_eq!(MultiIndex::all(5, 3).iter().map(|a| a.rank(5)).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn identity_wedge_identity() {
        let i1 = Op::identity(3, 1).unwrap();
        let w = wedge_operators(&i1, &i1).unwrap();
        assert_eq!(w, Op::identity(3, 2).unwrap());
        assert!(wedge_via_tensor(&i1, &i1).unwrap().max_diff(&w, norm).unwrap() < 1e-15);
    }

    #[test]
    fn square_is_second_compound() {
        let mut rng = substream(3, 0);
        let b = random_op(4, 1, &mut rng);
        let w = wedge_operators(&b, &b).unwrap();
        assert!(w.max_diff(&exterior_power(&b, 2).unwrap(), norm).unwrap() < 1e-14);
        let w3 = wedge_all(&[&b, &b, &b]).unwrap();
        assert!(w3.max_diff(&exterior_power(&b, 3).unwrap(), norm).unwrap() < 1e-13);
    }

    #[test]
    fn level_overflow() {
        let a = Op::identity(3, 2).unwrap();
        assert!(matches!(wedge_operators(&a, &a), Err(Error::Dimension(_))));
        assert!(Op::identity(3, 0).is_err());
    }

    #[test]
    fn matches_alt_tensor_construction() {
        let mut rng = substream(11, 0);
        for n in 2..=4 {
            for (q, r) in [(1, 1), (1, 2), (2, 1)] {
                if q + r > n {
                    continue;
                }
                let a = random_op(n, q, &mut rng);
                let b = random_op(n, r, &mut rng);
                let w = wedge_operators(&a, &b).unwrap();
                let oracle = wedge_via_tensor(&a, &b).unwrap();
                assert!(w.max_diff(&oracle, norm).unwrap() < 1e-12, "n={n} q={q} r={r}");
            }
        }
    }

    #[test]
    fn lemma_one_exact() {
        let mut rng = substream(5, 1);
        for n in 2..=4 {
            for (q, r) in [(1, 1), (1, 2), (2, 1)] {
                if q + r > n {
                    continue;
                }
                let a = rational_op(n, q, &mut rng);
                let b = rational_op(n, r, &mut rng);
                let lhs = grassmann_form(&a).unwrap().mul(&grassmann_form(&b).unwrap()).unwrap();
                let w = wedge_operators(&a, &b).unwrap();
                let rhs = grassmann_form(&w).unwrap().scale(Q::from_integer(binomial(q + r, q) as i64));
                assert_eq!(lhs, rhs, "n={n} q={q} r={r}");
            }
        }
    }

    #[test]
    fn mixed_product_property() {
        let mut rng = substream(8, 2);
        let n = 4;
        let b = random_op(n, 1, &mut rng);
        let a1 = random_op(n, 1, &mut rng);
        let a2 = random_op(n, 2, &mut rng);
        let b2 = exterior_power(&b, 2).unwrap();
        let b3 = exterior_power(&b, 3).unwrap();
        let right = wedge_operators(&a1.matmul(&b).unwrap(), &a2.matmul(&b2).unwrap()).unwrap();
        let want = wedge_operators(&a1, &a2).unwrap().matmul(&b3).unwrap();
        assert!(right.max_diff(&want, norm).unwrap() < 1e-12);
        let left = wedge_operators(&b.matmul(&a1).unwrap(), &b2.matmul(&a2).unwrap()).unwrap();
        let want = b3.matmul(&wedge_operators(&a1, &a2).unwrap()).unwrap();
        assert!(left.max_diff(&want, norm).unwrap() < 1e-12);
    }

    #[test]
    fn permutation_parity() {
        let perms = permutations(3);
        assert_eq!(perms.len(), 6);
        assert_eq!(perms.iter().filter(|(neg, _)| *neg).count(), 3);
        for (neg, p) in &perms {
            let inv = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            assert_eq!(*neg, inv % 2 == 1);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn commutative_and_associative(seed in 0u64..10_000, n in 3usize..5) {
            let mut rng = substream(seed, 0);
            let a = rational_op(n, 1, &mut rng);
            let b = rational_op(n, 1, &mut rng);
            let c = rational_op(n, 1, &mut rng);
            let ab = wedge_operators(&a, &b).unwrap();
            prop_assert_eq!(&ab, &wedge_operators(&b, &a).unwrap());
            let l = wedge_operators(&ab, &c).unwrap();
            let r = wedge_operators(&a, &wedge_operators(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
            if n == 4 {
                let d = rational_op(n, 2, &mut rng);
                prop_assert_eq!(wedge_operators(&a, &d).unwrap(), wedge_operators(&d, &a).unwrap());
            }
        }
    }
}
