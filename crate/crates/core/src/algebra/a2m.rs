use num_complex::Complex;

use super::{berezin_integrate_full, grassmann_form, wedge_all, ExteriorOperator};
use crate::ensemble::CouplingSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One term `(k_1, …, k_{2m})` of the `A_{2m}` sum with its integer weight
/// `(2m)! ∏_q 1/((q!)^{k_q} k_q!)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct A2mPartition {
    pub k: Vec<usize>,
    pub weight: u64,
}

/// All `(k_1, …, k_{2m})` with `Σ_q q k_q = 2m`.
pub fn a2m_partitions(m: usize) -> Vec<A2mPartition> {
    let total = 2 * m;
    let mut out = Vec::new();
    let mut k = vec![0; total];
    fill(total, total, &mut k, &mut out);
    out
}

fn fill(part: usize, remaining: usize, k: &mut Vec<usize>, out: &mut Vec<A2mPartition>) {
    if part == 0 {
        if remaining == 0 {
            out.push(A2mPartition { k: k.clone(), weight: weight(k) });
        }
        return;
    }
    for count in 0..=remaining / part {
        k[part - 1] = count;
        fill(part - 1, remaining - count * part, k, out);
    }
    k[part - 1] = 0;
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn weight(k: &[usize]) -> u64 {
    let total: usize = k.iter().enumerate().map(|(i, &c)| (i + 1) * c).sum();
    k.iter()
        .enumerate()
        .fold(factorial(total), |w, (i, &c)| w / (factorial(i + 1).pow(c as u32) * factorial(c)))
}

fn factors<T: Real>(
    g1: &ExteriorOperator<Complex<T>>,
    g: &[ExteriorOperator<Complex<T>>],
    couplings: &CouplingSet<T>,
) -> Result<Vec<ExteriorOperator<Complex<T>>>> {
    let dim = g1.n();
    if g1.level() != 1 || !dim.is_multiple_of(2) || dim == 0 {
        return Err(Error::Dimension(format!("G_1 must be level one on C^{{2m}}, got Λ^{} C^{dim}", g1.level())));
    }
    let m = dim / 2;
    if couplings.m < m {
        return Err(Error::Dimension(format!("couplings cover m = {}, operators need m = {m}", couplings.m)));
    }
    if g.len() != dim - 1 {
        return Err(Error::Dimension(format!("expected {} operators G_2..G_{dim}, got {}", dim - 1, g.len())));
    }
    let mut out = vec![g1.scale(couplings.b(1))];
    for (idx, op) in g.iter().enumerate() {
        let l = idx + 2;
        if op.n() != dim || op.level() != l {
            return Err(Error::Dimension(format!("G_{l} must act on Λ^{l} C^{dim}, got Λ^{} C^{}", op.level(), op.n())));
        }
        let shift = ExteriorOperator::identity(dim, l)?.scale(Complex::new(couplings.b_tilde(l), T::zero()));
        out.push(op.scale(couplings.b(l)).sub(&shift)?);
    }
    Ok(out)
}

/// `A_{2m}(G_1, G)`: the top-level scalar of
/// `Σ (2m)! ∏_q 1/((q!)^{k_q} k_q!) ∧_s (b_s G_s - b̃_s I)^{∧k_s}`.
///
/// `g1` acts on `C^{2m}` and `g[l - 2]` on `Λ^l C^{2m}` for `l = 2..=2m`.
pub fn build_a2m<T: Real>(
    g1: &ExteriorOperator<Complex<T>>,
    g: &[ExteriorOperator<Complex<T>>],
    couplings: &CouplingSet<T>,
) -> Result<Complex<T>> {
    let f = factors(g1, g, couplings)?;
    let m = g1.n() / 2;
    let mut total = Complex::new(T::zero(), T::zero());
    for part in a2m_partitions(m) {
        let ops: Vec<&ExteriorOperator<Complex<T>>> =
            part.k.iter().enumerate().flat_map(|(s, &c)| std::iter::repeat_n(&f[s], c)).collect();
        let top = wedge_all(&ops)?;
        total = total + top.entry(0, 0) * T::from_u64(part.weight).unwrap();
    }
    Ok(total)
}

/// `A_{2m}` by direct single-site Berezin integration of
/// `exp{Σ_l Σ_{αβ} (b_l G_l - b̃_l I)_{αβ} ∏_q ψ̄_{α_q} ψ_{β_q}}` over `2m`
/// generator pairs.
pub fn grassmann_a2m<T: Real>(
    g1: &ExteriorOperator<Complex<T>>,
    g: &[ExteriorOperator<Complex<T>>],
    couplings: &CouplingSet<T>,
) -> Result<Complex<T>> {
    let f = factors(g1, g, couplings)?;
    let mut exponent = grassmann_form(&f[0])?;
    for op in &f[1..] {
        exponent = exponent.add(&grassmann_form(op)?)?;
    }
    Ok(berezin_integrate_full(&exponent.exp_nilpotent()?))
}
