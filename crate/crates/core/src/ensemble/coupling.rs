use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::{c, Real};

/// Coupling constants `a_l`, `b_l`, `b̃_l` for `l = 1..=2m`.
///
/// Vectors are stored 0-based; use the 1-based accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet<T: Real> {
    pub m: usize,
    pub a: Vec<T>,
    pub b: Vec<Complex<T>>,
    pub b_tilde: Vec<T>,
}

impl<T: Real> CouplingSet<T> {
    pub fn a(&self, l: usize) -> T {
        self.a[l - 1]
    }

    pub fn b(&self, l: usize) -> Complex<T> {
        self.b[l - 1]
    }

    pub fn b_tilde(&self, l: usize) -> T {
        self.b_tilde[l - 1]
    }

    /// The real constant `b2 = -sqrt(4 n a_2)` of the `m = 1` representation.
    pub fn b2_real(&self, n: usize) -> T {
        -(c::<T>(4.0) * T::from_usize(n).unwrap() * self.a(2)).max(T::zero()).sqrt()
    }
}

/// Computes the couplings by taking the formal logarithm of
/// `1 + Σ_{l ≤ 2m} y^l / (l! p^{l-1} n)`.
pub fn coupling_constants<T: Real>(n: usize, p: T, m: usize) -> Result<CouplingSet<T>> {
    let nf = T::from_usize(n).ok_or_else(|| invalid("n not representable"))?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !(p > T::zero()) || p > nf {
        return Err(invalid(format!("p must lie in (0, n], got {p:?}")));
    }
    if m < 1 {
        return Err(invalid("m must be at least 1"));
    }
    let len = 2 * m;

    // poly[l] = 1 / (l! p^{l-1} n)
    let mut poly = vec![T::one(); len + 1];
    let mut fact = T::one();
    for (l, coeff) in poly.iter_mut().enumerate().skip(1) {
        fact = fact * T::from_usize(l).unwrap();
        *coeff = T::one() / (fact * p.powi(l as i32 - 1) * nf);
    }

    // From P' = A' P: l c_l = Σ_{k=1}^{l} k a_k c_{l-k}.
    let mut a = vec![T::zero(); len + 1];
    for l in 1..=len {
        let mut acc = T::zero();
        for k in 1..l {
            acc = acc + T::from_usize(k).unwrap() * a[k] * poly[l - k];
        }
        a[l] = poly[l] - acc / T::from_usize(l).unwrap();
    }
    a[1] = T::one() / nf;
    if p == nf {
        for al in a.iter_mut().skip(2) {
            *al = T::zero();
        }
    }
    let a: Vec<T> = a.into_iter().skip(1).collect();

    let mut b = Vec::with_capacity(len);
    let mut fact = T::one();
    for (idx, &al) in a.iter().enumerate() {
        let l = idx + 1;
        fact = fact * T::from_usize(l).unwrap();
        let root = Complex::new(nf * al, T::zero()).sqrt();
        b.push(i_pow::<T>(l) * root * fact);
    }

    let b_tilde = (1..=len)
        .map(|l| {
            if l % 2 == 1 {
                T::zero()
            } else {
                let half = l / 2;
                (c::<T>(0.5) - c::<T>(2.0).powi(-(half as i32))) * a[half - 1]
            }
        })
        .collect();

    Ok(CouplingSet { m, a, b, b_tilde })
}

/// The `m = 1` constant `b2 = -sqrt(2 (n - p) / (p n))`.
pub fn b2(n: usize, p: f64) -> Result<f64> {
    Ok(coupling_constants(n, p, 1)?.b2_real(n))
}

fn i_pow<T: Real>(l: usize) -> Complex<T> {
    match l % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coefficients of exp(Σ a_l y^l) by the power-series exponential.
    fn exp_series(a: &[f64]) -> Vec<f64> {
        let len = a.len();
        let mut e = vec![0.0; len + 1];
        e[0] = 1.0;
        for l in 1..=len {
            let mut acc = 0.0;
            for k in 1..=l {
                acc += k as f64 * a[k - 1] * e[l - k];
            }
            e[l] = acc / l as f64;
        }
        e
    }

    #[test]
    fn small_examples() {
        let cs = coupling_constants(10, 5.0f64, 1).unwrap();
        assert_eq!(cs.a(1), 0.1);
        assert!((cs.a(2) - 0.005).abs() < 1e-15);

        let cs = coupling_constants(10, 10.0, 2).unwrap();
        assert_eq!(&cs.a[1..], &[0.0, 0.0, 0.0]);

        let b2 = b2(4, 2.0).unwrap();
        assert!((b2 + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn formal_log_inverts_exponential() {
        for &(n, p) in &[(5usize, 1.0), (40, 3.5), (100, 99.0), (7, 0.4)] {
            let m = 3;
            let cs = coupling_constants(n, p, m).unwrap();
            let e = exp_series(&cs.a);
            let mut fact = 1.0;
            for (l, el) in e.iter().enumerate().skip(1) {
                fact *= l as f64;
                let want = 1.0 / (fact * p.powi(l as i32 - 1) * n as f64);
                assert!((el - want).abs() < 1e-12 * want.max(1.0), "l={l}");
            }
        }
    }

    #[test]
    fn b_and_b_tilde_structure() {
        let cs = coupling_constants(20, 4.0f64, 2).unwrap();
        assert!((cs.b(1) - Complex::new(0.0, 1.0)).norm() < 1e-15);
        assert!((cs.b(2).re - cs.b2_real(20)).abs() < 1e-15);
        assert_eq!(cs.b_tilde(1), 0.0);
        assert_eq!(cs.b_tilde(3), 0.0);
        assert_eq!(cs.b_tilde(2), 0.0);
        assert!((cs.b_tilde(4) - cs.a(2) / 4.0).abs() < 1e-18);
    }

    #[test]
    fn works_in_single_precision() {
        let cs = coupling_constants::<f32>(10, 5.0, 1).unwrap();
        assert!((cs.a(2) - 0.005).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(coupling_constants(10, 0.0, 1).is_err());
        assert!(coupling_constants(10, 11.0, 1).is_err());
        assert!(coupling_constants(10, 5.0, 0).is_err());
    }
}
