use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LogSignedValue;
use crate::ensemble::HermitianMatrix;
use crate::error::{Error, Result};

/// `det(M - shift·I)` of a Hermitian matrix in log-signed form.
///
/// The determinant of a Hermitian matrix with a real shift is real, so the
/// accumulated phase is snapped to `±1`.
pub fn signed_log_det(m: &HermitianMatrix, shift: f64) -> Result<LogSignedValue<f64>> {
    let mut a = m.as_matrix().clone();
    for j in 0..a.nrows() {
        a[(j, j)] -= shift;
    }
    Ok(lu_log_det(a)?.into_real())
}

/// `det(A)` of a general complex square matrix in log-signed form.
pub fn signed_log_det_general(a: &DMatrix<Complex64>) -> Result<LogSignedValue<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension("matrix is not square".into()));
    }
    lu_log_det(a.clone())
}

/// LU with partial pivoting, accumulating `log|pivot|` and the unit phase.
///
/// A pivot column whose largest entry is below `f64::MIN_POSITIVE` marks an
/// exactly singular matrix; non-finite entries are a breakdown.
fn lu_log_det(mut a: DMatrix<Complex64>) -> Result<LogSignedValue<f64>> {
    let n = a.nrows();
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::FactorizationBreakdown("non-finite matrix entry".into()));
    }
    let mut log_mag = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let (mut piv, mut best) = (k, a[(k, k)].norm());
        for i in k + 1..n {
            let v = a[(i, k)].norm();
            if v > best {
                piv = i;
                best = v;
            }
        }
        if best < f64::MIN_POSITIVE {
            return Ok(LogSignedValue::zero());
        }
        if piv != k {
            a.swap_rows(piv, k);
            phase = -phase;
        }
        let p = a[(k, k)];
        log_mag += best.ln();
        phase *= p / best;
        let inv = p.inv();
        for i in k + 1..n {
            let factor = a[(i, k)] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = a[(k, j)];
                a[(i, j)] -= factor * u;
            }
        }
    }
    if !log_mag.is_finite() || !phase.re.is_finite() {
        return Err(Error::FactorizationBreakdown("non-finite pivot product".into()));
    }
    Ok(LogSignedValue::from_polar(phase, log_mag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_matrix, EnsembleParams};

    fn herm(rows: &[&[f64]]) -> HermitianMatrix {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn small_closed_forms() {
        let d = signed_log_det(&herm(&[&[0.0, 1.0], &[1.0, 0.0]]), 0.0).unwrap();
        assert_eq!(d.sign(), -1.0);
        assert!(d.log_magnitude.abs() < 1e-15);

        let d = signed_log_det(&herm(&[&[1.0, 0.0], &[0.0, 1.0]]), 3.0).unwrap();
        assert_eq!(d.sign(), 1.0);
        assert!((d.log_magnitude - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn matches_eigenvalue_product() {
        let params = EnsembleParams::new(8, 8.0, 21).unwrap();
        let m = sample_matrix(&params, 0).unwrap();
        let eig = m.as_matrix().symmetric_eigenvalues();
        let want: f64 = eig.iter().map(|l| l - 0.7).product();
        let got = signed_log_det(&m, 0.7).unwrap().to_real();
        assert!((got - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn singular_and_breakdown_are_distinct() {
        let d = signed_log_det(&herm(&[&[1.0, 1.0], &[1.0, 1.0]]), 0.0).unwrap();
        assert!(d.zero_flag);
        let d = signed_log_det(&herm(&[&[1.0, 0.0], &[0.0, 1.0]]), 1.0).unwrap();
        assert!(d.zero_flag);
        let bad = DMatrix::from_element(2, 2, Complex64::new(f64::NAN, 0.0));
        assert!(matches!(signed_log_det_general(&bad), Err(Error::FactorizationBreakdown(_))));
    }

    #[test]
    fn general_complex_determinant() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 2.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.5)],
        );
        let want = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let got = signed_log_det_general(&a).unwrap().to_complex();
        assert!((got - want).norm() < 1e-13);
    }
}
