use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrand::log_c_n;
use super::mesh::{contour_maxima, plan_regions, AxisMesh, Landscape};
use super::{QuadratureRule, QuadratureSpec};
use crate::detkit::LogSignedValue;
use crate::ensemble::b2 as coupling_b2;
use crate::error::{invalid, Error, Result};
use crate::saddle::f_eval;
use crate::special::pairwise_sum;

/// Largest accepted `|Im| / |Re|` of the assembled `F_2`.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A quadrature estimate of `F_2` (or its confluent limit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOutcome {
    /// Real part of the assembled integral.
    pub value: LogSignedValue<f64>,
    /// `|Im| / |Re|` before the real part is taken.
    pub imag_residual: f64,
    pub evaluations: usize,
}

/// `D_2 = F_2(x1, x2) / sqrt(F_2(x1, x1) F_2(x2, x2))` from one shared field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D2Outcome {
    pub value: f64,
    pub numerator: QuadratureOutcome,
    pub denominators: [QuadratureOutcome; 2],
    pub imag_residual: f64,
}

/// Row-major `s`-integrated field `S(i, j) = mant · e^{expo}` on one box.
#[derive(Debug, Clone)]
struct Block {
    t1: AxisMesh,
    t2: AxisMesh,
    symmetric: bool,
    mirrored: bool,
    mant: Vec<Complex64>,
    expo: Vec<f64>,
}

impl Block {
    fn cols(&self) -> usize {
        self.t2.len()
    }
}

/// The `s`-integrated integrand on a fixed mesh, reusable for any offsets
/// with `|x| <= x_max`.
#[derive(Debug, Clone)]
pub struct Representation {
    n: usize,
    lambda0: f64,
    spec: QuadratureSpec,
    x_max: f64,
    phi_ref: f64,
    blocks: Vec<Block>,
    evaluations: usize,
}

impl Representation {
    /// Builds the field for the ensemble `(n, p)` at `λ0`.
    pub fn build(n: usize, p: f64, lambda0: f64, spec: &QuadratureSpec, x_max: f64) -> Result<Self> {
        spec.validate()?;
        if !(lambda0.is_finite() && x_max.is_finite() && x_max >= 0.0) {
            return Err(invalid("lambda0 and x_max must be finite, x_max >= 0"));
        }
        let b2 = coupling_b2(n, p)?;
        let gamma = spec.contour_shift;
        let ls = Landscape { n: n as f64, b2, lambda0, gamma, x_rate: x_max, truncation: spec.truncation };
        let centers = contour_maxima(&ls);
        let phi_ref = centers.iter().map(|c| ls.phi(c)).fold(f64::NEG_INFINITY, f64::max);
        let phi_ref = if phi_ref.is_finite() { phi_ref } else { 0.0 };

        let mut layouts: Vec<(AxisMesh, AxisMesh, AxisMesh, bool)> = Vec::new();
        match spec.rule {
            QuadratureRule::Trapezoid => {
                let m = AxisMesh::trapezoid(spec.truncation, spec.nodes);
                layouts.push((m.clone(), m.clone(), m, false));
            }
            QuadratureRule::GaussLegendreTensor => {
                let regions = plan_regions(&ls, &centers);
                let tol = 1e-6 * spec.truncation;
                let mut used = vec![false; regions.len()];
                for i in 0..regions.len() {
                    if used[i] {
                        continue;
                    }
                    used[i] = true;
                    let mirror = regions[i].mirrored();
                    let partner = (i + 1..regions.len())
                        .find(|&j| !used[j] && (0..3).all(|k| {
                            (regions[j].lo[k] - mirror.lo[k]).abs() <= tol && (regions[j].hi[k] - mirror.hi[k]).abs() <= tol
                        }));
                    if let Some(j) = partner {
                        used[j] = true;
                    }
                    let r = &regions[i];
                    let axis = |k: usize| {
                        let cs: Vec<f64> = r.centers.iter().map(|c| c[k]).collect();
                        AxisMesh::graded(r.lo[k], r.hi[k], &cs, &r.samples[k], ls.n, spec.nodes)
                    };
                    layouts.push((axis(0), axis(1), axis(2), partner.is_some()));
                }
            }
        }

        let nf = n as f64;
        let mut blocks = Vec::with_capacity(layouts.len());
        let mut evaluations = 0usize;
        for (t1, t2, s, mirrored) in layouts {
            let symmetric = t1 == t2;
            let cols = t2.len();
            let rows: Vec<(Vec<Complex64>, Vec<f64>)> = (0..t1.len())
                .into_par_iter()
                .map(|i| {
                    let mut mant = vec![Complex64::new(0.0, 0.0); cols];
                    let mut expo = vec![f64::NEG_INFINITY; cols];
                    let mut buf = vec![Complex64::new(0.0, 0.0); s.len()];
                    let a = Complex64::new(t1.nodes[i], -gamma);
                    let start = if symmetric { i } else { 0 };
                    for j in start..cols {
                        let b = Complex64::new(t2.nodes[j], -gamma);
                        let mut top = f64::NEG_INFINITY;
                        for (k, &sk) in s.nodes.iter().enumerate() {
                            let e = match f_eval(a, b, Complex64::new(sk, 0.0), b2, lambda0) {
                                Some(f) => nf * f - phi_ref,
                                None => Complex64::new(f64::NEG_INFINITY, 0.0),
                            };
                            top = top.max(e.re);
                            buf[k] = e;
                        }
                        if top == f64::NEG_INFINITY {
                            continue;
                        }
                        let terms: Vec<Complex64> = buf
                            .iter()
                            .zip(&s.weights)
                            .map(|(e, w)| if e.re == f64::NEG_INFINITY { Complex64::new(0.0, 0.0) } else { w * (e - top).exp() })
                            .collect();
                        mant[j] = pairwise_sum(&terms);
                        expo[j] = top;
                    }
                    (mant, expo)
                })
                .collect();
            let pairs = if symmetric { t1.len() * (t1.len() + 1) / 2 } else { t1.len() * cols };
            evaluations += pairs * s.len();
            let mut mant = Vec::with_capacity(t1.len() * cols);
            let mut expo = Vec::with_capacity(t1.len() * cols);
            for (m, e) in rows {
                mant.extend(m);
                expo.extend(e);
            }
            blocks.push(Block { t1, t2, symmetric, mirrored, mant, expo });
        }
        Ok(Self { n, lambda0, spec: *spec, x_max, phi_ref, blocks, evaluations })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Integrand evaluations spent building the field.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// `(t1, t2, s)` node counts of each box.
    pub fn node_counts(&self) -> Vec<[usize; 2]> {
        self.blocks.iter().map(|b| [b.t1.len(), b.t2.len()]).collect()
    }

    fn check_offset(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x.abs() > self.x_max * (1.0 + 1e-12) {
            return Err(invalid(format!("offset {x} outside the mesh design range |x| <= {}", self.x_max)));
        }
        Ok(())
    }

    /// `Σ w K(t1, t2) S(t1, t2)` as `(mantissa, exponent)`.
    fn kernel_sum<K>(&self, kernel: K) -> (Complex64, f64)
    where
        K: Fn(Complex64, Complex64) -> Complex64 + Sync,
    {
        let top = self.blocks.iter().flat_map(|b| b.expo.iter()).copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let gamma = self.spec.contour_shift;
        let mut partials = Vec::new();
        for b in &self.blocks {
            let cols = b.cols();
            let rows: Vec<Complex64> = (0..b.t1.len())
                .into_par_iter()
                .map(|i| {
                    let a = Complex64::new(b.t1.nodes[i], -gamma);
                    let wa = b.t1.weights[i];
                    let start = if b.symmetric { i } else { 0 };
                    let mut terms = Vec::with_capacity(cols - start);
                    for j in start..cols {
                        let e = b.expo[i * cols + j];
                        if e == f64::NEG_INFINITY {
                            continue;
                        }
                        let c = Complex64::new(b.t2.nodes[j], -gamma);
                        let mut k = kernel(a, c);
                        if b.mirrored || (b.symmetric && j != i) {
                            k += kernel(c, a);
                        }
                        terms.push(wa * b.t2.weights[j] * b.mant[i * cols + j] * (e - top).exp() * k);
                    }
                    pairwise_sum(&terms)
                })
                .collect();
            partials.push(pairwise_sum(&rows));
        }
        (pairwise_sum(&partials), top)
    }

    fn assemble(&self, mant: Complex64, expo: f64, log_prefactor: f64) -> QuadratureOutcome {
        let (re, im) = (mant.re, mant.im);
        let imag_residual = if re == 0.0 { f64::INFINITY } else { (im / re).abs() };
        let value = if re == 0.0 {
            LogSignedValue::zero()
        } else {
            LogSignedValue::from_log(re.signum(), re.abs().ln() + expo + self.phi_ref + log_prefactor)
        };
        QuadratureOutcome { value, imag_residual, evaluations: self.evaluations }
    }

    /// `F_2(x1, x2)`; equal offsets use the confluent kernel.
    pub fn f2(&self, x1: f64, x2: f64) -> Result<QuadratureOutcome> {
        if x1 == x2 {
            return self.f2_confluent(x1);
        }
        self.check_offset(x1)?;
        self.check_offset(x2)?;
        let (m, e) = self.kernel_sum(|t1, t2| (t1 - t2) * (-I * (x1 * t1 + x2 * t2)).exp());
        let m = I * m / (x1 - x2);
        let log_pre = log_c_n(self.n, x1, x2) + self.lambda0 * (x1 + x2);
        Ok(self.assemble(m, e, log_pre))
    }

    /// `F_2(x, x)` through the symmetrised kernel `-(i/2)(t1 - t2)² e^{-ix(t1 + t2)}`.
    pub fn f2_confluent(&self, x: f64) -> Result<QuadratureOutcome> {
        self.check_offset(x)?;
        let (m, e) = self.kernel_sum(|t1, t2| -0.5 * I * (t1 - t2) * (t1 - t2) * (-I * x * (t1 + t2)).exp());
        let m = I * m;
        let log_pre = log_c_n(self.n, x, x) + 2.0 * self.lambda0 * x;
        Ok(self.assemble(m, e, log_pre))
    }

    /// `D_2(x1, x2)`; equal offsets give exactly `1`.
    pub fn d2(&self, x1: f64, x2: f64) -> Result<D2Outcome> {
        let c1 = self.f2_confluent(x1)?;
        let c2 = if x1 == x2 { c1.clone() } else { self.f2_confluent(x2)? };
        let num = if x1 == x2 { c1.clone() } else { self.f2(x1, x2)? };
        for c in [&c1, &c2] {
            if c.value.sign() <= 0.0 {
                return Err(Error::UnresolvedDenominator { lambda: self.lambda0 + x1.max(x2) / self.n as f64, rel_error: f64::INFINITY });
            }
        }
        let value = if x1 == x2 {
            1.0
        } else {
            let log = num.value.log_magnitude - 0.5 * (c1.value.log_magnitude + c2.value.log_magnitude);
            num.value.sign() * log.exp()
        };
        let imag_residual = num.imag_residual.max(c1.imag_residual).max(c2.imag_residual);
        Ok(D2Outcome { value, numerator: num, denominators: [c1, c2], imag_residual })
    }
}

fn converged(o: QuadratureOutcome, spec: &QuadratureSpec) -> Result<QuadratureOutcome> {
    if o.imag_residual > IMAG_RESIDUAL_TOL || !o.value.log_magnitude.is_finite() {
        return Err(Error::NotConverged {
            imag_residual: o.imag_residual,
            suggested_truncation: spec.truncation * 1.5,
            suggested_nodes: spec.nodes * 2,
        });
    }
    Ok(o)
}

/// `F_2(x1, x2)` at finite `n`; fails with `NotConverged` when the imaginary
/// residual exceeds [`IMAG_RESIDUAL_TOL`].
pub fn quadrature_f2(n: usize, p: f64, lambda0: f64, x1: f64, x2: f64, spec: &QuadratureSpec) -> Result<QuadratureOutcome> {
    let rep = Representation::build(n, p, lambda0, spec, x1.abs().max(x2.abs()))?;
    converged(rep.f2(x1, x2)?, spec)
}

/// `F_2(x, x)` at finite `n`.
pub fn quadrature_f2_confluent(n: usize, p: f64, lambda0: f64, x: f64, spec: &QuadratureSpec) -> Result<QuadratureOutcome> {
    let rep = Representation::build(n, p, lambda0, spec, x.abs())?;
    converged(rep.f2_confluent(x)?, spec)
}

/// `D_2(x1, x2)` at finite `n` from a single shared field.
pub fn quadrature_d2(n: usize, p: f64, lambda0: f64, x1: f64, x2: f64, spec: &QuadratureSpec) -> Result<D2Outcome> {
    let rep = Representation::build(n, p, lambda0, spec, x1.abs().max(x2.abs()))?;
    let out = rep.d2(x1, x2)?;
    if out.imag_residual > IMAG_RESIDUAL_TOL {
        return Err(Error::NotConverged {
            imag_residual: out.imag_residual,
            suggested_truncation: spec.truncation * 1.5,
            suggested_nodes: spec.nodes * 2,
        });
    }
    Ok(out)
}
