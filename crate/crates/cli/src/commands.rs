use std::time::Instant;

use charpoly_core::algebra::{
    berezin_integrate_full, exterior_power, grassmann_form, haar_unitary, hciz_check, hubbard_stratonovich_check,
    hubbard_stratonovich_grassmann, hubbard_stratonovich_pair_check, wedge_operators, wedge_via_tensor, GrassmannElement,
};
use charpoly_core::asymptotics::{
    airy, airy_kernel, crossover_log_normalizer, crossover_scale, d2_bulk_limit, d2m_bulk_limit, f2_bulk_asymptotic,
    f2_outside_asymptotic, lambda_star, predict_d2, predict_edge, s_hat_2m, CrossoverBranch,
};
use charpoly_core::detkit::{mc_estimate_d, mc_estimate_f, SpectralWindow, WindowScale};
use charpoly_core::ensemble::{b2 as coupling_b2, substream, EnsembleParams};
use charpoly_core::intrep::{contour_advisor, quadrature_d2, quadrature_f2, quadrature_f2_confluent, QuadratureRule};
use charpoly_core::saddle::verify_lemma2;
use charpoly_core::{Error, Exterior, Grassmann};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use crate::config::{
    require, Command, ConvergeOpts, EstimateOpts, IntrepOpts, PRule, Quantity, Rule, RunConfig, Scale, Study,
    Suite, TheoryOpts, TheoryQuantity, VerifyOpts,
};
use crate::error::CliError;
use crate::output::{Method, Report, Rows, StudyRow, VerifyRow, SPEC_VERSION};

pub const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_OFFSETS: [f64; 2] = [1.0, -1.0];
const LEMMA2_HALF_WIDTH: f64 = 3.0;

/// Runs a resolved invocation, inside a dedicated pool when a thread count
/// was given.
pub fn execute(run: &RunConfig) -> Result<Report, CliError> {
    let work = || dispatch(run);
    match run.threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build()?.install(work),
        None => work(),
    }
}

fn dispatch(run: &RunConfig) -> Result<Report, CliError> {
    let timing = run.record_timing;
    let (config, rows, summary, failures) = match &run.command {
        Command::Estimate(o) => (json!(o), Rows::Study(estimate(o, timing)?), None, 0),
        Command::Intrep(o) => (json!(o), Rows::Study(intrep(o, timing)?), None, 0),
        Command::Theory(o) => {
            let rows = theory(o)?;
            let failures = rows.iter().filter(|r| r.regime == REGIME_ERROR).count();
            (json!(o), Rows::Study(rows), None, failures)
        }
        Command::Verify(o) => {
            let rows = verify(o)?;
            let failures = rows.iter().filter(|r| !r.passed).count();
            (json!(o), Rows::Verify(rows), None, failures)
        }
        Command::Converge(o) => {
            let (rows, summary) = converge(o, timing)?;
            (json!(o), Rows::Study(rows), Some(summary), 0)
        }
    };
    Ok(Report { spec_version: SPEC_VERSION, command: run.command.name(), config, rows, summary, failures })
}

fn timed<T>(record: bool, f: impl FnOnce() -> Result<T, CliError>) -> Result<(T, Option<f64>), CliError> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, record.then(|| start.elapsed().as_secs_f64())))
}

fn regime_label(p: f64, lambda0: f64, scale: Scale) -> Result<String, CliError> {
    if scale == Scale::Edge {
        return Ok("edge".into());
    }
    let ls = lambda_star(p)?;
    Ok(if lambda0.abs() < ls {
        "bulk_sine"
    } else if lambda0.abs() > ls {
        "outside_factorized"
    } else {
        "threshold"
    }
    .into())
}

fn pair(x: &[f64]) -> Result<(f64, f64), CliError> {
    match x {
        [a, b] => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("expected two offsets, got {}", x.len()))),
    }
}

pub fn estimate(o: &EstimateOpts, timing: bool) -> Result<Vec<StudyRow>, CliError> {
    let n = require(o.n, "n")?;
    let p = require(o.p, "p")?;
    let lambda0 = o.lambda0.unwrap_or(0.0);
    let x = o.x.clone().unwrap_or_else(|| DEFAULT_OFFSETS.to_vec());
    let samples = o.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = o.seed.unwrap_or(0);
    let scale = o.scale.unwrap_or(Scale::Bulk);
    if let Some(m) = o.m {
        if x.len() != 2 * m {
            return Err(CliError::Usage(format!("m = {m} needs {} offsets, got {}", 2 * m, x.len())));
        }
    }
    let window_scale = match scale {
        Scale::Bulk => WindowScale::Bulk,
        Scale::Edge => WindowScale::Edge,
    };
    let window = SpectralWindow::new(lambda0, x.clone(), window_scale)?;
    let params = EnsembleParams::new(n, p, seed)?;
    let label = format!("{}{}", if o.quantity == Some(Quantity::F) { "f" } else { "d" }, x.len());
    let base = StudyRow::new(&label, Method::Mc).point(Some(n), Some(p), Some(lambda0)).offsets(&x).regime(regime_label(p, lambda0, scale)?);
    let row = match o.quantity.unwrap_or(Quantity::D) {
        Quantity::F => {
            let (est, t) = timed(timing, || Ok(mc_estimate_f(&params, &window, samples)?))?;
            StudyRow { std_error: Some(est.std_error_rel), wall_time: t, ..base.log_signed(&est.mean) }
        }
        Quantity::D => {
            let (est, t) = timed(timing, || Ok(mc_estimate_d(&params, &window, samples)?))?;
            StudyRow { std_error: Some(est.std_error), wall_time: t, ..base.value(est.value) }
        }
        Quantity::Confluent => return Err(CliError::Usage("estimate supports --quantity f or d".into())),
    };
    Ok(vec![StudyRow { seed: Some(seed), ..row }])
}

pub fn intrep(o: &IntrepOpts, timing: bool) -> Result<Vec<StudyRow>, CliError> {
    let n = require(o.n, "n")?;
    let p = require(o.p, "p")?;
    let lambda0 = o.lambda0.unwrap_or(0.0);
    let x = o.x.clone().unwrap_or_else(|| DEFAULT_OFFSETS.to_vec());
    let (x1, x2) = pair(&x)?;
    let quantity = o.quantity.unwrap_or(Quantity::D);
    if quantity == Quantity::Confluent && x1 != x2 {
        return Err(CliError::Usage(format!("confluent evaluation needs x1 = x2, got {x1} and {x2}")));
    }
    let mut spec = contour_advisor(n, p, lambda0)?;
    if let Some(nodes) = o.nodes {
        spec.nodes = nodes;
    }
    if let Some(r) = o.truncation {
        spec.truncation = r;
    }
    if let Some(g) = o.gamma {
        spec.contour_shift = g;
    }
    if let Some(rule) = o.rule {
        spec.rule = match rule {
            Rule::Gl => QuadratureRule::GaussLegendreTensor,
            Rule::Trapezoid => QuadratureRule::Trapezoid,
        };
    }
    spec.validate()?;
    let base = StudyRow::new("", Method::Quadrature).point(Some(n), Some(p), Some(lambda0)).offsets(&x).regime(regime_label(p, lambda0, Scale::Bulk)?);
    let row = match quantity {
        Quantity::F => {
            let (q, t) = timed(timing, || Ok(quadrature_f2(n, p, lambda0, x1, x2, &spec)?))?;
            StudyRow { quantity: "f2".into(), imag_residual: Some(q.imag_residual), wall_time: t, ..base.log_signed(&q.value) }
        }
        Quantity::Confluent => {
            let (q, t) = timed(timing, || Ok(quadrature_f2_confluent(n, p, lambda0, x1, &spec)?))?;
            StudyRow { quantity: "f2_confluent".into(), imag_residual: Some(q.imag_residual), wall_time: t, ..base.log_signed(&q.value) }
        }
        Quantity::D => {
            let (d, t) = timed(timing, || Ok(quadrature_d2(n, p, lambda0, x1, x2, &spec)?))?;
            StudyRow { quantity: "d2".into(), imag_residual: Some(d.imag_residual), wall_time: t, ..base.value(d.value) }
        }
    };
    Ok(vec![row])
}

pub const REGIME_ERROR: &str = "regime_error";

pub fn theory(o: &TheoryOpts) -> Result<Vec<StudyRow>, CliError> {
    let quantity = require(o.quantity, "quantity")?;
    let lambda0 = o.lambda0.unwrap_or(0.0);
    let x = o.x.clone().unwrap_or_else(|| DEFAULT_OFFSETS.to_vec());
    let row = |q: &str| StudyRow::new(q, Method::Asymptotic);
    let computed = match quantity {
        TheoryQuantity::LambdaStar => {
            let p = require(o.p, "p")?;
            lambda_star(p).map(|v| vec![row("lambda_star").point(None, Some(p), None).value(v).regime("threshold")])
        }
        TheoryQuantity::D2 => {
            let p = require(o.p, "p")?;
            let (x1, x2) = pair(&x)?;
            let base = row("d2_limit").point(None, Some(p), Some(lambda0)).offsets(&x);
            predict_d2(p, lambda0, x1, x2).map(|pr| vec![base.clone().value(pr.value).regime(pr.regime.label())])
        }
        TheoryQuantity::F2 => {
            let n = require(o.n, "n")?;
            let p = require(o.p, "p")?;
            let (x1, x2) = pair(&x)?;
            let b2 = coupling_b2(n, p)?;
            let base = row("f2_asymptotic").point(Some(n), Some(p), Some(lambda0)).offsets(&x);
            if lambda0 * lambda0 < 4.0 - 4.0 * b2 * b2 {
                f2_bulk_asymptotic(n, p, lambda0, x1, x2).map(|v| vec![base.log_signed(&v).regime("bulk_sine")])
            } else {
                f2_outside_asymptotic(n, p, lambda0, x1, x2).map(|v| vec![base.log_signed(&v).regime("outside_factorized")])
            }
        }
        TheoryQuantity::Crossover => {
            let n = require(o.n, "n")?;
            let p = require(o.p, "p")?;
            let delta = require(o.delta, "delta")?;
            let (x1, x2) = pair(&x)?;
            let b2 = coupling_b2(n, p)?;
            let l2 = 4.0 - 4.0 * b2 * b2 - delta;
            if !(l2 >= 0.0) {
                return Err(CliError::Usage(format!("delta = {delta} exceeds 4 - 4b2² = {}", 4.0 - 4.0 * b2 * b2)));
            }
            let l0 = l2.sqrt();
            let scale = crossover_scale(n, delta);
            let branch = match scale.branch {
                CrossoverBranch::Inside => "crossover_inside",
                CrossoverBranch::Critical => "crossover_critical",
                CrossoverBranch::Outside => "crossover_outside",
            };
            // Y_n with C = 1 times the exponential normalizer.
            let log = scale.log_scale + crossover_log_normalizer(n, b2, delta, l0, x1, x2);
            let mut r = row("f2_crossover").point(Some(n), Some(p), Some(l0)).offsets(&x).regime(branch);
            r.value_log = Some(log);
            r.value_sign = Some(1.0);
            r.value = Some(log.exp()).filter(|v| v.is_finite());
            Ok(vec![r])
        }
        TheoryQuantity::SHat => {
            let base = row("").point(None, None, Some(lambda0)).offsets(&x).regime("bulk_sine");
            s_hat_2m(&x, lambda0).and_then(|s| {
                let ratio = d2m_bulk_limit(&x, lambda0)?;
                Ok(vec![
                    StudyRow { quantity: "s_hat".into(), ..base.clone().value(s) },
                    StudyRow { quantity: "s_hat_ratio".into(), ..base.clone().value(ratio) },
                ])
            })
        }
        TheoryQuantity::Edge => {
            let c = o.c.unwrap_or(0.0);
            let (x1, x2) = pair(&x)?;
            predict_edge(c, x1, x2)
                .map(|pr| vec![row("d2_edge_limit").point(None, None, Some(2.0)).offsets(&x).value(pr.value).regime(pr.regime.label())])
        }
    };
    match computed {
        Ok(rows) => Ok(rows),
        Err(Error::Regime(msg)) => {
            eprintln!("charpoly: regime violation: {msg}");
            Ok(vec![row("").point(o.n, o.p, Some(lambda0)).offsets(&x).regime(REGIME_ERROR)])
        }
        Err(e) => Err(e.into()),
    }
}

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_op(n: usize, k: usize, rng: &mut impl Rng) -> Result<Exterior, CliError> {
    Ok(Exterior::from_fn(n, k, |_, _| random_complex(rng))?)
}

fn max_term(g: &Grassmann) -> f64 {
    g.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

fn op_gap(a: &Exterior, b: &Exterior) -> Result<f64, CliError> {
    Ok(a.max_diff(b, |c| c.norm())?)
}

pub fn verify(o: &VerifyOpts) -> Result<Vec<VerifyRow>, CliError> {
    let suite = require(o.suite, "suite")?;
    if let Some(t) = o.tolerance {
        if !(t >= 0.0) {
            return Err(CliError::Config(format!("tolerance must be non-negative, got {t}")));
        }
    }
    let seed = o.seed.unwrap_or(0);
    let tol = |default: f64| o.tolerance.unwrap_or(default);
    match suite {
        Suite::Lemma2 => {
            let samples = o.samples.unwrap_or(1_000_000);
            let r = verify_lemma2(samples, LEMMA2_HALF_WIDTH, seed)?;
            let mut rows = vec![VerifyRow::new("lemma2", "random_points", samples, r.max_excess.max(0.0), tol(1e-12))];
            for f in &r.families {
                let mut row = VerifyRow::new("lemma2", format!("family_{}", f.label), f.points, f.max_gap, tol(1e-10));
                row.passed &= f.non_strict == 0;
                rows.push(row);
                rows.push(VerifyRow::new("lemma2", format!("family_{}_perturbed_non_strict", f.label), f.points, f.non_strict as f64, 0.0));
            }
            Ok(rows)
        }
        Suite::Grassmann => {
            let samples = o.samples.unwrap_or(100);
            let mut worst = 0.0f64;
            for i in 0..samples {
                let mut rng = substream(seed, i as u64);
                let n = 1 + i % 4;
                let a = random_op(n, 1, &mut rng)?;
                let det = *exterior_power(&a, n)?.entry(0, 0);
                let g = GrassmannElement::neg_bilinear(n, a.data())?.exp_nilpotent()?;
                worst = worst.max((berezin_integrate_full(&g) - det).norm());
            }
            Ok(vec![VerifyRow::new("grassmann", "det_identity", samples, worst, tol(1e-12))])
        }
        Suite::Wedge => wedge_suite(o.samples.unwrap_or(50), seed, &tol),
        Suite::Hciz => {
            let samples = o.samples.unwrap_or(100_000);
            let cases = 10;
            let mut rows = Vec::with_capacity(cases);
            for k in 0..cases {
                let mut rng = substream(seed, k as u64);
                let (a, b, z) = hciz_case(&mut rng);
                let r = hciz_check(&a, &b, z, samples, seed.wrapping_add(1 + k as u64))?;
                rows.push(VerifyRow::new("hciz", format!("case_{k}_z_score"), samples, r.z_score, tol(3.0)));
            }
            Ok(rows)
        }
        Suite::Hs => {
            let samples = o.samples.unwrap_or(20);
            let mut rng = substream(seed, 0);
            let (mut scalar, mut pair_gap, mut grass) = (0.0f64, 0.0f64, 0.0f64);
            for _ in 0..samples {
                let y = random_complex(&mut rng);
                let t = random_complex(&mut rng);
                let a = rng.gen_range(0.3..3.0);
                scalar = scalar.max(hubbard_stratonovich_check(y, a)? / (y * y).exp().norm().max(1.0));
                pair_gap = pair_gap.max(hubbard_stratonovich_pair_check(y, t, a)? / (y * t).exp().norm().max(1.0));
                let g = random_even_element(3, &mut rng)?;
                let (lhs, rhs) = hubbard_stratonovich_grassmann(&g, a)?;
                grass = grass.max(max_term(&lhs.sub(&rhs)?));
            }
            Ok(vec![
                VerifyRow::new("hs", "scalar", samples, scalar, tol(1e-10)),
                VerifyRow::new("hs", "pair", samples, pair_gap, tol(1e-10)),
                VerifyRow::new("hs", "grassmann", samples, grass, tol(1e-10)),
            ])
        }
        Suite::Airy => airy_suite(&tol),
    }
}

/// A normal 2×2 `A = U diag(a) U*`, distinct real `b` and a complex `z`.
pub fn hciz_case(rng: &mut impl Rng) -> (DMatrix<Complex64>, Vec<f64>, Complex64) {
    let u = haar_unitary(2, rng);
    let eig = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(2, |_, _| random_complex(rng)));
    let a = &u * eig * u.adjoint();
    let b0 = rng.gen_range(-1.0..1.0);
    let b = vec![b0, b0 + rng.gen_range(0.2..1.5)];
    let z = random_complex(rng);
    (a, b, z)
}

fn random_even_element(n: usize, rng: &mut impl Rng) -> Result<Grassmann, CliError> {
    let mut y = Grassmann::zero(n)?;
    for j in 0..n {
        let pair = Grassmann::psi_bar(n, j)?.mul(&Grassmann::psi(n, j)?)?;
        y = y.add(&pair.scale(random_complex(rng)))?;
    }
    Ok(y)
}

fn wedge_suite(samples: usize, seed: u64, tol: &dyn Fn(f64) -> f64) -> Result<Vec<VerifyRow>, CliError> {
    let shapes = [(2, 1, 1), (3, 1, 1), (3, 1, 2), (3, 2, 1), (4, 1, 1), (4, 1, 2), (4, 2, 1)];
    let (mut lemma, mut comm, mut assoc, mut alt, mut mixed) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..samples {
        let mut rng = substream(seed, i as u64);
        let (n, q, r) = shapes[i % shapes.len()];
        let a = random_op(n, q, &mut rng)?;
        let b = random_op(n, r, &mut rng)?;
        let ab = wedge_operators(&a, &b)?;
        let scale = Complex64::new(binomial(q + r, q) as f64, 0.0);
        let lhs = grassmann_form(&a)?.mul(&grassmann_form(&b)?)?;
        lemma = lemma.max(max_term(&lhs.sub(&grassmann_form(&ab)?.scale(scale))?));
        comm = comm.max(op_gap(&ab, &wedge_operators(&b, &a)?)?);
        alt = alt.max(op_gap(&ab, &wedge_via_tensor(&a, &b)?)?);
        if q + r < n {
            let c = random_op(n, 1, &mut rng)?;
            let left = wedge_operators(&ab, &c)?;
            let right = wedge_operators(&a, &wedge_operators(&b, &c)?)?;
            assoc = assoc.max(op_gap(&left, &right)?);
        }
        let m = random_op(n, 1, &mut rng)?;
        let (mq, mr, mqr) = (exterior_power(&m, q)?, exterior_power(&m, r)?, exterior_power(&m, q + r)?);
        let right = wedge_operators(&a.matmul(&mq)?, &b.matmul(&mr)?)?;
        mixed = mixed.max(op_gap(&right, &ab.matmul(&mqr)?)?);
        let left = wedge_operators(&mq.matmul(&a)?, &mr.matmul(&b)?)?;
        mixed = mixed.max(op_gap(&left, &mqr.matmul(&ab)?)?);
    }
    Ok(vec![
        VerifyRow::new("wedge", "grassmann_product", samples, lemma, tol(1e-12)),
        VerifyRow::new("wedge", "commutative", samples, comm, tol(1e-10)),
        VerifyRow::new("wedge", "associative", samples, assoc, tol(1e-10)),
        VerifyRow::new("wedge", "alt_tensor", samples, alt, tol(1e-10)),
        VerifyRow::new("wedge", "mixed_product", samples, mixed, tol(1e-10)),
    ])
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

// Γ(2/3) and Γ(1/3).
const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;
const GAMMA_ONE_THIRD: f64 = 2.678_938_534_707_747_6;

fn airy_suite(tol: &dyn Fn(f64) -> f64) -> Result<Vec<VerifyRow>, CliError> {
    let at0 = airy(0.0f64)?;
    let ai0 = 1.0 / (3f64.powf(2.0 / 3.0) * GAMMA_TWO_THIRDS);
    let aip0 = -1.0 / (3f64.cbrt() * GAMMA_ONE_THIRD);

    let h = 1e-5;
    let grid: Vec<f64> = (0..=300).map(|i| -10.0 + 0.05 * i as f64).collect();
    let mut ode = 0.0f64;
    for &x in &grid {
        let (lo, mid, hi) = (airy(x - h)?, airy(x)?, airy(x + h)?);
        ode = ode.max(((hi.ai_prime - lo.ai_prime) / (2.0 * h) - x * mid.ai).abs());
    }

    let eps = 1e-5;
    let mut diag = 0.0f64;
    for i in 0..=120 {
        let x = -8.0 + 0.1 * i as f64;
        diag = diag.max((airy_kernel(x - eps, x + eps)? - airy_kernel(x, x)?).abs());
    }
    Ok(vec![
        VerifyRow::new("airy", "ai_at_zero", 1, (at0.ai - ai0).abs(), tol(1e-10)),
        VerifyRow::new("airy", "ai_prime_at_zero", 1, (at0.ai_prime - aip0).abs(), tol(1e-10)),
        VerifyRow::new("airy", "ode_residual", grid.len(), ode, tol(1e-6)),
        VerifyRow::new("airy", "kernel_diagonal_limit", 121, diag, tol(1e-8)),
    ])
}

/// Limiting `c = lim n^{2/3}/p` of an edge sweep; `∞` for the trivial regime.
fn edge_c(rule: PRule, value: f64) -> f64 {
    const TWO_THIRDS: f64 = 2.0 / 3.0;
    match rule {
        PRule::Const => f64::INFINITY,
        PRule::N => 0.0,
        PRule::Pow if value < TWO_THIRDS => f64::INFINITY,
        PRule::Pow if value > TWO_THIRDS => 0.0,
        PRule::Pow => 1.0,
        PRule::EdgeC => value,
    }
}

pub fn converge(o: &ConvergeOpts, timing: bool) -> Result<(Vec<StudyRow>, serde_json::Value), CliError> {
    let study = require(o.study, "study")?;
    let n_list = o.n_list.clone().unwrap_or_else(|| vec![200, 800, 3200]);
    if n_list.is_empty() {
        return Err(CliError::Usage("empty --n-list".into()));
    }
    let (default_rule, default_p, default_l0, default_x) = match study {
        Study::Bulk => (PRule::Const, 8.0, 0.0, [1.0, -1.0]),
        Study::Outside => (PRule::Const, 8.0, 1.9, [1.0, -1.0]),
        Study::Edge => (PRule::N, 0.0, 2.0, [0.0, 1.0]),
    };
    let rule = o.p_rule.unwrap_or(default_rule);
    let value = o.p.unwrap_or(default_p);
    let lambda0 = if study == Study::Edge { 2.0 } else { o.lambda0.unwrap_or(default_l0) };
    if study == Study::Edge && o.lambda0.is_some_and(|l| l != 2.0) {
        return Err(CliError::Usage("edge studies run at lambda0 = 2".into()));
    }
    let x = o.x.clone().unwrap_or_else(|| default_x.to_vec());
    let (x1, x2) = pair(&x)?;

    let (limit, regime) = match study {
        Study::Bulk => {
            if rule != PRule::Const {
                return Err(CliError::Usage("bulk studies need a constant p".into()));
            }
            (d2_bulk_limit(lambda0, x1, x2, value)?, "bulk_sine".to_string())
        }
        Study::Outside => {
            if rule != PRule::Const {
                return Err(CliError::Usage("outside studies need a constant p".into()));
            }
            let pr = predict_d2(value, lambda0, x1, x2)?;
            if pr.regime.label() != "outside_factorized" {
                return Err(Error::Regime(format!("λ0 = {lambda0} is inside the bulk for p = {value}")).into());
            }
            (pr.value, pr.regime.label().to_string())
        }
        Study::Edge => {
            let pr = predict_edge(edge_c(rule, value), x1, x2)?;
            (pr.value, pr.regime.label().to_string())
        }
    };

    let mut rows = Vec::with_capacity(n_list.len() + 1);
    let mut errors = Vec::with_capacity(n_list.len());
    for &n in &n_list {
        let p = rule.p(n, value);
        let (b1, b2) = match study {
            Study::Edge => ((n as f64).cbrt() * x1, (n as f64).cbrt() * x2),
            _ => (x1, x2),
        };
        let mut spec = contour_advisor(n, p, lambda0)?;
        if let Some(nodes) = o.nodes {
            spec.nodes = nodes;
        }
        let (d, t) = timed(timing, || Ok(quadrature_d2(n, p, lambda0, b1, b2, &spec)?))?;
        let err = (d.value - limit).abs();
        errors.push(err);
        rows.push(StudyRow {
            imag_residual: Some(d.imag_residual),
            reference_error: Some(err),
            wall_time: t,
            ..StudyRow::new("d2", Method::Quadrature).point(Some(n), Some(p), Some(lambda0)).offsets(&x).value(d.value).regime(regime.clone())
        });
    }
    rows.push(StudyRow::new("d2_limit", Method::Asymptotic).point(None, None, Some(lambda0)).offsets(&x).value(limit).regime(regime));
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let summary = json!({
        "study": study,
        "limit": limit,
        "errors": errors,
        "strictly_decreasing": decreasing,
        "final_error": errors.last(),
    });
    Ok((rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_c_limits() {
        assert_eq!(edge_c(PRule::N, 0.0), 0.0);
        assert_eq!(edge_c(PRule::Pow, 0.5), f64::INFINITY);
        assert_eq!(edge_c(PRule::Pow, 1.0), 0.0);
        assert_eq!(edge_c(PRule::EdgeC, 0.7), 0.7);
        assert_eq!(edge_c(PRule::Const, 8.0), f64::INFINITY);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 1), 3);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 0), 1);
    }

    #[test]
    fn airy_suite_passes() {
        let rows = airy_suite(&|d| d).unwrap();
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    }

    #[test]
    fn wedge_suite_passes() {
        let rows = wedge_suite(14, 3, &|d| d).unwrap();
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    }

    #[test]
    fn shat_rows() {
        let o = TheoryOpts { quantity: Some(TheoryQuantity::SHat), x: Some(vec![0.0, 1.0, 2.0, 3.0]), ..Default::default() };
        let rows = theory(&o).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].quantity, "s_hat_ratio");
        assert_eq!(rows[0].x_extra, "2;3");
    }

    #[test]
    fn outside_regime_gives_error_row() {
        let o = TheoryOpts { quantity: Some(TheoryQuantity::SHat), lambda0: Some(2.5), x: Some(vec![0.0, 1.0]), ..Default::default() };
        let rows = theory(&o).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].regime, REGIME_ERROR);
        assert!(rows[0].value_log.is_none());
    }
}
