//! Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned
//! here rather than read from a profile so the thresholds cannot drift.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wigmaj_cli::corpus::{self, CorpusSpec};
use wigmaj_cli::figures::{fig4_points, FIG1_PAIRS, FIG1_PREFIX, FIG2_MIXTURES, FIG3_LAMBDAS};
use wigmaj_cli::par;
use wigmaj_cli::profile::Settings;
use wigmaj_core::channels::{
    analytic_output, kernel_eval, AnalyticFamily, GaussianChannel, OutputGrid, RandomGaussianUnitarySpec,
    SymplecticSampler,
};
use wigmaj_core::gaussian_algebra::{
    det_gamma_verdict, dm_majorization_verdict, dm_spectrum_prefix, single_particle_energies, CovarianceMatrix,
    GaussianStateSpec,
};
use wigmaj_core::majorization::{
    check_positive_majorization, proposal1_check, proposal2_check, proposal2_curves, DEFAULT_LAMBDAS,
};
use wigmaj_core::negativity::fock_negativity_scan;
use wigmaj_core::phase_space::{
    box_state_wigner, cat_wigner, fock_mixture, fock_mixture_weights, fock_wigner, gaussian_mixture, gaussian_wigner,
    grid_wigner, integrate, scalar_channel_output, FockPair, GridFunction, Parity, PreparedIntegrator, ScalarInput,
    Transform, WignerEvaluable, WignerKind,
};
use wigmaj_core::symplectic::{beam_splitter, rotation, squeezer, Matrix};
use wigmaj_core::{Error, MarginCurve, Relation};

const ORACLE_PAIRS: usize = 50;
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const KERNEL_TOL: f64 = 1e-6;
const ANALYTIC_TOL: f64 = 1e-6;
const ANALYTIC_BUDGET: Duration = Duration::from_secs(300);
const INSET_SLOPE: (f64, f64) = (0.44, 0.03);
const INSET_INTERCEPT: (f64, f64) = (0.12, 0.05);
const COLLAPSE_TOL: f64 = 1e-3;
const SLACK_TOL: f64 = 1e-6;
const MC_SAMPLES: usize = 10_000;
const MC_SIGMAS: f64 = 3.0;
const DM_PAIRS: usize = 100;
const NORM_TOL: f64 = 1e-8;

/// Criteria that are known not to hold and are documented as such.
const KNOWN_DEVIATIONS: [&str; 1] = ["fig2_inset_fit"];

type Check = fn(&Settings) -> Result<(bool, String)>;

fn main() -> ExitCode {
    let s = Settings::named("default").expect("default profile");
    let criteria: [(&str, Check); 11] = [
        ("gaussian_oracle_equivalence", gaussian_oracle),
        ("kernel_identities", kernel_identities),
        ("analytic_families", analytic_families),
        ("fig2_reproduction", fig2),
        ("fig2_inset_fit", fig2_inset),
        ("fig3_reproduction", fig3),
        ("fig4_renyi_slack", fig4),
        ("random_unitary_majorization", random_unitaries),
        ("dm_gaussian_agreement", dm_agreement),
        ("corpus_negativity_order", corpus_order),
        ("normalization_suite", normalization),
    ];
    let mut unexpected = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let (passed, detail) = match check(&s) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e:#}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let word = if passed { "PASS" } else { "FAIL" };
        let known = if !passed && KNOWN_DEVIATIONS.contains(&name) { " (known deviation)" } else { "" };
        println!("{word} {name}{known}: {detail} [{secs:.1}s]");
        if !passed && known.is_empty() {
            unexpected.push(name);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}

fn diag(v: &[f64]) -> Matrix {
    Matrix::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
}

fn random_gaussian(rng: &mut ChaCha8Rng, n: usize, sigmas: (f64, f64)) -> GaussianStateSpec {
    let mut s = Matrix::identity(2 * n, 2 * n);
    for k in 0..n {
        s = rotation(n, k, rng.random_range(0.0..PI)) * squeezer(n, k, rng.random_range(-0.6..0.6)) * s;
    }
    for k in 1..n {
        s = beam_splitter(n, k - 1, k, rng.random_range(0.0..PI)) * s;
    }
    let sig: Vec<f64> = (0..n).map(|_| rng.random_range(sigmas.0..sigmas.1)).collect();
    let d: Vec<f64> = sig.iter().chain(sig.iter()).copied().collect();
    let cov = CovarianceMatrix::new(&s * diag(&d) * s.transpose()).unwrap();
    let mean = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    GaussianStateSpec::new(mean, cov).unwrap()
}

fn gaussian_oracle(s: &Settings) -> Result<(bool, String)> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let cfg = s.engine();
    let mut bad = Vec::new();
    let mut counts = Vec::new();
    for n in 1..=3 {
        for k in 0..ORACLE_PAIRS {
            let a = random_gaussian(&mut rng, n, (0.5, 2.5));
            let b = random_gaussian(&mut rng, n, (0.5, 2.5));
            let want = det_gamma_verdict(&a.cov, &b.cov, &s.tolerance)?.relation;
            let got = check_positive_majorization(&gaussian_wigner(&a), &gaussian_wigner(&b), None, &cfg)
                .map(|v| v.relation.as_str().to_string())
                .unwrap_or_else(|e| format!("error {e}"));
            if got != want.as_str() {
                bad.push(format!("N={n} #{k}: {got} vs {}", want.as_str()));
            }
        }
        counts.push(format!("N={n}: {ORACLE_PAIRS}"));
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < ORACLE_BUDGET;
    Ok((
        ok,
        format!(
            "{} pairs ({}), {} disagreements{}; {:.1}s against {}s",
            3 * ORACLE_PAIRS,
            counts.join(", "),
            bad.len(),
            if bad.is_empty() { String::new() } else { format!(" [{}]", bad.join("; ")) },
            elapsed.as_secs_f64(),
            ORACLE_BUDGET.as_secs()
        ),
    ))
}

fn random_channel(rng: &mut ChaCha8Rng) -> GaussianChannel {
    loop {
        let x = Matrix::from_row_slice(
            2,
            2,
            &[
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.5..1.5),
            ],
        );
        let dx = x.determinant();
        if dx.abs() < 0.25 {
            continue;
        }
        let r = rotation(1, 0, rng.random_range(0.0..PI));
        let mut y = &r * diag(&[rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)]) * r.transpose();
        let need = (0.5 * (1.0 - dx)).abs() * 1.05;
        let have = y.determinant().sqrt();
        if have < need {
            y *= need / have;
        }
        return GaussianChannel::new(x, y).unwrap();
    }
}

/// Trapezoid sum of f(c + L u) |det L| over u in [-10, 10]^2, L the Cholesky
/// factor of `cov`. The integrand is a Gaussian in u, so the rule converges fast.
fn integrate_around<F: Fn(&[f64]) -> f64>(f: F, c: [f64; 2], cov: &Matrix) -> Result<f64> {
    let l = cov.clone().cholesky().ok_or_else(|| anyhow!("covariance is not positive definite"))?.l();
    let jac = l[(0, 0)] * l[(1, 1)];
    let (h, n) = (0.05, 400);
    let mut sum = 0.0;
    for i in 0..=n {
        let u0 = -10.0 + h * i as f64;
        for j in 0..=n {
            let u1 = -10.0 + h * j as f64;
            let z = [c[0] + l[(0, 0)] * u0, c[1] + l[(1, 0)] * u0 + l[(1, 1)] * u1];
            sum += f(&z);
        }
    }
    Ok(sum * h * h * jac)
}

fn kernel_identities(_: &Settings) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for _ in 0..5 {
        let ch = random_channel(&mut rng);
        let x = ch.x().clone();
        let xinv = x.clone().try_inverse().ok_or_else(|| anyhow!("singular X"))?;
        let sigma = &xinv * ch.y() * xinv.transpose();
        for _ in 0..3 {
            let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            // over r at fixed z = p
            let c = [x[(0, 0)] * p[0] + x[(0, 1)] * p[1], x[(1, 0)] * p[0] + x[(1, 1)] * p[1]];
            let over_r = integrate_around(|r| kernel_eval(&ch, r, &p).unwrap(), c, ch.y())?;
            // over z at fixed r = p
            let c = [xinv[(0, 0)] * p[0] + xinv[(0, 1)] * p[1], xinv[(1, 0)] * p[0] + xinv[(1, 1)] * p[1]];
            let over_z = integrate_around(|z| kernel_eval(&ch, &p, z).unwrap(), c, &sigma)?;
            worst = worst.max((over_r - 1.0).abs()).max((over_z - 1.0 / ch.det_x().abs()).abs());
            n += 1;
        }
    }
    Ok((worst < KERNEL_TOL, format!("{n} points on 5 channels, worst error {worst:.2e} against {KERNEL_TOL:e}")))
}

fn grid_values(w: &WignerEvaluable) -> Result<&GridFunction> {
    match w.kind() {
        WignerKind::GridFunction(g) => Ok(g),
        _ => Err(anyhow!("expected a grid output")),
    }
}

fn analytic_families(_: &Settings) -> Result<(bool, String)> {
    let start = Instant::now();
    let families = [
        AnalyticFamily::ThermalOnMix01 { u: 0.9, s: 0.4, c: 0.75 },
        AnalyticFamily::ThermalOnMix12 { u: 0.6, s: 0.3, c: 0.75 },
        AnalyticFamily::ThermalOnCat { alpha: vec![1.5, 0.0], parity: Parity::Odd, s: 0.3, c: 0.75 },
        AnalyticFamily::ClassmixOnMix01 { u: 0.7, c: 0.3 },
        AnalyticFamily::ClassmixOnMix12 { u: 0.5, c: 0.25 },
        AnalyticFamily::ClassmixOnCat { alpha: vec![1.0, 0.5], parity: Parity::Even, c: 0.2 },
    ];
    let grid = OutputGrid::new(6.0, 101)?;
    let mut errs = Vec::new();
    for f in &families {
        let exact = analytic_output(f)?;
        let num = par::convolve(&f.channel()?, &f.input()?, &grid)?;
        let g = grid_values(&num)?;
        let n = g.nx();
        let err = (0..n * n).map(|k| (g.values()[k] - exact.eval(&[g.x(k / n), g.p(k % n)])).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let ok = worst < ANALYTIC_TOL && elapsed < ANALYTIC_BUDGET;
    let list = errs.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(", ");
    Ok((
        ok,
        format!(
            "sup errors [{list}] against {ANALYTIC_TOL:e} on 101x101 over [-6,6]^2; {:.1}s against {}s",
            elapsed.as_secs_f64(),
            ANALYTIC_BUDGET.as_secs()
        ),
    ))
}

fn fig2(s: &Settings) -> Result<(bool, String)> {
    let cfg = s.engine();
    let fock: Vec<_> = (0..5).map(fock_wigner).collect();
    let mut crossing = 0;
    for i in 0..5 {
        for j in i + 1..5 {
            if proposal1_check(&fock[i], &fock[j], None, &cfg)?.relation == Relation::Incomparable {
                crossing += 1;
            }
        }
    }
    let mix = FIG2_MIXTURES.iter().map(|&u| fock_mixture(u, FockPair::ZeroOne)).collect::<Result<Vec<_>, _>>()?;
    let mut chain = Vec::new();
    let mut chain_ok = true;
    for i in 0..mix.len() - 1 {
        let v = proposal1_check(&mix[i], &mix[i + 1], None, &cfg)?;
        chain_ok &= v.relation == Relation::FirstMajorizes && v.min_margin > 0.0;
        chain.push(format!(
            "{} > {}: {} (min margin {:.2e})",
            FIG2_MIXTURES[i],
            FIG2_MIXTURES[i + 1],
            v.relation.as_str(),
            v.min_margin
        ));
    }
    Ok((crossing == 10 && chain_ok, format!("{crossing}/10 Fock pairs Incomparable; chain {}", chain.join(", "))))
}

fn fig2_inset(s: &Settings) -> Result<(bool, String)> {
    let fit = fock_negativity_scan(15, 15, &s.quadrature)?.fit;
    let ok = (fit.slope - INSET_SLOPE.0).abs() <= INSET_SLOPE.1
        && (fit.intercept - INSET_INTERCEPT.0).abs() <= INSET_INTERCEPT.1;
    let wide = fock_negativity_scan(30, 15, &s.quadrature)?.fit;
    Ok((
        ok,
        format!(
            "n <= 15 fit slope {:.4}, intercept {:.4} against {} +- {} and {} +- {}; n in 16..30 gives slope {:.4}, intercept {:.4}",
            fit.slope, fit.intercept, INSET_SLOPE.0, INSET_SLOPE.1, INSET_INTERCEPT.0, INSET_INTERCEPT.1, wide.slope, wide.intercept
        ),
    ))
}

fn sup_negative_t(a: &MarginCurve, b: &MarginCurve) -> f64 {
    (0..a.len()).filter(|&i| a.t[i] < 0.0).map(|i| (a.margin[i] - b.margin[i]).abs()).fold(0.0, f64::max)
}

fn fig3(s: &Settings) -> Result<(bool, String)> {
    let cfg = s.engine();
    let pairs = [
        ("fock 0 vs 1", fock_wigner(0), fock_wigner(1)),
        ("u 9/10 vs 3/5", fock_mixture(0.9, FockPair::ZeroOne)?, fock_mixture(0.6, FockPair::ZeroOne)?),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, a, b) in &pairs {
        let curves = proposal2_curves(a, b, None, &FIG3_LAMBDAS, &cfg)?;
        let diffs: Vec<f64> = curves.windows(2).map(|w| sup_negative_t(&w[0].1, &w[1].1)).collect();
        let last = *diffs.last().expect("several regulators");
        ok &= last < COLLAPSE_TOL;
        let d = diffs.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>().join(", ");
        parts.push(format!("{name}: successive sup diffs [{d}]"));
    }
    let left = proposal2_check(&pairs[0].1, &pairs[0].2, None, &DEFAULT_LAMBDAS, &cfg)?.relation;
    let right = proposal2_check(&pairs[1].1, &pairs[1].2, None, &DEFAULT_LAMBDAS, &cfg)?.relation;
    ok &= left == Relation::Incomparable && right == Relation::FirstMajorizes;
    parts.push(format!("left {}, right {}", left.as_str(), right.as_str()));
    Ok((ok, format!("Lambda {FIG3_LAMBDAS:?}, last pair below {COLLAPSE_TOL:e}; {}", parts.join("; "))))
}

fn fig4(s: &Settings) -> Result<(bool, String)> {
    let pts = fig4_points(s)?;
    let sig = |p: &wigmaj_cli::figures::Fig4Point| s.tolerance.margin_tolerance(p.error, p.raw_diff.abs());
    let pos = pts.iter().filter(|p| p.raw_diff > sig(p)).count();
    let neg = pts.iter().filter(|p| p.raw_diff < -sig(p)).count();
    let worst = pts.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
    let ok = pos > 0 && neg > 0 && worst >= -SLACK_TOL;
    Ok((
        ok,
        format!("{} points: raw difference {pos} positive, {neg} negative; smallest slack {worst:.2e} against -{SLACK_TOL:e}", pts.len()),
    ))
}

/// Standard error of I_t on a sampled output, bounded by summing the node
/// errors over the nodes where the output exceeds t in absolute value.
fn functional_se(g: &GridFunction, t: f64) -> f64 {
    let (dx, dp) = g.spacing();
    let se = g.std_err().unwrap_or(&[]);
    g.values().iter().zip(se).filter(|(v, _)| v.abs() > t).map(|(_, e)| e).sum::<f64>() * dx * dp
}

fn random_unitaries(s: &Settings) -> Result<(bool, String)> {
    let cfg = s.engine();
    let samplers = [
        SymplecticSampler::Displacement { cov: 0.25 },
        SymplecticSampler::RotationSqueeze { zeta_max: 0.5, shift_sigma: 0.3 },
        SymplecticSampler::RotationSqueeze { zeta_max: 0.0, shift_sigma: 0.5 },
    ];
    let inputs = [
        ("fock 1", fock_wigner(1)),
        ("odd cat (2, 0)", cat_wigner(&[2.0, 0.0], Parity::Odd)?),
        ("mixture u = 4/5", fock_mixture(0.8, FockPair::ZeroOne)?),
    ];
    let grid = OutputGrid::new(8.0, 161)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, sampler) in samplers.iter().enumerate() {
        for (name, w) in &inputs {
            let spec =
                RandomGaussianUnitarySpec { sampler: sampler.clone(), n_samples: MC_SAMPLES, seed: 1200 + k as u64 };
            let out = par::random_unitary(&spec, w, &grid)?;
            let g = grid_values(&out)?;
            let v = proposal1_check(w, &out, None, &cfg)?;
            let c = &v.evidence;
            let ses: Vec<f64> = c.t.iter().map(|&t| functional_se(g, t)).collect();
            let within = (0..c.len()).all(|i| c.margin[i] >= -MC_SIGMAS * ses[i]);
            let best = (0..c.len()).max_by(|&i, &j| c.margin[i].total_cmp(&c.margin[j])).unwrap_or(0);
            let clear = c.margin[best] > MC_SIGMAS * ses[best];
            let this = v.relation == Relation::FirstMajorizes && within && clear;
            ok &= this;
            parts.push(format!(
                "sampler {k} on {name}: {} (max margin {:.2e}, se {:.1e})",
                v.relation.as_str(),
                c.margin[best],
                ses[best]
            ));
        }
    }
    Ok((ok, format!("M = {MC_SAMPLES}; {}", parts.join("; "))))
}

fn dm_relation(c1: &CovarianceMatrix, c2: &CovarianceMatrix, s: &Settings) -> Result<Option<Relation>> {
    let tol = &s.tolerance;
    let p1 = dm_spectrum_prefix(&single_particle_energies(c1.spectrum())?, FIG1_PREFIX, tol)?;
    let p2 = dm_spectrum_prefix(&single_particle_energies(c2.spectrum())?, FIG1_PREFIX, tol)?;
    match dm_majorization_verdict(&p1, &p2, tol) {
        Ok(v) => Ok(Some(v.relation)),
        Err(Error::Inconclusive(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn dm_agreement(s: &Settings) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut agree = 0;
    let mut uncertified = 0;
    for _ in 0..DM_PAIRS {
        let a = random_gaussian(&mut rng, 1, (0.55, 3.0));
        let b = random_gaussian(&mut rng, 1, (0.55, 3.0));
        let dg = det_gamma_verdict(&a.cov, &b.cov, &s.tolerance)?.relation;
        match dm_relation(&a.cov, &b.cov, s)? {
            Some(r) if r == dg => agree += 1,
            Some(_) => {}
            None => uncertified += 1,
        }
    }
    let mut ruled_out = 0;
    for &(a1, v1, a2, v2) in &FIG1_PAIRS {
        let (c1, c2) = (CovarianceMatrix::two_mode(a1, v1)?, CovarianceMatrix::two_mode(a2, v2)?);
        let dg = det_gamma_verdict(&c1, &c2, &s.tolerance)?.relation;
        if dm_relation(&c1, &c2, s)? == Some(Relation::Incomparable) && dg == Relation::FirstMajorizes {
            ruled_out += 1;
        }
    }
    let ok = agree == DM_PAIRS && ruled_out >= 4;
    Ok((
        ok,
        format!(
            "{agree}/{DM_PAIRS} single-mode pairs agree ({uncertified} uncertified); {ruled_out}/{} two-mode pairs DM Incomparable with det-gamma FirstMajorizes",
            FIG1_PAIRS.len()
        ),
    ))
}

fn corpus_order(s: &Settings) -> Result<(bool, String)> {
    let report = corpus::run(&CorpusSpec::builtin()?, s)?;
    let ok = report.violations.is_empty() && report.first_majorizes > 0;
    Ok((
        ok,
        format!(
            "{} verdicts, {} ordered, {} violations, {} errors",
            report.verdicts.len(),
            report.first_majorizes,
            report.violations.len(),
            report.errors.len()
        ),
    ))
}

fn normalization(s: &Settings) -> Result<(bool, String)> {
    let q = &s.quadrature;
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut ws: Vec<(String, WignerEvaluable)> = Vec::new();
    for n in 1..=3 {
        ws.push((format!("gaussian N={n}"), gaussian_wigner(&random_gaussian(&mut rng, n, (0.5, 2.5)))));
    }
    for n in 0..=5 {
        ws.push((format!("fock {n}"), fock_wigner(n)));
    }
    ws.push(("mixture 0-1".into(), fock_mixture(0.7, FockPair::ZeroOne)?));
    ws.push(("mixture 1-2".into(), fock_mixture(0.4, FockPair::OneTwo)?));
    ws.push(("fock weights".into(), fock_mixture_weights(&[0.2, 0.3, 0.1, 0.4])?));
    ws.push(("even cat".into(), cat_wigner(&[1.5, 0.0], Parity::Even)?));
    ws.push(("odd cat".into(), cat_wigner(&[0.8, -0.6], Parity::Odd)?));
    ws.push(("two-mode cat".into(), cat_wigner(&[0.7, 0.2, -0.4, 0.5], Parity::Odd)?));
    let comps = [random_gaussian(&mut rng, 1, (0.5, 2.5)), random_gaussian(&mut rng, 1, (0.5, 2.5))];
    ws.push(("gaussian mixture".into(), gaussian_mixture(&[0.35, 0.65], &comps)?));
    ws.push(("channel output 0-1".into(), scalar_channel_output(ScalarInput::Mix01(0.8), 0.6, 0.3)?));
    ws.push(("channel output 1-2".into(), scalar_channel_output(ScalarInput::Mix12(0.5), 1.0, 0.2)?));
    ws.push((
        "channel output cat".into(),
        scalar_channel_output(ScalarInput::Cat { alpha: vec![1.2, 0.3], parity: Parity::Odd }, 0.7, 0.25)?,
    ));
    let vac = GridFunction::from_fn(-8.0, 8.0, 321, -8.0, 8.0, 321, |x, p| (-(x * x + p * p)).exp() / PI)?;
    ws.push(("sampled vacuum".into(), grid_wigner(vac, true)));
    ws.push(("box".into(), box_state_wigner()));

    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    let mut skipped = Vec::new();
    let mut loose = Vec::new();
    for (name, w) in &ws {
        // the value is judged against the exact 1; a coarse error estimate
        // (multi-mode sampled grids) is reported but does not decide
        match PreparedIntegrator::new(w, q).and_then(|p| p.integrate(Transform::Identity)) {
            Ok(e) => {
                let err = (e.value - 1.0).abs();
                worst = worst.max(err);
                if err > NORM_TOL {
                    failed.push(format!("{name}: {:.3e}", e.value - 1.0));
                }
                if e.error > NORM_TOL {
                    loose.push(format!("{name} ({:.1e})", e.error));
                }
            }
            Err(Error::NotIntegrable) | Err(Error::Unsupported(_)) => skipped.push(name.clone()),
            Err(e) => failed.push(format!("{name}: {e}")),
        }
    }
    let abs1 = integrate(&fock_wigner(1), Transform::Abs, q)?.value;
    let abs_err = (abs1 - (4.0 * (-0.5f64).exp() - 1.0)).abs();
    let ok = failed.is_empty() && abs_err <= NORM_TOL;
    Ok((
        ok,
        format!(
            "{} families, worst |int W - 1| = {worst:.1e}{}{}{}; fock 1 int |W| error {abs_err:.1e} (tolerance {NORM_TOL:e})",
            ws.len() - skipped.len(),
            if failed.is_empty() { String::new() } else { format!(", failing [{}]", failed.join("; ")) },
            if skipped.is_empty() { String::new() } else { format!(", skipped as not integrable: {}", skipped.join(", ")) },
            if loose.is_empty() { String::new() } else { format!(", coarse error estimates: {}", loose.join(", ")) },
        ),
    ))
}
