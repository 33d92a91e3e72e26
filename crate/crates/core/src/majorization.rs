//! Majorization criteria for Wigner functions.
//!
//! Every check samples a margin curve `first - second` on a threshold grid
//! and reads the relation off its sign pattern (see [`MarginCurve::relation`]).
//! Thresholds t >= 0 compare I_t = int [f - t]_+; negative thresholds compare
//! the regularized functionals over a region of linear size Lambda.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::phase_space::{mix, Estimate, PreparedIntegrator, QuadratureConfig, Transform, WignerEvaluable};
use crate::tolerance::ToleranceConfig;
use crate::verdict::{MajorizationVerdict, MarginCurve, Proposal, Relation};

/// Regulator sizes used by [`proposal2_check`] unless told otherwise.
pub const DEFAULT_LAMBDAS: [f64; 4] = [8.0, 12.0, 16.0, 24.0];

/// Mixing weights sampled by [`mixing_preserves_weak_majorization_test`].
pub const MIXING_SAMPLES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Smallest geometric fraction on either side of the default grids.
const GRID_DEPTH: f64 = 2e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineConfig {
    pub quadrature: QuadratureConfig,
    pub tolerance: ToleranceConfig,
}

/// m(t) = Vol{W >= t} on a threshold grid. With a regulator the volume is
/// taken inside the region; without one, thresholds t <= 0 store the finite
/// part -Vol{W < t}.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFunctionSamples {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecreasingRearrangement {
    pub u: Vec<f64>,
    pub values: Vec<f64>,
}

/// I_t = int [f - t]_+ with f = |W| (`use_abs`) or W.
pub fn functional_i(w: &WignerEvaluable, t: f64, use_abs: bool, cfg: &QuadratureConfig) -> Result<Estimate> {
    PreparedIntegrator::new(w, cfg)?.plus_part(t, use_abs)
}

pub fn level_function(
    w: &WignerEvaluable,
    t_grid: &[f64],
    lambda: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<LevelFunctionSamples> {
    if let Some(l) = lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::ParamOutOfRange(format!("regulator size {l}")));
        }
    }
    let prep = PreparedIntegrator::new(w, cfg)?;
    let mut values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let v = match lambda {
            Some(l) => prep.region_level_volume(t, l)?.value,
            None if t > 0.0 => prep.level_volume(t, false)?.value,
            None => {
                if !w.finite_negativity() {
                    return Err(Error::NotIntegrable);
                }
                -prep.negative_volume(t)?.value
            }
        };
        values.push(v);
    }
    Ok(LevelFunctionSamples { t: t_grid.to_vec(), values, lambda })
}

/// f^down(u) = inf{s >= 0 : m_f(s) <= u} with f = |W| (`use_abs`) or W.
pub fn decreasing_rearrangement(
    w: &WignerEvaluable,
    u_grid: &[f64],
    use_abs: bool,
    cfg: &QuadratureConfig,
) -> Result<DecreasingRearrangement> {
    let prep = PreparedIntegrator::new(w, cfg)?;
    let values = u_grid.iter().map(|u| prep.rearrangement(*u, use_abs)).collect::<Result<Vec<_>>>()?;
    Ok(DecreasingRearrangement { u: u_grid.to_vec(), values })
}

/// Fractions in (0, 1), ascending: `low` points geometric toward 0 and
/// `high` points geometric toward 1.
fn two_sided(low: usize, high: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..low).map(|k| 0.5 * GRID_DEPTH.powf(k as f64 / (low - 1) as f64)).collect();
    x.extend((1..=high).map(|k| 1.0 - 0.5 * GRID_DEPTH.powf(k as f64 / high as f64)));
    x.sort_by(|a, b| a.total_cmp(b));
    x
}

/// t = 0 followed by 64 points on (0, max), dense near both ends.
pub fn positive_t_grid(max: f64) -> Vec<f64> {
    let mut g = alloc::vec![0.0];
    if max > 0.0 {
        g.extend(two_sided(32, 32).into_iter().map(|x| x * max));
    }
    g
}

/// 32 ascending points on (min, 0), dense near both ends; empty when min >= 0.
pub fn negative_t_grid(min: f64) -> Vec<f64> {
    if !(min < 0.0) {
        return Vec::new();
    }
    two_sided(16, 16).into_iter().rev().map(|x| x * min).collect()
}

fn prepare<'a>(
    w1: &'a WignerEvaluable,
    w2: &'a WignerEvaluable,
    cfg: &QuadratureConfig,
) -> Result<(PreparedIntegrator<'a>, PreparedIntegrator<'a>)> {
    if w1.n_modes() != w2.n_modes() {
        return Err(Error::DimensionMismatch(format!("{} modes vs {} modes", w1.n_modes(), w2.n_modes())));
    }
    Ok((PreparedIntegrator::new(w1, cfg)?, PreparedIntegrator::new(w2, cfg)?))
}

fn require_equal_norm(a: &PreparedIntegrator, b: &PreparedIntegrator, tol: &ToleranceConfig) -> Result<()> {
    let na = a.integrate(Transform::Identity)?;
    let nb = b.integrate(Transform::Identity)?;
    let slack = tol.normalization + tol.margin_factor * (na.error + nb.error);
    if (na.value - nb.value).abs() > slack {
        return Err(Error::DomainError(format!(
            "integrals differ ({} vs {}); majorization needs equal normalization",
            na.value, nb.value
        )));
    }
    Ok(())
}

fn require_nonnegative(p: &PreparedIntegrator, tol: &ToleranceConfig) -> Result<()> {
    if p.min() < -tol.normalization * p.max().max(1.0) {
        return Err(Error::DomainError(format!("function takes negative values (min {})", p.min())));
    }
    Ok(())
}

fn require_finite_negativity(w1: &WignerEvaluable, w2: &WignerEvaluable) -> Result<()> {
    if w1.finite_negativity() && w2.finite_negativity() {
        Ok(())
    } else {
        Err(Error::NotIntegrable)
    }
}

fn push_pair(c: &mut MarginCurve, t: f64, x: Estimate, y: Estimate, tol: &ToleranceConfig) {
    let scale = x.value.abs().max(y.value.abs());
    c.push(t, x.value, y.value, tol.margin_tolerance(x.error + y.error, scale));
}

fn plus_curve(
    a: &PreparedIntegrator,
    b: &PreparedIntegrator,
    ts: &[f64],
    abs: bool,
    tol: &ToleranceConfig,
) -> Result<MarginCurve> {
    let mut c = MarginCurve::default();
    for &t in ts {
        push_pair(&mut c, t, a.plus_part(t, abs)?, b.plus_part(t, abs)?, tol);
    }
    Ok(c)
}

fn describe(ts: Option<&[f64]>, default: &str) -> String {
    match ts {
        Some(g) => format!("{} user thresholds", g.len()),
        None => String::from(default),
    }
}

const POSITIVE_GRID: &str = "t = 0 plus 64 two-sided geometric points on (0, max)";
const SIGNED_GRID: &str = "32 two-sided geometric points on (min, 0), t = 0, 64 two-sided geometric points on (0, max)";

/// A verdict says the first argument wins, so the t = 0 margin (negativity
/// ordering) must not favour the second.
fn note_negativity_order(v: &mut MajorizationVerdict) {
    if v.relation != Relation::FirstMajorizes {
        return;
    }
    if let Some(i) = v.evidence.t.iter().position(|t| *t == 0.0) {
        let ok = v.evidence.margin[i] >= -v.evidence.tolerance[i];
        v.notes.push(format!(
            "t = 0 margin {:e}: negativity ordering {}",
            v.evidence.margin[i],
            if ok { "holds" } else { "VIOLATED" }
        ));
    }
}

/// Flags a cross-check that contradicts the primary relation beyond a loose
/// tolerance. Only sign contradictions count; finer disagreements are noise.
fn contradiction(primary: Relation, cross: &MarginCurve, loose: &[f64]) -> Option<(f64, f64)> {
    let allow_neg = matches!(primary, Relation::SecondMajorizes | Relation::Incomparable);
    let allow_pos = matches!(primary, Relation::FirstMajorizes | Relation::Incomparable);
    for i in 0..cross.len() {
        let m = cross.margin[i];
        if (!allow_neg && m < -loose[i]) || (!allow_pos && m > loose[i]) {
            return Some((cross.t[i], m));
        }
    }
    None
}

fn loose_tolerances(c: &MarginCurve, errs: &[f64], tol: &ToleranceConfig) -> Vec<f64> {
    (0..c.len())
        .map(|i| {
            let scale = c.first[i].abs().max(c.second[i].abs());
            (1e-5 * scale).max(1e-7) + tol.margin_factor * errs[i]
        })
        .collect()
}

/// Majorization of two nonnegative functions with equal integrals. The
/// shifted-plus functionals decide; the tail integral of the level function
/// and the Lorenz curve of the decreasing rearrangement are cross-checks.
pub fn check_positive_majorization(
    w1: &WignerEvaluable,
    w2: &WignerEvaluable,
    t_grid: Option<&[f64]>,
    cfg: &EngineConfig,
) -> Result<MajorizationVerdict> {
    let tol = &cfg.tolerance;
    let (a, b) = prepare(w1, w2, &cfg.quadrature)?;
    require_nonnegative(&a, tol)?;
    require_nonnegative(&b, tol)?;
    require_equal_norm(&a, &b, tol)?;
    let default;
    let ts = match t_grid {
        Some(g) => g,
        None => {
            default = positive_t_grid(a.max().max(b.max()));
            &default[..]
        }
    };
    let primary = plus_curve(&a, &b, ts, false, tol)?;
    let relation = primary.relation();

    let mut tail = MarginCurve::default();
    let mut tail_err = Vec::new();
    let mut volumes = Vec::new();
    for &t in ts.iter().filter(|t| **t > 0.0) {
        let (x, y) = (a.level_tail(t, false)?, b.level_tail(t, false)?);
        tail_err.push(x.error + y.error);
        push_pair(&mut tail, t, x, y, tol);
        for p in [&a, &b] {
            let m = p.level_volume(t, false)?.value;
            if m > 0.0 && m.is_finite() {
                volumes.push(m);
            }
        }
    }
    volumes.sort_by(|x, y| x.total_cmp(y));
    volumes.dedup();
    let mut lorenz = MarginCurve::default();
    let mut lorenz_err = Vec::new();
    for &v in &volumes {
        let (x, y) = (a.lorenz(v, false)?, b.lorenz(v, false)?);
        lorenz_err.push(x.error + y.error);
        push_pair(&mut lorenz, v, x, y, tol);
    }
    for (name, curve, errs) in [("level-function tail", &tail, &tail_err), ("Lorenz", &lorenz, &lorenz_err)] {
        let loose = loose_tolerances(curve, errs, tol);
        if let Some((x, m)) = contradiction(relation, curve, &loose) {
            return Err(Error::CrossCheckMismatch(format!(
                "shifted-plus margins give {} but the {name} margin is {m:e} at {x}",
                relation.as_str()
            )));
        }
    }

    let mut v = MajorizationVerdict::from_curve(Proposal::PositiveClassic, primary, describe(t_grid, POSITIVE_GRID));
    v.notes.push(format!(
        "cross-checked against {} level-function tail and {} Lorenz points",
        tail.len(),
        lorenz.len()
    ));
    note_negativity_order(&mut v);
    Ok(v)
}

/// Weak majorization of |W1| over |W2|: I_t[|W1|] >= I_t[|W2|] for t >= 0.
pub fn proposal1_check(
    w1: &WignerEvaluable,
    w2: &WignerEvaluable,
    t_grid: Option<&[f64]>,
    cfg: &EngineConfig,
) -> Result<MajorizationVerdict> {
    require_finite_negativity(w1, w2)?;
    let (a, b) = prepare(w1, w2, &cfg.quadrature)?;
    let default;
    let ts = match t_grid {
        Some(g) => g,
        None => {
            default = positive_t_grid(a.max_abs().max(b.max_abs()));
            &default[..]
        }
    };
    let curve = plus_curve(&a, &b, ts, true, &cfg.tolerance)?;
    let mut v = MajorizationVerdict::from_curve(Proposal::P1, curve, describe(t_grid, POSITIVE_GRID));
    note_negativity_order(&mut v);
    Ok(v)
}

fn split_grid(a: &PreparedIntegrator, b: &PreparedIntegrator, t_grid: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
    match t_grid {
        Some(g) => {
            let mut g = g.to_vec();
            g.sort_by(|x, y| x.total_cmp(y));
            let k = g.partition_point(|t| *t < 0.0);
            let pos = g.split_off(k);
            (g, pos)
        }
        None => (negative_t_grid(a.min().min(b.min())), positive_t_grid(a.max().max(b.max()))),
    }
}

/// int over the regulator region of max(W, t), which equals I_t^Lambda + t Vol.
/// Its Lambda-divergent part t Vol is common to both arguments, so margins
/// between regions of different shape stay comparable.
fn regularized(p: &PreparedIntegrator, t: f64, lambda: f64) -> Result<Estimate> {
    let e = p.region_plus(t, lambda)?;
    Ok(Estimate::new(e.value + t * p.region_volume(lambda), e.error))
}

/// Proposal-2 margin curves, one per regulator size: shifted-plus margins for
/// t >= 0 and regularized margins for t < 0, sorted by t.
pub fn proposal2_curves(
    w1: &WignerEvaluable,
    w2: &WignerEvaluable,
    t_grid: Option<&[f64]>,
    lambdas: &[f64],
    cfg: &EngineConfig,
) -> Result<Vec<(f64, MarginCurve)>> {
    require_finite_negativity(w1, w2)?;
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::ParamOutOfRange(format!("regulator schedule {lambdas:?}")));
    }
    let tol = &cfg.tolerance;
    let (a, b) = prepare(w1, w2, &cfg.quadrature)?;
    let (neg, pos) = split_grid(&a, &b, t_grid);
    let positive = plus_curve(&a, &b, &pos, false, tol)?;
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut c = MarginCurve::default();
        for &t in &neg {
            push_pair(&mut c, t, regularized(&a, t, lambda)?, regularized(&b, t, lambda)?, tol);
        }
        for i in 0..positive.len() {
            c.push(positive.t[i], positive.first[i], positive.second[i], positive.tolerance[i]);
        }
        out.push((lambda, c));
    }
    Ok(out)
}

/// Largest margin change over t < 0 between two regulator sizes.
fn sup_difference(x: &MarginCurve, y: &MarginCurve) -> f64 {
    (0..x.len()).filter(|i| x.t[*i] < 0.0).map(|i| (x.margin[i] - y.margin[i]).abs()).fold(0.0, f64::max)
}

/// Majorization of quasi-probability functions through Lambda-regularized
/// functionals. The two largest regulators must agree before a verdict is
/// issued; the verdict is read from the largest.
pub fn proposal2_check(
    w1: &WignerEvaluable,
    w2: &WignerEvaluable,
    t_grid: Option<&[f64]>,
    lambdas: &[f64],
    cfg: &EngineConfig,
) -> Result<MajorizationVerdict> {
    require_finite_negativity(w1, w2)?;
    {
        let (a, b) = prepare(w1, w2, &cfg.quadrature)?;
        require_equal_norm(&a, &b, &cfg.tolerance)?;
    }
    let mut curves = proposal2_curves(w1, w2, t_grid, lambdas, cfg)?;
    let mut notes = Vec::new();
    if curves.len() >= 2 {
        let k = curves.len();
        let sup = sup_difference(&curves[k - 2].1, &curves[k - 1].1);
        let (la, lb) = (curves[k - 2].0, curves[k - 1].0);
        if !(sup <= cfg.tolerance.collapse) {
            return Err(Error::NoCollapse { sup_diff: sup, lambda_a: la, lambda_b: lb });
        }
        notes.push(format!("regularized margins at Lambda = {la} and {lb} differ by at most {sup:e}"));
    }
    let (lambda, curve) = curves.pop().expect("schedule is nonempty");
    let mut v = MajorizationVerdict::from_curve(Proposal::P2, curve, describe(t_grid, SIGNED_GRID));
    v.notes = notes;
    v.notes.push(format!("verdict read at Lambda = {lambda}"));
    note_negativity_order(&mut v);
    Ok(v)
}

/// The pair condition int [W1 - u]_+ >= int [W2 - u]_+ and
/// int [W1 + u]_- <= int [W2 + u]_- for u >= 0. Margins of the second
/// condition are reported at t = -u so the curve lines up with Proposal 2.
pub fn quasi_pair_check(
    w1: &WignerEvaluable,
    w2: &WignerEvaluable,
    u_grid: Option<&[f64]>,
    cfg: &EngineConfig,
) -> Result<MajorizationVerdict> {
    require_finite_negativity(w1, w2)?;
    let tol = &cfg.tolerance;
    let (a, b) = prepare(w1, w2, &cfg.quadrature)?;
    require_equal_norm(&a, &b, tol)?;
    let (upper, lower): (Vec<f64>, Vec<f64>) = match u_grid {
        Some(us) => {
            if let Some(u) = us.iter().find(|u| !(**u >= 0.0)) {
                return Err(Error::DomainError(format!("pair condition needs u >= 0, got {u}")));
            }
            (us.to_vec(), us.to_vec())
        }
        None => {
            let neg = negative_t_grid(a.min().min(b.min()));
            (positive_t_grid(a.max().max(b.max())), neg.iter().map(|t| -t).collect())
        }
    };
    let mut points: Vec<(f64, Estimate, Estimate)> = Vec::with_capacity(upper.len() + lower.len());
    for &u in &lower {
        let (x, y) = (a.minus_part(-u)?, b.minus_part(-u)?);
        points.push((-u, Estimate::new(-x.value, x.error), Estimate::new(-y.value, y.error)));
    }
    for &u in &upper {
        points.push((u, a.plus_part(u, false)?, b.plus_part(u, false)?));
    }
    points.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut curve = MarginCurve::default();
    for (t, x, y) in points {
        push_pair(&mut curve, t, x, y, tol);
    }
    let desc = match u_grid {
        Some(us) => format!("{} user offsets u, both conditions at each", us.len()),
        None => String::from(SIGNED_GRID),
    };
    let mut v = MajorizationVerdict::from_curve(Proposal::Quasi, curve, desc);
    note_negativity_order(&mut v);
    Ok(v)
}

/// Checks that f weakly majorizes every mixture s g + (1 - s) h for the
/// sampled s. False as soon as one mixture escapes.
pub fn mixing_preserves_weak_majorization_test(
    f: &WignerEvaluable,
    g: &WignerEvaluable,
    h: &WignerEvaluable,
    samples: &[f64],
    cfg: &EngineConfig,
) -> Result<bool> {
    for &s in samples {
        let m = mix(g, h, s)?;
        let v = proposal1_check(f, &m, None, cfg)?;
        if !matches!(v.relation, Relation::FirstMajorizes | Relation::Equivalent) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Spot check with the convex function x^2: int W1^2 >= int W2^2 within
/// quadrature error. Necessary for majorization, not sufficient.
pub fn condition2_square_check(w1: &WignerEvaluable, w2: &WignerEvaluable, cfg: &QuadratureConfig) -> Result<bool> {
    let (a, b) = prepare(w1, w2, cfg)?;
    let x = a.integrate(Transform::Power(2.0))?;
    let y = b.integrate(Transform::Power(2.0))?;
    Ok(x.value >= y.value - 5.0 * (x.error + y.error) - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sided_fractions() {
        let x = two_sided(4, 4);
        assert_eq!(x.len(), 8);
        assert!((x[0] - GRID_DEPTH * 0.5).abs() < 1e-18);
        assert!((x[3] - 0.5).abs() < 1e-15);
        assert!((x[7] - (1.0 - 0.5 * GRID_DEPTH)).abs() < 1e-15);
    }

    #[test]
    fn contradiction_only_on_sign() {
        let mut c = MarginCurve::default();
        c.push(0.0, 1.0, 0.9, 0.0);
        c.push(1.0, 0.5, 0.5 + 1e-9, 0.0);
        let loose = [1e-7, 1e-7];
        assert!(contradiction(Relation::FirstMajorizes, &c, &loose).is_none());
        assert!(contradiction(Relation::SecondMajorizes, &c, &loose).is_some());
        assert!(contradiction(Relation::Incomparable, &c, &loose).is_none());
    }
}
