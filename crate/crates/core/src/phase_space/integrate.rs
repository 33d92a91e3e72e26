//! Quadrature over phase space.
//!
//! Functions with a radial profile W(r) = F(u) are integrated in one
//! variable, with panels split at every crossing of the relevant levels;
//! level sets then come from root finding. Everything else is sampled on a
//! midpoint tensor grid (trapezoid nodes for grid functions), and the sample
//! values are sorted once so level volumes, shifted-plus integrals and the
//! decreasing rearrangement are all read off the same prefix sums. Error
//! estimates compare against half the nodes (radial) or a grid with half the
//! points per axis.
//!
//! Single-mode closed forms without a profile (cats, channel outputs) also
//! get row quadrature for the integrals and shifted-plus parts: each row is
//! split at its level crossings and the outer integral is adaptive. The
//! sorted samples still answer level volumes and the rearrangement.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::rows::Rows;
use super::{Profile, WignerEvaluable, WignerKind};
use crate::error::{Error, Result};
use crate::quadrature::{brent, golden_extremum, GaussLegendre};

const SCAN_POINTS: usize = 4000;
const MAX_GRID_SAMPLES: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss-Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Radial cutoff R_max, in units of the function's own decay length.
    pub radial_cutoff: f64,
    /// Half-width L of the tensor grid.
    pub grid_halfwidth: f64,
    pub grid_points_per_axis: usize,
    /// Largest acceptable error estimate (relative to max(1, |value|)).
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial_nodes: 20,
            radial_cutoff: 12.0,
            grid_halfwidth: 12.0,
            grid_points_per_axis: 240,
            tolerance: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.radial_nodes >= 2
            && self.radial_cutoff > 0.0
            && self.radial_cutoff.is_finite()
            && self.grid_halfwidth > 0.0
            && self.grid_halfwidth.is_finite()
            && self.grid_points_per_axis >= 4
            && self.tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::ParamOutOfRange(alloc::format!("quadrature config {self:?}")))
        }
    }
}

/// Integrand applied to W before integrating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Identity,
    Abs,
    /// [W - t]_+ with t >= 0.
    ShiftedPlus(f64),
    /// |W|^alpha.
    Power(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }
}

/// Integrates `transform(W)` over phase space, failing with `TolExceeded`
/// when the error estimate is above `cfg.tolerance`.
pub fn integrate(w: &WignerEvaluable, transform: Transform, cfg: &QuadratureConfig) -> Result<Estimate> {
    let est = PreparedIntegrator::new(w, cfg)?.integrate(transform)?;
    let tolerance = cfg.tolerance * est.value.abs().max(1.0);
    if est.error > tolerance {
        return Err(Error::TolExceeded { estimate: est.error, tolerance });
    }
    Ok(est)
}

/// Compares the absolute integral at the configured cutoffs with the one at
/// doubled cutoffs (same resolution). Returns the difference.
pub fn cutoff_doubling_check(w: &WignerEvaluable, cfg: &QuadratureConfig) -> Result<f64> {
    let mut wide = *cfg;
    wide.radial_cutoff *= 2.0;
    wide.grid_halfwidth *= 2.0;
    wide.grid_points_per_axis *= 2;
    let a = PreparedIntegrator::new(w, cfg)?.integrate(Transform::Abs)?;
    let b = PreparedIntegrator::new(w, &wide)?.integrate(Transform::Abs)?;
    let diff = (a.value - b.value).abs();
    if diff > cfg.tolerance {
        return Err(Error::TolExceeded { estimate: diff, tolerance: cfg.tolerance });
    }
    Ok(diff)
}

/// A Wigner function prepared for repeated integrals and level-set queries.
pub struct PreparedIntegrator<'a> {
    backend: Backend<'a>,
    max: f64,
    min: f64,
}

enum Backend<'a> {
    Radial(Radial<'a>),
    Samples { full: SampleSet, half: SampleSet, rows: Option<Rows<'a>> },
    Box,
}

impl<'a> PreparedIntegrator<'a> {
    /// Radial path when W has a profile, sampled grid otherwise.
    pub fn new(w: &'a WignerEvaluable, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        if matches!(w.kind(), WignerKind::BoxState) {
            return Ok(PreparedIntegrator { backend: Backend::Box, max: f64::NAN, min: f64::NAN });
        }
        match w.profile() {
            Some(profile) => {
                let r = Radial::new(w, profile, cfg);
                let (min, max) = r.extrema();
                Ok(PreparedIntegrator { backend: Backend::Radial(r), max, min })
            }
            None => Self::grid(w, cfg),
        }
    }

    /// Forces the sampled-grid path.
    pub fn grid(w: &'a WignerEvaluable, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        let (full, half, rows) = match w.kind() {
            WignerKind::BoxState => return Err(Error::NotIntegrable),
            WignerKind::GridFunction(g) => {
                (SampleSet::new(g.trapezoid_samples(1)), SampleSet::new(g.trapezoid_samples(2)), None)
            }
            _ => {
                let dims = 2 * w.n_modes();
                let halfwidth = w.extent(cfg.grid_halfwidth);
                let mut n = cfg.grid_points_per_axis + cfg.grid_points_per_axis % 2;
                while n > 4 && (n as f64).powi(dims as i32) > MAX_GRID_SAMPLES as f64 {
                    n -= 2;
                }
                // single-mode closed forms also get accurate row integrals
                let rows = (dims == 2).then(|| Rows::new(w, halfwidth, 0.1 * cfg.tolerance));
                (
                    SampleSet::new(midpoint_samples(w, halfwidth, n)),
                    SampleSet::new(midpoint_samples(w, halfwidth, n / 2)),
                    rows,
                )
            }
        };
        let max = full.sorted.first().copied().unwrap_or(0.0).max(0.0);
        let min = full.sorted.last().copied().unwrap_or(0.0).min(0.0);
        Ok(PreparedIntegrator { backend: Backend::Samples { full, half, rows }, max, min })
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.backend, Backend::Radial(_))
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max_abs(&self) -> f64 {
        self.max.abs().max(self.min.abs())
    }

    fn pair<F: Fn(&SampleSet) -> f64>(full: &SampleSet, half: &SampleSet, f: F) -> Estimate {
        let a = f(full);
        Estimate::new(a, (a - f(half)).abs())
    }

    pub fn integrate(&self, transform: Transform) -> Result<Estimate> {
        match transform {
            Transform::ShiftedPlus(t) => return self.plus_part(t, false),
            Transform::Power(alpha) if !(alpha > 0.0 && alpha.is_finite()) => {
                return Err(Error::DomainError(alloc::format!("power {alpha} must be positive")))
            }
            _ => {}
        }
        match &self.backend {
            Backend::Box => match transform {
                // inner p-integral of sin(a p) / (pi p) is 1 for every |x| < 1/2
                Transform::Identity => Ok(Estimate::new(1.0, 0.0)),
                _ => Err(Error::NotIntegrable),
            },
            Backend::Radial(r) => Ok(match transform {
                Transform::Identity => r.integral(|f| f, &[0.0], 0.0, r.u_max),
                Transform::Abs => r.integral(|f| f.abs(), &[0.0], 0.0, r.u_max),
                Transform::Power(a) => {
                    let smooth = a == a.round() && a % 2.0 == 0.0;
                    r.integral_with(|f| f.abs().powf(a), &[0.0], 0.0, r.u_max, !smooth)
                }
                Transform::ShiftedPlus(_) => unreachable!(),
            }),
            Backend::Samples { rows: Some(rows), .. } => Ok(match transform {
                Transform::Identity => rows.integral(|f| f, &[]),
                Transform::Abs => rows.integral(|f| f.abs(), &[0.0]),
                Transform::Power(a) => {
                    let smooth = a == a.round() && a % 2.0 == 0.0;
                    rows.integral_with(|f| f.abs().powf(a), &[0.0], !smooth)
                }
                Transform::ShiftedPlus(_) => unreachable!(),
            }),
            Backend::Samples { full, half, .. } => Ok(match transform {
                Transform::Identity => Self::pair(full, half, |s| s.total_vw),
                Transform::Abs => Self::pair(full, half, |s| s.abs_cvw[s.abs_cvw.len() - 1]),
                Transform::Power(a) => Self::pair(full, half, |s| s.sum(|v| v.abs().powf(a))),
                Transform::ShiftedPlus(_) => unreachable!(),
            }),
        }
    }

    /// int [f - t]_+ with f = |W| (`abs`) or W, for t >= 0.
    pub fn plus_part(&self, t: f64, abs: bool) -> Result<Estimate> {
        if !(t >= 0.0) {
            return Err(Error::DomainError(alloc::format!(
                "shifted-plus integral needs t >= 0 without a regulator, got {t}"
            )));
        }
        match &self.backend {
            Backend::Box => Err(Error::NotIntegrable),
            Backend::Radial(r) => Ok(if abs {
                r.integral(|f| (f.abs() - t).max(0.0), &[t, -t, 0.0], 0.0, r.u_max)
            } else {
                r.integral(|f| (f - t).max(0.0), &[t], 0.0, r.u_max)
            }),
            Backend::Samples { rows: Some(rows), .. } => Ok(if abs {
                rows.integral(|f| (f.abs() - t).max(0.0), &[t, -t, 0.0])
            } else {
                rows.integral(|f| (f - t).max(0.0), &[t])
            }),
            Backend::Samples { full, half, .. } => Ok(Self::pair(full, half, |s| s.plus(t, abs))),
        }
    }

    /// int [W - t]_- = int min(W - t, 0), for t <= 0.
    pub fn minus_part(&self, t: f64) -> Result<Estimate> {
        if !(t <= 0.0) {
            return Err(Error::DomainError(alloc::format!("negative-part integral needs t <= 0, got {t}")));
        }
        match &self.backend {
            Backend::Box => Err(Error::NotIntegrable),
            Backend::Radial(r) => Ok(r.integral(|f| (f - t).min(0.0), &[t], 0.0, r.u_max)),
            Backend::Samples { rows: Some(rows), .. } => Ok(rows.integral(|f| (f - t).min(0.0), &[t])),
            Backend::Samples { full, half, .. } => Ok(Self::pair(full, half, |s| s.minus(t))),
        }
    }

    /// Vol{f >= t} with f = |W| or W; infinite for t <= 0.
    pub fn level_volume(&self, t: f64, abs: bool) -> Result<Estimate> {
        if matches!(self.backend, Backend::Box) {
            return Err(Error::NotIntegrable);
        }
        if t <= 0.0 {
            return Ok(Estimate::new(f64::INFINITY, 0.0));
        }
        Ok(match &self.backend {
            Backend::Radial(r) => Estimate::new(r.level_volume(t, abs), 0.0),
            Backend::Samples { full, half, .. } => Self::pair(full, half, |s| s.level_volume(t, abs)),
            Backend::Box => unreachable!(),
        })
    }

    /// Vol{W < t} for t <= 0.
    pub fn negative_volume(&self, t: f64) -> Result<Estimate> {
        if !(t <= 0.0) {
            return Err(Error::DomainError(alloc::format!("negative level set needs t <= 0, got {t}")));
        }
        Ok(match &self.backend {
            Backend::Box => return Err(Error::NotIntegrable),
            Backend::Radial(r) => Estimate::new(r.below_volume(t), 0.0),
            Backend::Samples { full, half, .. } => Self::pair(full, half, |s| s.below_volume(t)),
        })
    }

    /// Volume of the regulator region of linear size `lambda`: a ball of
    /// radius lambda/2 in the profile coordinate for radial functions, the
    /// hypercube [-lambda/2, lambda/2]^{2N} otherwise (as covered by the grid).
    pub fn region_volume(&self, lambda: f64) -> f64 {
        match &self.backend {
            Backend::Box => f64::INFINITY,
            Backend::Radial(r) => r.ball_volume(r.region_u(lambda)),
            Backend::Samples { full, .. } => full.region(lambda, |_| 1.0),
        }
    }

    /// int over the regulator region of [W - t]_+, any real t.
    pub fn region_plus(&self, t: f64, lambda: f64) -> Result<Estimate> {
        if !(lambda > 0.0) {
            return Err(Error::DomainError(alloc::format!("regulator size {lambda} must be positive")));
        }
        Ok(match &self.backend {
            Backend::Box => return Err(Error::NotIntegrable),
            Backend::Radial(r) => {
                let ul = r.region_u(lambda);
                let mut est = r.integral(|f| (f - t).max(0.0), &[t], 0.0, ul.min(r.u_max));
                if ul > r.u_max {
                    // W is negligible beyond u_max
                    est.value += (-t).max(0.0) * (r.ball_volume(ul) - r.ball_volume(r.u_max));
                }
                est
            }
            Backend::Samples { full, half, .. } => Self::pair(full, half, |s| s.region(lambda, |v| (v - t).max(0.0))),
        })
    }

    /// Vol({W >= t} within the regulator region), any real t.
    pub fn region_level_volume(&self, t: f64, lambda: f64) -> Result<Estimate> {
        if !(lambda > 0.0) {
            return Err(Error::DomainError(alloc::format!("regulator size {lambda} must be positive")));
        }
        Ok(match &self.backend {
            Backend::Box => return Err(Error::NotIntegrable),
            Backend::Radial(r) => Estimate::new(r.region_level_volume(t, r.region_u(lambda)), 0.0),
            Backend::Samples { full, half, .. } => {
                Self::pair(full, half, |s| s.region(lambda, |v| if v >= t { 1.0 } else { 0.0 }))
            }
        })
    }

    /// int_t^infinity m_f(s) ds from sampled level volumes, t > 0.
    pub fn level_tail(&self, t: f64, abs: bool) -> Result<Estimate> {
        if !(t > 0.0) {
            return Err(Error::DomainError(alloc::format!("level tail needs t > 0, got {t}")));
        }
        match &self.backend {
            Backend::Box => Err(Error::NotIntegrable),
            Backend::Radial(r) => Ok(r.level_tail(t, abs)),
            // the level function of a sample set is a step function, whose
            // tail integral is exactly the shifted-plus sum
            Backend::Samples { full, half, .. } => Ok(Self::pair(full, half, |s| s.plus(t, abs))),
        }
    }

    /// Decreasing rearrangement f^down(v) = inf{s >= 0 : m_f(s) <= v}.
    pub fn rearrangement(&self, v: f64, abs: bool) -> Result<f64> {
        match &self.backend {
            Backend::Box => Err(Error::NotIntegrable),
            Backend::Radial(r) => Ok(r.rearrangement(v, abs)),
            Backend::Samples { full, .. } => Ok(full.rearrangement(v, abs)),
        }
    }

    /// int_0^v f^down(x) dx.
    pub fn lorenz(&self, v: f64, abs: bool) -> Result<Estimate> {
        match &self.backend {
            Backend::Box => Err(Error::NotIntegrable),
            Backend::Radial(r) => Ok(r.lorenz(v, abs)),
            Backend::Samples { full, half, .. } => Ok(Self::pair(full, half, |s| s.lorenz(v, abs))),
        }
    }
}

fn midpoint_samples(w: &WignerEvaluable, halfwidth: f64, n: usize) -> Vec<(f64, f64, f64)> {
    let dims = 2 * w.n_modes();
    let h = 2.0 * halfwidth / n as f64;
    let weight = h.powi(dims as i32);
    let total = n.pow(dims as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = alloc::vec![0usize; dims];
    let mut r = alloc::vec![0.0; dims];
    for _ in 0..total {
        let mut ext = 0.0f64;
        for d in 0..dims {
            r[d] = -halfwidth + h * (idx[d] as f64 + 0.5);
            ext = ext.max(r[d].abs());
        }
        out.push((w.eval(&r), weight, ext));
        for d in (0..dims).rev() {
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// Weighted samples sorted descending by value and by absolute value, with
/// prefix sums of weights and weighted values.
struct SampleSet {
    raw: Vec<(f64, f64, f64)>,
    sorted: Vec<f64>,
    cw: Vec<f64>,
    cvw: Vec<f64>,
    abs_sorted: Vec<f64>,
    abs_cw: Vec<f64>,
    abs_cvw: Vec<f64>,
    total_w: f64,
    total_vw: f64,
}

fn prefix(pairs: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut vals = Vec::with_capacity(pairs.len());
    let mut cw = Vec::with_capacity(pairs.len() + 1);
    let mut cvw = Vec::with_capacity(pairs.len() + 1);
    let (mut sw, mut svw) = (0.0, 0.0);
    cw.push(0.0);
    cvw.push(0.0);
    for (v, w) in pairs {
        vals.push(*v);
        sw += w;
        svw += v * w;
        cw.push(sw);
        cvw.push(svw);
    }
    (vals, cw, cvw)
}

impl SampleSet {
    fn new(raw: Vec<(f64, f64, f64)>) -> Self {
        let mut pairs: Vec<(f64, f64)> = raw.iter().map(|(v, w, _)| (*v, *w)).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (sorted, cw, cvw) = prefix(&pairs);
        for p in pairs.iter_mut() {
            p.0 = p.0.abs();
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (abs_sorted, abs_cw, abs_cvw) = prefix(&pairs);
        let total_w = cw[cw.len() - 1];
        // sum in grid order so identity integrals do not depend on the sort
        let total_vw = raw.iter().map(|(v, w, _)| v * w).sum();
        SampleSet { raw, sorted, cw, cvw, abs_sorted, abs_cw, abs_cvw, total_w, total_vw }
    }

    fn arrays(&self, abs: bool) -> (&[f64], &[f64], &[f64]) {
        if abs {
            (&self.abs_sorted, &self.abs_cw, &self.abs_cvw)
        } else {
            (&self.sorted, &self.cw, &self.cvw)
        }
    }

    fn sum<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.raw.iter().map(|(v, w, _)| g(*v) * w).sum()
    }

    fn region<F: Fn(f64) -> f64>(&self, lambda: f64, g: F) -> f64 {
        let h = 0.5 * lambda;
        self.raw.iter().filter(|(_, _, e)| *e <= h).map(|(v, w, _)| g(*v) * w).sum()
    }

    fn plus(&self, t: f64, abs: bool) -> f64 {
        let (s, cw, cvw) = self.arrays(abs);
        let k = s.partition_point(|v| *v > t);
        (cvw[k] - t * cw[k]).max(0.0)
    }

    fn level_volume(&self, t: f64, abs: bool) -> f64 {
        let (s, cw, _) = self.arrays(abs);
        cw[s.partition_point(|v| *v >= t)]
    }

    fn minus(&self, t: f64) -> f64 {
        let k = self.sorted.partition_point(|v| *v >= t);
        let n = self.sorted.len();
        ((self.cvw[n] - self.cvw[k]) - t * (self.cw[n] - self.cw[k])).min(0.0)
    }

    fn below_volume(&self, t: f64) -> f64 {
        self.total_w - self.cw[self.sorted.partition_point(|v| *v >= t)]
    }

    fn rearrangement(&self, v: f64, abs: bool) -> f64 {
        let (s, cw, _) = self.arrays(abs);
        if v < 0.0 {
            return s.first().copied().unwrap_or(0.0).max(0.0);
        }
        // first k with cw[k + 1] > v
        let k = cw[1..].partition_point(|c| *c <= v);
        if k >= s.len() {
            0.0
        } else {
            s[k].max(0.0)
        }
    }

    fn lorenz(&self, v: f64, abs: bool) -> f64 {
        let (s, cw, cvw) = self.arrays(abs);
        if v <= 0.0 {
            return 0.0;
        }
        let k = cw[1..].partition_point(|c| *c <= v);
        if k >= s.len() {
            // beyond the sampled support f^down vanishes; clip negative tails
            let kpos = s.partition_point(|x| *x > 0.0);
            return cvw[kpos];
        }
        if s[k] <= 0.0 {
            return cvw[s.partition_point(|x| *x > 0.0)];
        }
        cvw[k] + (v - cw[k]) * s[k]
    }
}

/// One-dimensional profile integration.
struct Radial<'a> {
    w: &'a WignerEvaluable,
    profile: Profile,
    u_max: f64,
    panel: f64,
    gl: GaussLegendre,
    gl_half: GaussLegendre,
    scan_u: Vec<f64>,
    scan_f: Vec<f64>,
    segments: Vec<Segment>,
    lo: f64,
    hi: f64,
}

/// A monotone piece of the profile; scan samples `i0..i1` lie strictly inside.
#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    i0: usize,
    i1: usize,
}

/// Geometric refinement levels toward breakpoints of singular integrands.
const GRADING_LEVELS: i32 = 24;

impl<'a> Radial<'a> {
    fn new(w: &'a WignerEvaluable, profile: Profile, cfg: &QuadratureConfig) -> Self {
        let u_max = cfg.radial_cutoff * cfg.radial_cutoff * profile.width;
        let f = |u: f64| w.profile_value(u);
        let mut scan_u = Vec::with_capacity(SCAN_POINTS + 1);
        let mut scan_f = Vec::with_capacity(SCAN_POINTS + 1);
        for i in 0..=SCAN_POINTS {
            let x = i as f64 / SCAN_POINTS as f64;
            let u = u_max * x * x;
            scan_u.push(u);
            scan_f.push(f(u));
        }
        // interior extrema, refined by golden section
        let mut bounds: Vec<(f64, f64)> = alloc::vec![(0.0, scan_f[0])];
        let mut dir = 0.0;
        for i in 1..=SCAN_POINTS {
            let d = scan_f[i] - scan_f[i - 1];
            let s = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            if s != 0.0 {
                if dir != 0.0 && s != dir {
                    let lo = scan_u[i.saturating_sub(2)];
                    let hi = scan_u[i];
                    let (x, fx) = golden_extremum(f, lo, hi, dir);
                    if x > bounds[bounds.len() - 1].0 {
                        bounds.push((x, fx));
                    }
                }
                dir = s;
            }
        }
        bounds.push((u_max, scan_f[SCAN_POINTS]));
        let mut segments = Vec::with_capacity(bounds.len() - 1);
        for pair in bounds.windows(2) {
            let (a, fa) = pair[0];
            let (b, fb) = pair[1];
            let i0 = scan_u.partition_point(|u| *u <= a);
            let i1 = scan_u.partition_point(|u| *u < b);
            segments.push(Segment { a, b, fa, fb, i0, i1: i1.max(i0) });
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in scan_f.iter().chain(segments.iter().flat_map(|s| [&s.fa, &s.fb])) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        Radial {
            w,
            profile,
            u_max,
            panel: 0.5 * profile.width.max(1.0),
            gl: GaussLegendre::new(cfg.radial_nodes),
            gl_half: GaussLegendre::new((cfg.radial_nodes / 2).max(1)),
            scan_u,
            scan_f,
            segments,
            lo: lo.min(0.0),
            hi: hi.max(0.0),
        }
    }

    fn f(&self, u: f64) -> f64 {
        self.w.profile_value(u)
    }

    fn extrema(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn ball_volume(&self, u: f64) -> f64 {
        let n = self.profile.power as f64;
        self.profile.kappa * u.powf(n) / n
    }

    fn region_u(&self, lambda: f64) -> f64 {
        0.25 * lambda * lambda
    }

    /// All u in [0, u_max] with F(u) = level.
    fn roots(&self, level: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for s in &self.segments {
            let ga = s.fa - level;
            let gb = s.fb - level;
            if ga == 0.0 {
                out.push(s.a);
            }
            if ga * gb < 0.0 {
                // narrow the bracket on the monotone scan samples
                let inner = &self.scan_f[s.i0..s.i1];
                let k = inner.partition_point(|v| ((v - level) > 0.0) == (ga > 0.0) && *v != level);
                let (lo, flo) = if k == 0 { (s.a, s.fa) } else { (self.scan_u[s.i0 + k - 1], inner[k - 1]) };
                let (hi, fhi) = if k == inner.len() { (s.b, s.fb) } else { (self.scan_u[s.i0 + k], inner[k]) };
                let root =
                    brent(|u| self.f(u) - level, lo, hi, flo - level, fhi - level, 1e-15).unwrap_or(0.5 * (lo + hi));
                out.push(root);
            }
            if gb == 0.0 {
                out.push(s.b);
            }
        }
        out
    }

    fn breakpoints(&self, levels: &[f64], lo: f64, hi: f64) -> Vec<f64> {
        let mut b = alloc::vec![lo, hi];
        for s in &self.segments {
            b.push(s.a);
        }
        for l in levels {
            b.extend(self.roots(*l));
        }
        b.retain(|x| *x >= lo && *x <= hi);
        b.sort_by(|x, y| x.total_cmp(y));
        b.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1.0));
        b
    }

    /// kappa int_lo^hi g(F(u)) u^{N-1} du with panels split where F crosses
    /// any of `levels`.
    fn integral<G: Fn(f64) -> f64>(&self, g: G, levels: &[f64], lo: f64, hi: f64) -> Estimate {
        self.integral_with(g, levels, lo, hi, false)
    }

    /// As `integral`; `graded` refines geometrically toward every breakpoint,
    /// for integrands like |F|^alpha that are singular at the roots of F.
    fn integral_with<G: Fn(f64) -> f64>(&self, g: G, levels: &[f64], lo: f64, hi: f64, graded: bool) -> Estimate {
        if hi <= lo {
            return Estimate::default();
        }
        let p = self.profile.power as i32 - 1;
        let mut q = 0.0;
        let mut q_half = 0.0;
        for iv in self.breakpoints(levels, lo, hi).windows(2) {
            let (a, b) = (iv[0], iv[1]);
            if b <= a {
                continue;
            }
            let probe = [0.0, 0.25, 0.5, 0.75, 1.0];
            if probe.iter().all(|c| g(self.f(a + c * (b - a))) == 0.0) {
                continue;
            }
            let mut pieces = alloc::vec![(a, b)];
            if graded {
                let m = 0.5 * (a + b);
                let h = m - a;
                pieces.clear();
                pieces.push((a, a + h * 0.5f64.powi(GRADING_LEVELS)));
                pieces.push((b - h * 0.5f64.powi(GRADING_LEVELS), b));
                for j in 1..=GRADING_LEVELS {
                    let (x0, x1) = (h * 0.5f64.powi(j), h * 0.5f64.powi(j - 1));
                    pieces.push((a + x0, a + x1));
                    pieces.push((b - x1, b - x0));
                }
            }
            for (ca, cb) in pieces {
                let panels = ((cb - ca) / self.panel).ceil().max(1.0) as usize;
                let width = (cb - ca) / panels as f64;
                for k in 0..panels {
                    let pa = ca + width * k as f64;
                    let pb = if k + 1 == panels { cb } else { pa + width };
                    for i in 0..self.gl.len() {
                        let (u, wt) = self.gl.node(i, pa, pb);
                        q += wt * g(self.f(u)) * u.powi(p);
                    }
                    for i in 0..self.gl_half.len() {
                        let (u, wt) = self.gl_half.node(i, pa, pb);
                        q_half += wt * g(self.f(u)) * u.powi(p);
                    }
                }
            }
        }
        let k = self.profile.kappa;
        Estimate::new(k * q, k * (q - q_half).abs())
    }

    fn signed_f(&self, u: f64, abs: bool) -> f64 {
        let v = self.f(u);
        if abs {
            v.abs()
        } else {
            v
        }
    }

    /// Vol{f >= t}, t > 0.
    fn level_volume(&self, t: f64, abs: bool) -> f64 {
        let levels: &[f64] = if abs { &[t, -t] } else { &[t] };
        let b = self.breakpoints(levels, 0.0, self.u_max);
        let mut v = 0.0;
        for iv in b.windows(2) {
            if self.signed_f(0.5 * (iv[0] + iv[1]), abs) >= t {
                v += self.ball_volume(iv[1]) - self.ball_volume(iv[0]);
            }
        }
        v
    }

    /// Vol{F >= t, u <= ul}.
    fn region_level_volume(&self, t: f64, ul: f64) -> f64 {
        let hi = ul.min(self.u_max);
        let b = self.breakpoints(&[t], 0.0, hi);
        let mut v = 0.0;
        for iv in b.windows(2) {
            if self.f(0.5 * (iv[0] + iv[1])) >= t {
                v += self.ball_volume(iv[1]) - self.ball_volume(iv[0]);
            }
        }
        if ul > self.u_max && t <= 0.0 {
            v += self.ball_volume(ul) - self.ball_volume(self.u_max);
        }
        v
    }

    /// Vol{F < t}, t <= 0.
    fn below_volume(&self, t: f64) -> f64 {
        let b = self.breakpoints(&[t], 0.0, self.u_max);
        let mut v = 0.0;
        for iv in b.windows(2) {
            if self.f(0.5 * (iv[0] + iv[1])) < t {
                v += self.ball_volume(iv[1]) - self.ball_volume(iv[0]);
            }
        }
        v
    }

    fn max_of(&self, abs: bool) -> f64 {
        let (lo, hi) = self.extrema();
        if abs {
            hi.max(-lo)
        } else {
            hi
        }
    }

    /// Critical levels of f (values at the profile extrema).
    fn critical_levels(&self, abs: bool) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|s| [s.fa, s.fb])
            .map(|v| if abs { v.abs() } else { v })
            .filter(|v| *v > 0.0)
            .collect();
        c.sort_by(|a, b| a.total_cmp(b));
        c.dedup();
        c
    }

    fn level_tail(&self, t: f64, abs: bool) -> Estimate {
        let top = self.max_of(abs);
        if t >= top {
            return Estimate::default();
        }
        let mut b = alloc::vec![t, top];
        let mut x = 2.0 * t;
        while x < top {
            b.push(x);
            x *= 2.0;
        }
        b.extend(self.critical_levels(abs).into_iter().filter(|c| *c > t && *c < top));
        b.sort_by(|x, y| x.total_cmp(y));
        b.dedup();
        let gl = GaussLegendre::new(10);
        let gl5 = GaussLegendre::new(5);
        let (mut q, mut q5) = (0.0, 0.0);
        for iv in b.windows(2) {
            q += gl.integrate(iv[0], iv[1], |s| self.level_volume(s, abs));
            q5 += gl5.integrate(iv[0], iv[1], |s| self.level_volume(s, abs));
        }
        Estimate::new(q, (q - q5).abs())
    }

    fn monotone_nonnegative(&self) -> bool {
        self.segments.len() == 1 && self.segments[0].fb <= self.segments[0].fa && self.extrema().0 >= 0.0
    }

    fn rearrangement(&self, v: f64, abs: bool) -> f64 {
        let top = self.max_of(abs);
        if v <= 0.0 {
            return top;
        }
        if self.monotone_nonnegative() {
            let n = self.profile.power as f64;
            let u = (n * v / self.profile.kappa).powf(1.0 / n);
            return if u >= self.u_max { 0.0 } else { self.signed_f(u, abs).max(0.0) };
        }
        // m is continuous and nonincreasing on (0, top], so Brent converges fast
        let g0 = self.level_volume(0.0, abs) - v;
        if g0 <= 0.0 {
            return 0.0;
        }
        let g = |s: f64| self.level_volume(s, abs) - v;
        if let Ok(s) = brent(g, 0.0, top, g0, -v, 1e-15 * top) {
            return s;
        }
        let (mut lo, mut hi) = (0.0, top);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.level_volume(mid, abs) <= v {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn lorenz(&self, v: f64, abs: bool) -> Estimate {
        if v <= 0.0 {
            return Estimate::default();
        }
        let mut b = alloc::vec![0.0, v];
        let mut x = v;
        for _ in 0..24 {
            x *= 0.5;
            b.push(x);
        }
        for c in self.critical_levels(abs) {
            let m = self.level_volume(c, abs);
            if m > 0.0 && m < v {
                b.push(m);
            }
        }
        b.sort_by(|x, y| x.total_cmp(y));
        b.dedup();
        let gl = GaussLegendre::new(8);
        let gl4 = GaussLegendre::new(4);
        let (mut q, mut q4) = (0.0, 0.0);
        for iv in b.windows(2) {
            q += gl.integrate(iv[0], iv[1], |x| self.rearrangement(x, abs));
            q4 += gl4.integrate(iv[0], iv[1], |x| self.rearrangement(x, abs));
        }
        Estimate::new(q, (q - q4).abs())
    }
}
