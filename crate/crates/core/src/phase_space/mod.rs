//! Wigner functions with closed forms, and quadrature over phase space.
//!
//! Points are slices of length 2N in (q_1..q_N, p_1..p_N) ordering.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::gaussian_algebra::GaussianStateSpec;
use crate::quadrature::GaussLegendre;
use crate::symplectic::Matrix;

mod grid;
mod integrate;
mod rows;

pub use grid::GridFunction;
pub use integrate::{cutoff_doubling_check, integrate, Estimate, PreparedIntegrator, QuadratureConfig, Transform};

/// Sign of a cat superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// The two Fock-pair mixtures used throughout: (1-u)|0><0| + u|1><1| and
/// (1-u)|1><1| + u|2><2|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FockPair {
    ZeroOne,
    OneTwo,
}

/// Input families with closed-form outputs under scalar Gaussian channels.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarInput {
    Mix01(f64),
    Mix12(f64),
    Cat { alpha: Vec<f64>, parity: Parity },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WignerKind {
    Gaussian(GaussianStateSpec),
    Fock(usize),
    /// Weight of |n><n| at index n.
    FockMixture(Vec<f64>),
    Cat {
        alpha: Vec<f64>,
        parity: Parity,
    },
    GaussianMixture {
        weights: Vec<f64>,
        specs: Vec<GaussianStateSpec>,
    },
    GridFunction(GridFunction),
    BoxState,
    /// Output of the single-mode channel X = sqrt(k2) I, Y = y I.
    ScalarChannelOutput {
        input: ScalarInput,
        k2: f64,
        y: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct GaussCache {
    mean: Vec<f64>,
    inv: Matrix,
    norm: f64,
    /// gamma = c I when isotropic.
    isotropic: Option<f64>,
}

impl GaussCache {
    fn new(spec: &GaussianStateSpec) -> Self {
        let n = spec.n_modes();
        let m = spec.cov.matrix();
        let c = m[(0, 0)];
        let iso = (0..2 * n).all(|i| {
            (0..2 * n).all(|j| {
                let want = if i == j { c } else { 0.0 };
                (m[(i, j)] - want).abs() <= 1e-14 * c
            })
        });
        GaussCache {
            mean: spec.mean.clone(),
            inv: spec.cov.inverse(),
            norm: 1.0 / ((2.0 * PI).powi(n as i32) * spec.cov.det().sqrt()),
            isotropic: if iso { Some(c) } else { None },
        }
    }

    /// Half the Mahalanobis distance, (r - mean)^T gamma^{-1} (r - mean) / 2.
    fn half_quad(&self, r: &[f64]) -> f64 {
        let d = r.len();
        let mut s = 0.0;
        for i in 0..d {
            let di = r[i] - self.mean[i];
            let mut row = 0.0;
            for j in 0..d {
                row += self.inv[(i, j)] * (r[j] - self.mean[j]);
            }
            s += di * row;
        }
        0.5 * s
    }

    fn eval(&self, r: &[f64]) -> f64 {
        self.norm * (-self.half_quad(r)).exp()
    }

    fn centered(&self) -> bool {
        self.mean.iter().all(|m| *m == 0.0)
    }
}

/// W(r) = F(u(r)) with volume element kappa u^{N-1} du, where u = |r|^2, or
/// u = (r - mean)^T gamma^{-1} (r - mean) / 2 for a single Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Profile {
    pub kappa: f64,
    pub power: usize,
    /// F decays like exp(-u / width).
    pub width: f64,
}

/// An immutable, evaluable Wigner function on R^{2N} with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerEvaluable {
    kind: WignerKind,
    n_modes: usize,
    is_radial: bool,
    finite_negativity: bool,
    normalized: bool,
    gauss: Vec<GaussCache>,
}

impl WignerEvaluable {
    pub fn kind(&self) -> &WignerKind {
        &self.kind
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Single-mode rotational symmetry about the origin.
    pub fn is_radial(&self) -> bool {
        self.is_radial
    }

    /// Every negative superlevel complement {W < t}, t < 0, has finite volume.
    pub fn finite_negativity(&self) -> bool {
        self.finite_negativity
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Known to be nonnegative everywhere by construction.
    pub fn is_nonnegative(&self) -> bool {
        match &self.kind {
            WignerKind::Gaussian(_) => true,
            WignerKind::GaussianMixture { .. } => true,
            WignerKind::Fock(n) => *n == 0,
            WignerKind::FockMixture(p) => p.iter().skip(1).all(|w| *w == 0.0) || (p.len() == 2 && p[1] <= 0.5),
            WignerKind::Cat { alpha, .. } => alpha.iter().all(|a| *a == 0.0),
            WignerKind::ScalarChannelOutput { input: ScalarInput::Mix01(u), .. } => *u <= 0.5,
            WignerKind::GridFunction(g) => g.values().iter().all(|v| *v >= 0.0),
            _ => false,
        }
    }

    pub fn eval(&self, r: &[f64]) -> f64 {
        assert_eq!(r.len(), 2 * self.n_modes, "phase-space point has the wrong dimension");
        match &self.kind {
            WignerKind::Gaussian(_) => self.gauss[0].eval(r),
            WignerKind::GaussianMixture { weights, .. } => {
                weights.iter().zip(&self.gauss).map(|(w, g)| w * g.eval(r)).sum()
            }
            WignerKind::Cat { alpha, parity } => cat_value(alpha, *parity, r, 1.0, 0.0),
            WignerKind::ScalarChannelOutput { input: ScalarInput::Cat { alpha, parity }, k2, y } => {
                cat_value(alpha, *parity, r, *k2, *y)
            }
            WignerKind::GridFunction(g) => g.eval(r[0], r[1]),
            WignerKind::BoxState => box_value(r[0], r[1]),
            _ => {
                let u: f64 = r.iter().map(|x| x * x).sum();
                self.profile_value(u)
            }
        }
    }

    pub(crate) fn profile(&self) -> Option<Profile> {
        let n = self.n_modes;
        let gamma_n = crate::quadrature::factorial(n - 1);
        let sq = |kappa: f64, width: f64| Profile { kappa, power: n, width };
        match &self.kind {
            WignerKind::Gaussian(spec) => Some(Profile {
                kappa: (2.0 * PI).powi(n as i32) * spec.cov.det().sqrt() / gamma_n,
                power: n,
                width: 1.0,
            }),
            WignerKind::Fock(_) | WignerKind::FockMixture(_) => Some(sq(PI, 1.0)),
            WignerKind::GaussianMixture { .. } => {
                if self.gauss.iter().all(|g| g.centered() && g.isotropic.is_some()) {
                    let cmax = self.gauss.iter().filter_map(|g| g.isotropic).fold(0.0, f64::max);
                    Some(sq(PI.powi(n as i32) / gamma_n, 2.0 * cmax))
                } else {
                    None
                }
            }
            WignerKind::ScalarChannelOutput { input: ScalarInput::Mix01(_) | ScalarInput::Mix12(_), k2, y } => {
                Some(sq(PI, k2 + 2.0 * y))
            }
            _ => None,
        }
    }

    /// The radial profile F at coordinate u (only for kinds with a profile).
    pub(crate) fn profile_value(&self, u: f64) -> f64 {
        match &self.kind {
            WignerKind::Gaussian(_) => self.gauss[0].norm * (-u).exp(),
            WignerKind::Fock(n) => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign / PI * (-u).exp() * laguerre(*n, 2.0 * u)
            }
            WignerKind::FockMixture(p) => {
                let x = 2.0 * u;
                let (mut l0, mut l1) = (1.0, 1.0 - x);
                let mut s = p[0];
                for (k, w) in p.iter().enumerate().skip(1) {
                    if k > 1 {
                        let kf = (k - 1) as f64;
                        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
                        l0 = l1;
                        l1 = l2;
                    }
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    s += sign * w * l1;
                }
                s * (-u).exp() / PI
            }
            WignerKind::GaussianMixture { weights, .. } => {
                let n = self.n_modes as i32;
                weights
                    .iter()
                    .zip(&self.gauss)
                    .map(|(w, g)| {
                        let c = g.isotropic.unwrap_or(1.0);
                        w * (-u / (2.0 * c)).exp() / (2.0 * PI * c).powi(n)
                    })
                    .sum()
            }
            WignerKind::ScalarChannelOutput { input, k2, y } => match input {
                ScalarInput::Mix01(m) => mix01_output(*m, *k2, *y, u),
                ScalarInput::Mix12(m) => mix12_output(*m, *k2, *y, u),
                ScalarInput::Cat { .. } => f64::NAN,
            },
            _ => f64::NAN,
        }
    }

    /// Half-width of a box around the origin holding all but a negligible
    /// part of the function.
    pub(crate) fn extent(&self, base: f64) -> f64 {
        let gauss_extent = |g: &GaussCache, spec: &GaussianStateSpec| {
            let lmax = spec.cov.matrix().symmetric_eigenvalues().max();
            g.mean.iter().fold(0.0f64, |a, m| a.max(m.abs())) + 8.0 * lmax.sqrt()
        };
        match &self.kind {
            WignerKind::Gaussian(spec) => base.max(gauss_extent(&self.gauss[0], spec)),
            WignerKind::GaussianMixture { specs, .. } => {
                self.gauss.iter().zip(specs).fold(base, |a, (g, s)| a.max(gauss_extent(g, s)))
            }
            WignerKind::Cat { alpha, .. } => base.max(norm(alpha) + 8.0),
            WignerKind::ScalarChannelOutput { input, k2, y } => {
                let d = k2 + 2.0 * y;
                let shift = match input {
                    ScalarInput::Cat { alpha, .. } => k2.sqrt() * norm(alpha),
                    _ => 0.0,
                };
                base.max(shift + 8.0 * d.sqrt()).max(base * d.sqrt())
            }
            WignerKind::GridFunction(g) => g.halfwidth(),
            _ => base,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Laguerre polynomial L_n(x) by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut l0, mut l1) = (1.0, 1.0 - x);
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn base(kind: WignerKind, n_modes: usize) -> WignerEvaluable {
    WignerEvaluable { kind, n_modes, is_radial: false, finite_negativity: true, normalized: true, gauss: Vec::new() }
}

/// W(r) = exp(-(r - mean)^T gamma^{-1} (r - mean) / 2) / ((2 pi)^N sqrt(det gamma)).
pub fn gaussian_wigner(spec: &GaussianStateSpec) -> WignerEvaluable {
    let cache = GaussCache::new(spec);
    let mut w = base(WignerKind::Gaussian(spec.clone()), spec.n_modes());
    w.is_radial = spec.n_modes() == 1 && cache.centered() && cache.isotropic.is_some();
    w.gauss.push(cache);
    w
}

/// W_n(r) = ((-1)^n / pi) e^{-r^2} L_n(2 r^2).
pub fn fock_wigner(n: usize) -> WignerEvaluable {
    let mut w = base(WignerKind::Fock(n), 1);
    w.is_radial = true;
    w
}

/// (1-u) W_a + u W_b for the chosen Fock pair.
pub fn fock_mixture(u: f64, pair: FockPair) -> Result<WignerEvaluable> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::ParamOutOfRange(format!("mixing weight u = {u} outside [0, 1]")));
    }
    let weights = match pair {
        FockPair::ZeroOne => alloc::vec![1.0 - u, u],
        FockPair::OneTwo => alloc::vec![0.0, 1.0 - u, u],
    };
    fock_mixture_weights(&weights)
}

/// Diagonal Fock mixture with weight `weights[n]` on |n><n|.
pub fn fock_mixture_weights(weights: &[f64]) -> Result<WignerEvaluable> {
    if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::ParamOutOfRange("Fock weights must be nonnegative".to_string()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::ParamOutOfRange(format!("Fock weights sum to {total}, not 1")));
    }
    let mut w = base(WignerKind::FockMixture(weights.to_vec()), 1);
    w.is_radial = true;
    Ok(w)
}

/// Cat state (|alpha> +/- |-alpha>) with alpha given as a phase-space vector.
pub fn cat_wigner(alpha: &[f64], parity: Parity) -> Result<WignerEvaluable> {
    check_alpha(alpha, parity)?;
    Ok(base(WignerKind::Cat { alpha: alpha.to_vec(), parity }, alpha.len() / 2))
}

fn check_alpha(alpha: &[f64], parity: Parity) -> Result<()> {
    if alpha.is_empty() || alpha.len() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("cat amplitude must have even length, got {}", alpha.len())));
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::ParamOutOfRange("cat amplitude is not finite".to_string()));
    }
    if parity == Parity::Odd && alpha.iter().all(|a| *a == 0.0) {
        return Err(Error::ParamOutOfRange("odd cat needs a nonzero amplitude".to_string()));
    }
    Ok(())
}

/// Convex combination of Gaussian Wigner functions.
pub fn gaussian_mixture(weights: &[f64], specs: &[GaussianStateSpec]) -> Result<WignerEvaluable> {
    if weights.len() != specs.len() || specs.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} Gaussian components",
            weights.len(),
            specs.len()
        )));
    }
    let n = specs[0].n_modes();
    if specs.iter().any(|s| s.n_modes() != n) {
        return Err(Error::DimensionMismatch("mixture components differ in mode count".to_string()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::ParamOutOfRange("mixture weights must be a probability vector".to_string()));
    }
    let mut w = base(WignerKind::GaussianMixture { weights: weights.to_vec(), specs: specs.to_vec() }, n);
    w.gauss = specs.iter().map(GaussCache::new).collect();
    w.is_radial = n == 1 && w.gauss.iter().all(|g| g.centered() && g.isotropic.is_some());
    Ok(w)
}

fn gaussian_parts(w: &WignerEvaluable) -> Option<(Vec<f64>, Vec<GaussianStateSpec>)> {
    match &w.kind {
        WignerKind::Gaussian(spec) => Some((alloc::vec![1.0], alloc::vec![spec.clone()])),
        WignerKind::GaussianMixture { weights, specs } => Some((weights.clone(), specs.clone())),
        _ => None,
    }
}

fn fock_parts(w: &WignerEvaluable) -> Option<Vec<f64>> {
    match &w.kind {
        WignerKind::Fock(n) => {
            let mut p = alloc::vec![0.0; n + 1];
            p[*n] = 1.0;
            Some(p)
        }
        WignerKind::FockMixture(p) => Some(p.clone()),
        _ => None,
    }
}

/// The convex combination s a + (1 - s) b, for two Gaussian-family or two
/// Fock-diagonal functions.
pub fn mix(a: &WignerEvaluable, b: &WignerEvaluable, s: f64) -> Result<WignerEvaluable> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ParamOutOfRange(format!("mixing weight {s} outside [0, 1]")));
    }
    if let (Some((wa, sa)), Some((wb, sb))) = (gaussian_parts(a), gaussian_parts(b)) {
        let mut weights: Vec<f64> = wa.iter().map(|x| s * x).collect();
        weights.extend(wb.iter().map(|x| (1.0 - s) * x));
        let mut specs = sa;
        specs.extend(sb);
        // renormalize away rounding in the component weights
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|x| *x /= total);
        return gaussian_mixture(&weights, &specs);
    }
    if let (Some(pa), Some(pb)) = (fock_parts(a), fock_parts(b)) {
        let mut p = alloc::vec![0.0; pa.len().max(pb.len())];
        for (i, x) in pa.iter().enumerate() {
            p[i] += s * x;
        }
        for (i, x) in pb.iter().enumerate() {
            p[i] += (1.0 - s) * x;
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        return fock_mixture_weights(&p);
    }
    Err(Error::Unsupported("mixtures need two Gaussian-family or two Fock-diagonal functions".to_string()))
}

/// Sampled single-mode function with bilinear interpolation.
pub fn grid_wigner(grid: GridFunction, normalized: bool) -> WignerEvaluable {
    let mut w = base(WignerKind::GridFunction(grid), 1);
    w.normalized = normalized;
    w
}

/// W(x, p) = sin[p (1 - 2|x|)] / (pi p) on |x| <= 1/2, zero elsewhere.
/// Not absolutely integrable.
pub fn box_state_wigner() -> WignerEvaluable {
    let mut w = base(WignerKind::BoxState, 1);
    w.finite_negativity = false;
    w
}

/// Closed-form output of X = sqrt(k2) I, Y = y I acting on a single-mode
/// Fock-pair mixture or cat. Used by the channel layer.
pub fn scalar_channel_output(input: ScalarInput, k2: f64, y: f64) -> Result<WignerEvaluable> {
    if !(k2 >= 0.0 && y >= 0.0 && k2 + 2.0 * y > 0.0 && k2.is_finite() && y.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("scalar channel (k2 = {k2}, y = {y})")));
    }
    let n_modes = match &input {
        ScalarInput::Mix01(u) | ScalarInput::Mix12(u) => {
            if !(0.0..=1.0).contains(u) {
                return Err(Error::ParamOutOfRange(format!("mixing weight u = {u} outside [0, 1]")));
            }
            1
        }
        ScalarInput::Cat { alpha, parity } => {
            check_alpha(alpha, *parity)?;
            if alpha.len() != 2 {
                return Err(Error::DimensionMismatch("closed-form cat outputs are single-mode".to_string()));
            }
            1
        }
    };
    let radial = !matches!(input, ScalarInput::Cat { .. });
    let mut w = base(WignerKind::ScalarChannelOutput { input, k2, y }, n_modes);
    w.is_radial = radial;
    Ok(w)
}

fn mix01_output(u: f64, k2: f64, y: f64, r2: f64) -> f64 {
    let d = k2 + 2.0 * y;
    (-r2 / d).exp() * (d * d + 2.0 * u * k2 * (r2 - d)) / (PI * d * d * d)
}

fn mix12_output(u: f64, k2: f64, y: f64, r2: f64) -> f64 {
    let d = k2 + 2.0 * y;
    let a = (2.0 * y - k2) * d * d * (2.0 * y + k2 * (1.0 - 2.0 * u));
    let b = 2.0 * r2 * k2 * d * (k2 * (1.0 - 3.0 * u) + 2.0 * y * (1.0 + u));
    let c = 2.0 * u * r2 * r2 * k2 * k2;
    (-r2 / d).exp() * (a + b + c) / (PI * d.powi(5))
}

/// Cat Wigner function after X = sqrt(k2) I, Y = y I (k2 = 1, y = 0 is the
/// input itself).
fn cat_value(alpha: &[f64], parity: Parity, r: &[f64], k2: f64, y: f64) -> f64 {
    let n = alpha.len() / 2;
    let d = k2 + 2.0 * y;
    let k = k2.sqrt();
    let a2: f64 = alpha.iter().map(|a| a * a).sum();
    let (mut plus, mut minus, mut dot, mut r2) = (0.0, 0.0, 0.0, 0.0);
    for (a, x) in alpha.iter().zip(r) {
        plus += (k * a + x) * (k * a + x);
        minus += (k * a - x) * (k * a - x);
        dot += a * x;
        r2 += x * x;
    }
    let s = parity.sign();
    let interference = 2.0 * s * (2.0 * k * dot / d).cos() * (-(r2 + 2.0 * y * a2) / d).exp();
    let num = (-plus / d).exp() + (-minus / d).exp() + interference;
    num / (2.0 * (PI * d).powi(n as i32) * (1.0 + s * (-a2).exp()))
}

fn box_value(x: f64, p: f64) -> f64 {
    if x.abs() > 0.5 {
        return 0.0;
    }
    let a = 1.0 - 2.0 * x.abs();
    let z = p * a;
    if z.abs() < 1e-8 {
        a * (1.0 - z * z / 6.0) / PI
    } else {
        (z.sin() / p) / PI
    }
}

/// Integral of |W_box| over the strip |p| <= p_cutoff. Grows like
/// (4 / pi^2) ln p_cutoff.
pub fn box_state_abs_integral(p_cutoff: f64) -> f64 {
    // int_{-1/2}^{1/2} dx (2/pi) int_0^{(1-2|x|) P} |sin s|/s ds
    //   = (2 / (pi P)) int_0^P (P - s) |sin s| / s ds
    let p = p_cutoff;
    let gl = GaussLegendre::new(24);
    let mut s = 0.0;
    let mut a = 0.0;
    while a < p {
        let b = (a + PI).min(p);
        s += gl.integrate(a, b, |x| {
            let sinc = if x < 1e-12 { 1.0 } else { x.sin().abs() / x };
            (p - x) * sinc
        });
        a = b;
    }
    2.0 * s / (PI * p)
}
