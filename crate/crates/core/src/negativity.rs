//! Wigner logarithmic negativity, Wigner Renyi entropies on the real branch,
//! channel inequalities, Fock negativity scans and negativity rule-outs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{channel_output, GaussianChannel};
use crate::error::{Error, Result};
use crate::majorization::functional_i;
use crate::phase_space::{fock_wigner, integrate, Estimate, QuadratureConfig, Transform, WignerEvaluable};
use crate::tolerance::ToleranceConfig;
use crate::verdict::Relation;

/// Renyi order alpha = 2p / (2q - 1), kept in lowest terms.
///
/// The even numerator makes the real branch of W^alpha equal to |W|^alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RenyiIndex {
    p: u32,
    q: u32,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RenyiIndex {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::ParamOutOfRange(format!("Renyi index needs p, q >= 1, got ({p}, {q})")));
        }
        // 2q - 1 is odd, so any common factor of 2p and 2q - 1 divides p
        let den = 2 * q - 1;
        let g = gcd(p, den);
        Ok(RenyiIndex { p: p / g, q: (den / g + 1) / 2 })
    }

    /// The index for a given alpha, if alpha = 2p / (2q - 1) with small p, q.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            return Err(Error::DomainError("alpha = 1 is the Shannon limit; use the log-negativity".to_string()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::DomainError(format!("alpha = {alpha} must be positive")));
        }
        for q in 1..=500u32 {
            let p = alpha * (2 * q - 1) as f64 / 2.0;
            if p >= 0.5 && (p - p.round()).abs() <= 1e-9 * p.max(1.0) {
                return Self::new(p.round() as u32, q);
            }
        }
        Err(Error::DomainError(format!("alpha = {alpha} is not of the form 2p/(2q-1)")))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        2.0 * self.p as f64 / (2 * self.q - 1) as f64
    }
}

impl fmt::Display for RenyiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", 2 * self.p)
        } else {
            write!(f, "{}/{}", 2 * self.p, 2 * self.q - 1)
        }
    }
}

impl FromStr for RenyiIndex {
    type Err = Error;

    /// Parses `a/b` with a even and b odd, or an even integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::DomainError(format!("'{s}' is not a Renyi index 2p/(2q-1)"));
        let (a, b) = match s.trim().split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s.trim(), "1"),
        };
        let a: u32 = a.parse().map_err(|_| bad())?;
        let b: u32 = b.parse().map_err(|_| bad())?;
        if a == 0 || a % 2 != 0 || b % 2 != 1 {
            return Err(bad());
        }
        Self::new(a / 2, (b + 1) / 2)
    }
}

/// ln int |W| with the integral it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityReport {
    pub log_negativity: f64,
    pub abs_integral: f64,
    pub error_estimate: f64,
}

/// Wigner logarithmic negativity N = ln int |W|.
///
/// For normalized W the identity I_0[W] = (e^N + 1) / 2 is checked against
/// the shifted-plus functional.
pub fn log_negativity(w: &WignerEvaluable, cfg: &QuadratureConfig) -> Result<NegativityReport> {
    if !w.finite_negativity() {
        return Err(Error::NotIntegrable);
    }
    let abs = integrate(w, Transform::Abs, cfg)?;
    let mut value = abs.value;
    let slack = 5.0 * abs.error + 1e-10;
    if w.is_normalized() {
        if value < 1.0 && value >= 1.0 - slack {
            value = 1.0;
        }
        let plus = functional_i(w, 0.0, false, cfg)?;
        let want = 0.5 * (value + 1.0);
        if (plus.value - want).abs() > 1e-8 + 5.0 * (plus.error + abs.error) {
            return Err(Error::CrossCheckMismatch(format!("I_0[W] = {} but (e^N + 1) / 2 = {want}", plus.value)));
        }
    }
    if value <= 0.0 {
        return Err(Error::DomainError("int |W| is not positive".to_string()));
    }
    Ok(NegativityReport { log_negativity: value.ln(), abs_integral: value, error_estimate: abs.error / value })
}

/// S_alpha = ln(int |W|^alpha) / (1 - alpha).
pub fn wigner_renyi(w: &WignerEvaluable, idx: RenyiIndex, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !w.finite_negativity() {
        return Err(Error::NotIntegrable);
    }
    let a = idx.alpha();
    let i = integrate(w, Transform::Power(a), cfg)?;
    if i.value <= 0.0 {
        return Err(Error::DomainError("int |W|^alpha is not positive".to_string()));
    }
    let k = 1.0 / (1.0 - a);
    Ok(Estimate::new(k * i.value.ln(), (k * i.error / i.value).abs()))
}

/// Which inequality `renyi_channel_inequality` evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InequalityOrder {
    /// N_in >= N_out.
    One,
    /// -ln det X + S_out >= S_in, alpha >= 1.
    Renyi(RenyiIndex),
}

/// Both sides of a channel inequality. `slack = lhs - rhs` is nonnegative
/// when the inequality holds; `raw_diff` is the bare S_out - S_in (or
/// N_in - N_out for order one), which may take either sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub raw_diff: f64,
    pub error: f64,
}

/// The inequality for a known output and det X.
pub fn renyi_inequality_for_output(
    w_in: &WignerEvaluable,
    w_out: &WignerEvaluable,
    det_x: f64,
    order: InequalityOrder,
    cfg: &QuadratureConfig,
) -> Result<RenyiInequality> {
    match order {
        InequalityOrder::One => {
            let n_in = log_negativity(w_in, cfg)?;
            let n_out = log_negativity(w_out, cfg)?;
            let diff = n_in.log_negativity - n_out.log_negativity;
            Ok(RenyiInequality {
                lhs: n_in.log_negativity,
                rhs: n_out.log_negativity,
                slack: diff,
                raw_diff: diff,
                error: n_in.error_estimate + n_out.error_estimate,
            })
        }
        InequalityOrder::Renyi(idx) => {
            if idx.alpha() < 1.0 {
                return Err(Error::DomainError(format!("the channel inequality needs alpha >= 1, got {idx}")));
            }
            if !(det_x > 0.0) {
                return Err(Error::DomainError(format!("det X = {det_x} must be positive")));
            }
            let s_in = wigner_renyi(w_in, idx, cfg)?;
            let s_out = wigner_renyi(w_out, idx, cfg)?;
            let lhs = -det_x.ln() + s_out.value;
            Ok(RenyiInequality {
                lhs,
                rhs: s_in.value,
                slack: lhs - s_in.value,
                raw_diff: s_out.value - s_in.value,
                error: s_in.error + s_out.error,
            })
        }
    }
}

/// Evaluates the inequality for the channel's output on `w_in`, using closed
/// forms where available.
pub fn renyi_channel_inequality(
    w_in: &WignerEvaluable,
    ch: &GaussianChannel,
    order: InequalityOrder,
    cfg: &QuadratureConfig,
) -> Result<RenyiInequality> {
    let w_out = channel_output(ch, w_in, 0.05)?;
    renyi_inequality_for_output(w_in, &w_out, ch.det_x(), order, cfg)
}

/// y = slope x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares; needs two distinct abscissae.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DimensionMismatch("least squares needs two or more paired points".to_string()));
    }
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DomainError("abscissae are all equal".to_string()));
    }
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: my - slope * mx })
}

/// ln I_0[|W_n|] for n = 1..n_max with a fit of ln I_0 against ln n over the
/// last `window` points.
#[derive(Debug, Clone, PartialEq)]
pub struct FockNegativityScan {
    pub n: Vec<usize>,
    pub log_i0: Vec<f64>,
    pub errors: Vec<f64>,
    pub window: usize,
    pub fit: LinearFit,
}

pub fn fock_negativity_scan(n_max: usize, window: usize, cfg: &QuadratureConfig) -> Result<FockNegativityScan> {
    if n_max < 5 {
        return Err(Error::ParamOutOfRange(format!("the scan needs n_max >= 5, got {n_max}")));
    }
    if window < 2 {
        return Err(Error::ParamOutOfRange(format!("the fit window needs two points, got {window}")));
    }
    let mut n = Vec::with_capacity(n_max);
    let mut log_i0 = Vec::with_capacity(n_max);
    let mut errors = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        let r = log_negativity(&fock_wigner(k), cfg)?;
        n.push(k);
        log_i0.push(r.log_negativity);
        errors.push(r.error_estimate);
    }
    let window = window.min(n_max);
    let start = n_max - window;
    let x: Vec<f64> = n[start..].iter().map(|k| (*k as f64).ln()).collect();
    let fit = least_squares(&x, &log_i0[start..])?;
    Ok(FockNegativityScan { n, log_i0, errors, window, fit })
}

/// A Gaussian channel known to connect the two states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelDirection {
    FirstToSecond,
    SecondToFirst,
}

/// Conclusions drawn from a strict negativity gap.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutReport {
    /// N_1 - N_2.
    pub gap: f64,
    pub combined_error: f64,
    /// The channel's output cannot Wigner-majorize its input (Proposals 1 and 2).
    pub output_cannot_majorize_input: bool,
    /// No Gaussian channel maps the second state onto the first.
    pub no_channel_second_to_first: bool,
    /// No Gaussian channel maps the first state onto the second.
    pub no_channel_first_to_second: bool,
    pub notes: Vec<String>,
}

/// Applies the two rule-out criteria. Needs |N_1 - N_2| above
/// `negativity_gap_factor` times the combined error.
pub fn rule_out_propositions(
    n1: &NegativityReport,
    n2: &NegativityReport,
    channel: Option<ChannelDirection>,
    relation: Option<Relation>,
    tol: &ToleranceConfig,
) -> Result<RuleOutReport> {
    let gap = n1.log_negativity - n2.log_negativity;
    let error = n1.error_estimate + n2.error_estimate + tol.margin_floor;
    if gap.abs() <= tol.negativity_gap_factor * error {
        return Err(Error::InsufficientMargin { gap, error });
    }
    let mut report = RuleOutReport {
        gap,
        combined_error: error,
        output_cannot_majorize_input: false,
        no_channel_second_to_first: false,
        no_channel_first_to_second: false,
        notes: Vec::new(),
    };
    if let Some(dir) = channel {
        // a Gaussian channel never raises the negativity
        let drop = match dir {
            ChannelDirection::FirstToSecond => gap,
            ChannelDirection::SecondToFirst => -gap,
        };
        if drop < 0.0 {
            return Err(Error::CrossCheckMismatch(format!("negativity rises by {} along a Gaussian channel", -drop)));
        }
        report.output_cannot_majorize_input = true;
        report.notes.push("negativity drops along the channel: the output cannot majorize the input".to_string());
    }
    match relation {
        Some(Relation::FirstMajorizes) if gap > 0.0 => {
            report.no_channel_second_to_first = true;
            report
                .notes
                .push("first majorizes second with larger negativity: no channel from second to first".to_string());
        }
        Some(Relation::SecondMajorizes) if gap < 0.0 => {
            report.no_channel_first_to_second = true;
            report
                .notes
                .push("second majorizes first with larger negativity: no channel from first to second".to_string());
        }
        _ => {}
    }
    Ok(report)
}

/// A majorization verdict must not contradict the negativities: the
/// majorizing state has N at least as large, up to the combined tolerance.
pub fn negativity_order_consistent(
    relation: Relation,
    n1: &NegativityReport,
    n2: &NegativityReport,
    tol: &ToleranceConfig,
) -> bool {
    let slack = tol.negativity_gap_factor * (n1.error_estimate + n2.error_estimate) + 1e-9;
    match relation {
        Relation::FirstMajorizes => n1.log_negativity >= n2.log_negativity - slack,
        Relation::SecondMajorizes => n2.log_negativity >= n1.log_negativity - slack,
        Relation::Equivalent => (n1.log_negativity - n2.log_negativity).abs() <= slack,
        _ => true,
    }
}
