//! Gaussian channels (X, Y) acting as gamma -> X gamma X^T + Y, their
//! convolution kernels, closed-form outputs, witnesses, and random Gaussian
//! unitary channels.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{Cholesky, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian_algebra::{williamson, CovarianceMatrix, GaussianStateSpec};
use crate::phase_space::{
    cat_wigner, fock_mixture, gaussian_wigner, grid_wigner, integrate, scalar_channel_output, FockPair, GridFunction,
    Parity, QuadratureConfig, ScalarInput, Transform, WignerEvaluable, WignerKind,
};
use crate::quadrature::GaussLegendre;
use crate::symplectic::{is_symplectic, rotation, squeezer, symplectic_form, Matrix};
use crate::tolerance::ToleranceConfig;

/// A Gaussian channel on N modes, validated for complete positivity.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    x: Matrix,
    y: Matrix,
}

impl GaussianChannel {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        Self::with_tolerance(x, y, &ToleranceConfig::DEFAULT)
    }

    pub fn with_tolerance(x: Matrix, y: Matrix, tol: &ToleranceConfig) -> Result<Self> {
        let d = x.nrows();
        if !x.is_square() || d == 0 || d % 2 != 0 {
            return Err(Error::DimensionMismatch(format!("X must be 2N x 2N, got {} x {}", x.nrows(), x.ncols())));
        }
        if y.nrows() != d || y.ncols() != d {
            return Err(Error::DimensionMismatch(format!("Y is {} x {}, X is {d} x {d}", y.nrows(), y.ncols())));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::ParamOutOfRange("channel has non-finite entries".to_string()));
        }
        let asym = (&y - y.transpose()).amax();
        if asym > tol.symmetry * y.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let y = (&y + y.transpose()) * 0.5;
        let ch = GaussianChannel { x, y };
        let m = ch.cp_min_eigenvalue();
        if m < -tol.cp_floor {
            return Err(Error::NotCompletelyPositive(m));
        }
        Ok(ch)
    }

    pub fn identity(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        GaussianChannel { x: Matrix::identity(d, d), y: Matrix::zeros(d, d) }
    }

    /// The Gaussian unitary with symplectic matrix `s` (Y = 0).
    pub fn unitary(s: Matrix) -> Result<Self> {
        if !is_symplectic(&s, 1e-9) {
            return Err(Error::ParamOutOfRange("matrix is not symplectic".to_string()));
        }
        let d = s.nrows();
        Self::new(s, Matrix::zeros(d, d))
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn n_modes(&self) -> usize {
        self.x.nrows() / 2
    }

    pub fn det_x(&self) -> f64 {
        self.x.determinant()
    }

    /// Smallest eigenvalue of the Hermitian Y + (i/2)(J - X J X^T), computed
    /// from its real embedding [[Y, -B], [B, Y]].
    pub fn cp_min_eigenvalue(&self) -> f64 {
        let d = self.x.nrows();
        let j = symplectic_form(d / 2);
        let b = (&j - &self.x * &j * self.x.transpose()) * 0.5;
        let mut m = Matrix::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&self.y);
        m.view_mut((d, d), (d, d)).copy_from(&self.y);
        m.view_mut((0, d), (d, d)).copy_from(&(-&b));
        m.view_mut((d, 0), (d, d)).copy_from(&b);
        let sym = (&m + m.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::ParamOutOfRange(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_thermal(s: f64, c: f64) -> Result<()> {
    check_unit("s", s)?;
    if !(c >= 0.5 && c.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("thermal noise needs c >= 1/2, got {c}")));
    }
    Ok(())
}

fn check_mixing(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("classical mixing needs c > 0, got {c}")));
    }
    Ok(())
}

/// X = sqrt(1 - s) I, Y = s c I. The loss channel is c = 1/2.
pub fn thermal_noise_channel(s: f64, c: f64) -> Result<GaussianChannel> {
    check_thermal(s, c)?;
    let i2 = Matrix::identity(2, 2);
    GaussianChannel::new(&i2 * (1.0 - s).sqrt(), &i2 * (s * c))
}

/// X = sqrt(eta) I, Y = (eta - 1) I.
pub fn amplification_channel(eta: f64) -> Result<GaussianChannel> {
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("amplification needs eta >= 1, got {eta}")));
    }
    let i2 = Matrix::identity(2, 2);
    GaussianChannel::new(&i2 * eta.sqrt(), &i2 * (eta - 1.0))
}

/// X = I, Y = `ycov` (symmetric positive definite).
pub fn classical_mixing_channel(ycov: Matrix) -> Result<GaussianChannel> {
    let d = ycov.nrows();
    if !ycov.is_square() || d == 0 || d % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("Y must be 2N x 2N, got {} x {}", ycov.nrows(), ycov.ncols())));
    }
    if (&ycov - ycov.transpose()).amax() > ToleranceConfig::DEFAULT.symmetry * ycov.amax().max(1.0) {
        return Err(Error::NotSpd);
    }
    Cholesky::new(ycov.clone()).ok_or(Error::NotSpd)?;
    GaussianChannel::new(Matrix::identity(d, d), ycov)
}

fn check_modes(ch: &GaussianChannel, n: usize) -> Result<()> {
    if ch.n_modes() != n {
        return Err(Error::DimensionMismatch(format!("channel acts on {} modes, state has {n}", ch.n_modes())));
    }
    Ok(())
}

/// gamma -> X gamma X^T + Y and mean -> X mean.
pub fn apply_to_gaussian(ch: &GaussianChannel, spec: &GaussianStateSpec) -> Result<GaussianStateSpec> {
    check_modes(ch, spec.n_modes())?;
    let cov = &ch.x * spec.cov.matrix() * ch.x.transpose() + &ch.y;
    let cov = CovarianceMatrix::new(cov).expect("a valid channel preserves the uncertainty relation");
    let mean = &ch.x * DVector::from_column_slice(&spec.mean);
    GaussianStateSpec::new(mean.iter().copied().collect(), cov)
}

/// Composition `outer` after `inner`.
pub fn compose(outer: &GaussianChannel, inner: &GaussianChannel) -> Result<GaussianChannel> {
    if outer.n_modes() != inner.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "composing {}-mode and {}-mode channels",
            outer.n_modes(),
            inner.n_modes()
        )));
    }
    let x = &outer.x * &inner.x;
    let y = &outer.y + &outer.x * &inner.y * outer.x.transpose();
    GaussianChannel::new(x, y)
}

/// det X >= 1 (within tolerance).
pub fn is_wigner_majorizing(ch: &GaussianChannel) -> bool {
    is_wigner_majorizing_with(ch, &ToleranceConfig::DEFAULT)
}

pub fn is_wigner_majorizing_with(ch: &GaussianChannel, tol: &ToleranceConfig) -> bool {
    ch.det_x() >= 1.0 - tol.majorizing_det
}

/// k(r, z) = exp(-(r - X z)^T Y^{-1} (r - X z) / 2) / ((2 pi)^N sqrt(det Y)).
pub fn kernel_eval(ch: &GaussianChannel, r: &[f64], z: &[f64]) -> Result<f64> {
    let d = ch.x.nrows();
    if r.len() != d || z.len() != d {
        return Err(Error::DimensionMismatch(format!("kernel points must have length {d}")));
    }
    if ch.y.amax() == 0.0 {
        return Err(Error::Unsupported("Y = 0: the kernel is a delta function".to_string()));
    }
    let chol = Cholesky::new(ch.y.clone()).ok_or(Error::SingularY)?;
    let diff = DVector::from_column_slice(r) - &ch.x * DVector::from_column_slice(z);
    let q = diff.dot(&chol.solve(&diff));
    let det: f64 = chol.l().diagonal().iter().map(|v| v * v).product();
    Ok((-0.5 * q).exp() / ((2.0 * PI).powi((d / 2) as i32) * det.sqrt()))
}

/// Square output grid [-halfwidth, halfwidth]^2 with an odd node count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputGrid {
    pub halfwidth: f64,
    pub points: usize,
    /// Allowed normalization error is twice this.
    pub tolerance: f64,
}

impl OutputGrid {
    pub fn new(halfwidth: f64, points: usize) -> Result<Self> {
        if !(halfwidth > 0.0 && halfwidth.is_finite()) || points < 3 || points % 2 == 0 {
            return Err(Error::ParamOutOfRange(format!(
                "output grid needs halfwidth > 0 and an odd node count >= 3, got ({halfwidth}, {points})"
            )));
        }
        Ok(OutputGrid { halfwidth, points, tolerance: 1e-6 })
    }

    /// A grid holding the whole output, with spacing at most `spacing`.
    pub fn covering(ch: &GaussianChannel, w_in: &WignerEvaluable, spacing: f64) -> Result<Self> {
        let hw = covering_halfwidth(ch, w_in);
        let mut points = (2.0 * hw / spacing).ceil() as usize + 1;
        if points % 2 == 0 {
            points += 1;
        }
        Self::new(hw, points.max(3))
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.halfwidth + 2.0 * self.halfwidth * i as f64 / (self.points - 1) as f64
    }

    fn build<F: FnMut(f64, f64) -> f64>(&self, f: F) -> Result<GridFunction> {
        let (a, n) = (self.halfwidth, self.points);
        GridFunction::from_fn(-a, a, n, -a, a, n, f)
    }
}

fn sym_max_eig(m: &Matrix) -> f64 {
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.max().max(0.0)
}

fn covering_halfwidth(ch: &GaussianChannel, w_in: &WignerEvaluable) -> f64 {
    let xs = sym_max_eig(&(&ch.x * ch.x.transpose())).sqrt();
    xs * w_in.extent(6.0) + 8.0 * sym_max_eig(&ch.y).sqrt()
}

/// Half-width of the standard-normal integration box.
const XI_BOX: f64 = 8.5;
/// Largest z-space width of one quadrature panel.
const Z_PANEL: f64 = 0.5;

enum Plan {
    /// X = 0: the output is the Gaussian with covariance Y, scaled by the input mass.
    Replace { out: WignerEvaluable, mass: f64 },
    /// Y = 0: W_in(X^{-1} r) / |det X|.
    Unitary { xinv: Matrix, jac: f64 },
    /// z = X^{-1} r + L xi with L L^T = X^{-1} Y X^{-T}.
    Smooth { xinv: Matrix, l: Matrix, jac: f64, nodes: Vec<(f64, f64)> },
}

fn plan(ch: &GaussianChannel, w_in: &WignerEvaluable) -> Result<Plan> {
    check_modes(ch, w_in.n_modes())?;
    let d = ch.x.nrows();
    if ch.x.amax() == 0.0 {
        let cov = CovarianceMatrix::new(ch.y.clone())?;
        let mass = if w_in.is_normalized() {
            1.0
        } else {
            integrate(w_in, Transform::Identity, &QuadratureConfig::default())?.value
        };
        return Ok(Plan::Replace { out: gaussian_wigner(&GaussianStateSpec::centered(cov)), mass });
    }
    let det = ch.det_x();
    let xinv = match ch.x.clone().try_inverse() {
        Some(m) if det.abs() > 1e-14 * ch.x.amax().powi(d as i32) => m,
        _ => return Err(Error::SingularX),
    };
    let jac = 1.0 / det.abs();
    if ch.y.amax() == 0.0 {
        return Ok(Plan::Unitary { xinv, jac });
    }
    if d != 2 {
        return Err(Error::Unsupported("kernel convolution is implemented for single-mode inputs".to_string()));
    }
    let sigma = &xinv * &ch.y * xinv.transpose();
    let l = Cholesky::new((&sigma + sigma.transpose()) * 0.5).ok_or(Error::SingularY)?.l();
    let spread = sym_max_eig(&sigma).sqrt();
    let panels = ((2.0 * XI_BOX * spread / Z_PANEL).ceil() as usize).max(6);
    let gl = GaussLegendre::new(8);
    let h = 2.0 * XI_BOX / panels as f64;
    let mut nodes = Vec::with_capacity(panels * gl.len());
    for k in 0..panels {
        let a = -XI_BOX + h * k as f64;
        for i in 0..gl.len() {
            let (x, w) = gl.node(i, a, a + h);
            nodes.push((x, w * (-0.5 * x * x).exp()));
        }
    }
    Ok(Plan::Smooth { xinv, l, jac, nodes })
}

fn eval_plan(p: &Plan, w_in: &WignerEvaluable, r: &[f64]) -> f64 {
    match p {
        Plan::Replace { out, mass } => mass * out.eval(r),
        Plan::Unitary { xinv, jac } => {
            let z = xinv * DVector::from_column_slice(r);
            jac * w_in.eval(z.as_slice())
        }
        Plan::Smooth { xinv, l, jac, nodes } => {
            let z0 = xinv * DVector::from_column_slice(r);
            let (l00, l10, l11) = (l[(0, 0)], l[(1, 0)], l[(1, 1)]);
            let mut s = 0.0;
            for (a, wa) in nodes {
                let mut row = 0.0;
                let za = z0[0] + l00 * a;
                let zb = z0[1] + l10 * a;
                for (b, wb) in nodes {
                    row += wb * w_in.eval(&[za, zb + l11 * b]);
                }
                s += wa * row;
            }
            jac * s / (2.0 * PI)
        }
    }
}

/// W_out(r) = int k(r, z) W_in(z) dz at one point.
pub fn convolve_point(ch: &GaussianChannel, w_in: &WignerEvaluable, r: &[f64]) -> Result<f64> {
    let p = plan(ch, w_in)?;
    if r.len() != 2 * w_in.n_modes() {
        return Err(Error::DimensionMismatch(format!("point has length {}", r.len())));
    }
    Ok(eval_plan(&p, w_in, r))
}

/// Evaluates a pointwise map over the grid, then checks the mass when the
/// grid holds the whole output.
pub fn convolve_with<F: FnMut(f64, f64) -> f64>(
    ch: &GaussianChannel,
    w_in: &WignerEvaluable,
    grid: &OutputGrid,
    f: F,
) -> Result<WignerEvaluable> {
    let g = grid.build(f)?;
    if w_in.is_normalized() && grid.halfwidth >= covering_halfwidth(ch, w_in) {
        let (dx, dp) = g.spacing();
        let mass: f64 = g.values().iter().sum::<f64>() * dx * dp;
        if (mass - 1.0).abs() > 2.0 * grid.tolerance {
            return Err(Error::TolExceeded { estimate: (mass - 1.0).abs(), tolerance: 2.0 * grid.tolerance });
        }
    }
    Ok(grid_wigner(g, w_in.is_normalized()))
}

/// The channel output sampled on `grid` by direct quadrature per node.
pub fn convolve(ch: &GaussianChannel, w_in: &WignerEvaluable, grid: &OutputGrid) -> Result<WignerEvaluable> {
    if w_in.n_modes() != 1 {
        return Err(Error::Unsupported("grid outputs are single-mode".to_string()));
    }
    let p = plan(ch, w_in)?;
    convolve_with(ch, w_in, grid, |x, q| eval_plan(&p, w_in, &[x, q]))
}

/// Input families and channels with closed-form outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticFamily {
    ThermalOnMix01 { u: f64, s: f64, c: f64 },
    ThermalOnMix12 { u: f64, s: f64, c: f64 },
    ThermalOnCat { alpha: Vec<f64>, parity: Parity, s: f64, c: f64 },
    ClassmixOnMix01 { u: f64, c: f64 },
    ClassmixOnMix12 { u: f64, c: f64 },
    ClassmixOnCat { alpha: Vec<f64>, parity: Parity, c: f64 },
}

impl AnalyticFamily {
    /// (k2, y) with X = sqrt(k2) I and Y = y I.
    fn scalars(&self) -> Result<(f64, f64)> {
        use AnalyticFamily::*;
        match self {
            ThermalOnMix01 { s, c, .. } | ThermalOnMix12 { s, c, .. } | ThermalOnCat { s, c, .. } => {
                check_thermal(*s, *c)?;
                Ok((1.0 - s, s * c))
            }
            ClassmixOnMix01 { c, .. } | ClassmixOnMix12 { c, .. } | ClassmixOnCat { c, .. } => {
                check_mixing(*c)?;
                Ok((1.0, *c))
            }
        }
    }

    fn scalar_input(&self) -> Result<ScalarInput> {
        use AnalyticFamily::*;
        Ok(match self {
            ThermalOnMix01 { u, .. } | ClassmixOnMix01 { u, .. } => {
                check_unit("u", *u)?;
                ScalarInput::Mix01(*u)
            }
            ThermalOnMix12 { u, .. } | ClassmixOnMix12 { u, .. } => {
                check_unit("u", *u)?;
                ScalarInput::Mix12(*u)
            }
            ThermalOnCat { alpha, parity, .. } | ClassmixOnCat { alpha, parity, .. } => {
                ScalarInput::Cat { alpha: alpha.clone(), parity: *parity }
            }
        })
    }

    pub fn channel(&self) -> Result<GaussianChannel> {
        use AnalyticFamily::*;
        match self {
            ThermalOnMix01 { s, c, .. } | ThermalOnMix12 { s, c, .. } | ThermalOnCat { s, c, .. } => {
                thermal_noise_channel(*s, *c)
            }
            ClassmixOnMix01 { c, .. } | ClassmixOnMix12 { c, .. } | ClassmixOnCat { c, .. } => {
                check_mixing(*c)?;
                classical_mixing_channel(Matrix::identity(2, 2) * *c)
            }
        }
    }

    pub fn input(&self) -> Result<WignerEvaluable> {
        match self.scalar_input()? {
            ScalarInput::Mix01(u) => fock_mixture(u, FockPair::ZeroOne),
            ScalarInput::Mix12(u) => fock_mixture(u, FockPair::OneTwo),
            ScalarInput::Cat { alpha, parity } => cat_wigner(&alpha, parity),
        }
    }
}

/// Closed-form output for one of the analytic families.
pub fn analytic_output(family: &AnalyticFamily) -> Result<WignerEvaluable> {
    let (k2, y) = family.scalars()?;
    scalar_channel_output(family.scalar_input()?, k2, y)
}

/// (k2, y) when X = sqrt(k2) I with sqrt(k2) >= 0 and Y = y I on one mode.
pub fn scalar_form(ch: &GaussianChannel) -> Option<(f64, f64)> {
    if ch.n_modes() != 1 {
        return None;
    }
    let (x, y) = (&ch.x, &ch.y);
    let diag = |m: &Matrix| m[(0, 1)] == 0.0 && m[(1, 0)] == 0.0 && m[(0, 0)] == m[(1, 1)];
    if diag(x) && diag(y) && x[(0, 0)] >= 0.0 {
        Some((x[(0, 0)] * x[(0, 0)], y[(0, 0)]))
    } else {
        None
    }
}

fn scalar_input_of(w: &WignerEvaluable) -> Option<(ScalarInput, f64, f64)> {
    let fock = |p: &[f64]| -> Option<ScalarInput> {
        let mut p = p.to_vec();
        while p.len() > 1 && *p.last().unwrap() == 0.0 {
            p.pop();
        }
        match p.len() {
            1 => Some(ScalarInput::Mix01(0.0)),
            2 => Some(ScalarInput::Mix01(p[1])),
            3 if p[0] == 0.0 => Some(ScalarInput::Mix12(p[2])),
            _ => None,
        }
    };
    match w.kind() {
        WignerKind::Fock(n) if *n <= 2 => {
            let mut p = alloc::vec![0.0; n + 1];
            p[*n] = 1.0;
            fock(&p).map(|i| (i, 1.0, 0.0))
        }
        WignerKind::FockMixture(p) => fock(p).map(|i| (i, 1.0, 0.0)),
        WignerKind::Cat { alpha, parity } if alpha.len() == 2 => {
            Some((ScalarInput::Cat { alpha: alpha.clone(), parity: *parity }, 1.0, 0.0))
        }
        WignerKind::ScalarChannelOutput { input, k2, y } => Some((input.clone(), *k2, *y)),
        _ => None,
    }
}

/// The channel output, in closed form where one exists (Gaussian inputs,
/// scalar channels on Fock-pair mixtures and cats, the identity), otherwise
/// by convolution on a covering grid with the given spacing.
pub fn channel_output(ch: &GaussianChannel, w_in: &WignerEvaluable, spacing: f64) -> Result<WignerEvaluable> {
    check_modes(ch, w_in.n_modes())?;
    if *ch == GaussianChannel::identity(ch.n_modes()) {
        return Ok(w_in.clone());
    }
    if let WignerKind::Gaussian(spec) = w_in.kind() {
        return Ok(gaussian_wigner(&apply_to_gaussian(ch, spec)?));
    }
    if let (Some((k2, y)), Some((input, k2_in, y_in))) = (scalar_form(ch), scalar_input_of(w_in)) {
        return scalar_channel_output(input, k2 * k2_in, y + k2 * y_in);
    }
    convolve(ch, w_in, &OutputGrid::covering(ch, w_in, spacing)?)
}

/// 4N x 4N matrix [[cosh(2 nu) X X^T + Y, sinh(2 nu) X Sigma],
/// [sinh(2 nu) Sigma X^T, cosh(2 nu) I]] with Sigma = diag(I, -I). It has no
/// limit as nu grows.
pub fn choi_covariance(ch: &GaussianChannel, nu: f64) -> Matrix {
    let d = ch.x.nrows();
    let n = d / 2;
    let sigma = Matrix::from_diagonal(&DVector::from_fn(d, |i, _| if i < n { 1.0 } else { -1.0 }));
    let (ch2, sh2) = ((2.0 * nu).cosh(), (2.0 * nu).sinh());
    let xs = &ch.x * &sigma * sh2;
    let mut m = Matrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(&(&ch.x * ch.x.transpose() * ch2 + &ch.y));
    m.view_mut((0, d), (d, d)).copy_from(&xs);
    m.view_mut((d, 0), (d, d)).copy_from(&xs.transpose());
    m.view_mut((d, d), (d, d)).copy_from(&(Matrix::identity(d, d) * ch2));
    m
}

/// How a witness channel was built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessConstruction {
    /// X = 0, Y = gamma_to: replaces any input by the target.
    GaussianTarget,
    /// X = x I, Y = gamma_to - x^2 gamma_from.
    ScalarGaussian { x: f64 },
    /// X = S_to S_from^{-1}, Y = 0 for equal symplectic spectra.
    Unitary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TautologicalWitness {
    pub channel: GaussianChannel,
    pub construction: WitnessConstruction,
}

fn gaussian_spec(w: &WignerEvaluable) -> Option<&GaussianStateSpec> {
    match w.kind() {
        WignerKind::Gaussian(spec) => Some(spec),
        _ => None,
    }
}

/// A Gaussian channel mapping `from` to `to`, from a few constructive cases.
/// `NotFound` says only that none of them applies.
pub fn tautological_witness(from: &WignerEvaluable, to: &WignerEvaluable) -> Result<TautologicalWitness> {
    if from.n_modes() != to.n_modes() {
        return Err(Error::DimensionMismatch(format!("{} modes vs {} modes", from.n_modes(), to.n_modes())));
    }
    let target = gaussian_spec(to).ok_or(Error::NotFound)?;
    let g2 = target.cov.matrix();
    if let Some(source) = gaussian_spec(from) {
        let (s1, sig1) = williamson(&source.cov);
        let (s2, sig2) = williamson(&target.cov);
        let same = sig1.iter().zip(&sig2).all(|(a, b)| (a - b).abs() <= 1e-9 * a.max(*b));
        if same {
            if let Some(s1inv) = s1.try_inverse() {
                let x = &s2 * s1inv;
                let d = x.nrows();
                if let Ok(channel) = GaussianChannel::new(x, Matrix::zeros(d, d)) {
                    return Ok(TautologicalWitness { channel, construction: WitnessConstruction::Unitary });
                }
            }
        }
        let g1 = source.cov.matrix();
        let d = g1.nrows();
        let scalar = |x: f64| GaussianChannel::new(Matrix::identity(d, d) * x, g2 - g1 * (x * x)).ok();
        if let Some(channel) = scalar(1.0) {
            return Ok(TautologicalWitness { channel, construction: WitnessConstruction::ScalarGaussian { x: 1.0 } });
        }
        // Y = gamma_to - x^2 gamma_from stays positive only up to x_max
        let lmin = SymmetricEigen::new(g1.clone()).eigenvalues.min();
        let x_max = (sym_max_eig(g2) / lmin).sqrt();
        let steps = 400;
        for k in (1..=steps).rev() {
            let x = x_max * k as f64 / steps as f64;
            if let Some(channel) = scalar(x) {
                return Ok(TautologicalWitness { channel, construction: WitnessConstruction::ScalarGaussian { x } });
            }
        }
    }
    let d = g2.nrows();
    let channel = GaussianChannel::new(Matrix::zeros(d, d), g2.clone())?;
    Ok(TautologicalWitness { channel, construction: WitnessConstruction::GaussianTarget })
}

/// Distribution of the (S, shift) pairs of a random Gaussian unitary channel.
#[derive(Debug, Clone, PartialEq)]
pub enum SymplecticSampler {
    /// Always the same pair.
    PointMass { s: Matrix, shift: Vec<f64> },
    /// S = I, single-mode shift drawn from N(0, cov I).
    Displacement { cov: f64 },
    /// Single mode: S = R(theta_1) Sq(zeta) R(theta_2) with theta uniform on
    /// [0, 2 pi), zeta uniform on [-zeta_max, zeta_max], and shift components
    /// drawn from N(0, shift_sigma^2).
    RotationSqueeze { zeta_max: f64, shift_sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomGaussianUnitarySpec {
    pub sampler: SymplecticSampler,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitarySample {
    pub s: Matrix,
    pub shift: Vec<f64>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Draws the samples; the same seed always gives the same list.
pub fn draw_samples(spec: &RandomGaussianUnitarySpec) -> Result<Vec<UnitarySample>> {
    if spec.n_samples == 0 {
        return Err(Error::ParamOutOfRange("need at least one sample".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match &spec.sampler {
        SymplecticSampler::PointMass { s, shift } => {
            if !is_symplectic(s, 1e-10) || shift.len() != s.nrows() {
                return Err(Error::ParamOutOfRange("point mass needs a symplectic S and a matching shift".to_string()));
            }
            Ok((0..spec.n_samples).map(|_| UnitarySample { s: s.clone(), shift: shift.clone() }).collect())
        }
        SymplecticSampler::Displacement { cov } => {
            check_mixing(*cov)?;
            let sd = cov.sqrt();
            Ok((0..spec.n_samples)
                .map(|_| {
                    let shift = alloc::vec![sd * normal(&mut rng), sd * normal(&mut rng)];
                    UnitarySample { s: Matrix::identity(2, 2), shift }
                })
                .collect())
        }
        SymplecticSampler::RotationSqueeze { zeta_max, shift_sigma } => {
            if !(*zeta_max >= 0.0 && zeta_max.is_finite() && *shift_sigma >= 0.0 && shift_sigma.is_finite()) {
                return Err(Error::ParamOutOfRange("sampler bounds must be finite and nonnegative".to_string()));
            }
            Ok((0..spec.n_samples)
                .map(|_| {
                    let t1 = rng.random_range(0.0..2.0 * PI);
                    let t2 = rng.random_range(0.0..2.0 * PI);
                    let zeta = if *zeta_max > 0.0 { rng.random_range(-zeta_max..=*zeta_max) } else { 0.0 };
                    let s = rotation(1, 0, t1) * squeezer(1, 0, zeta) * rotation(1, 0, t2);
                    let shift = alloc::vec![shift_sigma * normal(&mut rng), shift_sigma * normal(&mut rng)];
                    UnitarySample { s, shift }
                })
                .collect())
        }
    }
}

/// Sample mean of W_in(S_i r + shift_i) and its standard error.
pub fn average_at(samples: &[UnitarySample], w_in: &WignerEvaluable, r: &[f64]) -> (f64, f64) {
    let d = r.len();
    let mut z = alloc::vec![0.0; d];
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, smp) in samples.iter().enumerate() {
        for i in 0..d {
            z[i] = smp.shift[i] + (0..d).map(|j| smp.s[(i, j)] * r[j]).sum::<f64>();
        }
        let v = w_in.eval(&z);
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let m = samples.len() as f64;
    let var = if samples.len() > 1 { m2.max(0.0) / (m - 1.0) } else { 0.0 };
    (mean, (var / m).sqrt())
}

/// Monte Carlo output of the random Gaussian unitary channel on `grid`, with
/// per-node standard errors.
pub fn apply_random_gaussian_unitary(
    spec: &RandomGaussianUnitarySpec,
    w_in: &WignerEvaluable,
    grid: &OutputGrid,
) -> Result<WignerEvaluable> {
    if w_in.n_modes() != 1 {
        return Err(Error::Unsupported("grid outputs are single-mode".to_string()));
    }
    let samples = draw_samples(spec)?;
    if samples[0].s.nrows() != 2 {
        return Err(Error::DimensionMismatch("sampler and input differ in mode count".to_string()));
    }
    let mut se = Vec::with_capacity(grid.points * grid.points);
    let g = grid.build(|x, p| {
        let (m, e) = average_at(&samples, w_in, &[x, p]);
        se.push(e);
        m
    })?;
    Ok(grid_wigner(g.with_std_err(se)?, w_in.is_normalized()))
}
