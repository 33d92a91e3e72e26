//! Covariance matrices, symplectic spectra, determinant-based majorization,
//! density-matrix spectra and thermal harmonic chains.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{Cholesky, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::symplectic::{symplectic_form, Matrix};
use crate::tolerance::ToleranceConfig;
use crate::verdict::{MajorizationVerdict, MarginCurve, Proposal, Relation};

/// Symplectic eigenvalues, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub sigmas: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn n_modes(&self) -> usize {
        self.sigmas.len()
    }

    /// det gamma = prod sigma_j^2.
    pub fn det(&self) -> f64 {
        self.sigmas.iter().map(|s| s * s).product()
    }
}

/// A validated 2N x 2N covariance matrix in (q_1..q_N, p_1..p_N) ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: Matrix,
    spectrum: SymplecticSpectrum,
    det: f64,
}

impl CovarianceMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        Self::with_tolerance(m, &ToleranceConfig::DEFAULT)
    }

    pub fn with_tolerance(m: Matrix, tol: &ToleranceConfig) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be 2N x 2N, got {} x {}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::ParamOutOfRange("covariance has non-finite entries".to_string()));
        }
        let asym = (&m - m.transpose()).amax();
        if asym > tol.symmetry * m.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let m = (&m + m.transpose()) * 0.5;
        let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
        let spectrum = spectrum_from_cholesky(&chol);
        let smallest = *spectrum.sigmas.last().unwrap();
        if smallest < 0.5 - tol.uncertainty {
            return Err(Error::UncertaintyViolation(smallest));
        }
        let det = chol.l().diagonal().iter().map(|d| d * d).product();
        Ok(CovarianceMatrix { m, spectrum, det })
    }

    /// Williamson-diagonal covariance diag(sigma_1..sigma_N, sigma_1..sigma_N).
    pub fn from_sigmas(sigmas: &[f64]) -> Result<Self> {
        let n = sigmas.len();
        let d: Vec<f64> = (0..2 * n).map(|i| sigmas[i % n]).collect();
        Self::new(Matrix::from_diagonal(&DVector::from_vec(d)))
    }

    /// Two-mode Williamson form with sigma_1 = a v, sigma_2 = a / v.
    pub fn two_mode(a: f64, v: f64) -> Result<Self> {
        Self::from_sigmas(&[a * v, a / v])
    }

    /// sigma * I on N modes.
    pub fn thermal(n_modes: usize, sigma: f64) -> Result<Self> {
        Self::new(Matrix::identity(2 * n_modes, 2 * n_modes) * sigma)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(n_modes, 0.5).expect("vacuum is valid")
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn spectrum(&self) -> &SymplecticSpectrum {
        &self.spectrum
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn inverse(&self) -> Matrix {
        Cholesky::new(self.m.clone()).expect("validated covariance").inverse()
    }
}

/// Mean vector plus covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStateSpec {
    pub mean: Vec<f64>,
    pub cov: CovarianceMatrix,
}

impl GaussianStateSpec {
    pub fn new(mean: Vec<f64>, cov: CovarianceMatrix) -> Result<Self> {
        if mean.len() != 2 * cov.n_modes() {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {}, expected {}",
                mean.len(),
                2 * cov.n_modes()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::ParamOutOfRange("mean has non-finite entries".to_string()));
        }
        Ok(GaussianStateSpec { mean, cov })
    }

    pub fn centered(cov: CovarianceMatrix) -> Self {
        let mean = alloc::vec![0.0; 2 * cov.n_modes()];
        GaussianStateSpec { mean, cov }
    }

    pub fn n_modes(&self) -> usize {
        self.cov.n_modes()
    }
}

/// Symplectic eigenvalues of a symmetric positive-definite matrix.
///
/// With gamma = L L^T, the antisymmetric A = L^T J L is similar to J gamma, so
/// the eigenvalues of A^T A are sigma_j^2, each twice.
pub fn symplectic_spectrum(m: &Matrix) -> Result<SymplecticSpectrum> {
    if !m.is_square() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::DimensionMismatch("expected a 2N x 2N matrix".to_string()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let chol = Cholesky::new(sym).ok_or(Error::NotPositiveDefinite)?;
    Ok(spectrum_from_cholesky(&chol))
}

fn spectrum_from_cholesky(chol: &Cholesky<f64, nalgebra::Dyn>) -> SymplecticSpectrum {
    let l = chol.l();
    let n = l.nrows() / 2;
    let a = l.transpose() * symplectic_form(n) * &l;
    let ata = a.transpose() * &a;
    let mut ev: Vec<f64> =
        SymmetricEigen::new((&ata + ata.transpose()) * 0.5).eigenvalues.iter().map(|x| x.max(0.0)).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    let sigmas = (0..n).map(|k| (0.5 * (ev[2 * k] + ev[2 * k + 1])).sqrt()).collect();
    SymplecticSpectrum { sigmas }
}

/// Williamson decomposition gamma = S diag(sigma, sigma) S^T with S symplectic
/// and sigma sorted descending.
///
/// With A = L^T J L, an orthogonal O brings A to [[0, D], [-D, 0]]; then
/// S = L O diag(D, D)^{-1/2}. The columns of O are pairs (v, -A v / d) taken
/// from the eigenvectors of A^T A.
pub fn williamson(cov: &CovarianceMatrix) -> (Matrix, Vec<f64>) {
    let n = cov.n_modes();
    let l = Cholesky::new(cov.matrix().clone()).expect("validated covariance").l();
    let a = l.transpose() * symplectic_form(n) * &l;
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new((&ata + ata.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut vs = Vec::new();
    let mut ws = Vec::new();
    let mut sigmas = Vec::new();
    for &k in &order {
        if vs.len() == n {
            break;
        }
        let mut v = eig.eigenvectors.column(k).clone_owned();
        // two passes of Gram-Schmidt against the pairs already chosen
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let len = v.norm();
        if len < 0.5 {
            continue;
        }
        v /= len;
        let av = &a * &v;
        let d = av.norm();
        let mut w = -av / d;
        for b in &basis {
            let c = b.dot(&w);
            w -= b * c;
        }
        w -= &v * v.dot(&w);
        w /= w.norm();
        basis.push(v.clone());
        basis.push(w.clone());
        vs.push(v);
        ws.push(w);
        sigmas.push(d);
    }
    let mut o = Matrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        o.set_column(k, &vs[k]);
        o.set_column(n + k, &ws[k]);
    }
    let scale: Vec<f64> = (0..2 * n).map(|i| 1.0 / sigmas[i % n].sqrt()).collect();
    let s = l * o * Matrix::from_diagonal(&DVector::from_vec(scale));
    (s, sigmas)
}

/// Wigner majorization between Gaussian states: the smaller determinant wins.
pub fn det_gamma_verdict(
    cov1: &CovarianceMatrix,
    cov2: &CovarianceMatrix,
    tol: &ToleranceConfig,
) -> Result<MajorizationVerdict> {
    if cov1.n_modes() != cov2.n_modes() {
        return Err(Error::DimensionMismatch(format!("{} modes vs {} modes", cov1.n_modes(), cov2.n_modes())));
    }
    let (d1, d2) = (cov1.det(), cov2.det());
    let tie = tol.det_tie * d1.max(d2);
    let relation = if (d1 - d2).abs() <= tie {
        Relation::Equivalent
    } else if d1 < d2 {
        Relation::FirstMajorizes
    } else {
        Relation::SecondMajorizes
    };
    // margin > 0 favours the first argument
    let mut evidence = MarginCurve::default();
    evidence.push(0.0, d2, d1, tie);
    Ok(MajorizationVerdict {
        relation,
        proposal: Proposal::DetGamma,
        min_margin: d2 - d1,
        evidence,
        t_grid: "single point: det gamma_2 - det gamma_1".to_string(),
        certified: true,
        notes: Vec::new(),
    })
}

/// 1 / (2^N sqrt(det gamma)).
pub fn purity(cov: &CovarianceMatrix) -> f64 {
    cov.spectrum().sigmas.iter().map(|s| 0.5 / s).product()
}

/// N ln 2 + (1/2) ln det gamma = sum_j ln(2 sigma_j).
pub fn renyi2(cov: &CovarianceMatrix) -> f64 {
    cov.spectrum().sigmas.iter().map(|s| (2.0 * s).ln()).sum()
}

/// Thermal state of a periodic harmonic chain with N sites.
pub fn harmonic_chain_spectrum(n: usize, omega: f64, beta: f64) -> Result<SymplecticSpectrum> {
    if n == 0 {
        return Err(Error::ParamOutOfRange("chain needs at least one site".to_string()));
    }
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::ParamOutOfRange(format!("omega = {omega}")));
    }
    if !(beta > 0.0) {
        return Err(Error::ParamOutOfRange(format!("beta = {beta}")));
    }
    // the k = N mode has sin(pi) = 0, so omega = 0 always gives a zero mode
    if omega == 0.0 {
        return Err(Error::ZeroMode);
    }
    let mut sigmas: Vec<f64> = (1..=n)
        .map(|k| {
            let s = (PI * k as f64 / n as f64).sin();
            let big_omega = (omega * omega + 4.0 * s * s).sqrt();
            let x = -(-beta * big_omega).exp_m1();
            0.5 * (2.0 - x) / x
        })
        .collect();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    Ok(SymplecticSpectrum { sigmas })
}

/// epsilon_k = ln((sigma_k + 1/2) / (sigma_k - 1/2)).
pub fn single_particle_energies(spectrum: &SymplecticSpectrum) -> Result<Vec<f64>> {
    spectrum
        .sigmas
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let gap = s - 0.5;
            if gap <= 0.0 {
                Err(Error::PureMode(k))
            } else {
                Ok((1.0 / gap).ln_1p())
            }
        })
        .collect()
}

/// Inverse of [`single_particle_energies`]: sigma = coth(epsilon / 2) / 2.
pub fn sigmas_from_energies(energies: &[f64]) -> Vec<f64> {
    energies
        .iter()
        .map(|e| {
            let x = -(-e).exp_m1();
            0.5 * (2.0 - x) / x
        })
        .collect()
}

/// Leading eigenvalues of a Gaussian density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMSpectrumPrefix {
    pub eigenvalues: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Upper bound on the mass not contained in `eigenvalues`.
    pub tail_bound: f64,
}

/// Default cap on the enumeration box.
pub const DEFAULT_MAX_BOX: usize = 4_000_000;

/// Top `m` density-matrix eigenvalues for single-particle energies `energies`.
pub fn dm_spectrum_prefix(energies: &[f64], m: usize, tol: &ToleranceConfig) -> Result<DMSpectrumPrefix> {
    dm_spectrum_prefix_with(energies, m, tol.dm_box_tail, DEFAULT_MAX_BOX)
}

/// As [`dm_spectrum_prefix`] with an explicit box tail target and box cap.
pub fn dm_spectrum_prefix_with(energies: &[f64], m: usize, box_tail: f64, max_box: usize) -> Result<DMSpectrumPrefix> {
    if m == 0 {
        return Err(Error::ParamOutOfRange("prefix length must be positive".to_string()));
    }
    if energies.is_empty() {
        return Err(Error::ParamOutOfRange("no modes".to_string()));
    }
    if let Some(e) = energies.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("energy {e} must be positive and finite")));
    }
    let n = energies.len();
    let q: Vec<f64> = energies.iter().map(|e| (-e).exp()).collect();
    let norm: Vec<f64> = energies.iter().map(|e| -(-e).exp_m1()).collect();
    // box extent per mode: q^(B+1) <= box_tail / n
    let target = (box_tail / n as f64).ln();
    let mut extent: Vec<usize> = energies.iter().map(|e| ((-target / e).ceil() as usize).max(1)).collect();
    loop {
        let size = extent.iter().try_fold(1usize, |acc, b| acc.checked_mul(*b));
        let size = match size {
            Some(s) if s <= max_box => s,
            _ => {
                let omitted: f64 = q.iter().zip(&extent).map(|(qk, b)| qk.powi(*b as i32)).sum();
                return Err(Error::BoxTooSmall { tail: omitted });
            }
        };
        let mut values = Vec::with_capacity(size);
        values.push(norm.iter().product::<f64>());
        for k in 0..n {
            let len = values.len();
            for j in 1..extent[k] {
                let f = q[k].powi(j as i32);
                for i in 0..len {
                    let v = values[i] * f;
                    values.push(v);
                }
            }
        }
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        // largest eigenvalue outside the box and the omitted mass
        let largest_out = (0..n).map(|k| values[0] * q[k].powi(extent[k] as i32)).fold(0.0, f64::max);
        let omitted: f64 = q.iter().zip(&extent).map(|(qk, b)| qk.powi(*b as i32)).sum();
        if values.len() < m || values[m - 1] < largest_out {
            // grow the box until the top m are provably inside
            for b in extent.iter_mut() {
                *b = (*b * 3 / 2).max(*b + 1);
            }
            if values.len() < m {
                let need = (m as f64).powf(1.0 / n as f64).ceil() as usize + 1;
                for b in extent.iter_mut() {
                    *b = (*b).max(need);
                }
            }
            continue;
        }
        let eigenvalues: Vec<f64> = values[..m].to_vec();
        let mut partial_sums = Vec::with_capacity(m);
        let mut acc = Neumaier::default();
        for v in &eigenvalues {
            acc.add(*v);
            partial_sums.push(acc.sum());
        }
        let mut rest = Neumaier::default();
        for v in values[m..].iter().rev() {
            rest.add(*v);
        }
        let tail_bound = (rest.sum() + omitted).min(1.0);
        return Ok(DMSpectrumPrefix { eigenvalues, partial_sums, tail_bound });
    }
}

/// Compares partial sums of two prefixes.
pub fn dm_majorization_verdict(
    p1: &DMSpectrumPrefix,
    p2: &DMSpectrumPrefix,
    tol: &ToleranceConfig,
) -> Result<MajorizationVerdict> {
    let m = p1.partial_sums.len().min(p2.partial_sums.len());
    if m == 0 {
        return Err(Error::ParamOutOfRange("empty prefix".to_string()));
    }
    let mut evidence = MarginCurve::default();
    for i in 0..m {
        evidence.push((i + 1) as f64, p1.partial_sums[i], p2.partial_sums[i], tol.dm_margin);
    }
    let shape = evidence.relation();
    let min_margin = evidence.min_margin();
    let mut verdict = MajorizationVerdict {
        relation: shape,
        proposal: Proposal::Dm,
        evidence,
        min_margin,
        t_grid: format!("partial sums m = 1..{m}"),
        certified: true,
        notes: Vec::new(),
    };
    let t1 = p1.tail_bound;
    let t2 = p2.tail_bound;
    match shape {
        Relation::Incomparable => Ok(verdict),
        // beyond m, T1 - T2 >= T1_m - 1 = -tail_1
        Relation::FirstMajorizes if t1 <= tol.dm_certify => Ok(verdict),
        Relation::SecondMajorizes if t2 <= tol.dm_certify => Ok(verdict),
        Relation::Equivalent if t1 <= tol.dm_certify && t2 <= tol.dm_certify => Ok(verdict),
        _ => {
            verdict.certified = false;
            Err(Error::Inconclusive(format!(
                "prefix of length {m} shows {} but omitted masses are {t1:e} and {t2:e}",
                shape.as_str()
            )))
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
