//! Versioned JSON documents for states and channels, and CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use wigmaj_core::channels::{
    amplification_channel, classical_mixing_channel, thermal_noise_channel, GaussianChannel, RandomGaussianUnitarySpec,
    SymplecticSampler,
};
use wigmaj_core::gaussian_algebra::{CovarianceMatrix, GaussianStateSpec};
use wigmaj_core::phase_space::{
    box_state_wigner, cat_wigner, fock_mixture, fock_mixture_weights, fock_wigner, gaussian_mixture, gaussian_wigner,
    grid_wigner, FockPair, GridFunction, Parity, ScalarInput, WignerEvaluable,
};
use wigmaj_core::symplectic::Matrix;
use wigmaj_core::ToleranceConfig;

pub const SCHEMA_VERSION: u64 = 1;

/// Rejects documents without the current `schema_version`.
pub fn check_version(doc: &Value, what: &str) -> Result<()> {
    match doc.get("schema_version") {
        None => bail!("{what} document has no schema_version (expected {SCHEMA_VERSION})"),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => bail!("unsupported {what} schema_version {v} (expected {SCHEMA_VERSION})"),
    }
}

fn read_doc(path: &Path, what: &str) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{} is not valid JSON for the {what} schema: {e}", path.display()))?;
    check_version(&doc, what)?;
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairName {
    #[serde(rename = "01")]
    ZeroOne,
    #[serde(rename = "12")]
    OneTwo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityName {
    Even,
    Odd,
}

impl From<ParityName> for Parity {
    fn from(p: ParityName) -> Parity {
        match p {
            ParityName::Even => Parity::Even,
            ParityName::Odd => Parity::Odd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub cov: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// A state description; `type` selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateSpec {
    Gaussian {
        cov: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<Vec<f64>>,
    },
    Vacuum {
        #[serde(default = "one")]
        n_modes: usize,
    },
    Thermal {
        sigma: f64,
        #[serde(default = "one")]
        n_modes: usize,
    },
    /// Two-mode state with symplectic eigenvalues a v and a / v.
    TwoMode {
        a: f64,
        v: f64,
    },
    Fock {
        n: usize,
    },
    /// (1 - u)|0><0| + u|1><1| (pair "01") or the same on |1>, |2> (pair "12").
    FockMixture {
        u: f64,
        pair: PairName,
    },
    FockWeights {
        weights: Vec<f64>,
    },
    Cat {
        alpha: Vec<f64>,
        parity: ParityName,
    },
    GaussianMixture {
        weights: Vec<f64>,
        components: Vec<Component>,
    },
    /// A sampled single-mode function, read from a CSV with x, p, w columns.
    Grid {
        csv: PathBuf,
        #[serde(default = "yes")]
        normalized: bool,
    },
    Box,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u64,
    #[serde(flatten)]
    inner: &'a T,
}

/// Serializes `inner` with the schema version in front.
pub fn versioned<T: Serialize>(inner: &T) -> Value {
    serde_json::to_value(Versioned { schema_version: SCHEMA_VERSION, inner }).expect("serializable document")
}

pub fn matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        bail!("matrix must be square and nonempty");
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn gaussian_spec(cov: &[Vec<f64>], mean: Option<&Vec<f64>>, tol: &ToleranceConfig) -> Result<GaussianStateSpec> {
    let cov = CovarianceMatrix::with_tolerance(matrix(cov)?, tol)?;
    Ok(match mean {
        Some(m) => GaussianStateSpec::new(m.clone(), cov)?,
        None => GaussianStateSpec::centered(cov),
    })
}

impl StateSpec {
    /// Parses a state document, resolving grid CSV paths against `base`.
    pub fn from_value(doc: Value, base: &Path) -> Result<Self> {
        let mut spec: StateSpec =
            serde_json::from_value(doc).map_err(|e| anyhow!("state does not match the schema: {e}"))?;
        if let StateSpec::Grid { csv, .. } = &mut spec {
            if csv.is_relative() {
                *csv = base.join(&*csv);
            }
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc = read_doc(path, "state")?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_value(doc, base).with_context(|| format!("in {}", path.display()))
    }

    /// The Gaussian description, when the family is Gaussian.
    pub fn gaussian(&self, tol: &ToleranceConfig) -> Option<Result<GaussianStateSpec>> {
        let cov =
            |m: Result<CovarianceMatrix, wigmaj_core::Error>| m.map(GaussianStateSpec::centered).map_err(Into::into);
        match self {
            StateSpec::Gaussian { cov, mean } => Some(gaussian_spec(cov, mean.as_ref(), tol)),
            StateSpec::Vacuum { n_modes } => Some(Ok(GaussianStateSpec::centered(CovarianceMatrix::vacuum(*n_modes)))),
            StateSpec::Thermal { sigma, n_modes } => Some(cov(CovarianceMatrix::thermal(*n_modes, *sigma))),
            StateSpec::TwoMode { a, v } => Some(cov(CovarianceMatrix::two_mode(*a, *v))),
            _ => None,
        }
    }

    pub fn build(&self, tol: &ToleranceConfig) -> Result<WignerEvaluable> {
        if let Some(g) = self.gaussian(tol) {
            return Ok(gaussian_wigner(&g?));
        }
        Ok(match self {
            StateSpec::Fock { n } => fock_wigner(*n),
            StateSpec::FockMixture { u, pair } => fock_mixture(*u, fock_pair(*pair))?,
            StateSpec::FockWeights { weights } => fock_mixture_weights(weights)?,
            StateSpec::Cat { alpha, parity } => cat_wigner(alpha, (*parity).into())?,
            StateSpec::GaussianMixture { weights, components } => {
                let specs = components
                    .iter()
                    .map(|c| gaussian_spec(&c.cov, c.mean.as_ref(), tol))
                    .collect::<Result<Vec<_>>>()?;
                gaussian_mixture(weights, &specs)?
            }
            StateSpec::Grid { csv, normalized } => grid_wigner(read_grid(csv)?, *normalized),
            StateSpec::Box => box_state_wigner(),
            _ => unreachable!("Gaussian families handled above"),
        })
    }

    /// The closed-form channel input this state corresponds to, if any.
    pub fn scalar_input(&self) -> Option<ScalarInput> {
        match self {
            StateSpec::Fock { n: 0 } => Some(ScalarInput::Mix01(0.0)),
            StateSpec::Fock { n: 1 } => Some(ScalarInput::Mix01(1.0)),
            StateSpec::Fock { n: 2 } => Some(ScalarInput::Mix12(1.0)),
            StateSpec::FockMixture { u, pair: PairName::ZeroOne } => Some(ScalarInput::Mix01(*u)),
            StateSpec::FockMixture { u, pair: PairName::OneTwo } => Some(ScalarInput::Mix12(*u)),
            StateSpec::Cat { alpha, parity } if alpha.len() == 2 => {
                Some(ScalarInput::Cat { alpha: alpha.clone(), parity: (*parity).into() })
            }
            _ => None,
        }
    }
}

fn fock_pair(p: PairName) -> FockPair {
    match p {
        PairName::ZeroOne => FockPair::ZeroOne,
        PairName::OneTwo => FockPair::OneTwo,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    ThermalNoise,
    Amplification,
    ClassicalMixing,
    Raw,
    RandomGaussianUnitary,
}

/// A channel description: `type` plus either `params` or raw `X`, `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(rename = "type")]
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThermalParams {
    s: f64,
    c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplificationParams {
    eta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixingParams {
    #[serde(rename = "Y")]
    y: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SamplerParams {
    Displacement { cov: f64 },
    RotationSqueeze { zeta_max: f64, shift_sigma: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomUnitaryParams {
    sampler: SamplerParams,
    samples: usize,
    seed: u64,
}

/// A parsed channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Gaussian(GaussianChannel),
    RandomUnitary(RandomGaussianUnitarySpec),
}

fn params<T: for<'de> Deserialize<'de>>(spec: &ChannelSpec) -> Result<T> {
    serde_json::from_value(spec.params.clone())
        .map_err(|e| anyhow!("{:?} channel params do not match the schema: {e}", spec.kind))
}

impl ChannelSpec {
    pub fn from_value(doc: Value) -> Result<Self> {
        serde_json::from_value(doc).map_err(|e| anyhow!("channel does not match the schema: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc = read_doc(path, "channel")?;
        Self::from_value(doc).with_context(|| format!("in {}", path.display()))
    }

    pub fn build(&self, tol: &ToleranceConfig) -> Result<Channel> {
        let gaussian = |ch: wigmaj_core::Result<GaussianChannel>| -> Result<Channel> {
            let ch = ch?;
            // re-run the validity check with the active profile's floor
            Ok(Channel::Gaussian(GaussianChannel::with_tolerance(ch.x().clone(), ch.y().clone(), tol)?))
        };
        match self.kind {
            ChannelKind::ThermalNoise => {
                let p: ThermalParams = params(self)?;
                gaussian(thermal_noise_channel(p.s, p.c))
            }
            ChannelKind::Amplification => {
                let p: AmplificationParams = params(self)?;
                gaussian(amplification_channel(p.eta))
            }
            ChannelKind::ClassicalMixing => {
                let y = match (&self.y, self.params.is_null()) {
                    (Some(y), true) => y.clone(),
                    (None, false) => params::<MixingParams>(self)?.y,
                    _ => bail!("classical_mixing needs Y either in params or at top level"),
                };
                gaussian(classical_mixing_channel(matrix(&y)?))
            }
            ChannelKind::Raw => {
                let (Some(x), Some(y)) = (&self.x, &self.y) else {
                    bail!("raw channel needs both X and Y");
                };
                Ok(Channel::Gaussian(GaussianChannel::with_tolerance(matrix(x)?, matrix(y)?, tol)?))
            }
            ChannelKind::RandomGaussianUnitary => {
                let p: RandomUnitaryParams = params(self)?;
                let sampler = match p.sampler {
                    SamplerParams::Displacement { cov } => SymplecticSampler::Displacement { cov },
                    SamplerParams::RotationSqueeze { zeta_max, shift_sigma } => {
                        SymplecticSampler::RotationSqueeze { zeta_max, shift_sigma }
                    }
                };
                Ok(Channel::RandomUnitary(RandomGaussianUnitarySpec { sampler, n_samples: p.samples, seed: p.seed }))
            }
        }
    }
}

/// A CSV table held in memory; numbers are written in shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The grid as an x, p, W table (plus W_std_err for Monte Carlo outputs).
pub fn grid_table(g: &GridFunction) -> Table {
    let se = g.std_err();
    let mut t = Table::new(if se.is_some() { &["x", "p", "w", "w_std_err"] } else { &["x", "p", "w"] });
    for ix in 0..g.nx() {
        for ip in 0..g.np() {
            let k = ix * g.np() + ip;
            let mut row = vec![g.x(ix), g.p(ip), g.values()[k]];
            if let Some(se) = se {
                row.push(se[k]);
            }
            t.push(row);
        }
    }
    t
}

/// Reads a grid written by [`grid_table`].
pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(ix), Some(ip), Some(iw)) = (col("x"), col("p"), col("w")) else {
        bail!("{} needs x, p and w columns", path.display());
    };
    let ise = col("w_std_err");
    let (mut xs, mut ps, mut ws, mut se) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().with_context(|| format!("bad number '{}' in {}", &rec[i], path.display()))
        };
        xs.push(num(ix)?);
        ps.push(num(ip)?);
        ws.push(num(iw)?);
        if let Some(i) = ise {
            se.push(num(i)?);
        }
    }
    let distinct = |v: &[f64]| {
        let mut d = v.to_vec();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    };
    let (dx, dp) = (distinct(&xs), distinct(&ps));
    let (nx, np) = (dx.len(), dp.len());
    if nx * np != ws.len() {
        bail!("{} is not a full tensor grid", path.display());
    }
    for (k, (x, p)) in xs.iter().zip(&ps).enumerate() {
        if *x != dx[k / np] || *p != dp[k % np] {
            bail!("{} rows must run over p fastest, then x", path.display());
        }
    }
    let g = GridFunction::new((dx[0], dx[nx - 1], nx), (dp[0], dp[np - 1], np), ws)?;
    Ok(if ise.is_some() { g.with_std_err(se)? } else { g })
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}
