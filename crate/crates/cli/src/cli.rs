//! Argument parsing and the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wigmaj_core::channels::{apply_to_gaussian, scalar_form, tautological_witness, OutputGrid, WitnessConstruction};
use wigmaj_core::gaussian_algebra::{
    det_gamma_verdict, dm_majorization_verdict, dm_spectrum_prefix, single_particle_energies, GaussianStateSpec,
};
use wigmaj_core::majorization::{
    check_positive_majorization, proposal1_check, proposal2_check, quasi_pair_check, DEFAULT_LAMBDAS,
};
use wigmaj_core::negativity::{
    fock_negativity_scan, log_negativity, renyi_channel_inequality, wigner_renyi, InequalityOrder, RenyiIndex,
};
use wigmaj_core::phase_space::{integrate, scalar_channel_output, GridFunction, Transform, WignerEvaluable};
use wigmaj_core::{MajorizationVerdict, MarginCurve, Proposal, Relation};

use crate::io::{self, grid_table, versioned, Channel, ChannelSpec, StateSpec, Table};
use crate::profile::Settings;
use crate::{corpus, figures, par};

/// Exit status for an ordered (or equivalent) verdict and for success.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCOMPARABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wigmaj", version, about = "Majorization of Wigner functions in phase space")]
pub struct Cli {
    /// Tolerance profile (default, strict, loose); overrides WIGMAJ_TOLERANCE_PROFILE.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a state at points or on a grid.
    State {
        #[command(subcommand)]
        command: StateCommand,
    },
    /// Compare two states under a majorization criterion.
    Majorize(MajorizeArgs),
    /// Act with a Gaussian channel on a state.
    Channel {
        #[command(subcommand)]
        command: ChannelCommand,
    },
    /// Wigner logarithmic negativity of a state, or a Fock-state scan.
    Negativity(NegativityArgs),
    /// Wigner Renyi entropy, or the channel inequality with --channel.
    Renyi(RenyiArgs),
    /// Write the CSV bundle and manifest for a figure.
    Figure(FigureArgs),
    /// Run the regression corpus.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum StateCommand {
    Eval(StateEvalArgs),
}

#[derive(Debug, Args)]
pub struct StateEvalArgs {
    pub state: PathBuf,
    /// Phase-space point as comma-separated coordinates (x1, p1, ..., xN, pN).
    #[arg(long = "at", value_name = "POINT")]
    pub at: Vec<String>,
    /// Write W on a square grid to this CSV (single-mode states).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 6.0)]
    pub halfwidth: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProposalArg {
    Positive,
    P1,
    P2,
    Quasi,
    Detgamma,
    Dm,
    Tautological,
}

impl ProposalArg {
    pub fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, false).map_err(|_| anyhow!("unknown proposal '{s}'"))
    }
}

#[derive(Debug, Args)]
pub struct MajorizeArgs {
    #[arg(long, value_enum)]
    pub proposal: ProposalArg,
    pub first: PathBuf,
    pub second: PathBuf,
    /// Write the margin curve to this CSV.
    #[arg(long)]
    pub margins: Option<PathBuf>,
    /// Explicit thresholds, comma-separated (offsets u >= 0 for quasi).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_grid: Option<Vec<f64>>,
    /// Regulator schedule for p2, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Density-matrix prefix length for dm.
    #[arg(long, default_value_t = 64)]
    pub prefix: usize,
}

/// Options shared by the command and the corpus runner.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorizeOptions {
    pub t_grid: Option<Vec<f64>>,
    pub lambdas: Vec<f64>,
    pub prefix: usize,
}

impl Default for MajorizeOptions {
    fn default() -> Self {
        MajorizeOptions { t_grid: None, lambdas: DEFAULT_LAMBDAS.to_vec(), prefix: 64 }
    }
}

#[derive(Debug, Subcommand)]
pub enum ChannelCommand {
    Apply(ApplyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Gaussian input: gamma -> X gamma X^T + Y.
    Covariance,
    /// Kernel convolution on the output grid.
    Convolve,
    /// Closed form for scalar channels on Fock-pair mixtures and cats.
    Analytic,
    /// Sampled random Gaussian unitary channel.
    MonteCarlo,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::Covariance => "covariance",
            Method::Convolve => "convolve",
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Output: a grid CSV, or a state JSON for --method covariance.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 6.0)]
    pub halfwidth: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// With --method analytic, also convolve and report the sup-norm difference.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Args)]
pub struct NegativityArgs {
    #[arg(required_unless_present = "fock_scan", conflicts_with = "fock_scan")]
    pub state: Option<PathBuf>,
    /// Scan Fock states n = 1..N and fit ln I_0 against ln n.
    #[arg(long, value_name = "N")]
    pub fock_scan: Option<usize>,
    /// Fit window (largest n values) for the scan.
    #[arg(long, default_value_t = 15, requires = "fock_scan")]
    pub window: usize,
    /// CSV for the scan.
    #[arg(long, requires = "fock_scan")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenyiArgs {
    /// Renyi index 2p/(2q-1), e.g. 2, 4/3, 8/5; with --channel, 1 selects the negativity inequality.
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub channel: Option<PathBuf>,
    pub state: PathBuf,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// fig1, fig2L, fig2R, fig3L, fig3R, fig4L, fig4R or all.
    pub figure: String,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    Run(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus JSON; the built-in corpus when omitted.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn print_json(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

/// Runs a parsed command and returns the exit status.
pub fn run(cli: Cli) -> Result<i32> {
    let settings = Settings::resolve(cli.profile.as_deref())?;
    match cli.command {
        Command::State { command: StateCommand::Eval(a) } => state_eval(&a, &settings),
        Command::Majorize(a) => cmd_majorize(&a, &settings),
        Command::Channel { command: ChannelCommand::Apply(a) } => channel_apply(&a, &settings),
        Command::Negativity(a) => cmd_negativity(&a, &settings),
        Command::Renyi(a) => cmd_renyi(&a, &settings),
        Command::Figure(a) => {
            let manifests = figures::run(&a.figure, &a.out_dir, &settings)?;
            let passed = manifests.iter().all(|m| m.passed);
            let summary: Vec<Value> = manifests
                .iter()
                .map(|m| json!({"figure_id": m.figure_id, "passed": m.passed, "csv_files": m.csv_names()}))
                .collect();
            print_json(&json!({"schema_version": io::SCHEMA_VERSION, "figures": summary}))?;
            Ok(if passed { EXIT_OK } else { EXIT_ERROR })
        }
        Command::Corpus { command: CorpusCommand::Run(a) } => {
            let spec = match &a.corpus {
                Some(p) => corpus::CorpusSpec::load(p)?,
                None => corpus::CorpusSpec::builtin()?,
            };
            let report = corpus::run(&spec, &settings)?;
            let doc = versioned(&report);
            io::write_json(&a.out, &doc)?;
            print_json(&json!({
                "schema_version": io::SCHEMA_VERSION,
                "verdicts": report.verdicts.len(),
                "first_majorizes": report.first_majorizes,
                "violations": report.violations.len(),
                "errors": report.errors.len(),
            }))?;
            Ok(if report.violations.is_empty() { EXIT_OK } else { EXIT_ERROR })
        }
    }
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("bad coordinate '{c}' in point '{s}'")))
        .collect()
}

fn state_eval(a: &StateEvalArgs, s: &Settings) -> Result<i32> {
    let spec = StateSpec::load(&a.state)?;
    let w = spec.build(&s.tolerance)?;
    let mut values = Vec::with_capacity(a.at.len());
    for p in &a.at {
        let r = parse_point(p)?;
        if r.len() != 2 * w.n_modes() {
            bail!("point '{p}' has {} coordinates, the state has {} modes", r.len(), w.n_modes());
        }
        values.push(w.eval(&r));
    }
    let integral = integrate(&w, Transform::Identity, &s.quadrature)?;
    let mut doc = json!({
        "schema_version": io::SCHEMA_VERSION,
        "n_modes": w.n_modes(),
        "points": a.at,
        "values": values,
        "integral": integral.value,
        "integral_error": integral.error,
    });
    if let Some(out) = &a.out {
        if w.n_modes() != 1 {
            bail!("grid output needs a single-mode state");
        }
        let grid = OutputGrid::new(a.halfwidth, a.points)?;
        let g = sample(&w, &grid)?;
        grid_table(&g).write(out)?;
        doc["grid"] = grid_json(&grid);
    }
    print_json(&doc)?;
    Ok(EXIT_OK)
}

fn sample(w: &WignerEvaluable, grid: &OutputGrid) -> Result<GridFunction> {
    let (h, n) = (grid.halfwidth, grid.points);
    Ok(GridFunction::from_fn(-h, h, n, -h, h, n, |x, p| w.eval(&[x, p]))?)
}

fn grid_json(grid: &OutputGrid) -> Value {
    json!({"halfwidth": grid.halfwidth, "points": grid.points})
}

fn gaussian_of(spec: &StateSpec, s: &Settings, which: &str) -> Result<GaussianStateSpec> {
    spec.gaussian(&s.tolerance).ok_or_else(|| anyhow!("the {which} state is not Gaussian"))?
}

fn witness_verdict(first: &WignerEvaluable, second: &WignerEvaluable) -> Result<MajorizationVerdict> {
    let attempt = |from, to, relation: Relation| -> Result<Option<MajorizationVerdict>> {
        match tautological_witness(from, to) {
            Ok(w) => {
                let how = match w.construction {
                    WitnessConstruction::GaussianTarget => "replacement channel X = 0, Y = gamma_target".to_string(),
                    WitnessConstruction::ScalarGaussian { x } => {
                        format!("scalar channel X = {x} I")
                    }
                    WitnessConstruction::Unitary => "Gaussian unitary".to_string(),
                };
                Ok(Some(MajorizationVerdict {
                    relation,
                    proposal: Proposal::Tautological,
                    evidence: MarginCurve::default(),
                    min_margin: 0.0,
                    t_grid: "none: witness channel".to_string(),
                    certified: true,
                    notes: vec![format!("witness: {how}")],
                }))
            }
            Err(wigmaj_core::Error::NotFound) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    if let Some(v) = attempt(first, second, Relation::FirstMajorizes)? {
        return Ok(v);
    }
    if let Some(v) = attempt(second, first, Relation::SecondMajorizes)? {
        return Ok(v);
    }
    bail!("no witness channel found in either direction (this does not rule one out)")
}

/// One verdict for a pair of parsed states.
pub fn majorize(
    proposal: ProposalArg,
    first: &StateSpec,
    second: &StateSpec,
    opts: &MajorizeOptions,
    s: &Settings,
) -> Result<MajorizationVerdict> {
    let cfg = s.engine();
    let t = opts.t_grid.as_deref();
    match proposal {
        ProposalArg::Detgamma => {
            let (a, b) = (gaussian_of(first, s, "first")?, gaussian_of(second, s, "second")?);
            Ok(det_gamma_verdict(&a.cov, &b.cov, &s.tolerance)?)
        }
        ProposalArg::Dm => {
            let (a, b) = (gaussian_of(first, s, "first")?, gaussian_of(second, s, "second")?);
            let pa = dm_spectrum_prefix(&single_particle_energies(a.cov.spectrum())?, opts.prefix, &s.tolerance)?;
            let pb = dm_spectrum_prefix(&single_particle_energies(b.cov.spectrum())?, opts.prefix, &s.tolerance)?;
            Ok(dm_majorization_verdict(&pa, &pb, &s.tolerance)?)
        }
        _ => {
            let (a, b) = (first.build(&s.tolerance)?, second.build(&s.tolerance)?);
            Ok(match proposal {
                ProposalArg::Positive => check_positive_majorization(&a, &b, t, &cfg)?,
                ProposalArg::P1 => proposal1_check(&a, &b, t, &cfg)?,
                ProposalArg::P2 => proposal2_check(&a, &b, t, &opts.lambdas, &cfg)?,
                ProposalArg::Quasi => quasi_pair_check(&a, &b, t, &cfg)?,
                ProposalArg::Tautological => witness_verdict(&a, &b)?,
                ProposalArg::Detgamma | ProposalArg::Dm => unreachable!(),
            })
        }
    }
}

pub fn exit_code(r: Relation) -> i32 {
    if r == Relation::Incomparable {
        EXIT_INCOMPARABLE
    } else {
        EXIT_OK
    }
}

pub fn verdict_json(v: &MajorizationVerdict, s: &Settings) -> Value {
    json!({
        "proposal": v.proposal.as_str(),
        "relation": v.relation.as_str(),
        "min_margin": v.min_margin,
        "certified": v.certified,
        "t_grid": v.t_grid,
        "points": v.evidence.len(),
        "notes": v.notes,
        "tolerance_profile": s.profile,
    })
}

/// Margin curve as t, I_t_first, I_t_second, margin, tolerance.
pub fn margin_table(c: &MarginCurve) -> Table {
    let mut t = Table::new(&["t", "I_t_first", "I_t_second", "margin", "tolerance"]);
    for i in 0..c.len() {
        t.push(vec![c.t[i], c.first[i], c.second[i], c.margin[i], c.tolerance[i]]);
    }
    t
}

fn cmd_majorize(a: &MajorizeArgs, s: &Settings) -> Result<i32> {
    let first = StateSpec::load(&a.first)?;
    let second = StateSpec::load(&a.second)?;
    let opts = MajorizeOptions {
        t_grid: a.t_grid.clone(),
        lambdas: a.lambdas.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec()),
        prefix: a.prefix,
    };
    let v = majorize(a.proposal, &first, &second, &opts, s)?;
    if let Some(path) = &a.margins {
        margin_table(&v.evidence).write(path)?;
    }
    let mut doc = verdict_json(&v, s);
    doc["schema_version"] = json!(io::SCHEMA_VERSION);
    doc["first"] = json!(a.first);
    doc["second"] = json!(a.second);
    doc["tolerance"] = s.tolerance_json();
    if a.proposal == ProposalArg::P2 {
        doc["lambdas"] = json!(opts.lambdas);
    }
    if a.proposal == ProposalArg::Dm {
        doc["prefix"] = json!(opts.prefix);
    }
    print_json(&doc)?;
    Ok(exit_code(v.relation))
}

fn single_channel(spec: &ChannelSpec, s: &Settings) -> Result<wigmaj_core::channels::GaussianChannel> {
    match spec.build(&s.tolerance)? {
        Channel::Gaussian(ch) => Ok(ch),
        Channel::RandomUnitary(_) => {
            bail!("a random Gaussian unitary channel needs --method monte-carlo")
        }
    }
}

fn sup_norm(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn grid_of(w: &WignerEvaluable) -> Result<&GridFunction> {
    match w.kind() {
        wigmaj_core::phase_space::WignerKind::GridFunction(g) => Ok(g),
        _ => bail!("expected a sampled output"),
    }
}

fn mass(g: &GridFunction) -> f64 {
    let (dx, dp) = g.spacing();
    g.values().iter().sum::<f64>() * dx * dp
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn channel_apply(a: &ApplyArgs, s: &Settings) -> Result<i32> {
    let ch_spec = ChannelSpec::load(&a.channel)?;
    let st_spec = StateSpec::load(&a.state)?;
    let mut doc = json!({
        "schema_version": io::SCHEMA_VERSION,
        "method": a.method.as_str(),
        "channel": a.channel,
        "state": a.state,
        "out": a.out,
        "tolerance_profile": s.profile,
    });
    if a.method == Method::Covariance {
        let ch = single_channel(&ch_spec, s)?;
        let g = gaussian_of(&st_spec, s, "input").context("--method covariance needs a Gaussian input")?;
        let out = apply_to_gaussian(&ch, &g)?;
        let spec = StateSpec::Gaussian { cov: io::rows(out.cov.matrix()), mean: Some(out.mean.clone()) };
        io::write_json(&a.out, &versioned(&spec))?;
        doc["det_x"] = json!(ch.det_x());
        print_json(&doc)?;
        return Ok(EXIT_OK);
    }
    let grid = OutputGrid::new(a.halfwidth, a.points)?;
    let w_in = st_spec.build(&s.tolerance)?;
    let out = match a.method {
        Method::Convolve => {
            let ch = single_channel(&ch_spec, s)?;
            doc["det_x"] = json!(ch.det_x());
            grid_of(&par::convolve(&ch, &w_in, &grid)?)?.clone()
        }
        Method::Analytic => {
            let ch = single_channel(&ch_spec, s)?;
            let Some(input) = st_spec.scalar_input() else {
                bail!("--method analytic supports fock n <= 2, fock_mixture and single-mode cat inputs");
            };
            let Some((k2, y)) = scalar_form(&ch) else {
                bail!("--method analytic needs a single-mode channel with X = k I and Y = y I");
            };
            let w_out = scalar_channel_output(input, k2, y)?;
            let g = sample(&w_out, &grid)?;
            if a.compare {
                let c = par::convolve(&ch, &w_in, &grid)?;
                doc["sup_norm_vs_convolve"] = json!(sup_norm(&g, grid_of(&c)?));
            }
            doc["det_x"] = json!(ch.det_x());
            g
        }
        Method::MonteCarlo => {
            let Channel::RandomUnitary(spec) = ch_spec.build(&s.tolerance)? else {
                bail!("--method monte-carlo needs a random_gaussian_unitary channel");
            };
            doc["samples"] = json!(spec.n_samples);
            doc["seed"] = json!(spec.seed);
            grid_of(&par::random_unitary(&spec, &w_in, &grid)?)?.clone()
        }
        Method::Covariance => unreachable!(),
    };
    grid_table(&out).write(&a.out)?;
    doc["grid"] = grid_json(&grid);
    doc["grid_mass"] = json!(mass(&out));
    io::write_json(&meta_path(&a.out), &doc)?;
    print_json(&doc)?;
    Ok(EXIT_OK)
}

fn cmd_negativity(a: &NegativityArgs, s: &Settings) -> Result<i32> {
    if let Some(n_max) = a.fock_scan {
        let scan = fock_negativity_scan(n_max, a.window, &s.quadrature)?;
        if let Some(out) = &a.out {
            let mut t = Table::new(&["n", "log_I0", "error"]);
            for i in 0..scan.n.len() {
                t.push(vec![scan.n[i] as f64, scan.log_i0[i], scan.errors[i]]);
            }
            t.write(out)?;
        }
        print_json(&json!({
            "schema_version": io::SCHEMA_VERSION,
            "n_max": n_max,
            "window": scan.window,
            "fit": {"slope": scan.fit.slope, "intercept": scan.fit.intercept},
            "log_I0": scan.log_i0,
        }))?;
        return Ok(EXIT_OK);
    }
    let path = a.state.as_ref().expect("clap requires a state without --fock-scan");
    let w = StateSpec::load(path)?.build(&s.tolerance)?;
    let r = log_negativity(&w, &s.quadrature)?;
    print_json(&json!({
        "schema_version": io::SCHEMA_VERSION,
        "log_negativity": r.log_negativity,
        "abs_integral": r.abs_integral,
        "error_estimate": r.error_estimate,
    }))?;
    Ok(EXIT_OK)
}

fn cmd_renyi(a: &RenyiArgs, s: &Settings) -> Result<i32> {
    let w = StateSpec::load(&a.state)?.build(&s.tolerance)?;
    let Some(ch_path) = &a.channel else {
        let idx: RenyiIndex = a.alpha.parse()?;
        let e = wigner_renyi(&w, idx, &s.quadrature)?;
        print_json(&json!({
            "schema_version": io::SCHEMA_VERSION,
            "alpha": idx.to_string(),
            "alpha_value": idx.alpha(),
            "entropy": e.value,
            "error": e.error,
        }))?;
        return Ok(EXIT_OK);
    };
    let order = if a.alpha.trim() == "1" { InequalityOrder::One } else { InequalityOrder::Renyi(a.alpha.parse()?) };
    let ch = single_channel(&ChannelSpec::load(ch_path)?, s)?;
    let r = renyi_channel_inequality(&w, &ch, order, &s.quadrature)?;
    let alpha = match order {
        InequalityOrder::One => "1".to_string(),
        InequalityOrder::Renyi(idx) => idx.to_string(),
    };
    print_json(&json!({
        "schema_version": io::SCHEMA_VERSION,
        "alpha": alpha,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "slack": r.slack,
        "raw_diff": r.raw_diff,
        "error": r.error,
        "det_x": ch.det_x(),
        "holds": r.slack >= -(s.tolerance.margin_factor * r.error + s.tolerance.margin_floor),
    }))?;
    Ok(EXIT_OK)
}
