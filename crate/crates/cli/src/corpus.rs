//! Regression corpus: runs verdicts over named states and checks that every
//! ordered verdict agrees with the negativity order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use wigmaj_core::channels::channel_output;
use wigmaj_core::negativity::log_negativity;
use wigmaj_core::phase_space::WignerEvaluable;
use wigmaj_core::Relation;

use crate::cli::{majorize, MajorizeOptions, ProposalArg};
use crate::io::{check_version, Channel, ChannelSpec, StateSpec};
use crate::profile::Settings;

const BUILTIN: &str = include_str!("../corpus/default.json");

/// Grid spacing for channel outputs that need a convolution.
const OUTPUT_SPACING: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub first: String,
    pub second: String,
    pub proposals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub state: String,
    pub channel: Value,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub schema_version: u64,
    pub states: BTreeMap<String, Value>,
    /// Proposals run on every pair of states with the same mode count.
    #[serde(default)]
    pub all_pairs: Vec<String>,
    #[serde(default)]
    pub comparisons: Vec<PairEntry>,
    #[serde(default)]
    pub channels: Vec<ChannelEntry>,
    #[serde(skip)]
    pub base: PathBuf,
}

impl CorpusSpec {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let doc: Value =
            serde_json::from_str(text).map_err(|e| anyhow!("corpus is not valid JSON for the schema: {e}"))?;
        check_version(&doc, "corpus")?;
        let mut spec: CorpusSpec =
            serde_json::from_value(doc).map_err(|e| anyhow!("corpus does not match the schema: {e}"))?;
        spec.base = base.to_path_buf();
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn builtin() -> Result<Self> {
        Self::parse(BUILTIN, Path::new("."))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub first: String,
    pub second: String,
    pub proposal: String,
    pub relation: String,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub majorizing: String,
    pub majorized: String,
    pub proposal: String,
    pub n_majorizing: f64,
    pub n_majorized: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub first: String,
    pub second: String,
    pub proposal: String,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityRecord {
    pub log_negativity: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorpusReport {
    pub tolerance_profile: String,
    pub verdicts: Vec<VerdictRecord>,
    /// Verdicts with an order in either direction.
    pub first_majorizes: usize,
    pub violations: Vec<Violation>,
    pub errors: Vec<ErrorRecord>,
    pub negativities: BTreeMap<String, NegativityRecord>,
}

struct Entry {
    spec: Option<StateSpec>,
    w: WignerEvaluable,
}

fn applicable(p: ProposalArg, a: &Entry, b: &Entry, s: &Settings) -> bool {
    if a.w.n_modes() != b.w.n_modes() {
        return false;
    }
    let gaussian = |e: &Entry| e.spec.as_ref().is_some_and(|sp| sp.gaussian(&s.tolerance).is_some());
    match p {
        ProposalArg::Detgamma | ProposalArg::Dm => gaussian(a) && gaussian(b),
        ProposalArg::Positive => a.w.is_nonnegative() && b.w.is_nonnegative(),
        ProposalArg::P1 | ProposalArg::P2 | ProposalArg::Quasi => a.w.finite_negativity() && b.w.finite_negativity(),
        ProposalArg::Tautological => gaussian(a) || gaussian(b),
    }
}

impl CorpusReport {
    fn record(&mut self, first: &str, second: &str, proposal: &str, relation: Relation, min_margin: f64, s: &Settings) {
        self.verdicts.push(VerdictRecord {
            first: first.to_string(),
            second: second.to_string(),
            proposal: proposal.to_string(),
            relation: relation.as_str().to_string(),
            min_margin,
        });
        let (major, minor) = match relation {
            Relation::FirstMajorizes => (first, second),
            Relation::SecondMajorizes => (second, first),
            _ => return,
        };
        self.first_majorizes += 1;
        let (Some(a), Some(b)) = (self.negativities.get(major), self.negativities.get(minor)) else {
            return;
        };
        let allowed = a.error + b.error + s.tolerance.normalization;
        if a.log_negativity < b.log_negativity - allowed {
            self.violations.push(Violation {
                majorizing: major.to_string(),
                majorized: minor.to_string(),
                proposal: proposal.to_string(),
                n_majorizing: a.log_negativity,
                n_majorized: b.log_negativity,
                allowed,
            });
        }
    }

    fn error(&mut self, first: &str, second: &str, proposal: &str, e: anyhow::Error) {
        self.errors.push(ErrorRecord {
            first: first.to_string(),
            second: second.to_string(),
            proposal: proposal.to_string(),
            error: format!("{e:#}"),
        });
    }

    fn negativity(&mut self, name: &str, w: &WignerEvaluable, s: &Settings) {
        if !w.finite_negativity() {
            return;
        }
        match log_negativity(w, &s.quadrature) {
            Ok(r) => {
                self.negativities.insert(
                    name.to_string(),
                    NegativityRecord { log_negativity: r.log_negativity, error: r.error_estimate },
                );
            }
            Err(e) => self.error(name, name, "negativity", e.into()),
        }
    }

    fn compare(&mut self, p: ProposalArg, names: (&str, &str), entries: (&Entry, &Entry), s: &Settings) {
        let label = p.to_possible_value().expect("no skipped variants").get_name().to_string();
        let (Some(a), Some(b)) = (&entries.0.spec, &entries.1.spec) else {
            return;
        };
        match majorize(p, a, b, &MajorizeOptions::default(), s) {
            Ok(v) => self.record(names.0, names.1, &label, v.relation, v.min_margin, s),
            Err(e) => self.error(names.0, names.1, &label, e),
        }
    }
}

/// Runs the whole corpus. Individual failures are reported, not fatal.
pub fn run(spec: &CorpusSpec, s: &Settings) -> Result<CorpusReport> {
    let mut report = CorpusReport { tolerance_profile: s.profile.clone(), ..Default::default() };
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (name, doc) in &spec.states {
        let st = StateSpec::from_value(doc.clone(), &spec.base).with_context(|| format!("corpus state '{name}'"))?;
        let w = st.build(&s.tolerance).with_context(|| format!("corpus state '{name}'"))?;
        report.negativity(name, &w, s);
        entries.insert(name.clone(), Entry { spec: Some(st), w });
    }
    let all: Vec<ProposalArg> = spec.all_pairs.iter().map(|p| ProposalArg::parse(p)).collect::<Result<_>>()?;
    let names: Vec<&String> = entries.keys().collect();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let (a, b) = (&entries[names[i]], &entries[names[j]]);
            for &p in &all {
                if applicable(p, a, b, s) {
                    report.compare(p, (names[i], names[j]), (a, b), s);
                }
            }
        }
    }
    for c in &spec.comparisons {
        let get = |n: &str| entries.get(n).ok_or_else(|| anyhow!("comparison names unknown state '{n}'"));
        let (a, b) = (get(&c.first)?, get(&c.second)?);
        for p in &c.proposals {
            report.compare(ProposalArg::parse(p)?, (&c.first, &c.second), (a, b), s);
        }
    }
    for (k, c) in spec.channels.iter().enumerate() {
        let input = entries.get(&c.state).ok_or_else(|| anyhow!("channel entry names unknown state '{}'", c.state))?;
        let out_name = format!("{}>channel{k}", c.state);
        let mut doc = c.channel.clone();
        if let Some(obj) = doc.as_object_mut() {
            obj.remove("schema_version");
        }
        let ch = match ChannelSpec::from_value(doc).and_then(|spec| spec.build(&s.tolerance)) {
            Ok(Channel::Gaussian(ch)) => ch,
            Ok(Channel::RandomUnitary(_)) => {
                report.error(&c.state, &out_name, "channel", anyhow!("random unitary channels are not supported here"));
                continue;
            }
            Err(e) => {
                report.error(&c.state, &out_name, "channel", e);
                continue;
            }
        };
        let w_out = match channel_output(&ch, &input.w, OUTPUT_SPACING) {
            Ok(w) => w,
            Err(e) => {
                report.error(&c.state, &out_name, "channel", e.into());
                continue;
            }
        };
        report.negativity(&out_name, &w_out, s);
        // the channel itself witnesses the tautological order
        report.record(&c.state, &out_name, "tautological", Relation::FirstMajorizes, 0.0, s);
        let cfg = s.engine();
        match wigmaj_core::majorization::proposal1_check(&input.w, &w_out, None, &cfg) {
            Ok(v) => report.record(&c.state, &out_name, "p1", v.relation, v.min_margin, s),
            Err(e) => report.error(&c.state, &out_name, "p1", e.into()),
        }
        entries.insert(out_name, Entry { spec: None, w: w_out });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_corpus_parses() {
        let c = CorpusSpec::builtin().unwrap();
        assert!(c.states.len() >= 10);
        let s = Settings::named("default").unwrap();
        for (name, doc) in &c.states {
            let st = StateSpec::from_value(doc.clone(), Path::new(".")).unwrap();
            st.build(&s.tolerance).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r = CorpusSpec::parse(r#"{"schema_version": 1, "states": {}, "pairs": []}"#, Path::new("."));
        assert!(r.is_err());
    }
}
