//! Majorization verdicts and the margin curves behind them.

use alloc::string::String;
use alloc::vec::Vec;

/// Outcome of comparing two states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    FirstMajorizes,
    SecondMajorizes,
    Equivalent,
    Incomparable,
}

impl Relation {
    /// The relation seen with the arguments swapped.
    pub fn flip(self) -> Relation {
        match self {
            Relation::FirstMajorizes => Relation::SecondMajorizes,
            Relation::SecondMajorizes => Relation::FirstMajorizes,
            r => r,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::FirstMajorizes => "FirstMajorizes",
            Relation::SecondMajorizes => "SecondMajorizes",
            Relation::Equivalent => "Equivalent",
            Relation::Incomparable => "Incomparable",
        }
    }
}

/// Which criterion produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Proposal {
    PositiveClassic,
    P1,
    P2,
    Quasi,
    DetGamma,
    Dm,
    Tautological,
}

impl Proposal {
    pub fn as_str(self) -> &'static str {
        match self {
            Proposal::PositiveClassic => "positive",
            Proposal::P1 => "p1",
            Proposal::P2 => "p2",
            Proposal::Quasi => "quasi",
            Proposal::DetGamma => "detgamma",
            Proposal::Dm => "dm",
            Proposal::Tautological => "tautological",
        }
    }
}

/// Sampled margins: `margin[i] = first[i] - second[i]` at abscissa `t[i]`,
/// with the tolerance below which the margin counts as zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarginCurve {
    pub t: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub margin: Vec<f64>,
    pub tolerance: Vec<f64>,
}

impl MarginCurve {
    pub fn push(&mut self, t: f64, first: f64, second: f64, tolerance: f64) {
        self.t.push(t);
        self.first.push(first);
        self.second.push(second);
        self.margin.push(first - second);
        self.tolerance.push(tolerance);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Reads the relation off the margins: a strictly positive excursion
    /// (beyond tolerance) favours the first argument, a strictly negative one
    /// the second; both together mean the curves cross.
    pub fn relation(&self) -> Relation {
        let pos = self.margin.iter().zip(&self.tolerance).any(|(m, tol)| *m > *tol);
        let neg = self.margin.iter().zip(&self.tolerance).any(|(m, tol)| *m < -*tol);
        match (pos, neg) {
            (true, true) => Relation::Incomparable,
            (true, false) => Relation::FirstMajorizes,
            (false, true) => Relation::SecondMajorizes,
            (false, false) => Relation::Equivalent,
        }
    }

    /// The same curve with the roles of the two arguments exchanged.
    pub fn swapped(&self) -> MarginCurve {
        MarginCurve {
            t: self.t.clone(),
            first: self.second.clone(),
            second: self.first.clone(),
            margin: self.margin.iter().map(|m| -m).collect(),
            tolerance: self.tolerance.clone(),
        }
    }
}

/// A verdict with its numerical evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationVerdict {
    pub relation: Relation,
    pub proposal: Proposal,
    pub evidence: MarginCurve,
    pub min_margin: f64,
    /// Human-readable description of the abscissa grid.
    pub t_grid: String,
    /// True when the verdict is backed by a rigorous bound (density-matrix
    /// prefixes) rather than only by sampled margins.
    pub certified: bool,
    pub notes: Vec<String>,
}

impl MajorizationVerdict {
    pub fn from_curve(proposal: Proposal, evidence: MarginCurve, t_grid: String) -> Self {
        let relation = evidence.relation();
        let min_margin = evidence.min_margin();
        MajorizationVerdict { relation, proposal, evidence, min_margin, t_grid, certified: false, notes: Vec::new() }
    }
}
