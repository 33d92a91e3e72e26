//! Central numerical tolerances.

/// Every tolerance used for verdicts and validity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Absolute tolerance on covariance symmetry.
    pub symmetry: f64,
    /// Slack below 1/2 allowed for symplectic eigenvalues.
    pub uncertainty: f64,
    /// Relative tolerance for determinant ties.
    pub det_tie: f64,
    /// Eigenvalue floor for the complete-positivity check.
    pub cp_floor: f64,
    /// `det X >= 1 - majorizing_det` makes a channel Wigner-majorizing.
    pub majorizing_det: f64,
    /// Omitted mass allowed when enumerating density-matrix spectra.
    pub dm_box_tail: f64,
    /// Partial-sum differences below this are treated as zero.
    pub dm_margin: f64,
    /// Largest omitted prefix mass that still certifies a one-sided verdict.
    pub dm_certify: f64,
    /// A margin is zero when below `margin_factor` times its error estimate.
    pub margin_factor: f64,
    /// Absolute floor for margin tolerances.
    pub margin_floor: f64,
    /// Relative floor for margin tolerances (scaled by the larger functional value).
    pub margin_rel: f64,
    /// Sup difference between successive regulators that counts as collapse.
    pub collapse: f64,
    /// Normalization tolerance for Wigner functions.
    pub normalization: f64,
    /// Number of Monte Carlo standard errors a margin must clear.
    pub mc_sigmas: f64,
    /// Negativity gaps must exceed this many combined errors.
    pub negativity_gap_factor: f64,
}

impl ToleranceConfig {
    pub const DEFAULT: ToleranceConfig = ToleranceConfig {
        symmetry: 1e-12,
        uncertainty: 1e-10,
        det_tie: 1e-10,
        cp_floor: 1e-10,
        majorizing_det: 1e-12,
        dm_box_tail: 1e-12,
        dm_margin: 1e-12,
        dm_certify: 1e-9,
        margin_factor: 5.0,
        margin_floor: 1e-12,
        margin_rel: 1e-10,
        collapse: 1e-3,
        normalization: 1e-8,
        mc_sigmas: 3.0,
        negativity_gap_factor: 3.0,
    };

    pub const STRICT: ToleranceConfig = ToleranceConfig {
        margin_factor: 10.0,
        margin_floor: 1e-13,
        collapse: 1e-5,
        dm_certify: 1e-12,
        ..Self::DEFAULT
    };

    pub const LOOSE: ToleranceConfig = ToleranceConfig {
        symmetry: 1e-9,
        uncertainty: 1e-8,
        det_tie: 1e-8,
        cp_floor: 1e-8,
        margin_factor: 3.0,
        margin_floor: 1e-9,
        margin_rel: 1e-8,
        collapse: 1e-2,
        normalization: 1e-6,
        dm_certify: 1e-6,
        ..Self::DEFAULT
    };

    /// Looks up a named profile: `default`, `strict` or `loose`.
    pub fn profile(name: &str) -> Option<ToleranceConfig> {
        match name {
            "default" => Some(Self::DEFAULT),
            "strict" => Some(Self::STRICT),
            "loose" => Some(Self::LOOSE),
            _ => None,
        }
    }

    /// Tolerance applied to a margin whose error estimate is `err` and whose
    /// compared values have magnitude up to `scale`.
    pub fn margin_tolerance(&self, err: f64, scale: f64) -> f64 {
        let t = self.margin_factor * err;
        let floor = self.margin_floor + self.margin_rel * scale.abs();
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self::DEFAULT
    }
}
