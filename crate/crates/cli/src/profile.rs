//! Tolerance profile selection.

use anyhow::{bail, Result};
use serde_json::{json, Value};
use wigmaj_core::majorization::EngineConfig;
use wigmaj_core::phase_space::QuadratureConfig;
use wigmaj_core::ToleranceConfig;

pub const PROFILE_ENV: &str = "WIGMAJ_TOLERANCE_PROFILE";

/// The active tolerance profile and the configs derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub profile: String,
    pub tolerance: ToleranceConfig,
    pub quadrature: QuadratureConfig,
}

impl Settings {
    pub fn named(name: &str) -> Result<Self> {
        let Some(tolerance) = ToleranceConfig::profile(name) else {
            bail!("unknown tolerance profile '{name}' (expected default, strict or loose)");
        };
        Ok(Settings { profile: name.to_string(), tolerance, quadrature: QuadratureConfig::default() })
    }

    /// `flag` wins over the environment; `default` when neither is set.
    pub fn resolve(flag: Option<&str>) -> Result<Self> {
        match flag {
            Some(name) => Self::named(name),
            None => match std::env::var(PROFILE_ENV) {
                Ok(name) if !name.is_empty() => Self::named(&name),
                _ => Self::named("default"),
            },
        }
    }

    pub fn engine(&self) -> EngineConfig {
        EngineConfig { quadrature: self.quadrature, tolerance: self.tolerance }
    }

    pub fn tolerance_json(&self) -> Value {
        let t = &self.tolerance;
        json!({
            "symmetry": t.symmetry,
            "uncertainty": t.uncertainty,
            "det_tie": t.det_tie,
            "cp_floor": t.cp_floor,
            "majorizing_det": t.majorizing_det,
            "dm_box_tail": t.dm_box_tail,
            "dm_margin": t.dm_margin,
            "dm_certify": t.dm_certify,
            "margin_factor": t.margin_factor,
            "margin_floor": t.margin_floor,
            "margin_rel": t.margin_rel,
            "collapse": t.collapse,
            "normalization": t.normalization,
            "mc_sigmas": t.mc_sigmas,
            "negativity_gap_factor": t.negativity_gap_factor,
        })
    }

    pub fn quadrature_json(&self) -> Value {
        let q = &self.quadrature;
        json!({
            "radial_nodes": q.radial_nodes,
            "radial_cutoff": q.radial_cutoff,
            "grid_halfwidth": q.grid_halfwidth,
            "grid_points_per_axis": q.grid_points_per_axis,
            "tolerance": q.tolerance,
        })
    }
}
