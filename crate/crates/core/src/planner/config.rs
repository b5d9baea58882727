use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::renderer::DEFAULT_SPLAT_RADIUS;

/// Planner parameters. Serialized with the short keys `N`, `K`, `theta`, `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// The loop runs `max_steps + 1` times.
    #[serde(rename = "N")]
    pub max_steps: usize,
    #[serde(rename = "K")]
    pub candidates_per_step: usize,
    pub theta: f64,
    #[serde(rename = "L")]
    pub frames_per_segment: usize,
    pub neighborhood_deg: f64,
    pub grid_azimuth: usize,
    pub grid_elevation: usize,
    pub splat_radius_px: u32,
    pub voxel_rho: f64,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            max_steps: 3,
            candidates_per_step: 5,
            theta: 0.6,
            frames_per_segment: 25,
            neighborhood_deg: 30.0,
            grid_azimuth: 12,
            grid_elevation: 4,
            splat_radius_px: DEFAULT_SPLAT_RADIUS,
            voxel_rho: 0.0,
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::InvalidConfig(m.to_string()));
        if self.candidates_per_step == 0 {
            return bad("K must be at least 1");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad("theta must lie in (0, 1)");
        }
        if self.frames_per_segment < 2 {
            return bad("L must be at least 2");
        }
        if !(self.neighborhood_deg > 0.0 && self.neighborhood_deg.is_finite()) {
            return bad("neighborhood_deg must be positive");
        }
        if self.grid_azimuth == 0 || self.grid_elevation == 0 {
            return bad("grid dimensions must be positive");
        }
        if !(self.voxel_rho >= 0.0 && self.voxel_rho.is_finite()) {
            return bad("voxel_rho must be non-negative");
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, PlanError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| PlanError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
