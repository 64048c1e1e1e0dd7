//! Scenario files and result records.
//!
//! Scenarios are JSON (schema_version 1, unknown fields rejected, units
//! millimeters and radians). Results are emitted as JSON objects or CSV
//! rows with identical fields.

use crate::cost::{CostWeights, LengthSpec};
use crate::field::{signed_distance, FieldParams, Obstacle};
use crate::geometry::{Aabb, Vec3};
use crate::optimize::{SolveStatus, SolverConfig};
use crate::solver::Scenario;
use crate::spline::ArcSpline;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Optional solver-knob overrides carried by a scenario file.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ori_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anneal_t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooling_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_segment: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pin_end: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub use_grid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_spacing: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, mut config: SolverConfig) -> SolverConfig {
        if let Some(v) = self.ori_tol {
            config.ori_tol = v;
        }
        if let Some(v) = self.anneal_t0 {
            config.anneal_t0 = v;
        }
        if let Some(v) = self.cooling_rate {
            config.cooling_rate = v;
        }
        if let Some(v) = self.samples_per_segment {
            config.samples_per_segment = v;
        }
        if let Some(v) = self.pin_end {
            config.pin_end = v;
        }
        if let Some(v) = self.use_grid {
            config.use_grid = v;
        }
        if let Some(v) = self.grid_spacing {
            config.grid_spacing = Some(v);
        }
        config
    }
}

/// On-disk scenario document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub start: Vec3,
    pub base_orientation: Vec3,
    pub target: Vec3,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_orientation: Option<Vec3>,
    pub n_segments: usize,
    pub length: LengthSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub obstacles: Vec<Obstacle>,
    pub field: FieldParams,
    pub workspace: Aabb,
    #[serde(default)]
    pub weights: CostWeights,
    pub seed: u64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOverrides>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waypoints: Option<Vec<Vec3>>,
}

fn default_max_iterations() -> usize {
    150
}

impl ScenarioFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidScenario(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "unnamed".to_string())
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            start: self.start,
            base_orientation: self.base_orientation,
            target: self.target,
            target_orientation: self.target_orientation,
            n_segments: self.n_segments,
            length_spec: self.length,
            obstacles: self.obstacles.clone(),
            field_params: self.field,
            workspace_bounds: self.workspace,
            weights: self.weights,
            seed: self.seed,
            max_iterations: self.max_iterations,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let base = SolverConfig::default();
        match &self.solver {
            Some(o) => o.apply(base),
            None => base,
        }
    }

    /// Round-trips a scenario through its struct form (used by `gen`).
    pub fn from_scenario(
        scenario: &Scenario,
        name: Option<String>,
        waypoints: Option<Vec<Vec3>>,
    ) -> Self {
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            name,
            description: None,
            start: scenario.start,
            base_orientation: scenario.base_orientation,
            target: scenario.target,
            target_orientation: scenario.target_orientation,
            n_segments: scenario.n_segments,
            length: scenario.length_spec,
            obstacles: scenario.obstacles.clone(),
            field: scenario.field_params,
            workspace: scenario.workspace_bounds,
            weights: scenario.weights,
            seed: scenario.seed,
            max_iterations: scenario.max_iterations,
            solver: None,
            waypoints,
        }
    }
}

/// Flat record of one solve, one per line in CSV output.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub scenario: String,
    pub seed: u64,
    pub outcome: String,
    pub iterations: usize,
    pub wall_time_us: u64,
    pub f_obs: f64,
    pub f_len: f64,
    pub f_ori: f64,
    pub segment_lengths: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ori_err_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_clearance_mm: Option<f64>,
}

impl ResultRecord {
    pub fn new(
        scenario_name: &str,
        scenario: &Scenario,
        spline: &ArcSpline,
        status: &SolveStatus,
        samples_per_segment: usize,
    ) -> Self {
        let ori_err_rad = scenario
            .target_orientation
            .map(|t| crate::cost::orientation_error(spline, t.normalized()));
        let min_clearance_mm = if scenario.obstacles.is_empty() {
            None
        } else {
            Some(
                spline
                    .sample_body(samples_per_segment)
                    .iter()
                    .map(|p| signed_distance(&scenario.obstacles, *p))
                    .fold(f64::INFINITY, f64::min),
            )
        };
        ResultRecord {
            scenario: scenario_name.to_string(),
            seed: scenario.seed,
            outcome: status.outcome.as_str().to_string(),
            iterations: status.iterations,
            wall_time_us: status.wall_time.as_micros() as u64,
            f_obs: status.final_report.f_obs,
            f_len: status.final_report.f_len,
            f_ori: status.final_report.f_ori,
            segment_lengths: status.final_report.per_segment_lengths.clone(),
            ori_err_rad,
            min_clearance_mm,
        }
    }

    /// Zeroes the wall-clock field so outputs are byte-reproducible.
    pub fn stabilized(mut self) -> Self {
        self.wall_time_us = 0;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn csv_header() -> &'static str {
        "scenario,seed,outcome,iterations,wall_time_us,f_obs,f_len,f_ori,segment_lengths,ori_err_rad,min_clearance_mm\n"
    }

    pub fn to_csv_row(&self) -> String {
        let lengths = self
            .segment_lengths
            .iter()
            .map(|l| format!("{l:.6}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{:.9},{:.9},{:.9},{},{},{}\n",
            self.scenario,
            self.seed,
            self.outcome,
            self.iterations,
            self.wall_time_us,
            self.f_obs,
            self.f_len,
            self.f_ori,
            lengths,
            self.ori_err_rad.map_or(String::new(), |v| format!("{v:.9}")),
            self.min_clearance_mm.map_or(String::new(), |v| format!("{v:.6}")),
        )
    }
}

/// CSV of spline samples (one u-sweep polyline) for external plotting.
pub fn spline_samples_csv(spline: &ArcSpline, samples_per_segment: usize) -> String {
    let mut out = String::from("index,x,y,z\n");
    for (i, p) in spline.sample_body(samples_per_segment).iter().enumerate() {
        out.push_str(&format!("{i},{:.9},{:.9},{:.9}\n", p.x, p.y, p.z));
    }
    out
}
