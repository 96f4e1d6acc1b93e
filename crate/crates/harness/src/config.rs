//! Scenario configuration: the TOML schema, built-in presets and validation.
//!
//! A config plus a master seed fully determines an experiment. Unknown keys
//! are rejected at parse time; `validate` checks the semantic constraints
//! and names the offending key in its diagnostics. `to_toml_string` echoes
//! the fully resolved configuration with every default materialised.

use std::path::Path;

use serde::{Deserialize, Serialize};

use searchtrack_core::filter::{BirthDensity, BirthModel, FilterParams};
use searchtrack_core::grid::{GridGeometry, OccupancyGrid};
use searchtrack_core::metrics::OspaParams;
use searchtrack_core::model::{Action, Bounds, Kinematics, Label, ObjectScript};
use searchtrack_core::planner::{PlanMode, PlannerConfig, SimConfig};
use searchtrack_core::sensing::{CvModel, SensorKind, SensorModel};

use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub area: AreaConfig,
    pub time: TimeConfig,
    pub agents: AgentsConfig,
    pub grid: GridConfig,
    pub sensor: SensorConfig,
    pub motion: MotionConfig,
    pub filter: FilterConfig,
    pub planner: PlannerSection,
    pub ospa: OspaConfig,
    pub objects: Vec<ObjectConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaConfig {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    /// Number of simulated steps.
    pub steps: usize,
    /// Sampling interval T0, seconds.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentsConfig {
    pub count: usize,
    pub start: [f64; 2],
    /// Horizontal speed v_a, m/s.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKindConfig {
    RangeBearing,
    Vision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub kind: SensorKindConfig,
    pub detection_range: f64,
    pub falloff: f64,
    pub p_d_max: f64,
    pub clutter_rate: f64,
    pub sigma0_bearing: f64,
    pub beta_bearing: f64,
    pub sigma0_range: f64,
    pub beta_range: f64,
    pub sigma0_xy: f64,
    pub beta_xy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionConfig {
    pub sigma_cv: f64,
    /// Sample ground truth with process noise instead of exact constant
    /// velocity.
    pub truth_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub birth_prob: f64,
    pub survival_prob: f64,
    pub particles: usize,
    pub prune_threshold: f64,
    pub birth_mean: [f64; 4],
    /// Per-component variances of the birth density.
    pub birth_var: [f64; 4],
    pub extraction_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerAlgorithm {
    Greedy,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSection {
    pub horizon: usize,
    /// Algorithm used for the combined objective.
    pub mode: PlannerAlgorithm,
    pub replan_every: usize,
    pub brute_force_cap: u64,
    pub grid_predict_in_rollout: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OspaConfig {
    pub order: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub label: u64,
    pub birth: usize,
    pub death: usize,
    /// `[p_x, v_x, p_y, v_y]`.
    pub init: [f64; 4],
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            area: AreaConfig::default(),
            time: TimeConfig::default(),
            agents: AgentsConfig::default(),
            grid: GridConfig::default(),
            sensor: SensorConfig::default(),
            motion: MotionConfig::default(),
            filter: FilterConfig::default(),
            planner: PlannerSection::default(),
            ospa: OspaConfig::default(),
            objects: Vec::new(),
        }
    }
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            min: [0.0, 0.0],
            max: [1000.0, 1000.0],
        }
    }
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            steps: 200,
            dt: 1.0,
        }
    }
}

impl Default for AgentsConfig {
    fn default() -> Self {
        Self {
            count: 3,
            start: [500.0, 100.0],
            speed: 10.0,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            rows: 100,
            cols: 100,
        }
    }
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            kind: SensorKindConfig::RangeBearing,
            detection_range: 200.0,
            falloff: 0.008,
            p_d_max: 0.98,
            clutter_rate: 0.2,
            sigma0_bearing: 2.0 * std::f64::consts::PI / 180.0,
            beta_bearing: 1.7e-5,
            sigma0_range: 10.0,
            beta_range: 5e-3,
            sigma0_xy: 10.0,
            beta_xy: 1e-2,
        }
    }
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            sigma_cv: 1.0,
            truth_noise: false,
        }
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            birth_prob: 0.005,
            survival_prob: 0.99,
            particles: 1000,
            prune_threshold: 1e-3,
            birth_mean: [500.0, 0.0, 500.0, 0.0],
            birth_var: [250_000.0, 10.0, 250_000.0, 10.0],
            extraction_threshold: 0.5,
        }
    }
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            horizon: 3,
            mode: PlannerAlgorithm::Greedy,
            replan_every: 1,
            brute_force_cap: 1_000_000,
            grid_predict_in_rollout: false,
        }
    }
}

impl Default for OspaConfig {
    fn default() -> Self {
        Self {
            order: 1.0,
            cutoff: 100.0,
        }
    }
}

impl ScenarioConfig {
    /// Built-in presets `scenario1..scenario4`, or `None` for an unknown
    /// name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "scenario1" => Some(Self::scenario1()),
            "scenario2" => Some(Self::scenario2()),
            "scenario3" => Some(Self::scenario3()),
            "scenario4" => Some(Self::scenario4()),
            _ => None,
        }
    }

    /// Three fast objects in two groups travelling the same direction.
    pub fn scenario1() -> Self {
        Self {
            name: "scenario1".into(),
            objects: vec![
                object(1, 1, 201, [100.0, 4.0, 700.0, 0.5]),
                object(2, 1, 201, [120.0, 4.0, 760.0, 0.4]),
                object(3, 1, 201, [150.0, 4.0, 300.0, 0.8]),
            ],
            ..Self::default()
        }
    }

    /// Four slow objects; two groups enter the scene late, away from the
    /// agents.
    pub fn scenario2() -> Self {
        Self {
            name: "scenario2".into(),
            objects: vec![
                object(1, 1, 201, [400.0, 1.0, 250.0, 1.5]),
                object(2, 1, 201, [600.0, -1.0, 250.0, 1.5]),
                object(3, 70, 201, [850.0, -1.5, 850.0, -1.0]),
                object(4, 90, 201, [120.0, 1.5, 820.0, -1.0]),
            ],
            ..Self::default()
        }
    }

    /// Two fast groups moving in opposing directions; the far group is born
    /// late, outside detection range, and never nears the other group's
    /// path.
    pub fn scenario3() -> Self {
        Self {
            name: "scenario3".into(),
            objects: vec![
                object(1, 1, 201, [350.0, 3.0, 250.0, 0.3]),
                object(2, 1, 201, [320.0, 3.0, 190.0, 0.4]),
                object(3, 50, 201, [850.0, -3.0, 820.0, 0.2]),
                object(4, 55, 201, [820.0, -3.0, 880.0, 0.3]),
            ],
            ..Self::default()
        }
    }

    /// Twenty fast objects in five groups radiating outward over a
    /// 2 km × 2 km area.
    pub fn scenario4() -> Self {
        let mut objects = Vec::new();
        for group in 0..5u64 {
            let angle =
                2.0 * std::f64::consts::PI * group as f64 / 5.0 + std::f64::consts::PI / 10.0;
            for i in 0..4u64 {
                let label = group * 4 + i + 1;
                let offset = 30.0 * i as f64;
                objects.push(object(
                    label,
                    1,
                    201,
                    [
                        950.0 + offset * angle.cos() + 10.0 * i as f64,
                        4.0 * angle.cos(),
                        950.0 + offset * angle.sin() - 10.0 * i as f64,
                        4.0 * angle.sin(),
                    ],
                ));
            }
        }
        Self {
            name: "scenario4".into(),
            area: AreaConfig {
                min: [0.0, 0.0],
                max: [2000.0, 2000.0],
            },
            agents: AgentsConfig {
                count: 3,
                start: [1000.0, 300.0],
                speed: 10.0,
            },
            filter: FilterConfig {
                birth_mean: [1000.0, 0.0, 1000.0, 0.0],
                birth_var: [1_000_000.0, 10.0, 1_000_000.0, 10.0],
                ..FilterConfig::default()
            },
            objects,
            ..Self::default()
        }
    }

    /// Checks semantic constraints, naming the offending key.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |key: &str, why: String| {
            Err(Error::Config {
                key: key.to_string(),
                message: why,
            })
        };
        if self.area.max[0] <= self.area.min[0] || self.area.max[1] <= self.area.min[1] {
            return bad("area.max", "must exceed area.min in both axes".into());
        }
        if self.time.steps == 0 {
            return bad("time.steps", "must be at least 1".into());
        }
        if self.time.dt <= 0.0 {
            return bad("time.dt", "must be positive".into());
        }
        if self.agents.count == 0 {
            return bad("agents.count", "must be at least 1".into());
        }
        if self.agents.speed < 0.0 {
            return bad("agents.speed", "must be nonnegative".into());
        }
        if !self.bounds().contains(self.agents.start) {
            return bad("agents.start", "must lie inside the survey area".into());
        }
        if self.grid.rows == 0 || self.grid.cols == 0 {
            return bad("grid.rows", "grid must have at least one cell".into());
        }
        if self.sensor.detection_range <= 0.0 {
            return bad("sensor.detection_range", "must be positive".into());
        }
        if self.sensor.falloff <= 0.0 {
            return bad("sensor.falloff", "must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.sensor.p_d_max) {
            return bad("sensor.p_d_max", "must lie in [0, 1]".into());
        }
        if self.sensor.clutter_rate < 0.0 {
            return bad("sensor.clutter_rate", "must be nonnegative".into());
        }
        for (key, v) in [
            ("sensor.sigma0_bearing", self.sensor.sigma0_bearing),
            ("sensor.sigma0_range", self.sensor.sigma0_range),
            ("sensor.sigma0_xy", self.sensor.sigma0_xy),
        ] {
            if v <= 0.0 {
                return bad(key, "noise scale must be positive".into());
            }
        }
        if self.motion.sigma_cv < 0.0 {
            return bad("motion.sigma_cv", "must be nonnegative".into());
        }
        if !(self.filter.birth_prob > 0.0 && self.filter.birth_prob < 1.0) {
            return bad("filter.birth_prob", "must lie strictly in (0, 1)".into());
        }
        if !(0.0..=1.0).contains(&self.filter.survival_prob) {
            return bad("filter.survival_prob", "must lie in [0, 1]".into());
        }
        if self.filter.particles == 0 {
            return bad("filter.particles", "must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.filter.prune_threshold) {
            return bad("filter.prune_threshold", "must lie in [0, 1)".into());
        }
        if self.filter.birth_var.iter().any(|&v| v <= 0.0) {
            return bad("filter.birth_var", "variances must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.filter.extraction_threshold) {
            return bad("filter.extraction_threshold", "must lie in [0, 1]".into());
        }
        if self.planner.horizon == 0 {
            return bad("planner.horizon", "must be at least 1".into());
        }
        if self.planner.replan_every == 0 {
            return bad("planner.replan_every", "must be at least 1".into());
        }
        if self.ospa.order < 1.0 {
            return bad("ospa.order", "must be at least 1".into());
        }
        if self.ospa.cutoff <= 0.0 {
            return bad("ospa.cutoff", "must be positive".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, obj) in self.objects.iter().enumerate() {
            if !seen.insert(obj.label) {
                return bad(
                    &format!("objects[{i}].label"),
                    format!("duplicate label {}", obj.label),
                );
            }
            if obj.death <= obj.birth {
                return bad(
                    &format!("objects[{i}].death"),
                    "death must come after birth".into(),
                );
            }
            if obj.init.iter().any(|v| !v.is_finite()) {
                return bad(&format!("objects[{i}].init"), "must be finite".into());
            }
        }
        Ok(())
    }

    /// Fully resolved configuration as TOML, defaults included.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.area.min, self.area.max)
    }

    pub fn sensor_model(&self) -> SensorModel {
        let kind = match self.sensor.kind {
            SensorKindConfig::RangeBearing => SensorKind::RangeBearing {
                sigma0_bearing: self.sensor.sigma0_bearing,
                beta_bearing: self.sensor.beta_bearing,
                sigma0_range: self.sensor.sigma0_range,
                beta_range: self.sensor.beta_range,
            },
            SensorKindConfig::Vision => SensorKind::Vision {
                sigma0_xy: self.sensor.sigma0_xy,
                beta_xy: self.sensor.beta_xy,
                window: self.bounds(),
            },
        };
        SensorModel {
            kind,
            detection_range: self.sensor.detection_range,
            falloff: self.sensor.falloff,
            p_d_max: self.sensor.p_d_max,
            clutter_rate: self.sensor.clutter_rate,
        }
    }

    pub fn motion_model(&self) -> CvModel {
        CvModel::new(self.time.dt, self.motion.sigma_cv)
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            birth: BirthModel {
                prob: self.filter.birth_prob,
                density: BirthDensity::Gaussian {
                    mean: Kinematics::from_array(self.filter.birth_mean),
                    var: self.filter.birth_var,
                },
            },
            survival_prob: self.filter.survival_prob,
            motion: self.motion_model(),
            prune_threshold: self.filter.prune_threshold,
            particles_per_track: self.filter.particles,
        }
    }

    /// Planner configuration for one run mode (`v1`, `v2` or the combined
    /// objective under the configured algorithm).
    pub fn planner_config(&self, mode: PlanMode) -> PlannerConfig {
        PlannerConfig {
            horizon: self.planner.horizon,
            actions: Action::set(self.agents.speed),
            mode,
            bound_check: false,
            brute_force_cap: u128::from(self.planner.brute_force_cap),
            replan_every: self.planner.replan_every,
            grid_predict_in_rollout: self.planner.grid_predict_in_rollout,
        }
    }

    pub fn sim_config(&self, mode: PlanMode) -> SimConfig {
        SimConfig {
            sensor: self.sensor_model(),
            filter: self.filter_params(),
            planner: self.planner_config(mode),
            ospa: OspaParams {
                order: self.ospa.order,
                cutoff: self.ospa.cutoff,
            },
            extraction_threshold: self.filter.extraction_threshold,
            truth_noise: self.motion.truth_noise,
        }
    }

    pub fn grid(&self) -> OccupancyGrid {
        OccupancyGrid::new(
            GridGeometry::covering(self.bounds(), self.grid.rows, self.grid.cols),
            self.filter.birth_prob,
            self.filter.survival_prob,
        )
    }

    pub fn scripts(&self) -> Vec<ObjectScript> {
        self.objects
            .iter()
            .map(|o| ObjectScript {
                label: Label(o.label),
                birth: o.birth,
                death: o.death,
                init: Kinematics::from_array(o.init),
            })
            .collect()
    }
}

fn object(label: u64, birth: usize, death: usize, init: [f64; 4]) -> ObjectConfig {
    ObjectConfig {
        label,
        birth,
        death,
        init,
    }
}

/// Parses and validates a config file. Unknown keys and type mismatches are
/// reported with the offending key path; semantic violations name the key.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let config: ScenarioConfig = toml::from_str(&text).map_err(|e| Error::Config {
        key: path.display().to_string(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}
