//! Ground-truth motion, detection and measurement models.
//!
//! Objects follow a nearly-constant-velocity model. Agents carry either a
//! range-bearing sensor or a vision sensor; both have a range-limited
//! detection probability and distance-dependent Gaussian noise, and each
//! identity channel can additionally produce one false detection per step.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::estimate_state;
use crate::model::{
    ActionPlan, AgentPose, BernoulliTrack, Bounds, Kinematics, Label, MeasKind, Measurement,
    MeasurementSet, ObjectScript, ObjectState, ScenarioTruth,
};

/// Detection probability at or below which an ideal (planning) measurement is
/// not generated. The boundary itself is inclusive: `p_d == 0.5` detects.
pub const IDEAL_DETECTION_THRESHOLD: f64 = 0.5;

/// Nearly-constant-velocity motion model with sampling interval `dt` and
/// process-noise intensity `sigma_cv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvModel {
    /// Sampling interval T0, seconds.
    pub dt: f64,
    /// Process noise intensity, m/s^1.5.
    pub sigma_cv: f64,
}

impl CvModel {
    pub fn new(dt: f64, sigma_cv: f64) -> Self {
        assert!(dt > 0.0 && sigma_cv >= 0.0);
        Self { dt, sigma_cv }
    }

    /// One noiseless transition step: position advances by velocity.
    pub fn step(&self, kin: Kinematics) -> Kinematics {
        Kinematics {
            px: kin.px + self.dt * kin.vx,
            vx: kin.vx,
            py: kin.py + self.dt * kin.vy,
            vy: kin.vy,
        }
    }

    /// One step with process noise drawn from the discretised
    /// white-acceleration covariance
    /// `Q = sigma_cv^2 · [T^3/3, T^2/2; T^2/2, T]` per axis.
    pub fn step_noisy<R: Rng + ?Sized>(&self, kin: Kinematics, rng: &mut R) -> Kinematics {
        let mut out = self.step(kin);
        let t = self.dt;
        // Cholesky factor of the per-axis Q block.
        let l11 = self.sigma_cv * (t * t * t / 3.0).sqrt();
        let l21 = self.sigma_cv * (3.0 * t).sqrt() / 2.0;
        let l22 = self.sigma_cv * t.sqrt() / 2.0;
        for (p, v) in [(&mut out.px, &mut out.vx), (&mut out.py, &mut out.vy)] {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            *p += l11 * n1;
            *v += l21 * n1 + l22 * n2;
        }
        out
    }
}

/// Propagates one object through the motion model.
pub fn predict_object<R: Rng + ?Sized>(
    state: &ObjectState,
    model: &CvModel,
    with_noise: bool,
    rng: &mut R,
) -> ObjectState {
    let kin = if with_noise {
        model.step_noisy(state.kin, rng)
    } else {
        model.step(state.kin)
    };
    ObjectState::new(kin, state.label)
}

/// Sensor family plus its noise parametrisation.
#[derive(Debug, Clone, PartialEq)]
pub enum SensorKind {
    /// Measures `[bearing rad, range m]`; noise grows with distance.
    RangeBearing {
        sigma0_bearing: f64,
        beta_bearing: f64,
        sigma0_range: f64,
        beta_range: f64,
    },
    /// Measures the planar position directly, equal noise per axis.
    Vision {
        sigma0_xy: f64,
        beta_xy: f64,
        /// Observation window for false detections.
        window: Bounds,
    },
}

/// Range-limited detection-based sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub kind: SensorKind,
    /// Full-sensitivity detection range r_d, metres.
    pub detection_range: f64,
    /// Detection falloff per metre beyond r_d.
    pub falloff: f64,
    /// Peak detection probability.
    pub p_d_max: f64,
    /// Per-channel false-detection rate λ.
    pub clutter_rate: f64,
}

impl SensorModel {
    /// Range beyond which the detection probability is exactly zero.
    pub fn max_range(&self) -> f64 {
        if self.falloff > 0.0 {
            self.detection_range + self.p_d_max / self.falloff
        } else {
            f64::INFINITY
        }
    }

    /// Measure (area in sensor space) of the observation window over which
    /// false detections are uniform. Likelihoods are expressed relative to
    /// this uniform reference density so they stay dimensionless.
    pub fn window_measure(&self) -> f64 {
        match &self.kind {
            SensorKind::RangeBearing { .. } => 2.0 * std::f64::consts::PI * self.max_range(),
            SensorKind::Vision { window, .. } => window.width() * window.height(),
        }
    }

    /// Noise standard deviations `[σ1, σ2]` at a given sensor-object
    /// distance.
    pub fn noise_sigmas(&self, distance: f64) -> [f64; 2] {
        match &self.kind {
            SensorKind::RangeBearing {
                sigma0_bearing,
                beta_bearing,
                sigma0_range,
                beta_range,
            } => [
                sigma0_bearing + beta_bearing * distance,
                sigma0_range + beta_range * distance,
            ],
            SensorKind::Vision {
                sigma0_xy, beta_xy, ..
            } => {
                let s = sigma0_xy + beta_xy * distance;
                [s, s]
            }
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = a % tau;
    if x <= -std::f64::consts::PI {
        x += tau;
    } else if x > std::f64::consts::PI {
        x -= tau;
    }
    x
}

/// 3D distance between an agent and an object's measurement point
/// `x_p = [p_x, p_y, 1]`, so agent altitude enters the range.
pub fn sensor_distance(agent: &AgentPose, position: [f64; 2]) -> f64 {
    let dx = position[0] - agent.px;
    let dy = position[1] - agent.py;
    let dz = 1.0 - agent.pz;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Range-limited detection probability: `p_d_max` inside the detection
/// range, decaying linearly with the falloff beyond it, floored at zero.
pub fn detection_probability(sensor: &SensorModel, agent: &AgentPose, position: [f64; 2]) -> f64 {
    let d = sensor_distance(agent, position);
    if d <= sensor.detection_range {
        sensor.p_d_max
    } else {
        (sensor.p_d_max - (d - sensor.detection_range) * sensor.falloff).max(0.0)
    }
}

/// Noise-free measurement of a planar position. Bearing uses the
/// full-quadrant arctangent; a zero horizontal offset reports bearing 0.
pub fn measurement_mean(sensor: &SensorModel, agent: &AgentPose, position: [f64; 2]) -> [f64; 2] {
    match &sensor.kind {
        SensorKind::RangeBearing { .. } => {
            let bearing = (position[1] - agent.py).atan2(position[0] - agent.px);
            [bearing, sensor_distance(agent, position)]
        }
        SensorKind::Vision { .. } => position,
    }
}

/// Attempts a detection of one object: with probability `p_d` returns the
/// noisy measurement, otherwise `None`.
pub fn measure<R: Rng + ?Sized>(
    agent: &AgentPose,
    state: &ObjectState,
    sensor: &SensorModel,
    rng: &mut R,
) -> Option<Measurement> {
    let position = state.kin.position();
    let p_d = detection_probability(sensor, agent, position);
    if rng.gen::<f64>() >= p_d {
        return None;
    }
    let mean = measurement_mean(sensor, agent, position);
    let [s1, s2] = sensor.noise_sigmas(sensor_distance(agent, position));
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    let mut value = [mean[0] + s1 * n1, mean[1] + s2 * n2];
    if matches!(sensor.kind, SensorKind::RangeBearing { .. }) {
        value[0] = wrap_angle(value[0]);
    }
    Some(Measurement {
        agent_id: agent.agent_id,
        label: state.label,
        value,
        kind: MeasKind::Real,
    })
}

/// Draws at most one false detection on an identity channel: with
/// probability `1 − e^{−λ}` a measurement uniform over the observation
/// window, otherwise `None`. Callers only invoke this when the channel
/// produced no real detection, so a real detection always wins the channel.
pub fn gen_clutter<R: Rng + ?Sized>(
    agent_id: usize,
    label: Label,
    sensor: &SensorModel,
    rng: &mut R,
) -> Option<Measurement> {
    let p_clutter = 1.0 - (-sensor.clutter_rate).exp();
    if rng.gen::<f64>() >= p_clutter {
        return None;
    }
    let value = match &sensor.kind {
        SensorKind::RangeBearing { .. } => {
            let bearing = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let range = rng.gen_range(0.0..sensor.max_range());
            [bearing, range]
        }
        SensorKind::Vision { window, .. } => [
            rng.gen_range(window.min[0]..window.max[0]),
            rng.gen_range(window.min[1]..window.max[1]),
        ],
    };
    Some(Measurement {
        agent_id,
        label,
        value,
        kind: MeasKind::Clutter,
    })
}

fn normal_pdf(residual: f64, sigma: f64) -> f64 {
    let z = residual / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Measurement likelihood of `z` given an object at `kin`, expressed
/// relative to the uniform reference density over the observation window
/// (i.e. `g(z|x) · |window|`), so values are dimensionless and comparable
/// with probabilities in the existence update.
pub fn likelihood_ratio(
    sensor: &SensorModel,
    agent: &AgentPose,
    z: [f64; 2],
    kin: &Kinematics,
) -> f64 {
    let position = kin.position();
    let mean = measurement_mean(sensor, agent, position);
    let [s1, s2] = sensor.noise_sigmas(sensor_distance(agent, position));
    let r1 = match sensor.kind {
        SensorKind::RangeBearing { .. } => wrap_angle(z[0] - mean[0]),
        SensorKind::Vision { .. } => z[0] - mean[0],
    };
    let r2 = z[1] - mean[1];
    normal_pdf(r1, s1) * normal_pdf(r2, s2) * sensor.window_measure()
}

/// Inverts a noise-free measurement back to a planar position given the
/// observing agent's pose. For range-bearing the reported range is slant
/// (3D), so the horizontal range is recovered first.
pub fn invert_measurement(sensor: &SensorModel, agent: &AgentPose, z: [f64; 2]) -> [f64; 2] {
    match &sensor.kind {
        SensorKind::RangeBearing { .. } => {
            let dz = 1.0 - agent.pz;
            let horiz_sq = z[1] * z[1] - dz * dz;
            let horiz = horiz_sq.max(0.0).sqrt();
            [agent.px + horiz * z[0].cos(), agent.py + horiz * z[0].sin()]
        }
        SensorKind::Vision { .. } => z,
    }
}

/// Predicted ideal measurement sets over the horizon: for each future step,
/// each track's point estimate is propagated noiselessly and every planned
/// agent whose detection probability reaches the threshold contributes the
/// exact noise-free measurement. No false detections are ever included.
///
/// Returns one [`MeasurementSet`] per horizon step. All plans must share the
/// same horizon.
pub fn ideal_measurements(
    tracks: &[BernoulliTrack],
    plans: &[ActionPlan],
    sensor: &SensorModel,
    motion: &CvModel,
) -> Vec<MeasurementSet> {
    let horizon = plans.first().map_or(0, |p| p.poses.len());
    debug_assert!(plans.iter().all(|p| p.poses.len() == horizon));

    let mut estimates: Vec<ObjectState> = tracks.iter().map(estimate_state).collect();
    let mut out = Vec::with_capacity(horizon);
    for j in 0..horizon {
        for est in &mut estimates {
            est.kin = motion.step(est.kin);
        }
        let mut set = MeasurementSet::new();
        for plan in plans {
            let pose = &plan.poses[j];
            for est in &estimates {
                let position = est.kin.position();
                if detection_probability(sensor, pose, position) >= IDEAL_DETECTION_THRESHOLD {
                    set.insert(Measurement {
                        agent_id: plan.agent_id,
                        label: est.label,
                        value: measurement_mean(sensor, pose, position),
                        kind: MeasKind::Real,
                    });
                }
            }
        }
        out.push(set);
    }
    out
}

/// Builds the full ground truth for a scenario: each scripted object is
/// propagated from its initial state over its lifetime `[birth, death)`.
pub fn generate_truth<R: Rng + ?Sized>(
    scripts: &[ObjectScript],
    bounds: Bounds,
    motion: &CvModel,
    with_noise: bool,
    steps: usize,
    rng: &mut R,
) -> ScenarioTruth {
    let mut trajectories: Vec<Vec<Kinematics>> = Vec::with_capacity(scripts.len());
    for script in scripts {
        let mut traj = Vec::new();
        if script.death > script.birth {
            let mut kin = script.init;
            traj.push(kin);
            for _ in (script.birth + 1)..script.death {
                kin = if with_noise {
                    motion.step_noisy(kin, rng)
                } else {
                    motion.step(kin)
                };
                traj.push(kin);
            }
        }
        trajectories.push(traj);
    }

    let mut states = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let mut alive: Vec<ObjectState> = scripts
            .iter()
            .zip(&trajectories)
            .filter(|(s, _)| k >= s.birth && k < s.death)
            .map(|(s, traj)| ObjectState::new(traj[k - s.birth], s.label))
            .collect();
        alive.sort_by_key(|o| o.label);
        states.push(alive);
    }
    ScenarioTruth::from_states(bounds, scripts.to_vec(), states)
}
