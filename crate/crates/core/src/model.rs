//! Shared domain types: object and agent states, Bernoulli tracks,
//! measurements, discrete actions and scenario ground truth.
//!
//! Everything here is an immutable value object; filter and planner
//! operations consume references and produce new values, so types can be
//! shared freely across parallel workers.

use std::collections::BTreeMap;

use crate::{Error, Result};

/// Base flight altitude of agent 1, metres.
pub const BASE_ALTITUDE_M: f64 = 30.0;
/// Altitude separation between consecutive agents, metres.
pub const ALTITUDE_GAP_M: f64 = 5.0;
/// Fraction by which the survey bounds are expanded when clamping agents.
pub const AGENT_MARGIN_FRACTION: f64 = 0.1;

/// Unique identity token carried by objects, tracks and measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u64);

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Planar position and velocity, the motion state `[p_x, v_x, p_y, v_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kinematics {
    pub px: f64,
    pub vx: f64,
    pub py: f64,
    pub vy: f64,
}

impl Kinematics {
    pub fn new(px: f64, vx: f64, py: f64, vy: f64) -> Self {
        Self { px, vx, py, vy }
    }

    /// Planar position `[p_x, p_y]`.
    pub fn position(&self) -> [f64; 2] {
        [self.px, self.py]
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.px, self.vx, self.py, self.vy]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.vx.is_finite() && self.py.is_finite() && self.vy.is_finite()
    }
}

/// State of one mobile object: motion state plus its identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    pub kin: Kinematics,
    pub label: Label,
}

impl ObjectState {
    pub fn new(kin: Kinematics, label: Label) -> Self {
        Self { kin, label }
    }
}

/// 3D pose of one agent. Agents fly at fixed, distinct altitudes so the team
/// needs no horizontal collision avoidance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentPose {
    /// Agent index, 1-based.
    pub agent_id: usize,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl AgentPose {
    /// Pose at the fixed altitude assigned to `agent_id`.
    pub fn new(agent_id: usize, px: f64, py: f64) -> Self {
        Self {
            agent_id,
            px,
            py,
            pz: Self::altitude_for(agent_id),
        }
    }

    /// `30 + 5·(agent_id − 1)` metres.
    pub fn altitude_for(agent_id: usize) -> f64 {
        BASE_ALTITUDE_M + ALTITUDE_GAP_M * (agent_id.saturating_sub(1)) as f64
    }

    /// New pose displaced horizontally, same agent and altitude.
    #[must_use]
    pub fn displaced(&self, dx: f64, dy: f64) -> Self {
        Self {
            agent_id: self.agent_id,
            px: self.px + dx,
            py: self.py + dy,
            pz: self.pz,
        }
    }
}

/// One weighted particle of a track's spatial density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub kin: Kinematics,
    pub weight: f64,
}

/// Bernoulli track: existence probability `r` plus a particle-weighted
/// spatial density for one uniquely identified object.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliTrack {
    pub label: Label,
    /// Existence probability, in `[0, 1]`.
    pub r: f64,
    pub particles: Vec<Particle>,
}

impl BernoulliTrack {
    pub fn new(label: Label, r: f64, particles: Vec<Particle>) -> Self {
        Self {
            label,
            r,
            particles,
        }
    }

    /// Checks the track invariants: `r ∈ [0,1]`, at least one particle,
    /// non-negative weights summing to 1 within `1e-9`, finite states.
    pub fn check_invariants(&self) -> bool {
        if !(0.0..=1.0).contains(&self.r) || self.particles.is_empty() {
            return false;
        }
        let mut sum = 0.0;
        for p in &self.particles {
            if p.weight < 0.0 || !p.weight.is_finite() || !p.kin.is_finite() {
                return false;
            }
            sum += p.weight;
        }
        (sum - 1.0).abs() <= 1e-9
    }
}

/// Whether a measurement came from the real object or is a false detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasKind {
    Real,
    Clutter,
}

/// One per-agent, per-identity measurement. `value` is sensor-space:
/// `[bearing rad, range m]` for range-bearing, `[x m, y m]` for vision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub agent_id: usize,
    pub label: Label,
    pub value: [f64; 2],
    pub kind: MeasKind,
}

/// All measurements of one timestep, keyed by `(agent, identity)`. The sensor
/// model guarantees at most one measurement per channel per step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementSet {
    entries: BTreeMap<(usize, Label), Measurement>,
}

impl MeasurementSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a measurement; a second measurement on the same channel is a
    /// caller bug.
    pub fn insert(&mut self, m: Measurement) {
        let prev = self.entries.insert((m.agent_id, m.label), m);
        debug_assert!(prev.is_none(), "duplicate measurement on one channel");
    }

    pub fn get(&self, agent_id: usize, label: Label) -> Option<&Measurement> {
        self.entries.get(&(agent_id, label))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Measurement> {
        self.entries.values()
    }

    /// Distinct identities present in this set, in ascending label order.
    pub fn labels(&self) -> Vec<Label> {
        let mut out: Vec<Label> = self.entries.keys().map(|k| k.1).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl FromIterator<Measurement> for MeasurementSet {
    fn from_iter<I: IntoIterator<Item = Measurement>>(iter: I) -> Self {
        let mut set = Self::new();
        for m in iter {
            set.insert(m);
        }
        set
    }
}

/// Discrete control action: one of eight compass headings at a fixed speed,
/// or hovering in place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub heading: Heading,
    /// Horizontal speed `v_a`, metres/second (ignored for hover).
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heading {
    /// `0..=7`, angle `index · π/4` from the +x axis (0 = east, 2 = north).
    Compass(u8),
    Hover,
}

impl Action {
    /// The full action set for a given speed: compass indices 0..=7 then
    /// hover, so action index equals position.
    pub fn set(speed: f64) -> Vec<Action> {
        let mut out: Vec<Action> = (0..8)
            .map(|i| Action {
                heading: Heading::Compass(i),
                speed,
            })
            .collect();
        out.push(Action {
            heading: Heading::Hover,
            speed,
        });
        out
    }

    /// Stable index used for reproducible tie-breaking.
    pub fn index(&self) -> usize {
        match self.heading {
            Heading::Compass(i) => i as usize,
            Heading::Hover => 8,
        }
    }

    /// Horizontal velocity `[vx, vy]` of this action.
    pub fn velocity(&self) -> [f64; 2] {
        match self.heading {
            Heading::Compass(i) => {
                let angle = f64::from(i) * std::f64::consts::FRAC_PI_4;
                [self.speed * angle.cos(), self.speed * angle.sin()]
            }
            Heading::Hover => [0.0, 0.0],
        }
    }
}

/// An action unrolled into the sequence of discrete poses an agent will
/// occupy over the look-ahead horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPlan {
    pub agent_id: usize,
    pub action: Action,
    /// `horizon` future poses, one per step.
    pub poses: Vec<AgentPose>,
}

/// Axis-aligned survey area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
        ]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    /// Bounds expanded by `fraction` of the width/height on every side.
    #[must_use]
    pub fn expanded(&self, fraction: f64) -> Self {
        let dx = self.width() * fraction;
        let dy = self.height() * fraction;
        Self {
            min: [self.min[0] - dx, self.min[1] - dy],
            max: [self.max[0] + dx, self.max[1] + dy],
        }
    }

    /// Component-wise clamp of a planar point into the bounds.
    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        [
            p[0].clamp(self.min[0], self.max[0]),
            p[1].clamp(self.min[1], self.max[1]),
        ]
    }
}

/// Birth time, death time and initial state of one scripted object.
/// The object is alive for steps `k` with `birth <= k < death`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectScript {
    pub label: Label,
    pub birth: usize,
    pub death: usize,
    pub init: Kinematics,
}

/// Precomputed ground truth: the true multi-object set at every timestep.
#[derive(Debug, Clone)]
pub struct ScenarioTruth {
    pub bounds: Bounds,
    pub scripts: Vec<ObjectScript>,
    /// `states[k]` is the true object set X_k, ascending label order.
    states: Vec<Vec<ObjectState>>,
}

impl ScenarioTruth {
    /// Builds truth from per-step states; `sensing::generate_truth` is the
    /// usual constructor.
    pub fn from_states(
        bounds: Bounds,
        scripts: Vec<ObjectScript>,
        states: Vec<Vec<ObjectState>>,
    ) -> Self {
        Self {
            bounds,
            scripts,
            states,
        }
    }

    /// Number of timesteps covered (indices `0..steps`).
    pub fn steps(&self) -> usize {
        self.states.len()
    }

    /// True object set at step `k`.
    pub fn at(&self, k: usize) -> &[ObjectState] {
        &self.states[k]
    }
}

/// Rescales particle weights to sum to 1, preserving proportions.
///
/// Fails with [`Error::DegenerateTrack`] when every weight is zero.
pub fn normalize_weights(track: &BernoulliTrack) -> Result<BernoulliTrack> {
    let mut out = track.clone();
    normalize_in_place(&mut out.particles, track.label)?;
    Ok(out)
}

/// In-place weight normalisation used throughout the filter.
pub(crate) fn normalize_in_place(particles: &mut [Particle], label: Label) -> Result<()> {
    let sum: f64 = particles.iter().map(|p| p.weight).sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::DegenerateTrack { label: label.0 });
    }
    for p in particles.iter_mut() {
        p.weight /= sum;
    }
    Ok(())
}

/// Unrolls a discrete action into `horizon` future poses: pose `j` is the
/// start displaced `j · v_a · dt` along the heading (unchanged for hover).
pub fn unroll_action(pose: &AgentPose, action: Action, dt: f64, horizon: usize) -> ActionPlan {
    let [vx, vy] = action.velocity();
    let poses = (1..=horizon)
        .map(|j| pose.displaced(vx * dt * j as f64, vy * dt * j as f64))
        .collect();
    ActionPlan {
        agent_id: pose.agent_id,
        action,
        poses,
    }
}

/// Like [`unroll_action`] but with every pose clamped into the survey bounds
/// expanded by the agent margin. Used by the planner and the world step so
/// agents cannot drift arbitrarily far from the survey area.
pub fn unroll_action_clamped(
    pose: &AgentPose,
    action: Action,
    dt: f64,
    horizon: usize,
    bounds: &Bounds,
) -> ActionPlan {
    let fly_zone = bounds.expanded(AGENT_MARGIN_FRACTION);
    let mut plan = unroll_action(pose, action, dt, horizon);
    for p in &mut plan.poses {
        let [cx, cy] = fly_zone.clamp([p.px, p.py]);
        p.px = cx;
        p.py = cy;
    }
    plan
}

/// Expected-a-posteriori state estimate: the weighted mean of the particle
/// states, keeping the track's identity.
pub fn estimate_state(track: &BernoulliTrack) -> ObjectState {
    let mut acc = [0.0; 4];
    for p in &track.particles {
        let a = p.kin.to_array();
        for (s, v) in acc.iter_mut().zip(a) {
            *s += p.weight * v;
        }
    }
    ObjectState::new(Kinematics::from_array(acc), track.label)
}
