//! Information-theoretic value functions for planning.
//!
//! Tracking value: mutual information between track states and the ideal
//! future measurements a joint action would produce, summed over the horizon.
//! Discovery value: mutual information between the occupancy grid and the
//! ideal empty measurements along the planned trajectories. Both are
//! combined by min-max normalising each objective over the candidate set and
//! summing (the global-criterion scalarisation).
//!
//! Rollouts are pure functions of the cloned filter/grid state: prediction is
//! deterministic ([`crate::filter::predict_track_ideal`]) and ideal
//! measurements carry no false detections, so their updates use a zero
//! clutter rate. An action set that produces no sensing opportunity yields
//! exactly zero value.
//!
//! A property of the particle-set entropy worth knowing: it carries an
//! `r·ln N_s` term, so an update that lifts a track's existence faster than
//! it sharpens its weights reads as a (small) entropy increase — a
//! quantisation artifact the underlying information measure does not have,
//! and one that would break the monotonicity the greedy guarantee rests on.
//! Per-step tracking terms are therefore floored at zero. The discovery
//! value needs no floor: grid cells never exceed the unobserved steady state
//! below 1/2 and empty updates only push them down, so its terms are
//! nonnegative by construction.

use crate::filter::{predict_track_ideal, update_track_all_agents, FilterBank};
use crate::grid::{cell_entropy, grid_entropy, update_cell_empty, OccupancyGrid};
use crate::model::{
    estimate_state, ActionPlan, AgentPose, BernoulliTrack, MeasKind, Measurement, ObjectState,
};
use crate::sensing::{
    detection_probability, measurement_mean, SensorModel, IDEAL_DETECTION_THRESHOLD,
};

/// Raw and combined objective values of one evaluated action set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValueBreakdown {
    /// Tracking mutual information, nats.
    pub v1: f64,
    /// Discovery mutual information, nats.
    pub v2: f64,
    /// Min-max normalised combination over the candidate set, in `[0, 2]`.
    pub v_mo: f64,
    /// Per-horizon-step tracking terms.
    pub v1_steps: Vec<f64>,
    /// Per-horizon-step discovery terms.
    pub v2_steps: Vec<f64>,
}

/// Differential entropy of one Bernoulli track under the particle
/// representation: `−(1−r)·ln(1−r) − r·Σ w·ln(r·w)`, with `0·ln 0 := 0`.
pub fn track_entropy(track: &BernoulliTrack) -> f64 {
    let r = track.r;
    let absent = if r < 1.0 {
        -(1.0 - r) * (1.0 - r).ln()
    } else {
        0.0
    };
    if r <= 0.0 {
        return absent;
    }
    // `r·w` can underflow to zero for near-dead tracks; the term's limit is
    // zero, same as the 0·ln 0 convention.
    let weighted: f64 = track
        .particles
        .iter()
        .map(|p| {
            let q = r * p.weight;
            if q > 0.0 {
                p.weight * q.ln()
            } else {
                0.0
            }
        })
        .sum();
    absent - r * weighted
}

/// Joint entropy of a set of independently tracked objects: the sum of the
/// per-track entropies.
pub fn set_entropy<'a, I>(tracks: I) -> f64
where
    I: IntoIterator<Item = &'a BernoulliTrack>,
{
    tracks.into_iter().map(track_entropy).sum()
}

/// Candidate-independent rollout state shared across all evaluations of one
/// planning call: tracks predicted `1..=H` steps ahead with their entropies
/// and point estimates, plus the grid entropy baseline.
#[derive(Debug, Clone)]
pub struct RolloutCache {
    /// `tracks[j][i]`: track `i` predicted `j+1` steps ahead.
    tracks: Vec<Vec<BernoulliTrack>>,
    /// `estimates[j][i]`: matching point estimates (for ideal measurements).
    estimates: Vec<Vec<ObjectState>>,
    /// Prior set entropy at each horizon step.
    prior_entropy: Vec<f64>,
    /// Entropy of the current grid.
    pub grid_entropy0: f64,
    horizon: usize,
}

impl RolloutCache {
    pub fn new(bank: &FilterBank, grid: &OccupancyGrid, horizon: usize) -> Self {
        let mut current: Vec<BernoulliTrack> = bank.tracks.values().cloned().collect();
        let mut tracks = Vec::with_capacity(horizon);
        let mut estimates = Vec::with_capacity(horizon);
        let mut prior_entropy = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            current = current
                .iter()
                .map(|t| {
                    predict_track_ideal(
                        t,
                        bank.params.birth.prob,
                        bank.params.survival_prob,
                        &bank.params.motion,
                    )
                })
                .collect();
            prior_entropy.push(set_entropy(current.iter()));
            estimates.push(current.iter().map(estimate_state).collect());
            tracks.push(current.clone());
        }
        Self {
            tracks,
            estimates,
            prior_entropy,
            grid_entropy0: grid_entropy(grid),
            horizon,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// Tracking value of a set of agent plans: for each horizon step, the drop
/// from the predicted prior entropy to the posterior entropy after updating
/// with that step's ideal measurements. Plans must be sorted by agent.
pub fn tracking_value_cached(
    cache: &RolloutCache,
    plans: &[ActionPlan],
    sensor: &SensorModel,
) -> (f64, Vec<f64>) {
    debug_assert!(plans.windows(2).all(|w| w[0].agent_id < w[1].agent_id));
    let mut steps = Vec::with_capacity(cache.horizon);
    for j in 0..cache.horizon {
        let mut posterior = 0.0;
        for (track, est) in cache.tracks[j].iter().zip(&cache.estimates[j]) {
            let position = est.kin.position();
            let channels: Vec<(AgentPose, Option<Measurement>)> = plans
                .iter()
                .map(|plan| {
                    let pose = plan.poses[j];
                    let meas = (detection_probability(sensor, &pose, position)
                        >= IDEAL_DETECTION_THRESHOLD)
                        .then(|| Measurement {
                            agent_id: plan.agent_id,
                            label: est.label,
                            value: measurement_mean(sensor, &pose, position),
                            kind: MeasKind::Real,
                        });
                    (pose, meas)
                })
                .collect();
            let channel_refs: Vec<(AgentPose, Option<&Measurement>)> = channels
                .iter()
                .map(|(pose, m)| (*pose, m.as_ref()))
                .collect();
            // Ideal measurements are clutter-free, hence the zero rate.
            let updated = update_track_all_agents(track, &channel_refs, sensor, 0.0);
            posterior += track_entropy(&updated);
        }
        // Floored at zero: the quantised particle entropy can report a small
        // negative gain when a detection mostly lifts existence of an
        // already tight track, which the information measure being
        // approximated never does.
        steps.push((cache.prior_entropy[j] - posterior).max(0.0));
    }
    (steps.iter().sum(), steps)
}

/// Spec-level entry point building its own rollout cache.
pub fn tracking_value(
    bank: &FilterBank,
    plans: &[ActionPlan],
    sensor: &SensorModel,
    grid: &OccupancyGrid,
    horizon: usize,
) -> f64 {
    let cache = RolloutCache::new(bank, grid, horizon);
    tracking_value_cached(&cache, plans, sensor).0
}

/// Discovery value of a set of agent plans: for each horizon step, the drop
/// from the current grid entropy to the entropy of the grid conditioned on
/// empty observations accumulated along the trajectories up to that step.
///
/// `predict_between_steps` applies the grid's birth/survival recursion
/// between horizon steps before each update (off by default; the conditional
/// grid is otherwise the current grid passed through updates only).
pub fn discovery_value(
    grid: &OccupancyGrid,
    plans: &[ActionPlan],
    sensor: &SensorModel,
    predict_between_steps: bool,
) -> (f64, Vec<f64>) {
    discovery_value_cached(
        grid_entropy(grid),
        grid,
        plans,
        sensor,
        predict_between_steps,
    )
}

/// Variant taking the precomputed entropy of `grid`; the planner evaluates
/// many candidates against one baseline. Only cells within sensing range of
/// a planned pose are touched, which is exact because out-of-range cells
/// pass through the update operator unchanged.
pub fn discovery_value_cached(
    entropy0: f64,
    grid: &OccupancyGrid,
    plans: &[ActionPlan],
    sensor: &SensorModel,
    predict_between_steps: bool,
) -> (f64, Vec<f64>) {
    let horizon = plans.first().map_or(0, |p| p.poses.len());
    debug_assert!(plans.iter().all(|p| p.poses.len() == horizon));
    let mut working = grid.clone();
    let mut running = entropy0;
    let reach = sensor.max_range();
    let mut steps = Vec::with_capacity(horizon);
    for j in 0..horizon {
        if predict_between_steps {
            working = crate::grid::grid_predict(&working);
            running = grid_entropy(&working);
        }
        for plan in plans {
            let pose = plan.poses[j];
            let (rows, cols) = working.geometry.ranges_near([pose.px, pose.py], reach);
            for row in rows {
                for col in cols.clone() {
                    let p_d = detection_probability(
                        sensor,
                        &pose,
                        working.geometry.cell_center(row, col),
                    );
                    if p_d > 0.0 {
                        let idx = working.geometry.index(row, col);
                        let old = working.cells[idx];
                        let new = update_cell_empty(old, p_d);
                        working.cells[idx] = new;
                        running += cell_entropy(new) - cell_entropy(old);
                    }
                }
            }
        }
        steps.push(entropy0 - running);
    }
    (steps.iter().sum(), steps)
}

/// Min-max normalises each objective over the candidate list and sums the
/// normalised terms. An objective that is constant over the candidates
/// carries no preference and contributes zero. Output per candidate lies in
/// `[0, 2]`.
pub fn gcm_combine(candidates: &[(f64, f64)]) -> Vec<f64> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let normalise = |select: fn(&(f64, f64)) -> f64| -> Vec<f64> {
        let lo = candidates.iter().map(select).fold(f64::INFINITY, f64::min);
        let hi = candidates
            .iter()
            .map(select)
            .fold(f64::NEG_INFINITY, f64::max);
        // A span at rounding-noise scale carries no preference either; it
        // must not be amplified into a full [0, 1] ranking.
        let span = hi - lo;
        let noise_floor = 1e-12 * hi.abs().max(lo.abs()).max(1.0);
        if span.is_finite() && span > noise_floor {
            candidates.iter().map(|c| (select(c) - lo) / span).collect()
        } else {
            vec![0.0; candidates.len()]
        }
    };
    let n1 = normalise(|c| c.0);
    let n2 = normalise(|c| c.1);
    n1.iter().zip(&n2).map(|(a, b)| a + b).collect()
}
