//! Receding-horizon action selection and the closed sense-plan-act loop.
//!
//! Two planners over the joint action space: exhaustive enumeration of all
//! `|A|^S` joint actions, and greedy sequential assignment that repeatedly
//! scans the unplanned agents, finds each one's best action given the
//! already-committed ones, and commits the agent offering the largest value.
//! The greedy result carries the classic `1 − 1/e` guarantee against the
//! exhaustive optimum, which [`certify_bound`] checks empirically by running
//! both on identical state.
//!
//! Candidate evaluations are pure functions of a read-only snapshot and run
//! in parallel; commitment and tie-breaking are sequential and deterministic
//! (lowest action index first, then lowest agent id).

use crate::filter::{step_bank, FilterBank, FilterParams};
use crate::grid::{grid_entropy_per_cell, grid_predict, update_in_place, OccupancyGrid};
use crate::metrics::{ospa, OspaParams, RunRecord};
use crate::model::{
    estimate_state, unroll_action_clamped, Action, ActionPlan, AgentPose, Bounds, MeasurementSet,
    ScenarioTruth,
};
use crate::par;
use crate::rewards::{
    discovery_value_cached, gcm_combine, tracking_value_cached, RolloutCache, ValueBreakdown,
};
use crate::rng::{tag, StreamTree};
use crate::sensing::{gen_clutter, measure, SensorModel};
use crate::{Error, Result};

/// Which planner and objective drive action selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMode {
    /// Greedy sequential assignment of the combined objective.
    Greedy,
    /// Exhaustive enumeration of the combined objective.
    BruteForce,
    /// Greedy assignment of the raw tracking objective only.
    SingleV1,
    /// Greedy assignment of the raw discovery objective only.
    SingleV2,
}

/// Planner configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Look-ahead horizon H.
    pub horizon: usize,
    /// The per-agent action set A.
    pub actions: Vec<Action>,
    pub mode: PlanMode,
    /// Also run the exhaustive planner and record the greedy/optimal value
    /// ratio on every planning call.
    pub bound_check: bool,
    /// Refuse exhaustive enumeration beyond this many joint actions.
    pub brute_force_cap: u128,
    /// Re-plan every this many steps (1 = every step).
    pub replan_every: usize,
    /// Apply the grid's birth/survival recursion between rollout steps.
    pub grid_predict_in_rollout: bool,
}

impl PlannerConfig {
    pub fn new(horizon: usize, actions: Vec<Action>, mode: PlanMode) -> Self {
        Self {
            horizon,
            actions,
            mode,
            bound_check: false,
            brute_force_cap: 1_000_000,
            replan_every: 1,
            grid_predict_in_rollout: false,
        }
    }
}

/// Read-only planning inputs shared by every candidate evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    pub bank: &'a FilterBank,
    pub grid: &'a OccupancyGrid,
    pub sensor: &'a SensorModel,
    pub bounds: Bounds,
    /// Current agent poses, ascending agent id.
    pub poses: &'a [AgentPose],
}

/// Outcome of one planning call.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Chosen action per agent, aligned with the snapshot poses.
    pub actions: Vec<Action>,
    pub value: ValueBreakdown,
    /// `V_mo(greedy) / V_mo(optimal)` when the bound check ran.
    pub bound_ratio: Option<f64>,
    /// Number of candidate evaluations performed.
    pub evaluations: usize,
}

fn dt_of(snapshot: &Snapshot) -> f64 {
    snapshot.bank.params.motion.dt
}

/// Unrolled (and clamped) plan for one agent/action pair.
fn make_plan(snapshot: &Snapshot, agent_idx: usize, action: Action, horizon: usize) -> ActionPlan {
    unroll_action_clamped(
        &snapshot.poses[agent_idx],
        action,
        dt_of(snapshot),
        horizon,
        &snapshot.bounds,
    )
}

/// Raw objective pair of a set of plans. Objectives not needed by the mode
/// are skipped and reported as zero.
fn evaluate_plans(
    snapshot: &Snapshot,
    cache: &RolloutCache,
    plans: &[ActionPlan],
    config: &PlannerConfig,
) -> (f64, f64) {
    let need_v1 = config.mode != PlanMode::SingleV2;
    let need_v2 = config.mode != PlanMode::SingleV1;
    let v1 = if need_v1 {
        tracking_value_cached(cache, plans, snapshot.sensor).0
    } else {
        0.0
    };
    let v2 = if need_v2 {
        discovery_value_cached(
            cache.grid_entropy0,
            snapshot.grid,
            plans,
            snapshot.sensor,
            config.grid_predict_in_rollout,
        )
        .0
    } else {
        0.0
    };
    (v1, v2)
}

/// Scores candidates according to the planning mode: raw single objectives,
/// or the min-max combination over exactly this candidate list.
fn score_candidates(values: &[(f64, f64)], mode: PlanMode) -> Vec<f64> {
    match mode {
        PlanMode::SingleV1 => values.iter().map(|v| v.0).collect(),
        PlanMode::SingleV2 => values.iter().map(|v| v.1).collect(),
        PlanMode::Greedy | PlanMode::BruteForce => gcm_combine(values),
    }
}

/// Normalisation anchors `(lo, weight)` per objective, fixed for the whole
/// greedy assignment. Re-estimating the anchors every commitment round makes
/// the effective objective drift — once one objective's remaining span
/// collapses, rescaling it to [0, 1] amplifies rounding noise into the
/// ranking and the greedy chain loses its near-optimality. Anchoring on the
/// first round's candidate values keeps every round maximising the same
/// monotone combination.
#[derive(Clone, Copy)]
struct GcmAnchors {
    lo: [f64; 2],
    weight: [f64; 2],
}

impl GcmAnchors {
    fn from_values(values: &[(f64, f64)]) -> Self {
        let mut lo = [0.0; 2];
        let mut weight = [0.0; 2];
        for (i, select) in [
            (0, (|v: &(f64, f64)| v.0) as fn(&(f64, f64)) -> f64),
            (1, |v: &(f64, f64)| v.1),
        ] {
            let min = values.iter().map(select).fold(f64::INFINITY, f64::min);
            let max = values.iter().map(select).fold(f64::NEG_INFINITY, f64::max);
            let span = max - min;
            let noise_floor = 1e-12 * max.abs().max(min.abs()).max(1.0);
            lo[i] = min;
            weight[i] = if span.is_finite() && span > noise_floor {
                1.0 / span
            } else {
                0.0
            };
        }
        Self { lo, weight }
    }

    fn score(&self, value: (f64, f64)) -> f64 {
        self.weight[0] * (value.0 - self.lo[0]) + self.weight[1] * (value.1 - self.lo[1])
    }
}

/// Full value breakdown of one concrete joint action (used for reporting).
fn breakdown_of(
    snapshot: &Snapshot,
    cache: &RolloutCache,
    plans: &[ActionPlan],
    config: &PlannerConfig,
    v_mo: f64,
) -> ValueBreakdown {
    let (v1, v1_steps) = tracking_value_cached(cache, plans, snapshot.sensor);
    let (v2, v2_steps) = discovery_value_cached(
        cache.grid_entropy0,
        snapshot.grid,
        plans,
        snapshot.sensor,
        config.grid_predict_in_rollout,
    );
    ValueBreakdown {
        v1,
        v2,
        v_mo,
        v1_steps,
        v2_steps,
    }
}

/// Decodes joint-action index `idx` (agent 0 most significant) into
/// per-agent action indices.
fn decode_joint(idx: usize, num_agents: usize, num_actions: usize) -> Vec<usize> {
    let mut digits = vec![0usize; num_agents];
    let mut rest = idx;
    for d in digits.iter_mut().rev() {
        *d = rest % num_actions;
        rest /= num_actions;
    }
    digits
}

/// Evaluates every joint action in lexicographic order.
fn evaluate_all_joint(
    snapshot: &Snapshot,
    cache: &RolloutCache,
    config: &PlannerConfig,
) -> Result<Vec<(f64, f64)>> {
    let num_agents = snapshot.poses.len();
    let num_actions = config.actions.len();
    if num_agents == 0 {
        return Err(Error::EmptyPlannerInput { what: "agent set" });
    }
    if num_actions == 0 {
        return Err(Error::EmptyPlannerInput { what: "action set" });
    }
    let total = (num_actions as u128)
        .checked_pow(num_agents as u32)
        .unwrap_or(u128::MAX);
    if total > config.brute_force_cap {
        return Err(Error::CandidateCapExceeded {
            required: total,
            cap: config.brute_force_cap,
        });
    }
    // Per-(agent, action) plans are shared by all joint candidates.
    let agent_plans: Vec<Vec<ActionPlan>> = (0..num_agents)
        .map(|a| {
            config
                .actions
                .iter()
                .map(|&action| make_plan(snapshot, a, action, config.horizon))
                .collect()
        })
        .collect();
    Ok(par::map_range(total as usize, |idx| {
        let digits = decode_joint(idx, num_agents, num_actions);
        let plans: Vec<ActionPlan> = digits
            .iter()
            .enumerate()
            .map(|(agent, &ai)| agent_plans[agent][ai].clone())
            .collect();
        evaluate_plans(snapshot, cache, &plans, config)
    }))
}

/// Index of the maximal score; ties resolve to the lexicographically
/// smallest joint action, which is the earliest index.
fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    let _ = &scores[best];
    best
}

/// Exhaustive planner: evaluates the value function over every joint action
/// and returns the argmax. Refuses when `|A|^S` exceeds the configured cap.
pub fn brute_force_plan(snapshot: &Snapshot, config: &PlannerConfig) -> Result<PlanResult> {
    let cache = RolloutCache::new(snapshot.bank, snapshot.grid, config.horizon);
    let values = evaluate_all_joint(snapshot, &cache, config)?;
    let scores = score_candidates(&values, config.mode);
    let best = argmax_first(&scores);
    let digits = decode_joint(best, snapshot.poses.len(), config.actions.len());
    let actions: Vec<Action> = digits.iter().map(|&ai| config.actions[ai]).collect();
    let plans: Vec<ActionPlan> = actions
        .iter()
        .enumerate()
        .map(|(agent, &action)| make_plan(snapshot, agent, action, config.horizon))
        .collect();
    let value = breakdown_of(snapshot, &cache, &plans, config, scores[best]);
    Ok(PlanResult {
        actions,
        value,
        bound_ratio: None,
        evaluations: values.len(),
    })
}

/// Greedy sequential assignment: while unplanned agents remain, score every
/// (unplanned agent, action) candidate jointly with the committed plans,
/// then commit the best agent/action pair.
///
/// Exactly `|A| · S(S+1)/2` candidates are evaluated. Anchors for the
/// combined objective are estimated from the first round's candidates; see
/// [`certify_bound`] for the exact-anchor variant used when the exhaustive
/// table is available anyway.
pub fn greedy_plan(snapshot: &Snapshot, config: &PlannerConfig) -> Result<PlanResult> {
    greedy_plan_anchored(snapshot, config, None)
}

fn greedy_plan_anchored(
    snapshot: &Snapshot,
    config: &PlannerConfig,
    fixed_anchors: Option<GcmAnchors>,
) -> Result<PlanResult> {
    let num_agents = snapshot.poses.len();
    if num_agents == 0 {
        return Err(Error::EmptyPlannerInput { what: "agent set" });
    }
    if config.actions.is_empty() {
        return Err(Error::EmptyPlannerInput { what: "action set" });
    }
    let cache = RolloutCache::new(snapshot.bank, snapshot.grid, config.horizon);

    let mut committed: Vec<Option<Action>> = vec![None; num_agents];
    let mut committed_plans: Vec<ActionPlan> = Vec::with_capacity(num_agents);
    let mut unplanned: Vec<usize> = (0..num_agents).collect();
    let mut evaluations = 0usize;
    let mut last_round_best = 0.0f64;
    let mut anchors: Option<GcmAnchors> = fixed_anchors;

    while !unplanned.is_empty() {
        let candidates: Vec<(usize, usize)> = unplanned
            .iter()
            .flat_map(|&agent| (0..config.actions.len()).map(move |ai| (agent, ai)))
            .collect();
        let values: Vec<(f64, f64)> = par::map_slice(&candidates, |&(agent, ai)| {
            let plan = make_plan(snapshot, agent, config.actions[ai], config.horizon);
            let mut plans: Vec<ActionPlan> = committed_plans.clone();
            plans.push(plan);
            plans.sort_by_key(|p| p.agent_id);
            evaluate_plans(snapshot, &cache, &plans, config)
        });
        evaluations += candidates.len();
        let scores: Vec<f64> = match config.mode {
            PlanMode::SingleV1 | PlanMode::SingleV2 => score_candidates(&values, config.mode),
            PlanMode::Greedy | PlanMode::BruteForce => {
                let a = *anchors.get_or_insert_with(|| GcmAnchors::from_values(&values));
                values.iter().map(|&v| a.score(v)).collect()
            }
        };

        // Commit the best candidate; ties prefer the lowest action index,
        // then the lowest agent id.
        let mut best = 0usize;
        for i in 1..candidates.len() {
            let better = scores[i] > scores[best]
                || (scores[i] == scores[best]
                    && (candidates[i].1, candidates[i].0)
                        < (candidates[best].1, candidates[best].0));
            if better {
                best = i;
            }
        }
        let (agent, ai) = candidates[best];
        last_round_best = scores[best];
        committed[agent] = Some(config.actions[ai]);
        committed_plans.push(make_plan(
            snapshot,
            agent,
            config.actions[ai],
            config.horizon,
        ));
        committed_plans.sort_by_key(|p| p.agent_id);
        unplanned.retain(|&a| a != agent);
    }

    let actions: Vec<Action> = committed.into_iter().map(Option::unwrap).collect();
    let value = breakdown_of(snapshot, &cache, &committed_plans, config, last_round_best);
    Ok(PlanResult {
        actions,
        value,
        bound_ratio: None,
        evaluations,
    })
}

/// Runs the greedy and exhaustive planners on identical state and returns
/// `V_mo(greedy) / V_mo(optimal)`, both evaluated under the exhaustive
/// normalisation. The greedy here is handed the exhaustive anchors, so it is
/// exactly the sequential maximiser of the monotone submodular combined
/// value the guarantee speaks about. A zero optimum certifies trivially with
/// ratio 1.
pub fn certify_bound(snapshot: &Snapshot, config: &PlannerConfig) -> Result<f64> {
    let cache = RolloutCache::new(snapshot.bank, snapshot.grid, config.horizon);
    let values = evaluate_all_joint(snapshot, &cache, config)?;
    let scores = score_candidates(&values, PlanMode::BruteForce);
    let star = argmax_first(&scores);
    if scores[star] <= 0.0 {
        return Ok(1.0);
    }
    let anchors = GcmAnchors::from_values(&values);
    let greedy = greedy_plan_anchored(snapshot, config, Some(anchors))?;
    let num_actions = config.actions.len();
    let greedy_idx = greedy
        .actions
        .iter()
        .fold(0usize, |acc, a| acc * num_actions + a.index());
    Ok(scores[greedy_idx] / scores[star])
}

/// Fixed experiment inputs of one closed-loop simulation.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub sensor: SensorModel,
    pub filter: FilterParams,
    pub planner: PlannerConfig,
    pub ospa: OspaParams,
    /// Tracks with existence at or above this threshold contribute a state
    /// estimate.
    pub extraction_threshold: f64,
    /// Sample truth with process noise instead of exact constant velocity.
    pub truth_noise: bool,
}

/// Mutable world state advanced by [`step_world`].
#[derive(Debug, Clone)]
pub struct SimState {
    pub step: usize,
    pub truth: ScenarioTruth,
    pub poses: Vec<AgentPose>,
    pub bank: FilterBank,
    pub grid: OccupancyGrid,
    pub current_actions: Vec<Action>,
    pub last_value: ValueBreakdown,
    pub last_bound_ratio: Option<f64>,
}

impl SimState {
    /// Initial world state: agents stacked at the start position, empty
    /// track bank, grid at the birth prior.
    pub fn new(
        truth: ScenarioTruth,
        grid: OccupancyGrid,
        filter: FilterParams,
        num_agents: usize,
        start: [f64; 2],
    ) -> Self {
        let poses = (1..=num_agents)
            .map(|id| AgentPose::new(id, start[0], start[1]))
            .collect();
        Self {
            step: 0,
            truth,
            poses,
            bank: FilterBank::new(filter),
            grid,
            current_actions: Vec::new(),
            last_value: ValueBreakdown::default(),
            last_bound_ratio: None,
        }
    }
}

/// Advances the world one timestep: plan (or continue the current plan),
/// move every agent one step along its action, advance ground truth,
/// generate measurements, run the filter bank and grid updates, and record
/// the step's metrics.
///
/// `run_stream` must be the run-level node; per-step randomness derives from
/// it, so runs are reproducible regardless of worker count.
pub fn step_world(
    mut state: SimState,
    config: &SimConfig,
    run_stream: &StreamTree,
) -> Result<(SimState, RunRecord)> {
    let next_step = state.step + 1;
    assert!(
        next_step < state.truth.steps(),
        "simulation ran past the scripted truth"
    );

    // Plan on the configured cadence.
    let replan = state.current_actions.is_empty()
        || state
            .step
            .is_multiple_of(config.planner.replan_every.max(1));
    if replan {
        let snapshot = Snapshot {
            bank: &state.bank,
            grid: &state.grid,
            sensor: &config.sensor,
            bounds: state.truth.bounds,
            poses: &state.poses,
        };
        let result = match config.planner.mode {
            PlanMode::BruteForce => brute_force_plan(&snapshot, &config.planner)?,
            _ => greedy_plan(&snapshot, &config.planner)?,
        };
        let bound_ratio = if config.planner.bound_check {
            Some(certify_bound(&snapshot, &config.planner)?)
        } else {
            None
        };
        state.current_actions = result.actions.clone();
        state.last_value = result.value.clone();
        state.last_bound_ratio = bound_ratio;
    }

    // Execute the first step of each agent's action.
    let dt = config.filter.motion.dt;
    state.poses = state
        .poses
        .iter()
        .zip(&state.current_actions)
        .map(|(pose, &action)| {
            unroll_action_clamped(pose, action, dt, 1, &state.truth.bounds).poses[0]
        })
        .collect();

    // Sense the advanced truth: per channel, a real detection attempt first,
    // then a false-detection attempt only if the channel is empty. A channel
    // is live only while the sensor could plausibly return anything for it
    // (nonzero detection probability) — a detector produces no false report
    // for an object entirely beyond its reach.
    let truth_now = state.truth.at(next_step);
    let mut measurements = MeasurementSet::new();
    let mut meas_rng = run_stream.child(tag::MEASURE).child(next_step as u64).rng();
    for pose in &state.poses {
        for object in truth_now {
            if crate::sensing::detection_probability(&config.sensor, pose, object.kin.position())
                <= 0.0
            {
                continue;
            }
            if let Some(m) = measure(pose, object, &config.sensor, &mut meas_rng) {
                measurements.insert(m);
            } else if let Some(m) =
                gen_clutter(pose.agent_id, object.label, &config.sensor, &mut meas_rng)
            {
                measurements.insert(m);
            }
        }
    }

    // Filter and grid recursions.
    let filter_stream = run_stream.child(tag::FILTER).child(next_step as u64);
    state.bank = step_bank(
        &state.bank,
        &measurements,
        &state.poses,
        &config.sensor,
        &filter_stream,
    );
    let mut grid = grid_predict(&state.grid);
    update_in_place(&mut grid, &state.poses, &config.sensor);
    state.grid = grid;

    // Metrics.
    let estimates: Vec<[f64; 2]> = state
        .bank
        .tracks
        .values()
        .filter(|t| t.r >= config.extraction_threshold)
        .map(|t| estimate_state(t).kin.position())
        .collect();
    let truth_positions: Vec<[f64; 2]> = truth_now.iter().map(|o| o.kin.position()).collect();
    let components = ospa(&truth_positions, &estimates, &config.ospa);

    let record = RunRecord {
        step: next_step,
        truth_positions,
        estimate_positions: estimates,
        ospa: components,
        search_entropy: grid_entropy_per_cell(&state.grid),
        agent_poses: state.poses.clone(),
        actions: state.current_actions.iter().map(Action::index).collect(),
        value: state.last_value.clone(),
        bound_ratio: state.last_bound_ratio,
        track_count: state.bank.tracks.len(),
    };
    state.step = next_step;
    Ok((state, record))
}
