//! Monte-Carlo experiment runner.
//!
//! Runs are indexed by (mode, seed index); each derives its own random
//! stream from the master seed, so the full experiment is reproducible
//! bit-for-bit regardless of how many workers execute it. Runs execute in
//! parallel; results are collected in job order before anything is written.

use searchtrack_core::metrics::{aggregate_run, mean_and_stderr, RunRecord, RunSummary};
use searchtrack_core::par;
use searchtrack_core::planner::{certify_bound, PlanMode, SimState, Snapshot};
use searchtrack_core::rng::{tag, StreamTree};
use searchtrack_core::sensing::generate_truth;

use crate::config::{PlannerAlgorithm, ScenarioConfig};
use crate::{Error, Result};

/// Which value function drives the team in one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Combined tracking + discovery objective.
    Vmo,
    /// Tracking objective only.
    V1,
    /// Discovery objective only.
    V2,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Vmo => "vmo",
            RunMode::V1 => "v1",
            RunMode::V2 => "v2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "vmo" => Ok(RunMode::Vmo),
            "v1" => Ok(RunMode::V1),
            "v2" => Ok(RunMode::V2),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }

    /// Parses a comma-separated mode list (`"vmo,v1,v2"`).
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Self::parse)
            .collect()
    }

    /// Stream-derivation tag; stable across releases.
    fn stream_tag(&self) -> u64 {
        match self {
            RunMode::Vmo => 0,
            RunMode::V1 => 1,
            RunMode::V2 => 2,
        }
    }

    fn plan_mode(&self, config: &ScenarioConfig) -> PlanMode {
        match self {
            RunMode::V1 => PlanMode::SingleV1,
            RunMode::V2 => PlanMode::SingleV2,
            RunMode::Vmo => match config.planner.mode {
                PlannerAlgorithm::Greedy => PlanMode::Greedy,
                PlannerAlgorithm::BruteForce => PlanMode::BruteForce,
            },
        }
    }
}

/// One completed closed-loop run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub mode: RunMode,
    pub seed_index: u64,
    pub records: Vec<RunRecord>,
    pub summary: RunSummary,
    /// Final occupancy grid, row-major, with its shape.
    pub final_grid: (usize, usize, Vec<f64>),
}

/// A full experiment: every run of every mode, in deterministic order.
#[derive(Debug, Clone)]
pub struct ExperimentArchive {
    pub config: ScenarioConfig,
    pub master_seed: u64,
    pub modes: Vec<RunMode>,
    pub mc_count: u64,
    pub runs: Vec<RunOutput>,
}

/// Per-mode Monte-Carlo aggregate: `(mean, standard error)` per indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAggregate {
    pub mode: RunMode,
    pub runs: usize,
    pub ospa_dist: (f64, f64),
    pub ospa_loc: (f64, f64),
    pub ospa_card: (f64, f64),
    pub search_entropy: (f64, f64),
}

impl ExperimentArchive {
    pub fn runs_of(&self, mode: RunMode) -> Vec<&RunOutput> {
        self.runs.iter().filter(|r| r.mode == mode).collect()
    }

    /// Monte-Carlo means and standard errors per mode, in mode order.
    pub fn aggregates(&self) -> Vec<ModeAggregate> {
        self.modes
            .iter()
            .map(|&mode| {
                let runs = self.runs_of(mode);
                let col = |f: fn(&RunSummary) -> f64| -> (f64, f64) {
                    let xs: Vec<f64> = runs.iter().map(|r| f(&r.summary)).collect();
                    mean_and_stderr(&xs)
                };
                ModeAggregate {
                    mode,
                    runs: runs.len(),
                    ospa_dist: col(|s| s.ospa_dist),
                    ospa_loc: col(|s| s.ospa_loc),
                    ospa_card: col(|s| s.ospa_card),
                    search_entropy: col(|s| s.search_entropy),
                }
            })
            .collect()
    }
}

/// Runs one closed loop to completion.
pub fn run_single(
    config: &ScenarioConfig,
    mode: RunMode,
    master_seed: u64,
    seed_index: u64,
) -> Result<RunOutput> {
    let stream = StreamTree::new(master_seed)
        .child(mode.stream_tag())
        .child(seed_index);
    let mut truth_rng = stream.child(tag::TRUTH).rng();
    let truth = generate_truth(
        &config.scripts(),
        config.bounds(),
        &config.motion_model(),
        config.motion.truth_noise,
        config.time.steps,
        &mut truth_rng,
    );
    let sim_config = config.sim_config(mode.plan_mode(config));
    let mut state = SimState::new(
        truth,
        config.grid(),
        sim_config.filter.clone(),
        config.agents.count,
        config.agents.start,
    );
    let mut records = Vec::with_capacity(config.time.steps);
    for _ in 0..config.time.steps {
        let (next, record) = searchtrack_core::planner::step_world(state, &sim_config, &stream)?;
        state = next;
        records.push(record);
    }
    let summary = aggregate_run(&records);
    let geom = state.grid.geometry;
    Ok(RunOutput {
        mode,
        seed_index,
        records,
        summary,
        final_grid: (geom.rows, geom.cols, state.grid.cells),
    })
}

/// Runs `mc_count` seeded repetitions of every mode. Jobs execute in
/// parallel; outputs are ordered (mode, seed), independent of worker count.
pub fn run_experiment(
    config: &ScenarioConfig,
    modes: &[RunMode],
    mc_count: u64,
    master_seed: u64,
) -> Result<ExperimentArchive> {
    config.validate()?;
    let jobs: Vec<(RunMode, u64)> = modes
        .iter()
        .flat_map(|&m| (0..mc_count).map(move |s| (m, s)))
        .collect();
    let results: Vec<Result<RunOutput>> = par::map_slice(&jobs, |&(mode, seed)| {
        run_single(config, mode, master_seed, seed)
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ExperimentArchive {
        config: config.clone(),
        master_seed,
        modes: modes.to_vec(),
        mc_count,
        runs,
    })
}

/// One row of the agent-count scaling sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub mode: RunMode,
    pub agents: usize,
    pub runs: usize,
    pub ospa_dist_mean: f64,
    pub ospa_dist_stderr: f64,
}

/// Repeats the experiment for each team size and reports mean overall OSPA
/// distance versus the number of agents, per mode.
pub fn sweep_agents(
    config: &ScenarioConfig,
    agent_counts: &[usize],
    modes: &[RunMode],
    mc_count: u64,
    master_seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &agents in agent_counts {
        let mut cfg = config.clone();
        cfg.agents.count = agents;
        let archive = run_experiment(&cfg, modes, mc_count, master_seed)?;
        for agg in archive.aggregates() {
            rows.push(SweepRow {
                scenario: config.name.clone(),
                mode: agg.mode,
                agents,
                runs: agg.runs,
                ospa_dist_mean: agg.ospa_dist.0,
                ospa_dist_stderr: agg.ospa_dist.1,
            });
        }
    }
    Ok(rows)
}

/// One greedy-versus-exhaustive certification instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyRow {
    pub scenario: String,
    pub agents: usize,
    pub instance: u64,
    pub ratio: f64,
}

/// Certifies the greedy optimality ratio on seeded mid-run instances: each
/// instance warms the world up with the combined-objective greedy planner,
/// then runs greedy and exhaustive planners on the reached state.
pub fn certify_experiment(
    config: &ScenarioConfig,
    agent_counts: &[usize],
    instances: u64,
    master_seed: u64,
    warmup_steps: usize,
) -> Result<Vec<CertifyRow>> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = agent_counts
        .iter()
        .flat_map(|&a| (0..instances).map(move |i| (a, i)))
        .collect();
    let results: Vec<Result<CertifyRow>> = par::map_slice(&jobs, |&(agents, instance)| {
        let mut cfg = config.clone();
        cfg.agents.count = agents;
        let stream = StreamTree::new(master_seed)
            .child(0x43455254) // "CERT"
            .child(agents as u64)
            .child(instance);
        let mut truth_rng = stream.child(tag::TRUTH).rng();
        let truth = generate_truth(
            &cfg.scripts(),
            cfg.bounds(),
            &cfg.motion_model(),
            cfg.motion.truth_noise,
            cfg.time.steps,
            &mut truth_rng,
        );
        let sim_config = cfg.sim_config(RunMode::Vmo.plan_mode(&cfg));
        let mut state = SimState::new(
            truth,
            cfg.grid(),
            sim_config.filter.clone(),
            cfg.agents.count,
            cfg.agents.start,
        );
        for _ in 0..warmup_steps.min(cfg.time.steps.saturating_sub(1)) {
            let (next, _) = searchtrack_core::planner::step_world(state, &sim_config, &stream)?;
            state = next;
        }
        let snapshot = Snapshot {
            bank: &state.bank,
            grid: &state.grid,
            sensor: &sim_config.sensor,
            bounds: state.truth.bounds,
            poses: &state.poses,
        };
        let ratio = certify_bound(&snapshot, &sim_config.planner)?;
        Ok(CertifyRow {
            scenario: cfg.name.clone(),
            agents,
            instance,
            ratio,
        })
    });
    results.into_iter().collect()
}
