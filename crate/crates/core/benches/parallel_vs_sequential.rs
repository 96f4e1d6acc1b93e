//! Parallel-versus-sequential throughput of the two data-parallel hot paths:
//! planner candidate evaluation and the filter-bank step.
//!
//! With the default `parallel` feature the same workload is measured on a
//! 1-thread rayon pool and on all cores; `cargo bench --no-default-features`
//! measures the sequential fallback build instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use searchtrack_core::filter::{step_bank, BirthDensity, BirthModel, FilterBank, FilterParams};
use searchtrack_core::grid::{GridGeometry, OccupancyGrid};
use searchtrack_core::model::{
    AgentPose, BernoulliTrack, Bounds, Kinematics, Label, MeasKind, Measurement, MeasurementSet,
    Particle,
};
use searchtrack_core::planner::{brute_force_plan, PlanMode, PlannerConfig, Snapshot};
use searchtrack_core::rng::StreamTree;
use searchtrack_core::sensing::{measurement_mean, CvModel, SensorKind, SensorModel};

fn sensor() -> SensorModel {
    SensorModel {
        kind: SensorKind::RangeBearing {
            sigma0_bearing: 2.0 * std::f64::consts::PI / 180.0,
            beta_bearing: 1.7e-5,
            sigma0_range: 10.0,
            beta_range: 5e-3,
        },
        detection_range: 200.0,
        falloff: 0.008,
        p_d_max: 0.98,
        clutter_rate: 0.2,
    }
}

fn filter_params(particles: usize) -> FilterParams {
    FilterParams {
        birth: BirthModel {
            prob: 0.005,
            density: BirthDensity::Gaussian {
                mean: Kinematics::new(500.0, 0.0, 500.0, 0.0),
                var: [250_000.0, 10.0, 250_000.0, 10.0],
            },
        },
        survival_prob: 0.99,
        motion: CvModel::new(1.0, 1.0),
        prune_threshold: 1e-3,
        particles_per_track: particles,
    }
}

fn cloud(label: u64, cx: f64, cy: f64, n: usize) -> BernoulliTrack {
    let particles = (0..n)
        .map(|i| Particle {
            kin: Kinematics::new(cx + (i % 16) as f64, 1.0, cy + (i / 16) as f64, -0.5),
            weight: 1.0 / n as f64,
        })
        .collect();
    BernoulliTrack::new(Label(label), 0.9, particles)
}

struct World {
    bank: FilterBank,
    grid: OccupancyGrid,
    sensor: SensorModel,
    bounds: Bounds,
    poses: Vec<AgentPose>,
}

fn world(num_agents: usize, num_tracks: usize, particles: usize) -> World {
    let bounds = Bounds::new([0.0, 0.0], [1000.0, 1000.0]);
    let mut bank = FilterBank::new(filter_params(particles));
    for t in 0..num_tracks {
        let track = cloud(
            t as u64 + 1,
            200.0 + 120.0 * (t % 5) as f64,
            250.0 + 60.0 * t as f64,
            particles,
        );
        bank.tracks.insert(track.label, track);
    }
    let mut grid = OccupancyGrid::new(GridGeometry::covering(bounds, 100, 100), 0.005, 0.99);
    for (i, c) in grid.cells.iter_mut().enumerate() {
        *c = 0.02 + 0.3 * ((i % 11) as f64 / 11.0);
    }
    let poses = (1..=num_agents)
        .map(|id| AgentPose::new(id, 260.0 + 70.0 * (id - 1) as f64, 280.0))
        .collect();
    World {
        bank,
        grid,
        sensor: sensor(),
        bounds,
        poses,
    }
}

fn run_planner(w: &World) {
    let snapshot = Snapshot {
        bank: &w.bank,
        grid: &w.grid,
        sensor: &w.sensor,
        bounds: w.bounds,
        poses: &w.poses,
    };
    let config = PlannerConfig::new(
        2,
        searchtrack_core::model::Action::set(10.0),
        PlanMode::BruteForce,
    );
    let result = brute_force_plan(&snapshot, &config).unwrap();
    assert_eq!(result.evaluations, 9usize.pow(w.poses.len() as u32));
}

fn run_filter_step(w: &World) {
    let mut measurements = MeasurementSet::new();
    for pose in &w.poses {
        for track in w.bank.tracks.values() {
            let est = searchtrack_core::model::estimate_state(track);
            measurements.insert(Measurement {
                agent_id: pose.agent_id,
                label: track.label,
                value: measurement_mean(&w.sensor, pose, est.kin.position()),
                kind: MeasKind::Real,
            });
        }
    }
    let out = step_bank(
        &w.bank,
        &measurements,
        &w.poses,
        &w.sensor,
        &StreamTree::new(7),
    );
    assert!(!out.tracks.is_empty());
}

#[cfg(feature = "parallel")]
fn bench_on_pool<F: Fn() + Sync + Send>(threads: usize, f: F) {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(f);
}

#[cfg(feature = "parallel")]
fn num_cpus() -> usize {
    std::thread::available_parallelism().map_or(2, |n| n.get())
}

fn planner_benches(c: &mut Criterion) {
    let mut group = c.benchmark_group("planner_candidates");
    for agents in [2usize, 3] {
        let w = world(agents, 3, 300);
        #[cfg(feature = "parallel")]
        {
            group.bench_with_input(BenchmarkId::new("rayon_1_thread", agents), &w, |b, w| {
                b.iter(|| bench_on_pool(1, || run_planner(w)))
            });
            group.bench_with_input(BenchmarkId::new("rayon_all_threads", agents), &w, |b, w| {
                b.iter(|| bench_on_pool(num_cpus(), || run_planner(w)))
            });
        }
        #[cfg(not(feature = "parallel"))]
        group.bench_with_input(BenchmarkId::new("sequential", agents), &w, |b, w| {
            b.iter(|| run_planner(w))
        });
    }
    group.finish();
}

fn filter_benches(c: &mut Criterion) {
    let mut group = c.benchmark_group("filter_bank_step");
    for tracks in [4usize, 12] {
        let w = world(3, tracks, 1000);
        #[cfg(feature = "parallel")]
        {
            group.bench_with_input(BenchmarkId::new("rayon_1_thread", tracks), &w, |b, w| {
                b.iter(|| bench_on_pool(1, || run_filter_step(w)))
            });
            group.bench_with_input(BenchmarkId::new("rayon_all_threads", tracks), &w, |b, w| {
                b.iter(|| bench_on_pool(num_cpus(), || run_filter_step(w)))
            });
        }
        #[cfg(not(feature = "parallel"))]
        group.bench_with_input(BenchmarkId::new("sequential", tracks), &w, |b, w| {
            b.iter(|| run_filter_step(w))
        });
    }
    group.finish();
}

criterion_group!(benches, planner_benches, filter_benches);
criterion_main!(benches);
