//! Scaling behaviour: growing the team monotonically improves overall
//! tracking on a desk-scale variant of the wide-area scenario, within
//! Monte-Carlo error.

use searchtrack_harness::config::{ObjectConfig, ScenarioConfig};
use searchtrack_harness::runner::{sweep_agents, RunMode};

/// Five fast objects radiating over the 2 km field, reduced filter and grid
/// resolution, shortened run.
fn desk_scenario4_variant() -> ScenarioConfig {
    let mut config = ScenarioConfig::scenario4();
    config.name = "scenario4desk".into();
    config.time.steps = 120;
    config.grid.rows = 50;
    config.grid.cols = 50;
    config.filter.particles = 200;
    config.planner.horizon = 2;
    config.agents.start = [1000.0, 850.0];
    config.objects = (0..5u64)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / 5.0 + 0.3;
            ObjectConfig {
                label: i + 1,
                birth: 1,
                death: 121,
                init: [
                    1000.0 + 40.0 * i as f64,
                    4.0 * angle.cos(),
                    1000.0 - 30.0 * i as f64,
                    4.0 * angle.sin(),
                ],
            }
        })
        .collect();
    config.validate().unwrap();
    config
}

#[test]
fn overall_tracking_improves_with_team_size() {
    let config = desk_scenario4_variant();
    let rows = sweep_agents(&config, &[2, 4, 6], &[RunMode::Vmo], 6, 17).unwrap();
    assert_eq!(rows.len(), 3);
    for pair in rows.windows(2) {
        let (small, large) = (&pair[0], &pair[1]);
        assert!(small.agents < large.agents);
        // Non-increasing mean distance within one joint standard error.
        let slack = (small.ospa_dist_stderr.powi(2) + large.ospa_dist_stderr.powi(2)).sqrt();
        assert!(
            large.ospa_dist_mean <= small.ospa_dist_mean + slack,
            "S={} dist {:.2}±{:.2} vs S={} dist {:.2}±{:.2}",
            small.agents,
            small.ospa_dist_mean,
            small.ospa_dist_stderr,
            large.agents,
            large.ospa_dist_mean,
            large.ospa_dist_stderr
        );
    }
    println!(
        "sweep trend: {}",
        rows.iter()
            .map(|r| format!(
                "S={} dist {:.2}±{:.2}",
                r.agents, r.ospa_dist_mean, r.ospa_dist_stderr
            ))
            .collect::<Vec<_>>()
            .join("  ")
    );
}
