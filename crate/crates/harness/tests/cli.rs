//! End-to-end tests of the `searchtrack` binary: every subcommand, the
//! documented flags, config diagnostics, archive layout and plot round
//! trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_searchtrack"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("st_cli_{}_{name}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.toml");
    std::fs::write(
        &path,
        r#"
name = "tiny"

[time]
steps = 6

[agents]
count = 2

[grid]
rows = 12
cols = 12

[filter]
particles = 60

[planner]
horizon = 2

[[objects]]
label = 1
birth = 1
death = 7
init = [520.0, 1.0, 180.0, 1.5]

[[objects]]
label = 2
birth = 3
death = 7
init = [430.0, -1.0, 220.0, 1.0]
"#,
    )
    .unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn validate_config_echoes_resolved_defaults() {
    let out = run_ok(bin().args(["validate-config", "--scenario", "scenario2"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("birth_prob = 0.005"), "{text}");
    assert!(text.contains("clutter_rate = 0.2"), "{text}");
    // The late-birth groups of the preset are visible in the echo.
    assert!(text.contains("birth = 70"), "{text}");
    assert!(text.contains("birth = 90"), "{text}");
}

#[test]
fn validate_config_rejects_unknown_keys_with_diagnostic() {
    let dir = tmp("badkey");
    let path = dir.join("bad.toml");
    std::fs::write(&path, "name = \"x\"\n[sensor]\ndetection_rage = 5.0\n").unwrap();
    let out = bin()
        .args(["validate-config", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("detection_rage"), "diagnostic was: {err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validate_config_rejects_negative_steps() {
    let dir = tmp("negsteps");
    let path = dir.join("neg.toml");
    std::fs::write(&path, "[time]\nsteps = -3\n").unwrap();
    let out = bin()
        .args(["validate-config", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("steps"), "diagnostic was: {err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_writes_archive_and_reruns_byte_identically() {
    let dir = tmp("run");
    let config = write_tiny_config(&dir);
    let out1 = dir.join("a1");
    let out2 = dir.join("a2");
    for out in [&out1, &out2] {
        run_ok(
            bin()
                .args(["run", "--config"])
                .arg(&config)
                .args(["--modes", "vmo,v1", "--mc", "2", "--seed", "5", "--out"])
                .arg(out),
        );
    }
    for file in [
        "manifest.toml",
        "config.toml",
        "indicators.csv",
        "summary.csv",
        "runs/run_vmo_0.csv",
        "runs/run_v1_1.csv",
        "trajectories/traj_vmo_0.csv",
        "grids/grid_v1_0.csv",
    ] {
        let a = std::fs::read(out1.join(file)).unwrap_or_else(|_| panic!("missing {file}"));
        let b = std::fs::read(out2.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical invocations");
    }
    let indicators = std::fs::read_to_string(out1.join("indicators.csv")).unwrap();
    assert!(indicators
        .starts_with("scenario,mode,agents,seed,ospa_dist,ospa_loc,ospa_card,search_entropy"));
    assert_eq!(indicators.lines().count(), 1 + 4); // header + 2 modes × 2 seeds
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn worker_count_env_does_not_change_results() {
    let dir = tmp("workers");
    let config = write_tiny_config(&dir);
    let out1 = dir.join("w1");
    let out2 = dir.join("w2");
    run_ok(
        bin()
            .env("SEARCHTRACK_WORKERS", "1")
            .args(["run", "--config"])
            .arg(&config)
            .args(["--modes", "vmo", "--mc", "2", "--seed", "11", "--out"])
            .arg(&out1),
    );
    run_ok(
        bin()
            .env("SEARCHTRACK_WORKERS", "2")
            .args(["run", "--config"])
            .arg(&config)
            .args(["--modes", "vmo", "--mc", "2", "--seed", "11", "--out"])
            .arg(&out2),
    );
    let a = std::fs::read(out1.join("indicators.csv")).unwrap();
    let b = std::fs::read(out2.join("indicators.csv")).unwrap();
    assert_eq!(a, b);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn agents_flag_overrides_config() {
    let dir = tmp("agents");
    let config = write_tiny_config(&dir);
    let out = dir.join("archive");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .args([
                "--agents", "4", "--modes", "v2", "--mc", "1", "--seed", "0", "--out",
            ])
            .arg(&out),
    );
    let indicators = std::fs::read_to_string(out.join("indicators.csv")).unwrap();
    assert!(
        indicators.lines().nth(1).unwrap().contains(",4,"),
        "{indicators}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn certify_then_ratio_plot_includes_reference_line() {
    let dir = tmp("certify");
    let config = write_tiny_config(&dir);
    let archive = dir.join("cert");
    let out = run_ok(
        bin()
            .args(["certify", "--config"])
            .arg(&config)
            .args([
                "--sizes", "2", "--mc", "3", "--seed", "2", "--warmup", "2", "--out",
            ])
            .arg(&archive),
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("certified 3 instances"), "{text}");
    let ratio = std::fs::read_to_string(archive.join("ratio.csv")).unwrap();
    assert_eq!(
        ratio.lines().next().unwrap(),
        "scenario,agents,instance,ratio"
    );

    let plots = dir.join("plots");
    run_ok(
        bin()
            .args(["plot", "--archive"])
            .arg(&archive)
            .args(["--kind", "ratio", "--out"])
            .arg(&plots),
    );
    let svg = std::fs::read_to_string(plots.join("ratio.svg")).unwrap();
    assert!(
        svg.contains("0.6321"),
        "reference line missing from ratio plot"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn heatmap_plot_data_round_trips_the_archived_grid() {
    let dir = tmp("heatmap");
    let config = write_tiny_config(&dir);
    let archive = dir.join("archive");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--modes", "vmo", "--mc", "1", "--seed", "3", "--out"])
            .arg(&archive),
    );
    let plots = dir.join("plots");
    run_ok(
        bin()
            .args(["plot", "--archive"])
            .arg(&archive)
            .args(["--kind", "heatmap", "--out"])
            .arg(&plots),
    );
    let original = std::fs::read_to_string(archive.join("grids/grid_vmo_0.csv")).unwrap();
    let emitted = std::fs::read_to_string(plots.join("heatmap_vmo_data.csv")).unwrap();
    assert_eq!(
        original, emitted,
        "plot data must equal the archived matrix"
    );
    assert!(plots.join("heatmap_vmo.svg").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn plot_on_missing_archive_is_explicit_and_writes_nothing() {
    let dir = tmp("missing");
    let plots = dir.join("plots");
    let out = bin()
        .args(["plot", "--archive"])
        .arg(&dir)
        .args(["--kind", "entropy", "--out"])
        .arg(&plots)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing"), "{err}");
    assert!(!plots.join("entropy.svg").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_is_reproducible_and_has_one_row_per_size_and_mode() {
    let dir = tmp("sweep");
    let config = write_tiny_config(&dir);
    let out1 = dir.join("s1");
    let out2 = dir.join("s2");
    for out in [&out1, &out2] {
        run_ok(
            bin()
                .args(["sweep", "--config"])
                .arg(&config)
                .args([
                    "--sizes", "1,2", "--modes", "vmo,v2", "--mc", "1", "--seed", "4", "--out",
                ])
                .arg(out),
        );
    }
    let a = std::fs::read_to_string(out1.join("sweep.csv")).unwrap();
    let b = std::fs::read_to_string(out2.join("sweep.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 4); // header + 2 sizes × 2 modes
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_preset_and_mode_are_clear_errors() {
    let out = bin()
        .args(["run", "--scenario", "scenario9", "--out", "/tmp/never"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario9"));

    let dir = tmp("badmode");
    let config = write_tiny_config(&dir);
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--modes", "v3", "--out"])
        .arg(dir.join("x"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("v3"));
    std::fs::remove_dir_all(&dir).ok();
}
