//! On-disk result archives.
//!
//! One directory per experiment:
//!
//! ```text
//! out/
//!   manifest.toml          experiment metadata
//!   config.toml            fully resolved scenario config
//!   indicators.csv         one row per (mode, seed): the indicator table
//!   summary.csv            per-mode Monte-Carlo means and standard errors
//!   runs/run_<mode>_<seed>.csv           per-step indicator series
//!   trajectories/traj_<mode>_<seed>.csv  agent/object/estimate positions
//!   grids/grid_<mode>_<seed>.csv         final occupancy grid, dense row-major
//!   ratio.csv              (certify archives) greedy/optimal ratio rows
//!   sweep.csv              (sweep archives) mean OSPA distance vs team size
//! ```
//!
//! All numeric text uses shortest round-trip formatting, so re-running an
//! experiment with the same seed reproduces every file byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::runner::{CertifyRow, ExperimentArchive, SweepRow};
use crate::{Error, Result};

/// Header of the per-run indicator table.
pub const INDICATORS_HEADER: &str =
    "scenario,mode,agents,seed,ospa_dist,ospa_loc,ospa_card,search_entropy";

pub(crate) fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// The indicator table of an experiment as CSV text.
pub fn indicators_csv(archive: &ExperimentArchive) -> String {
    let mut out = String::from(INDICATORS_HEADER);
    out.push('\n');
    for run in &archive.runs {
        let s = &run.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            archive.config.name,
            run.mode.as_str(),
            archive.config.agents.count,
            run.seed_index,
            s.ospa_dist,
            s.ospa_loc,
            s.ospa_card,
            s.search_entropy
        );
    }
    out
}

/// Per-mode aggregate table as CSV text.
pub fn summary_csv(archive: &ExperimentArchive) -> String {
    let mut out = String::from(
        "mode,runs,ospa_dist_mean,ospa_dist_se,ospa_loc_mean,ospa_loc_se,\
         ospa_card_mean,ospa_card_se,search_entropy_mean,search_entropy_se",
    );
    out.push('\n');
    for agg in archive.aggregates() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            agg.mode.as_str(),
            agg.runs,
            agg.ospa_dist.0,
            agg.ospa_dist.1,
            agg.ospa_loc.0,
            agg.ospa_loc.1,
            agg.ospa_card.0,
            agg.ospa_card.1,
            agg.search_entropy.0,
            agg.search_entropy.1
        );
    }
    out
}

fn run_csv(run: &crate::runner::RunOutput) -> String {
    let mut out = String::from(
        "step,n_truth,n_estimates,ospa_dist,ospa_loc,ospa_card,search_entropy,\
         v1,v2,v_mo,bound_ratio,track_count",
    );
    out.push('\n');
    for r in &run.records {
        let bound = r.bound_ratio.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.truth_positions.len(),
            r.estimate_positions.len(),
            r.ospa.dist,
            r.ospa.loc,
            r.ospa.card,
            r.search_entropy,
            r.value.v1,
            r.value.v2,
            r.value.v_mo,
            bound,
            r.track_count
        );
    }
    out
}

fn trajectories_csv(run: &crate::runner::RunOutput) -> String {
    let mut out = String::from("step,kind,id,x,y\n");
    for r in &run.records {
        for pose in &r.agent_poses {
            let _ = writeln!(
                out,
                "{},agent,{},{},{}",
                r.step, pose.agent_id, pose.px, pose.py
            );
        }
        for (i, p) in r.truth_positions.iter().enumerate() {
            let _ = writeln!(out, "{},object,{},{},{}", r.step, i, p[0], p[1]);
        }
        for (i, p) in r.estimate_positions.iter().enumerate() {
            let _ = writeln!(out, "{},estimate,{},{},{}", r.step, i, p[0], p[1]);
        }
    }
    out
}

/// Dense row-major matrix as CSV (one grid row per line).
pub fn grid_csv(rows: usize, cols: usize, cells: &[f64]) -> String {
    let mut out = String::new();
    for row in 0..rows {
        let line: Vec<String> = (0..cols)
            .map(|col| cells[row * cols + col].to_string())
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn manifest_toml(archive: &ExperimentArchive) -> String {
    let modes: Vec<&str> = archive.modes.iter().map(|m| m.as_str()).collect();
    format!(
        "[experiment]\nscenario = \"{}\"\nagents = {}\nmaster_seed = {}\nmc_count = {}\nmodes = [{}]\nsteps = {}\nospa_order = {}\nospa_cutoff = {}\n",
        archive.config.name,
        archive.config.agents.count,
        archive.master_seed,
        archive.mc_count,
        modes
            .iter()
            .map(|m| format!("\"{m}\""))
            .collect::<Vec<_>>()
            .join(", "),
        archive.config.time.steps,
        archive.config.ospa.order,
        archive.config.ospa.cutoff,
    )
}

/// Persists a full experiment archive under `dir`.
pub fn write_archive(archive: &ExperimentArchive, dir: &Path) -> Result<()> {
    write_file(&dir.join("manifest.toml"), &manifest_toml(archive))?;
    write_file(&dir.join("config.toml"), &archive.config.to_toml_string())?;
    write_file(&dir.join("indicators.csv"), &indicators_csv(archive))?;
    write_file(&dir.join("summary.csv"), &summary_csv(archive))?;
    for run in &archive.runs {
        let tag = format!("{}_{}", run.mode.as_str(), run.seed_index);
        write_file(
            &dir.join("runs").join(format!("run_{tag}.csv")),
            &run_csv(run),
        )?;
        write_file(
            &dir.join("trajectories").join(format!("traj_{tag}.csv")),
            &trajectories_csv(run),
        )?;
        let (rows, cols, cells) = &run.final_grid;
        write_file(
            &dir.join("grids").join(format!("grid_{tag}.csv")),
            &grid_csv(*rows, *cols, cells),
        )?;
    }
    Ok(())
}

/// Persists certification rows (plus the reference bound in a comment-free
/// data column order: scenario, agents, instance, ratio).
pub fn write_certify(rows: &[CertifyRow], dir: &Path) -> Result<()> {
    let mut out = String::from("scenario,agents,instance,ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.scenario, r.agents, r.instance, r.ratio
        );
    }
    write_file(&dir.join("ratio.csv"), &out)
}

/// Persists sweep rows.
pub fn write_sweep(rows: &[SweepRow], dir: &Path) -> Result<()> {
    let mut out = String::from("scenario,mode,agents,runs,ospa_dist_mean,ospa_dist_se\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scenario,
            r.mode.as_str(),
            r.agents,
            r.runs,
            r.ospa_dist_mean,
            r.ospa_dist_stderr
        );
    }
    write_file(&dir.join("sweep.csv"), &out)
}

/// Parses a CSV file into rows of string fields (no quoting; our writers
/// never emit commas inside fields).
pub fn read_csv(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(read_file(path)?
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}

/// Reads a dense numeric matrix written by [`grid_csv`].
pub fn read_grid(path: &Path) -> Result<Vec<Vec<f64>>> {
    read_file(path)?
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.parse::<f64>().map_err(|e| Error::Config {
                        key: path.display().to_string(),
                        message: format!("bad matrix value `{v}`: {e}"),
                    })
                })
                .collect()
        })
        .collect()
}

/// Paths of all per-run files of one kind (`runs`, `trajectories`, `grids`)
/// for a given mode, ordered by seed.
pub fn run_files(dir: &Path, subdir: &str, prefix: &str, mode: &str) -> Result<Vec<PathBuf>> {
    let sub = dir.join(subdir);
    let entries = std::fs::read_dir(&sub).map_err(|source| Error::Io {
        path: sub.display().to_string(),
        source,
    })?;
    let wanted = format!("{prefix}_{mode}_");
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(&wanted) && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}
