//! Self-contained SVG plot emission.
//!
//! Every plot kind reads its series from an archive directory, writes one or
//! more `.svg` files plus the underlying series as delimiter-separated text,
//! and fails with an explicit error naming what the archive is missing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::archive::{grid_csv, read_csv, read_file, read_grid, run_files, write_file};
use crate::{Error, Result};

/// What to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Greedy/optimal value ratio per instance with the `1 − 1/e` line.
    Ratio,
    /// Agent and object trajectories of the first run of each mode.
    Trajectories,
    /// Final occupancy-grid heatmap of the first run of each mode.
    Heatmap,
    /// Mean search-area entropy over time per mode.
    Entropy,
}

impl PlotKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ratio" => Some(Self::Ratio),
            "trajectories" => Some(Self::Trajectories),
            "heatmap" => Some(Self::Heatmap),
            "entropy" => Some(Self::Entropy),
            _ => None,
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn around(points: impl Iterator<Item = [f64; 2]>) -> Self {
        let mut f = Frame {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for [x, y] in points {
            f.x_min = f.x_min.min(x);
            f.x_max = f.x_max.max(x);
            f.y_min = f.y_min.min(y);
            f.y_max = f.y_max.max(y);
        }
        if !f.x_min.is_finite() {
            f = Frame {
                x_min: 0.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
            };
        }
        if f.x_max - f.x_min < 1e-12 {
            f.x_max = f.x_min + 1.0;
        }
        if f.y_max - f.y_min < 1e-12 {
            f.y_max = f.y_min + 1.0;
        }
        f
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let x0 = MARGIN;
    let x1 = WIDTH - MARGIN;
    let y0 = HEIGHT - MARGIN;
    let y1 = MARGIN;
    let _ = write!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let px = frame.px(xv);
        let py = frame.py(yv);
        let _ = write!(
            s,
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>\n\
             <line x1=\"{x0}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>\n",
            y0 + 5.0,
            y0 + 20.0,
            xv,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            yv
        );
    }
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{x_label}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {})\">{y_label}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 14.0,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    s
}

/// Multi-series line/scatter chart with an optional horizontal reference
/// line.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<[f64; 2]>)],
    hline: Option<(f64, &str)>,
    scatter: bool,
) -> String {
    let mut all = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().copied())
        .collect::<Vec<_>>();
    if let Some((y, _)) = hline {
        let x = all.first().map_or(0.0, |p| p[0]);
        all.push([x, y]);
    }
    let frame = Frame::around(all.into_iter());
    let mut svg = svg_open(title);
    svg.push_str(&axes(&frame, x_label, y_label));

    if let Some((y, label)) = hline {
        let py = frame.py(y);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">{label} = {y:.4}</text>\n",
            MARGIN,
            WIDTH - MARGIN,
            WIDTH - MARGIN - 4.0,
            py - 5.0
        );
    }

    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if scatter {
            for p in pts {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>",
                    frame.px(p[0]),
                    frame.py(p[1])
                );
            }
        } else if !pts.is_empty() {
            let path: Vec<String> = pts
                .iter()
                .map(|p| format!("{},{}", frame.px(p[0]), frame.py(p[1])))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                path.join(" ")
            );
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = write!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{name}</text>\n",
            WIDTH - MARGIN - 150.0,
            ly,
            WIDTH - MARGIN - 132.0,
            ly + 10.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn ramp(t: f64) -> String {
    // Dark blue -> teal -> yellow.
    let t = t.clamp(0.0, 1.0);
    let stops = [
        (68.0, 1.0, 84.0),
        (33.0, 145.0, 140.0),
        (253.0, 231.0, 37.0),
    ];
    let (lo, hi, f) = if t < 0.5 {
        (stops[0], stops[1], t * 2.0)
    } else {
        (stops[1], stops[2], (t - 0.5) * 2.0)
    };
    format!(
        "rgb({},{},{})",
        (lo.0 + (hi.0 - lo.0) * f) as u8,
        (lo.1 + (hi.1 - lo.1) * f) as u8,
        (lo.2 + (hi.2 - lo.2) * f) as u8
    )
}

/// Heatmap of a dense matrix; values are scaled to the observed range.
pub fn heatmap(title: &str, matrix: &[Vec<f64>]) -> String {
    let rows = matrix.len().max(1);
    let cols = matrix.first().map_or(1, Vec::len).max(1);
    let lo = matrix
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = matrix
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let cell_w = (WIDTH - 2.0 * MARGIN) / cols as f64;
    let cell_h = (HEIGHT - 2.0 * MARGIN) / rows as f64;
    let mut svg = svg_open(title);
    for (r, row) in matrix.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            // Row 0 at the bottom: matrix rows index the y axis upward.
            let x = MARGIN + c as f64 * cell_w;
            let y = HEIGHT - MARGIN - (r + 1) as f64 * cell_h;
            let _ = writeln!(
                svg,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                cell_w + 0.5,
                cell_h + 0.5,
                ramp((v - lo) / span)
            );
        }
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">min {lo:.4}  max {hi:.4}</text>",
        MARGIN,
        HEIGHT - 20.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn missing(dir: &Path, what: &str) -> Error {
    Error::MissingSeries {
        path: dir.display().to_string(),
        what: what.to_string(),
    }
}

fn modes_in_archive(dir: &Path) -> Result<Vec<String>> {
    let table = read_csv(&dir.join("indicators.csv"))
        .map_err(|_| missing(dir, "indicators.csv (run an experiment first)"))?;
    let mut modes: Vec<String> = table.iter().skip(1).map(|row| row[1].clone()).collect();
    modes.dedup();
    let mut seen = std::collections::BTreeSet::new();
    modes.retain(|m| seen.insert(m.clone()));
    if modes.is_empty() {
        return Err(missing(dir, "at least one completed run"));
    }
    Ok(modes)
}

/// Emits the requested plot kind from `archive_dir` into `out_dir`,
/// returning every file written (SVGs and their data series).
pub fn emit_plots(archive_dir: &Path, kind: PlotKind, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    match kind {
        PlotKind::Ratio => {
            let rows = read_csv(&archive_dir.join("ratio.csv")).map_err(|_| {
                missing(archive_dir, "ratio.csv (produced by `searchtrack certify`)")
            })?;
            if rows.len() < 2 {
                return Err(missing(archive_dir, "certification instances in ratio.csv"));
            }
            // One series per team size.
            let mut by_agents: std::collections::BTreeMap<String, Vec<[f64; 2]>> =
                Default::default();
            for row in rows.iter().skip(1) {
                let agents = row[1].clone();
                let instance: f64 = row[2].parse().unwrap_or(0.0);
                let ratio: f64 = row[3].parse().unwrap_or(f64::NAN);
                by_agents.entry(agents).or_default().push([instance, ratio]);
            }
            let series: Vec<(String, Vec<[f64; 2]>)> = by_agents
                .into_iter()
                .map(|(agents, pts)| (format!("S = {agents}"), pts))
                .collect();
            let bound = 1.0 - 1.0 / std::f64::consts::E;
            let svg = line_chart(
                "Greedy / exhaustive value ratio",
                "instance",
                "ratio",
                &series,
                Some((bound, "1 - 1/e")),
                true,
            );
            let svg_path = out_dir.join("ratio.svg");
            write_file(&svg_path, &svg)?;
            let mut data = String::from("series,instance,ratio\n");
            for (name, pts) in &series {
                for p in pts {
                    let _ = writeln!(data, "{name},{},{}", p[0], p[1]);
                }
            }
            let data_path = out_dir.join("ratio_data.csv");
            write_file(&data_path, &data)?;
            written.extend([svg_path, data_path]);
        }
        PlotKind::Trajectories => {
            for mode in modes_in_archive(archive_dir)? {
                let files = run_files(archive_dir, "trajectories", "traj", &mode)?;
                let file = files.first().ok_or_else(|| {
                    missing(archive_dir, &format!("trajectories for mode {mode}"))
                })?;
                let rows = read_csv(file)?;
                let mut series: std::collections::BTreeMap<String, Vec<[f64; 2]>> =
                    Default::default();
                for row in rows.iter().skip(1) {
                    let key = format!("{} {}", row[1], row[2]);
                    let x: f64 = row[3].parse().unwrap_or(f64::NAN);
                    let y: f64 = row[4].parse().unwrap_or(f64::NAN);
                    series.entry(key).or_default().push([x, y]);
                }
                let series: Vec<(String, Vec<[f64; 2]>)> = series.into_iter().collect();
                let svg = line_chart(
                    &format!("Trajectories ({mode})"),
                    "x (m)",
                    "y (m)",
                    &series,
                    None,
                    false,
                );
                let svg_path = out_dir.join(format!("trajectories_{mode}.svg"));
                write_file(&svg_path, &svg)?;
                let data_path = out_dir.join(format!("trajectories_{mode}_data.csv"));
                write_file(&data_path, &read_file(file)?)?;
                written.extend([svg_path, data_path]);
            }
        }
        PlotKind::Heatmap => {
            for mode in modes_in_archive(archive_dir)? {
                let files = run_files(archive_dir, "grids", "grid", &mode)?;
                let file = files.first().ok_or_else(|| {
                    missing(archive_dir, &format!("grid snapshot for mode {mode}"))
                })?;
                let matrix = read_grid(file)?;
                let svg = heatmap(&format!("Occupancy grid ({mode})"), &matrix);
                let svg_path = out_dir.join(format!("heatmap_{mode}.svg"));
                write_file(&svg_path, &svg)?;
                // The data series is the matrix itself, re-emitted verbatim.
                let data_path = out_dir.join(format!("heatmap_{mode}_data.csv"));
                let rows = matrix.len();
                let cols = matrix.first().map_or(0, Vec::len);
                let flat: Vec<f64> = matrix.into_iter().flatten().collect();
                write_file(&data_path, &grid_csv(rows, cols, &flat))?;
                written.extend([svg_path, data_path]);
            }
        }
        PlotKind::Entropy => {
            let mut series = Vec::new();
            let mut data = String::from("mode,step,mean_search_entropy\n");
            for mode in modes_in_archive(archive_dir)? {
                let files = run_files(archive_dir, "runs", "run", &mode)?;
                if files.is_empty() {
                    return Err(missing(
                        archive_dir,
                        &format!("run records for mode {mode}"),
                    ));
                }
                // Mean per step across seeds.
                let mut sums: Vec<(f64, usize)> = Vec::new();
                for file in &files {
                    for (i, row) in read_csv(file)?.iter().skip(1).enumerate() {
                        let v: f64 = row[6].parse().unwrap_or(f64::NAN);
                        if sums.len() <= i {
                            sums.push((0.0, 0));
                        }
                        sums[i].0 += v;
                        sums[i].1 += 1;
                    }
                }
                let pts: Vec<[f64; 2]> = sums
                    .iter()
                    .enumerate()
                    .map(|(i, (s, n))| [(i + 1) as f64, s / *n as f64])
                    .collect();
                for p in &pts {
                    let _ = writeln!(data, "{mode},{},{}", p[0], p[1]);
                }
                series.push((mode, pts));
            }
            let svg = line_chart(
                "Search area entropy",
                "step",
                "entropy (nats/cell)",
                &series,
                None,
                false,
            );
            let svg_path = out_dir.join("entropy.svg");
            write_file(&svg_path, &svg)?;
            let data_path = out_dir.join("entropy_data.csv");
            write_file(&data_path, &data)?;
            written.extend([svg_path, data_path]);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_contains_reference_line_value() {
        let bound = 1.0 - 1.0 / std::f64::consts::E;
        let svg = line_chart(
            "t",
            "x",
            "y",
            &[("a".into(), vec![[0.0, 0.9], [1.0, 1.0]])],
            Some((bound, "1 - 1/e")),
            true,
        );
        assert!(svg.contains("0.6321"), "missing bound annotation");
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn heatmap_renders_every_cell() {
        let m = vec![vec![0.0, 0.5], vec![0.25, 1.0]];
        let svg = heatmap("h", &m);
        assert_eq!(svg.matches("<rect").count(), 1 + 4); // background + cells
    }

    #[test]
    fn empty_archive_is_an_explicit_error() {
        let dir = std::env::temp_dir().join(format!("st_plot_none_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let err = emit_plots(&dir, PlotKind::Ratio, &dir.join("plots")).unwrap_err();
        assert!(err.to_string().contains("ratio.csv"), "{err}");
        assert!(!dir.join("plots/ratio.svg").exists());
        std::fs::remove_dir_all(&dir).ok();
    }
}
