//! Multi-object performance metrics.
//!
//! The optimal sub-pattern assignment (OSPA) distance between the true and
//! estimated object sets, decomposed into localisation and cardinality
//! components, plus per-run records and their aggregation into the indicator
//! table columns.

use crate::model::AgentPose;
use crate::rewards::ValueBreakdown;

/// OSPA order and cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaParams {
    /// Order `p ≥ 1`.
    pub order: f64,
    /// Cutoff `c > 0`, metres.
    pub cutoff: f64,
}

impl Default for OspaParams {
    fn default() -> Self {
        Self {
            order: 1.0,
            cutoff: 100.0,
        }
    }
}

/// The OSPA distance and its decomposition. For order 1 the distance is
/// exactly the sum of the two components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OspaComponents {
    pub dist: f64,
    pub loc: f64,
    pub card: f64,
}

/// Minimum-cost assignment of rows to distinct columns for a rectangular
/// cost matrix with `rows ≤ cols`; returns the assigned column per row.
///
/// Shortest-augmenting-path algorithm with potentials, O(rows²·cols).
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n_rows = cost.len();
    if n_rows == 0 {
        return Vec::new();
    }
    let n_cols = cost[0].len();
    assert!(n_rows <= n_cols, "assignment needs rows <= cols");

    // 1-based internal arrays; column 0 is the virtual root.
    let mut row_potential = vec![0.0f64; n_rows + 1];
    let mut col_potential = vec![0.0f64; n_cols + 1];
    // Row assigned to each column (0 = unassigned).
    let mut assigned_row = vec![0usize; n_cols + 1];

    for row in 1..=n_rows {
        assigned_row[0] = row;
        let mut current_col = 0usize;
        let mut min_to = vec![f64::INFINITY; n_cols + 1];
        let mut previous = vec![0usize; n_cols + 1];
        let mut visited = vec![false; n_cols + 1];

        loop {
            visited[current_col] = true;
            let active_row = assigned_row[current_col];
            let mut delta = f64::INFINITY;
            let mut next_col = 0usize;
            for col in 1..=n_cols {
                if visited[col] {
                    continue;
                }
                let reduced =
                    cost[active_row - 1][col - 1] - row_potential[active_row] - col_potential[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    previous[col] = current_col;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    next_col = col;
                }
            }
            for col in 0..=n_cols {
                if visited[col] {
                    row_potential[assigned_row[col]] += delta;
                    col_potential[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            current_col = next_col;
            if assigned_row[current_col] == 0 {
                break;
            }
        }

        // Augment along the found path.
        while current_col != 0 {
            let prev = previous[current_col];
            assigned_row[current_col] = assigned_row[prev];
            current_col = prev;
        }
    }

    let mut result = vec![usize::MAX; n_rows];
    for col in 1..=n_cols {
        if assigned_row[col] > 0 {
            result[assigned_row[col] - 1] = col - 1;
        }
    }
    debug_assert!(result.iter().all(|&c| c != usize::MAX));
    result
}

fn euclidean(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// OSPA distance between two finite planar point sets, with its
/// localisation and cardinality components. Symmetric by construction; two
/// empty sets are at distance zero.
pub fn ospa(truth: &[[f64; 2]], estimate: &[[f64; 2]], params: &OspaParams) -> OspaComponents {
    let (small, large) = if truth.len() <= estimate.len() {
        (truth, estimate)
    } else {
        (estimate, truth)
    };
    let m = small.len();
    let n = large.len();
    if n == 0 {
        return OspaComponents::default();
    }
    let p = params.order;
    let c = params.cutoff;

    let loc_sum = if m == 0 {
        0.0
    } else {
        let cost: Vec<Vec<f64>> = small
            .iter()
            .map(|&x| {
                large
                    .iter()
                    .map(|&y| euclidean(x, y).min(c).powf(p))
                    .collect()
            })
            .collect();
        let assignment = min_cost_assignment(&cost);
        assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| cost[i][j])
            .sum()
    };

    let card_sum = c.powf(p) * (n - m) as f64;
    let nf = n as f64;
    OspaComponents {
        dist: ((loc_sum + card_sum) / nf).powf(1.0 / p),
        loc: (loc_sum / nf).powf(1.0 / p),
        card: (card_sum / nf).powf(1.0 / p),
    }
}

/// Everything recorded about one closed-loop timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub step: usize,
    pub truth_positions: Vec<[f64; 2]>,
    pub estimate_positions: Vec<[f64; 2]>,
    pub ospa: OspaComponents,
    /// Per-cell average grid entropy, nats.
    pub search_entropy: f64,
    pub agent_poses: Vec<AgentPose>,
    /// Chosen action index per agent.
    pub actions: Vec<usize>,
    pub value: ValueBreakdown,
    pub bound_ratio: Option<f64>,
    pub track_count: usize,
}

/// Time-averaged indicators of one run: the four indicator-table columns.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSummary {
    pub ospa_dist: f64,
    pub ospa_loc: f64,
    pub ospa_card: f64,
    pub search_entropy: f64,
}

/// Averages the per-step indicators over a complete run.
pub fn aggregate_run(records: &[RunRecord]) -> RunSummary {
    if records.is_empty() {
        return RunSummary::default();
    }
    let n = records.len() as f64;
    RunSummary {
        ospa_dist: records.iter().map(|r| r.ospa.dist).sum::<f64>() / n,
        ospa_loc: records.iter().map(|r| r.ospa.loc).sum::<f64>() / n,
        ospa_card: records.iter().map(|r| r.ospa.card).sum::<f64>() / n,
        search_entropy: records.iter().map(|r| r.search_entropy).sum::<f64>() / n,
    }
}

/// Sample mean and standard error of a Monte-Carlo indicator series.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn params(p: f64, c: f64) -> OspaParams {
        OspaParams {
            order: p,
            cutoff: c,
        }
    }

    /// Brute-force OSPA by enumerating all injective assignments.
    fn ospa_brute(truth: &[[f64; 2]], estimate: &[[f64; 2]], pr: &OspaParams) -> OspaComponents {
        let (small, large) = if truth.len() <= estimate.len() {
            (truth, estimate)
        } else {
            (estimate, truth)
        };
        let m = small.len();
        let n = large.len();
        if n == 0 {
            return OspaComponents::default();
        }
        fn permutations(n: usize, k: usize) -> Vec<Vec<usize>> {
            fn rec(remaining: &[usize], k: usize) -> Vec<Vec<usize>> {
                if k == 0 {
                    return vec![Vec::new()];
                }
                let mut out = Vec::new();
                for (i, &v) in remaining.iter().enumerate() {
                    let mut rest: Vec<usize> = remaining.to_vec();
                    rest.remove(i);
                    for mut tail in rec(&rest, k - 1) {
                        let mut head = vec![v];
                        head.append(&mut tail);
                        out.push(head);
                    }
                }
                out
            }
            rec(&(0..n).collect::<Vec<_>>(), k)
        }
        let best = permutations(n, m)
            .into_iter()
            .map(|perm| {
                perm.iter()
                    .enumerate()
                    .map(|(i, &j)| euclidean(small[i], large[j]).min(pr.cutoff).powf(pr.order))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let loc_sum = if m == 0 { 0.0 } else { best };
        let card_sum = pr.cutoff.powf(pr.order) * (n - m) as f64;
        let nf = n as f64;
        OspaComponents {
            dist: ((loc_sum + card_sum) / nf).powf(1.0 / pr.order),
            loc: (loc_sum / nf).powf(1.0 / pr.order),
            card: (card_sum / nf).powf(1.0 / pr.order),
        }
    }

    #[test]
    fn identical_sets_are_at_distance_zero() {
        let pts = vec![[1.0, 2.0], [3.0, 4.0]];
        let out = ospa(&pts, &pts, &params(1.0, 100.0));
        assert_eq!(
            out,
            OspaComponents {
                dist: 0.0,
                loc: 0.0,
                card: 0.0
            }
        );
    }

    #[test]
    fn both_empty_by_convention_zero() {
        let out = ospa(&[], &[], &params(1.0, 100.0));
        assert_eq!(out, OspaComponents::default());
    }

    #[test]
    fn cardinality_mismatch_hand_value() {
        let out = ospa(
            &[[0.0, 0.0]],
            &[[0.0, 0.0], [300.0, 0.0]],
            &params(1.0, 100.0),
        );
        assert!((out.dist - 50.0).abs() < 1e-12);
        assert!(out.loc.abs() < 1e-12);
        assert!((out.card - 50.0).abs() < 1e-12);
    }

    #[test]
    fn localisation_hand_value() {
        let out = ospa(&[[0.0, 0.0]], &[[30.0, 40.0]], &params(1.0, 100.0));
        assert!((out.dist - 50.0).abs() < 1e-12);
        assert!((out.loc - 50.0).abs() < 1e-12);
        assert!(out.card.abs() < 1e-12);
    }

    #[test]
    fn assignment_solver_matches_permutation_enumeration() {
        let mut rng = crate::rng::StreamTree::new(31).rng();
        let pr_list = [params(1.0, 100.0), params(2.0, 50.0)];
        for trial in 0..200 {
            let pr = &pr_list[trial % 2];
            let m = rng.gen_range(0..=6);
            let n = rng.gen_range(0..=6);
            let gen_set = |rng: &mut rand_chacha::ChaCha12Rng, k: usize| -> Vec<[f64; 2]> {
                (0..k)
                    .map(|_| [rng.gen_range(-200.0..200.0), rng.gen_range(-200.0..200.0)])
                    .collect()
            };
            let x = gen_set(&mut rng, m);
            let y = gen_set(&mut rng, n);
            let fast = ospa(&x, &y, pr);
            let brute = ospa_brute(&x, &y, pr);
            assert!((fast.dist - brute.dist).abs() < 1e-9, "trial {trial}");
            assert!((fast.loc - brute.loc).abs() < 1e-9);
            assert!((fast.card - brute.card).abs() < 1e-9);
        }
    }

    #[test]
    fn order_one_distance_is_loc_plus_card() {
        let mut rng = crate::rng::StreamTree::new(32).rng();
        for _ in 0..100 {
            let m = rng.gen_range(0..=5);
            let n = rng.gen_range(0..=5);
            let x: Vec<[f64; 2]> = (0..m)
                .map(|_| [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)])
                .collect();
            let y: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)])
                .collect();
            let out = ospa(&x, &y, &params(1.0, 100.0));
            assert!((out.dist - (out.loc + out.card)).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = crate::rng::StreamTree::new(33).rng();
        let pr = params(1.0, 100.0);
        for _ in 0..150 {
            let gen_set = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<[f64; 2]> {
                let k = rng.gen_range(0..=5);
                (0..k)
                    .map(|_| [rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)])
                    .collect()
            };
            let a = gen_set(&mut rng);
            let b = gen_set(&mut rng);
            let c = gen_set(&mut rng);
            let dab = ospa(&a, &b, &pr).dist;
            let dba = ospa(&b, &a, &pr).dist;
            assert!((dab - dba).abs() < 1e-9, "symmetry");
            assert!(ospa(&a, &a, &pr).dist.abs() < 1e-12, "identity");
            let dac = ospa(&a, &c, &pr).dist;
            let dcb = ospa(&c, &b, &pr).dist;
            assert!(dab <= dac + dcb + 1e-9, "triangle: {dab} > {dac} + {dcb}");
        }
    }

    #[test]
    fn hungarian_known_matrix() {
        let cost = vec![
            vec![8.0, 5.0, 9.0],
            vec![4.0, 2.0, 4.0],
            vec![7.0, 3.0, 8.0],
        ];
        let assignment = min_cost_assignment(&cost);
        let total: f64 = assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| cost[i][j])
            .sum();
        assert!((total - 15.0).abs() < 1e-12);
        assert_eq!(assignment, vec![0, 2, 1]);
    }

    #[test]
    fn aggregate_single_record_is_identity() {
        let rec = RunRecord {
            step: 1,
            truth_positions: vec![],
            estimate_positions: vec![],
            ospa: OspaComponents {
                dist: 12.0,
                loc: 4.0,
                card: 8.0,
            },
            search_entropy: 0.3,
            agent_poses: vec![],
            actions: vec![],
            value: ValueBreakdown::default(),
            bound_ratio: None,
            track_count: 0,
        };
        let s = aggregate_run(&[rec]);
        assert_eq!(s.ospa_dist, 12.0);
        assert_eq!(s.ospa_loc, 4.0);
        assert_eq!(s.ospa_card, 8.0);
        assert_eq!(s.search_entropy, 0.3);
    }

    #[test]
    fn aggregate_means() {
        let mk = |d: f64| RunRecord {
            step: 0,
            truth_positions: vec![],
            estimate_positions: vec![],
            ospa: OspaComponents {
                dist: d,
                loc: 0.0,
                card: d,
            },
            search_entropy: std::f64::consts::LN_2,
            agent_poses: vec![],
            actions: vec![],
            value: ValueBreakdown::default(),
            bound_ratio: None,
            track_count: 0,
        };
        let s = aggregate_run(&[mk(10.0), mk(30.0)]);
        assert!((s.ospa_dist - 20.0).abs() < 1e-12);
        assert!((s.search_entropy - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn stderr_of_constant_series_is_zero() {
        let (mean, se) = mean_and_stderr(&[5.0, 5.0, 5.0]);
        assert_eq!(mean, 5.0);
        assert_eq!(se, 0.0);
        let (mean, se) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(mean, 2.0);
        assert!((se - 1.0).abs() < 1e-12);
    }
}
