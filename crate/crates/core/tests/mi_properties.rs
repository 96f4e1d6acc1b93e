//! Monotonicity and diminishing returns of the mutual information driving
//! both value functions, verified by brute-force enumeration on small
//! discrete instances.
//!
//! An instance is a Bernoulli object over a handful of discrete states plus
//! up to four conditionally independent measurement channels with finite
//! outcome alphabets. The Bernoulli-set entropy used by the planner is the
//! Shannon entropy of the discrete variable {absent} ∪ {present at x_i}, so
//! the exact mutual information computed here obeys the submodularity and
//! monotonicity inequalities; the suite checks them over random instances
//! and random chains Z₁ ⊆ Z₂ with an extra channel z.
//!
//! The occupancy-grid case is the one-state special case of the same
//! machinery (detect/empty channels over a single Bernoulli cell).

use rand::Rng;
use searchtrack_core::rng::StreamTree;

/// One measurement channel: detection probability plus per-state outcome
/// distribution over a small alphabet.
struct Channel {
    p_d: f64,
    /// `emit[state][symbol]`: probability of emitting `symbol` when the
    /// object is present at `state` and detected. Rows sum to 1.
    emit: Vec<Vec<f64>>,
}

struct Instance {
    /// Existence probability.
    r: f64,
    /// Spatial distribution over discrete states, sums to 1.
    p: Vec<f64>,
    channels: Vec<Channel>,
}

/// Entropy of the discrete variable {absent} ∪ {(present, state)}.
fn bernoulli_set_entropy(r: f64, p: &[f64]) -> f64 {
    let mut h = 0.0;
    if r < 1.0 {
        h -= (1.0 - r) * (1.0 - r).ln();
    }
    for &w in p {
        let q = r * w;
        if q > 0.0 {
            h -= q * q.ln();
        }
    }
    h
}

/// Exact mutual information between the object and the joint outcome of the
/// channel subset `mask`, by enumerating every outcome tuple.
fn mutual_information(inst: &Instance, mask: u32) -> f64 {
    let channels: Vec<&Channel> = inst
        .channels
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, c)| c)
        .collect();
    let prior_h = bernoulli_set_entropy(inst.r, &inst.p);
    if channels.is_empty() {
        return 0.0;
    }
    // Outcome per channel: 0 = empty, 1..=alphabet = symbols.
    let radices: Vec<usize> = channels.iter().map(|c| c.emit[0].len() + 1).collect();
    let total: usize = radices.iter().product();

    let mut conditional_h = 0.0;
    for outcome_idx in 0..total {
        let mut digits = Vec::with_capacity(channels.len());
        let mut rest = outcome_idx;
        for &radix in &radices {
            digits.push(rest % radix);
            rest /= radix;
        }
        // Likelihood of this outcome tuple for the absent hypothesis and for
        // each present-state hypothesis.
        let mut like_absent = 1.0;
        for &d in &digits {
            if d != 0 {
                like_absent = 0.0;
                break;
            }
        }
        let like_present: Vec<f64> = (0..inst.p.len())
            .map(|state| {
                channels
                    .iter()
                    .zip(&digits)
                    .map(|(c, &d)| {
                        if d == 0 {
                            1.0 - c.p_d
                        } else {
                            c.p_d * c.emit[state][d - 1]
                        }
                    })
                    .product()
            })
            .collect();

        let joint_present: f64 = inst
            .p
            .iter()
            .zip(&like_present)
            .map(|(w, l)| inst.r * w * l)
            .sum();
        let prob = (1.0 - inst.r) * like_absent + joint_present;
        if prob <= 0.0 {
            continue;
        }
        let r_post = joint_present / prob;
        let w_post: Vec<f64> = if joint_present > 0.0 {
            inst.p
                .iter()
                .zip(&like_present)
                .map(|(w, l)| inst.r * w * l / joint_present)
                .collect()
        } else {
            inst.p.clone()
        };
        conditional_h += prob * bernoulli_set_entropy(r_post, &w_post);
    }
    prior_h - conditional_h
}

fn random_instance(rng: &mut impl Rng, max_states: usize) -> Instance {
    let n_states = rng.gen_range(1..=max_states);
    let raw: Vec<f64> = (0..n_states).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let p = raw.iter().map(|w| w / total).collect();
    let n_channels = rng.gen_range(2..=4);
    let alphabet = rng.gen_range(1..=2);
    let channels = (0..n_channels)
        .map(|_| {
            let emit = (0..n_states)
                .map(|_| {
                    let raw: Vec<f64> = (0..alphabet).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let t: f64 = raw.iter().sum();
                    raw.iter().map(|g| g / t).collect()
                })
                .collect();
            Channel {
                p_d: rng.gen_range(0.05..0.95),
                emit,
            }
        })
        .collect();
    Instance {
        r: rng.gen_range(0.02..0.98),
        p,
        channels,
    }
}

/// Random chain Z₁ ⊆ Z₂ over the instance's channels plus an extra channel
/// outside Z₂. Returns (mask1, mask2, extra_bit).
fn random_chain(rng: &mut impl Rng, n_channels: usize) -> (u32, u32, u32) {
    loop {
        let z2: u32 = rng.gen_range(0..(1u32 << n_channels));
        let extra_candidates: Vec<u32> = (0..n_channels as u32)
            .filter(|b| z2 & (1 << b) == 0)
            .collect();
        if extra_candidates.is_empty() {
            continue;
        }
        let extra = 1 << extra_candidates[rng.gen_range(0..extra_candidates.len())];
        // Z1: random subset of Z2.
        let keep: u32 = rng.gen();
        let z1 = z2 & keep;
        return (z1, z2, extra);
    }
}

fn check_properties(label: &str, max_states: usize, seed: u64, instances: usize) {
    let mut rng = StreamTree::new(seed).rng();
    let tol = 1e-9;
    for trial in 0..instances {
        let inst = random_instance(&mut rng, max_states);
        let (z1, z2, extra) = random_chain(&mut rng, inst.channels.len());

        let i1 = mutual_information(&inst, z1);
        let i2 = mutual_information(&inst, z2);
        let i1x = mutual_information(&inst, z1 | extra);
        let i2x = mutual_information(&inst, z2 | extra);

        // Monotonicity: adding a channel never loses information.
        assert!(
            i1x >= i1 - tol && i2x >= i2 - tol,
            "{label} trial {trial}: monotonicity violated ({i1} -> {i1x}, {i2} -> {i2x})"
        );
        // Diminishing returns: the marginal gain of the extra channel
        // shrinks as the conditioning set grows.
        assert!(
            i2x - i2 <= i1x - i1 + tol,
            "{label} trial {trial}: submodularity violated ({} > {})",
            i2x - i2,
            i1x - i1
        );
        // Nested sets themselves are ordered.
        assert!(i2 >= i1 - tol, "{label} trial {trial}: I(Z2) < I(Z1)");
    }
}

#[test]
fn track_mutual_information_is_monotone_submodular() {
    check_properties("track", 8, 1001, 1000);
}

#[test]
fn grid_mutual_information_is_monotone_submodular() {
    // One-state instances: exactly the per-cell occupancy case.
    check_properties("grid", 1, 2002, 1000);
}

#[test]
fn hand_checked_single_channel_value() {
    // One cell at r = 1/2 observed by one perfect-emission channel with
    // p_d = 1/2: outcomes are {detect: p = 1/4, empty: p = 3/4}, posterior
    // existence 0 and 1/3, so I = ln2 − 0.75·H(1/3).
    let inst = Instance {
        r: 0.5,
        p: vec![1.0],
        channels: vec![Channel {
            p_d: 0.5,
            emit: vec![vec![1.0]],
        }],
    };
    let i = mutual_information(&inst, 1);
    let h_third = bernoulli_set_entropy(1.0 / 3.0, &[1.0]);
    let expected = std::f64::consts::LN_2 - 0.75 * h_third;
    assert!((i - expected).abs() < 1e-12, "{i} vs {expected}");
}
