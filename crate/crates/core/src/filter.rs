//! Bank of per-identity Bernoulli particle filters.
//!
//! Each uniquely identified object is tracked by its own Bernoulli filter
//! carrying an existence probability `r` and a particle cloud. Prediction
//! mixes birth and survival; the update composes one Bayes operator per agent
//! in ascending agent order:
//!
//! * existence: `r ← ⟨η,p⟩·r / [(1−r)·e^{−λ} + r·⟨η,p⟩]`
//! * weights:   `w ← η(x)·w`, renormalised
//!
//! where `η` is `1 − p_d(x)` for an empty channel and `p_d(x)·ĝ(z|x)` for a
//! detection. `ĝ` is the measurement likelihood relative to the uniform
//! density over the sensor's observation window (see
//! [`crate::sensing::likelihood_ratio`]); expressing it as a dimensionless
//! ratio keeps the inner product commensurable with the `e^{−λ}` term, which
//! a raw density is not.
//!
//! Track lifecycle: a measurement on an identity with no live track spawns a
//! new track; tracks whose existence drops below the prune threshold are
//! removed; survivors are resampled once per timestep.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::{
    normalize_in_place, AgentPose, BernoulliTrack, Kinematics, Label, Measurement, MeasurementSet,
    Particle,
};
use crate::par;
use crate::rng::StreamTree;
use crate::sensing::{
    detection_probability, invert_measurement, likelihood_ratio, sensor_distance, CvModel,
    SensorKind, SensorModel,
};

/// Object birth model: appearance probability plus the birth density that is
/// sampled into particles.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthModel {
    /// Birth probability r_B per step, in (0, 1).
    pub prob: f64,
    pub density: BirthDensity,
}

/// Spatial density of newborn objects.
#[derive(Debug, Clone, PartialEq)]
pub enum BirthDensity {
    /// Axis-aligned Gaussian over `[p_x, v_x, p_y, v_y]`.
    Gaussian {
        mean: Kinematics,
        /// Per-component variances.
        var: [f64; 4],
    },
    /// Fixed weighted support; makes prediction deterministic, used for
    /// discretised state spaces.
    Atoms(Vec<(Kinematics, f64)>),
}

impl BirthDensity {
    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Kinematics> {
        match self {
            BirthDensity::Gaussian { mean, var } => {
                let sd = var.map(f64::sqrt);
                (0..n)
                    .map(|_| {
                        let m = mean.to_array();
                        let mut a = [0.0; 4];
                        for i in 0..4 {
                            let z: f64 = rng.sample(StandardNormal);
                            a[i] = m[i] + sd[i] * z;
                        }
                        Kinematics::from_array(a)
                    })
                    .collect()
            }
            BirthDensity::Atoms(atoms) => atoms.iter().map(|(k, _)| *k).collect(),
        }
    }

    /// Log density of the positional marginal (velocity components excluded).
    fn log_pdf_position(&self, position: [f64; 2]) -> f64 {
        match self {
            BirthDensity::Gaussian { mean, var } => {
                let terms = [
                    (position[0] - mean.px, var[0]),
                    (position[1] - mean.py, var[2]),
                ];
                terms
                    .iter()
                    .map(|&(d, v)| -0.5 * d * d / v - 0.5 * (2.0 * std::f64::consts::PI * v).ln())
                    .sum()
            }
            BirthDensity::Atoms(_) => 0.0,
        }
    }
}

/// Static configuration of the filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterParams {
    pub birth: BirthModel,
    /// Survival probability p_S per step.
    pub survival_prob: f64,
    pub motion: CvModel,
    /// Tracks with existence below this are removed.
    pub prune_threshold: f64,
    /// Particle budget N_s per track after resampling.
    pub particles_per_track: usize,
}

/// One Bernoulli filter per live identity.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub params: FilterParams,
    pub tracks: BTreeMap<Label, BernoulliTrack>,
}

impl FilterBank {
    pub fn new(params: FilterParams) -> Self {
        Self {
            params,
            tracks: BTreeMap::new(),
        }
    }

    /// Tracks in ascending label order.
    pub fn tracks_sorted(&self) -> Vec<&BernoulliTrack> {
        self.tracks.values().collect()
    }
}

/// Predicted existence probability `r_B(1−r) + r·p_S` together with the
/// mixture weights of the birth and survival components.
#[inline]
pub fn predict_existence(r: f64, birth_prob: f64, survival_prob: f64) -> (f64, f64, f64) {
    let r_pred = birth_prob * (1.0 - r) + r * survival_prob;
    if r_pred <= 0.0 {
        return (0.0, 1.0, 0.0);
    }
    let w_birth = birth_prob * (1.0 - r) / r_pred;
    let w_survive = r * survival_prob / r_pred;
    (r_pred, w_birth, w_survive)
}

/// Prediction step: existence through the birth/survival recursion, particle
/// cloud becomes the mixture of motion-propagated survivors and fresh birth
/// samples, weighted by the mixture proportions.
///
/// At least one birth particle is always injected so rebirth of a vanished
/// object stays representable.
pub fn predict_track<R: Rng + ?Sized>(
    track: &BernoulliTrack,
    birth: &BirthModel,
    survival_prob: f64,
    motion: &CvModel,
    rng: &mut R,
) -> BernoulliTrack {
    let (r_pred, w_birth, w_survive) = predict_existence(track.r, birth.prob, survival_prob);

    let mut particles: Vec<Particle> = track
        .particles
        .iter()
        .map(|p| Particle {
            kin: motion.step_noisy(p.kin, rng),
            weight: p.weight * w_survive,
        })
        .collect();

    match &birth.density {
        BirthDensity::Gaussian { .. } => {
            let n_birth = ((track.particles.len() as f64 * w_birth).round() as usize).max(1);
            let w_each = w_birth / n_birth as f64;
            particles.extend(
                birth
                    .density
                    .sample(n_birth, rng)
                    .into_iter()
                    .map(|kin| Particle {
                        kin,
                        weight: w_each,
                    }),
            );
        }
        BirthDensity::Atoms(atoms) => {
            particles.extend(atoms.iter().map(|&(kin, w)| Particle {
                kin,
                weight: w * w_birth,
            }));
        }
    }

    let mut out = BernoulliTrack::new(track.label, r_pred, particles);
    if normalize_in_place(&mut out.particles, out.label).is_err() {
        // Degenerate prediction: fall back to uniform weights over the cloud.
        let n = out.particles.len() as f64;
        for p in &mut out.particles {
            p.weight = 1.0 / n;
        }
        out.r = 0.0;
    }
    out
}

/// Deterministic prediction used inside planning rollouts: the existence
/// recursion is exact, survivors propagate noiselessly, and the (at most
/// `r_B`-weighted) birth component is not sampled into particles. Rollout
/// values stay pure functions of the bank state.
pub fn predict_track_ideal(
    track: &BernoulliTrack,
    birth_prob: f64,
    survival_prob: f64,
    motion: &CvModel,
) -> BernoulliTrack {
    let (r_pred, _, _) = predict_existence(track.r, birth_prob, survival_prob);
    let particles = track
        .particles
        .iter()
        .map(|p| Particle {
            kin: motion.step(p.kin),
            weight: p.weight,
        })
        .collect();
    BernoulliTrack::new(track.label, r_pred, particles)
}

/// One agent's Bayes update of a single track. `meas` is the content of this
/// track's identity channel for that agent (`None` = missed detection).
///
/// When a detection's likelihood vanishes over the whole cloud the update is
/// degenerate: existence collapses to zero and weights reset to uniform; the
/// track is then removed by pruning.
pub fn update_track_one_agent(
    track: &BernoulliTrack,
    meas: Option<&Measurement>,
    sensor: &SensorModel,
    agent: &AgentPose,
    clutter_rate: f64,
) -> BernoulliTrack {
    let etas: Vec<f64> = track
        .particles
        .iter()
        .map(|p| {
            let p_d = detection_probability(sensor, agent, p.kin.position());
            match meas {
                None => 1.0 - p_d,
                Some(m) => p_d * likelihood_ratio(sensor, agent, m.value, &p.kin),
            }
        })
        .collect();

    let eta_bar: f64 = track
        .particles
        .iter()
        .zip(&etas)
        .map(|(p, eta)| p.weight * eta)
        .sum();

    let n = track.particles.len() as f64;
    if !eta_bar.is_finite() || eta_bar <= 0.0 {
        let particles = track
            .particles
            .iter()
            .map(|p| Particle {
                kin: p.kin,
                weight: 1.0 / n,
            })
            .collect();
        return BernoulliTrack::new(track.label, 0.0, particles);
    }

    let denom = (1.0 - track.r) * (-clutter_rate).exp() + track.r * eta_bar;
    let r_new = (eta_bar * track.r / denom).clamp(0.0, 1.0);

    let mut particles: Vec<Particle> = track
        .particles
        .iter()
        .zip(&etas)
        .map(|(p, eta)| Particle {
            kin: p.kin,
            weight: p.weight * eta,
        })
        .collect();
    // eta_bar > 0 guarantees normalisation succeeds.
    normalize_in_place(&mut particles, track.label).expect("positive weight mass");
    BernoulliTrack::new(track.label, r_new, particles)
}

/// Sequential composition of per-agent updates in ascending agent order.
/// `channels` pairs each agent's pose with its (possibly empty) measurement
/// on this track's identity.
pub fn update_track_all_agents(
    track: &BernoulliTrack,
    channels: &[(AgentPose, Option<&Measurement>)],
    sensor: &SensorModel,
    clutter_rate: f64,
) -> BernoulliTrack {
    debug_assert!(channels
        .windows(2)
        .all(|w| w[0].0.agent_id < w[1].0.agent_id));
    let mut current = track.clone();
    for (pose, meas) in channels {
        current = update_track_one_agent(&current, *meas, sensor, pose, clutter_rate);
    }
    current
}

/// Effective sample size `1 / Σ w²` of a normalised particle set.
pub fn effective_sample_size(particles: &[Particle]) -> f64 {
    let s: f64 = particles.iter().map(|p| p.weight * p.weight).sum();
    if s > 0.0 {
        1.0 / s
    } else {
        0.0
    }
}

/// Systematic resampling to `n_target` equal-weight particles, applied only
/// when the effective sample size has dropped below half the target;
/// otherwise the track is returned unchanged.
pub fn resample<R: Rng + ?Sized>(
    track: &BernoulliTrack,
    n_target: usize,
    rng: &mut R,
) -> BernoulliTrack {
    if effective_sample_size(&track.particles) >= n_target as f64 / 2.0 {
        return track.clone();
    }
    let u0: f64 = rng.gen::<f64>() / n_target as f64;
    let mut particles = Vec::with_capacity(n_target);
    let mut cumulative = track.particles[0].weight;
    let mut idx = 0;
    for i in 0..n_target {
        let u = u0 + i as f64 / n_target as f64;
        while u > cumulative && idx + 1 < track.particles.len() {
            idx += 1;
            cumulative += track.particles[idx].weight;
        }
        particles.push(Particle {
            kin: track.particles[idx].kin,
            weight: 1.0 / n_target as f64,
        });
    }
    BernoulliTrack::new(track.label, track.r, particles)
}

fn log_normal_pdf(residual: f64, sigma: f64) -> f64 {
    let z = residual / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Spawns a track for a first-seen identity from its triggering measurement.
///
/// With an atom birth density the atoms are importance-weighted by the
/// measurement likelihood directly. With a Gaussian birth density particles
/// are proposed around the inverted measurement (positions from the
/// measurement noise model, velocities from the birth marginal) and carry
/// exact importance weights `b(x)·η(z|x)/q(x)`, computed in log space. The
/// existence probability applies the standard update to the birth prior
/// `r_B`, with `⟨η, b⟩` estimated from the same importance sample.
pub fn spawn_track<R: Rng + ?Sized>(
    meas: &Measurement,
    sensor: &SensorModel,
    agent: &AgentPose,
    params: &FilterParams,
    rng: &mut R,
) -> BernoulliTrack {
    let label = meas.label;
    let r_b = params.birth.prob;
    let clutter_rate = sensor.clutter_rate;

    // (kinematics, log of b·η/q) per particle, plus the mean of b·η/q which
    // estimates ⟨η, b⟩.
    let (kins, log_weights): (Vec<Kinematics>, Vec<f64>) = match &params.birth.density {
        BirthDensity::Atoms(atoms) => atoms
            .iter()
            .map(|&(kin, w)| {
                let p_d = detection_probability(sensor, agent, kin.position());
                let eta = p_d * likelihood_ratio(sensor, agent, meas.value, &kin);
                // q = atom weights themselves, so b/q = 1 and only η remains;
                // ⟨η,b⟩ needs the atom weight back in.
                (
                    kin,
                    (eta * w).max(f64::MIN_POSITIVE).ln() - (1.0 / atoms.len() as f64).ln(),
                )
            })
            .unzip(),
        BirthDensity::Gaussian { mean, var } => {
            let n = params.particles_per_track;
            let z = meas.value;
            let z_position = invert_measurement(sensor, agent, z);
            let d_z = sensor_distance(agent, z_position);
            let [s1, s2] = sensor.noise_sigmas(d_z);
            let sd_v = [var[1].sqrt(), var[3].sqrt()];
            (0..n)
                .map(|_| {
                    let n1: f64 = rng.sample(StandardNormal);
                    let n2: f64 = rng.sample(StandardNormal);
                    let (proposed, log_q_meas) = match sensor.kind {
                        SensorKind::RangeBearing { .. } => {
                            let zs = [z[0] + s1 * n1, z[1] + s2 * n2];
                            (
                                invert_measurement(sensor, agent, zs),
                                log_normal_pdf(s1 * n1, s1) + log_normal_pdf(s2 * n2, s2),
                            )
                        }
                        SensorKind::Vision { .. } => {
                            let zs = [z[0] + s1 * n1, z[1] + s2 * n2];
                            (
                                zs,
                                log_normal_pdf(s1 * n1, s1) + log_normal_pdf(s2 * n2, s2),
                            )
                        }
                    };
                    let vx = mean.vx + sd_v[0] * rng.sample::<f64, _>(StandardNormal);
                    let vy = mean.vy + sd_v[1] * rng.sample::<f64, _>(StandardNormal);
                    let kin = Kinematics::new(proposed[0], vx, proposed[1], vy);

                    let p_d = detection_probability(sensor, agent, kin.position());
                    let eta = p_d * likelihood_ratio(sensor, agent, meas.value, &kin);
                    let log_eta = if eta > 0.0 {
                        eta.ln()
                    } else {
                        f64::NEG_INFINITY
                    };
                    // Jacobian of (bearing, slant-range) → position is 1/range.
                    let log_jacobian = match sensor.kind {
                        SensorKind::RangeBearing { .. } => {
                            -sensor_distance(agent, kin.position()).max(1e-12).ln()
                        }
                        SensorKind::Vision { .. } => 0.0,
                    };
                    let log_q = log_q_meas + log_jacobian;
                    let log_b = params.birth.density.log_pdf_position(kin.position());
                    (kin, log_b + log_eta - log_q)
                })
                .unzip()
        }
    };

    let max_lw = log_weights
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let n = kins.len() as f64;
    if !max_lw.is_finite() {
        // Likelihood vanished everywhere: dead-on-arrival track, pruned at
        // the end of the step.
        let particles = kins
            .into_iter()
            .map(|kin| Particle {
                kin,
                weight: 1.0 / n,
            })
            .collect();
        return BernoulliTrack::new(label, 0.0, particles);
    }

    let scaled: Vec<f64> = log_weights.iter().map(|lw| (lw - max_lw).exp()).collect();
    let sum_scaled: f64 = scaled.iter().sum();
    let eta_bar = max_lw.exp() * sum_scaled / n;

    let denom = (1.0 - r_b) * (-clutter_rate).exp() + r_b * eta_bar;
    let r_new = (eta_bar * r_b / denom).clamp(0.0, 1.0);

    let particles = kins
        .into_iter()
        .zip(scaled)
        .map(|(kin, s)| Particle {
            kin,
            weight: s / sum_scaled,
        })
        .collect();
    BernoulliTrack::new(label, r_new, particles)
}

/// Advances the whole bank by one timestep:
///
/// 1. existing tracks: predict, then compose all agents' channel updates;
/// 2. identities measured this step with no live track: spawn from the
///    lowest-agent measurement, then apply the remaining agents' channels;
/// 3. prune tracks below the existence threshold;
/// 4. resample survivors to the particle budget.
///
/// `stream` must be this step's filter node; every track derives its own
/// child stream from its label, so the result is independent of evaluation
/// order and thread count.
pub fn step_bank(
    bank: &FilterBank,
    measurements: &MeasurementSet,
    poses: &[AgentPose],
    sensor: &SensorModel,
    stream: &StreamTree,
) -> FilterBank {
    let params = &bank.params;
    debug_assert!(poses.windows(2).all(|w| w[0].agent_id < w[1].agent_id));

    let existing: Vec<(&Label, &BernoulliTrack)> = bank.tracks.iter().collect();
    let mut updated: Vec<BernoulliTrack> = par::map_slice(&existing, |(label, track)| {
        let mut rng = stream.child(label.0).rng();
        let predicted = predict_track(
            track,
            &params.birth,
            params.survival_prob,
            &params.motion,
            &mut rng,
        );
        let channels: Vec<(AgentPose, Option<&Measurement>)> = poses
            .iter()
            .map(|pose| (*pose, measurements.get(pose.agent_id, **label)))
            .collect();
        let mut track = update_track_all_agents(&predicted, &channels, sensor, sensor.clutter_rate);
        if track.r >= params.prune_threshold {
            track = resample(&track, params.particles_per_track, &mut rng);
        }
        track
    });

    for label in measurements.labels() {
        if bank.tracks.contains_key(&label) {
            continue;
        }
        let mut rng = stream.child(label.0).rng();
        let first = poses
            .iter()
            .find_map(|pose| measurements.get(pose.agent_id, label))
            .expect("label came from this measurement set");
        let spawn_pose = poses
            .iter()
            .find(|p| p.agent_id == first.agent_id)
            .expect("measurement from a known agent");
        let mut track = spawn_track(first, sensor, spawn_pose, params, &mut rng);
        let remaining: Vec<(AgentPose, Option<&Measurement>)> = poses
            .iter()
            .filter(|p| p.agent_id != first.agent_id)
            .map(|pose| (*pose, measurements.get(pose.agent_id, label)))
            .collect();
        track = update_track_all_agents(&track, &remaining, sensor, sensor.clutter_rate);
        if track.r >= params.prune_threshold {
            track = resample(&track, params.particles_per_track, &mut rng);
        }
        updated.push(track);
    }

    let tracks = updated
        .into_iter()
        .filter(|t| t.r >= params.prune_threshold)
        .map(|t| (t.label, t))
        .collect();
    FilterBank {
        params: params.clone(),
        tracks,
    }
}
