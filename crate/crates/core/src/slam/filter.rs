use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SlamError;
use crate::ins::OdometryIncrement;

use super::config::SlamConfig;
use super::particle::{particle_rng, Particle, ParticleOutcome};
use super::pose::Pose2D;
use super::weights::{effective_sample_ratio, estimate, normalize, resample};

/// A weight update caused by loop-closure evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopClosureEvent {
    pub step: u64,
    pub t: f64,
    pub particle: usize,
    pub n_c: usize,
    pub rms: f64,
    pub current: f64,
    pub weight_before: f64,
    pub weight_after: f64,
}

/// Per-step summary.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSummary {
    pub step: u64,
    pub t: f64,
    pub estimate: Pose2D,
    pub weight_updates: usize,
    pub max_current_coefficient: Option<f64>,
    pub ess_ratio: f64,
    pub resampled: bool,
    pub weight_sum_error: f64,
    pub min_weight: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SlamStats {
    pub steps: u64,
    pub weight_updates: u64,
    pub resamples: u64,
    pub degeneracies: u64,
}

/// Rao-Blackwellized particle filter over planar pose and terrain map.
#[derive(Clone, Debug)]
pub struct SlamFilter {
    cfg: SlamConfig,
    particles: Vec<Particle>,
    step: u64,
    distance: f64,
    stats: SlamStats,
    events: Vec<LoopClosureEvent>,
    history: Vec<StepSummary>,
}

impl SlamFilter {
    pub fn new(cfg: SlamConfig, initial: Pose2D) -> Result<Self, SlamError> {
        cfg.validate()?;
        let w = 1.0 / cfg.particles as f64;
        let particles = (0..cfg.particles).map(|_| Particle::new(initial, w, &cfg)).collect();
        Ok(Self {
            cfg,
            particles,
            step: 0,
            distance: 0.0,
            stats: SlamStats::default(),
            events: Vec::new(),
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &SlamConfig {
        &self.cfg
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn stats(&self) -> SlamStats {
        self.stats
    }

    pub fn events(&self) -> &[LoopClosureEvent] {
        &self.events
    }

    pub fn history(&self) -> &[StepSummary] {
        &self.history
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn estimate(&self) -> Pose2D {
        estimate(&self.particles)
    }

    /// The highest-weight particle (lowest index on ties).
    pub fn best_particle(&self) -> &Particle {
        let mut best = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.weight > self.particles[best].weight {
                best = i;
            }
        }
        &self.particles[best]
    }

    /// Processes one odometry increment and returns the weighted pose estimate.
    pub fn step(&mut self, inc: &OdometryIncrement) -> Pose2D {
        self.distance += inc.delta_s;
        let (cfg, step, distance) = (&self.cfg, self.step, self.distance);
        let outcomes: Vec<ParticleOutcome> = self
            .particles
            .par_iter_mut()
            .enumerate()
            .map(|(i, p)| {
                let mut rng = particle_rng(cfg.seed, i, step);
                p.step(inc, distance, cfg, &mut rng)
            })
            .collect();

        let mut updates = 0;
        for (i, o) in outcomes.iter().enumerate() {
            if let Some(ev) = &o.evidence {
                updates += 1;
                self.events.push(LoopClosureEvent {
                    step,
                    t: inc.t,
                    particle: i,
                    n_c: ev.n_c,
                    rms: ev.rms(),
                    current: ev.current,
                    weight_before: o.weight_before,
                    weight_after: self.particles[i].weight,
                });
            }
        }
        self.stats.weight_updates += updates as u64;

        let mut weights = self.weights();
        if normalize(&mut weights).is_err() {
            self.stats.degeneracies += 1;
            log::warn!("particle weights degenerated at step {step}; reset to uniform");
        }
        for (p, w) in self.particles.iter_mut().zip(&weights) {
            p.weight = *w;
        }
        let ess_ratio = effective_sample_ratio(&weights);
        let resampled = ess_ratio < self.cfg.resample_ratio;
        if resampled {
            let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x5eed_5a3b_1e00_0000);
            rng.set_stream(step);
            let old = std::mem::take(&mut self.particles);
            self.particles = resample(old, &mut rng);
            self.stats.resamples += 1;
        }
        let final_weights = self.weights();
        let sum: f64 = final_weights.iter().sum();
        let estimate = estimate(&self.particles);
        self.history.push(StepSummary {
            step,
            t: inc.t,
            estimate,
            weight_updates: updates,
            max_current_coefficient: outcomes
                .iter()
                .filter_map(|o| o.coefficient)
                .max_by(f64::total_cmp),
            ess_ratio,
            resampled,
            weight_sum_error: (sum - 1.0).abs(),
            min_weight: final_weights.iter().copied().fold(f64::INFINITY, f64::min),
        });
        self.step += 1;
        self.stats.steps += 1;
        estimate
    }
}

/// Runs the filter over an increment stream, returning `(t, pose)` per step.
pub fn run_slam(cfg: SlamConfig, initial: Pose2D, increments: &[OdometryIncrement]) -> Result<(Vec<(f64, Pose2D)>, SlamFilter), SlamError> {
    let mut filter = SlamFilter::new(cfg, initial)?;
    let traj = increments.iter().map(|inc| (inc.t, filter.step(inc))).collect();
    Ok((traj, filter))
}
