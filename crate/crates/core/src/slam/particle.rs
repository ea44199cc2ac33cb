use std::collections::VecDeque;

use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ins::OdometryIncrement;

use super::closure::{check_criteria, correlate, update_weight, LoopClosureEvidence};
use super::config::SlamConfig;
use super::grid::TerrainGrid;
use super::pose::Pose2D;

/// Words reserved in a particle's random stream for each filter step.
const WORDS_PER_STEP: u128 = 256;

/// Counter-based random stream for one particle at one step: the outcome does
/// not depend on which worker runs the particle or in which order.
pub fn particle_rng(seed: u64, particle: usize, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(particle as u64);
    rng.set_word_pos(step as u128 * WORDS_PER_STEP);
    rng
}

/// Bank observation tied to the particle's own pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RollSample {
    pub position: Vector2<f64>,
    pub bank: f64,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct WindowEntry {
    bank: f64,
    /// Stored bank of the revisited cell under this sample, if any.
    map_bank: Option<f64>,
}

/// One map-and-trajectory hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub pose: Pose2D,
    pub weight: f64,
    pub map: TerrainGrid,
    window: VecDeque<WindowEntry>,
    matches: VecDeque<Option<f64>>,
    pub revisit_streak: usize,
}

/// Result of one particle's share of a filter step.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleOutcome {
    pub revisit: bool,
    pub coefficient: Option<f64>,
    pub evidence: Option<LoopClosureEvidence>,
    pub weight_before: f64,
}

impl Particle {
    pub fn new(pose: Pose2D, weight: f64, cfg: &SlamConfig) -> Self {
        Self {
            pose,
            weight,
            map: TerrainGrid::new(cfg.cell_size),
            window: VecDeque::with_capacity(cfg.sequence_samples()),
            matches: VecDeque::with_capacity(cfg.window),
            revisit_streak: 0,
        }
    }

    /// Samples the motion model and moves the particle.
    pub fn propagate<R: Rng>(&mut self, inc: &OdometryIncrement, cfg: &SlamConfig, rng: &mut R) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let ds = inc.delta_s + cfg.sigma_distance * z1;
        let dpsi = inc.delta_heading + cfg.sigma_heading * z2;
        self.pose = self.pose.advance(ds, dpsi);
    }

    /// True when the sample lands on a cell written longer ago than the exclusion
    /// distance. Maintains the revisit streak.
    pub fn detect_revisit(&mut self, sample: &RollSample, cfg: &SlamConfig) -> bool {
        let revisit = self
            .map
            .at(&sample.position)
            .is_some_and(|c| sample.distance - c.last_visit > cfg.exclusion_distance);
        self.revisit_streak = if revisit { self.revisit_streak + 1 } else { 0 };
        revisit
    }

    /// Writes the sample into the map. Cells from an earlier pass are left as they
    /// are so they keep serving as the reference for the rest of the revisit.
    pub fn update_map(&mut self, sample: &RollSample, cfg: &SlamConfig) {
        let old = self
            .map
            .at(&sample.position)
            .is_some_and(|c| sample.distance - c.last_visit > cfg.exclusion_distance);
        if !old {
            self.map.observe(&sample.position, sample.bank, sample.distance);
        }
    }

    /// Correlation of the last `L` bank estimates with the map values under them.
    pub fn match_sequence(&self, cfg: &SlamConfig) -> Option<f64> {
        let l = cfg.sequence_samples();
        if self.window.len() < l {
            return None;
        }
        let entries = self.window.iter().skip(self.window.len() - l);
        let mut current = Vec::with_capacity(l);
        let mut stored = Vec::with_capacity(l);
        for e in entries {
            current.push(e.bank);
            stored.push(e.map_bank?);
        }
        correlate(&current, &stored, cfg.min_bank_std)
    }

    pub fn recent_matches(&self) -> Vec<Option<f64>> {
        self.matches.iter().copied().collect()
    }

    /// Propagation, mapping, matching and the conditional weight update for one
    /// odometry increment.
    pub fn step<R: Rng>(&mut self, inc: &OdometryIncrement, distance: f64, cfg: &SlamConfig, rng: &mut R) -> ParticleOutcome {
        self.propagate(inc, cfg, rng);
        let sample = RollSample { position: self.pose.p, bank: inc.roll, distance };
        let revisit = self.detect_revisit(&sample, cfg);
        let map_bank = if revisit { self.map.at(&sample.position).map(|c| c.bank) } else { None };
        self.update_map(&sample, cfg);

        let l = cfg.sequence_samples();
        if self.window.len() == l {
            self.window.pop_front();
        }
        self.window.push_back(WindowEntry { bank: sample.bank, map_bank });
        let coefficient = if self.revisit_streak >= l { self.match_sequence(cfg) } else { None };
        if self.matches.len() == cfg.window {
            self.matches.pop_front();
        }
        self.matches.push_back(coefficient);

        let weight_before = self.weight;
        let evidence = if cfg.loop_closure && self.revisit_streak >= cfg.window {
            let (a, b) = self.matches.as_slices();
            let recent: Vec<Option<f64>> = a.iter().chain(b).copied().collect();
            check_criteria(&recent, self.revisit_streak, cfg)
        } else {
            None
        };
        if let Some(ev) = &evidence {
            self.weight = update_weight(self.weight, ev, cfg.window, cfg.weight_rule);
        }
        ParticleOutcome { revisit, coefficient, evidence, weight_before }
    }
}
