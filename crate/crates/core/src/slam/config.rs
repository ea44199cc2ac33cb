use serde::{Deserialize, Serialize};

use crate::error::SlamError;

/// How the root-mean-square term of the weight update is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightRule {
    /// `ω · (N_c/N_r) · exp(rms(V))` with `V` the accepted coefficients.
    #[default]
    CoefficientRms,
    /// `ω · (N_c/N_r) · exp(−rms(1 − V))`: the residual from a perfect match.
    ResidualRms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlamConfig {
    pub particles: usize,
    /// Terrain map cell edge, m.
    pub cell_size: f64,
    /// Standard deviation of the distance increment, m.
    pub sigma_distance: f64,
    /// Standard deviation of the heading increment, rad.
    pub sigma_heading: f64,
    /// Travel between roll samples, m.
    pub sample_distance: f64,
    /// Length of the matched roll sequence, m.
    pub sequence_length: f64,
    /// Correlation threshold `C_thr`.
    pub corr_threshold: f64,
    /// Loop-closure window `N_r`, in samples.
    pub window: usize,
    /// Minimum number of above-threshold coefficients `N_thr` in the window.
    pub min_matches: usize,
    /// Resampling happens when `N_eff / N_p` drops below this.
    pub resample_ratio: f64,
    /// Cells written within this much travel count as the particle's own trail, m.
    pub exclusion_distance: f64,
    /// Roll sequences with a smaller standard deviation carry no terrain information, rad.
    pub min_bank_std: f64,
    pub weight_rule: WeightRule,
    pub loop_closure: bool,
    pub seed: u64,
}

impl Default for SlamConfig {
    fn default() -> Self {
        let sample_distance: f64 = 0.5;
        let sequence_length: f64 = 25.0;
        let window = (sequence_length / sample_distance).round() as usize;
        Self {
            particles: 100,
            cell_size: 1.5,
            sigma_distance: 0.025,
            sigma_heading: 0.05f64.to_radians(),
            sample_distance,
            sequence_length,
            corr_threshold: 0.4,
            window,
            min_matches: (0.8 * window as f64).ceil() as usize,
            resample_ratio: 0.75,
            exclusion_distance: 3.0 * sequence_length,
            // 0.006°, far below any usable bank signal and above integration round-off
            min_bank_std: 1e-4,
            weight_rule: WeightRule::CoefficientRms,
            loop_closure: true,
            seed: 0,
        }
    }
}

impl SlamConfig {
    /// Number of roll samples in one matched sequence, `L`.
    pub fn sequence_samples(&self) -> usize {
        (self.sequence_length / self.sample_distance).round() as usize
    }

    pub fn validate(&self) -> Result<(), SlamError> {
        let fail = |m: &str| Err(SlamError::InvalidConfig(m.into()));
        if self.particles < 2 {
            return fail("at least two particles are required");
        }
        if !(self.cell_size > 0.0 && self.sample_distance > 0.0) {
            return fail("cell size and sample distance must be positive");
        }
        if !(self.sigma_distance >= 0.0 && self.sigma_heading >= 0.0) {
            return fail("motion noise must be non-negative");
        }
        if self.sequence_samples() < 2 {
            return fail("sequence must span at least two samples");
        }
        if !(self.corr_threshold > 0.0 && self.corr_threshold < 1.0) {
            return fail("corr_threshold must lie in (0, 1)");
        }
        if self.window == 0 || self.min_matches > self.window {
            return fail("need 0 < N_thr <= N_r");
        }
        if !(self.resample_ratio > 0.0 && self.resample_ratio <= 1.0) {
            return fail("resample_ratio must lie in (0, 1]");
        }
        if !(self.exclusion_distance >= 0.0 && self.min_bank_std >= 0.0) {
            return fail("exclusion distance and minimum bank spread must be non-negative");
        }
        Ok(())
    }
}
