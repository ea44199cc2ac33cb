use serde::{Deserialize, Serialize};

use crate::math::{pearson_correlation, rms};

use super::config::{SlamConfig, WeightRule};

/// Evidence that passed all three loop-closure criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopClosureEvidence {
    /// Coefficients in the window above the threshold.
    pub coefficients: Vec<f64>,
    pub n_c: usize,
    pub current: f64,
}

impl LoopClosureEvidence {
    /// Root mean square of the accepted coefficients.
    pub fn rms(&self) -> f64 {
        rms(&self.coefficients).unwrap_or(0.0)
    }

    /// Multiplicative weight factor for a window of `n_r` epochs.
    pub fn factor(&self, n_r: usize, rule: WeightRule) -> f64 {
        let ratio = self.n_c as f64 / n_r as f64;
        match rule {
            WeightRule::CoefficientRms => ratio * self.rms().exp(),
            WeightRule::ResidualRms => {
                let resid: Vec<f64> = self.coefficients.iter().map(|c| 1.0 - c).collect();
                ratio * (-rms(&resid).unwrap_or(0.0)).exp()
            }
        }
    }
}

/// Pearson correlation of the window's bank estimates against the stored map
/// values, `None` when the sequence is flat or lengths disagree.
pub fn correlate(current: &[f64], stored: &[f64], min_std: f64) -> Option<f64> {
    if current.len() != stored.len() || current.len() < 2 {
        return None;
    }
    if std_dev(current) < min_std || std_dev(stored) < min_std {
        return None;
    }
    pearson_correlation(current, stored).ok()
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Applies the three criteria to the last `N_r` match results, oldest first.
/// `revisit_streak` counts the consecutive most recent epochs that landed on
/// previously visited cells.
pub fn check_criteria(recent: &[Option<f64>], revisit_streak: usize, cfg: &SlamConfig) -> Option<LoopClosureEvidence> {
    let n_r = cfg.window;
    if revisit_streak < n_r || recent.len() < n_r {
        return None;
    }
    let window = &recent[recent.len() - n_r..];
    let current = (*window.last()?)?;
    if current <= cfg.corr_threshold {
        return None;
    }
    let coefficients: Vec<f64> = window.iter().flatten().copied().filter(|c| *c > cfg.corr_threshold).collect();
    if coefficients.len() < cfg.min_matches {
        return None;
    }
    Some(LoopClosureEvidence { n_c: coefficients.len(), coefficients, current })
}

/// New weight after a loop-closure event.
pub fn update_weight(weight: f64, evidence: &LoopClosureEvidence, n_r: usize, rule: WeightRule) -> f64 {
    weight * evidence.factor(n_r, rule)
}
