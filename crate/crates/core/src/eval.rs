//! Trajectory accuracy against ground truth and multi-run aggregation.

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::math::{angle_diff, wrap_angle};
use crate::sim::GroundTruth;
use crate::slam::Pose2D;

/// Timestamped planar pose as written to trajectory files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// rad
    pub heading: f64,
}

impl TrajectoryPoint {
    pub fn from_pose(t: f64, pose: &Pose2D) -> Self {
        Self { t, x: pose.p.x, y: pose.p.y, heading: pose.heading }
    }
}

/// Truth pose at one time, as needed for evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

pub fn truth_points(truth: &GroundTruth) -> Vec<TruthPoint> {
    truth
        .epochs
        .iter()
        .map(|e| TruthPoint { t: e.t, x: e.position.x, y: e.position.y, heading: e.heading })
        .collect()
}

/// Linear interpolation of the truth at `t`; headings are interpolated on the circle.
pub fn interpolate(truth: &[TruthPoint], t: f64) -> Option<TruthPoint> {
    let first = truth.first()?;
    let last = truth.last()?;
    if t < first.t || t > last.t {
        return None;
    }
    let k = truth.partition_point(|p| p.t <= t);
    if k == 0 {
        return Some(*first);
    }
    if k >= truth.len() {
        return Some(*last);
    }
    let (a, b) = (&truth[k - 1], &truth[k]);
    let f = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
    Some(TruthPoint {
        t,
        x: a.x + f * (b.x - a.x),
        y: a.y + f * (b.y - a.y),
        heading: wrap_angle(a.heading + f * angle_diff(b.heading, a.heading)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub horizontal_rmse_m: f64,
    pub heading_rmse_deg: f64,
    pub max_horizontal_error_m: f64,
    pub final_horizontal_error_m: f64,
    pub epochs: usize,
    /// Per-epoch horizontal error, m.
    #[serde(skip)]
    pub horizontal_errors: Vec<f64>,
    /// Per-epoch heading error, deg.
    #[serde(skip)]
    pub heading_errors_deg: Vec<f64>,
}

/// Errors of each estimate epoch against time-interpolated truth. Epochs outside
/// the truth's time span are skipped.
pub fn evaluate(estimate: &[TrajectoryPoint], truth: &[TruthPoint]) -> Result<Metrics, DataError> {
    let mut horizontal = Vec::with_capacity(estimate.len());
    let mut heading = Vec::with_capacity(estimate.len());
    for p in estimate {
        if let Some(tp) = interpolate(truth, p.t) {
            horizontal.push((p.x - tp.x).hypot(p.y - tp.y));
            heading.push(angle_diff(p.heading, tp.heading).to_degrees());
        }
    }
    if horizontal.is_empty() {
        return Err(DataError::Invalid("estimate and truth do not overlap in time".into()));
    }
    let rms = |v: &[f64]| crate::math::rms(v).expect("non-empty");
    Ok(Metrics {
        horizontal_rmse_m: rms(&horizontal),
        heading_rmse_deg: rms(&heading),
        max_horizontal_error_m: horizontal.iter().copied().fold(0.0, f64::max),
        final_horizontal_error_m: *horizontal.last().expect("non-empty"),
        epochs: horizontal.len(),
        horizontal_errors: horizontal,
        heading_errors_deg: heading,
    })
}

/// Relative reduction of `value` with respect to `baseline`, in percent.
pub fn improvement_percent(baseline: f64, value: f64) -> f64 {
    100.0 * (baseline - value) / baseline
}

/// Median, first and third quartile (linear interpolation between order statistics).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Summary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        min: v[0],
        max: v[v.len() - 1],
        n: v.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line() -> Vec<TruthPoint> {
        (0..=100).map(|k| TruthPoint { t: k as f64 * 0.1, x: k as f64, y: 0.0, heading: 0.0 }).collect()
    }

    #[test]
    fn identical_trajectory_has_zero_error() {
        let truth = line();
        let est: Vec<_> = truth.iter().map(|p| TrajectoryPoint { t: p.t, x: p.x, y: p.y, heading: p.heading }).collect();
        let m = evaluate(&est, &truth).unwrap();
        assert_eq!(m.horizontal_rmse_m, 0.0);
        assert_eq!(m.heading_rmse_deg, 0.0);
    }

    #[test]
    fn pythagorean_offset() {
        let truth = line();
        let est: Vec<_> = truth.iter().map(|p| TrajectoryPoint { t: p.t, x: p.x + 3.0, y: p.y + 4.0, heading: 0.0 }).collect();
        assert_relative_eq!(evaluate(&est, &truth).unwrap().horizontal_rmse_m, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn heading_offset_across_wraparound() {
        let truth: Vec<_> = (0..100)
            .map(|k| TruthPoint { t: k as f64, x: 0.0, y: 0.0, heading: wrap_angle(3.0 + k as f64 * 0.01) })
            .collect();
        let est: Vec<_> = truth
            .iter()
            .map(|p| TrajectoryPoint { t: p.t, x: 0.0, y: 0.0, heading: wrap_angle(p.heading + 1f64.to_radians()) })
            .collect();
        assert_relative_eq!(evaluate(&est, &truth).unwrap().heading_rmse_deg, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn interpolates_between_epochs() {
        let p = interpolate(&line(), 0.25).unwrap();
        assert_relative_eq!(p.x, 2.5, epsilon = 1e-12);
        assert!(interpolate(&line(), 11.0).is_none());
    }

    #[test]
    fn no_overlap_is_an_error() {
        let est = vec![TrajectoryPoint { t: 100.0, x: 0.0, y: 0.0, heading: 0.0 }];
        assert!(evaluate(&est, &line()).is_err());
    }

    #[test]
    fn quartiles() {
        let s = summarize(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert_eq!(s.iqr(), 2.0);
        assert_relative_eq!(improvement_percent(4.0, 3.0), 25.0);
    }
}
