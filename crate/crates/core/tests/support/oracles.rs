//! Brute-force references for the closed-form filter quantities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wheelslam::math::{pearson_correlation, rms};
use wheelslam::slam::{effective_sample_ratio, normalize, update_weight, LoopClosureEvidence, WeightRule};

pub const INSTANCES: usize = 1000;
const TOL: f64 = 1e-12;

fn check(got: f64, want: f64, scale: f64) -> Result<(), String> {
    if (got - want).abs() <= TOL * got.abs().max(want.abs()).max(scale) {
        Ok(())
    } else {
        Err(format!("{got} vs {want}"))
    }
}

/// Correlation as the mean product of z-scores (population standard deviations).
fn pearson_zscore(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let stats = |v: &[f64]| {
        let m = v.iter().rev().sum::<f64>() / n;
        let s = (v.iter().rev().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
        (m, s)
    };
    let (ma, sa) = stats(a);
    let (mb, sb) = stats(b);
    a.iter().zip(b).map(|(x, y)| ((x - ma) / sa) * ((y - mb) / sb)).sum::<f64>() / n
}

fn random_sequence(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-4.0..2.0));
    let offset = rng.random_range(-1.0..1.0) * scale;
    (0..n).map(|_| offset + scale * rng.random_range(-1.0..1.0)).collect()
}

pub fn pearson(instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..instances {
        let n = rng.random_range(2..200);
        let a = random_sequence(&mut rng, n);
        let mut b = random_sequence(&mut rng, n);
        // mix in some of `a` so strong correlations are exercised too
        let mix = rng.random_range(-1.0..1.0);
        b.iter_mut().zip(&a).for_each(|(y, x)| *y += mix * x);
        let got = pearson_correlation(&a, &b).unwrap();
        let want = pearson_zscore(&a, &b);
        check(got, want, 1.0)?;
    }
    Ok(())
}

pub fn rms_definition(instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..instances {
        let n = rng.random_range(1..300);
        let v = random_sequence(&mut rng, n);
        let mut ss = 0.0;
        for x in v.iter().rev() {
            ss += x.powi(2);
        }
        let want = (ss / n as f64).sqrt();
        let got = rms(&v).unwrap();
        check(got, want, 0.0)?;
    }
    Ok(())
}

pub fn weight_update(instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..instances {
        let n_r = rng.random_range(1..100);
        let n_c = rng.random_range(1..=n_r);
        let coefficients: Vec<f64> = (0..n_c).map(|_| rng.random_range(0.4..1.0)).collect();
        let current = *coefficients.last().unwrap();
        let w = rng.random_range(1e-6..1.0);
        let ev = LoopClosureEvidence { coefficients: coefficients.clone(), n_c, current };
        let mean_sq = coefficients.iter().map(|c| c * c).sum::<f64>() / n_c as f64;
        let want = w * (n_c as f64 / n_r as f64) * mean_sq.sqrt().exp();
        let got = update_weight(w, &ev, n_r, WeightRule::CoefficientRms);
        check(got, want, 0.0)?;
        let resid_sq = coefficients.iter().map(|c| (1.0 - c).powi(2)).sum::<f64>() / n_c as f64;
        let want = w * (n_c as f64 / n_r as f64) * (-resid_sq.sqrt()).exp();
        let got = update_weight(w, &ev, n_r, WeightRule::ResidualRms);
        check(got, want, 0.0)?;
    }
    Ok(())
}

pub fn ess_ratio(instances: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..instances {
        let n = rng.random_range(1..500);
        let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64).powi(rng.random_range(1..6))).collect();
        w[0] += 1e-3;
        normalize(&mut w).unwrap();
        let mut ss = 0.0;
        for x in w.iter().rev() {
            ss += x * x;
        }
        let want = 1.0 / (n as f64 * ss);
        let got = effective_sample_ratio(&w);
        check(got, want, 0.0)?;
        if !(got > 0.0 && got <= 1.0 + 1e-12) {
            return Err(format!("ratio {got} outside (0, 1]"));
        }
    }
    Ok(())
}
