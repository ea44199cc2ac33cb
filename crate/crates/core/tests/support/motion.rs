use nalgebra::Vector2;
use rand::Rng;
use rand_distr::StandardNormal;
use wheelslam::ins::OdometryIncrement;
use wheelslam::slam::{particle_rng, Pose2D, SlamConfig};

/// Independent re-propagation of every particle from its own random stream,
/// then the plain mean: the filter's output when no weight ever changes.
pub fn motion_model_mean(cfg: &SlamConfig, incs: &[OdometryIncrement]) -> Vec<Pose2D> {
    let mut poses = vec![Pose2D::default(); cfg.particles];
    let mut out = Vec::with_capacity(incs.len());
    for (step, inc) in incs.iter().enumerate() {
        for (i, pose) in poses.iter_mut().enumerate() {
            let mut rng = particle_rng(cfg.seed, i, step as u64);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            *pose = pose.advance(inc.delta_s + cfg.sigma_distance * z1, inc.delta_heading + cfg.sigma_heading * z2);
        }
        let n = poses.len() as f64;
        let p = poses.iter().fold(Vector2::zeros(), |a, q| a + q.p / n);
        let (s, c) = poses.iter().fold((0.0, 0.0), |(s, c), q| (s + q.heading.sin() / n, c + q.heading.cos() / n));
        out.push(Pose2D::new(p.x, p.y, s.atan2(c)));
    }
    out
}
