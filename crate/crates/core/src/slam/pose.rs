use nalgebra::Vector2;
use crate::math::wrap_angle;

/// Planar robot pose: position in metres and heading in (−π, π].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose2D {
    pub p: Vector2<f64>,
    pub heading: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { p: Vector2::new(x, y), heading: wrap_angle(heading) }
    }

    /// Moves `ds` along the mid-step heading `ψ + dpsi/2`, ending at heading
    /// `ψ + dpsi`. Exact to second order on constant-curvature arcs.
    pub fn advance(&self, ds: f64, dpsi: f64) -> Self {
        let mid = self.heading + 0.5 * dpsi;
        let dir = Vector2::new(mid.cos(), mid.sin());
        Self { p: self.p + dir * ds, heading: wrap_angle(self.heading + dpsi) }
    }
}

impl Default for Pose2D {
    fn default() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn straight_step() {
        let q = Pose2D::default().advance(0.5, 0.0);
        assert_eq!((q.p.x, q.p.y, q.heading), (0.5, 0.0, 0.0));
    }

    #[test]
    fn chords_of_a_circle_stay_on_the_circle() {
        let r = 8.0;
        let n = 400;
        let dpsi = std::f64::consts::TAU / n as f64;
        let chord = 2.0 * r * (0.5 * dpsi).sin();
        let mut pose = Pose2D::default();
        for k in 1..=n {
            pose = pose.advance(chord, dpsi);
            let a = k as f64 * dpsi;
            assert_relative_eq!(pose.p.x, r * a.sin(), epsilon = 1e-9);
            assert_relative_eq!(pose.p.y, r * (1.0 - a.cos()), epsilon = 1e-9);
        }
    }
}
