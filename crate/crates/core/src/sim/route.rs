//! Planar route geometry: straight legs joined by curvature-continuous corners.
//!
//! A corner turning by `Δ` over length `L = 2R|Δ|` uses the curvature profile
//! `κ(u) = (Δ/L)(1 − cos(2πu/L))`, so curvature and its derivative are zero at
//! both ends and the peak curvature is `1/R`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};

use crate::error::SimError;
use crate::math::wrap_angle;

// 8-point Gauss–Legendre on [-1, 1]
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

const KNOT_SPACING: f64 = 0.25;

/// Point on the route: position, tangent heading, curvature and its arc-length derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoutePoint {
    pub position: Vector2<f64>,
    pub heading: f64,
    pub curvature: f64,
    pub curvature_rate: f64,
}

#[derive(Clone, Debug)]
struct Corner {
    delta: f64,
    length: f64,
    /// Local-frame positions at multiples of `KNOT_SPACING`.
    knots: Vec<Vector2<f64>>,
}

impl Corner {
    fn new(delta: f64, min_radius: f64) -> Self {
        let length = 2.0 * min_radius * delta.abs();
        let n = (length / KNOT_SPACING).ceil() as usize;
        let mut knots = Vec::with_capacity(n + 1);
        let mut c = Self { delta, length, knots: Vec::new() };
        let mut acc = Vector2::zeros();
        knots.push(acc);
        for k in 0..n {
            let a = k as f64 * KNOT_SPACING;
            let b = ((k + 1) as f64 * KNOT_SPACING).min(length);
            acc += c.integrate(a, b);
            knots.push(acc);
        }
        c.knots = knots;
        c
    }

    fn theta(&self, u: f64) -> f64 {
        let x = u / self.length;
        self.delta * (x - (TAU * x).sin() / TAU)
    }

    fn curvature(&self, u: f64) -> f64 {
        self.delta / self.length * (1.0 - (TAU * u / self.length).cos())
    }

    fn curvature_rate(&self, u: f64) -> f64 {
        self.delta / self.length * (TAU / self.length) * (TAU * u / self.length).sin()
    }

    fn integrate(&self, a: f64, b: f64) -> Vector2<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Vector2::zeros();
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let th = self.theta(mid + half * x);
            acc += Vector2::new(th.cos(), th.sin()) * w;
        }
        acc * half
    }

    fn local_position(&self, u: f64) -> Vector2<f64> {
        let u = u.clamp(0.0, self.length);
        let k = ((u / KNOT_SPACING).floor() as usize).min(self.knots.len() - 1);
        let a = k as f64 * KNOT_SPACING;
        if u <= a {
            return self.knots[k];
        }
        self.knots[k] + self.integrate(a, u)
    }

    /// Distance from the corner start (and end) to the polygon vertex.
    fn tangent_distance(&self) -> f64 {
        let end = self.local_position(self.length);
        let t = end.y / self.delta.sin();
        // symmetric profile: equals end.x - t·cos(delta)
        0.5 * (t + end.x - t * self.delta.cos())
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Line,
    Corner(Corner),
}

#[derive(Clone, Debug)]
struct Segment {
    start: Vector2<f64>,
    heading: f64,
    s0: f64,
    length: f64,
    shape: Shape,
}

impl Segment {
    fn point(&self, u: f64) -> RoutePoint {
        let rot = rot2(self.heading);
        match &self.shape {
            Shape::Line => RoutePoint {
                position: self.start + rot * Vector2::new(u, 0.0),
                heading: wrap_angle(self.heading),
                curvature: 0.0,
                curvature_rate: 0.0,
            },
            Shape::Corner(c) => RoutePoint {
                position: self.start + rot * c.local_position(u),
                heading: wrap_angle(self.heading + c.theta(u)),
                curvature: c.curvature(u),
                curvature_rate: c.curvature_rate(u),
            },
        }
    }
}

fn rot2(a: f64) -> Matrix2<f64> {
    let (s, c) = a.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// One lap of a route; laps repeat end to start for closed routes.
#[derive(Clone, Debug)]
pub struct Route {
    segments: Vec<Segment>,
    lap_length: f64,
    closed: bool,
}

impl Route {
    /// Builds a route through `waypoints`. A route is closed when the first and
    /// last waypoints coincide or `closed` is requested; closed routes start at
    /// the midpoint of the first leg.
    pub fn new(waypoints: &[[f64; 2]], corner_radius: f64, closed: bool) -> Result<Self, SimError> {
        let mut pts: Vec<Vector2<f64>> = waypoints.iter().map(|p| Vector2::new(p[0], p[1])).collect();
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(SimError::InvalidSpec("non-finite waypoint".into()));
        }
        let closed = closed
            || (pts.len() > 2 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-9);
        if closed && pts.len() > 2 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-9 {
            pts.pop();
        }
        if pts.len() < 2 || (closed && pts.len() < 3) {
            return Err(SimError::InvalidSpec("not enough waypoints".into()));
        }
        if !(corner_radius > 0.0) {
            return Err(SimError::InvalidSpec("corner radius must be positive".into()));
        }
        let n = pts.len();
        let legs = if closed { n } else { n - 1 };
        let mut dirs = Vec::with_capacity(legs);
        let mut lens = Vec::with_capacity(legs);
        for i in 0..legs {
            let d = pts[(i + 1) % n] - pts[i];
            let len = d.norm();
            if len < 1e-9 {
                return Err(SimError::InvalidSpec(format!("waypoints {i} and {} coincide", (i + 1) % n)));
            }
            dirs.push(d.y.atan2(d.x));
            lens.push(len);
        }
        // corner at vertex v joins leg v-1 and leg v
        let mut corners: Vec<Option<(Corner, f64)>> = vec![None; n];
        for (v, slot) in corners.iter_mut().enumerate() {
            let (inc, out) = match (closed, v) {
                (true, _) => ((v + legs - 1) % legs, v % legs),
                (false, v) if v == 0 || v == n - 1 => continue,
                (false, v) => (v - 1, v),
            };
            let delta = wrap_angle(dirs[out] - dirs[inc]);
            if delta.abs() < 1e-12 {
                continue;
            }
            if delta.abs() > PI - 1e-6 {
                return Err(SimError::InvalidSpec(format!("reversal at waypoint {v}")));
            }
            let c = Corner::new(delta, corner_radius);
            let td = c.tangent_distance();
            *slot = Some((c, td));
        }
        let td = |v: usize| corners[v % n].as_ref().map_or(0.0, |c| c.1);
        for (i, len) in lens.iter().enumerate() {
            let need = td(i) + td(i + 1);
            if need > len + 1e-9 {
                return Err(SimError::InvalidSpec(format!(
                    "corner radius {corner_radius} m infeasible on leg {i} ({len:.2} m, needs {need:.2} m)"
                )));
            }
        }

        let mut segments = Vec::new();
        let mut s = 0.0;
        let mut push = |segments: &mut Vec<Segment>, start: Vector2<f64>, heading: f64, length: f64, shape: Shape| {
            if length > 1e-12 {
                segments.push(Segment { start, heading, s0: s, length, shape });
                s += length;
            }
        };
        let dir_vec = |i: usize| Vector2::new(dirs[i].cos(), dirs[i].sin());
        let leg_line = |i: usize| {
            let a = pts[i] + dir_vec(i) * td(i);
            let b = pts[(i + 1) % n] - dir_vec(i) * td(i + 1);
            (a, (b - a).norm())
        };
        if closed {
            let (a0, l0) = leg_line(0);
            let mid = a0 + dir_vec(0) * (0.5 * l0);
            push(&mut segments, mid, dirs[0], 0.5 * l0, Shape::Line);
            for v in 1..=n {
                let inc = v - 1;
                if let Some((c, tdv)) = &corners[v % n] {
                    let start = pts[v % n] - dir_vec(inc) * *tdv;
                    push(&mut segments, start, dirs[inc], c.length, Shape::Corner(c.clone()));
                }
                if v < n {
                    let (a, l) = leg_line(v);
                    push(&mut segments, a, dirs[v], l, Shape::Line);
                }
            }
            push(&mut segments, a0, dirs[0], 0.5 * l0, Shape::Line);
        } else {
            for i in 0..legs {
                let (a, l) = leg_line(i);
                push(&mut segments, a, dirs[i], l, Shape::Line);
                if let Some((c, tdv)) = &corners[i + 1] {
                    let start = pts[i + 1] - dir_vec(i) * *tdv;
                    push(&mut segments, start, dirs[i], c.length, Shape::Corner(c.clone()));
                }
            }
        }
        Ok(Self { lap_length: s, segments, closed })
    }

    pub fn lap_length(&self) -> f64 {
        self.lap_length
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Point at arc length `s`, wrapping laps for closed routes.
    pub fn point(&self, s: f64) -> RoutePoint {
        let s_lap = if self.closed && s >= self.lap_length {
            let r = s.rem_euclid(self.lap_length);
            // keep the exact end of a lap on the end of the final segment
            if r < 1e-9 && s > 0.0 { self.lap_length } else { r }
        } else {
            s.clamp(0.0, self.lap_length)
        };
        let idx = match self.segments.binary_search_by(|seg| seg.s0.partial_cmp(&s_lap).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let seg = &self.segments[idx];
        seg.point((s_lap - seg.s0).min(seg.length))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn straight_route() {
        let r = Route::new(&[[0.0, 0.0], [100.0, 0.0]], 5.0, false).unwrap();
        assert_relative_eq!(r.lap_length(), 100.0, epsilon = 1e-12);
        let p = r.point(40.0);
        assert_relative_eq!(p.position, Vector2::new(40.0, 0.0), epsilon = 1e-12);
        assert_eq!(p.heading, 0.0);
    }

    #[test]
    fn corner_geometry_is_continuous() {
        let r = Route::new(&[[0.0, 0.0], [100.0, 0.0], [100.0, 60.0], [0.0, 60.0], [0.0, 0.0]], 8.0, false)
            .unwrap();
        assert!(r.is_closed());
        let n = 40_000;
        let mut prev = r.point(0.0);
        let ds = r.lap_length() / n as f64;
        let mut max_jump: f64 = 0.0;
        for k in 1..=n {
            let p = r.point(k as f64 * ds);
            max_jump = max_jump.max(((p.position - prev.position).norm() - ds).abs());
            // heading follows the chord
            let chord = p.position - prev.position;
            let mid_heading = prev.heading + 0.5 * wrap_angle(p.heading - prev.heading);
            assert!(wrap_angle(chord.y.atan2(chord.x) - mid_heading).abs() < 1e-5);
            prev = p;
        }
        assert!(max_jump < 1e-6, "{max_jump}");
        let end = r.point(r.lap_length());
        assert_relative_eq!(end.position, r.point(0.0).position, epsilon = 1e-9);
    }

    #[test]
    fn peak_curvature_is_inverse_radius() {
        let r = Route::new(&[[0.0, 0.0], [50.0, 0.0], [50.0, 50.0]], 6.0, false).unwrap();
        let kmax = (0..10_000)
            .map(|k| r.point(k as f64 * r.lap_length() / 10_000.0).curvature.abs())
            .fold(0.0, f64::max);
        assert_relative_eq!(kmax, 1.0 / 6.0, epsilon = 1e-4);
    }

    #[test]
    fn infeasible_radius_is_rejected() {
        let err = Route::new(&[[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]], 20.0, true);
        assert!(matches!(err, Err(SimError::InvalidSpec(_))));
        assert!(Route::new(&[[0.0, 0.0], [0.0, 0.0]], 1.0, false).is_err());
        assert!(Route::new(&[[0.0, 0.0], [10.0, 0.0], [0.0, 0.0]], 1.0, false).is_err());
    }
}
