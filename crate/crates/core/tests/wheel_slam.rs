#[path = "support/motion.rs"]
mod motion;

use motion::motion_model_mean;
use wheelslam::experiment::{ins_trajectory, slam_trajectory};
use wheelslam::ins::{run_stream, OdometryIncrement, WheelInsConfig};
use wheelslam::math::angle_diff;
use wheelslam::sim::{Scene, SensorErrorSpec};
use wheelslam::slam::{run_slam, Pose2D, SlamConfig};

fn increments(scene: &Scene, errors: &SensorErrorSpec) -> Vec<OdometryIncrement> {
    let (_, imu) = scene.simulate(errors).unwrap();
    run_stream(WheelInsConfig::default(), &imu).unwrap().0
}

#[test]
fn flat_terrain_never_closes_a_loop() {
    let incs = increments(&Scene::benchmark().flattened(), &SensorErrorSpec::ideal());
    for seed in [0, 7] {
        let cfg = SlamConfig { seed, ..Default::default() };
        let (traj, filter) = run_slam(cfg.clone(), Pose2D::default(), &incs).unwrap();
        let stats = filter.stats();
        assert_eq!(stats.weight_updates, 0);
        assert_eq!(stats.resamples, 0);
        assert!(filter.events().is_empty());
        assert!(filter.history().iter().all(|h| h.max_current_coefficient.is_none()));
        assert!(filter.weights().iter().all(|w| (w - 0.01).abs() < 1e-15));
        let mean = motion_model_mean(&cfg, &incs);
        for ((_, got), want) in traj.iter().zip(&mean) {
            assert!((got.p - want.p).norm() < 1e-9, "{:?} vs {:?}", got, want);
            assert!(angle_diff(got.heading, want.heading).abs() < 1e-12);
        }
    }
}

#[test]
fn loop_closure_happens_only_on_the_second_lap() {
    let incs = increments(&Scene::benchmark(), &SensorErrorSpec::icm20602_uncalibrated(0));
    let (_, filter) = run_slam(SlamConfig::default(), Pose2D::default(), &incs).unwrap();
    let first = filter.events().first().expect("loop closures on a bumpy circuit").step;
    // a lap is ≈ 400 m = 800 samples, and a full window must be matched first
    assert!(first > 800 + 50, "{first}");
    assert!(filter.stats().resamples > 0);
}

#[test]
fn weights_stay_on_the_simplex_for_a_whole_run() {
    let incs = increments(&Scene::benchmark(), &SensorErrorSpec::icm20602_uncalibrated(3));
    let cfg = SlamConfig::default();
    let (_, filter) = run_slam(cfg.clone(), Pose2D::default(), &incs).unwrap();
    assert_eq!(filter.particles().len(), cfg.particles);
    assert_eq!(filter.history().len(), incs.len());
    for h in filter.history() {
        assert!(h.weight_sum_error <= 1e-12, "step {}: {}", h.step, h.weight_sum_error);
        assert!(h.min_weight >= 0.0);
        assert!(h.ess_ratio > 0.0 && h.ess_ratio <= 1.0 + 1e-12);
    }
    assert_eq!(filter.stats().degeneracies, 0);
}

#[test]
fn without_loop_closure_slam_tracks_the_ins() {
    let incs = increments(&Scene::benchmark(), &SensorErrorSpec::icm20602_uncalibrated(2));
    let ins = ins_trajectory(&incs);
    let gap = |cfg: SlamConfig| {
        let s = slam_trajectory(&run_slam(cfg, Pose2D::default(), &incs).unwrap().0);
        s.iter().zip(&ins).fold((0.0f64, 0.0f64), |(p, h), (a, b)| {
            (p.max((a.x - b.x).hypot(a.y - b.y)), h.max(angle_diff(a.heading, b.heading).abs()))
        })
    };
    // noiseless motion model: only the INS's heading/track mismatch remains
    let (pos0, hdg0) = gap(SlamConfig { sigma_distance: 0.0, sigma_heading: 0.0, loop_closure: false, ..Default::default() });
    assert!(pos0 < 1e-3 * 800.0, "{pos0}");
    assert!(hdg0 < 1e-9, "{hdg0}");
    // 1000 particles: the mean heading wanders by σψ·√k/√N ≈ 0.06° after 1600 steps
    let (pos, hdg) = gap(SlamConfig { particles: 1000, loop_closure: false, ..Default::default() });
    assert!(hdg.to_degrees() < 4.0 * 0.05 * 1600f64.sqrt() / 1000f64.sqrt(), "{}", hdg.to_degrees());
    assert!(pos < pos0 + 0.7, "{pos}");
}

#[test]
fn output_is_independent_of_thread_count() {
    let incs = increments(&Scene::benchmark(), &SensorErrorSpec::icm20602_uncalibrated(5));
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let (traj, f) = run_slam(SlamConfig::default(), Pose2D::default(), &incs).unwrap();
            (format!("{traj:?}"), format!("{:?}", f.events()), format!("{:?}", f.best_particle().map.sorted_cells()))
        })
    };
    assert_eq!(run(1), run(4));
}
