use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use wheelslam::config::RunConfig;
use wheelslam::eval::{evaluate, improvement_percent, Metrics, TruthPoint};
use wheelslam::experiment::{compare, ins_trajectory, process, simulate, slam_trajectory, Comparison};
use wheelslam::io;

/// Wheel-mounted IMU dead reckoning and terrain-aided SLAM.
#[derive(Parser, Debug)]
#[command(name = "wheelslam", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sensor errors and particle sampling (first seed for `compare`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of particles.
    #[arg(long, global = true)]
    particles: Option<usize>,
    /// Disable loop-closure weight updates (dead reckoning with particle noise only).
    #[arg(long, global = true)]
    no_loop_closure: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate ground truth and a noisy IMU stream.
    Simulate,
    /// Run Wheel-INS on an IMU file.
    RunIns {
        #[arg(long)]
        imu: Option<PathBuf>,
    },
    /// Run Wheel-INS followed by Wheel-SLAM on an IMU file.
    RunSlam {
        #[arg(long)]
        imu: Option<PathBuf>,
    },
    /// Score a trajectory against truth, optionally against a baseline trajectory.
    Evaluate {
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Simulate and run INS and SLAM over several seeds and aggregate the improvement.
    Compare {
        #[arg(long)]
        runs: Option<u64>,
    },
    /// Run Wheel-SLAM on an IMU file and write only the terrain map of the best particle.
    ExportMap {
        #[arg(long)]
        imu: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if let Some(n) = common.particles {
        cfg.slam.particles = n;
    }
    if common.no_loop_closure {
        cfg.slam.loop_closure = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value)? + "\n";
        io::write_atomic(&path, text.as_bytes())?;
        Ok(())
    }

    /// Records the effective configuration so the run can be repeated exactly.
    fn finish(mut self, command: &str, cfg: &RunConfig, extra: serde_json::Value) -> Result<()> {
        let config_path = self.path("config.txt");
        io::write_atomic(&config_path, cfg.to_text().as_bytes())?;
        let files = self.files.clone();
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": cfg.seed,
            "config": cfg.entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "outputs": files,
            "details": extra,
        });
        self.json("manifest.json", &manifest)
    }
}

fn imu_input(cfg: &RunConfig, flag: &Option<PathBuf>) -> Result<PathBuf> {
    match flag.as_ref().or(cfg.imu_path.as_ref()) {
        Some(p) => Ok(p.clone()),
        None => bail!("no IMU file given (use --imu or imu_path in the config)"),
    }
}

fn read_truth(path: &Path) -> Result<Vec<TruthPoint>> {
    Ok(io::read_truth_csv(path)?.iter().map(TruthPoint::from).collect())
}

fn metrics_json(m: &Metrics) -> serde_json::Value {
    serde_json::to_value(m).expect("metrics serialize")
}

fn print_metrics(label: &str, m: &Metrics) {
    println!(
        "{label:<10} horizontal RMSE {:>9.3} m   heading RMSE {:>8.3}°   max {:>8.3} m   epochs {}",
        m.horizontal_rmse_m, m.heading_rmse_deg, m.max_horizontal_error_m, m.epochs
    );
}

fn print_comparison(c: &Comparison) {
    println!("{:>6} {:>12} {:>12} {:>10} {:>12} {:>12} {:>10}", "seed", "INS pos m", "SLAM pos m", "Δpos %", "INS hdg °", "SLAM hdg °", "Δhdg %");
    for r in &c.runs {
        println!(
            "{:>6} {:>12.3} {:>12.3} {:>10.1} {:>12.3} {:>12.3} {:>10.1}",
            r.seed,
            r.ins.horizontal_rmse_m,
            r.slam.horizontal_rmse_m,
            r.horizontal_improvement_percent,
            r.ins.heading_rmse_deg,
            r.slam.heading_rmse_deg,
            r.heading_improvement_percent
        );
    }
    let s = |x: &wheelslam::eval::Summary| format!("{:.1} [{:.1}, {:.1}]", x.median, x.q1, x.q3);
    println!("median [q1, q3] horizontal improvement: {} %", s(&c.horizontal_improvement_percent));
    println!("median [q1, q3] heading improvement:    {} %", s(&c.heading_improvement_percent));
    println!("SLAM better in {:.0}% of runs", 100.0 * c.slam_win_rate);
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let started = Instant::now();
    match &cli.command {
        Command::Simulate => {
            let sim = simulate(&cfg)?;
            let mut out = Output::new(&cfg.out_dir)?;
            io::write_truth_csv(&out.path("truth.csv"), &sim.truth)?;
            io::write_imu_csv(&out.path("imu.csv"), &sim.imu)?;
            println!("{} samples over {:.1} m", sim.imu.len(), sim.truth.distance());
            out.finish("simulate", &cfg, json!({ "samples": sim.imu.len(), "distance_m": sim.truth.distance() }))?;
        }
        Command::RunIns { imu } => {
            let imu = io::read_imu_csv(&imu_input(&cfg, imu)?)?;
            let (increments, ins) = wheelslam::ins::run_stream(cfg.ins_config(), &imu)?;
            let mut out = Output::new(&cfg.out_dir)?;
            io::write_trajectory_csv(&out.path("ins_trajectory.csv"), &ins_trajectory(&increments))?;
            let stats = ins.stats();
            println!("{} increments, {} velocity updates ({} rejected)", increments.len(), stats.updates, stats.rejected);
            out.finish(
                "run-ins",
                &cfg,
                json!({ "increments": increments.len(), "updates": stats.updates, "rejected": stats.rejected }),
            )?;
        }
        Command::RunSlam { imu } => {
            let imu = io::read_imu_csv(&imu_input(&cfg, imu)?)?;
            let run = process(&cfg, &imu)?;
            let mut out = Output::new(&cfg.out_dir)?;
            io::write_trajectory_csv(&out.path("ins_trajectory.csv"), &ins_trajectory(&run.increments))?;
            io::write_trajectory_csv(&out.path("slam_trajectory.csv"), &slam_trajectory(&run.slam_poses))?;
            let mut events = String::new();
            for e in run.slam.events() {
                events.push_str(&serde_json::to_string(e)?);
                events.push('\n');
            }
            io::write_atomic(&out.path("loop_events.jsonl"), events.as_bytes())?;
            let map = &run.slam.best_particle().map;
            if !map.is_empty() {
                io::export_map(map, &out.path("map.csv"))?;
            }
            let stats = run.slam.stats();
            println!(
                "{} steps, {} loop-closure weight updates, {} resamples",
                stats.steps, stats.weight_updates, stats.resamples
            );
            out.finish(
                "run-slam",
                &cfg,
                json!({
                    "steps": stats.steps,
                    "weight_updates": stats.weight_updates,
                    "resamples": stats.resamples,
                    "degeneracies": stats.degeneracies,
                }),
            )?;
        }
        Command::Evaluate { estimate, truth, baseline } => {
            let truth_path = match truth.as_ref().or(cfg.truth_path.as_ref()) {
                Some(p) => p.clone(),
                None => bail!("no truth file given (use --truth or truth_path in the config)"),
            };
            let truth = read_truth(&truth_path)?;
            let m = evaluate(&io::read_trajectory_csv(estimate)?, &truth)?;
            print_metrics("estimate", &m);
            let mut doc = json!({ "estimate": metrics_json(&m) });
            if let Some(b) = baseline {
                let mb = evaluate(&io::read_trajectory_csv(b)?, &truth)?;
                print_metrics("baseline", &mb);
                let dh = improvement_percent(mb.horizontal_rmse_m, m.horizontal_rmse_m);
                let dp = improvement_percent(mb.heading_rmse_deg, m.heading_rmse_deg);
                println!("improvement: horizontal {dh:.1}%, heading {dp:.1}%");
                doc["baseline"] = metrics_json(&mb);
                doc["horizontal_improvement_percent"] = json!(dh);
                doc["heading_improvement_percent"] = json!(dp);
            }
            let mut out = Output::new(&cfg.out_dir)?;
            out.json("metrics.json", &doc)?;
            out.finish("evaluate", &cfg, json!({}))?;
        }
        Command::Compare { runs } => {
            let cfg = RunConfig { runs: runs.unwrap_or(cfg.runs), ..cfg };
            cfg.validate()?;
            let c = compare(&cfg)?;
            print_comparison(&c);
            let mut out = Output::new(&cfg.out_dir)?;
            out.json("comparison.json", &serde_json::to_value(&c)?)?;
            out.finish("compare", &cfg, json!({ "runs": cfg.runs }))?;
        }
        Command::ExportMap { imu } => {
            let imu = io::read_imu_csv(&imu_input(&cfg, imu)?)?;
            let run = process(&cfg, &imu)?;
            let mut out = Output::new(&cfg.out_dir)?;
            let map = &run.slam.best_particle().map;
            io::export_map(map, &out.path("map.csv"))?;
            println!("{} cells", map.len());
            out.finish("export-map", &cfg, json!({ "cells": map.len() }))?;
        }
    }
    log::info!("finished in {:.2?}", started.elapsed());
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
