use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use fetchsim_core::arm::{
    forward_kinematics, grasp_scenario, plan_arm_sampling_baseline, plan_arm_trajectory, ready_posture,
    verify_collision_free, ArmModel, ArmSide, BaselineOutcome, BaselineSettings,
};
use fetchsim_core::formats::{
    base_positions, format_arm_trajectory, parse_base_trajectory, parse_camera, parse_point_cloud, parse_roi_arg,
    parse_vector3_arg, read_text, write_text,
};
use fetchsim_core::metrics::{deviation_avg, deviation_max, path_length_manhattan, smoothness_cost, TrajectoryPair};
use fetchsim_core::model::{load_config, Pose3D};
use fetchsim_core::perception::{estimate_box, PerceptionParams};
use fetchsim_core::sim::{emit_report, run_trials};
use fetchsim_core::{Error, Result};

#[derive(Parser)]
#[command(name = "fetchsim", version, about = "Simulated drink-fetch service")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run fetch episodes and write the aggregate report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        trials: u32,
        /// Defaults to the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Estimate an object box from a point cloud file and a region of interest.
    Perceive {
        #[arg(long)]
        cloud: PathBuf,
        /// `x,y,w,h,label` in pixels.
        #[arg(long)]
        roi: String,
        /// Camera description (TOML).
        #[arg(long)]
        camera: PathBuf,
        /// Known object height, meters.
        #[arg(long)]
        height: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Plan an arm trajectory from the ready posture to a base-frame target.
    PlanArm {
        #[arg(long)]
        config: PathBuf,
        /// `x,y,z` in the base frame.
        #[arg(long)]
        target: String,
        /// Output file for the trajectory; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the deterministic arm planner with the sampling baseline.
    BenchPlanners {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        /// Baseline planning budget, milliseconds.
        #[arg(long, default_value_t = 1000.0)]
        budget: f64,
    },
    /// Localization deviation between estimated and true base trajectories.
    EvalLocalization {
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Alignment tick, seconds.
        #[arg(long, default_value_t = 0.005)]
        tick: f64,
    },
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value"));
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run {
            config,
            trials,
            seed,
            report,
        } => {
            let cfg = load_config(&config)?;
            let seed = seed.unwrap_or(cfg.noise.master_seed);
            let rep = run_trials(&cfg, trials, seed)?;
            match report {
                Some(path) => {
                    emit_report(&rep, &path)?;
                    let rate = rep.overall_success.unwrap_or(0.0);
                    let mean = rep.mean_time.map_or("n/a".to_string(), |t| format!("{t:.2} s"));
                    eprintln!("{} trials, overall success {rate:.3}, mean time {mean}", rep.trials);
                }
                None => print_json(&serde_json::to_value(&rep).expect("report is serializable")),
            }
        }
        Cmd::Perceive {
            cloud,
            roi,
            camera,
            height,
            seed,
        } => {
            if !(height > 0.0 && height.is_finite()) {
                return Err(Error::Validation(vec!["height must be positive".into()]));
            }
            let roi = parse_roi_arg(&roi)?;
            let camera = parse_camera(&read_text(&camera)?)?;
            let problems = roi.validate(Some((camera.width, camera.height)));
            if !problems.is_empty() {
                return Err(Error::Validation(problems));
            }
            let cloud = parse_point_cloud(&read_text(&cloud)?)?;
            let b = estimate_box(&cloud, &roi, &camera, height, &PerceptionParams::default(), seed)?;
            print_json(&serde_json::to_value(&b).expect("box is serializable"));
        }
        Cmd::PlanArm { config, target, out } => {
            let cfg = load_config(&config)?;
            let p = parse_vector3_arg(&target)?;
            let side = if p.y >= 0.0 { ArmSide::Right } else { ArmSide::Left };
            let model = ArmModel::from_config(&cfg.robot, side);
            let q0 = ready_posture(&cfg.robot, side);
            let started = Instant::now();
            let traj = plan_arm_trajectory(&model, &q0, &Pose3D::from_position(p), &cfg.robot)?;
            let elapsed = started.elapsed();
            let text = format_arm_trajectory(&traj);
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
            let tool = forward_kinematics(&model, &traj.final_q()).position;
            eprintln!(
                "{side:?} arm, {:.3} s, {} samples, tool at ({:.4}, {:.4}, {:.4}), planned in {:.3} ms",
                traj.duration(),
                traj.samples().len(),
                tool.x,
                tool.y,
                tool.z,
                elapsed.as_secs_f64() * 1e3
            );
        }
        Cmd::BenchPlanners { config, seeds, budget } => {
            if !(budget > 0.0 && budget.is_finite()) || seeds == 0 {
                return Err(Error::Validation(vec!["budget and seeds must be positive".into()]));
            }
            let cfg = load_config(&config)?;
            let s = grasp_scenario(&cfg, &cfg.task.request)?;
            let started = Instant::now();
            let det = plan_arm_trajectory(&s.model, &s.q_start, &s.target, &cfg.robot)?;
            let det_ms = started.elapsed().as_secs_f64() * 1e3;
            let det_path = det.tool_path(&s.model);
            let contacts = verify_collision_free(&det, &s.model, &cfg.world, &s.base).len();
            let settings = BaselineSettings::default();
            let mut runs = Vec::new();
            let mut lengths = Vec::new();
            for seed in 0..seeds {
                let outcome = plan_arm_sampling_baseline(
                    &s.model,
                    &s.q_start,
                    &s.target,
                    &cfg.world,
                    &s.base,
                    budget / 1e3,
                    seed,
                    &cfg.robot,
                    &settings,
                )?;
                match &outcome {
                    BaselineOutcome::Success {
                        trajectory,
                        checks_used,
                        ..
                    } => {
                        let len = path_length_manhattan(&trajectory.tool_path(&s.model))?;
                        lengths.push(len);
                        runs.push(json!({"seed": seed, "success": true, "ee_path_length": len,
                            "duration": trajectory.duration(), "checks_used": checks_used}));
                    }
                    BaselineOutcome::Failure { checks_used, reason } => {
                        runs.push(json!({"seed": seed, "success": false, "checks_used": checks_used,
                            "reason": reason}));
                    }
                }
            }
            let n = lengths.len() as f64;
            let mean = (n > 0.0).then(|| lengths.iter().sum::<f64>() / n);
            let variance = mean.map(|m| lengths.iter().map(|l| (l - m).powi(2)).sum::<f64>() / n);
            print_json(&json!({
                "scenario": {"label": s.label, "arm": s.model.side, "base": [s.base.x, s.base.y, s.base.theta]},
                "deterministic": {
                    "ee_path_length": path_length_manhattan(&det_path)?,
                    "smoothness": smoothness_cost(&det_path)?,
                    "duration": det.duration(),
                    "planning_ms": det_ms,
                    "contacts": contacts,
                },
                "baseline": {
                    "seeds": seeds,
                    "budget_ms": budget,
                    "plan_success_rate": n / seeds as f64,
                    "mean_ee_path_length": mean,
                    "ee_path_length_variance": variance,
                    "runs": runs,
                },
            }));
        }
        Cmd::EvalLocalization { est, truth, tick } => {
            if !(tick > 0.0 && tick.is_finite()) {
                return Err(Error::Validation(vec!["tick must be positive".into()]));
            }
            let est = parse_base_trajectory(&read_text(&est)?)?;
            let truth = parse_base_trajectory(&read_text(&truth)?)?;
            let pair = TrajectoryPair::align(&base_positions(&est), &base_positions(&truth), tick);
            print_json(&json!({
                "matched_samples": pair.len(),
                "deviation_max": deviation_max(&pair)?,
                "deviation_avg": deviation_avg(&pair)?,
            }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
