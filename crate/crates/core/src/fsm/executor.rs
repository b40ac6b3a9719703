use std::fmt;

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{step_fsm, ArmGoal, BaseGoal, Command, FsmEvent, FsmState, Outcome, Transition};
use crate::arm::{
    approach_heading, object_target, place_target, plan_arm_trajectory, ready_posture, select_arm, ArmModel, ArmSide,
    JointVector,
};
use crate::base_planner::{arrival_offset_pose, plan_base_trajectory, simulate_approach, ApproachTarget};
use crate::metrics::{deviation_avg, deviation_max, path_length_manhattan, smoothness_cost};
use crate::model::{CatalogObject, Config, Pose2D};
use crate::perception::{detect_objects_2d_sim, estimate_box};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sim::{localization_track, simulate_localization, synthesize_cloud};
use crate::{Error, Result};

// Seed streams of one episode.
const STREAM_CLOUD: u64 = 1;
const STREAM_DETECTOR: u64 = 2;
const STREAM_RANSAC: u64 = 3;
const STREAM_GRASP: u64 = 4;
const STREAM_PLACE: u64 = 5;
const STREAM_TRACK: u64 = 6;
const STREAM_RELOCALIZE: u64 = 7;

/// One line of the episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    /// Simulated time in control ticks.
    pub tick: u64,
    pub time: f64,
    pub state: FsmState,
    pub event: String,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} {} {}", self.time, self.state, self.event)
    }
}

/// Per-episode metric values; absent when the episode ended before the
/// phase that produces them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// Manhattan length of the grasp end-effector path.
    pub ee_path_length: Option<f64>,
    pub smoothness: Option<f64>,
    /// Localization deviation along the serve leg.
    pub dev_max: Option<f64>,
    pub dev_avg: Option<f64>,
    /// World-frame error of the last object-center estimate.
    pub box_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub request: String,
    pub seed: u64,
    pub entries: Vec<LogEntry>,
    pub outcome: Outcome,
    /// Time spent in each visited state, in visiting order.
    pub state_durations: Vec<(FsmState, f64)>,
    pub total_time: f64,
    pub metrics: EpisodeMetrics,
}

impl EpisodeLog {
    pub fn visited(&self) -> Vec<FsmState> {
        self.state_durations.iter().map(|(s, _)| *s).collect()
    }

    /// The log as text, one entry per line.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("{e}\n")).collect()
    }
}

struct Episode<'a> {
    cfg: &'a Config,
    object: &'a CatalogObject,
    seed: u64,
    tick: u64,
    state: FsmState,
    state_ticks: Vec<(FsmState, u64)>,
    entries: Vec<LogEntry>,
    pose: Pose2D,
    side: ArmSide,
    q: JointVector,
    /// World-frame object center from the latest detection.
    tracked: Option<Vector3<f64>>,
    detections: u64,
    metrics: EpisodeMetrics,
}

impl Episode<'_> {
    fn log(&mut self, event: impl Into<String>) {
        self.entries.push(LogEntry {
            tick: self.tick,
            time: self.tick as f64 * self.cfg.robot.control_tick,
            state: self.state,
            event: event.into(),
        });
    }

    fn enter(&mut self, state: FsmState) {
        self.state = state;
        self.state_ticks.push((state, 0));
        self.log("enter");
    }

    fn advance(&mut self, seconds: f64) {
        let ticks = (seconds / self.cfg.robot.control_tick - 1e-9).ceil().max(0.0) as u64;
        self.tick += ticks;
        if let Some(last) = self.state_ticks.last_mut() {
            last.1 += ticks;
        }
    }

    fn stream(&self, stream: u64) -> u64 {
        derive_seed(self.seed, stream)
    }

    fn arm_model(&self) -> ArmModel {
        ArmModel::from_config(&self.cfg.robot, self.side)
    }

    fn drive_to(&mut self, goal: &Pose2D) -> Result<crate::base_planner::BaseTrajectory> {
        let traj = match plan_base_trajectory(&self.pose, goal, &self.cfg.robot) {
            Err(Error::ZeroDistance) => crate::base_planner::BaseTrajectory::default(),
            other => other?,
        };
        self.advance(traj.duration());
        if let Some(p) = traj.final_pose() {
            self.pose = p;
        }
        Ok(traj)
    }

    fn execute(&mut self, cmd: &Command) -> FsmEvent {
        let cfg = self.cfg;
        let task = &cfg.task;
        match cmd {
            Command::PlanBase(BaseGoal::Shelf) => {
                let xy = self.object.center().xy();
                self.side = select_arm(&xy, &self.pose);
                self.q = ready_posture(&cfg.robot, self.side);
                let heading = approach_heading(&cfg.world, &xy, &self.pose);
                let arrival = arrival_offset_pose(&xy, self.side, heading, &cfg.robot);
                let back = Vector2::new(heading.cos(), heading.sin()) * task.approach_distance;
                let staging = Pose2D::new(arrival.x - back.x, arrival.y - back.y, heading);
                motion_event(self.drive_to(&staging).map(|_| ()))
            }
            Command::PlanBase(BaseGoal::Serve) => {
                let spot = Vector2::from(task.serve_spot);
                let heading = approach_heading(&cfg.world, &spot, &self.pose);
                let arrival = arrival_offset_pose(&spot, self.side, heading, &cfg.robot);
                let traj = match self.drive_to(&arrival) {
                    Ok(t) => t,
                    Err(_) => return FsmEvent::MotionFailed,
                };
                if !traj.samples().is_empty() {
                    let pair = localization_track(&traj, task.localization_mode, &cfg.noise, self.stream(STREAM_TRACK));
                    self.metrics.dev_max = deviation_max(&pair).ok();
                    self.metrics.dev_avg = deviation_avg(&pair).ok();
                }
                FsmEvent::MotionDone
            }
            Command::RequestDetection => {
                self.advance(task.detection_latency);
                let k = self.detections;
                self.detections += 1;
                let camera = &cfg.robot.camera;
                let cloud = synthesize_cloud(
                    &cfg.world,
                    &self.pose,
                    camera,
                    task.cloud_density,
                    &cfg.noise,
                    derive_seed(self.stream(STREAM_CLOUD), k),
                );
                let rois = detect_objects_2d_sim(
                    &cfg.world,
                    &self.pose,
                    camera,
                    &cfg.noise,
                    derive_seed(self.stream(STREAM_DETECTOR), k),
                );
                let Some(roi) = rois
                    .into_iter()
                    .filter(|r| r.label == self.object.label)
                    .max_by(|a, b| a.confidence.total_cmp(&b.confidence))
                else {
                    return FsmEvent::DetectionFailed;
                };
                let seed = derive_seed(self.stream(STREAM_RANSAC), k);
                match estimate_box(&cloud, &roi, camera, self.object.height, &cfg.perception, seed) {
                    Ok(b) => {
                        let center = camera
                            .world_from_camera(&self.pose)
                            .transform_point(&b.center.into())
                            .coords;
                        self.metrics.box_error = Some((center - self.object.center()).norm());
                        self.tracked = Some(center);
                        FsmEvent::DetectionSucceeded(b)
                    }
                    Err(_) => FsmEvent::DetectionFailed,
                }
            }
            Command::Approach => {
                let Some(center) = self.tracked else {
                    return FsmEvent::MotionFailed;
                };
                let target = ApproachTarget {
                    object: center.xy(),
                    arm: self.side,
                };
                match simulate_approach(&self.pose, &target, &cfg.robot, task.approach_timeout) {
                    Ok(traj) => {
                        self.advance(traj.duration());
                        if let Some(p) = traj.final_pose() {
                            self.pose = p;
                        }
                        FsmEvent::MotionDone
                    }
                    Err(_) => FsmEvent::MotionFailed,
                }
            }
            Command::PlanArm(goal) => {
                let target = match goal {
                    ArmGoal::Grasp(b) => {
                        let center = cfg
                            .robot
                            .camera
                            .world_from_camera(&self.pose)
                            .transform_point(&b.center.into());
                        object_target(&center.coords, &self.pose)
                    }
                    ArmGoal::Place => {
                        place_target(&cfg.world, &Vector2::from(task.serve_spot), self.object, &self.pose)
                    }
                };
                let model = self.arm_model();
                match plan_arm_trajectory(&model, &self.q, &target, &cfg.robot) {
                    Ok(traj) => {
                        if matches!(goal, ArmGoal::Grasp(_)) {
                            let path = traj.tool_path(&model);
                            self.metrics.ee_path_length = path_length_manhattan(&path).ok();
                            self.metrics.smoothness = smoothness_cost(&path).ok();
                        }
                        self.advance(traj.duration());
                        self.q = traj.final_q();
                        FsmEvent::MotionDone
                    }
                    Err(_) => FsmEvent::MotionFailed,
                }
            }
            Command::CloseGripper => {
                self.advance(task.grasp_duration);
                let draw = rng_from_seed(self.stream(STREAM_GRASP)).random::<f64>();
                let aligned = self.metrics.box_error.is_some_and(|e| e <= task.grasp_tolerance);
                if aligned && draw >= cfg.noise.grasp_failure_prob {
                    FsmEvent::GraspConfirmed
                } else {
                    FsmEvent::GraspFailed
                }
            }
            Command::RequestRelocalize => {
                self.advance(task.relocalize_duration);
                let est = simulate_localization(
                    &self.pose,
                    task.relocalize_rate,
                    task.localization_mode,
                    &cfg.noise,
                    self.stream(STREAM_RELOCALIZE),
                );
                if (est.position() - self.pose.position()).norm() <= task.relocalize_tolerance {
                    FsmEvent::RelocalizeConverged
                } else {
                    FsmEvent::RelocalizeFailed
                }
            }
            Command::OpenGripper => {
                self.advance(task.place_duration);
                let draw = rng_from_seed(self.stream(STREAM_PLACE)).random::<f64>();
                if draw >= cfg.noise.place_failure_prob {
                    FsmEvent::PlaceConfirmed
                } else {
                    FsmEvent::PlaceFailed
                }
            }
        }
    }

    /// Runs the commands one at a time. The first failure, or the event of
    /// the last command, concludes the state; other events are acknowledged.
    fn execute_all(&mut self, cmds: &[Command]) -> Option<FsmEvent> {
        let mut last = None;
        for (i, cmd) in cmds.iter().enumerate() {
            self.log(format!("command:{cmd}"));
            let event = self.execute(cmd);
            if event.is_failure() || i + 1 == cmds.len() {
                return Some(event);
            }
            self.log(format!("ack:{event}"));
            last = Some(event);
        }
        last
    }
}

fn motion_event(r: Result<()>) -> FsmEvent {
    match r {
        Ok(()) => FsmEvent::MotionDone,
        Err(_) => FsmEvent::MotionFailed,
    }
}

/// Runs one fetch episode for `request` on the simulated robot.
///
/// Simulated time advances in whole control ticks. Failures are outcomes in
/// the log; the only error is a label missing from the catalog.
pub fn run_service(cfg: &Config, request: &str, seed: u64) -> Result<EpisodeLog> {
    let object = cfg
        .world
        .object(request)
        .ok_or_else(|| Error::UnknownLabel(request.to_string()))?;
    let mut ep = Episode {
        cfg,
        object,
        seed,
        tick: 0,
        state: FsmState::WaitRequest,
        state_ticks: Vec::new(),
        entries: Vec::new(),
        pose: cfg.world.robot_start,
        side: ArmSide::Right,
        q: ready_posture(&cfg.robot, ArmSide::Right),
        tracked: None,
        detections: 0,
        metrics: EpisodeMetrics::default(),
    };
    ep.enter(FsmState::WaitRequest);
    let mut event = FsmEvent::RequestReceived(request.to_string());
    let outcome = loop {
        ep.log(event.to_string());
        let (transition, cmds) = step_fsm(ep.state, &event)?;
        ep.log("exit");
        match transition {
            Transition::Finished(outcome) => {
                ep.log(outcome.to_string());
                break outcome;
            }
            Transition::Next(next) => ep.enter(next),
        }
        event = ep
            .execute_all(&cmds)
            .expect("every non-terminal transition issues a command");
    };
    let tick = cfg.robot.control_tick;
    Ok(EpisodeLog {
        request: request.to_string(),
        seed,
        entries: ep.entries,
        outcome,
        state_durations: ep.state_ticks.iter().map(|(s, n)| (*s, *n as f64 * tick)).collect(),
        total_time: ep.tick as f64 * tick,
        metrics: ep.metrics,
    })
}
