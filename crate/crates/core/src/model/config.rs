use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::camera::CameraModel;
use super::world::{validate_world, WorldModel};
use crate::perception::PerceptionParams;
use crate::sim::{LocalizationMode, NoiseModel};
use crate::{Error, Result};

/// Bounds for the linear lateral-velocity scaling used while approaching a
/// tracked object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VelocityScalingLimits {
    pub vy_min: f64,
    pub vy_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for VelocityScalingLimits {
    fn default() -> Self {
        VelocityScalingLimits {
            vy_min: 0.0,
            vy_max: 0.8,
            y_min: 0.0,
            y_max: 1.0,
        }
    }
}

impl VelocityScalingLimits {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.vy_min < self.vy_max) {
            v.push(format!(
                "velocity scaling: vy_min {} must be below vy_max {}",
                self.vy_min, self.vy_max
            ));
        }
        if !(self.y_min < self.y_max) {
            v.push(format!(
                "velocity scaling: y_min {} must be below y_max {}",
                self.y_min, self.y_max
            ));
        }
        v
    }
}

/// Closed-loop approach tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproachSettings {
    pub limits: VelocityScalingLimits,
    /// Forward speed ramps down linearly inside this distance to the goal.
    pub slowdown_distance: f64,
    /// Floor on the forward speed while the goal has not been reached.
    pub creep_speed: f64,
    pub stop_tolerance: f64,
    pub lateral_tolerance: f64,
}

impl Default for ApproachSettings {
    fn default() -> Self {
        ApproachSettings {
            limits: VelocityScalingLimits::default(),
            slowdown_distance: 0.5,
            creep_speed: 0.05,
            stop_tolerance: 0.002,
            lateral_tolerance: 0.005,
        }
    }
}

/// Arm link lengths and mounting. The right shoulder sits at
/// `+shoulder_lateral_offset` along base y, the left one at the negative
/// offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmGeometry {
    pub upper_arm: f64,
    pub forearm: f64,
    pub wrist_to_tool: f64,
    pub shoulder_height: f64,
    pub shoulder_lateral_offset: f64,
    pub shoulder_forward_offset: f64,
    /// Planar distance from the shoulder to the object at arrival.
    pub grasp_standoff: f64,
    /// Back-off of the pre-grasp waypoint along the approach axis.
    pub pregrasp_backoff: f64,
    /// Capsule radius of every arm link for collision checks.
    pub link_radius: f64,
    /// Elbow swivel used by the analytic inverse kinematics.
    pub swivel: f64,
    /// Posture the arm is carried in while the base moves.
    pub ready_posture: [f64; 7],
}

impl Default for ArmGeometry {
    fn default() -> Self {
        ArmGeometry {
            upper_arm: 0.32,
            forearm: 0.30,
            wrist_to_tool: 0.18,
            shoulder_height: 1.0,
            shoulder_lateral_offset: 0.25,
            shoulder_forward_offset: 0.0,
            grasp_standoff: 0.55,
            pregrasp_backoff: 0.10,
            link_radius: 0.05,
            swivel: 0.0,
            ready_posture: [0.0, 1.35, 0.0, 2.0, 0.0, -0.5, 0.0],
        }
    }
}

fn default_joint_limits() -> [[f64; 2]; 7] {
    let s = 100f64.to_radians();
    let mut limits = [[-s, s]; 7];
    limits[3] = [0.0, 150f64.to_radians()];
    limits
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    pub base_v_max: f64,
    pub base_v_operational: f64,
    pub base_a_peak: f64,
    pub arm_reach: f64,
    /// `[lower, upper]` per joint, radians. Joint order: shoulder yaw, pitch,
    /// roll, elbow, wrist roll, pitch, yaw.
    pub joint_limits: [[f64; 2]; 7],
    pub joint_vel_limits: [f64; 7],
    pub control_tick: f64,
    pub arm: ArmGeometry,
    pub camera: CameraModel,
    pub approach: ApproachSettings,
}

impl Default for RobotConfig {
    fn default() -> Self {
        RobotConfig {
            base_v_max: 0.972,
            base_v_operational: 0.694,
            base_a_peak: 0.5,
            arm_reach: 0.8,
            joint_limits: default_joint_limits(),
            joint_vel_limits: [2.0; 7],
            control_tick: 0.005,
            arm: ArmGeometry::default(),
            camera: CameraModel::default(),
            approach: ApproachSettings::default(),
        }
    }
}

impl RobotConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.base_v_operational > 0.0 && self.base_v_operational <= self.base_v_max) {
            v.push(format!(
                "robot: need 0 < base_v_operational ({}) <= base_v_max ({})",
                self.base_v_operational, self.base_v_max
            ));
        }
        if !(self.base_a_peak > 0.0) {
            v.push("robot: base_a_peak must be positive".to_string());
        }
        if !(self.control_tick > 0.0) {
            v.push("robot: control_tick must be positive".to_string());
        }
        for (j, [lo, hi]) in self.joint_limits.iter().enumerate() {
            if !(lo < hi) {
                v.push(format!("robot: joint {} lower limit {lo} not below upper {hi}", j + 1));
            }
        }
        for (j, vel) in self.joint_vel_limits.iter().enumerate() {
            if !(*vel > 0.0) {
                v.push(format!("robot: joint {} velocity limit must be positive", j + 1));
            }
        }
        let a = &self.arm;
        if !(a.upper_arm > 0.0 && a.forearm > 0.0 && a.wrist_to_tool > 0.0) {
            v.push("robot: arm link lengths must be positive".to_string());
        }
        let total = a.upper_arm + a.forearm + a.wrist_to_tool;
        if (total - self.arm_reach).abs() > 1e-9 {
            v.push(format!(
                "robot: arm links sum to {total}, expected arm_reach {}",
                self.arm_reach
            ));
        }
        if !(a.grasp_standoff > 0.0 && a.grasp_standoff < self.arm_reach) {
            v.push("robot: grasp_standoff must lie inside the arm reach".to_string());
        }
        if !(a.link_radius > 0.0 && a.pregrasp_backoff >= 0.0) {
            v.push("robot: link_radius must be positive, pregrasp_backoff non-negative".into());
        }
        for (j, q) in a.ready_posture.iter().enumerate() {
            let [lo, hi] = self.joint_limits[j];
            if !(*q >= lo && *q <= hi) {
                v.push(format!("robot: ready posture joint {} outside its limits", j + 1));
            }
        }
        v.extend(self.camera.validate());
        v.extend(self.approach.limits.validate());
        if !(self.approach.slowdown_distance > 0.0 && self.approach.creep_speed > 0.0) {
            v.push("robot: approach slowdown distance and creep speed must be positive".into());
        }
        v
    }
}

/// Task-level timing and scenario parameters for the fetch service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskParams {
    /// Label requested when none is given explicitly.
    pub request: String,
    /// World xy of the drop-off spot on the serving furniture.
    pub serve_spot: [f64; 2],
    /// How far before the grasp pose the navigation leg stops and tracking
    /// takes over.
    pub approach_distance: f64,
    pub detection_latency: f64,
    pub grasp_duration: f64,
    pub place_duration: f64,
    /// Largest object-center error that still allows a grasp.
    pub grasp_tolerance: f64,
    pub relocalize_duration: f64,
    pub relocalize_rate: f64,
    pub relocalize_tolerance: f64,
    pub approach_timeout: f64,
    /// Sensor sampling density, points per square meter of surface.
    pub cloud_density: f64,
    pub localization_mode: LocalizationMode,
    /// Reference human completion time for the same task.
    pub human_baseline_time: f64,
}

impl Default for TaskParams {
    fn default() -> Self {
        TaskParams {
            request: "cola".into(),
            serve_spot: [2.05, 0.7],
            approach_distance: 0.5,
            detection_latency: 0.3,
            grasp_duration: 3.0,
            place_duration: 3.0,
            grasp_tolerance: 0.02,
            relocalize_duration: 2.0,
            relocalize_rate: 0.5,
            relocalize_tolerance: 0.15,
            approach_timeout: 30.0,
            cloud_density: 10_000.0,
            localization_mode: LocalizationMode::Scan,
            human_baseline_time: 9.0,
        }
    }
}

impl TaskParams {
    pub fn validate(&self, world: &WorldModel) -> Vec<String> {
        let mut v = Vec::new();
        if world.object(&self.request).is_none() {
            v.push(format!(
                "task: requested label '{}' is not in the catalog",
                self.request
            ));
        }
        let spot = nalgebra::Vector2::from(self.serve_spot);
        if world.support_under(&spot).is_none() {
            v.push("task: serve_spot does not lie on any furniture".to_string());
        }
        let durations = [
            ("approach_distance", self.approach_distance),
            ("grasp_duration", self.grasp_duration),
            ("place_duration", self.place_duration),
            ("relocalize_duration", self.relocalize_duration),
            ("approach_timeout", self.approach_timeout),
            ("cloud_density", self.cloud_density),
            ("grasp_tolerance", self.grasp_tolerance),
            ("relocalize_tolerance", self.relocalize_tolerance),
            ("human_baseline_time", self.human_baseline_time),
        ];
        for (name, value) in durations {
            if !(value > 0.0) {
                v.push(format!("task: {name} must be positive"));
            }
        }
        if !(self.detection_latency >= 0.0 && self.relocalize_rate >= 0.0) {
            v.push("task: detection_latency and relocalize_rate must be non-negative".into());
        }
        v
    }
}

/// Everything a simulation run needs, as stored in one TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub world: WorldModel,
    pub robot: RobotConfig,
    pub noise: NoiseModel,
    pub perception: PerceptionParams,
    pub task: TaskParams,
}

impl Config {
    pub fn validate(&self) -> Vec<String> {
        let mut v = validate_world(&self.world);
        v.extend(self.robot.validate());
        v.extend(self.noise.validate());
        v.extend(self.perception.validate());
        v.extend(self.task.validate(&self.world));
        v
    }

    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let violations = cfg.validate();
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(violations))
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes to TOML")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Config::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = Config::default();
        assert_eq!(cfg.validate(), Vec::<String>::new());
        let text = cfg.to_toml_string();
        let back = Config::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.world.room_extent, [10.0, 8.0]);
    }

    #[test]
    fn omitted_base_acceleration_defaults() {
        let cfg = Config::from_toml_str("[robot]\nbase_v_max = 0.972\n").unwrap();
        assert_eq!(cfg.robot.base_a_peak, 0.5);
        let again = Config::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again.robot.base_a_peak, 0.5);
    }

    #[test]
    fn inverted_velocity_scaling_is_a_validation_error() {
        let text = "[robot.approach.limits]\nvy_min = 0.8\nvy_max = 0.2\n";
        match Config::from_toml_str(text) {
            Err(Error::Validation(v)) => assert!(v.iter().any(|m| m.contains("vy_min")), "{v:?}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(
            Config::from_toml_str("[robot\nbase_v_max = "),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            Config::from_toml_str("[robot]\nbase_speed = 1.0\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn link_lengths_must_match_reach() {
        let mut cfg = Config::default();
        cfg.robot.arm.forearm = 0.5;
        assert!(cfg.validate().iter().any(|m| m.contains("arm_reach")));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = Config::default();
        let mut b = Config::default();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.noise.cloud_sigma = 0.0;
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
