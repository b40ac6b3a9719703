//! Seven-joint anthropomorphic arm: kinematics, the time-optimal joint
//! trajectory generator, a sampling-based baseline planner and offline
//! collision verification.
//!
//! Joint order is shoulder yaw, pitch, roll, elbow, wrist roll, pitch, yaw.
//! Shoulder and wrist are spherical (intrinsic z-y-x and x-y-z axes); the
//! elbow bends about the upper-arm y axis. At `q = 0` the arm points straight
//! ahead along the shoulder frame x axis. Positive shoulder pitch lowers the
//! arm; positive elbow angles fold the forearm upward.

mod baseline;
mod collision;
mod kinematics;
mod scenario;
mod trajectory;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::model::{Pose3D, RobotConfig};

pub use baseline::{plan_arm_sampling_baseline, BaselineOutcome, BaselineSettings};
pub use collision::{link_segments, verify_collision_free, Contact};
pub use kinematics::{elbow_and_wrist, forward_kinematics, inverse_kinematics, inverse_kinematics_near, swivel_angle};
pub use scenario::{
    approach_heading, grasp_scenario, object_target, place_target, ready_posture, select_arm, GraspScenario,
};
pub use trajectory::{interpolate_joint_path, plan_arm_trajectory, segment_duration, ArmSample, ArmTrajectory};

pub type JointVector = [f64; 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmSide {
    Left,
    Right,
}

impl ArmSide {
    /// Side of the base y axis the shoulder is mounted on.
    pub fn lateral_sign(self) -> f64 {
        match self {
            ArmSide::Right => 1.0,
            ArmSide::Left => -1.0,
        }
    }
}

/// Kinematic and limit data of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmModel {
    pub side: ArmSide,
    pub upper_arm: f64,
    pub forearm: f64,
    pub wrist_to_tool: f64,
    /// Shoulder frame in the base frame.
    pub mount: Pose3D,
    pub joint_limits: [[f64; 2]; 7],
    pub joint_vel_limits: [f64; 7],
    pub link_radius: f64,
}

impl ArmModel {
    pub fn from_config(cfg: &RobotConfig, side: ArmSide) -> Self {
        let a = &cfg.arm;
        ArmModel {
            side,
            upper_arm: a.upper_arm,
            forearm: a.forearm,
            wrist_to_tool: a.wrist_to_tool,
            mount: Pose3D::from_position(Vector3::new(
                a.shoulder_forward_offset,
                side.lateral_sign() * a.shoulder_lateral_offset,
                a.shoulder_height,
            )),
            joint_limits: cfg.joint_limits,
            joint_vel_limits: cfg.joint_vel_limits,
            link_radius: a.link_radius,
        }
    }

    pub fn reach(&self) -> f64 {
        self.upper_arm + self.forearm + self.wrist_to_tool
    }

    pub fn within_limits(&self, q: &JointVector) -> bool {
        q.iter()
            .zip(&self.joint_limits)
            .all(|(v, [lo, hi])| *v >= *lo && *v <= *hi)
    }
}
