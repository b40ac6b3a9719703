use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{forward_kinematics, inverse_kinematics_near, ArmModel, JointVector};
use crate::base_planner::tick_times;
use crate::metrics::EePath;
use crate::model::{Pose3D, RobotConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSample {
    pub t: f64,
    pub q: JointVector,
}

/// Joint-space trajectory; `t` runs from 0 to `duration`, strictly
/// increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmTrajectory {
    samples: Vec<ArmSample>,
}

impl ArmTrajectory {
    pub fn new(samples: Vec<ArmSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::NotEnoughSamples("arm trajectory needs a sample"));
        }
        if samples[0].t != 0.0 || samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Parse(
                "arm trajectory time must start at 0 and strictly increase".into(),
            ));
        }
        Ok(ArmTrajectory { samples })
    }

    pub fn samples(&self) -> &[ArmSample] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn final_q(&self) -> JointVector {
        self.samples.last().expect("trajectory is non-empty").q
    }

    /// Tool positions over time in the base frame.
    pub fn tool_path(&self, model: &ArmModel) -> EePath {
        EePath::new(
            self.samples
                .iter()
                .map(|s| (s.t, forward_kinematics(model, &s.q).position))
                .collect(),
        )
        .expect("trajectory time base is strictly increasing")
    }

    /// Largest finite-difference speed of each joint.
    pub fn peak_joint_speeds(&self) -> [f64; 7] {
        let mut peak = [0.0; 7];
        for w in self.samples.windows(2) {
            let dt = w[1].t - w[0].t;
            for j in 0..7 {
                peak[j] = f64::max(peak[j], (w[1].q[j] - w[0].q[j]).abs() / dt);
            }
        }
        peak
    }
}

/// Shortest duration of a synchronized cosine move over `delta` that keeps
/// every joint at or below its velocity limit. The cosine profile peaks at
/// `π·|Δq| / (2T)`.
pub fn segment_duration(delta: &JointVector, vel_limits: &[f64; 7]) -> f64 {
    delta
        .iter()
        .zip(vel_limits)
        .map(|(d, v)| PI * d.abs() / (2.0 * v))
        .fold(0.0, f64::max)
}

/// Chains waypoints with synchronized cosine segments (rest to rest) of
/// minimal duration, sampled every `tick`. Coincident waypoints add no time.
pub fn interpolate_joint_path(waypoints: &[JointVector], vel_limits: &[f64; 7], tick: f64) -> ArmTrajectory {
    assert!(!waypoints.is_empty(), "joint path needs a waypoint");
    let mut segments: Vec<(f64, JointVector, JointVector)> = Vec::new();
    let mut start = 0.0;
    for w in waypoints.windows(2) {
        let delta: JointVector = std::array::from_fn(|j| w[1][j] - w[0][j]);
        let duration = segment_duration(&delta, vel_limits);
        if duration > 0.0 {
            segments.push((start, w[0], delta));
            start += duration;
        }
    }
    let total = start;
    if segments.is_empty() {
        return ArmTrajectory {
            samples: vec![ArmSample {
                t: 0.0,
                q: waypoints[0],
            }],
        };
    }
    let mut ends: Vec<f64> = segments.iter().skip(1).map(|s| s.0).collect();
    ends.push(total);
    let final_q = *waypoints.last().expect("non-empty");
    let samples = tick_times(total, tick)
        .into_iter()
        .map(|t| {
            if t >= total {
                return ArmSample { t, q: final_q };
            }
            let i = ends.iter().position(|&e| t < e).unwrap_or(segments.len() - 1);
            let (t0, q0, delta) = &segments[i];
            let phase = PI * (t - t0) / (ends[i] - t0);
            let s = 0.5 * (1.0 - phase.cos());
            ArmSample {
                t,
                q: std::array::from_fn(|j| q0[j] + delta[j] * s),
            }
        })
        .collect();
    ArmTrajectory { samples }
}

/// Pre-grasp waypoint: the target backed off along its own approach (tool x)
/// axis.
pub(crate) fn pregrasp_pose(target: &Pose3D, backoff: f64) -> Pose3D {
    Pose3D::new(
        target.position - target.orientation * Vector3::new(backoff, 0.0, 0.0),
        target.orientation,
    )
}

/// Time-optimal trajectory `q_start → pre-grasp → target` with both
/// waypoints from the closed-form inverse kinematics. No collision checking
/// is done here.
pub fn plan_arm_trajectory(
    model: &ArmModel,
    q_start: &JointVector,
    target: &Pose3D,
    cfg: &RobotConfig,
) -> Result<ArmTrajectory> {
    if !model.within_limits(q_start) {
        return Err(Error::JointLimit("start configuration outside the joint limits".into()));
    }
    let swivel = cfg.arm.swivel;
    let q_goal = inverse_kinematics_near(model, target, swivel, q_start)?;
    if q_goal == *q_start {
        return Ok(ArmTrajectory {
            samples: vec![ArmSample { t: 0.0, q: *q_start }],
        });
    }
    let pre = pregrasp_pose(target, cfg.arm.pregrasp_backoff);
    let q_pre = inverse_kinematics_near(model, &pre, swivel, q_start)?;
    let q_goal = inverse_kinematics_near(model, target, swivel, &q_pre)?;
    Ok(interpolate_joint_path(
        &[*q_start, q_pre, q_goal],
        &model.joint_vel_limits,
        cfg.control_tick,
    ))
}
