//! Base motion: straight-line transfers with a cosine-ramped trapezoidal
//! speed profile, and the closed-loop approach toward a tracked object.
//!
//! Base velocities in trajectories are world-frame `(vx, vy, ω)`; approach
//! commands are in the robot frame.

use std::f64::consts::PI;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::arm::ArmSide;
use crate::model::{normalize_angle, Pose2D, RobotConfig, VelocityScalingLimits};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseSample {
    pub t: f64,
    pub pose: Pose2D,
    /// World-frame `[vx, vy, omega]`.
    pub velocity: [f64; 3],
}

impl BaseSample {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// Timestamped base poses; `t` starts at 0 and strictly increases.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseTrajectory {
    samples: Vec<BaseSample>,
}

impl BaseTrajectory {
    /// Checks the time base: first sample at 0, strictly increasing.
    pub fn new(samples: Vec<BaseSample>) -> Result<Self> {
        if samples.first().is_some_and(|s| s.t != 0.0) {
            return Err(Error::Parse("base trajectory must start at t = 0".into()));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Parse("base trajectory timestamps must strictly increase".into()));
        }
        Ok(BaseTrajectory { samples })
    }

    pub fn samples(&self) -> &[BaseSample] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn final_pose(&self) -> Option<Pose2D> {
        self.samples.last().map(|s| s.pose)
    }

    pub fn max_speed(&self) -> f64 {
        self.samples.iter().map(BaseSample::speed).fold(0.0, f64::max)
    }
}

/// Robot-frame velocity command issued while approaching a tracked object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproachCommand {
    pub v_forward: f64,
    pub v_lateral: f64,
}

/// Linear map of the clamped lateral offset onto `[vy_min, vy_max]`.
pub fn scale_lateral_velocity(y_obj: f64, limits: &VelocityScalingLimits) -> f64 {
    let y = y_obj.clamp(limits.y_min, limits.y_max);
    limits.vy_min + (limits.vy_max - limits.vy_min) * (y - limits.y_min) / (limits.y_max - limits.y_min)
}

/// Longitudinal speed schedule: cosine ramp up, cruise, cosine ramp down.
/// Falls back to a triangular schedule when the distance is too short to
/// reach the cruise speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub distance: f64,
    pub v_cruise: f64,
    pub t_ramp: f64,
    pub t_cruise: f64,
}

impl SpeedProfile {
    /// Ramp duration is `v_cruise / accel`, so `accel` is the mean ramp
    /// acceleration; the peak is `π/2` times larger.
    pub fn new(distance: f64, v_target: f64, accel: f64) -> Self {
        let full_ramps = v_target * v_target / accel;
        if full_ramps <= distance {
            SpeedProfile {
                distance,
                v_cruise: v_target,
                t_ramp: v_target / accel,
                t_cruise: (distance - full_ramps) / v_target,
            }
        } else {
            let v = (distance * accel).sqrt();
            SpeedProfile {
                distance,
                v_cruise: v,
                t_ramp: v / accel,
                t_cruise: 0.0,
            }
        }
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.t_ramp + self.t_cruise
    }

    pub fn peak_accel(&self) -> f64 {
        self.v_cruise * PI / (2.0 * self.t_ramp)
    }

    fn ramp_distance(&self, t: f64) -> f64 {
        0.5 * self.v_cruise * (t - self.t_ramp / PI * (PI * t / self.t_ramp).sin())
    }

    fn ramp_speed(&self, t: f64) -> f64 {
        0.5 * self.v_cruise * (1.0 - (PI * t / self.t_ramp).cos())
    }

    pub fn distance_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration());
        if t <= self.t_ramp {
            self.ramp_distance(t)
        } else if t <= self.t_ramp + self.t_cruise {
            0.5 * self.v_cruise * self.t_ramp + self.v_cruise * (t - self.t_ramp)
        } else {
            self.distance - self.ramp_distance(self.duration() - t)
        }
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.duration() {
            return 0.0;
        }
        if t <= self.t_ramp {
            self.ramp_speed(t)
        } else if t <= self.t_ramp + self.t_cruise {
            self.v_cruise
        } else {
            self.ramp_speed(self.duration() - t)
        }
    }
}

/// Analytic straight-line transfer with a cosine-eased heading change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseMotion {
    pub start: Pose2D,
    pub goal: Pose2D,
    pub profile: SpeedProfile,
    direction: Vector2<f64>,
    turn: f64,
}

impl BaseMotion {
    pub fn new(start: &Pose2D, goal: &Pose2D, cfg: &RobotConfig) -> Result<Self> {
        let delta = goal.position() - start.position();
        let distance = delta.norm();
        if !(distance > 1e-12) {
            return Err(Error::ZeroDistance);
        }
        Ok(BaseMotion {
            start: *start,
            goal: *goal,
            profile: SpeedProfile::new(distance, cfg.base_v_operational, cfg.base_a_peak),
            direction: delta / distance,
            turn: normalize_angle(goal.theta - start.theta),
        })
    }

    pub fn duration(&self) -> f64 {
        self.profile.duration()
    }

    pub fn state_at(&self, t: f64) -> BaseSample {
        let duration = self.duration();
        if t >= duration {
            return BaseSample {
                t: duration,
                pose: self.goal,
                velocity: [0.0; 3],
            };
        }
        let t = t.max(0.0);
        let s = self.profile.distance_at(t);
        let v = self.profile.speed_at(t);
        let phase = PI * t / duration;
        let theta = self.start.theta + self.turn * 0.5 * (1.0 - phase.cos());
        let omega = self.turn * PI / (2.0 * duration) * phase.sin();
        let p = self.start.position() + self.direction * s;
        BaseSample {
            t,
            pose: Pose2D::new(p.x, p.y, theta),
            velocity: [self.direction.x * v, self.direction.y * v, omega],
        }
    }

    /// Samples every `tick` seconds; the last sample sits exactly at the
    /// end time and equals the goal.
    pub fn sample(&self, tick: f64) -> BaseTrajectory {
        BaseTrajectory {
            samples: tick_times(self.duration(), tick)
                .into_iter()
                .map(|t| self.state_at(t))
                .collect(),
        }
    }
}

/// `0, tick, 2·tick, …` up to `duration`, always ending at `duration`.
pub(crate) fn tick_times(duration: f64, tick: f64) -> Vec<f64> {
    let n = (duration / tick).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * tick).collect();
    if duration - times[n] > 1e-9 * tick {
        times.push(duration);
    } else if n > 0 {
        times[n] = duration;
    }
    times
}

/// Straight-line base trajectory from `start` to `goal` at the operational
/// speed, sampled at the control tick.
pub fn plan_base_trajectory(start: &Pose2D, goal: &Pose2D, cfg: &RobotConfig) -> Result<BaseTrajectory> {
    Ok(BaseMotion::new(start, goal, cfg)?.sample(cfg.control_tick))
}

/// Base pose that puts the `arm` shoulder `grasp_standoff` behind `object`
/// along `heading`, with the shoulder aligned to the object laterally.
pub fn arrival_offset_pose(object: &Vector2<f64>, arm: ArmSide, heading: f64, cfg: &RobotConfig) -> Pose2D {
    let a = &cfg.arm;
    let (s, c) = heading.sin_cos();
    let forward = Vector2::new(c, s);
    let shoulder = object - forward * a.grasp_standoff;
    let lateral = arm.lateral_sign() * a.shoulder_lateral_offset;
    let base = Pose2D::new(0.0, 0.0, heading).transform_point(&Vector2::new(-a.shoulder_forward_offset, -lateral));
    Pose2D::new(shoulder.x + base.x, shoulder.y + base.y, heading)
}

/// What the approach controller tracks: the object in world coordinates and
/// the manipulator that should end up aligned with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproachTarget {
    pub object: Vector2<f64>,
    pub arm: ArmSide,
}

impl ApproachTarget {
    /// Remaining forward travel and lateral misalignment of the manipulator,
    /// both in the robot frame.
    pub fn errors(&self, robot: &Pose2D, cfg: &RobotConfig) -> (f64, f64) {
        let local = robot.inverse_transform_point(&self.object);
        let a = &cfg.arm;
        let forward = local.x - a.shoulder_forward_offset - a.grasp_standoff;
        let lateral = local.y - self.arm.lateral_sign() * a.shoulder_lateral_offset;
        (forward, lateral)
    }
}

/// One step of the approach law.
///
/// The lateral command applies the velocity scaling to the magnitude of the
/// manipulator's lateral misalignment and points it toward the object. The
/// forward command is the operational speed, reduced linearly inside the
/// slowdown distance, floored at the creep speed until the stop tolerance.
/// The combined speed never exceeds `base_v_max`.
pub fn approach_controller(robot: &Pose2D, target: &ApproachTarget, cfg: &RobotConfig) -> ApproachCommand {
    let settings = &cfg.approach;
    let (forward, lateral) = target.errors(robot, cfg);
    let v_lateral = lateral.signum() * scale_lateral_velocity(lateral.abs(), &settings.limits);
    let v_forward = if forward <= settings.stop_tolerance {
        0.0
    } else {
        (cfg.base_v_operational * (forward / settings.slowdown_distance).min(1.0)).max(settings.creep_speed)
    };
    let speed = v_forward.hypot(v_lateral);
    let scale = if speed > cfg.base_v_max {
        cfg.base_v_max / speed
    } else {
        1.0
    };
    ApproachCommand {
        v_forward: v_forward * scale,
        v_lateral: v_lateral * scale,
    }
}

/// Closed-loop approach integrated at the control tick.
///
/// Velocity changes are limited to `base_a_peak` per second, and lateral
/// commands inside the lateral tolerance are suppressed. The run ends once
/// both tolerances hold and the base is at rest.
pub fn simulate_approach(
    start: &Pose2D,
    target: &ApproachTarget,
    cfg: &RobotConfig,
    timeout: f64,
) -> Result<BaseTrajectory> {
    let tick = cfg.control_tick;
    let max_dv = cfg.base_a_peak * tick;
    let max_ticks = (timeout / tick).ceil() as usize;
    let mut pose = *start;
    let mut v = Vector2::zeros();
    let mut samples = vec![BaseSample {
        t: 0.0,
        pose,
        velocity: [0.0; 3],
    }];
    for k in 1..=max_ticks {
        let (forward, lateral) = target.errors(&pose, cfg);
        let done = forward <= cfg.approach.stop_tolerance && lateral.abs() <= cfg.approach.lateral_tolerance;
        if done && v == Vector2::zeros() {
            return BaseTrajectory::new(samples);
        }
        let mut cmd = approach_controller(&pose, target, cfg);
        if lateral.abs() <= cfg.approach.lateral_tolerance {
            cmd.v_lateral = 0.0;
        }
        let wanted = Vector2::new(cmd.v_forward, cmd.v_lateral);
        let dv = wanted - v;
        v = if dv.norm() <= max_dv {
            wanted
        } else {
            v + dv * (max_dv / dv.norm())
        };
        let world_v = pose.transform_point(&v) - pose.position();
        let next = pose.position() + world_v * tick;
        pose = Pose2D::new(next.x, next.y, pose.theta);
        samples.push(BaseSample {
            t: k as f64 * tick,
            pose,
            velocity: [world_v.x, world_v.y, 0.0],
        });
    }
    Err(Error::PlanningFailed {
        iterations: max_ticks,
        reason: "approach did not converge before the timeout".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn limits(vy_min: f64, vy_max: f64) -> VelocityScalingLimits {
        VelocityScalingLimits {
            vy_min,
            vy_max,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    #[test]
    fn scaling_endpoints_and_midpoint() {
        let l = limits(0.1, 0.7);
        assert_eq!(scale_lateral_velocity(0.0, &l), 0.1);
        assert_eq!(scale_lateral_velocity(1.0, &l), 0.7);
        assert!((scale_lateral_velocity(0.5, &l) - 0.4).abs() < 1e-15);
        assert_eq!(scale_lateral_velocity(-3.0, &l), 0.1);
        assert_eq!(scale_lateral_velocity(3.0, &l), 0.7);
    }

    #[test]
    fn short_transfer_hits_boundary_conditions() {
        let cfg = RobotConfig::default();
        let traj = plan_base_trajectory(&Pose2D::new(0.0, 0.0, 0.0), &Pose2D::new(2.0, 0.0, 0.0), &cfg).unwrap();
        let first = traj.samples()[0];
        let last = *traj.samples().last().unwrap();
        assert_eq!(last.pose, Pose2D::new(2.0, 0.0, 0.0));
        assert_eq!(first.velocity, [0.0; 3]);
        assert_eq!(last.velocity, [0.0; 3]);
    }

    #[test]
    fn long_transfer_cruises_at_operational_speed() {
        let cfg = RobotConfig::default();
        let traj = plan_base_trajectory(&Pose2D::new(1.0, 1.0, 0.0), &Pose2D::new(7.0, 3.0, 0.5), &cfg).unwrap();
        assert!((traj.max_speed() - 0.694).abs() < 1e-6);
    }

    #[test]
    fn triangular_profile_for_short_distances() {
        let p = SpeedProfile::new(0.2, 0.694, 0.5);
        assert_eq!(p.t_cruise, 0.0);
        assert!(p.v_cruise < 0.694);
        assert!((p.distance_at(p.duration()) - 0.2).abs() < 1e-12);
        assert!((p.distance_at(p.t_ramp) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_is_rejected() {
        let cfg = RobotConfig::default();
        let p = Pose2D::new(1.0, 1.0, 0.0);
        assert!(matches!(plan_base_trajectory(&p, &p, &cfg), Err(Error::ZeroDistance)));
    }

    #[test]
    fn arrival_pose_offsets_the_right_shoulder() {
        let cfg = RobotConfig::default();
        let goal = arrival_offset_pose(&Vector2::new(3.0, 2.0), ArmSide::Right, 0.0, &cfg);
        assert!((goal.x - 2.45).abs() < 1e-12);
        assert!((goal.y - 1.75).abs() < 1e-12);
        assert_eq!(goal.theta, 0.0);
        let left = arrival_offset_pose(&Vector2::new(3.0, 2.0), ArmSide::Left, 0.0, &cfg);
        assert!((left.x - goal.x).abs() < 1e-12);
        assert!(((left.y - 2.0) + (goal.y - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn aligned_manipulator_gets_the_minimum_lateral_speed() {
        let cfg = RobotConfig::default();
        let robot = Pose2D::new(0.0, 0.0, 0.0);
        let target = ApproachTarget {
            object: Vector2::new(2.0, cfg.arm.shoulder_lateral_offset),
            arm: ArmSide::Right,
        };
        let cmd = approach_controller(&robot, &target, &cfg);
        assert_eq!(cmd.v_lateral, cfg.approach.limits.vy_min);
        assert_eq!(cmd, approach_controller(&robot, &target, &cfg));
        assert_eq!(cmd.v_forward, cfg.base_v_operational);
    }

    proptest! {
        #[test]
        fn scaling_is_monotone_and_bounded(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let l = limits(0.05, 0.8);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let va = scale_lateral_velocity(lo, &l);
            let vb = scale_lateral_velocity(hi, &l);
            prop_assert!(va <= vb);
            prop_assert!((0.05..=0.8).contains(&va) && (0.05..=0.8).contains(&vb));
        }
    }
}
