use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{UnitQuaternion, Vector2, Vector3};

use super::{ArmModel, ArmSide, JointVector};
use crate::base_planner::arrival_offset_pose;
use crate::model::{CatalogObject, Config, Pose2D, Pose3D, RobotConfig, WorldModel};
use crate::{Error, Result};

/// The arm whose shoulder is nearer to `object` in the robot frame. Right
/// shoulders sit at positive base y; an object on the centerline goes to the
/// right arm.
pub fn select_arm(object: &Vector2<f64>, robot: &Pose2D) -> ArmSide {
    if robot.inverse_transform_point(object).y >= 0.0 {
        ArmSide::Right
    } else {
        ArmSide::Left
    }
}

/// Ready posture for `side`. The configured posture is for the right arm;
/// the left arm mirrors the yaw and roll joints.
pub fn ready_posture(cfg: &RobotConfig, side: ArmSide) -> JointVector {
    let mut q = cfg.arm.ready_posture;
    if side == ArmSide::Left {
        for j in [0, 2, 4, 6] {
            q[j] = -q[j];
        }
    }
    q
}

/// Heading that faces the side of the supporting furniture closest to `xy`.
/// Without support, faces `xy` from `from`.
pub fn approach_heading(world: &WorldModel, xy: &Vector2<f64>, from: &Pose2D) -> f64 {
    let Some(f) = world.support_under(xy) else {
        let d = xy - from.position();
        return d.y.atan2(d.x);
    };
    // Distance to the side, and the heading that faces it from outside.
    let sides = [
        (xy.x - f.min[0], 0.0),
        (f.max[0] - xy.x, PI),
        (xy.y - f.min[1], FRAC_PI_2),
        (f.max[1] - xy.y, -FRAC_PI_2),
    ];
    sides
        .iter()
        .fold(
            (f64::INFINITY, 0.0),
            |best, &(d, h)| if d < best.0 { (d, h) } else { best },
        )
        .1
}

/// Grasp target in the base frame: the object center with the tool x axis
/// along the base heading and tool z up.
pub fn object_target(object_center: &Vector3<f64>, base: &Pose2D) -> Pose3D {
    let local = base.inverse_transform_point(&object_center.xy());
    Pose3D::new(
        Vector3::new(local.x, local.y, object_center.z),
        UnitQuaternion::identity(),
    )
}

/// Placement target in the base frame: `held` standing on the furniture
/// under the serve spot.
pub fn place_target(world: &WorldModel, serve_spot: &Vector2<f64>, held: &CatalogObject, base: &Pose2D) -> Pose3D {
    let top = world.support_under(serve_spot).map_or(0.0, |f| f.top());
    let center = Vector3::new(serve_spot.x, serve_spot.y, top + 0.5 * held.height);
    object_target(&center, base)
}

/// Reference grasp query: arm chosen from the start pose, base parked at the
/// arrival pose in front of the object, arm starting from its ready posture.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspScenario {
    pub label: String,
    pub model: ArmModel,
    pub base: Pose2D,
    pub q_start: JointVector,
    pub target: Pose3D,
}

pub fn grasp_scenario(cfg: &Config, label: &str) -> Result<GraspScenario> {
    let world = &cfg.world;
    let object = world
        .object(label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    let xy = object.center().xy();
    let side = select_arm(&xy, &world.robot_start);
    let heading = approach_heading(world, &xy, &world.robot_start);
    let base = arrival_offset_pose(&xy, side, heading, &cfg.robot);
    Ok(GraspScenario {
        label: label.to_string(),
        model: ArmModel::from_config(&cfg.robot, side),
        base,
        q_start: ready_posture(&cfg.robot, side),
        target: object_target(&object.center(), &base),
    })
}
