use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit, Vector3};

use super::{ArmModel, JointVector};
use crate::model::{normalize_angle, Pose3D};
use crate::{Error, Result};

fn rx(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::x_axis(), a)
}

fn ry(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::y_axis(), a)
}

fn rz(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), a)
}

fn shoulder_rotation(q: &JointVector) -> Rotation3<f64> {
    rz(q[0]) * ry(q[1]) * rx(q[2])
}

fn wrist_rotation(q: &JointVector) -> Rotation3<f64> {
    rx(q[4]) * ry(q[5]) * rz(q[6])
}

/// Elbow, wrist center and tool pose in the shoulder frame.
fn chain(model: &ArmModel, q: &JointVector) -> (Vector3<f64>, Vector3<f64>, Rotation3<f64>, Vector3<f64>) {
    let r1 = shoulder_rotation(q);
    let elbow = r1 * Vector3::new(model.upper_arm, 0.0, 0.0);
    let r2 = r1 * ry(-q[3]);
    let wrist = elbow + r2 * Vector3::new(model.forearm, 0.0, 0.0);
    let r3 = r2 * wrist_rotation(q);
    let tool = wrist + r3 * Vector3::new(model.wrist_to_tool, 0.0, 0.0);
    (elbow, wrist, r3, tool)
}

/// Tool pose in the base frame.
pub fn forward_kinematics(model: &ArmModel, q: &JointVector) -> Pose3D {
    let (_, _, rot, tool) = chain(model, q);
    let local = Pose3D::new(tool, nalgebra::UnitQuaternion::from_rotation_matrix(&rot));
    Pose3D::from_isometry(&(model.mount.to_isometry() * local.to_isometry()))
}

/// Shoulder, elbow, wrist center and tool positions in the base frame.
pub fn elbow_and_wrist(model: &ArmModel, q: &JointVector) -> [Vector3<f64>; 4] {
    let (elbow, wrist, _, tool) = chain(model, q);
    let iso = model.mount.to_isometry();
    [Vector3::zeros(), elbow, wrist, tool].map(|p| iso.transform_point(&p.into()).coords)
}

// Shoulder rotation at zero swivel: the elbow lies below the shoulder-wrist
// line, in the vertical plane containing it.
fn reference_shoulder(model: &ArmModel, wrist: &Vector3<f64>, elbow_angle: f64) -> Rotation3<f64> {
    let beta = (model.forearm * elbow_angle.sin()).atan2(model.upper_arm + model.forearm * elbow_angle.cos());
    let yaw = wrist.y.atan2(wrist.x);
    let pitch = (-wrist.z).atan2(wrist.x.hypot(wrist.y)) + beta;
    rz(yaw) * ry(pitch)
}

fn any_perpendicular(axis: &Vector3<f64>) -> Vector3<f64> {
    let helper = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    axis.cross(&helper).normalize()
}

/// Elbow self-motion angle of `q`: rotation about the shoulder-wrist axis
/// from the zero-swivel configuration with the same wrist center.
pub fn swivel_angle(model: &ArmModel, q: &JointVector) -> f64 {
    let (_, wrist, _, _) = chain(model, q);
    let axis = wrist.normalize();
    let delta = shoulder_rotation(q) * reference_shoulder(model, &wrist, q[3]).inverse();
    let x = any_perpendicular(&axis);
    let mx = delta * x;
    axis.dot(&x.cross(&mx)).atan2(x.dot(&mx))
}

/// Closed-form inverse kinematics with the elbow swivel fixed, choosing the
/// in-limit branch closest to the zero configuration.
pub fn inverse_kinematics(model: &ArmModel, target: &Pose3D, swivel: f64) -> Result<JointVector> {
    inverse_kinematics_near(model, target, swivel, &[0.0; 7])
}

/// As [`inverse_kinematics`], choosing the in-limit branch closest to
/// `reference` (first candidate wins ties).
pub fn inverse_kinematics_near(
    model: &ArmModel,
    target: &Pose3D,
    swivel: f64,
    reference: &JointVector,
) -> Result<JointVector> {
    let local = model.mount.to_isometry().inverse() * target.to_isometry();
    let rot_t = local.rotation.to_rotation_matrix();
    let p_t = local.translation.vector;
    let wrist = p_t - rot_t * Vector3::new(model.wrist_to_tool, 0.0, 0.0);

    let (l1, l2) = (model.upper_arm, model.forearm);
    let r = wrist.norm();
    if r > l1 + l2 + 1e-9 || r < (l1 - l2).abs() - 1e-9 || r < 1e-9 {
        return Err(Error::Unreachable(format!(
            "wrist center at {r:.4} m from the shoulder, feasible range [{:.4}, {:.4}]",
            (l1 - l2).abs(),
            l1 + l2
        )));
    }
    let cos_elbow = ((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let elbow = cos_elbow.acos();

    let axis = Unit::new_normalize(wrist);
    let shoulder = Rotation3::from_axis_angle(&axis, swivel) * reference_shoulder(model, &wrist, elbow);
    let (roll, pitch, yaw) = shoulder.euler_angles();
    let shoulder_branches = [
        (yaw, pitch, roll),
        (
            normalize_angle(yaw + PI),
            normalize_angle(PI - pitch),
            normalize_angle(roll + PI),
        ),
    ];

    let mut best: Option<(f64, JointVector)> = None;
    let mut any_solution = false;
    for (q1, q2, q3) in shoulder_branches {
        let r2 = rz(q1) * ry(q2) * rx(q3) * ry(-elbow);
        // (r2ᵀ R)ᵀ = Rz(-q7) Ry(-q6) Rx(-q5) in z-y-x Euler form.
        let (a, b, c) = (r2.inverse() * rot_t).inverse().euler_angles();
        let wrist_branches = [
            (-a, -b, -c),
            (
                normalize_angle(-(a + PI)),
                normalize_angle(-(PI - b)),
                normalize_angle(-(c + PI)),
            ),
        ];
        for (q5, q6, q7) in wrist_branches {
            let q = [
                q1,
                q2,
                q3,
                elbow,
                normalize_angle(q5),
                normalize_angle(q6),
                normalize_angle(q7),
            ];
            let fk = forward_kinematics(model, &q);
            if (fk.position - target.position).norm() > 1e-6 || fk.orientation.angle_to(&target.orientation) > 1e-6 {
                continue;
            }
            any_solution = true;
            if !model.within_limits(&q) {
                continue;
            }
            let cost: f64 = q.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, q));
            }
        }
    }
    match best {
        Some((_, q)) => Ok(q),
        None if any_solution => Err(Error::JointLimit(
            "every inverse kinematics branch violates a joint limit".into(),
        )),
        None => Err(Error::Unreachable("no consistent inverse kinematics branch".into())),
    }
}
