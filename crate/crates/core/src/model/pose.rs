use std::f64::consts::PI;

use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

/// Wraps an angle into (-π, π]. Angles already in range are returned as-is,
/// which keeps the function idempotent bit-for-bit.
pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Planar base pose in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    /// Maps a point from the robot frame into the world frame.
    pub fn transform_point(&self, local: &Vector2<f64>) -> Vector2<f64> {
        let (s, c) = self.theta.sin_cos();
        Vector2::new(self.x + c * local.x - s * local.y, self.y + s * local.x + c * local.y)
    }

    /// Maps a world point into the robot frame.
    pub fn inverse_transform_point(&self, world: &Vector2<f64>) -> Vector2<f64> {
        let (s, c) = self.theta.sin_cos();
        let dx = world.x - self.x;
        let dy = world.y - self.y;
        Vector2::new(c * dx + s * dy, -s * dx + c * dy)
    }

    /// The pose lifted to 3D (z = 0, yaw = theta).
    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(
            Translation3::new(self.x, self.y, 0.0),
            UnitQuaternion::from_euler_angles(0.0, 0.0, self.theta),
        )
    }
}

/// Rigid pose; `orientation` is a unit quaternion.
///
/// Serialized as `{ position = [x, y, z], orientation = [w, x, y, z] }`. The
/// quaternion is not renormalized on load so that a serialize/parse round trip
/// is exact; [`Pose3D::is_valid`] checks the unit-norm invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawPose3D", into = "RawPose3D")]
pub struct Pose3D {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPose3D {
    position: [f64; 3],
    #[serde(default = "identity_wxyz")]
    orientation: [f64; 4],
}

fn identity_wxyz() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl From<RawPose3D> for Pose3D {
    fn from(raw: RawPose3D) -> Self {
        let [w, i, j, k] = raw.orientation;
        Pose3D {
            position: Vector3::from(raw.position),
            orientation: UnitQuaternion::new_unchecked(Quaternion::new(w, i, j, k)),
        }
    }
}

impl From<Pose3D> for RawPose3D {
    fn from(p: Pose3D) -> Self {
        let q = p.orientation.quaternion();
        RawPose3D {
            position: [p.position.x, p.position.y, p.position.z],
            orientation: [q.w, q.i, q.j, q.k],
        }
    }
}

impl Default for Pose3D {
    fn default() -> Self {
        Pose3D::identity()
    }
}

impl Pose3D {
    pub fn identity() -> Self {
        Pose3D {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Pose3D { position, orientation }
    }

    pub fn from_position(position: Vector3<f64>) -> Self {
        Pose3D::new(position, UnitQuaternion::identity())
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        Pose3D::new(iso.translation.vector, iso.rotation)
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    /// Unit-norm check on the stored quaternion.
    pub fn is_valid(&self) -> bool {
        let q = self.orientation.quaternion();
        self.position.iter().all(|v| v.is_finite()) && (q.norm() - 1.0).abs() <= 1e-9
    }

    /// Yaw of the body z-up orientation, i.e. rotation about world z.
    pub fn yaw(&self) -> f64 {
        self.orientation.euler_angles().2
    }
}
