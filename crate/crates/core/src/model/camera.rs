use std::f64::consts::FRAC_PI_6;

use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::pose::{Pose2D, Pose3D};

/// Pinhole depth camera mounted on the robot head.
///
/// Points are expressed in the optical frame: z along the viewing direction,
/// x toward increasing `u`, y toward increasing `v` (image down). The mount
/// pose places the untilted camera in the base frame looking along base +x;
/// `tilt` then pitches the view downward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub mount_pose: Pose3D,
    pub tilt: f64,
    /// Sensor depth limit; nothing beyond this distance is returned.
    pub max_depth: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        // 640x480 with a 60 degree horizontal field of view.
        let f = 320.0 / FRAC_PI_6.tan();
        CameraModel {
            fx: f,
            fy: f,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
            mount_pose: Pose3D::from_position(Vector3::new(0.0, 0.0, 1.2)),
            tilt: FRAC_PI_6,
            max_depth: 2.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.fx > 0.0 && self.fy > 0.0) {
            v.push("camera: focal lengths must be positive".to_string());
        }
        if self.width == 0 || self.height == 0 {
            v.push("camera: image size must be non-zero".to_string());
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) {
            v.push(format!("camera: cx {} outside [0, {})", self.cx, self.width));
        }
        if !(self.cy >= 0.0 && self.cy < self.height as f64) {
            v.push(format!("camera: cy {} outside [0, {})", self.cy, self.height));
        }
        if !self.mount_pose.is_valid() {
            v.push("camera: mount_pose orientation is not a unit quaternion".to_string());
        }
        if !(self.max_depth > 0.0) {
            v.push("camera: max_depth must be positive".to_string());
        }
        v
    }

    /// Camera-frame point to pixel coordinates; `None` for points at or
    /// behind the image plane.
    pub fn project(&self, p: &Vector3<f64>) -> Option<Vector2<f64>> {
        if p.z <= 0.0 {
            return None;
        }
        Some(Vector2::new(
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        ))
    }

    pub fn in_image(&self, px: &Vector2<f64>) -> bool {
        px.x >= 0.0 && px.x < self.width as f64 && px.y >= 0.0 && px.y < self.height as f64
    }

    /// Up direction of the scene as seen from the camera.
    pub fn up_axis() -> Vector3<f64> {
        Vector3::new(0.0, -1.0, 0.0)
    }

    /// Optical frame expressed in the robot base frame.
    pub fn base_from_camera(&self) -> Isometry3<f64> {
        // Columns are the optical axes in base coordinates: x_opt = -y_base,
        // y_opt = -z_base, z_opt = +x_base.
        let optical = Rotation3::from_matrix_unchecked(Matrix3::new(
            0.0, 0.0, 1.0, //
            -1.0, 0.0, 0.0, //
            0.0, -1.0, 0.0,
        ));
        let tilt = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), -self.tilt);
        let rotation = self.mount_pose.orientation * UnitQuaternion::from_rotation_matrix(&optical) * tilt;
        Isometry3::from_parts(Translation3::from(self.mount_pose.position), rotation)
    }

    /// Optical frame expressed in the world frame for a robot at `robot`.
    pub fn world_from_camera(&self, robot: &Pose2D) -> Isometry3<f64> {
        robot.to_isometry() * self.base_from_camera()
    }
}
