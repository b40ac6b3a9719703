//! Geometric 3D object detection.
//!
//! A 2D detector proposes regions of interest; depth points inside each
//! region are cleaned up and turned into an amodal oriented box:
//!
//! range filter → support-plane RANSAC → RoI gating → euclidean clustering →
//! projection onto the plane → minimum-area rectangle → extrusion by the
//! object's known height.
//!
//! The 2D detector itself is simulated from the world model
//! ([`detect_objects_2d_sim`]).

mod boxfit;
mod cluster;
mod detector;
mod rect;
mod segmentation;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use boxfit::{estimate_box, extrude_box};
pub use cluster::euclidean_cluster;
pub use detector::detect_objects_2d_sim;
pub use rect::{convex_hull, fit_min_area_rect, project_to_plane};
pub use segmentation::{extract_roi_points, filter_range, segment_floor_plane, PlaneSegmentation};

/// 3D points in the camera optical frame, meters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
}

impl PointCloud {
    /// Fails if any coordinate is not finite.
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Parse("point cloud contains non-finite coordinates".into()));
        }
        Ok(PointCloud { points })
    }

    // Callers guarantee finiteness (subsets of a valid cloud).
    pub(crate) fn from_finite(points: Vec<Vector3<f64>>) -> Self {
        debug_assert!(points.iter().all(|p| p.iter().all(|c| c.is_finite())));
        PointCloud { points }
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vector3<f64>> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<Vector3<f64>> {
        self.points
    }

    pub fn centroid(&self) -> Option<Vector3<f64>> {
        if self.points.is_empty() {
            return None;
        }
        let sum: Vector3<f64> = self.points.iter().sum();
        Some(sum / self.points.len() as f64)
    }
}

/// Image-space region proposed by the 2D detector, in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roi2D {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub label: String,
    pub confidence: f64,
}

impl Roi2D {
    pub fn new(x: f64, y: f64, w: f64, h: f64, label: impl Into<String>, confidence: f64) -> Result<Self> {
        let roi = Roi2D {
            x,
            y,
            w,
            h,
            label: label.into(),
            confidence,
        };
        let problems = roi.validate(None);
        if problems.is_empty() {
            Ok(roi)
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Checks size and confidence, and with an image size also that the
    /// region intersects the image.
    pub fn validate(&self, image: Option<(u32, u32)>) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.w > 0.0 && self.h > 0.0) {
            v.push(format!("roi '{}': width and height must be positive", self.label));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            v.push(format!("roi '{}': confidence outside [0, 1]", self.label));
        }
        if ![self.x, self.y, self.w, self.h].iter().all(|c| c.is_finite()) {
            v.push(format!("roi '{}': non-finite bounds", self.label));
        }
        if let Some((width, height)) = image {
            let misses =
                self.x + self.w <= 0.0 || self.y + self.h <= 0.0 || self.x >= width as f64 || self.y >= height as f64;
            if misses {
                v.push(format!("roi '{}': does not intersect the image", self.label));
            }
        }
        v
    }

    pub fn contains(&self, px: &Vector2<f64>) -> bool {
        px.x >= self.x && px.x <= self.x + self.w && px.y >= self.y && px.y <= self.y + self.h
    }

    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }
}

/// Plane `normal · p = offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    normal: Vector3<f64>,
    offset: f64,
}

impl Plane {
    /// Normalizes `normal`; `None` if it has (near) zero length.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Option<Plane> {
        let n = normal.norm();
        if !(n > 1e-12) || !offset.is_finite() {
            return None;
        }
        Some(Plane {
            normal: normal / n,
            offset: offset / n,
        })
    }

    pub fn through_point(normal: Vector3<f64>, point: &Vector3<f64>) -> Option<Plane> {
        let n = normal.try_normalize(1e-12)?;
        Some(Plane {
            normal: n,
            offset: n.dot(point),
        })
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn flipped(&self) -> Plane {
        Plane {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    /// Foot of the perpendicular from `p`.
    pub fn project_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        p - self.signed_distance(p) * self.normal
    }

    /// Point of the plane closest to the origin; origin of in-plane coordinates.
    pub fn origin(&self) -> Vector3<f64> {
        self.offset * self.normal
    }

    /// Right-handed in-plane basis `(e1, e2)` with `e1 × e2 = normal`.
    ///
    /// `e1` is built from the coordinate axis least aligned with the normal
    /// (lowest index on ties), so the basis depends only on the plane.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal;
        let abs = n.abs();
        let helper = if abs.x <= abs.y && abs.x <= abs.z {
            Vector3::x()
        } else if abs.y <= abs.z {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let e1 = n.cross(&helper).normalize();
        let e2 = n.cross(&e1);
        (e1, e2)
    }

    /// In-plane coordinates back to a 3D point on the plane.
    pub fn lift(&self, uv: &Vector2<f64>) -> Vector3<f64> {
        let (e1, e2) = self.basis();
        self.origin() + uv.x * e1 + uv.y * e2
    }
}

/// Oriented rectangle in in-plane coordinates. The first half extent runs
/// along `(cos angle, sin angle)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2D {
    pub center: Vector2<f64>,
    pub half_extents: Vector2<f64>,
    pub angle: f64,
}

impl Rect2D {
    pub fn axes(&self) -> (Vector2<f64>, Vector2<f64>) {
        let (s, c) = self.angle.sin_cos();
        (Vector2::new(c, s), Vector2::new(-s, c))
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_extents.x * self.half_extents.y
    }

    /// Corners counter-clockwise, starting at (-a, -b) in the rectangle frame.
    pub fn corners(&self) -> [Vector2<f64>; 4] {
        let (u, v) = self.axes();
        let a = self.half_extents.x;
        let b = self.half_extents.y;
        [(-a, -b), (a, -b), (a, b), (-a, b)].map(|(x, y)| self.center + x * u + y * v)
    }

    pub fn contains(&self, p: &Vector2<f64>, tol: f64) -> bool {
        let (u, v) = self.axes();
        let d = p - self.center;
        d.dot(&u).abs() <= self.half_extents.x + tol && d.dot(&v).abs() <= self.half_extents.y + tol
    }
}

/// Amodal oriented 3D box: bottom face corners counter-clockwise (seen from
/// above), then the top face in the same order, plus the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub corners: [Vector3<f64>; 8],
    pub center: Vector3<f64>,
    pub label: String,
}

impl Box3D {
    /// Builds a box from corners, computing the center as their mean.
    pub fn from_corners(corners: [Vector3<f64>; 8], label: impl Into<String>) -> Self {
        let center = corners.iter().sum::<Vector3<f64>>() / 8.0;
        Box3D {
            corners,
            center,
            label: label.into(),
        }
    }

    pub fn edges(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let c = &self.corners;
        (c[1] - c[0], c[3] - c[0], c[4] - c[0])
    }

    pub fn volume(&self) -> f64 {
        let (a, b, h) = self.edges();
        a.cross(&b).dot(&h).abs()
    }

    /// Center is the corner mean and the corners form a parallelepiped with
    /// right angles.
    pub fn is_valid(&self) -> bool {
        let c = &self.corners;
        let mean = c.iter().sum::<Vector3<f64>>() / 8.0;
        if (mean - self.center).norm() > 1e-9 {
            return false;
        }
        let (a, b, h) = self.edges();
        let same = |x: Vector3<f64>, y: Vector3<f64>| (x - y).norm() <= 1e-6;
        let parallel = same(c[2] - c[3], a)
            && same(c[2] - c[1], b)
            && same(c[5] - c[4], a)
            && same(c[7] - c[4], b)
            && (0..4).all(|i| same(c[i + 4] - c[i], h));
        let scale = a.norm().max(b.norm()).max(h.norm()).max(1e-12);
        let square = a.dot(&b).abs() <= 1e-6 * scale * scale
            && a.dot(&h).abs() <= 1e-6 * scale * scale
            && b.dot(&h).abs() <= 1e-6 * scale * scale;
        parallel && square
    }

    /// The same box in another frame.
    pub fn transformed(&self, iso: &nalgebra::Isometry3<f64>) -> Box3D {
        Box3D::from_corners(
            self.corners.map(|c| iso.transform_point(&c.into()).coords),
            self.label.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerceptionParams {
    pub max_range: f64,
    pub ransac_iters: usize,
    pub ransac_inlier_tol: f64,
    pub cluster_tol: f64,
    pub cluster_min_size: usize,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        PerceptionParams {
            max_range: 1.5,
            ransac_iters: 200,
            ransac_inlier_tol: 0.008,
            cluster_tol: 0.02,
            cluster_min_size: 30,
        }
    }
}

impl PerceptionParams {
    pub fn validate(&self) -> Vec<String> {
        let ok = self.max_range > 0.0
            && self.ransac_iters > 0
            && self.ransac_inlier_tol > 0.0
            && self.cluster_tol > 0.0
            && self.cluster_min_size > 0;
        if ok {
            Vec::new()
        } else {
            vec!["perception: all parameters must be positive".to_string()]
        }
    }
}
