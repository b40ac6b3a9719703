use nalgebra::{UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::pose::{Pose2D, Pose3D};

/// Axis-aligned collision box for a piece of furniture. The top face is the
/// support surface objects rest on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Furniture {
    pub name: String,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Furniture {
    pub fn min(&self) -> Vector3<f64> {
        Vector3::from(self.min)
    }

    pub fn max(&self) -> Vector3<f64> {
        Vector3::from(self.max)
    }

    pub fn top(&self) -> f64 {
        self.max[2]
    }

    pub fn contains_xy(&self, p: &Vector2<f64>) -> bool {
        p.x >= self.min[0] && p.x <= self.max[0] && p.y >= self.min[1] && p.y <= self.max[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ObjectShape {
    #[default]
    Box,
    /// Upright cylinder; the footprint gives its diameter.
    Cylinder,
}

/// Catalog entry for a graspable object. `pose.position` is the geometric
/// center; objects stand upright so only yaw is meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogObject {
    pub label: String,
    #[serde(default)]
    pub shape: ObjectShape,
    pub pose: Pose3D,
    pub height: f64,
    /// Width along the object's local x and depth along its local y.
    pub footprint: [f64; 2],
}

impl CatalogObject {
    pub fn center(&self) -> Vector3<f64> {
        self.pose.position
    }

    pub fn yaw(&self) -> f64 {
        self.pose.yaw()
    }

    pub fn base_height(&self) -> f64 {
        self.pose.position.z - 0.5 * self.height
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.footprint[0]
    }

    /// Footprint corners in the world xy plane, counter-clockwise.
    pub fn footprint_corners(&self) -> [Vector2<f64>; 4] {
        let (s, c) = self.yaw().sin_cos();
        let hx = 0.5 * self.footprint[0];
        let hy = 0.5 * self.footprint[1];
        let c0 = self.pose.position.xy();
        [(-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)].map(|(x, y)| c0 + Vector2::new(c * x - s * y, s * x + c * y))
    }

    /// Corners of the bounding box, bottom face first.
    pub fn bounding_corners(&self) -> [Vector3<f64>; 8] {
        let fp = self.footprint_corners();
        let z0 = self.base_height();
        let z1 = z0 + self.height;
        let mut out = [Vector3::zeros(); 8];
        for (i, c) in fp.iter().enumerate() {
            out[i] = Vector3::new(c.x, c.y, z0);
            out[i + 4] = Vector3::new(c.x, c.y, z1);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldModel {
    /// Room spans `[0, width] x [0, depth]` in world x and y.
    pub room_extent: [f64; 2],
    pub furniture: Vec<Furniture>,
    pub objects: Vec<CatalogObject>,
    pub robot_start: Pose2D,
}

impl Default for WorldModel {
    fn default() -> Self {
        let upright = |x: f64, y: f64, z: f64| Pose3D::new(Vector3::new(x, y, z), UnitQuaternion::identity());
        WorldModel {
            room_extent: [10.0, 8.0],
            furniture: vec![
                Furniture {
                    name: "shelf".into(),
                    min: [8.58, 2.6, 0.0],
                    max: [9.1, 5.6, 0.75],
                },
                Furniture {
                    name: "serving_table".into(),
                    min: [1.9, 0.3, 0.0],
                    max: [2.7, 1.1, 0.72],
                },
            ],
            // Centers sit half a height above the shelf top.
            objects: vec![
                CatalogObject {
                    label: "cola".into(),
                    shape: ObjectShape::Cylinder,
                    pose: upright(8.70, 3.6, 0.811),
                    height: 0.122,
                    footprint: [0.066, 0.066],
                },
                CatalogObject {
                    label: "juice".into(),
                    shape: ObjectShape::Box,
                    pose: upright(8.72, 4.4, 0.845),
                    height: 0.19,
                    footprint: [0.06, 0.09],
                },
                CatalogObject {
                    label: "water".into(),
                    shape: ObjectShape::Cylinder,
                    pose: upright(8.70, 5.1, 0.86),
                    height: 0.22,
                    footprint: [0.07, 0.07],
                },
            ],
            robot_start: Pose2D::new(1.0, 4.0, 0.0),
        }
    }
}

impl WorldModel {
    pub fn object(&self, label: &str) -> Option<&CatalogObject> {
        self.objects.iter().find(|o| o.label == label)
    }

    pub fn furniture_named(&self, name: &str) -> Option<&Furniture> {
        self.furniture.iter().find(|f| f.name == name)
    }

    /// Furniture whose top face lies under `p`, if any.
    pub fn support_under(&self, p: &Vector2<f64>) -> Option<&Furniture> {
        self.furniture.iter().find(|f| f.contains_xy(p))
    }

    fn inside_room(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && x <= self.room_extent[0] && y >= 0.0 && y <= self.room_extent[1]
    }
}

/// Lists every violated world invariant; empty when the world is valid.
pub fn validate_world(world: &WorldModel) -> Vec<String> {
    let mut out = Vec::new();
    let [w, d] = world.room_extent;
    if !(w > 0.0 && d > 0.0) {
        out.push(format!("room: extent {w} x {d} must be positive"));
    }
    for f in &world.furniture {
        if (0..3).any(|i| f.min[i] >= f.max[i]) {
            out.push(format!("furniture '{}': min must be below max on every axis", f.name));
        } else if !(world.inside_room(f.min[0], f.min[1]) && world.inside_room(f.max[0], f.max[1])) {
            out.push(format!("furniture '{}': lies outside the room", f.name));
        }
    }
    for o in &world.objects {
        let mut problems = Vec::new();
        if !(o.height > 0.0) {
            problems.push(format!("height {} must be positive", o.height));
        }
        if !(o.footprint[0] > 0.0 && o.footprint[1] > 0.0) {
            problems.push("footprint must be positive".to_string());
        }
        if !o.pose.is_valid() {
            problems.push("orientation is not a unit quaternion".to_string());
        } else {
            let up = o.pose.orientation * Vector3::z();
            if (up.z - 1.0).abs() > 1e-6 {
                problems.push("object must stand upright".to_string());
            }
            if !o.footprint_corners().iter().all(|c| world.inside_room(c.x, c.y)) {
                problems.push("lies outside the room".to_string());
            }
        }
        if !problems.is_empty() {
            out.push(format!("object '{}': {}", o.label, problems.join(", ")));
        }
    }
    let s = &world.robot_start;
    if !world.inside_room(s.x, s.y) {
        out.push("robot_start: lies outside the room".to_string());
    }
    out
}
