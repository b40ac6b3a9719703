use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{elbow_and_wrist, ArmModel, ArmTrajectory, JointVector};
use crate::model::{Furniture, Pose2D, WorldModel};

pub const LINK_NAMES: [&str; 3] = ["upper_arm", "forearm", "hand"];

/// A link capsule touching a furniture box at trajectory time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub t: f64,
    pub link: String,
    pub body: String,
}

/// Link center segments in the world frame for a base at `base`.
pub fn link_segments(model: &ArmModel, q: &JointVector, base: &Pose2D) -> [(Vector3<f64>, Vector3<f64>); 3] {
    let iso = base.to_isometry();
    let [s, e, w, t] = elbow_and_wrist(model, q).map(|p| iso.transform_point(&p.into()).coords);
    [(s, e), (e, w), (w, t)]
}

fn point_box_distance(p: &Vector3<f64>, lo: &Vector3<f64>, hi: &Vector3<f64>) -> f64 {
    let d = (lo - p).sup(&Vector3::zeros()).sup(&(p - hi));
    d.norm()
}

/// Distance between a segment and an axis-aligned box. Point-to-box
/// distance is convex, so a golden-section search along the segment finds
/// the minimum.
pub(crate) fn segment_box_distance(a: &Vector3<f64>, b: &Vector3<f64>, lo: &Vector3<f64>, hi: &Vector3<f64>) -> f64 {
    let f = |s: f64| point_box_distance(&(a + (b - a) * s), lo, hi);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut l, mut r) = (0.0, 1.0);
    let mut m1 = r - ratio * (r - l);
    let mut m2 = l + ratio * (r - l);
    let (mut f1, mut f2) = (f(m1), f(m2));
    for _ in 0..80 {
        if f1 <= f2 {
            r = m2;
            m2 = m1;
            f2 = f1;
            m1 = r - ratio * (r - l);
            f1 = f(m1);
        } else {
            l = m1;
            m1 = m2;
            f1 = f2;
            m2 = l + ratio * (r - l);
            f2 = f(m2);
        }
    }
    f(0.0).min(f(1.0)).min(f1).min(f2)
}

pub(crate) fn capsule_hits(a: &Vector3<f64>, b: &Vector3<f64>, radius: f64, body: &Furniture) -> bool {
    segment_box_distance(a, b, &body.min(), &body.max()) <= radius
}

/// Configuration check used by the planners: any link capsule touching any
/// furniture box.
pub(crate) fn configuration_collides(model: &ArmModel, q: &JointVector, base: &Pose2D, world: &WorldModel) -> bool {
    link_segments(model, q, base)
        .iter()
        .any(|(a, b)| world.furniture.iter().any(|f| capsule_hits(a, b, model.link_radius, f)))
}

/// Sweeps every sample of `traj` and reports each (link, furniture) contact.
/// An empty result means the trajectory is collision-free at the sampling
/// resolution.
pub fn verify_collision_free(
    traj: &ArmTrajectory,
    model: &ArmModel,
    world: &WorldModel,
    base: &Pose2D,
) -> Vec<Contact> {
    let mut contacts = Vec::new();
    for sample in traj.samples() {
        for (name, (a, b)) in LINK_NAMES.iter().zip(link_segments(model, &sample.q, base)) {
            for body in &world.furniture {
                if capsule_hits(&a, &b, model.link_radius, body) {
                    contacts.push(Contact {
                        t: sample.t,
                        link: (*name).to_string(),
                        body: body.name.clone(),
                    });
                }
            }
        }
    }
    contacts
}
