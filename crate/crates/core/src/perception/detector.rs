use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::Roi2D;
use crate::model::{CameraModel, Pose2D, WorldModel};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sim::NoiseModel;

/// Stand-in for a learned 2D detector: the image bounds of each catalog
/// object's bounding box, jittered and randomly dropped.
///
/// Objects with a corner at or behind the image plane, farther than the
/// sensor depth limit, or projecting outside the image are not reported.
/// Confidence is the fraction of the projected box left after clipping to
/// the image. Each object draws from its own seed stream.
pub fn detect_objects_2d_sim(
    world: &WorldModel,
    robot: &Pose2D,
    camera: &CameraModel,
    noise: &NoiseModel,
    seed: u64,
) -> Vec<Roi2D> {
    let camera_from_world = camera.world_from_camera(robot).inverse();
    let jitter = Normal::new(0.0, noise.detection_pixel_sigma).expect("sigma validated");
    let mut out = Vec::new();
    for (index, object) in world.objects.iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(seed, index as u64));
        let missed = rng.random::<f64>() < noise.detection_miss_prob;

        let center = camera_from_world.transform_point(&object.center().into());
        if center.coords.norm() > camera.max_depth {
            continue;
        }
        let mut pixels = Vec::with_capacity(8);
        for corner in object.bounding_corners() {
            let c = camera_from_world.transform_point(&corner.into()).coords;
            match camera.project(&c) {
                Some(px) => pixels.push(px),
                None => break,
            }
        }
        if pixels.len() < 8 {
            continue;
        }
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for px in &pixels {
            x0 = x0.min(px.x);
            y0 = y0.min(px.y);
            x1 = x1.max(px.x);
            y1 = y1.max(px.y);
        }
        let full_area = (x1 - x0) * (y1 - y0);
        let (w, h) = (camera.width as f64, camera.height as f64);
        let (cx0, cy0, cx1, cy1) = (x0.max(0.0), y0.max(0.0), x1.min(w), y1.min(h));
        if cx1 <= cx0 || cy1 <= cy0 || missed {
            continue;
        }
        let confidence = ((cx1 - cx0) * (cy1 - cy0) / full_area).clamp(0.0, 1.0);
        let mut d = [0.0; 4];
        if noise.detection_pixel_sigma > 0.0 {
            for v in &mut d {
                *v = jitter.sample(&mut rng);
            }
        }
        out.push(Roi2D {
            x: cx0 + d[0],
            y: cy0 + d[1],
            w: (cx1 - cx0 + d[2]).max(1.0),
            h: (cy1 - cy0 + d[3]).max(1.0),
            label: object.label.clone(),
            confidence,
        });
    }
    out
}
