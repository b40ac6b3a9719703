use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::NoiseModel;
use crate::model::{CameraModel, CatalogObject, ObjectShape, Pose2D, WorldModel};
use crate::perception::PointCloud;
use crate::rng::rng_from_seed;

struct Surfel {
    p: Vector3<f64>,
    n: Vector3<f64>,
}

fn steps(length: f64, spacing: f64) -> usize {
    ((length / spacing).ceil() as usize + 1).max(2)
}

// Grid over a rectangle, edges included.
fn grid(
    out: &mut Vec<Surfel>,
    origin: Vector3<f64>,
    u: Vector3<f64>,
    v: Vector3<f64>,
    normal: Vector3<f64>,
    spacing: f64,
) {
    let (nu, nv) = (steps(u.norm(), spacing), steps(v.norm(), spacing));
    for i in 0..nu {
        for j in 0..nv {
            let p = origin + u * (i as f64 / (nu - 1) as f64) + v * (j as f64 / (nv - 1) as f64);
            out.push(Surfel { p, n: normal });
        }
    }
}

fn ring_count(radius: f64, spacing: f64) -> usize {
    4 * ((2.0 * PI * radius / (4.0 * spacing)).ceil() as usize).max(4)
}

fn object_surfels(out: &mut Vec<Surfel>, o: &CatalogObject, spacing: f64) {
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), o.yaw());
    let c = o.center();
    let hz = 0.5 * o.height;
    match o.shape {
        ObjectShape::Box => {
            let h = Vector3::new(0.5 * o.footprint[0], 0.5 * o.footprint[1], hz);
            // Each face: normal axis, then the two in-face axes.
            for (a, b, d) in [(0, 1, 2), (1, 0, 2), (2, 0, 1)] {
                for sign in [-1.0, 1.0] {
                    if a == 2 && sign < 0.0 {
                        continue; // resting face
                    }
                    let e = |k: usize| Vector3::ith(k, 1.0);
                    let normal = rot * (e(a) * sign);
                    let origin = c + rot * (e(a) * sign * h[a] - e(b) * h[b] - e(d) * h[d]);
                    grid(
                        out,
                        origin,
                        rot * (e(b) * 2.0 * h[b]),
                        rot * (e(d) * 2.0 * h[d]),
                        normal,
                        spacing,
                    );
                }
            }
        }
        ObjectShape::Cylinder => {
            let r = o.radius();
            let top = c + Vector3::new(0.0, 0.0, hz);
            out.push(Surfel {
                p: top,
                n: Vector3::z(),
            });
            let rings = ((r / spacing).ceil() as usize).max(1);
            for k in 1..=rings {
                let rk = r * k as f64 / rings as f64;
                let n = ring_count(rk, spacing);
                for i in 0..n {
                    let a = 2.0 * PI * i as f64 / n as f64;
                    let d = rot * Vector3::new(a.cos(), a.sin(), 0.0);
                    out.push(Surfel {
                        p: top + d * rk,
                        n: Vector3::z(),
                    });
                }
            }
            let n = ring_count(r, spacing);
            let levels = steps(o.height, spacing);
            for i in 0..n {
                let a = 2.0 * PI * i as f64 / n as f64;
                let d = rot * Vector3::new(a.cos(), a.sin(), 0.0);
                for j in 0..levels {
                    let z = -hz + o.height * j as f64 / (levels - 1) as f64;
                    out.push(Surfel {
                        p: c + d * r + Vector3::new(0.0, 0.0, z),
                        n: d,
                    });
                }
            }
        }
    }
}

// Parameter interval of the segment inside the slab [lo, hi] on one axis.
fn clip_slab(p: f64, d: f64, lo: f64, hi: f64, t0: &mut f64, t1: &mut f64) {
    if d.abs() < 1e-15 {
        if p < lo || p > hi {
            *t0 = 1.0;
            *t1 = 0.0;
        }
        return;
    }
    let (a, b) = ((lo - p) / d, (hi - p) / d);
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    *t0 = t0.max(a);
    *t1 = t1.min(b);
}

fn segment_hits_box(p: &Vector3<f64>, q: &Vector3<f64>, lo: &Vector3<f64>, hi: &Vector3<f64>) -> bool {
    let d = q - p;
    let (mut t0, mut t1) = (0.0, 1.0);
    for k in 0..3 {
        clip_slab(p[k], d[k], lo[k], hi[k], &mut t0, &mut t1);
    }
    t0 <= t1
}

// Vertical cylinder of radius r and half height hz centered at the origin.
fn segment_hits_cylinder(p: &Vector3<f64>, q: &Vector3<f64>, r: f64, hz: f64) -> bool {
    let d = q - p;
    let (mut t0, mut t1) = (0.0, 1.0);
    clip_slab(p.z, d.z, -hz, hz, &mut t0, &mut t1);
    let a = d.x * d.x + d.y * d.y;
    let b = 2.0 * (p.x * d.x + p.y * d.y);
    let c = p.x * p.x + p.y * p.y - r * r;
    if a < 1e-15 {
        if c > 0.0 {
            return false;
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return false;
        }
        let s = disc.sqrt();
        t0 = t0.max((-b - s) / (2.0 * a));
        t1 = t1.min((-b + s) / (2.0 * a));
    }
    t0 <= t1
}

fn occluded(world: &WorldModel, from: &Vector3<f64>, to: &Vector3<f64>) -> bool {
    if world
        .furniture
        .iter()
        .any(|f| segment_hits_box(from, to, &f.min(), &f.max()))
    {
        return true;
    }
    world.objects.iter().any(|o| {
        let inv = Rotation3::from_axis_angle(&Vector3::z_axis(), -o.yaw());
        let (a, b) = (inv * (from - o.center()), inv * (to - o.center()));
        let hz = 0.5 * o.height;
        match o.shape {
            ObjectShape::Box => {
                let h = Vector3::new(0.5 * o.footprint[0], 0.5 * o.footprint[1], hz);
                segment_hits_box(&a, &b, &-h, &h)
            }
            ObjectShape::Cylinder => segment_hits_cylinder(&a, &b, o.radius(), hz),
        }
    })
}

/// Simulated depth image as a point cloud in the camera optical frame.
///
/// Floor (near the camera), furniture tops and object surfaces are sampled
/// on grids with `1/sqrt(density)` spacing. A sample is kept if it faces the
/// camera, projects into the image, lies within the sensor depth limit and
/// has a clear line of sight. Kept points get per-axis Gaussian noise, or
/// with probability `outlier_fraction` are replaced by a uniform point in the
/// viewing frustum.
pub fn synthesize_cloud(
    world: &WorldModel,
    robot: &Pose2D,
    camera: &CameraModel,
    density: f64,
    noise: &NoiseModel,
    seed: u64,
) -> PointCloud {
    assert!(density > 0.0, "sampling density must be positive");
    let spacing = 1.0 / density.sqrt();
    let world_from_camera = camera.world_from_camera(robot);
    let camera_from_world = world_from_camera.inverse();
    let eye = world_from_camera.translation.vector;

    let mut surfels = Vec::new();
    let reach = camera.max_depth;
    let x0 = (eye.x - reach).max(0.0);
    let x1 = (eye.x + reach).min(world.room_extent[0]);
    let y0 = (eye.y - reach).max(0.0);
    let y1 = (eye.y + reach).min(world.room_extent[1]);
    if x1 > x0 && y1 > y0 {
        grid(
            &mut surfels,
            Vector3::new(x0, y0, 0.0),
            Vector3::new(x1 - x0, 0.0, 0.0),
            Vector3::new(0.0, y1 - y0, 0.0),
            Vector3::z(),
            spacing,
        );
    }
    for f in &world.furniture {
        grid(
            &mut surfels,
            Vector3::new(f.min[0], f.min[1], f.max[2]),
            Vector3::new(f.max[0] - f.min[0], 0.0, 0.0),
            Vector3::new(0.0, f.max[1] - f.min[1], 0.0),
            Vector3::z(),
            spacing,
        );
    }
    for o in &world.objects {
        object_surfels(&mut surfels, o, spacing);
    }

    let mut rng = rng_from_seed(seed);
    let gauss = Normal::new(0.0, noise.cloud_sigma).expect("sigma validated");
    let mut points = Vec::new();
    for s in &surfels {
        let c = camera_from_world.transform_point(&s.p.into()).coords;
        if c.z <= 0.0 || c.norm() > camera.max_depth {
            continue;
        }
        if !camera.project(&c).is_some_and(|px| camera.in_image(&px)) {
            continue;
        }
        let to_eye = eye - s.p;
        if to_eye.dot(&s.n) <= 0.0 {
            continue;
        }
        if occluded(world, &(s.p + to_eye * 1e-6), &eye) {
            continue;
        }
        let point = if noise.outlier_fraction > 0.0 && rng.random::<f64>() < noise.outlier_fraction {
            let u = rng.random_range(0.0..camera.width as f64);
            let v = rng.random_range(0.0..camera.height as f64);
            let z = rng.random_range(0.1..camera.max_depth);
            Vector3::new((u - camera.cx) / camera.fx * z, (v - camera.cy) / camera.fy * z, z)
        } else if noise.cloud_sigma > 0.0 {
            c + Vector3::new(gauss.sample(&mut rng), gauss.sample(&mut rng), gauss.sample(&mut rng))
        } else {
            c
        };
        points.push(point);
    }
    PointCloud::new(points).expect("synthesized points are finite")
}
