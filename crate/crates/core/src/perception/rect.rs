use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector2;

use super::{Plane, PointCloud, Rect2D};
use crate::{Error, Result};

/// Orthogonal projection onto `plane`, in the plane's in-plane basis
/// ([`Plane::basis`]) centered at [`Plane::origin`].
pub fn project_to_plane(points: &PointCloud, plane: &Plane) -> Vec<Vector2<f64>> {
    let (e1, e2) = plane.basis();
    let origin = plane.origin();
    points
        .iter()
        .map(|p| {
            let d = p - origin;
            Vector2::new(d.dot(&e1), d.dot(&e2))
        })
        .collect()
}

fn cross(o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull, counter-clockwise, without collinear vertices.
pub fn convex_hull(points: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vector2<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vector2<f64>>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// Minimum-area enclosing rectangle.
///
/// The optimum has a side collinear with a convex-hull edge, so only hull
/// edge orientations are tried. Orientations are reduced to `[0, π/2)`;
/// among equal areas the smaller angle wins.
pub fn fit_min_area_rect(points: &[Vector2<f64>]) -> Result<Rect2D> {
    if points.len() < 3 {
        return Err(Error::Degenerate("rectangle fit needs at least 3 points"));
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::Degenerate("points are collinear"));
    }
    let mut best: Option<(f64, Rect2D)> = None;
    for i in 0..hull.len() {
        let edge = hull[(i + 1) % hull.len()] - hull[i];
        let mut angle = edge.y.atan2(edge.x).rem_euclid(FRAC_PI_2);
        if angle >= FRAC_PI_2 {
            angle = 0.0;
        }
        let rect = bounding_rect(&hull, angle);
        let area = rect.area();
        let better = match &best {
            None => true,
            Some((best_area, best_rect)) => {
                let tie = (area - best_area).abs() <= 1e-12 * best_area.max(f64::MIN_POSITIVE);
                if tie {
                    angle < best_rect.angle
                } else {
                    area < *best_area
                }
            }
        };
        if better {
            best = Some((area, rect));
        }
    }
    Ok(best.expect("hull has edges").1)
}

fn bounding_rect(points: &[Vector2<f64>], angle: f64) -> Rect2D {
    let (s, c) = angle.sin_cos();
    let u = Vector2::new(c, s);
    let v = Vector2::new(-s, c);
    let (mut umin, mut umax, mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let a = p.dot(&u);
        let b = p.dot(&v);
        umin = umin.min(a);
        umax = umax.max(a);
        vmin = vmin.min(b);
        vmax = vmax.max(b);
    }
    Rect2D {
        center: u * (0.5 * (umin + umax)) + v * (0.5 * (vmin + vmax)),
        half_extents: Vector2::new(0.5 * (umax - umin), 0.5 * (vmax - vmin)),
        angle,
    }
}
