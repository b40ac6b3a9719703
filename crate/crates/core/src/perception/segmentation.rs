use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;

use super::{PerceptionParams, Plane, PointCloud, Roi2D};
use crate::model::CameraModel;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Keeps the points within `max_range` of the camera origin, boundary
/// included, in input order.
pub fn filter_range(cloud: &PointCloud, max_range: f64) -> PointCloud {
    PointCloud::from_finite(cloud.iter().filter(|p| p.norm() <= max_range).copied().collect())
}

/// Result of the support-plane search. `inliers` and `remainder` partition
/// the input, each keeping input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSegmentation {
    pub plane: Plane,
    pub inliers: PointCloud,
    pub remainder: PointCloud,
}

/// Finds the plane with the largest consensus by seeded RANSAC over
/// three-point candidates, then refits it to its inliers by least squares.
///
/// The normal is oriented toward the camera up axis.
pub fn segment_floor_plane(cloud: &PointCloud, params: &PerceptionParams, seed: u64) -> Result<PlaneSegmentation> {
    let pts = cloud.points();
    if pts.len() < 3 {
        return Err(Error::Degenerate("plane fit needs at least 3 points"));
    }
    let fallback = non_collinear_triple(pts).ok_or(Error::Degenerate("all points are collinear"))?;
    let tol = params.ransac_inlier_tol;
    let scale = bounding_diagonal(pts);

    let mut rng = rng_from_seed(seed);
    let mut best: Option<(Plane, usize)> = None;
    for _ in 0..params.ransac_iters {
        let i = rng.random_range(0..pts.len());
        let j = rng.random_range(0..pts.len());
        let k = rng.random_range(0..pts.len());
        let Some(candidate) = plane_through(&pts[i], &pts[j], &pts[k], scale) else {
            continue;
        };
        let count = count_inliers(pts, &candidate, tol);
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((candidate, count));
        }
    }
    let (candidate, count) = match best {
        Some(b) => b,
        None => {
            let [a, b, c] = fallback;
            let plane =
                plane_through(&pts[a], &pts[b], &pts[c], 0.0).ok_or(Error::Degenerate("all points are collinear"))?;
            (plane, count_inliers(pts, &plane, tol))
        }
    };

    let consensus: Vec<Vector3<f64>> = pts
        .iter()
        .filter(|p| candidate.signed_distance(p).abs() <= tol)
        .copied()
        .collect();
    let plane = match least_squares_plane(&consensus) {
        Some(refit) if count_inliers(pts, &refit, tol) >= count => refit,
        _ => candidate,
    };
    let plane = orient_up(plane);

    let (inliers, remainder): (Vec<_>, Vec<_>) = pts.iter().partition(|p| plane.signed_distance(p).abs() <= tol);
    Ok(PlaneSegmentation {
        plane,
        inliers: PointCloud::from_finite(inliers),
        remainder: PointCloud::from_finite(remainder),
    })
}

/// Keeps the points in front of the camera whose pinhole projection falls
/// inside the region (edges included).
pub fn extract_roi_points(cloud: &PointCloud, roi: &Roi2D, camera: &CameraModel) -> PointCloud {
    PointCloud::from_finite(
        cloud
            .iter()
            .filter(|p| camera.project(p).is_some_and(|px| roi.contains(&px)))
            .copied()
            .collect(),
    )
}

fn count_inliers(pts: &[Vector3<f64>], plane: &Plane, tol: f64) -> usize {
    pts.iter().filter(|p| plane.signed_distance(p).abs() <= tol).count()
}

fn bounding_diagonal(pts: &[Vector3<f64>]) -> f64 {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

// `None` when the three points are (numerically) collinear relative to the
// cloud extent `scale`.
fn plane_through(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>, scale: f64) -> Option<Plane> {
    let n = (b - a).cross(&(c - a));
    if n.norm() <= 1e-12 * scale.max(1.0).powi(2) {
        return None;
    }
    Plane::through_point(n, a)
}

// Deterministic witness that the cloud spans a plane: a point, the point
// farthest from it, and the point farthest from the line through both.
fn non_collinear_triple(pts: &[Vector3<f64>]) -> Option<[usize; 3]> {
    let a = 0;
    let (b, db) = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (p - pts[a]).norm()))
        .fold((a, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if db <= 1e-12 {
        return None;
    }
    let dir = (pts[b] - pts[a]) / db;
    let (c, dc) = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = p - pts[a];
            (i, (d - d.dot(&dir) * dir).norm())
        })
        .fold((a, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if dc <= 1e-9 * db {
        return None;
    }
    Some([a, b, c])
}

fn least_squares_plane(pts: &[Vector3<f64>]) -> Option<Plane> {
    if pts.len() < 3 {
        return None;
    }
    let centroid = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    let mut cov = Matrix3::zeros();
    for p in pts {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let normal = eig.eigenvectors.column(idx).into_owned();
    Plane::through_point(normal, &centroid)
}

fn orient_up(plane: Plane) -> Plane {
    let n = plane.normal();
    let along_up = n.dot(&CameraModel::up_axis());
    let flip = if along_up.abs() >= 1e-6 {
        along_up < 0.0
    } else {
        let i = n.iamax();
        n[i] < 0.0
    };
    if flip {
        plane.flipped()
    } else {
        plane
    }
}
