use nalgebra::Vector3;

use super::{
    euclidean_cluster, extract_roi_points, filter_range, fit_min_area_rect, project_to_plane, segment_floor_plane,
    Box3D, PerceptionParams, Plane, PointCloud, Rect2D, Roi2D,
};
use crate::model::CameraModel;
use crate::{Error, Result};

/// Embeds `rect` in `plane` as the bottom face and extends it by `height`
/// along the plane normal.
pub fn extrude_box(rect: &Rect2D, plane: &Plane, height: f64, label: &str) -> Result<Box3D> {
    if !(height > 0.0) {
        return Err(Error::Degenerate("box height must be positive"));
    }
    let lift = plane.normal() * height;
    let bottom = rect.corners().map(|c| plane.lift(&c));
    let mut corners = [Vector3::zeros(); 8];
    for (i, b) in bottom.iter().enumerate() {
        corners[i] = *b;
        corners[i + 4] = b + lift;
    }
    Ok(Box3D::from_corners(corners, label))
}

/// Amodal box of the object inside `roi`, in the camera frame.
///
/// Runs range filtering, support-plane removal, RoI gating on what is left,
/// clustering (the largest cluster is the object), projection onto the
/// support plane, rectangle fitting and extrusion by `known_height`.
pub fn estimate_box(
    cloud: &PointCloud,
    roi: &Roi2D,
    camera: &CameraModel,
    known_height: f64,
    params: &PerceptionParams,
    seed: u64,
) -> Result<Box3D> {
    let near = filter_range(cloud, params.max_range);
    let seg = segment_floor_plane(&near, params, seed)?;
    let in_roi = extract_roi_points(&seg.remainder, roi, camera);
    let object = euclidean_cluster(&in_roi, params.cluster_tol, params.cluster_min_size)
        .into_iter()
        .next()
        .ok_or(Error::NoCluster {
            min_size: params.cluster_min_size,
        })?;
    let footprint = project_to_plane(&object, &seg.plane);
    let rect = fit_min_area_rect(&footprint)?;
    extrude_box(&rect, &seg.plane, known_height, &roi.label)
}
