//! Whitespace-separated text formats for clouds, RoIs and trajectories.
//!
//! Every format is one record per line; `#` starts a comment and blank lines
//! are ignored.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Vector2, Vector3};

use crate::arm::{ArmSample, ArmTrajectory};
use crate::base_planner::{BaseSample, BaseTrajectory};
use crate::model::{CameraModel, Pose2D};
use crate::perception::{PointCloud, Roi2D};
use crate::{Error, Result};

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (i + 1, body.split_whitespace().collect()))
    })
}

fn numbers<const N: usize>(line: usize, fields: &[&str], what: &str) -> Result<[f64; N]> {
    if fields.len() != N {
        return Err(Error::Parse(format!(
            "line {line}: {what} needs {N} fields, found {}",
            fields.len()
        )));
    }
    let mut out = [0.0; N];
    for (slot, f) in out.iter_mut().zip(fields) {
        *slot = f
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(format!("line {line}: '{f}' is not a finite number")))?;
    }
    Ok(out)
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `x y z` per line.
pub fn parse_point_cloud(text: &str) -> Result<PointCloud> {
    let points = records(text)
        .map(|(line, f)| numbers::<3>(line, &f, "point").map(Vector3::from))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(points)
}

pub fn format_point_cloud(cloud: &PointCloud) -> String {
    let mut s = String::new();
    for p in cloud.iter() {
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    s
}

/// `x y w h label confidence` per line.
pub fn parse_rois(text: &str) -> Result<Vec<Roi2D>> {
    records(text)
        .map(|(line, f)| {
            if f.len() != 6 {
                return Err(Error::Parse(format!(
                    "line {line}: RoI needs 6 fields, found {}",
                    f.len()
                )));
            }
            let [x, y, w, h] = numbers::<4>(line, &f[..4], "RoI")?;
            let [conf] = numbers::<1>(line, &f[5..], "RoI")?;
            Roi2D::new(x, y, w, h, f[4], conf)
        })
        .collect()
}

pub fn format_rois(rois: &[Roi2D]) -> String {
    let mut s = String::new();
    for r in rois {
        let _ = writeln!(s, "{} {} {} {} {} {}", r.x, r.y, r.w, r.h, r.label, r.confidence);
    }
    s
}

/// RoI from a command-line argument `x,y,w,h,label`, with confidence 1.
pub fn parse_roi_arg(arg: &str) -> Result<Roi2D> {
    let f: Vec<&str> = arg.split(',').map(str::trim).collect();
    if f.len() != 5 {
        return Err(Error::Parse(format!("RoI '{arg}' must be x,y,w,h,label")));
    }
    let [x, y, w, h] = numbers::<4>(1, &f[..4], "RoI")?;
    Roi2D::new(x, y, w, h, f[4], 1.0)
}

/// Vector from a command-line argument `x,y,z`.
pub fn parse_vector3_arg(arg: &str) -> Result<Vector3<f64>> {
    let f: Vec<&str> = arg.split(',').map(str::trim).collect();
    Ok(Vector3::from(numbers::<3>(1, &f, "vector")?))
}

/// `t x y theta vx vy omega` per line.
pub fn parse_base_trajectory(text: &str) -> Result<BaseTrajectory> {
    let samples = records(text)
        .map(|(line, f)| {
            let [t, x, y, theta, vx, vy, w] = numbers::<7>(line, &f, "base sample")?;
            Ok(BaseSample {
                t,
                pose: Pose2D::new(x, y, theta),
                velocity: [vx, vy, w],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BaseTrajectory::new(samples)
}

pub fn format_base_trajectory(traj: &BaseTrajectory) -> String {
    let mut s = String::new();
    for b in traj.samples() {
        let [vx, vy, w] = b.velocity;
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {}",
            b.t, b.pose.x, b.pose.y, b.pose.theta, vx, vy, w
        );
    }
    s
}

/// Timestamped planar positions of a base trajectory, for alignment.
pub fn base_positions(traj: &BaseTrajectory) -> Vec<(f64, Vector2<f64>)> {
    traj.samples().iter().map(|s| (s.t, s.pose.position())).collect()
}

/// `t q1 .. q7` per line.
pub fn parse_arm_trajectory(text: &str) -> Result<ArmTrajectory> {
    let samples = records(text)
        .map(|(line, f)| {
            let [t, q @ ..] = numbers::<8>(line, &f, "arm sample")?;
            Ok(ArmSample { t, q })
        })
        .collect::<Result<Vec<_>>>()?;
    ArmTrajectory::new(samples)
}

pub fn format_arm_trajectory(traj: &ArmTrajectory) -> String {
    let mut s = String::new();
    for a in traj.samples() {
        let _ = write!(s, "{}", a.t);
        for q in a.q {
            let _ = write!(s, " {q}");
        }
        s.push('\n');
    }
    s
}

/// Camera intrinsics and mount from a TOML document.
pub fn parse_camera(text: &str) -> Result<CameraModel> {
    let camera: CameraModel = toml::from_str(text).map_err(|e| Error::Parse(format!("camera: {e}")))?;
    let problems = camera.validate();
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    Ok(camera)
}
