//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]
// Oracles use plain index loops on purpose.
#![allow(clippy::needless_range_loop)]

use fetchsim_core::fsm::{EventKind, FsmEvent, FsmState};
use fetchsim_core::perception::Box3D;
use nalgebra::Vector3;

pub type P3 = [f64; 3];

/// Sum over segments of |dx| + |dy| + |dz|, written without vector types.
pub fn manhattan_oracle(points: &[P3]) -> f64 {
    let mut total = 0.0;
    for k in 1..points.len() {
        for axis in 0..3 {
            total += (points[k][axis] - points[k - 1][axis]).abs();
        }
    }
    total
}

/// Central-difference speeds on the unit time base, trapezoid rule, halved.
pub fn smoothness_oracle(times: &[f64], points: &[P3]) -> f64 {
    let n = times.len();
    let span = times[n - 1] - times[0];
    let u: Vec<f64> = times.iter().map(|t| (t - times[0]) / span).collect();
    let mut speed_sq = vec![0.0; n];
    for k in 0..n {
        let lo = if k == 0 { 0 } else { k - 1 };
        let hi = if k == n - 1 { n - 1 } else { k + 1 };
        let mut acc = 0.0;
        for axis in 0..3 {
            let v = (points[hi][axis] - points[lo][axis]) / (u[hi] - u[lo]);
            acc += v * v;
        }
        speed_sq[k] = acc;
    }
    let mut integral = 0.0;
    for k in 1..n {
        integral += (speed_sq[k] + speed_sq[k - 1]) / 2.0 * (u[k] - u[k - 1]);
    }
    integral / 2.0
}

fn planar_gaps(est: &[[f64; 2]], truth: &[[f64; 2]]) -> Vec<f64> {
    est.iter()
        .zip(truth)
        .map(|(e, t)| ((e[0] - t[0]).powi(2) + (e[1] - t[1]).powi(2)).sqrt())
        .collect()
}

pub fn deviation_max_oracle(est: &[[f64; 2]], truth: &[[f64; 2]]) -> f64 {
    let mut best = 0.0;
    for g in planar_gaps(est, truth) {
        if g > best {
            best = g;
        }
    }
    best
}

pub fn deviation_avg_oracle(est: &[[f64; 2]], truth: &[[f64; 2]]) -> f64 {
    let gaps = planar_gaps(est, truth);
    gaps.iter().sum::<f64>() / gaps.len() as f64
}

/// Samples of a 1-cosine move of length `delta` along x over unit time.
pub fn cosine_move(delta: f64, samples: usize) -> (Vec<f64>, Vec<P3>) {
    let times: Vec<f64> = (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect();
    let points = times
        .iter()
        .map(|t| [delta * (1.0 - (std::f64::consts::PI * t).cos()) / 2.0, 0.0, 0.0])
        .collect();
    (times, points)
}

/// What the task machine must do on a legal event.
#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Go(FsmState, &'static [&'static str]),
    Done,
    FailHere,
}

/// Expected reaction of the fetch machine, restated by hand; `None` marks an
/// event the state must reject.
pub fn expected_step(state: FsmState, event: EventKind) -> Option<Expected> {
    use EventKind as E;
    use Expected::*;
    use FsmState as S;
    Some(match (state, event) {
        (S::WaitRequest, E::RequestReceived) => Go(S::NavigateToShelf, &["PlanBase(shelf)"]),
        (S::NavigateToShelf, E::MotionDone) => Go(
            S::DetectAndApproach,
            &["RequestDetection", "Approach", "RequestDetection"],
        ),
        (S::NavigateToShelf, E::MotionFailed) => FailHere,
        (S::DetectAndApproach, E::DetectionSucceeded) => Go(S::GraspObject, &["PlanArm(grasp)", "CloseGripper"]),
        (S::DetectAndApproach, E::DetectionFailed | E::MotionFailed) => FailHere,
        (S::GraspObject, E::GraspConfirmed) => Go(S::NavigateToServe, &["PlanBase(serve)"]),
        (S::GraspObject, E::GraspFailed | E::MotionFailed) => FailHere,
        (S::NavigateToServe, E::MotionDone) => Go(S::ReLocalize, &["RequestRelocalize"]),
        (S::NavigateToServe, E::MotionFailed) => FailHere,
        (S::ReLocalize, E::RelocalizeConverged) => Go(S::PlaceObject, &["PlanArm(place)", "OpenGripper"]),
        (S::ReLocalize, E::RelocalizeFailed) => FailHere,
        (S::PlaceObject, E::PlaceConfirmed) => Done,
        (S::PlaceObject, E::PlaceFailed | E::MotionFailed) => FailHere,
        _ => return None,
    })
}

/// A representative event of each kind.
pub fn sample_event(kind: EventKind) -> FsmEvent {
    match kind {
        EventKind::RequestReceived => FsmEvent::RequestReceived("cola".into()),
        EventKind::MotionDone => FsmEvent::MotionDone,
        EventKind::MotionFailed => FsmEvent::MotionFailed,
        EventKind::DetectionSucceeded => {
            FsmEvent::DetectionSucceeded(Box3D::from_corners([Vector3::new(0.1, 0.2, 0.9); 8], "cola"))
        }
        EventKind::DetectionFailed => FsmEvent::DetectionFailed,
        EventKind::GraspConfirmed => FsmEvent::GraspConfirmed,
        EventKind::GraspFailed => FsmEvent::GraspFailed,
        EventKind::RelocalizeConverged => FsmEvent::RelocalizeConverged,
        EventKind::RelocalizeFailed => FsmEvent::RelocalizeFailed,
        EventKind::PlaceConfirmed => FsmEvent::PlaceConfirmed,
        EventKind::PlaceFailed => FsmEvent::PlaceFailed,
    }
}
