//! The seven-state fetch task machine and its episode executor.
//!
//! [`step_fsm`] is a pure transition table. [`run_service`] drives it
//! against the simulated perception and motion components: every command a
//! transition issues is executed in order, one at a time, and the event that
//! concludes the state is fed back into the table.

mod executor;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::perception::Box3D;
use crate::{Error, Result};

pub use executor::{run_service, EpisodeLog, EpisodeMetrics, LogEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FsmState {
    WaitRequest,
    NavigateToShelf,
    DetectAndApproach,
    GraspObject,
    NavigateToServe,
    ReLocalize,
    PlaceObject,
}

impl FsmState {
    /// All states in nominal visiting order.
    pub const ALL: [FsmState; 7] = [
        FsmState::WaitRequest,
        FsmState::NavigateToShelf,
        FsmState::DetectAndApproach,
        FsmState::GraspObject,
        FsmState::NavigateToServe,
        FsmState::ReLocalize,
        FsmState::PlaceObject,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FsmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Terminal result of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    ServiceDone,
    /// Failed while in the given state; there are no recovery states.
    ServiceFailed(FsmState),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::ServiceDone => write!(f, "ServiceDone"),
            Outcome::ServiceFailed(s) => write!(f, "ServiceFailed({s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FsmEvent {
    RequestReceived(String),
    MotionDone,
    MotionFailed,
    DetectionSucceeded(Box3D),
    DetectionFailed,
    GraspConfirmed,
    GraspFailed,
    RelocalizeConverged,
    RelocalizeFailed,
    PlaceConfirmed,
    PlaceFailed,
}

/// Payload-free event tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    RequestReceived,
    MotionDone,
    MotionFailed,
    DetectionSucceeded,
    DetectionFailed,
    GraspConfirmed,
    GraspFailed,
    RelocalizeConverged,
    RelocalizeFailed,
    PlaceConfirmed,
    PlaceFailed,
}

impl EventKind {
    pub const ALL: [EventKind; 11] = [
        EventKind::RequestReceived,
        EventKind::MotionDone,
        EventKind::MotionFailed,
        EventKind::DetectionSucceeded,
        EventKind::DetectionFailed,
        EventKind::GraspConfirmed,
        EventKind::GraspFailed,
        EventKind::RelocalizeConverged,
        EventKind::RelocalizeFailed,
        EventKind::PlaceConfirmed,
        EventKind::PlaceFailed,
    ];

    pub fn is_failure(self) -> bool {
        matches!(
            self,
            EventKind::MotionFailed
                | EventKind::DetectionFailed
                | EventKind::GraspFailed
                | EventKind::RelocalizeFailed
                | EventKind::PlaceFailed
        )
    }
}

impl FsmEvent {
    pub fn kind(&self) -> EventKind {
        match self {
            FsmEvent::RequestReceived(_) => EventKind::RequestReceived,
            FsmEvent::MotionDone => EventKind::MotionDone,
            FsmEvent::MotionFailed => EventKind::MotionFailed,
            FsmEvent::DetectionSucceeded(_) => EventKind::DetectionSucceeded,
            FsmEvent::DetectionFailed => EventKind::DetectionFailed,
            FsmEvent::GraspConfirmed => EventKind::GraspConfirmed,
            FsmEvent::GraspFailed => EventKind::GraspFailed,
            FsmEvent::RelocalizeConverged => EventKind::RelocalizeConverged,
            FsmEvent::RelocalizeFailed => EventKind::RelocalizeFailed,
            FsmEvent::PlaceConfirmed => EventKind::PlaceConfirmed,
            FsmEvent::PlaceFailed => EventKind::PlaceFailed,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.kind().is_failure()
    }
}

impl fmt::Display for FsmEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FsmEvent::RequestReceived(label) => write!(f, "RequestReceived({label})"),
            other => write!(f, "{:?}", other.kind()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseGoal {
    /// Staging pose in front of the shelf holding the requested object.
    Shelf,
    /// Arrival pose at the serve spot.
    Serve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ArmGoal {
    /// Grasp the object described by the box (camera frame).
    Grasp(Box3D),
    Place,
}

/// Directive from the task machine to the motion and vision side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Command {
    PlanBase(BaseGoal),
    /// Closed-loop approach toward the currently tracked object.
    Approach,
    PlanArm(ArmGoal),
    OpenGripper,
    CloseGripper,
    RequestDetection,
    RequestRelocalize,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::PlanBase(BaseGoal::Shelf) => write!(f, "PlanBase(shelf)"),
            Command::PlanBase(BaseGoal::Serve) => write!(f, "PlanBase(serve)"),
            Command::Approach => write!(f, "Approach"),
            Command::PlanArm(ArmGoal::Grasp(_)) => write!(f, "PlanArm(grasp)"),
            Command::PlanArm(ArmGoal::Place) => write!(f, "PlanArm(place)"),
            Command::OpenGripper => write!(f, "OpenGripper"),
            Command::CloseGripper => write!(f, "CloseGripper"),
            Command::RequestDetection => write!(f, "RequestDetection"),
            Command::RequestRelocalize => write!(f, "RequestRelocalize"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    Next(FsmState),
    Finished(Outcome),
}

/// Events that may conclude each state. Failure events are legal only in
/// states that issue a command able to produce them.
pub fn legal_events(state: FsmState) -> &'static [EventKind] {
    use EventKind as E;
    match state {
        FsmState::WaitRequest => &[E::RequestReceived],
        FsmState::NavigateToShelf => &[E::MotionDone, E::MotionFailed],
        FsmState::DetectAndApproach => &[E::DetectionSucceeded, E::DetectionFailed, E::MotionFailed],
        FsmState::GraspObject => &[E::GraspConfirmed, E::GraspFailed, E::MotionFailed],
        FsmState::NavigateToServe => &[E::MotionDone, E::MotionFailed],
        FsmState::ReLocalize => &[E::RelocalizeConverged, E::RelocalizeFailed],
        FsmState::PlaceObject => &[E::PlaceConfirmed, E::PlaceFailed, E::MotionFailed],
    }
}

/// Transition table of the fetch task.
pub fn step_fsm(state: FsmState, event: &FsmEvent) -> Result<(Transition, Vec<Command>)> {
    use FsmState as S;
    if !legal_events(state).contains(&event.kind()) {
        return Err(Error::IllegalTransition {
            state: state.to_string(),
            event: event.to_string(),
        });
    }
    if event.is_failure() {
        return Ok((Transition::Finished(Outcome::ServiceFailed(state)), Vec::new()));
    }
    let step = match (state, event) {
        (S::WaitRequest, FsmEvent::RequestReceived(_)) => (
            Transition::Next(S::NavigateToShelf),
            vec![Command::PlanBase(BaseGoal::Shelf)],
        ),
        (S::NavigateToShelf, FsmEvent::MotionDone) => (
            Transition::Next(S::DetectAndApproach),
            vec![Command::RequestDetection, Command::Approach, Command::RequestDetection],
        ),
        (S::DetectAndApproach, FsmEvent::DetectionSucceeded(b)) => (
            Transition::Next(S::GraspObject),
            vec![Command::PlanArm(ArmGoal::Grasp(b.clone())), Command::CloseGripper],
        ),
        (S::GraspObject, FsmEvent::GraspConfirmed) => (
            Transition::Next(S::NavigateToServe),
            vec![Command::PlanBase(BaseGoal::Serve)],
        ),
        (S::NavigateToServe, FsmEvent::MotionDone) => {
            (Transition::Next(S::ReLocalize), vec![Command::RequestRelocalize])
        }
        (S::ReLocalize, FsmEvent::RelocalizeConverged) => (
            Transition::Next(S::PlaceObject),
            vec![Command::PlanArm(ArmGoal::Place), Command::OpenGripper],
        ),
        (S::PlaceObject, FsmEvent::PlaceConfirmed) => (Transition::Finished(Outcome::ServiceDone), Vec::new()),
        _ => unreachable!("legal_events admits only table entries"),
    };
    Ok(step)
}
