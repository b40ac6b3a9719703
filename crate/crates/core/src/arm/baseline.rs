use rand::Rng;
use serde::{Deserialize, Serialize};

use super::collision::configuration_collides;
use super::trajectory::pregrasp_pose;
use super::{interpolate_joint_path, inverse_kinematics_near, ArmModel, ArmTrajectory, JointVector};
use crate::model::{Pose2D, Pose3D, RobotConfig, WorldModel};
use crate::rng::rng_from_seed;
use crate::Result;

/// Tuning of the sampling baseline. The time budget is converted into a
/// number of configuration collision checks at `checks_per_second`, so the
/// outcome depends only on the seed, never on machine speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineSettings {
    /// Tree extension step, radians (Euclidean in joint space).
    pub step: f64,
    pub goal_bias: f64,
    /// Largest per-joint change between checked configurations on an edge.
    pub edge_resolution: f64,
    pub checks_per_second: f64,
    /// Upper bound on shortcut attempts after a path is found.
    pub max_shortcuts: usize,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        BaselineSettings {
            step: 0.2,
            goal_bias: 0.05,
            edge_resolution: 0.05,
            checks_per_second: 20_000.0,
            max_shortcuts: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaselineOutcome {
    Success {
        trajectory: ArmTrajectory,
        /// Joint-space waypoints after smoothing, start to target.
        waypoints: Vec<JointVector>,
        checks_used: usize,
    },
    Failure {
        checks_used: usize,
        reason: String,
    },
}

impl BaselineOutcome {
    pub fn trajectory(&self) -> Option<&ArmTrajectory> {
        match self {
            BaselineOutcome::Success { trajectory, .. } => Some(trajectory),
            BaselineOutcome::Failure { .. } => None,
        }
    }
}

struct Checker<'a> {
    model: &'a ArmModel,
    world: &'a WorldModel,
    base: &'a Pose2D,
    resolution: f64,
    used: usize,
    budget: usize,
}

impl Checker<'_> {
    fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    fn free(&mut self, q: &JointVector) -> bool {
        self.used += 1;
        !configuration_collides(self.model, q, self.base, self.world)
    }

    /// Checks the edge at the configured resolution, excluding `a`.
    fn edge_free(&mut self, a: &JointVector, b: &JointVector) -> bool {
        let span = a.iter().zip(b).map(|(x, y)| (y - x).abs()).fold(0.0, f64::max);
        let n = ((span / self.resolution).ceil() as usize).max(1);
        (1..=n).all(|k| {
            if self.exhausted() {
                return false;
            }
            let s = k as f64 / n as f64;
            self.free(&lerp(a, b, s))
        })
    }
}

fn lerp(a: &JointVector, b: &JointVector, s: f64) -> JointVector {
    std::array::from_fn(|j| a[j] + (b[j] - a[j]) * s)
}

fn distance(a: &JointVector, b: &JointVector) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

struct Tree {
    nodes: Vec<(JointVector, usize)>,
}

impl Tree {
    fn new(root: JointVector) -> Self {
        Tree {
            nodes: vec![(root, usize::MAX)],
        }
    }

    fn nearest(&self, q: &JointVector) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, (n, _)) in self.nodes.iter().enumerate() {
            let d = distance(n, q);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    fn path_to_root(&self, mut i: usize) -> Vec<JointVector> {
        let mut out = Vec::new();
        while i != usize::MAX {
            out.push(self.nodes[i].0);
            i = self.nodes[i].1;
        }
        out
    }
}

enum Extend {
    Reached(usize),
    Advanced(usize),
    Trapped,
}

fn extend(tree: &mut Tree, toward: &JointVector, step: f64, checker: &mut Checker) -> Extend {
    let near = tree.nearest(toward);
    let from = tree.nodes[near].0;
    let d = distance(&from, toward);
    let (next, reached) = if d <= step {
        (*toward, true)
    } else {
        (lerp(&from, toward, step / d), false)
    };
    if !checker.edge_free(&from, &next) {
        return Extend::Trapped;
    }
    tree.nodes.push((next, near));
    let id = tree.nodes.len() - 1;
    if reached {
        Extend::Reached(id)
    } else {
        Extend::Advanced(id)
    }
}

fn connect(tree: &mut Tree, toward: &JointVector, step: f64, checker: &mut Checker) -> Option<usize> {
    loop {
        match extend(tree, toward, step, checker) {
            Extend::Reached(id) => return Some(id),
            Extend::Advanced(_) => continue,
            Extend::Trapped => return None,
        }
    }
}

fn path_length(path: &[JointVector]) -> f64 {
    path.windows(2).map(|w| distance(&w[0], &w[1])).sum()
}

// Point at arc length `s` along the path and the index of its segment.
fn point_at(path: &[JointVector], s: f64) -> (usize, JointVector) {
    let mut acc = 0.0;
    for i in 0..path.len() - 1 {
        let len = distance(&path[i], &path[i + 1]);
        if acc + len >= s && len > 0.0 {
            return (i, lerp(&path[i], &path[i + 1], (s - acc) / len));
        }
        acc += len;
    }
    (path.len() - 2, path[path.len() - 1])
}

/// Bidirectional RRT to the pre-grasp configuration, a straight final move
/// to the grasp configuration, then shortcut smoothing with what is left of
/// the budget.
///
/// Inverse kinematics errors are returned as errors; running out of budget
/// is a [`BaselineOutcome::Failure`].
#[allow(clippy::too_many_arguments)]
pub fn plan_arm_sampling_baseline(
    model: &ArmModel,
    q_start: &JointVector,
    target: &Pose3D,
    world: &WorldModel,
    base: &Pose2D,
    budget: f64,
    seed: u64,
    cfg: &RobotConfig,
    settings: &BaselineSettings,
) -> Result<BaselineOutcome> {
    let swivel = cfg.arm.swivel;
    let q_pre = inverse_kinematics_near(model, &pregrasp_pose(target, cfg.arm.pregrasp_backoff), swivel, q_start)?;
    let q_goal = inverse_kinematics_near(model, target, swivel, &q_pre)?;
    let mut checker = Checker {
        model,
        world,
        base,
        resolution: settings.edge_resolution,
        used: 0,
        budget: (budget.max(0.0) * settings.checks_per_second).floor() as usize,
    };
    let fail = |checker: &Checker, reason: &str| BaselineOutcome::Failure {
        checks_used: checker.used,
        reason: reason.to_string(),
    };
    if checker.exhausted() {
        return Ok(fail(&checker, "budget exhausted"));
    }
    if !checker.free(q_start) || !checker.free(&q_pre) {
        return Ok(fail(&checker, "start or pre-grasp configuration in collision"));
    }

    let mut rng = rng_from_seed(seed);
    let mut trees = [Tree::new(*q_start), Tree::new(q_pre)];
    let mut path: Option<Vec<JointVector>> = None;
    let mut active = 0;
    while path.is_none() && !checker.exhausted() {
        let other = 1 - active;
        let sample: JointVector = if rng.random::<f64>() < settings.goal_bias {
            trees[other].nodes[0].0
        } else {
            std::array::from_fn(|j| rng.random_range(model.joint_limits[j][0]..=model.joint_limits[j][1]))
        };
        let new_id = match extend(&mut trees[active], &sample, settings.step, &mut checker) {
            Extend::Trapped => None,
            Extend::Reached(id) | Extend::Advanced(id) => Some(id),
        };
        if let Some(id) = new_id {
            let q_new = trees[active].nodes[id].0;
            if let Some(other_id) = connect(&mut trees[other], &q_new, settings.step, &mut checker) {
                let mut a = trees[active].path_to_root(id);
                let b = trees[other].path_to_root(other_id);
                a.reverse();
                a.extend(b.into_iter().skip(1));
                if active == 1 {
                    a.reverse();
                }
                path = Some(a);
            }
        }
        active = other;
    }
    let Some(mut path) = path else {
        return Ok(fail(&checker, "budget exhausted before the trees connected"));
    };

    for _ in 0..settings.max_shortcuts {
        if checker.exhausted() || path.len() < 3 {
            break;
        }
        let total = path_length(&path);
        let (s1, s2) = (rng.random_range(0.0..total), rng.random_range(0.0..total));
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let (i, a) = point_at(&path, lo);
        let (j, b) = point_at(&path, hi);
        if j <= i {
            continue;
        }
        if checker.edge_free(&a, &b) {
            let mut shorter = path[..=i].to_vec();
            shorter.push(a);
            shorter.push(b);
            shorter.extend_from_slice(&path[j + 1..]);
            shorter.dedup();
            path = shorter;
        }
    }

    let mut final_check = Checker {
        budget: usize::MAX,
        ..checker
    };
    if !final_check.edge_free(&q_pre, &q_goal) {
        return Ok(fail(&final_check, "final approach segment in collision"));
    }
    path.push(q_goal);
    Ok(BaselineOutcome::Success {
        trajectory: interpolate_joint_path(&path, &model.joint_vel_limits, cfg.control_tick),
        waypoints: path,
        checks_used: final_check.used,
    })
}
