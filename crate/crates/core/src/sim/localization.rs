use nalgebra::Vector2;
use rand_distr::{Distribution, Normal};

use super::{LocalizationMode, NoiseModel};
use crate::base_planner::BaseTrajectory;
use crate::metrics::TrajectoryPair;
use crate::model::Pose2D;
use crate::rng::{derive_seed, rng_from_seed};

/// Per-axis translation sigma of the localization estimate.
pub fn localization_sigma(angular_rate: f64, mode: LocalizationMode, noise: &NoiseModel) -> f64 {
    match mode {
        LocalizationMode::Scan => noise.loc_sigma_translation,
        LocalizationMode::Visual => noise.loc_sigma_translation + noise.loc_rotation_noise_gain * angular_rate.abs(),
    }
}

/// Localization estimate of `truth`: zero-mean Gaussian translation error,
/// heading unchanged.
pub fn simulate_localization(
    truth: &Pose2D,
    angular_rate: f64,
    mode: LocalizationMode,
    noise: &NoiseModel,
    seed: u64,
) -> Pose2D {
    let sigma = localization_sigma(angular_rate, mode, noise);
    if sigma == 0.0 {
        return *truth;
    }
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let dx = normal.sample(&mut rng);
    let dy = normal.sample(&mut rng);
    Pose2D::new(truth.x + dx, truth.y + dy, truth.theta)
}

/// Estimated track along a base trajectory, one independent draw per
/// sample (seed stream = sample index), paired with the truth.
pub fn localization_track(
    traj: &BaseTrajectory,
    mode: LocalizationMode,
    noise: &NoiseModel,
    seed: u64,
) -> TrajectoryPair {
    let (est, truth): (Vec<_>, Vec<_>) = traj
        .samples()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let e = simulate_localization(&s.pose, s.velocity[2], mode, noise, derive_seed(seed, k as u64));
            (Vector2::new(e.x, e.y), s.pose.position())
        })
        .unzip();
    TrajectoryPair::new(est, truth).expect("equal lengths by construction")
}
