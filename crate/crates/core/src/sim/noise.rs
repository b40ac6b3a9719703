use serde::{Deserialize, Serialize};

/// Which localization source is active. Visual localization degrades with
/// rotation speed (motion blur); scan matching does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LocalizationMode {
    #[default]
    Scan,
    Visual,
}

/// Perturbation parameters for every simulated sensor and primitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-axis Gaussian noise on depth points, meters.
    pub cloud_sigma: f64,
    /// Probability that a depth point is replaced by a uniform outlier.
    pub outlier_fraction: f64,
    pub detection_pixel_sigma: f64,
    /// Per-object probability that the 2D detector misses it.
    pub detection_miss_prob: f64,
    /// Per-axis Gaussian translation error of the localization estimate.
    pub loc_sigma_translation: f64,
    /// Extra per-axis sigma per rad/s of rotation in visual mode.
    pub loc_rotation_noise_gain: f64,
    pub grasp_failure_prob: f64,
    pub place_failure_prob: f64,
    pub master_seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            cloud_sigma: 0.002,
            outlier_fraction: 0.01,
            detection_pixel_sigma: 1.0,
            detection_miss_prob: 0.02,
            // Rayleigh mean sigma * sqrt(pi / 2) = 0.06 m.
            loc_sigma_translation: 0.0479,
            loc_rotation_noise_gain: 0.05,
            grasp_failure_prob: 0.02,
            place_failure_prob: 0.02,
            master_seed: 0,
        }
    }
}

impl NoiseModel {
    /// No perturbation anywhere; every primitive succeeds.
    pub fn zero() -> Self {
        NoiseModel {
            cloud_sigma: 0.0,
            outlier_fraction: 0.0,
            detection_pixel_sigma: 0.0,
            detection_miss_prob: 0.0,
            loc_sigma_translation: 0.0,
            loc_rotation_noise_gain: 0.0,
            grasp_failure_prob: 0.0,
            place_failure_prob: 0.0,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let probabilities = [
            ("outlier_fraction", self.outlier_fraction),
            ("detection_miss_prob", self.detection_miss_prob),
            ("grasp_failure_prob", self.grasp_failure_prob),
            ("place_failure_prob", self.place_failure_prob),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                v.push(format!("noise: {name} {p} outside [0, 1]"));
            }
        }
        let sigmas = [
            ("cloud_sigma", self.cloud_sigma),
            ("detection_pixel_sigma", self.detection_pixel_sigma),
            ("loc_sigma_translation", self.loc_sigma_translation),
            ("loc_rotation_noise_gain", self.loc_rotation_noise_gain),
        ];
        for (name, s) in sigmas {
            if !(s >= 0.0 && s.is_finite()) {
                v.push(format!("noise: {name} {s} must be non-negative"));
            }
        }
        v
    }
}
