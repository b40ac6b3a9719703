//! Simulated sensing and localization, plus trial batching and reports.

mod localization;
mod noise;
mod sensing;
mod trials;

pub use localization::{localization_sigma, localization_track, simulate_localization};
pub use noise::{LocalizationMode, NoiseModel};
pub use sensing::synthesize_cloud;
pub use trials::{
    emit_report, load_report, run_trials, run_trials_from_path, EpisodeReport, ReportMetadata, TrialRecord,
};
