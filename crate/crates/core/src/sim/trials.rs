use std::path::Path;
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::fsm::{run_service, EpisodeLog, EpisodeMetrics, FsmState, Outcome};
use crate::metrics::{summarize_success, StateRate};
use crate::model::{load_config, Config};
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Wall-clock data; the only report content not fixed by config and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub generated_at_unix: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u32,
    pub seed: u64,
    pub outcome: Outcome,
    pub total_time: f64,
    pub state_durations: Vec<(FsmState, f64)>,
    pub metrics: EpisodeMetrics,
}

impl TrialRecord {
    fn from_log(index: u32, log: &EpisodeLog) -> Self {
        TrialRecord {
            index,
            seed: log.seed,
            outcome: log.outcome,
            total_time: log.total_time,
            state_durations: log.state_durations.clone(),
            metrics: log.metrics,
        }
    }
}

/// Aggregate of a batch of episodes. Trial records are sorted by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub metadata: ReportMetadata,
    pub config_fingerprint: String,
    pub seed: u64,
    pub request: String,
    pub config: Config,
    pub trials: u32,
    /// One entry per state, in nominal order.
    pub success_rates: Vec<StateRate>,
    pub overall_success: Option<f64>,
    /// Mean and max over trials that ended in `ServiceDone`.
    pub mean_time: Option<f64>,
    pub max_time: Option<f64>,
    pub human_baseline_time: f64,
    /// `mean_time / human_baseline_time`.
    pub robot_to_human_time_ratio: Option<f64>,
    pub records: Vec<TrialRecord>,
}

/// Runs `trials` episodes of the configured request; trial `i` uses seed
/// `derive_seed(seed, i)`. Trials run in parallel; the result does not
/// depend on scheduling.
pub fn run_trials(cfg: &Config, trials: u32, seed: u64) -> Result<EpisodeReport> {
    if trials == 0 {
        return Err(Error::Validation(vec!["trials must be at least 1".into()]));
    }
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let request = cfg.task.request.as_str();
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(trials as usize);
    let mut logs: Vec<(u32, Result<EpisodeLog>)> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w as u32..trials)
                        .step_by(workers)
                        .map(|i| (i, run_service(cfg, request, derive_seed(seed, i as u64))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("trial worker panicked"))
            .collect()
    });
    logs.sort_by_key(|(i, _)| *i);

    let mut records = Vec::with_capacity(logs.len());
    let mut counts = [(0u32, 0u32); 7];
    for (i, log) in logs {
        let log = log?;
        for (state, _) in &log.state_durations {
            let c = &mut counts[state.index()];
            c.0 += 1;
            if log.outcome != Outcome::ServiceFailed(*state) {
                c.1 += 1;
            }
        }
        records.push(TrialRecord::from_log(i, &log));
    }
    let tally: Vec<_> = FsmState::ALL
        .iter()
        .map(|s| (*s, counts[s.index()].0, counts[s.index()].1))
        .collect();
    let summary = summarize_success(&tally)?;

    let done: Vec<f64> = records
        .iter()
        .filter(|r| r.outcome == Outcome::ServiceDone)
        .map(|r| r.total_time)
        .collect();
    let mean_time = (!done.is_empty()).then(|| done.iter().sum::<f64>() / done.len() as f64);
    let max_time = done.iter().copied().reduce(f64::max);
    let human = cfg.task.human_baseline_time;

    Ok(EpisodeReport {
        metadata: ReportMetadata {
            generated_at_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        config_fingerprint: cfg.fingerprint(),
        seed,
        request: request.to_string(),
        config: cfg.clone(),
        trials,
        success_rates: summary.per_state,
        overall_success: summary.overall,
        mean_time,
        max_time,
        human_baseline_time: human,
        robot_to_human_time_ratio: mean_time.map(|m| m / human),
        records,
    })
}

/// [`run_trials`] on a configuration file.
pub fn run_trials_from_path(path: impl AsRef<Path>, trials: u32, seed: u64) -> Result<EpisodeReport> {
    run_trials(&load_config(path)?, trials, seed)
}

/// Writes the report as pretty-printed JSON.
pub fn emit_report(report: &EpisodeReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(report).expect("report is serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: impl AsRef<Path>) -> Result<EpisodeReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
