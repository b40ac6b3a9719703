//! Path and localization metrics plus per-state success accounting.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::fsm::FsmState;
use crate::{Error, Result};

/// End-effector positions over strictly increasing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EePath {
    samples: Vec<(f64, Vector3<f64>)>,
}

impl EePath {
    pub fn new(samples: Vec<(f64, Vector3<f64>)>) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Parse("path timestamps must strictly increase".into()));
        }
        Ok(EePath { samples })
    }

    pub fn samples(&self) -> &[(f64, Vector3<f64>)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The same positions traversed backwards in time.
    pub fn reversed(&self) -> EePath {
        let end = self.samples.last().map_or(0.0, |s| s.0);
        EePath {
            samples: self.samples.iter().rev().map(|(t, p)| (end - t, *p)).collect(),
        }
    }
}

/// Sum of per-segment L1 displacements.
pub fn path_length_manhattan(path: &EePath) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::NotEnoughSamples("path length needs at least 2 samples"));
    }
    Ok(path.samples.windows(2).map(|w| (w[1].1 - w[0].1).lp_norm(1)).sum())
}

/// Half the integral of squared speed over time normalized to `[0, 1]`.
///
/// Velocities come from central differences (one-sided at the ends) and the
/// integral from the trapezoidal rule.
pub fn smoothness_cost(path: &EePath) -> Result<f64> {
    let n = path.len();
    if n < 2 {
        return Err(Error::NotEnoughSamples("smoothness needs at least 2 samples"));
    }
    let t0 = path.samples[0].0;
    let span = path.samples[n - 1].0 - t0;
    let s: Vec<f64> = path.samples.iter().map(|(t, _)| (t - t0) / span).collect();
    let p: Vec<Vector3<f64>> = path.samples.iter().map(|(_, p)| *p).collect();
    let speed2: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            ((p[b] - p[a]) / (s[b] - s[a])).norm_squared()
        })
        .collect();
    let integral: f64 = (1..n)
        .map(|k| 0.5 * (speed2[k] + speed2[k - 1]) * (s[k] - s[k - 1]))
        .sum();
    Ok(0.5 * integral)
}

/// Estimated and true planar positions matched sample by sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPair {
    estimated: Vec<Vector2<f64>>,
    truth: Vec<Vector2<f64>>,
}

impl TrajectoryPair {
    /// Pairs already matched in time; lengths must agree.
    pub fn new(estimated: Vec<Vector2<f64>>, truth: Vec<Vector2<f64>>) -> Result<Self> {
        if estimated.len() != truth.len() {
            return Err(Error::Validation(vec![format!(
                "trajectory pair: {} estimated vs {} true samples",
                estimated.len(),
                truth.len()
            )]));
        }
        Ok(TrajectoryPair { estimated, truth })
    }

    /// Matches each true sample with the estimated sample nearest in time,
    /// keeping only matches closer than `tick / 2`. Unmatched samples at
    /// either end are dropped. Both inputs must be sorted by time.
    pub fn align(estimated: &[(f64, Vector2<f64>)], truth: &[(f64, Vector2<f64>)], tick: f64) -> Self {
        let mut pair = TrajectoryPair {
            estimated: Vec::new(),
            truth: Vec::new(),
        };
        let mut j = 0;
        for (t, p) in truth {
            while j + 1 < estimated.len() && (estimated[j + 1].0 - t).abs() <= (estimated[j].0 - t).abs() {
                j += 1;
            }
            if let Some((te, pe)) = estimated.get(j) {
                if (te - t).abs() <= 0.5 * tick {
                    pair.estimated.push(*pe);
                    pair.truth.push(*p);
                }
            }
        }
        pair
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    fn deviations(&self) -> impl Iterator<Item = f64> + '_ {
        self.estimated.iter().zip(&self.truth).map(|(e, t)| (e - t).norm())
    }
}

/// Largest Euclidean position error over the matched samples.
pub fn deviation_max(pair: &TrajectoryPair) -> Result<f64> {
    if pair.is_empty() {
        return Err(Error::NotEnoughSamples("deviation needs matched samples"));
    }
    Ok(pair.deviations().fold(0.0, f64::max))
}

/// Mean Euclidean position error over the matched samples.
pub fn deviation_avg(pair: &TrajectoryPair) -> Result<f64> {
    if pair.is_empty() {
        return Err(Error::NotEnoughSamples("deviation needs matched samples"));
    }
    Ok(pair.deviations().sum::<f64>() / pair.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateRate {
    pub state: FsmState,
    pub attempted: u32,
    pub succeeded: u32,
    /// Absent when the state was never attempted.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessSummary {
    pub per_state: Vec<StateRate>,
    /// Product of the per-state rates along the state sequence; absent if
    /// no state has a rate.
    pub overall: Option<f64>,
}

/// Per-state success rates from `(state, attempted, succeeded)` records.
pub fn summarize_success(records: &[(FsmState, u32, u32)]) -> Result<SuccessSummary> {
    let bad: Vec<String> = records
        .iter()
        .filter(|(_, a, s)| s > a)
        .map(|(st, a, s)| format!("state {st:?}: {s} successes exceed {a} attempts"))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Validation(bad));
    }
    let per_state: Vec<StateRate> = records
        .iter()
        .map(|&(state, attempted, succeeded)| StateRate {
            state,
            attempted,
            succeeded,
            rate: (attempted > 0).then(|| succeeded as f64 / attempted as f64),
        })
        .collect();
    let rates: Vec<f64> = per_state.iter().filter_map(|r| r.rate).collect();
    let overall = (!rates.is_empty()).then(|| rates.iter().product());
    Ok(SuccessSummary { per_state, overall })
}
