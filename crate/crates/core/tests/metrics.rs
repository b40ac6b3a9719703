mod support;

use fetchsim_core::fsm::FsmState;
use fetchsim_core::metrics::{
    deviation_avg, deviation_max, path_length_manhattan, smoothness_cost, summarize_success, EePath, TrajectoryPair,
};
use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{cosine_move, deviation_avg_oracle, deviation_max_oracle, manhattan_oracle, smoothness_oracle, P3};

fn ee_path(times: &[f64], points: &[P3]) -> EePath {
    EePath::new(times.iter().zip(points).map(|(t, p)| (*t, Vector3::from(*p))).collect()).unwrap()
}

fn random_path(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<P3>) {
    let n = rng.random_range(2..=1000);
    let mut t = rng.random_range(-5.0..5.0);
    let mut times = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        times.push(t);
        t += rng.random_range(1e-3..0.1);
        points.push(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    }
    (times, points)
}

fn pair(est: &[[f64; 2]], truth: &[[f64; 2]]) -> TrajectoryPair {
    TrajectoryPair::new(
        est.iter().map(|p| Vector2::from(*p)).collect(),
        truth.iter().map(|p| Vector2::from(*p)).collect(),
    )
    .unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn path_metrics_match_oracles_on_random_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let (times, points) = random_path(&mut rng);
        let path = ee_path(&times, &points);
        let len = path_length_manhattan(&path).unwrap();
        assert!(close(len, manhattan_oracle(&points), 1e-9));
        let cost = smoothness_cost(&path).unwrap();
        assert!(close(cost, smoothness_oracle(&times, &points), 1e-9), "{cost}");
    }
}

#[test]
fn deviations_match_oracles_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let n = rng.random_range(1..=1000);
        let gen = |rng: &mut ChaCha8Rng| -> Vec<[f64; 2]> {
            (0..n)
                .map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
                .collect()
        };
        let (est, truth) = (gen(&mut rng), gen(&mut rng));
        let p = pair(&est, &truth);
        assert!(close(
            deviation_max(&p).unwrap(),
            deviation_max_oracle(&est, &truth),
            1e-9
        ));
        assert!(close(
            deviation_avg(&p).unwrap(),
            deviation_avg_oracle(&est, &truth),
            1e-9
        ));
    }
}

#[test]
fn cosine_move_smoothness_is_analytic() {
    let delta = 0.4;
    let (times, points) = cosine_move(delta, 2001);
    let expected = delta * delta * std::f64::consts::PI.powi(2) / 16.0;
    let cost = smoothness_cost(&ee_path(&times, &points)).unwrap();
    assert!((cost - expected).abs() <= 1e-4, "{cost} vs {expected}");
}

#[test]
fn documented_examples() {
    let two = ee_path(&[0.0, 1.0], &[[0.0; 3], [0.1, 0.2, 0.0]]);
    assert!((path_length_manhattan(&two).unwrap() - 0.3).abs() < 1e-15);
    let still = ee_path(&[0.0, 1.0, 2.0], &[[0.5; 3]; 3]);
    assert_eq!(path_length_manhattan(&still).unwrap(), 0.0);
    assert_eq!(smoothness_cost(&still).unwrap(), 0.0);

    let line: Vec<P3> = (0..11).map(|k| [0.04 * k as f64, 0.0, 0.0]).collect();
    let times: Vec<f64> = (0..11).map(|k| 3.0 * k as f64).collect();
    assert!((smoothness_cost(&ee_path(&times, &line)).unwrap() - 0.08).abs() < 1e-12);

    let same = pair(&[[1.0, 2.0]; 4], &[[1.0, 2.0]; 4]);
    assert_eq!(deviation_max(&same).unwrap(), 0.0);
    assert_eq!(deviation_avg(&same).unwrap(), 0.0);
    let shifted = pair(&[[0.03, 0.04]; 5], &[[0.0, 0.0]; 5]);
    assert!((deviation_max(&shifted).unwrap() - 0.05).abs() < 1e-15);
    assert!((deviation_avg(&shifted).unwrap() - 0.05).abs() < 1e-15);
    let half = pair(&[[0.1, 0.0], [0.0, 0.0], [0.1, 0.0], [0.0, 0.0]], &[[0.0, 0.0]; 4]);
    assert!((deviation_avg(&half).unwrap() - 0.05).abs() < 1e-15);

    let one = ee_path(&[0.0], &[[0.0; 3]]);
    assert!(path_length_manhattan(&one).is_err());
    assert!(smoothness_cost(&one).is_err());
    assert!(deviation_max(&pair(&[], &[])).is_err());
}

#[test]
fn success_summary_examples() {
    let s = summarize_success(&[(FsmState::GraspObject, 20, 18), (FsmState::PlaceObject, 0, 0)]).unwrap();
    assert!((s.per_state[0].rate.unwrap() - 0.90).abs() < 1e-15);
    assert_eq!(s.per_state[1].rate, None);
    let all: Vec<_> = FsmState::ALL.iter().map(|s| (*s, 20, 20)).collect();
    assert_eq!(summarize_success(&all).unwrap().overall, Some(1.0));
    assert!(summarize_success(&[(FsmState::ReLocalize, 3, 4)]).is_err());
}

fn points_strategy() -> impl Strategy<Value = Vec<P3>> {
    prop::collection::vec(prop::array::uniform3(-2.0..2.0f64), 2..200)
}

fn unit_times(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * 0.01).collect()
}

proptest! {
    #[test]
    fn manhattan_bounds_and_additivity(a in points_strategy(), b in points_strategy()) {
        let la = path_length_manhattan(&ee_path(&unit_times(a.len()), &a)).unwrap();
        let chord = manhattan_oracle(&[a[0], a[a.len() - 1]]);
        prop_assert!(la >= chord - 1e-12);

        // Concatenating at a shared point adds lengths.
        let mut joined = a.clone();
        joined.extend_from_slice(&b);
        let mut bridged = b.clone();
        bridged.insert(0, a[a.len() - 1]);
        let lb = path_length_manhattan(&ee_path(&unit_times(bridged.len()), &bridged)).unwrap();
        let total = path_length_manhattan(&ee_path(&unit_times(joined.len()), &joined)).unwrap();
        prop_assert!((total - (la + lb)).abs() <= 1e-9);
    }

    #[test]
    fn smoothness_scaling_and_reversal(points in points_strategy(), c in 0.1..10.0f64) {
        let times = unit_times(points.len());
        let path = ee_path(&times, &points);
        let cost = smoothness_cost(&path).unwrap();
        prop_assert!(cost >= 0.0);
        let scaled: Vec<P3> = points.iter().map(|p| p.map(|v| v * c)).collect();
        let scaled_cost = smoothness_cost(&ee_path(&times, &scaled)).unwrap();
        prop_assert!((scaled_cost - c * c * cost).abs() <= 1e-9 * scaled_cost.max(1.0));
        let back = smoothness_cost(&path.reversed()).unwrap();
        prop_assert!((back - cost).abs() <= 1e-9 * cost.max(1.0));
    }

    #[test]
    fn deviation_ordering(
        rows in prop::collection::vec((prop::array::uniform2(-5.0..5.0f64), prop::array::uniform2(-5.0..5.0f64)), 1..200),
    ) {
        let (est, truth): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        let p = pair(&est, &truth);
        let (max, avg) = (deviation_max(&p).unwrap(), deviation_avg(&p).unwrap());
        prop_assert!(max >= avg - 1e-12 && avg >= 0.0);
        let same = pair(&truth, &truth);
        prop_assert_eq!(deviation_max(&same).unwrap(), 0.0);
    }
}

#[test]
fn alignment_keeps_only_close_matches() {
    let truth: Vec<(f64, Vector2<f64>)> = (0..10).map(|k| (k as f64 * 0.1, Vector2::new(k as f64, 0.0))).collect();
    let est: Vec<(f64, Vector2<f64>)> = truth
        .iter()
        .skip(2)
        .map(|(t, p)| (t + 0.001, p + Vector2::new(0.0, 0.5)))
        .collect();
    let p = TrajectoryPair::align(&est, &truth, 0.01);
    assert_eq!(p.len(), 8);
    assert!((deviation_avg(&p).unwrap() - 0.5).abs() < 1e-12);
}
