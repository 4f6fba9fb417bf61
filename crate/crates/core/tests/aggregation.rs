mod oracles;

use aggpilot::aggregation::{aggregate, coordinate_wise_median, fed_avg, krum, krum_scores, KrumConfig, RuleId};
use aggpilot::{Error, UpdateVector};
use oracles::SplitMix;

fn instance(rng: &mut SplitMix, min_n: usize) -> Vec<Vec<f64>> {
    let n = rng.int(min_n, 20);
    let d = rng.int(1, 50);
    let scale = 10f64.powf(rng.range(-3.0, 3.0));
    (0..n).map(|_| rng.vector(d, scale)).collect()
}

fn wrap(m: &[Vec<f64>]) -> Vec<UpdateVector> {
    m.iter().cloned().map(UpdateVector::new).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

#[test]
fn fedavg_and_median_match_brute_force() {
    let mut rng = SplitMix(11);
    for _ in 0..300 {
        let m = instance(&mut rng, 1);
        let u = wrap(&m);
        assert!(close(&fed_avg(&u).unwrap().delta, &oracles::fedavg(&m), 1e-12));
        assert!(close(&coordinate_wise_median(&u).unwrap().delta, &oracles::median(&m), 0.0));
    }
}

#[test]
fn krum_matches_brute_force() {
    let mut rng = SplitMix(12);
    for _ in 0..300 {
        let m = instance(&mut rng, 3);
        let f = rng.int(0, m.len() - 3);
        let cfg = KrumConfig { f };
        let (chosen, idx) = krum(&wrap(&m), &cfg).unwrap();
        assert_eq!(idx, oracles::krum(&m, f));
        assert_eq!(chosen.delta, m[idx]);
        let scores = krum_scores(&wrap(&m), &cfg).unwrap();
        assert!(close(&scores, &oracles::krum_scores(&m, f), 1e-12));
    }
}

#[test]
fn krum_rejects_too_few_clients() {
    let m = vec![vec![0.0; 2]; 7];
    let err = krum(&wrap(&m), &KrumConfig { f: 5 }).unwrap_err();
    assert!(matches!(err, Error::KrumTooFewClients { n: 7, f: 5 }));
    assert!(krum(&wrap(&vec![vec![0.0; 2]; 8]), &KrumConfig { f: 5 }).is_ok());
}

#[test]
fn krum_ignores_a_far_outlier_group() {
    // 15 honest updates near (1, 1), 5 far away.
    let mut rng = SplitMix(3);
    let mut m: Vec<Vec<f64>> = (0..15).map(|_| vec![1.0 + rng.range(-0.1, 0.1), 1.0 + rng.range(-0.1, 0.1)]).collect();
    m.extend((0..5).map(|_| vec![50.0 + rng.range(-0.1, 0.1), -50.0]));
    let (_, idx) = krum(&wrap(&m), &KrumConfig { f: 5 }).unwrap();
    assert!(idx < 15);
}

#[test]
fn aggregate_dispatch_reports_krum_index_only() {
    // k = 1: clients 1 and 2 tie at 0.25, the lower index wins.
    let m = vec![vec![1.0], vec![2.0], vec![2.5], vec![100.0]];
    let u = wrap(&m);
    let cfg = KrumConfig { f: 1 };
    assert_eq!(aggregate(RuleId::FedAvg, &u, &cfg).unwrap(), (UpdateVector::new(vec![26.375]), None));
    assert_eq!(aggregate(RuleId::Median, &u, &cfg).unwrap(), (UpdateVector::new(vec![2.25]), None));
    assert_eq!(aggregate(RuleId::Krum, &u, &cfg).unwrap(), (UpdateVector::new(vec![2.0]), Some(1)));
}

#[test]
fn empty_and_ragged_inputs_are_rejected() {
    assert!(matches!(fed_avg(&[]), Err(Error::EmptyUpdates)));
    let ragged = vec![UpdateVector::new(vec![1.0]), UpdateVector::new(vec![1.0, 2.0])];
    assert!(matches!(coordinate_wise_median(&ragged), Err(Error::DimensionMismatch { .. })));
}
