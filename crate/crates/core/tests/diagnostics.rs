mod oracles;

use aggpilot::attacks::{poison, AttackConfig};
use aggpilot::{compute_state, UpdateVector};
use oracles::SplitMix;

#[test]
fn state_matches_naive_oracle() {
    let mut rng = SplitMix(31);
    for _ in 0..200 {
        let n = rng.int(2, 20);
        let d = rng.int(1, 30);
        let m: Vec<Vec<f64>> = (0..n).map(|_| rng.vector(d, 5.0)).collect();
        let s = compute_state(&m.iter().cloned().map(UpdateVector::new).collect::<Vec<_>>()).unwrap();
        let (var, cos, norm) = oracles::diagnostics(&m);
        assert!((s.norm_variance - var).abs() <= 1e-9 * (1.0 + var));
        assert!((s.avg_cosine_similarity - cos).abs() <= 1e-9);
        assert!((s.mean_update_norm - norm).abs() <= 1e-9 * (1.0 + norm));
    }
}

#[test]
fn stealth_keeps_norm_variance_at_benign_level() {
    // 15 benign updates with spread-out norms, 5 attackers.
    let mut rng = SplitMix(32);
    let honest: Vec<UpdateVector> = (0..20).map(|_| UpdateVector::new(rng.vector(10, 1.0))).collect();
    let benign_norms: Vec<f64> = honest[5..].iter().map(UpdateVector::norm).collect();
    let build = |cfg: &AttackConfig| -> Vec<UpdateVector> {
        honest
            .iter()
            .enumerate()
            .map(|(i, u)| if i < 5 { poison(u, &benign_norms, cfg).unwrap() } else { u.clone() })
            .collect()
    };
    let clean = compute_state(&honest).unwrap().norm_variance;
    let stealth = compute_state(&build(&AttackConfig::stealth())).unwrap().norm_variance;
    let loud = compute_state(&build(&AttackConfig::standard())).unwrap().norm_variance;
    assert!(stealth <= 2.0 * clean, "{stealth} vs {clean}");
    assert!(loud >= 10.0 * clean, "{loud} vs {clean}");
}
