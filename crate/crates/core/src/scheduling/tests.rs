use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::*;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn nodes(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// |observed - p| within `k` binomial standard deviations.
fn within_sigma(count: usize, trials: usize, p: f64, k: f64) -> bool {
    let sd = (p * (1.0 - p) / trials as f64).sqrt();
    ((count as f64 / trials as f64) - p).abs() <= k * sd
}

#[test]
fn cadence() {
    assert!((1..=10).all(|c| audit_due(c, 1)));
    let due: Vec<u64> = (1..=10).filter(|&c| audit_due(c, 5)).collect();
    assert_eq!(due, vec![5, 10]);
    assert!(!audit_due(0, 1));
    assert!(!audit_due(0, 7));
}

#[test]
fn random_cluster_basics() {
    let mut r = rng(1);
    let all = nodes(6);
    let mut got = sample_cluster_random(&all, 6, &mut r).unwrap();
    got.sort();
    assert_eq!(got, all);
    assert_eq!(
        sample_cluster_random(&all, 7, &mut r),
        Err(SchedulingError::ClusterTooLarge {
            requested: 7,
            available: 6
        })
    );
    let c = sample_cluster_random(&nodes(50), 20, &mut r).unwrap();
    assert_eq!(c.iter().collect::<BTreeSet<_>>().len(), 20);
}

#[test]
fn random_cluster_is_uniform() {
    let mut r = rng(2);
    let all = nodes(100);
    let trials = 100_000;
    let mut counts = vec![0usize; 100];
    for _ in 0..trials {
        counts[sample_cluster_random(&all, 1, &mut r).unwrap()[0]] += 1;
    }
    assert!(counts.iter().all(|&c| within_sigma(c, trials, 0.01, 4.0)));
    let outside_3 = counts.iter().filter(|&&c| !within_sigma(c, trials, 0.01, 3.0)).count();
    assert!(outside_3 <= 3, "{outside_3} nodes beyond 3 sigma");
}

#[test]
fn weight_updates() {
    let mut w = Weights::new(&[0usize, 1], WeightParams::default()).unwrap();
    assert_eq!(w.update_weight(&0, AuditOutcome::Failed).unwrap(), 2.0);
    assert_eq!(w.update_weight(&1, AuditOutcome::Passed).unwrap(), 1.0);
    w.update_weight(&0, AuditOutcome::Failed).unwrap();
    assert_eq!(w.get(&0), Some(4.0));
    assert_eq!(w.update_weight(&0, AuditOutcome::Passed).unwrap(), 2.0);
    assert_eq!(w.update_weight(&7, AuditOutcome::Passed), Err(SchedulingError::UnknownFog));
    let bad = WeightParams {
        floor: 0.0,
        ..WeightParams::default()
    };
    assert!(Weights::new(&[0usize], bad).is_err());
}

#[test]
fn heavy_node_frequency_matches_analytic() {
    let mut r = rng(3);
    let all = nodes(100);
    let mut w = Weights::new(&all, WeightParams {
        gamma_up: 10.0,
        ..WeightParams::default()
    })
    .unwrap();
    w.update_weight(&42, AuditOutcome::Failed).unwrap();
    let trials = 100_000;
    let hits = (0..trials)
        .filter(|_| sample_cluster_weighted(&all, &w, 1, &mut r).unwrap()[0] == 42)
        .count();
    assert!(within_sigma(hits, trials, 10.0 / 109.0, 4.0), "hits {hits}");
}

/// Exact inclusion probabilities of successive weighted draws, by
/// enumerating every ordered prefix.
fn successive_inclusion(weights: &[f64], size: usize) -> Vec<f64> {
    fn walk(weights: &[f64], taken: &mut Vec<usize>, p: f64, size: usize, out: &mut [f64]) {
        if taken.len() == size {
            for &i in taken.iter() {
                out[i] += p;
            }
            return;
        }
        let rest: f64 = (0..weights.len())
            .filter(|i| !taken.contains(i))
            .map(|i| weights[i])
            .sum();
        for i in 0..weights.len() {
            if taken.contains(&i) {
                continue;
            }
            taken.push(i);
            walk(weights, taken, p * weights[i] / rest, size, out);
            taken.pop();
        }
    }
    let mut out = vec![0.0; weights.len()];
    walk(weights, &mut Vec::new(), 1.0, size, &mut out);
    out
}

#[test]
fn weighted_sampler_has_successive_draw_law() {
    let mut r = rng(4);
    let all = nodes(5);
    let mut w = Weights::new(&all, WeightParams::default()).unwrap();
    // Weights 1, 2, 4, 8, 1.
    for (node, fails) in [(1, 1), (2, 2), (3, 3)] {
        for _ in 0..fails {
            w.update_weight(&node, AuditOutcome::Failed).unwrap();
        }
    }
    let raw: Vec<f64> = all.iter().map(|n| w.get(n).unwrap()).collect();
    let expected = successive_inclusion(&raw, 3);
    assert!((expected.iter().sum::<f64>() - 3.0).abs() < 1e-12);
    let trials = 100_000;
    let mut counts = [0usize; 5];
    for _ in 0..trials {
        let c = sample_cluster_weighted(&all, &w, 3, &mut r).unwrap();
        assert_eq!(c.iter().collect::<BTreeSet<_>>().len(), 3);
        for n in c {
            counts[n] += 1;
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        assert!(within_sigma(c, trials, expected[i], 4.0), "node {i}: {c} vs {}", expected[i]);
    }
}

#[test]
fn uniform_weights_reduce_to_random() {
    let mut r = rng(5);
    let all = nodes(20);
    let w = Weights::new(&all, WeightParams::default()).unwrap();
    let trials = 40_000;
    let mut weighted = [0usize; 20];
    let mut uniform = [0usize; 20];
    for _ in 0..trials {
        for n in sample_cluster_weighted(&all, &w, 5, &mut r).unwrap() {
            weighted[n] += 1;
        }
        for n in sample_cluster_random(&all, 5, &mut r).unwrap() {
            uniform[n] += 1;
        }
    }
    for i in 0..20 {
        assert!(within_sigma(weighted[i], trials, 0.25, 4.0));
        assert!(within_sigma(uniform[i], trials, 0.25, 4.0));
    }
}

#[test]
fn failures_raise_inclusion_frequency() {
    let all = nodes(20);
    let mut w = Weights::new(&all, WeightParams::default()).unwrap();
    let trials = 20_000;
    let mut last = 0;
    for round in 0..4 {
        let mut r = rng(6 + round);
        let hits = (0..trials)
            .filter(|_| sample_cluster_weighted(&all, &w, 5, &mut r).unwrap().contains(&3))
            .count();
        assert!(hits > last, "round {round}: {hits} <= {last}");
        last = hits;
        w.update_weight(&3, AuditOutcome::Failed).unwrap();
    }
}

fn occurrences(blocks: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut c = vec![0; n];
    for b in blocks {
        for &x in b {
            c[x] += 1;
        }
    }
    c
}

#[test]
fn bibd_balance() {
    for (n, b) in [(7, 3), (20, 5), (100, 25), (5, 1), (5, 5)] {
        let blocks = build_bibd(&nodes(n), b).unwrap();
        assert_eq!(blocks.len(), n);
        for block in &blocks {
            assert_eq!(block.iter().collect::<BTreeSet<_>>().len(), b);
        }
        assert!(occurrences(&blocks, n).iter().all(|&c| c == b), "n={n} b={b}");
    }
    let singletons = build_bibd(&nodes(4), 1).unwrap();
    assert_eq!(singletons, vec![vec![0], vec![1], vec![2], vec![3]]);
    assert!(build_bibd(&nodes(4), 4).unwrap().iter().all(|b| b.len() == 4));
    assert_eq!(
        build_bibd(&nodes(3), 4),
        Err(SchedulingError::InvalidDesign {
            block_size: 4,
            nodes: 3
        })
    );
}

#[test]
fn bibd_cursor_cycles_and_rebuilds() {
    let mut r = rng(7);
    let all = nodes(7);
    let mut s = SchedulerState::new(Policy::Bibd, 3, &all, WeightParams::default()).unwrap();
    let mut seen = Vec::new();
    for _ in 0..7 {
        seen.push(s.next_cluster(&all, &mut r).unwrap());
    }
    assert_eq!(seen, build_bibd(&all, 3).unwrap());
    assert!(occurrences(&seen, 7).iter().all(|&c| c == 3));

    s.next_cluster(&all, &mut r).unwrap();
    let live: Vec<usize> = all.iter().copied().filter(|&x| x != 4).collect();
    s.on_eject(&4, &live).unwrap();
    assert_eq!(s.design().unwrap().cursor(), 0);
    for _ in 0..12 {
        let c = s.next_cluster(&live, &mut r).unwrap();
        assert!(!c.contains(&4));
        assert_eq!(c.len(), 3);
    }

    let one = vec![9usize];
    let mut s = SchedulerState::new(Policy::Bibd, 1, &one, WeightParams::default()).unwrap();
    for _ in 0..3 {
        assert_eq!(s.next_cluster(&one, &mut r).unwrap(), vec![9]);
    }
}

#[test]
fn clusters_shrink_with_population() {
    let mut r = rng(8);
    for policy in Policy::ALL {
        let mut live = nodes(6);
        let mut s = SchedulerState::new(policy, 4, &live, WeightParams::default()).unwrap();
        while let Some(&victim) = live.first() {
            let c = s.next_cluster(&live, &mut r).unwrap();
            assert_eq!(c.len(), 4.min(live.len()), "{policy}");
            assert_eq!(c.iter().collect::<BTreeSet<_>>().len(), c.len());
            assert!(c.iter().all(|x| live.contains(x)));
            s.record_outcome(&c[0], AuditOutcome::Failed).unwrap();
            live.retain(|&x| x != victim);
            s.on_eject(&victim, &live).unwrap();
        }
        assert!(s.next_cluster(&live, &mut r).unwrap().is_empty());
    }
}

#[test]
fn policy_parsing_and_csv() {
    assert_eq!("Weighted".parse::<Policy>().unwrap(), Policy::Weighted);
    assert!("roundrobin".parse::<Policy>().is_err());
    let all = nodes(3);
    let mut out = Vec::new();
    SchedulerState::new(Policy::Bibd, 2, &all, WeightParams::default())
        .unwrap()
        .write_csv(&mut out)
        .unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "block,members\n0,0 1\n1,1 2\n2,2 0\n");
    let mut out = Vec::new();
    let mut s = SchedulerState::new(Policy::Weighted, 2, &all, WeightParams::default()).unwrap();
    s.record_outcome(&1, AuditOutcome::Failed).unwrap();
    s.write_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "node,weight\n0,1\n1,2\n2,1\n");
}
