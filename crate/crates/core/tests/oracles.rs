use std::collections::BTreeSet;

use hashjack_core::community::{adjusted_rand_index, delta_modularity};
use hashjack_core::hashjack::{fit_logistic, fit_logistic_table, odds_ratio};
use hashjack_core::metrics::head_size;
use hashjack_core::synth::{allocate_activity, planted_partition_graph, zipf_weights, ActivityConfig};
use hashjack_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn barbell() -> UndirectedGraph {
    let edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)];
    let e: Vec<(usize, usize, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    UndirectedGraph::from_edges(6, &e)
}

/// All set partitions of `n` elements as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            rec(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    rec(&mut prefix, 0, n, &mut out);
    out
}

#[test]
fn barbell_exhaustive_optimum() {
    let g = barbell();
    let all = set_partitions(6);
    assert_eq!(all.len(), 203);
    let scored: Vec<(f64, &Vec<usize>)> = all
        .iter()
        .map(|p| (modularity(&g, p, 1.0).unwrap(), p))
        .collect();
    let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    assert!((best - (6.0 / 7.0 - 0.5)).abs() < 1e-12);
    let argmax: Vec<&&Vec<usize>> = scored
        .iter()
        .filter(|s| (s.0 - best).abs() < 1e-12)
        .map(|s| &s.1)
        .collect();
    assert_eq!(argmax.len(), 1);
    assert_eq!(**argmax[0], vec![0, 0, 0, 1, 1, 1]);

    let p = louvain(&g, 1.0, 42).unwrap();
    assert!((p.modularity - (6.0 / 7.0 - 0.5)).abs() < 1e-12);
    assert_eq!(p.local_assignment(&g).unwrap(), vec![0, 0, 0, 1, 1, 1]);
}

#[test]
fn two_cliques_locally_optimal() {
    let mut edges = Vec::new();
    for base in [0, 10] {
        for i in 0..10 {
            for j in i + 1..10 {
                edges.push((base + i, base + j, 1.0));
            }
        }
    }
    edges.push((9, 10, 1.0));
    let g = UndirectedGraph::from_edges(20, &edges);
    for seed in 0..10 {
        let p = louvain(&g, 1.0, seed).unwrap();
        let local = p.local_assignment(&g).unwrap();
        assert_eq!(p.community_count(), 2);
        assert!(local[..10].iter().all(|&c| c == local[0]));
        assert!(local[10..].iter().all(|&c| c == local[10]));
        for node in 0..20 {
            for target in 0..=2 {
                let d = delta_modularity(&g, &local, node, target, 1.0).unwrap();
                assert!(d <= 0.0, "node {node} to {target} gains {d}");
            }
        }
    }
}

#[test]
fn planted_four_blocks_recovered() {
    let mut good = 0;
    for seed in 0..20 {
        let (g, truth) = planted_partition_graph(&[50; 4], 0.3, 0.01, seed);
        let p = louvain(&g, 1.0, 42).unwrap();
        let found = p.local_assignment(&g).unwrap();
        if adjusted_rand_index(&truth, &found) >= 0.95 {
            good += 1;
        }
    }
    assert!(good >= 18, "{good}/20");
}

#[test]
fn worked_odds_and_logistic() {
    let t = ContingencyTable2x2::new(50, 50, 100, 400);
    let or = odds_ratio(&t);
    assert!((or.odds_ratio - 4.0).abs() < 1e-12);
    let se = (1.0f64 / 50.0 + 1.0 / 50.0 + 1.0 / 100.0 + 1.0 / 400.0).sqrt();
    assert!((or.ci_low - (4.0f64.ln() - 1.96 * se).exp()).abs() < 1e-12);

    // the same table as per-account rows
    let mut outcome = Vec::new();
    let mut predictor = Vec::new();
    for (n, x, y) in [(50, true, true), (50, true, false), (100, false, true), (400, false, false)] {
        for _ in 0..n {
            predictor.push(x);
            outcome.push(y);
        }
    }
    let fit = fit_logistic(&outcome, &predictor).unwrap();
    assert!(fit.converged);
    assert!((fit.beta1 - 4.0f64.ln()).abs() < 1e-6);
    assert!((fit.beta0 - 0.25f64.ln()).abs() < 1e-6);

    let sep = fit_logistic_table(&ContingencyTable2x2::new(10, 0, 5, 20)).unwrap();
    assert!(sep.separation && !sep.converged);
}

#[test]
fn projection_brute_force_1000_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    use rand::Rng;
    let names: Vec<String> = (0..120).map(|i| format!("acct{i:03}")).collect();
    let mut stream = Vec::new();
    while stream.len() < 1000 {
        let a = rng.random_range(0..names.len());
        let b = rng.random_range(0..names.len());
        if a == b {
            continue;
        }
        stream.push(TweetRecord {
            tweet_id: stream.len().to_string(),
            author: names[a].clone(),
            retweeted_author: Some(names[b].clone()),
            hashtags: ["#t".to_string()].into(),
            timestamp: "2020-05-28T00:00:00Z".parse().unwrap(),
        });
    }
    let mut reg = AccountRegistry::from_records_sorted(&stream);
    let net = build_network("#t", &stream, &mut reg);
    let g = undirected_projection(&net);
    let ids = g.node_ids();
    let mut dense = vec![vec![0u64; 120]; 120];
    for r in &stream {
        let a = reg.get(&r.author).unwrap() as usize;
        let b = reg.get(r.retweeted_author.as_ref().unwrap()).unwrap() as usize;
        dense[a][b] += 1;
        dense[b][a] += 1;
    }
    let mut total = 0.0;
    for i in 0..g.node_count() {
        for j in 0..g.node_count() {
            assert_eq!(g.weight(i, j), dense[ids[i] as usize][ids[j] as usize] as f64);
            if i < j {
                total += g.weight(i, j);
            }
        }
    }
    assert_eq!(total, 1000.0);
}

#[test]
fn zipf_concentration_matches_brute_force() {
    let act = ActivityConfig { zipf_exponent: 1.1, events_per_account: 6.0, min_events: 0 };
    let counts = allocate_activity(5000, &act, &mut ChaCha8Rng::seed_from_u64(5));
    assert_eq!(zipf_weights(3, 1.0), vec![1.0, 0.5, 1.0 / 3.0]);
    // one account per count, each retweeting a sink outside the group
    let mut net = RetweetNetwork::empty("#z");
    let mut reg = AccountRegistry::new();
    let sink = reg.intern("zz_sink");
    let mut members = BTreeSet::new();
    for (i, &c) in counts.iter().enumerate() {
        let idx = reg.intern(&format!("a{i:05}"));
        net.add_node(idx);
        members.insert(idx);
        if c > 0 {
            net.add_retweets(idx, sink, u64::from(c));
        }
    }
    let group = PartisanAssignment { party: "#z".into(), members };
    let curve = concentration(&group, &[&net], &reg, &[0.01, 0.10]).unwrap();
    let mut sorted: Vec<u64> = counts.iter().map(|&c| u64::from(c)).collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let total: u64 = sorted.iter().sum();
    for q in [0.01, 0.10] {
        let k = head_size(q, 5000);
        let brute = sorted[..k].iter().sum::<u64>() as f64 / total as f64;
        assert_eq!(curve.share_at(q).unwrap(), brute);
    }
}

#[test]
fn uniform_activity_half() {
    let mut net = RetweetNetwork::empty("#u");
    let mut reg = AccountRegistry::new();
    let sink = reg.intern("sink");
    let mut members = BTreeSet::new();
    for i in 0..101 {
        let idx = reg.intern(&format!("m{i:03}"));
        net.add_retweets(idx, sink, 3);
        members.insert(idx);
    }
    let group = PartisanAssignment { party: "#u".into(), members };
    let curve = concentration(&group, &[&net], &reg, &[0.5]).unwrap();
    let share = curve.share_at(0.5).unwrap();
    assert!((share - 0.5).abs() <= 1.0 / 101.0);
    assert_eq!(curve.share_at(1.0), Some(1.0));
}
