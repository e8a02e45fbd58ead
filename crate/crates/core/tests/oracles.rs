//! Engine results checked against the brute-force references in `common`.

mod common;

use common::*;
use maid_core::inference::{induce_bayes_net, joint_probability, marginal, Assignment};
use maid_core::maid::NodeId;
use maid_core::radix::Odometer;
use maid_core::random::{random_dag_net, random_maid, random_profile, RandomMaidConfig};
use maid_core::{
    d_connected, enumerate_pure_ne, expected_utilities, expected_utility, expected_utility_joint, is_nash,
    nash_equilibrium, relevance_graph, s_reachable, BundledModelId, Dag, SearchConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

#[test]
fn d_connection_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let n = rng.gen_range(3..=6);
        let net = random_dag_net(&mut rng, n, 0.45);
        let parents = parent_lists(&net);
        let dag = Dag::from_maid(&net);
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let others: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
                for mask in 0..1u32 << others.len() {
                    let ev: Vec<usize> = others
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, &v)| v)
                        .collect();
                    assert_eq!(
                        d_connected(&dag, x, y, &ev).unwrap(),
                        d_connected_paths(&parents, x, y, &ev),
                        "x={x} y={y} ev={ev:?} parents={parents:?}"
                    );
                }
            }
        }
    }
}

fn all_models(seed: u64, count: usize) -> Vec<maid_core::Maid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut models: Vec<_> = BundledModelId::ALL.iter().map(|id| id.build()).collect();
    models.push(maid_core::models::matching_pennies());
    models.extend((0..count).map(|_| random_maid(&mut rng, &RandomMaidConfig::default())));
    models
}

#[test]
fn relevance_graph_matches_definition() {
    for m in all_models(5, 200) {
        let rg = relevance_graph(&m);
        for d in m.decisions() {
            for d2 in m.decisions() {
                let want = s_reachable_paths(&m, d, d2);
                assert_eq!(s_reachable(&m, d, d2).unwrap(), want, "{} -> {}", m.name(d), m.name(d2));
                if d != d2 {
                    assert_eq!(rg.has_edge(d, d2), want);
                }
            }
        }
    }
}

#[test]
fn expected_utility_matches_full_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for m in all_models(9, 120) {
        let profile = random_profile(&mut rng, &m);
        let want = eu_brute(&m, &profile);
        let fast = expected_utilities(&m, &profile).unwrap();
        for (i, a) in m.agents().iter().enumerate() {
            let per_node = expected_utility(&m, &profile, a.as_str()).unwrap();
            let joint = expected_utility_joint(&m, &profile, a.as_str()).unwrap();
            assert!((per_node - want[i]).abs() <= TOL, "{per_node} vs {}", want[i]);
            assert!((joint - want[i]).abs() <= TOL);
            assert!((fast[i] - want[i]).abs() <= TOL);
        }
    }
}

#[test]
fn joint_normalizes_and_marginals_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for m in all_models(29, 120) {
        let profile = random_profile(&mut rng, &m);
        let bn = induce_bayes_net(&m, &profile).unwrap();
        let cards: Vec<usize> = (0..bn.len()).map(|i| bn.domain(NodeId(i)).len()).collect();
        let mut total = 0.0;
        let mut table = Vec::new();
        for values in Odometer::new(&cards) {
            let mut a = Assignment::new();
            for (i, &v) in values.iter().enumerate() {
                a.set(NodeId(i), v);
            }
            let p = joint_probability(&bn, &a).unwrap();
            assert!((0.0..=1.0 + TOL).contains(&p));
            total += p;
            table.push((values, p));
        }
        assert!((total - 1.0).abs() <= TOL, "total {total}");

        let n = bn.len();
        let t = NodeId(rng.gen_range(0..n));
        let e = NodeId(rng.gen_range(0..n));
        let mut evidence = Assignment::new();
        if e != t {
            evidence.set(e, rng.gen_range(0..cards[e.0]));
        }
        let mass: f64 = table
            .iter()
            .filter(|(v, _)| evidence.iter().all(|(k, x)| v[k.0] == x))
            .map(|(_, p)| p)
            .sum();
        match marginal(&bn, &[t], &evidence) {
            Ok(got) => {
                for x in 0..cards[t.0] {
                    let want: f64 = table
                        .iter()
                        .filter(|(v, _)| v[t.0] == x && evidence.iter().all(|(k, y)| v[k.0] == y))
                        .map(|(_, p)| p)
                        .sum::<f64>()
                        / mass;
                    assert!((got.get(&[x]) - want).abs() <= TOL);
                }
            }
            Err(_) => assert!(mass < 1e-12, "rejected evidence of mass {mass}"),
        }
    }
}

#[test]
fn solver_agrees_with_exhaustive_search() {
    let cfg = SearchConfig::default();
    let mut compared = 0;
    for m in all_models(31, 150) {
        let oracle = enumerate_pure_ne(&m, &cfg).unwrap();
        match nash_equilibrium(&m, &cfg) {
            Ok(res) => {
                let check = is_nash(&m, &res.profile, &cfg).unwrap();
                assert!(check.is_nash, "gain {}", check.max_gain());
                if !oracle.is_empty() {
                    assert!(oracle.contains(&res.profile));
                    compared += 1;
                }
                let brute = eu_brute(&m, &res.profile);
                for ((_, v), b) in res.expected_utilities.iter().zip(brute) {
                    assert!((v - b).abs() <= TOL);
                }
            }
            Err(maid_core::EquilibriumError::NoPureEquilibrium { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(compared >= 100, "only {compared} comparisons");
}

#[test]
fn best_response_beats_every_pure_alternative() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..100 {
        let m = random_maid(&mut rng, &RandomMaidConfig::default());
        let ds: Vec<NodeId> = m.decisions().collect();
        let d = ds[rng.gen_range(0..ds.len())];
        let mut others = random_profile(&mut rng, &m);
        others.remove(d);
        let rule = maid_core::best_response_rule(&m, &others, d).unwrap();
        let values = action_values(&m, &others, d);
        for (row, v) in values.iter().enumerate() {
            let chosen = rule.action(row).unwrap();
            match v {
                None => assert_eq!(chosen, 0),
                Some(v) => {
                    let best = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    assert!(v[chosen] >= best - TOL);
                    let first = v.iter().position(|&x| x >= best - TOL).unwrap();
                    assert!(chosen <= first);
                }
            }
        }
    }
}
