mod common;

use common::{action_values, ci_violation};
use maid_core::io::{parse_model_file, serialize_model};
use maid_core::maid::{build_maid, KindSpec, MaidSpec, NodeId};
use maid_core::random::{random_dag_net, random_maid, random_profile, RandomMaidConfig};
use maid_core::{
    best_response_rule, check_perfect_recall, d_connected, induce, relevance_graph, scc_ordering, stake_weighted_eu,
    BundledModelId, Dag, Maid,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn maid_from(seed: u64) -> Maid {
    random_maid(&mut ChaCha8Rng::seed_from_u64(seed), &RandomMaidConfig::default())
}

fn scaled(m: &Maid, c: f64) -> Maid {
    let mut spec = m.to_spec();
    for n in &mut spec.nodes {
        if n.kind == KindSpec::Utility {
            n.table.iter_mut().for_each(|v| *v *= c);
        }
    }
    build_maid(&spec).unwrap()
}

#[test]
fn bundled_files_are_byte_stable() {
    for id in BundledModelId::ALL {
        let text = serialize_model(&id.build());
        assert_eq!(serialize_model(&parse_model_file(&text).unwrap()), text, "{id}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn model_file_round_trip(seed in any::<u64>()) {
        let m = maid_from(seed);
        let text = serialize_model(&m);
        let back = parse_model_file(&text).unwrap();
        prop_assert_eq!(serialize_model(&back), text);
        let (a, b) = (m.to_spec(), back.to_spec());
        prop_assert_eq!(&a.agents, &b.agents);
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            prop_assert_eq!(&x.id, &y.id);
            prop_assert_eq!(x.kind, y.kind);
            prop_assert_eq!(&x.owner, &y.owner);
            prop_assert_eq!(&x.domain, &y.domain);
            prop_assert_eq!(&x.parents, &y.parents);
            prop_assert_eq!(x.table.len(), y.table.len());
            for (p, q) in x.table.iter().zip(&y.table) {
                prop_assert!((p - q).abs() <= 1e-11);
            }
        }
    }

    #[test]
    fn parents_precede_children(seed in any::<u64>()) {
        let m = maid_from(seed);
        for id in m.ids() {
            for p in m.parents(id) {
                prop_assert!(p.0 < id.0);
            }
        }
    }

    #[test]
    fn induced_rows_stay_normalized(seed in any::<u64>()) {
        let m = maid_from(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let induced = induce(&m, &random_profile(&mut rng, &m)).unwrap();
        for n in induced.nodes() {
            if let Some(cpd) = n.cpd() {
                for row in cpd.rows() {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn d_separation_implies_independence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_dag_net(&mut rng, 5, 0.4);
        let dag = Dag::from_maid(&net);
        let x = rng.gen_range(0..5);
        let y = (x + rng.gen_range(1..5)) % 5;
        let ev: Vec<usize> = (0..5).filter(|&v| v != x && v != y && rng.gen_bool(0.5)).collect();
        if !d_connected(&dag, x, y, &ev).unwrap() {
            prop_assert!(ci_violation(&net, x, y, &ev) <= 1e-9);
        }
    }

    #[test]
    fn best_response_ignores_positive_scaling(seed in any::<u64>(), c in prop::sample::select(vec![2.0, 10.0, 100.0])) {
        let m = maid_from(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let ds: Vec<NodeId> = m.decisions().collect();
        let d = ds[rng.gen_range(0..ds.len())];
        let mut others = random_profile(&mut rng, &m);
        others.remove(d);
        let gaps_ok = action_values(&m, &others, d).iter().flatten().all(|v| {
            let best = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            v.iter().all(|&x| x == best || best - x >= 1e-3)
        });
        prop_assume!(gaps_ok);
        let base = best_response_rule(&m, &others, d).unwrap();
        let big = scaled(&m, c);
        prop_assert_eq!(best_response_rule(&big, &others, d).unwrap(), base);
    }

    #[test]
    fn stake_weighting_is_linear(eu in -1e6f64..1e6, f in 0.0f64..=1.0, g in 0.0f64..=1.0) {
        prop_assert_eq!(stake_weighted_eu(eu, f).unwrap(), f * eu);
        if eu > 0.0 && f <= g {
            prop_assert!(stake_weighted_eu(eu, f).unwrap() <= stake_weighted_eu(eu, g).unwrap());
        }
    }

    #[test]
    fn components_partition_and_respect_order(seed in any::<u64>()) {
        let m = maid_from(seed);
        let rg = relevance_graph(&m);
        let ord = scc_ordering(&rg);
        let mut all: Vec<NodeId> = ord.components.iter().flatten().copied().collect();
        all.sort();
        prop_assert_eq!(all, m.decisions().collect::<Vec<_>>());
        let comp_of = |d: NodeId| ord.components.iter().position(|c| c.contains(&d)).unwrap();
        for (a, b) in rg.edges() {
            prop_assert!(comp_of(a) <= comp_of(b));
        }
    }

    #[test]
    fn perfect_recall_ignores_declaration_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_maid(&mut rng, &RandomMaidConfig::default());
        let mut spec: MaidSpec = m.to_spec();
        // drop a random decision edge so that violations occur too
        if let Some(n) = spec.nodes.iter_mut().filter(|n| n.kind == KindSpec::Decision && !n.parents.is_empty()).last() {
            if rng.gen_bool(0.5) {
                n.parents.pop();
            }
        }
        let before = build_maid(&spec).unwrap();
        spec.nodes.shuffle(&mut rng);
        let after = build_maid(&spec).unwrap();
        let (r1, r2) = (check_perfect_recall(&before), check_perfect_recall(&after));
        for a in before.agents() {
            prop_assert_eq!(r1.get(a.as_str()).unwrap().holds, r2.get(a.as_str()).unwrap().holds);
        }
    }
}
