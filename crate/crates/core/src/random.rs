//! Random models for property tests, the acceptance suite and benchmarks.
//!
//! Every generator takes the caller's RNG, so a seeded RNG reproduces the
//! same model. Generated MAIDs give every agent perfect recall and keep the
//! joint pure-profile count at or below 65 536.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::maid::{build_maid, Maid, MaidSpec, NodeSpec};
use crate::strategy::{DecisionRule, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomMaidConfig {
    /// Chance nodes are drawn from `1..=max_chance`.
    pub max_chance: usize,
    /// Decisions are drawn from `1..=max_decisions` (at most 3).
    pub max_decisions: usize,
    /// Agents are drawn from `1..=max_agents`, never more than decisions.
    pub max_agents: usize,
    /// Utility table entries are integers in `-utility_bound..=utility_bound`.
    pub utility_bound: i32,
}

impl Default for RandomMaidConfig {
    fn default() -> Self {
        RandomMaidConfig {
            max_chance: 3,
            max_decisions: 3,
            max_agents: 2,
            utility_bound: 100,
        }
    }
}

const BINARY: [&str; 2] = ["0", "1"];

/// A probability row over `card` values. One row in ten is deterministic.
fn random_row<R: Rng + ?Sized>(rng: &mut R, card: usize) -> Vec<f64> {
    if rng.gen_bool(0.1) {
        let mut row = vec![0.0; card];
        row[rng.gen_range(0..card)] = 1.0;
        return row;
    }
    let w: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut row: Vec<f64> = w.iter().map(|x| x / total).collect();
    let head: f64 = row[..card - 1].iter().sum();
    row[card - 1] = 1.0 - head;
    row
}

fn random_cpd<R: Rng + ?Sized>(rng: &mut R, rows: usize, card: usize) -> Vec<f64> {
    (0..rows).flat_map(|_| random_row(rng, card)).collect()
}

/// A MAID with binary chance and decision nodes.
pub fn random_maid<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomMaidConfig) -> Maid {
    let n_chance = rng.gen_range(1..=cfg.max_chance.max(1));
    let n_dec = rng.gen_range(1..=cfg.max_decisions.clamp(1, 3));
    let n_agents = rng.gen_range(1..=cfg.max_agents.clamp(1, n_dec));
    let agents: Vec<String> = (0..n_agents).map(|i| format!("a{i}")).collect();

    let mut owners: Vec<usize> = (0..n_dec).map(|i| if i < n_agents { i } else { rng.gen_range(0..n_agents) }).collect();
    owners.shuffle(rng);
    let mut names: Vec<String> = (0..n_chance).map(|i| format!("C{i}")).collect();
    names.extend((0..n_dec).map(|i| format!("D{i}")));
    names.shuffle(rng);

    let per_agent: Vec<usize> = (0..n_agents).map(|a| owners.iter().filter(|&&o| o == a).count()).collect();
    let mut seen_by_agent = vec![0usize; n_agents];
    let mut last_decision: Vec<Option<usize>> = vec![None; n_agents];
    let mut parents: Vec<Vec<usize>> = Vec::with_capacity(names.len());
    let mut nodes = Vec::new();
    for (pos, name) in names.iter().enumerate() {
        let earlier: Vec<usize> = (0..pos).collect();
        if let Some(d) = name.strip_prefix('D') {
            let a = owners[d.parse::<usize>().expect("decision index")];
            let j = seen_by_agent[a];
            let limit = if per_agent[a] >= 3 { 1 + j } else { (2 + j).min(3) };
            let mut ps: Vec<usize> = match last_decision[a] {
                Some(prev) => {
                    let mut v = parents[prev].clone();
                    v.push(prev);
                    v
                }
                None => Vec::new(),
            };
            let mut pool: Vec<usize> = earlier.iter().copied().filter(|p| !ps.contains(p)).collect();
            pool.shuffle(rng);
            for p in pool {
                if ps.len() >= limit {
                    break;
                }
                if rng.gen_bool(0.5) {
                    ps.push(p);
                }
            }
            ps.sort_unstable();
            let pnames: Vec<&str> = ps.iter().map(|&p| names[p].as_str()).collect();
            nodes.push(NodeSpec::decision(name, &agents[a], &BINARY, &pnames));
            seen_by_agent[a] += 1;
            last_decision[a] = Some(pos);
            parents.push(ps);
        } else {
            let ps: Vec<usize> = earlier.into_iter().filter(|_| rng.gen_bool(0.4)).take(2).collect();
            let pnames: Vec<&str> = ps.iter().map(|&p| names[p].as_str()).collect();
            let table = random_cpd(rng, 1 << ps.len(), 2);
            nodes.push(NodeSpec::chance(name, &BINARY, &pnames, table));
            parents.push(ps);
        }
    }

    let mut u = 0;
    for (a, agent) in agents.iter().enumerate() {
        let own: Vec<usize> = (0..names.len())
            .filter(|&p| names[p].starts_with('D') && owners[names[p][1..].parse::<usize>().unwrap()] == a)
            .collect();
        for k in 0..rng.gen_range(1..=2) {
            let mut pool: Vec<usize> = (0..names.len()).collect();
            pool.shuffle(rng);
            let size = rng.gen_range(1..=3);
            let mut ps: Vec<usize> = pool.into_iter().take(size).collect();
            if k == 0 && !ps.iter().any(|p| own.contains(p)) {
                ps[0] = *own.choose(rng).expect("agent owns a decision");
            }
            ps.sort_unstable();
            ps.dedup();
            let pnames: Vec<&str> = ps.iter().map(|&p| names[p].as_str()).collect();
            let table = (0..1usize << ps.len())
                .map(|_| rng.gen_range(-cfg.utility_bound..=cfg.utility_bound) as f64)
                .collect();
            nodes.push(NodeSpec::utility(&format!("U{u}"), agent, &pnames, table));
            u += 1;
        }
    }
    build_maid(&MaidSpec {
        agents,
        nodes,
        illustrative: false,
    })
    .expect("generated model is valid")
}

/// A chance-only network on `n` nodes named `X0..`, each edge `Xi -> Xj`
/// (`i < j`) present with probability `edge_p`, domains of size 2 or 3.
pub fn random_dag_net<R: Rng + ?Sized>(rng: &mut R, n: usize, edge_p: f64) -> Maid {
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let cards: Vec<usize> = (0..n).map(|_| if rng.gen_bool(0.25) { 3 } else { 2 }).collect();
    let labels = ["0", "1", "2"];
    let nodes = (0..n)
        .map(|j| {
            let ps: Vec<usize> = (0..j).filter(|_| rng.gen_bool(edge_p)).collect();
            let rows: usize = ps.iter().map(|&p| cards[p]).product();
            let pnames: Vec<&str> = ps.iter().map(|&p| names[p].as_str()).collect();
            NodeSpec::chance(&names[j], &labels[..cards[j]], &pnames, random_cpd(rng, rows, cards[j]))
        })
        .collect();
    build_maid(&MaidSpec {
        agents: Vec::new(),
        nodes,
        illustrative: false,
    })
    .expect("generated network is valid")
}

/// A fully mixed random rule for every decision of `maid`.
pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, maid: &Maid) -> StrategyProfile {
    maid.decisions()
        .map(|d| {
            let card = maid.card(d);
            let rows = (0..maid.num_rows(d)).map(|_| random_row(rng, card)).collect();
            DecisionRule::from_rows(maid, d, rows).expect("rows match the decision")
        })
        .collect()
}
