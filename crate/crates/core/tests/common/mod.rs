//! Brute-force reference implementations shared by the integration tests
//! and the acceptance suite. Nothing here calls the engine's inference,
//! evaluation or d-separation code; it reads raw tables and parent lists.

#![allow(dead_code)]

use maid_core::maid::{Maid, NodeId};
use maid_core::radix::Odometer;
use maid_core::StrategyProfile;

pub fn parent_lists(maid: &Maid) -> Vec<Vec<usize>> {
    maid.ids().map(|id| maid.parents(id).iter().map(|p| p.0).collect()).collect()
}

fn descendants_or_self(parents: &[Vec<usize>], v: usize) -> Vec<bool> {
    let n = parents.len();
    let mut out = vec![false; n];
    out[v] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for c in 0..n {
            if !out[c] && parents[c].iter().any(|&p| out[p]) {
                out[c] = true;
                changed = true;
            }
        }
    }
    out
}

/// d-connection by enumerating every simple undirected path and testing
/// each interior node against the blocking rules.
pub fn d_connected_paths(parents: &[Vec<usize>], x: usize, y: usize, evidence: &[usize]) -> bool {
    let n = parents.len();
    let mut nbrs = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            nbrs[c].push(p);
            nbrs[p].push(c);
        }
    }
    let observed: Vec<bool> = (0..n).map(|v| evidence.contains(&v)).collect();
    let activated: Vec<bool> = (0..n)
        .map(|v| {
            descendants_or_self(parents, v)
                .iter()
                .enumerate()
                .any(|(w, &d)| d && observed[w])
        })
        .collect();
    let is_edge = |a: usize, b: usize| parents[b].contains(&a);
    let mut path = vec![x];
    let mut on_path = vec![false; n];
    on_path[x] = true;

    fn search(
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        y: usize,
        nbrs: &[Vec<usize>],
        ok: &dyn Fn(usize, usize, usize) -> bool,
    ) -> bool {
        let cur = *path.last().unwrap();
        if cur == y {
            return true;
        }
        for &next in &nbrs[cur] {
            if on_path[next] {
                continue;
            }
            if path.len() >= 2 && !ok(path[path.len() - 2], cur, next) {
                continue;
            }
            path.push(next);
            on_path[next] = true;
            if search(path, on_path, y, nbrs, ok) {
                return true;
            }
            path.pop();
            on_path[next] = false;
        }
        false
    }

    let ok = |a: usize, m: usize, b: usize| {
        if is_edge(a, m) && is_edge(b, m) {
            activated[m]
        } else {
            !observed[m]
        }
    };
    search(&mut path, &mut on_path, y, &nbrs, &ok)
}

/// s-reachability from the definition: a fresh parent of `d2` is
/// d-connected to some utility of `d`'s owner given `Pa(d) ∪ {d}`.
pub fn s_reachable_paths(maid: &Maid, d: NodeId, d2: NodeId) -> bool {
    let mut parents = parent_lists(maid);
    let dummy = parents.len();
    parents.push(Vec::new());
    parents[d2.0].push(dummy);
    let mut evidence: Vec<usize> = maid.parents(d).iter().map(|p| p.0).collect();
    evidence.push(d.0);
    let owner = maid.owner(d).unwrap();
    maid.utilities_of(owner)
        .any(|u| d_connected_paths(&parents, dummy, u.0, &evidence))
}

/// Every full assignment of the non-utility nodes with its probability,
/// from the raw CPD rows and the profile's rule rows.
pub fn full_joint(maid: &Maid, profile: &StrategyProfile) -> Vec<(Vec<usize>, f64)> {
    let cards: Vec<usize> = maid
        .ids()
        .map(|id| if maid.node(id).kind.is_utility() { 1 } else { maid.card(id) })
        .collect();
    Odometer::new(&cards)
        .map(|values| {
            let p: f64 = maid
                .ids()
                .filter(|&id| !maid.node(id).kind.is_utility())
                .map(|id| {
                    let row = row_index(maid, id, &values);
                    match maid.node(id).cpd() {
                        Some(cpd) => cpd.row(row)[values[id.0]],
                        None => profile.get(id).expect("full profile").row(row)[values[id.0]],
                    }
                })
                .product();
            (values, p)
        })
        .collect()
}

pub fn row_index(maid: &Maid, id: NodeId, values: &[usize]) -> usize {
    maid.parents(id)
        .iter()
        .fold(0, |acc, &p| acc * maid.card(p) + values[p.0])
}

pub fn utility_at(maid: &Maid, u: NodeId, values: &[usize]) -> f64 {
    maid.node(u).utility().unwrap().value(row_index(maid, u, values))
}

/// Per-agent expected utility as Σ over full assignments of P times the
/// sum of the agent's utility values.
pub fn eu_brute(maid: &Maid, profile: &StrategyProfile) -> Vec<f64> {
    let joint = full_joint(maid, profile);
    maid.agents()
        .iter()
        .map(|a| {
            joint
                .iter()
                .map(|(v, p)| p * maid.utilities_of(a).map(|u| utility_at(maid, u, v)).sum::<f64>())
                .sum()
        })
        .collect()
}

/// Conditional expected utility of the owner for each action of `d` in
/// each row, or `None` for rows with no mass. `others` must cover every
/// decision except `d`.
pub fn action_values(maid: &Maid, others: &StrategyProfile, d: NodeId) -> Vec<Option<Vec<f64>>> {
    let owner = maid.owner(d).unwrap();
    let card = maid.card(d);
    let rows = maid.num_rows(d);
    let mut value = vec![0.0; rows * card];
    let mut mass = vec![0.0; rows];
    for a in 0..card {
        let mut p = others.clone();
        let actions = vec![a; rows];
        p.insert(maid_core::DecisionRule::pure(d, card, &actions));
        for (v, q) in full_joint(maid, &p) {
            let row = row_index(maid, d, &v);
            value[row * card + a] += q * maid.utilities_of(owner).map(|u| utility_at(maid, u, &v)).sum::<f64>();
            if a == 0 {
                mass[row] += q;
            }
        }
    }
    (0..rows)
        .map(|r| (mass[r] > 1e-12).then(|| value[r * card..(r + 1) * card].iter().map(|x| x / mass[r]).collect()))
        .collect()
}

/// Largest |P(x,y|e) − P(x|e)P(y|e)| over all values with P(e) > 1e-6, for
/// a chance-only network.
pub fn ci_violation(net: &Maid, x: usize, y: usize, evidence: &[usize]) -> f64 {
    let joint = full_joint(net, &StrategyProfile::new());
    let (cx, cy) = (net.card(NodeId(x)), net.card(NodeId(y)));
    let ecards: Vec<usize> = evidence.iter().map(|&e| net.card(NodeId(e))).collect();
    let mut worst: f64 = 0.0;
    for e in Odometer::new(&ecards) {
        let mut pxy = vec![vec![0.0; cy]; cx];
        let mut pe = 0.0;
        for (v, p) in &joint {
            if evidence.iter().zip(&e).all(|(&n, &val)| v[n] == val) {
                pe += p;
                pxy[v[x]][v[y]] += p;
            }
        }
        if pe <= 1e-6 {
            continue;
        }
        for row in &pxy {
            let px: f64 = row.iter().sum::<f64>() / pe;
            for (j, &q) in row.iter().enumerate() {
                let py: f64 = pxy.iter().map(|r| r[j]).sum::<f64>() / pe;
                worst = worst.max((q / pe - px * py).abs());
            }
        }
    }
    worst
}
