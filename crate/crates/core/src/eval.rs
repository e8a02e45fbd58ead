//! Depth-first expected-utility evaluation straight off a [`Maid`].
//!
//! Utility nodes are leaves, so the walk only branches over chance and
//! decision nodes and reads utilities at the leaves. Zero-probability
//! branches are pruned. This is the hot path of every solver routine; the
//! Bayes-network queries in `inference` are the reference route.

use crate::maid::{Maid, NodeId, NodeTable};
use crate::strategy::StrategyProfile;

/// How the walk treats one non-utility node.
#[derive(Clone, Copy)]
pub(crate) enum Slot<'a> {
    /// Probability rows, `card` entries each.
    Table(&'a [f64], usize),
    /// Deterministic rule: one action per row.
    Pure(&'a [usize]),
    /// Branch over every action with weight 1.
    Free,
    /// Decision without a rule; walking into it is a caller bug.
    Open,
}

pub(crate) struct Evaluator<'a> {
    maid: &'a Maid,
    /// Non-utility nodes in topological order.
    order: Vec<usize>,
    strides: Vec<Vec<usize>>,
    /// `(utility node, owner agent index)`.
    utilities: Vec<(usize, usize)>,
    cards: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(maid: &'a Maid) -> Self {
        let cards: Vec<usize> = maid.ids().map(|id| maid.card(id)).collect();
        let strides = maid
            .ids()
            .map(|id| {
                let ps = maid.parents(id);
                let mut s = vec![1; ps.len()];
                for i in (0..ps.len().saturating_sub(1)).rev() {
                    s[i] = s[i + 1] * cards[ps[i + 1].0];
                }
                s
            })
            .collect();
        let order = maid
            .ids()
            .filter(|&id| !maid.node(id).kind.is_utility())
            .map(|id| id.0)
            .collect();
        let utilities = maid
            .utilities()
            .map(|u| {
                let owner = maid.owner(u).expect("utility owner");
                (u.0, maid.agent_index(owner.as_str()).expect("known agent"))
            })
            .collect();
        Evaluator {
            maid,
            order,
            strides,
            utilities,
            cards,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.maid.agents().len()
    }

    pub fn row_of(&self, node: usize, values: &[usize]) -> usize {
        self.maid.nodes()[node]
            .parents
            .iter()
            .zip(&self.strides[node])
            .map(|(p, s)| values[p.0] * s)
            .sum()
    }

    /// Slots for chance nodes from their CPDs and for decisions from
    /// `profile`; decisions it does not cover are left open.
    pub fn slots(&self, profile: &'a StrategyProfile) -> Vec<Slot<'a>> {
        self.maid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, n)| match &n.table {
                NodeTable::Chance(cpd) => Slot::Table(cpd.flat(), cpd.card()),
                NodeTable::Decision => match profile.get(NodeId(i)) {
                    Some(rule) => Slot::Table(rule.flat(), rule.card()),
                    None => Slot::Open,
                },
                NodeTable::Utility(_) => Slot::Open,
            })
            .collect()
    }

    /// Utility of `agent` at a leaf.
    pub fn utility_of(&self, agent: usize, values: &[usize]) -> f64 {
        self.utilities
            .iter()
            .filter(|(_, a)| *a == agent)
            .map(|&(u, _)| self.utility_value(u, values))
            .sum()
    }

    fn utility_value(&self, u: usize, values: &[usize]) -> f64 {
        let table = self.maid.nodes()[u].utility().expect("utility table");
        table.value(self.row_of(u, values))
    }

    /// Expected utility of every agent (in model agent order).
    pub fn expected_utilities(&self, slots: &[Slot<'_>]) -> Vec<f64> {
        let mut eu = vec![0.0; self.num_agents()];
        self.walk(slots, &mut |values, p| {
            for &(u, a) in &self.utilities {
                eu[a] += p * self.utility_value(u, values);
            }
        });
        eu
    }

    /// Calls `visit(values, p)` for every positive-mass leaf.
    pub fn walk(&self, slots: &[Slot<'_>], visit: &mut dyn FnMut(&[usize], f64)) {
        let mut values = vec![0; self.cards.len()];
        self.walk_from(0, 1.0, slots, &mut values, visit);
    }

    fn walk_from(
        &self,
        depth: usize,
        p: f64,
        slots: &[Slot<'_>],
        values: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        let Some(&node) = self.order.get(depth) else {
            visit(values, p);
            return;
        };
        match slots[node] {
            Slot::Table(probs, card) => {
                let row = self.row_of(node, values);
                for (v, &q) in probs[row * card..(row + 1) * card].iter().enumerate() {
                    if q > 0.0 {
                        values[node] = v;
                        self.walk_from(depth + 1, p * q, slots, values, visit);
                    }
                }
            }
            Slot::Pure(actions) => {
                values[node] = actions[self.row_of(node, values)];
                self.walk_from(depth + 1, p, slots, values, visit);
            }
            Slot::Free => {
                for v in 0..self.cards[node] {
                    values[node] = v;
                    self.walk_from(depth + 1, p, slots, values, visit);
                }
            }
            Slot::Open => panic!("unresolved decision `{}` in evaluation", self.maid.nodes()[node].id),
        }
    }
}
