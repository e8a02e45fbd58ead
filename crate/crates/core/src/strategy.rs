//! Decision rules and (partial) strategy profiles.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::maid::{Maid, NodeId, ROW_SUM_TOLERANCE};
use crate::radix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("`{0}` is not a decision node")]
    NotADecisionNode(String),
    #[error("rule for `{decision}` has {found} rows, expected {expected}")]
    RowCount {
        decision: String,
        expected: usize,
        found: usize,
    },
    #[error("rule for `{decision}` row {row} has {found} entries, expected {expected}")]
    RowWidth {
        decision: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("rule for `{decision}` row {row} is not a distribution")]
    NotNormalized { decision: String, row: usize },
}

/// Maps every parent instantiation of a decision (odometer order) to a
/// distribution over its actions.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    decision: NodeId,
    card: usize,
    probs: Vec<f64>,
}

impl DecisionRule {
    /// Every row uniform over the decision's domain.
    pub fn uniform(maid: &Maid, decision: NodeId) -> DecisionRule {
        let card = maid.card(decision);
        let rows = maid.num_rows(decision);
        DecisionRule {
            decision,
            card,
            probs: vec![1.0 / card as f64; rows * card],
        }
    }

    /// Deterministic rule choosing `actions[row]` in each row.
    pub fn pure(decision: NodeId, card: usize, actions: &[usize]) -> DecisionRule {
        DecisionRule {
            decision,
            card,
            probs: one_hot(card, actions),
        }
    }

    /// Builds a rule from explicit rows, checked against the model.
    pub fn from_rows(maid: &Maid, decision: NodeId, rows: Vec<Vec<f64>>) -> Result<DecisionRule, RuleError> {
        let name = maid.name(decision).to_string();
        if !maid.node(decision).kind.is_decision() {
            return Err(RuleError::NotADecisionNode(name));
        }
        let expected = maid.num_rows(decision);
        if rows.len() != expected {
            return Err(RuleError::RowCount {
                decision: name,
                expected,
                found: rows.len(),
            });
        }
        let card = maid.card(decision);
        let mut probs = Vec::with_capacity(expected * card);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != card {
                return Err(RuleError::RowWidth {
                    decision: name,
                    row,
                    expected: card,
                    found: r.len(),
                });
            }
            let sum: f64 = r.iter().sum();
            if r.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(RuleError::NotNormalized { decision: name, row });
            }
            probs.extend(r);
        }
        Ok(DecisionRule { decision, card, probs })
    }

    pub fn decision(&self) -> NodeId {
        self.decision
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn num_rows(&self) -> usize {
        self.probs.len() / self.card
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.probs[row * self.card..(row + 1) * self.card]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.card)
    }

    pub(crate) fn flat(&self) -> &[f64] {
        &self.probs
    }

    /// The chosen action in `row`, if that row is deterministic.
    pub fn action(&self, row: usize) -> Option<usize> {
        let r = self.row(row);
        let hot = r.iter().position(|&p| p == 1.0)?;
        r.iter()
            .enumerate()
            .all(|(i, &p)| i == hot || p == 0.0)
            .then_some(hot)
    }

    /// Per-row actions when every row is deterministic.
    pub fn actions(&self) -> Option<Vec<usize>> {
        (0..self.num_rows()).map(|r| self.action(r)).collect()
    }

    /// Checks row count and width against `maid`.
    pub fn check(&self, maid: &Maid) -> Result<(), RuleError> {
        let name = || maid.name(self.decision).to_string();
        if !maid.node(self.decision).kind.is_decision() {
            return Err(RuleError::NotADecisionNode(name()));
        }
        let expected = maid.num_rows(self.decision);
        if self.num_rows() != expected {
            return Err(RuleError::RowCount {
                decision: name(),
                expected,
                found: self.num_rows(),
            });
        }
        if self.card != maid.card(self.decision) {
            return Err(RuleError::RowWidth {
                decision: name(),
                row: 0,
                expected: maid.card(self.decision),
                found: self.card,
            });
        }
        Ok(())
    }
}

fn one_hot(card: usize, actions: &[usize]) -> Vec<f64> {
    let mut probs = vec![0.0; card * actions.len()];
    for (row, &a) in actions.iter().enumerate() {
        probs[row * card + a] = 1.0;
    }
    probs
}

/// Assignment of decision rules to some (partial) or all (full) decisions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrategyProfile {
    rules: BTreeMap<NodeId, DecisionRule>,
}

impl StrategyProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// The uniform fully mixed profile over every decision of `maid`.
    pub fn uniform(maid: &Maid) -> Self {
        maid.decisions()
            .map(|d| DecisionRule::uniform(maid, d))
            .collect()
    }

    /// Replaces any existing rule for the same decision.
    pub fn insert(&mut self, rule: DecisionRule) -> Option<DecisionRule> {
        self.rules.insert(rule.decision, rule)
    }

    pub fn remove(&mut self, decision: NodeId) -> Option<DecisionRule> {
        self.rules.remove(&decision)
    }

    pub fn get(&self, decision: NodeId) -> Option<&DecisionRule> {
        self.rules.get(&decision)
    }

    pub fn covers(&self, decision: NodeId) -> bool {
        self.rules.contains_key(&decision)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = &DecisionRule> {
        self.rules.values()
    }

    /// Decisions of `maid` the profile leaves open.
    pub fn missing(&self, maid: &Maid) -> Vec<NodeId> {
        maid.decisions().filter(|d| !self.covers(*d)).collect()
    }

    pub fn is_full(&self, maid: &Maid) -> bool {
        self.missing(maid).is_empty()
    }

    /// `self` with every rule of `other` layered on top.
    pub fn with(&self, other: &StrategyProfile) -> StrategyProfile {
        let mut out = self.clone();
        for r in other.rules() {
            out.insert(r.clone());
        }
        out
    }

    pub fn check(&self, maid: &Maid) -> Result<(), RuleError> {
        self.rules().try_for_each(|r| r.check(maid))
    }
}

impl FromIterator<DecisionRule> for StrategyProfile {
    fn from_iter<T: IntoIterator<Item = DecisionRule>>(iter: T) -> Self {
        let mut p = StrategyProfile::new();
        for r in iter {
            p.insert(r);
        }
        p
    }
}

/// Enumerates the pure rules of one decision: rule `k` picks, in row `r`,
/// digit `r` of `k` in base `card` (row 0 most significant).
#[derive(Debug, Clone)]
pub(crate) struct PureRuleSpace {
    pub decision: NodeId,
    pub card: usize,
    pub rows: usize,
}

impl PureRuleSpace {
    pub fn new(maid: &Maid, decision: NodeId) -> Self {
        PureRuleSpace {
            decision,
            card: maid.card(decision),
            rows: maid.num_rows(decision),
        }
    }

    /// Number of pure rules, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        (self.card as u128).checked_pow(self.rows as u32).unwrap_or(u128::MAX)
    }

    pub fn actions(&self, index: usize, out: &mut Vec<usize>) {
        out.clear();
        out.resize(self.rows, 0);
        radix::decode_into(&vec![self.card; self.rows], index, out);
    }

    pub fn rule(&self, index: usize) -> DecisionRule {
        let mut a = Vec::new();
        self.actions(index, &mut a);
        DecisionRule::pure(self.decision, self.card, &a)
    }
}
