//! Exact inference over the Bayes network a strategy profile induces, and
//! graphical d-connection tests.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::maid::{Cpd, Domain, Maid, NodeId, NodeKind, NodeTable};
use crate::radix;
use crate::strategy::{RuleError, StrategyProfile};

/// Evidence below this mass is treated as impossible.
pub const ZERO_EVIDENCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("decision rule does not fit the model: {0}")]
    RuleArityMismatch(#[from] RuleError),
    #[error("decision `{0}` has no rule; the profile is partial")]
    UnresolvedDecision(String),
    #[error("assignment does not cover node `{0}`")]
    IncompleteAssignment(String),
    #[error("value index {value} is outside the domain of `{node}`")]
    ValueOutOfDomain { node: String, value: usize },
    #[error("evidence has probability {0:e}")]
    ZeroProbabilityEvidence(f64),
    #[error("`{0}` is both a target and an evidence variable")]
    TargetInEvidence(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// The MAID `maid[profile]`: every decision covered by the profile becomes
/// a chance node whose CPD is its rule. Uncovered decisions stay decisions.
pub fn induce(maid: &Maid, profile: &StrategyProfile) -> Result<Maid, InferenceError> {
    profile.check(maid)?;
    let mut out = maid.clone();
    for rule in profile.rules() {
        out.replace_with_chance(rule.decision(), Cpd::from_flat(rule.card(), rule.flat().to_vec()));
    }
    Ok(out)
}

/// Fully induces `maid` under a full profile.
pub fn induce_bayes_net(maid: &Maid, profile: &StrategyProfile) -> Result<BayesNet, InferenceError> {
    BayesNet::from_maid(&induce(maid, profile)?)
}

/// An all-chance network. Utility nodes carry degenerate CPDs over their
/// distinct values.
#[derive(Debug, Clone)]
pub struct BayesNet {
    names: Vec<String>,
    domains: Vec<Domain>,
    parents: Vec<Vec<NodeId>>,
    cpds: Vec<Cpd>,
    strides: Vec<Vec<usize>>,
}

impl BayesNet {
    /// Fails if any decision node is left unresolved.
    pub fn from_maid(maid: &Maid) -> Result<BayesNet, InferenceError> {
        let mut cpds = Vec::with_capacity(maid.len());
        for node in maid.nodes() {
            let cpd = match (&node.kind, &node.table) {
                (NodeKind::Decision { .. }, _) => {
                    return Err(InferenceError::UnresolvedDecision(node.id.clone()))
                }
                (_, NodeTable::Chance(cpd)) => cpd.clone(),
                (_, NodeTable::Utility(t)) => {
                    let idx: Vec<usize> = t
                        .values()
                        .iter()
                        .map(|v| {
                            node.domain
                                .values()
                                .iter()
                                .position(|d| d.alias == Some(*v))
                                .expect("utility value in its own domain")
                        })
                        .collect();
                    Cpd::deterministic(node.domain.len(), &idx)
                }
                (_, NodeTable::Decision) => unreachable!("decision table on non-decision node"),
            };
            cpds.push(cpd);
        }
        let parents: Vec<Vec<NodeId>> = maid.ids().map(|id| maid.parents(id).to_vec()).collect();
        let strides = parents
            .iter()
            .map(|ps| strides(&ps.iter().map(|p| maid.card(*p)).collect::<Vec<_>>()))
            .collect();
        Ok(BayesNet {
            names: maid.nodes().iter().map(|n| n.id.clone()).collect(),
            domains: maid.nodes().iter().map(|n| n.domain.clone()).collect(),
            parents,
            cpds,
            strides,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.names.iter().position(|n| n == name).map(NodeId)
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0]
    }

    pub fn domain(&self, id: NodeId) -> &Domain {
        &self.domains[id.0]
    }

    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        &self.parents[id.0]
    }

    pub fn cpd(&self, id: NodeId) -> &Cpd {
        &self.cpds[id.0]
    }

    fn row_of(&self, node: usize, values: &[usize]) -> usize {
        self.parents[node]
            .iter()
            .zip(&self.strides[node])
            .map(|(p, s)| values[p.0] * s)
            .sum()
    }

    /// Builds an assignment from `(node, label)` pairs.
    pub fn assignment(&self, pairs: &[(&str, &str)]) -> Result<Assignment, InferenceError> {
        let mut a = Assignment::new();
        for (node, label) in pairs {
            let id = self
                .node_id(node)
                .ok_or_else(|| InferenceError::UnknownNode(node.to_string()))?;
            let v = self.domains[id.0]
                .index_of(label)
                .ok_or_else(|| InferenceError::UnknownNode(format!("{node}={label}")))?;
            a.set(id, v);
        }
        Ok(a)
    }

    /// Depth-first walk over every full assignment with positive mass that
    /// agrees with `evidence`, calling `visit(values, probability)`.
    fn walk(&self, evidence: &Assignment, visit: &mut dyn FnMut(&[usize], f64)) {
        let mut values = vec![0; self.len()];
        self.walk_from(0, 1.0, evidence, &mut values, visit);
    }

    fn walk_from(
        &self,
        node: usize,
        p: f64,
        evidence: &Assignment,
        values: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        if node == self.len() {
            visit(values, p);
            return;
        }
        let row = self.cpds[node].row(self.row_of(node, values));
        if let Some(v) = evidence.get(NodeId(node)) {
            let q = row[v];
            if q > 0.0 {
                values[node] = v;
                self.walk_from(node + 1, p * q, evidence, values, visit);
            }
            return;
        }
        for (v, &q) in row.iter().enumerate() {
            if q > 0.0 {
                values[node] = v;
                self.walk_from(node + 1, p * q, evidence, values, visit);
            }
        }
    }

    fn check_values(&self, a: &Assignment) -> Result<(), InferenceError> {
        for (id, v) in a.iter() {
            if id.0 >= self.len() {
                return Err(InferenceError::UnknownNode(format!("#{}", id.0)));
            }
            if v >= self.domains[id.0].len() {
                return Err(InferenceError::ValueOutOfDomain {
                    node: self.names[id.0].clone(),
                    value: v,
                });
            }
        }
        Ok(())
    }
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Node → value index. Partial assignments serve as evidence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment(BTreeMap<NodeId, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, node: NodeId, value: usize) -> &mut Self {
        self.0.insert(node, value);
        self
    }

    pub fn get(&self, node: NodeId) -> Option<usize> {
        self.0.get(&node).copied()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.0.contains_key(&node)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

impl FromIterator<(NodeId, usize)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (NodeId, usize)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Product of every node's CPD entry under a full assignment.
pub fn joint_probability(bn: &BayesNet, full: &Assignment) -> Result<f64, InferenceError> {
    bn.check_values(full)?;
    let mut values = vec![0; bn.len()];
    for (i, slot) in values.iter_mut().enumerate() {
        *slot = full
            .get(NodeId(i))
            .ok_or_else(|| InferenceError::IncompleteAssignment(bn.names[i].clone()))?;
    }
    Ok((0..bn.len())
        .map(|i| bn.cpds[i].row(bn.row_of(i, &values))[values[i]])
        .product())
}

/// Joint distribution over a set of query variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    targets: Vec<NodeId>,
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl MarginalTable {
    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    /// Probability of the joint value `values` (one index per target).
    pub fn get(&self, values: &[usize]) -> f64 {
        self.probs[radix::encode(&self.cards, values)]
    }

    /// `(values, probability)` pairs in odometer order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        radix::Odometer::new(&self.cards).zip(self.probs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// P(targets | evidence) by exhaustive enumeration.
pub fn marginal(bn: &BayesNet, targets: &[NodeId], evidence: &Assignment) -> Result<MarginalTable, InferenceError> {
    bn.check_values(evidence)?;
    for t in targets {
        if t.0 >= bn.len() {
            return Err(InferenceError::UnknownNode(format!("#{}", t.0)));
        }
        if evidence.contains(*t) {
            return Err(InferenceError::TargetInEvidence(bn.names[t.0].clone()));
        }
    }
    let cards: Vec<usize> = targets.iter().map(|t| bn.domains[t.0].len()).collect();
    let mut probs = vec![0.0; radix::product(&cards).expect("small query")];
    let mut mass = 0.0;
    bn.walk(evidence, &mut |values, p| {
        let idx = targets
            .iter()
            .zip(&cards)
            .fold(0, |acc, (t, c)| acc * c + values[t.0]);
        probs[idx] += p;
        mass += p;
    });
    if mass < ZERO_EVIDENCE {
        return Err(InferenceError::ZeroProbabilityEvidence(mass));
    }
    for p in &mut probs {
        *p /= mass;
    }
    Ok(MarginalTable {
        targets: targets.to_vec(),
        cards,
        probs,
    })
}

/// Single-variable marginals for several targets in one enumeration pass.
pub fn marginals_each(bn: &BayesNet, targets: &[NodeId]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = targets.iter().map(|t| vec![0.0; bn.domains[t.0].len()]).collect();
    bn.walk(&Assignment::new(), &mut |values, p| {
        for (slot, t) in out.iter_mut().zip(targets) {
            slot[values[t.0]] += p;
        }
    });
    out
}

/// Bare directed graph used for d-connection queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(n: usize) -> Self {
        Dag {
            parents: vec![Vec::new(); n],
            children: vec![Vec::new(); n],
        }
    }

    pub fn from_maid(maid: &Maid) -> Self {
        let mut g = Dag::new(maid.len());
        for c in maid.ids() {
            for p in maid.parents(c) {
                g.add_edge(p.0, c.0);
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// Appends a fresh node and returns its index.
    pub fn add_node(&mut self) -> usize {
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        self.parents.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.parents[to].push(from);
        self.children[from].push(to);
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Nodes reachable from `source` along an active trail given
    /// `evidence` (the reachable-set formulation of d-separation).
    pub fn active_reachable(&self, source: usize, evidence: &[bool]) -> Vec<bool> {
        let n = self.len();
        // Evidence nodes and their ancestors activate colliders.
        let mut anc = evidence.to_vec();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| evidence[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &p in &self.parents[v] {
                if !anc[p] {
                    anc[p] = true;
                    queue.push_back(p);
                }
            }
        }

        const UP: usize = 0; // arrived from a child
        const DOWN: usize = 1; // arrived from a parent
        let mut visited = vec![[false; 2]; n];
        let mut reachable = vec![false; n];
        let mut stack = vec![(source, UP)];
        while let Some((v, dir)) = stack.pop() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if !evidence[v] {
                reachable[v] = true;
            }
            if dir == UP && !evidence[v] {
                stack.extend(self.parents[v].iter().map(|&p| (p, UP)));
                stack.extend(self.children[v].iter().map(|&c| (c, DOWN)));
            } else if dir == DOWN {
                if !evidence[v] {
                    stack.extend(self.children[v].iter().map(|&c| (c, DOWN)));
                }
                if anc[v] {
                    stack.extend(self.parents[v].iter().map(|&p| (p, UP)));
                }
            }
        }
        reachable[source] = false;
        reachable
    }
}

/// True iff an active trail joins `source` and `target` given `evidence`.
pub fn d_connected(dag: &Dag, source: usize, target: usize, evidence: &[usize]) -> Result<bool, InferenceError> {
    let n = dag.len();
    for &v in [source, target].iter().chain(evidence) {
        if v >= n {
            return Err(InferenceError::UnknownNode(format!("#{v}")));
        }
    }
    let mut mask = vec![false; n];
    for &e in evidence {
        mask[e] = true;
    }
    if mask[source] || mask[target] {
        return Ok(false);
    }
    Ok(dag.active_reachable(source, &mask)[target])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::strategy::DecisionRule;

    fn optimal_net() -> (Maid, BayesNet) {
        let m = models::single_agent_governance();
        let v = m.node_id("V").unwrap();
        // Rows (CR,MS): (1,0) (1,1) (0,0) (0,1); actions over V{1,0}.
        let rule = DecisionRule::pure(v, 2, &[0, 0, 1, 0]);
        let p: StrategyProfile = [rule].into_iter().collect();
        let bn = induce_bayes_net(&m, &p).unwrap();
        (m, bn)
    }

    #[test]
    fn joint_of_optimal_policy() {
        let (_, bn) = optimal_net();
        let a = bn
            .assignment(&[("CR", "1"), ("MS", "1"), ("V", "1"), ("U", "100")])
            .unwrap();
        assert_eq!(joint_probability(&bn, &a).unwrap(), 0.25);
        let a = bn
            .assignment(&[("CR", "1"), ("MS", "1"), ("V", "0"), ("U", "-100")])
            .unwrap();
        assert_eq!(joint_probability(&bn, &a).unwrap(), 0.0);
        let partial = bn.assignment(&[("CR", "1")]).unwrap();
        assert!(matches!(
            joint_probability(&bn, &partial),
            Err(InferenceError::IncompleteAssignment(_))
        ));
    }

    #[test]
    fn marginals_of_optimal_policy() {
        let (_, bn) = optimal_net();
        let u = bn.node_id("U").unwrap();
        let t = marginal(&bn, &[u], &Assignment::new()).unwrap();
        let dom = bn.domain(u);
        let p = |label: &str| t.get(&[dom.index_of(label).unwrap()]);
        assert_eq!(p("100"), 0.5);
        assert_eq!(p("50"), 0.25);
        assert_eq!(p("25"), 0.25);
        assert_eq!(p("-100"), 0.0);

        let cr = bn.node_id("CR").unwrap();
        let t = marginal(&bn, &[cr], &Assignment::new()).unwrap();
        assert_eq!(t.get(&[0]), 0.5);
        assert_eq!(t.get(&[1]), 0.5);

        let v = bn.node_id("V").unwrap();
        let ev = bn.assignment(&[("CR", "0"), ("MS", "0")]).unwrap();
        let t = marginal(&bn, &[v], &ev).unwrap();
        let no = bn.domain(v).index_of("0").unwrap();
        assert_eq!(t.get(&[no]), 1.0);
    }

    #[test]
    fn impossible_evidence_rejected() {
        let (_, bn) = optimal_net();
        let v = bn.node_id("CR").unwrap();
        let ev = bn.assignment(&[("MS", "0"), ("U", "25")]).unwrap();
        assert!(matches!(
            marginal(&bn, &[v], &ev),
            Err(InferenceError::ZeroProbabilityEvidence(_))
        ));
        let ev = bn.assignment(&[("CR", "1")]).unwrap();
        assert!(matches!(
            marginal(&bn, &[v], &ev),
            Err(InferenceError::TargetInEvidence(_))
        ));
    }

    #[test]
    fn partial_induction() {
        let m = models::single_agent_governance();
        assert_eq!(induce(&m, &StrategyProfile::new()).unwrap(), m);

        let two = models::two_agent_sequential(models::Follower::Honest);
        let v1 = two.node_id("V1").unwrap();
        let p: StrategyProfile = [DecisionRule::uniform(&two, v1)].into_iter().collect();
        let induced = induce(&two, &p).unwrap();
        assert_eq!(induced.decisions().count(), 1);
        assert!(induced.node(v1).kind.is_chance());
        assert!(matches!(
            BayesNet::from_maid(&induced),
            Err(InferenceError::UnresolvedDecision(d)) if d == "V2"
        ));

        let bad = DecisionRule::pure(v1, 2, &[0, 0, 0]);
        let p: StrategyProfile = [bad].into_iter().collect();
        assert!(matches!(
            induce(&two, &p),
            Err(InferenceError::RuleArityMismatch(_))
        ));
    }

    #[test]
    fn d_connection_basics() {
        // chain 0 -> 1 -> 2
        let mut chain = Dag::new(3);
        chain.add_edge(0, 1);
        chain.add_edge(1, 2);
        assert!(d_connected(&chain, 0, 2, &[]).unwrap());
        assert!(!d_connected(&chain, 0, 2, &[1]).unwrap());

        // collider 0 -> 2 <- 1, with 2 -> 3
        let mut coll = Dag::new(4);
        coll.add_edge(0, 2);
        coll.add_edge(1, 2);
        coll.add_edge(2, 3);
        assert!(!d_connected(&coll, 0, 1, &[]).unwrap());
        assert!(d_connected(&coll, 0, 1, &[2]).unwrap());
        assert!(d_connected(&coll, 0, 1, &[3]).unwrap());

        // fork 0 <- 1 -> 2
        let mut fork = Dag::new(3);
        fork.add_edge(1, 0);
        fork.add_edge(1, 2);
        assert!(d_connected(&fork, 0, 2, &[]).unwrap());
        assert!(!d_connected(&fork, 0, 2, &[1]).unwrap());

        assert!(matches!(
            d_connected(&fork, 0, 7, &[]),
            Err(InferenceError::UnknownNode(_))
        ));
    }
}
