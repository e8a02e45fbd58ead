//! The MAID data model: agents, typed nodes over finite domains, the parent
//! structure, chance CPDs and deterministic utility tables.
//!
//! A [`Maid`] is only obtainable through [`build_maid`], which checks every
//! structural and numeric invariant and reports all violations at once.
//! Nodes are stored in a fixed topological order (ties broken by id), and a
//! [`NodeId`] is an index into that order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::number::format_number;
use crate::radix::{self, Odometer};

/// Normalization tolerance for CPD and decision-rule rows.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Self {
        AgentId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainValue {
    pub label: String,
    /// Numeric reading of the label, when it parses as a number.
    pub alias: Option<f64>,
}

/// Ordered finite set of labels. The position of a value is its index in
/// every table and the tie-breaking order of every argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    values: Vec<DomainValue>,
}

impl Domain {
    /// Builds a domain; labels must be non-empty and distinct.
    pub fn new<I, S>(labels: I) -> Result<Domain, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut values = Vec::new();
        let mut seen = BTreeSet::new();
        for label in labels {
            let label = label.into();
            if !seen.insert(label.clone()) {
                return Err(format!("duplicate domain value `{label}`"));
            }
            let alias = label.trim().parse::<f64>().ok().filter(|v| v.is_finite());
            values.push(DomainValue { label, alias });
        }
        if values.is_empty() {
            return Err("empty domain".into());
        }
        Ok(Domain { values })
    }

    /// Domain of a utility node: the distinct table values, ascending.
    fn of_values(table: &[f64]) -> Domain {
        let mut distinct: Vec<f64> = table.to_vec();
        distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite utilities"));
        distinct.dedup();
        let values = distinct
            .into_iter()
            .map(|v| DomainValue {
                label: format_number(v),
                alias: Some(v),
            })
            .collect();
        Domain { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[DomainValue] {
        &self.values
    }

    pub fn label(&self, index: usize) -> &str {
        &self.values[index].label
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(|v| v.label.as_str())
    }

    /// Finds a value by exact label, falling back to numeric alias.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        if let Some(i) = self.values.iter().position(|v| v.label == label) {
            return Some(i);
        }
        let x: f64 = label.trim().parse().ok()?;
        self.values.iter().position(|v| v.alias == Some(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Chance,
    Decision { owner: AgentId },
    Utility { owner: AgentId },
}

impl NodeKind {
    pub fn owner(&self) -> Option<&AgentId> {
        match self {
            NodeKind::Chance => None,
            NodeKind::Decision { owner } | NodeKind::Utility { owner } => Some(owner),
        }
    }

    pub fn is_decision(&self) -> bool {
        matches!(self, NodeKind::Decision { .. })
    }

    pub fn is_utility(&self) -> bool {
        matches!(self, NodeKind::Utility { .. })
    }

    pub fn is_chance(&self) -> bool {
        matches!(self, NodeKind::Chance)
    }
}

/// Tabular P(X | pa): one probability row per parent instantiation in
/// odometer order over the node's parent list.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpd {
    card: usize,
    probs: Vec<f64>,
}

impl Cpd {
    pub(crate) fn from_flat(card: usize, probs: Vec<f64>) -> Cpd {
        debug_assert!(card > 0 && probs.len().is_multiple_of(card));
        Cpd { card, probs }
    }

    /// Degenerate CPD putting all mass on `values[row]`.
    pub(crate) fn deterministic(card: usize, values: &[usize]) -> Cpd {
        let mut probs = vec![0.0; card * values.len()];
        for (row, &v) in values.iter().enumerate() {
            probs[row * card + v] = 1.0;
        }
        Cpd { card, probs }
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

    pub fn flat(&self) -> &[f64] {
        &self.probs
    }
}

/// Deterministic utility: one value per parent instantiation.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    values: Vec<f64>,
}

impl UtilityTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, row: usize) -> f64 {
        self.values[row]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeTable {
    Chance(Cpd),
    Decision,
    Utility(UtilityTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub domain: Domain,
    pub parents: Vec<NodeId>,
    pub table: NodeTable,
}

impl Node {
    pub fn cpd(&self) -> Option<&Cpd> {
        match &self.table {
            NodeTable::Chance(cpd) => Some(cpd),
            _ => None,
        }
    }

    pub fn utility(&self) -> Option<&UtilityTable> {
        match &self.table {
            NodeTable::Utility(t) => Some(t),
            _ => None,
        }
    }
}

/// A validated multi-agent influence diagram. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Maid {
    agents: Vec<AgentId>,
    nodes: Vec<Node>,
    children: Vec<Vec<NodeId>>,
    index: HashMap<String, NodeId>,
    illustrative: bool,
}

impl Maid {
    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn agent_index(&self, agent: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.as_str() == agent)
    }

    /// Nodes in topological order.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id.0].id
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].parents
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id.0]
    }

    pub fn card(&self, id: NodeId) -> usize {
        self.nodes[id.0].domain.len()
    }

    /// Parent cardinalities in declared parent order.
    pub fn parent_cards(&self, id: NodeId) -> Vec<usize> {
        self.parents(id).iter().map(|&p| self.card(p)).collect()
    }

    /// Number of parent instantiations (CPD / rule rows) of `id`.
    pub fn num_rows(&self, id: NodeId) -> usize {
        radix::product(&self.parent_cards(id)).unwrap_or(usize::MAX)
    }

    pub fn decisions(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|&id| self.node(id).kind.is_decision())
    }

    pub fn utilities(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|&id| self.node(id).kind.is_utility())
    }

    pub fn owner(&self, id: NodeId) -> Option<&AgentId> {
        self.node(id).kind.owner()
    }

    pub fn decisions_of<'a>(&'a self, agent: &'a AgentId) -> impl Iterator<Item = NodeId> + 'a {
        self.decisions().filter(move |&d| self.owner(d) == Some(agent))
    }

    pub fn utilities_of<'a>(&'a self, agent: &'a AgentId) -> impl Iterator<Item = NodeId> + 'a {
        self.utilities().filter(move |&u| self.owner(u) == Some(agent))
    }

    /// True for bundled placeholder models whose numbers carry no meaning.
    pub fn is_illustrative(&self) -> bool {
        self.illustrative
    }

    /// Every parent instantiation of `node` as value indices, in row order.
    pub fn family_enumeration(&self, node: NodeId) -> Vec<Vec<usize>> {
        Odometer::new(&self.parent_cards(node)).collect()
    }

    /// Same as [`Maid::family_enumeration`], addressed by node name.
    pub fn family_enumeration_of(&self, node: &str) -> Result<Vec<Vec<usize>>, UnknownNode> {
        let id = self.node_id(node).ok_or_else(|| UnknownNode(node.to_string()))?;
        Ok(self.family_enumeration(id))
    }

    /// Labels of the parent values in row `row` of `node`.
    pub fn row_labels(&self, node: NodeId, row: usize) -> Vec<&str> {
        let cards = self.parent_cards(node);
        let digits = radix::decode(&cards, row);
        self.parents(node)
            .iter()
            .zip(digits)
            .map(|(&p, v)| self.node(p).domain.label(v))
            .collect()
    }

    /// Declarative description of this model, in node order.
    pub fn to_spec(&self) -> MaidSpec {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let (kind, owner) = match &n.kind {
                    NodeKind::Chance => (KindSpec::Chance, None),
                    NodeKind::Decision { owner } => (KindSpec::Decision, Some(owner.to_string())),
                    NodeKind::Utility { owner } => (KindSpec::Utility, Some(owner.to_string())),
                };
                let domain = match n.kind {
                    NodeKind::Utility { .. } => Vec::new(),
                    _ => n.domain.labels().map(String::from).collect(),
                };
                let table = match &n.table {
                    NodeTable::Chance(cpd) => cpd.flat().to_vec(),
                    NodeTable::Decision => Vec::new(),
                    NodeTable::Utility(t) => t.values().to_vec(),
                };
                NodeSpec {
                    id: n.id.clone(),
                    kind,
                    owner,
                    domain,
                    parents: n.parents.iter().map(|&p| self.name(p).to_string()).collect(),
                    table,
                }
            })
            .collect();
        MaidSpec {
            agents: self.agents.iter().map(|a| a.to_string()).collect(),
            nodes,
            illustrative: self.illustrative,
        }
    }

    /// Turns a decision node into a chance node with the given CPD rows.
    /// Node order and ids are preserved.
    pub(crate) fn replace_with_chance(&mut self, id: NodeId, cpd: Cpd) {
        let node = &mut self.nodes[id.0];
        node.kind = NodeKind::Chance;
        node.table = NodeTable::Chance(cpd);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown node `{0}`")]
pub struct UnknownNode(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindSpec {
    Chance,
    Decision,
    Utility,
}

/// One node of a declarative model description.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: String,
    pub kind: KindSpec,
    pub owner: Option<String>,
    pub domain: Vec<String>,
    pub parents: Vec<String>,
    /// Chance: probabilities, row-major in family-enumeration order.
    /// Utility: one value per row. Decision: empty.
    pub table: Vec<f64>,
}

impl NodeSpec {
    pub fn chance(id: &str, domain: &[&str], parents: &[&str], table: Vec<f64>) -> NodeSpec {
        NodeSpec {
            id: id.into(),
            kind: KindSpec::Chance,
            owner: None,
            domain: domain.iter().map(|s| s.to_string()).collect(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            table,
        }
    }

    pub fn decision(id: &str, owner: &str, domain: &[&str], parents: &[&str]) -> NodeSpec {
        NodeSpec {
            id: id.into(),
            kind: KindSpec::Decision,
            owner: Some(owner.into()),
            domain: domain.iter().map(|s| s.to_string()).collect(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            table: Vec::new(),
        }
    }

    pub fn utility(id: &str, owner: &str, parents: &[&str], table: Vec<f64>) -> NodeSpec {
        NodeSpec {
            id: id.into(),
            kind: KindSpec::Utility,
            owner: Some(owner.into()),
            domain: Vec::new(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            table,
        }
    }
}

/// Declarative model description accepted by [`build_maid`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MaidSpec {
    pub agents: Vec<String>,
    pub nodes: Vec<NodeSpec>,
    pub illustrative: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("cycle detected: {}", .cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },
    #[error("utility node `{utility}` has child `{child}`")]
    UtilityHasChild { utility: String, child: String },
    #[error("node `{node}` row {row} sums to {sum} (expected 1)")]
    RowSumViolation { node: String, row: usize, sum: f64 },
    #[error("node `{node}` row {row} has a negative probability")]
    NegativeProbability { node: String, row: usize },
    #[error("node `{node}` table has {found} entries, expected {expected} ({rows} rows)")]
    ArityMismatch {
        node: String,
        rows: usize,
        expected: usize,
        found: usize,
    },
    #[error("node `{node}` lists unknown parent `{parent}`")]
    UnknownParent { node: String, parent: String },
    #[error("node `{node}` lists parent `{parent}` more than once")]
    DuplicateParent { node: String, parent: String },
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("empty node id")]
    EmptyNodeId,
    #[error("duplicate agent `{0}`")]
    DuplicateAgent(String),
    #[error("empty agent label")]
    EmptyAgent,
    #[error("node `{node}` references unknown agent `{agent}`")]
    UnknownAgent { node: String, agent: String },
    #[error("{kind} node `{node}` needs an owner")]
    MissingOwner { node: String, kind: &'static str },
    #[error("chance node `{0}` must not have an owner")]
    UnexpectedOwner(String),
    #[error("node `{node}`: {reason}")]
    BadDomain { node: String, reason: String },
    #[error("utility node `{0}` must not declare a domain")]
    UtilityDomain(String),
    #[error("decision node `{0}` must not carry a table")]
    DecisionHasTable(String),
    #[error("node `{node}` entry {index} is not finite")]
    NonFinite { node: String, index: usize },
}

/// All violations found while building a model.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        write!(f, "{n} validation error{}", if n == 1 { "" } else { "s" })?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

impl ValidationErrors {
    pub fn iter(&self) -> impl Iterator<Item = &ValidationError> {
        self.0.iter()
    }
}

/// Validates `spec` and returns the model in canonical topological order.
pub fn build_maid(spec: &MaidSpec) -> Result<Maid, ValidationErrors> {
    let mut errors = Vec::new();

    let mut agents = Vec::new();
    let mut agent_set = BTreeSet::new();
    for a in &spec.agents {
        if a.is_empty() {
            errors.push(ValidationError::EmptyAgent);
        } else if !agent_set.insert(a.as_str()) {
            errors.push(ValidationError::DuplicateAgent(a.clone()));
        } else {
            agents.push(AgentId::new(a.clone()));
        }
    }

    // Position in `spec.nodes` of the first declaration of each id.
    let mut decl: HashMap<&str, usize> = HashMap::new();
    for (i, n) in spec.nodes.iter().enumerate() {
        if n.id.is_empty() {
            errors.push(ValidationError::EmptyNodeId);
        } else if decl.contains_key(n.id.as_str()) {
            errors.push(ValidationError::DuplicateNode(n.id.clone()));
        } else {
            decl.insert(n.id.as_str(), i);
        }
    }
    let live: Vec<usize> = {
        let mut v: Vec<usize> = decl.values().copied().collect();
        v.sort_unstable();
        v
    };

    // Per-node kind, owner and domain.
    let mut domains: HashMap<usize, Domain> = HashMap::new();
    for &i in &live {
        let n = &spec.nodes[i];
        match (n.kind, &n.owner) {
            (KindSpec::Chance, Some(_)) => errors.push(ValidationError::UnexpectedOwner(n.id.clone())),
            (KindSpec::Chance, None) => {}
            (k, None) => errors.push(ValidationError::MissingOwner {
                node: n.id.clone(),
                kind: if k == KindSpec::Decision { "decision" } else { "utility" },
            }),
            (_, Some(owner)) => {
                if !agent_set.contains(owner.as_str()) {
                    errors.push(ValidationError::UnknownAgent {
                        node: n.id.clone(),
                        agent: owner.clone(),
                    });
                }
            }
        }
        match n.kind {
            KindSpec::Utility => {
                if !n.domain.is_empty() {
                    errors.push(ValidationError::UtilityDomain(n.id.clone()));
                }
            }
            _ => match Domain::new(n.domain.iter().cloned()) {
                Ok(d) => {
                    domains.insert(i, d);
                }
                Err(reason) => errors.push(ValidationError::BadDomain {
                    node: n.id.clone(),
                    reason,
                }),
            },
        }
    }

    // Edges.
    let mut parents: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut parents_ok: HashMap<usize, bool> = HashMap::new();
    for &i in &live {
        let n = &spec.nodes[i];
        let mut ps = Vec::new();
        let mut ok = true;
        let mut seen = BTreeSet::new();
        for p in &n.parents {
            if !seen.insert(p.as_str()) {
                errors.push(ValidationError::DuplicateParent {
                    node: n.id.clone(),
                    parent: p.clone(),
                });
                ok = false;
                continue;
            }
            match decl.get(p.as_str()) {
                Some(&j) => {
                    if spec.nodes[j].kind == KindSpec::Utility {
                        errors.push(ValidationError::UtilityHasChild {
                            utility: p.clone(),
                            child: n.id.clone(),
                        });
                    }
                    ps.push(j);
                }
                None => {
                    errors.push(ValidationError::UnknownParent {
                        node: n.id.clone(),
                        parent: p.clone(),
                    });
                    ok = false;
                }
            }
        }
        parents.insert(i, ps);
        parents_ok.insert(i, ok);
    }

    let order = match topological_order(spec, &live, &parents) {
        Ok(order) => Some(order),
        Err(cycle) => {
            errors.push(ValidationError::CycleDetected { cycle });
            None
        }
    };

    // Tables.
    for &i in &live {
        let n = &spec.nodes[i];
        if n.kind == KindSpec::Decision {
            if !n.table.is_empty() {
                errors.push(ValidationError::DecisionHasTable(n.id.clone()));
            }
            continue;
        }
        for (k, v) in n.table.iter().enumerate() {
            if !v.is_finite() {
                errors.push(ValidationError::NonFinite {
                    node: n.id.clone(),
                    index: k,
                });
            }
        }
        if !parents_ok[&i] {
            continue;
        }
        let cards: Option<Vec<usize>> = parents[&i]
            .iter()
            .map(|j| match spec.nodes[*j].kind {
                KindSpec::Utility => None,
                _ => domains.get(j).map(Domain::len),
            })
            .collect();
        let Some(cards) = cards else { continue };
        let Some(rows) = radix::product(&cards) else { continue };
        let card = match n.kind {
            KindSpec::Chance => match domains.get(&i) {
                Some(d) => d.len(),
                None => continue,
            },
            _ => 1,
        };
        let expected = rows.saturating_mul(card);
        if n.table.len() != expected {
            errors.push(ValidationError::ArityMismatch {
                node: n.id.clone(),
                rows,
                expected,
                found: n.table.len(),
            });
            continue;
        }
        if n.kind == KindSpec::Chance {
            for (row, probs) in n.table.chunks(card).enumerate() {
                if probs.iter().any(|p| *p < 0.0) {
                    errors.push(ValidationError::NegativeProbability {
                        node: n.id.clone(),
                        row,
                    });
                }
                let sum: f64 = probs.iter().sum();
                if sum.is_finite() && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    errors.push(ValidationError::RowSumViolation {
                        node: n.id.clone(),
                        row,
                        sum,
                    });
                }
            }
        }
    }

    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }
    let order = order.expect("acyclic when no errors were found");

    let mut position = vec![usize::MAX; spec.nodes.len()];
    for (pos, &i) in order.iter().enumerate() {
        position[i] = pos;
    }
    let mut nodes = Vec::with_capacity(order.len());
    for &i in &order {
        let n = &spec.nodes[i];
        let parent_ids: Vec<NodeId> = parents[&i].iter().map(|&j| NodeId(position[j])).collect();
        let (kind, domain, table) = match n.kind {
            KindSpec::Chance => {
                let d = domains.remove(&i).expect("validated domain");
                let cpd = Cpd::from_flat(d.len(), n.table.clone());
                (NodeKind::Chance, d, NodeTable::Chance(cpd))
            }
            KindSpec::Decision => (
                NodeKind::Decision {
                    owner: AgentId::new(n.owner.clone().expect("validated owner")),
                },
                domains.remove(&i).expect("validated domain"),
                NodeTable::Decision,
            ),
            KindSpec::Utility => (
                NodeKind::Utility {
                    owner: AgentId::new(n.owner.clone().expect("validated owner")),
                },
                Domain::of_values(&n.table),
                NodeTable::Utility(UtilityTable {
                    values: n.table.clone(),
                }),
            ),
        };
        nodes.push(Node {
            id: n.id.clone(),
            kind,
            domain,
            parents: parent_ids,
            table,
        });
    }
    let mut children = vec![Vec::new(); nodes.len()];
    for (c, n) in nodes.iter().enumerate() {
        for p in &n.parents {
            children[p.0].push(NodeId(c));
        }
    }
    let index = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.clone(), NodeId(i)))
        .collect();
    Ok(Maid {
        agents,
        nodes,
        children,
        index,
        illustrative: spec.illustrative,
    })
}

/// Kahn's algorithm with the ready set ordered by node id. On failure
/// returns one cycle, as a closed walk of ids.
fn topological_order(
    spec: &MaidSpec,
    live: &[usize],
    parents: &HashMap<usize, Vec<usize>>,
) -> Result<Vec<usize>, Vec<String>> {
    let mut indegree: HashMap<usize, usize> = HashMap::new();
    let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
    for &i in live {
        indegree.insert(i, parents[&i].len());
        for &p in &parents[&i] {
            children.entry(p).or_default().push(i);
        }
    }
    let mut ready: BTreeSet<(&str, usize)> = live
        .iter()
        .filter(|i| indegree[i] == 0)
        .map(|&i| (spec.nodes[i].id.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(live.len());
    while let Some(&first) = ready.iter().next() {
        ready.remove(&first);
        let (_, i) = first;
        order.push(i);
        for &c in children.get(&i).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(&c).expect("live child");
            *d -= 1;
            if *d == 0 {
                ready.insert((spec.nodes[c].id.as_str(), c));
            }
        }
    }
    if order.len() == live.len() {
        return Ok(order);
    }

    // Every remaining node has a remaining parent; walk parents until a
    // node repeats.
    let remaining: BTreeSet<usize> = live.iter().copied().filter(|i| indegree[i] > 0).collect();
    let start = *remaining.iter().next().expect("cycle nodes remain");
    let mut walk = vec![start];
    let mut seen_at: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = *parents[&cur]
            .iter()
            .find(|p| remaining.contains(p))
            .expect("remaining node has remaining parent");
        if let Some(&at) = seen_at.get(&next) {
            let mut cycle: Vec<String> = walk[at..]
                .iter()
                .rev()
                .map(|&i| spec.nodes[i].id.clone())
                .collect();
            cycle.push(cycle[0].clone());
            return Err(cycle);
        }
        seen_at.insert(next, walk.len());
        walk.push(next);
        cur = next;
    }
}
