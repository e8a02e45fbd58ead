//! Strategic relevance: s-reachability, the relevance graph over decisions,
//! its SCC condensation in dependency order, and perfect recall.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::inference::Dag;
use crate::maid::{AgentId, Maid, NodeId};
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelevanceError {
    #[error("`{0}` is not a decision node")]
    NotADecisionNode(String),
}

fn require_decision(maid: &Maid, d: NodeId) -> Result<(), RelevanceError> {
    if maid.node(d).kind.is_decision() {
        Ok(())
    } else {
        Err(RelevanceError::NotADecisionNode(maid.name(d).to_string()))
    }
}

/// Whether the rule at `d_prime` can matter to the owner of `d`: a fresh
/// parent of `d_prime` is d-connected to one of that owner's utilities
/// given `Pa(d) ∪ {d}`.
pub fn s_reachable(maid: &Maid, d: NodeId, d_prime: NodeId) -> Result<bool, RelevanceError> {
    require_decision(maid, d)?;
    require_decision(maid, d_prime)?;
    let owner = maid.owner(d).expect("decision has an owner");
    let mut dag = Dag::from_maid(maid);
    let dummy = dag.add_node();
    dag.add_edge(dummy, d_prime.0);
    let mut evidence = vec![false; dag.len()];
    evidence[d.0] = true;
    for p in maid.parents(d) {
        evidence[p.0] = true;
    }
    let reach = dag.active_reachable(dummy, &evidence);
    Ok(maid.utilities_of(owner).any(|u| reach[u.0]))
}

/// Directed graph over decision nodes; `D -> D'` iff `D'` is s-reachable
/// from `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceGraph {
    nodes: Vec<NodeId>,
    labels: Vec<String>,
    /// Edges as local indices into `nodes`, sorted.
    edges: Vec<(usize, usize)>,
}

impl RelevanceGraph {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn label(&self, local: usize) -> &str {
        &self.labels[local]
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.nodes[a], self.nodes[b]))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges().any(|e| e == (from, to))
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
        }
        adj
    }
}

pub fn relevance_graph(maid: &Maid) -> RelevanceGraph {
    relevance_graph_with(maid, par::DEFAULT_PARALLEL)
}

/// [`relevance_graph`] with explicit control over parallel pair evaluation.
pub fn relevance_graph_with(maid: &Maid, parallel: bool) -> RelevanceGraph {
    let nodes: Vec<NodeId> = maid.decisions().collect();
    let n = nodes.len();
    let flags = par::map_range(n * n, parallel, |k| {
        let (i, j) = (k / n, k % n);
        s_reachable(maid, nodes[i], nodes[j]).expect("decision nodes")
    });
    let edges = (0..n * n)
        .filter(|&k| flags[k])
        .map(|k| (k / n, k % n))
        .collect();
    RelevanceGraph {
        labels: nodes.iter().map(|&d| maid.name(d).to_string()).collect(),
        nodes,
        edges,
    }
}

/// Maximal SCCs of a relevance graph, ordered so that no member of an
/// earlier component is s-reachable from a member of a later one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccOrdering {
    pub components: Vec<Vec<NodeId>>,
    /// Condensation edges `(i, j)`, always with `i < j`.
    pub component_edges: Vec<(usize, usize)>,
}

pub fn scc_ordering(rg: &RelevanceGraph) -> SccOrdering {
    let adj = rg.adjacency();
    let sccs = tarjan(&adj);

    let mut comp_of = vec![0; adj.len()];
    for (c, members) in sccs.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    let mut cedges = BTreeSet::new();
    for &(a, b) in &rg.edges {
        if comp_of[a] != comp_of[b] {
            cedges.insert((comp_of[a], comp_of[b]));
        }
    }

    // Kahn over the condensation; among ready components pick the one
    // whose smallest member label is smallest.
    let key = |c: usize| -> String {
        sccs[c]
            .iter()
            .map(|&v| rg.labels[v].as_str())
            .min()
            .unwrap_or_default()
            .to_string()
    };
    let mut indegree = vec![0; sccs.len()];
    let mut out = vec![Vec::new(); sccs.len()];
    for &(a, b) in &cedges {
        indegree[b] += 1;
        out[a].push(b);
    }
    let mut heap: BinaryHeap<Reverse<(String, usize)>> = (0..sccs.len())
        .filter(|&c| indegree[c] == 0)
        .map(|c| Reverse((key(c), c)))
        .collect();
    let mut order = Vec::with_capacity(sccs.len());
    while let Some(Reverse((_, c))) = heap.pop() {
        order.push(c);
        for &d in &out[c] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                heap.push(Reverse((key(d), d)));
            }
        }
    }
    let mut rank = vec![0; sccs.len()];
    for (pos, &c) in order.iter().enumerate() {
        rank[c] = pos;
    }
    let components = order
        .iter()
        .map(|&c| {
            let mut members = sccs[c].clone();
            members.sort_by(|&a, &b| rg.labels[a].cmp(&rg.labels[b]));
            members.into_iter().map(|v| rg.nodes[v]).collect()
        })
        .collect();
    let component_edges = cedges
        .iter()
        .map(|&(a, b)| (rank[a], rank[b]))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    SccOrdering {
        components,
        component_edges,
    }
}

/// Tarjan's algorithm, iterative. Components are emitted in reverse
/// topological order of the condensation.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (node, next child position)
        let mut call = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, next)) = call.last() {
            if let Some(&w) = adj[v].get(next) {
                call.last_mut().expect("frame").1 += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentRecall {
    pub agent: AgentId,
    pub holds: bool,
    /// The agent's decisions in the only order that could witness recall.
    pub order: Vec<NodeId>,
    /// First pair `(earlier, later)` breaking the condition.
    pub violation: Option<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectRecallReport {
    pub agents: Vec<AgentRecall>,
}

impl PerfectRecallReport {
    pub fn all_hold(&self) -> bool {
        self.agents.iter().all(|a| a.holds)
    }

    pub fn get(&self, agent: &str) -> Option<&AgentRecall> {
        self.agents.iter().find(|a| a.agent.as_str() == agent)
    }
}

/// Per agent: is there an order `D1..Dn` of its decisions with
/// `Di ∈ Pa(Dj)` and `Pa(Di) ⊊ Pa(Dj)` whenever `i < j`?
///
/// Such an order, if any, is a chain of parent links and therefore agrees
/// with the model's topological order, so only that order is checked.
pub fn check_perfect_recall(maid: &Maid) -> PerfectRecallReport {
    let agents = maid
        .agents()
        .iter()
        .map(|agent| {
            let order: Vec<NodeId> = maid.decisions_of(agent).collect();
            let mut violation = None;
            'outer: for (i, &di) in order.iter().enumerate() {
                let pa_i: BTreeSet<NodeId> = maid.parents(di).iter().copied().collect();
                for &dj in &order[i + 1..] {
                    let pa_j: BTreeSet<NodeId> = maid.parents(dj).iter().copied().collect();
                    let ok = pa_j.contains(&di) && pa_i.is_subset(&pa_j) && pa_i != pa_j;
                    if !ok {
                        violation = Some((di, dj));
                        break 'outer;
                    }
                }
            }
            AgentRecall {
                agent: agent.clone(),
                holds: violation.is_none(),
                order,
                violation,
            }
        })
        .collect();
    PerfectRecallReport { agents }
}
