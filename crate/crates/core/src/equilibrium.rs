//! Expected utility, best responses, the component-wise equilibrium driver
//! and the exhaustive pure-strategy oracle.
//!
//! All deviation comparisons use an absolute tolerance of
//! [`DEVIATION_TOLERANCE`]; every argmax breaks ties toward the lowest
//! domain index, so results are reproducible bit for bit.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::eval::{Evaluator, Slot};
use crate::inference::{induce_bayes_net, marginal, marginals_each, Assignment, InferenceError};
use crate::maid::{AgentId, Maid, NodeId};
use crate::par;
use crate::relevance::{check_perfect_recall, relevance_graph_with, scc_ordering, SccOrdering};
use crate::strategy::{DecisionRule, PureRuleSpace, RuleError, StrategyProfile};

pub const DEVIATION_TOLERANCE: f64 = 1e-9;
/// Parent instantiations with less mass than this get the lowest action.
pub const ZERO_CONTEXT: f64 = 1e-12;
pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000;

/// Limits and execution mode for the enumeration routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Largest number of joint pure profiles any single search may visit.
    pub cap: u64,
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            cap: DEFAULT_SEARCH_CAP,
            parallel: par::DEFAULT_PARALLEL,
        }
    }
}

impl SearchConfig {
    pub fn sequential() -> Self {
        SearchConfig {
            parallel: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("profile is partial; no rule for {}", .missing.join(", "))]
    PartialProfile { missing: Vec<String> },
    #[error("best response for `{decision}` needs rules for {}", .missing.join(", "))]
    WrongCoverage { decision: String, missing: Vec<String> },
    #[error("`{0}` is not a decision node")]
    NotADecisionNode(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("no pure equilibrium in component {{{}}}; best-response cycle: {}", .component.join(", "), .cycle.join(" -> "))]
    NoPureEquilibrium { component: Vec<String>, cycle: Vec<String> },
    #[error("search space of {size} pure profiles exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u64 },
    #[error("stake fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

fn agent_of(maid: &Maid, agent: &str) -> Result<usize, EquilibriumError> {
    maid.agent_index(agent)
        .ok_or_else(|| EquilibriumError::UnknownAgent(agent.to_string()))
}

fn require_full(maid: &Maid, profile: &StrategyProfile) -> Result<(), EquilibriumError> {
    profile.check(maid)?;
    let missing = profile.missing(maid);
    if missing.is_empty() {
        Ok(())
    } else {
        Err(EquilibriumError::PartialProfile {
            missing: missing.iter().map(|&d| maid.name(d).to_string()).collect(),
        })
    }
}

/// Σ over the agent's utility nodes U of Σ_u P(U = u)·u, from per-node
/// marginals of the induced Bayes network.
pub fn expected_utility(maid: &Maid, profile: &StrategyProfile, agent: &str) -> Result<f64, EquilibriumError> {
    let a = agent_of(maid, agent)?;
    require_full(maid, profile)?;
    let bn = induce_bayes_net(maid, profile)?;
    let owner = &maid.agents()[a];
    let us: Vec<NodeId> = maid.utilities_of(owner).collect();
    let margs = marginals_each(&bn, &us);
    Ok(us
        .iter()
        .zip(margs)
        .map(|(&u, m)| {
            let dom = bn.domain(u);
            m.iter()
                .enumerate()
                .map(|(k, p)| p * dom.values()[k].alias.expect("numeric utility value"))
                .sum::<f64>()
        })
        .sum())
}

/// Σ over joint utility values (u1..um) of P(u1..um)·Σ ui, from the joint
/// marginal of all the agent's utility nodes.
pub fn expected_utility_joint(maid: &Maid, profile: &StrategyProfile, agent: &str) -> Result<f64, EquilibriumError> {
    let a = agent_of(maid, agent)?;
    require_full(maid, profile)?;
    let bn = induce_bayes_net(maid, profile)?;
    let owner = &maid.agents()[a];
    let us: Vec<NodeId> = maid.utilities_of(owner).collect();
    if us.is_empty() {
        return Ok(0.0);
    }
    let table = marginal(&bn, &us, &Assignment::new())?;
    Ok(table
        .iter()
        .map(|(values, p)| {
            let total: f64 = us
                .iter()
                .zip(&values)
                .map(|(&u, &v)| bn.domain(u).values()[v].alias.expect("numeric utility value"))
                .sum();
            p * total
        })
        .sum())
}

/// Expected utility of every agent, in model agent order.
pub fn expected_utilities(maid: &Maid, profile: &StrategyProfile) -> Result<Vec<f64>, EquilibriumError> {
    require_full(maid, profile)?;
    let ev = Evaluator::new(maid);
    Ok(ev.expected_utilities(&ev.slots(profile)))
}

/// Scales an equal-weight expected utility by the agent's share of voting
/// stake.
pub fn stake_weighted_eu(eu: f64, stake_fraction: f64) -> Result<f64, EquilibriumError> {
    if !(0.0..=1.0).contains(&stake_fraction) {
        return Err(EquilibriumError::FractionOutOfRange(stake_fraction));
    }
    Ok(stake_fraction * eu)
}

fn require_decision(maid: &Maid, d: NodeId) -> Result<(), EquilibriumError> {
    if d.0 < maid.len() && maid.node(d).kind.is_decision() {
        Ok(())
    } else if d.0 < maid.len() {
        Err(EquilibriumError::NotADecisionNode(maid.name(d).to_string()))
    } else {
        Err(EquilibriumError::NotADecisionNode(format!("#{}", d.0)))
    }
}

/// Deterministic optimal rule for `d` against the rules `profile` assigns
/// to every other decision. A rule `profile` holds for `d` itself is
/// ignored.
pub fn best_response_rule(maid: &Maid, profile: &StrategyProfile, d: NodeId) -> Result<DecisionRule, EquilibriumError> {
    require_decision(maid, d)?;
    profile.check(maid)?;
    let missing: Vec<String> = profile
        .missing(maid)
        .into_iter()
        .filter(|&x| x != d)
        .map(|x| maid.name(x).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EquilibriumError::WrongCoverage {
            decision: maid.name(d).to_string(),
            missing,
        });
    }
    let ev = Evaluator::new(maid);
    let mut slots = ev.slots(profile);
    slots[d.0] = Slot::Free;
    Ok(best_response_with(maid, &ev, &slots, d))
}

fn best_response_with(maid: &Maid, ev: &Evaluator<'_>, slots: &[Slot<'_>], d: NodeId) -> DecisionRule {
    let owner = maid.owner(d).expect("decision owner");
    let agent = maid.agent_index(owner.as_str()).expect("known agent");
    let card = maid.card(d);
    let rows = maid.num_rows(d);
    // value[row][action]: Σ P(leaf without d's factor)·U_owner
    let mut value = vec![0.0; rows * card];
    let mut mass = vec![0.0; rows];
    ev.walk(slots, &mut |values, p| {
        let row = ev.row_of(d.0, values);
        let a = values[d.0];
        value[row * card + a] += p * ev.utility_of(agent, values);
        if a == 0 {
            mass[row] += p;
        }
    });
    let actions: Vec<usize> = (0..rows)
        .map(|row| {
            if mass[row] <= ZERO_CONTEXT {
                return 0;
            }
            let cond: Vec<f64> = value[row * card..(row + 1) * card]
                .iter()
                .map(|v| v / mass[row])
                .collect();
            let best = cond.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            cond.iter()
                .position(|&c| c >= best - DEVIATION_TOLERANCE)
                .expect("non-empty domain")
        })
        .collect();
    DecisionRule::pure(d, card, &actions)
}

/// Product space of pure rules over a set of decisions, ordered by decision
/// id with the first decision as the most significant digit.
struct JointSpace {
    spaces: Vec<PureRuleSpace>,
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl JointSpace {
    fn new(maid: &Maid, decisions: &[NodeId], cap: u64) -> Result<Self, EquilibriumError> {
        let mut ds = decisions.to_vec();
        ds.sort_by(|a, b| maid.name(*a).cmp(maid.name(*b)));
        let spaces: Vec<PureRuleSpace> = ds.iter().map(|&d| PureRuleSpace::new(maid, d)).collect();
        let size = spaces
            .iter()
            .try_fold(1u128, |acc, s| acc.checked_mul(s.count()))
            .unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(EquilibriumError::SearchSpaceTooLarge { size, cap });
        }
        let radices: Vec<usize> = spaces.iter().map(|s| s.count() as usize).collect();
        let mut strides = vec![1; radices.len()];
        for i in (0..radices.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radices[i + 1];
        }
        Ok(JointSpace {
            spaces,
            radices,
            strides,
            size: size as usize,
        })
    }

    fn digit(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.radices[pos]
    }

    /// Per-decision action vectors of joint profile `index`.
    fn actions(&self, index: usize) -> Vec<Vec<usize>> {
        self.spaces
            .iter()
            .enumerate()
            .map(|(pos, s)| {
                let mut a = Vec::new();
                s.actions(self.digit(index, pos), &mut a);
                a
            })
            .collect()
    }

    fn profile(&self, index: usize) -> StrategyProfile {
        self.spaces
            .iter()
            .enumerate()
            .map(|(pos, s)| s.rule(self.digit(index, pos)))
            .collect()
    }

    /// Expected utilities of all agents at every joint profile, with the
    /// remaining decisions fixed by `base`.
    fn utility_table(&self, ev: &Evaluator<'_>, base: &[Slot<'_>], parallel: bool) -> Vec<Vec<f64>> {
        par::map_range(self.size, parallel, |index| {
            let actions = self.actions(index);
            let mut slots = base.to_vec();
            for (s, a) in self.spaces.iter().zip(&actions) {
                slots[s.decision.0] = Slot::Pure(a);
            }
            ev.expected_utilities(&slots)
        })
    }

    /// Index with the digits at `positions` zeroed.
    fn group_key(&self, index: usize, positions: &[usize]) -> usize {
        positions
            .iter()
            .fold(index, |acc, &p| acc - self.digit(index, p) * self.strides[p])
    }

    /// Every index sharing `key`'s group, in increasing order.
    fn group_members(&self, key: usize, positions: &[usize]) -> Vec<usize> {
        let mut members = vec![key];
        for &p in positions {
            let mut next = Vec::with_capacity(members.len() * self.radices[p]);
            for &m in &members {
                for d in 0..self.radices[p] {
                    next.push(m + d * self.strides[p]);
                }
            }
            members = next;
        }
        members.sort_unstable();
        members
    }

    fn describe(&self, maid: &Maid, index: usize) -> String {
        self.spaces
            .iter()
            .zip(self.actions(index))
            .map(|(s, acts)| {
                let dom = &maid.node(s.decision).domain;
                let labels: Vec<&str> = acts.iter().map(|&a| dom.label(a)).collect();
                if labels.len() == 1 {
                    format!("{}={}", maid.name(s.decision), labels[0])
                } else {
                    format!("{}=[{}]", maid.name(s.decision), labels.join(" "))
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A deviating agent and the positions of its decisions in a joint space.
struct DeviationGroup {
    agent: usize,
    positions: Vec<usize>,
    /// Best utility of `agent` over each group, indexed by group key.
    best: Vec<f64>,
}

fn deviation_groups(maid: &Maid, space: &JointSpace, table: &[Vec<f64>]) -> Vec<DeviationGroup> {
    let mut by_agent: Vec<(usize, Vec<usize>)> = Vec::new();
    for (pos, s) in space.spaces.iter().enumerate() {
        let owner = maid.owner(s.decision).expect("decision owner");
        let a = maid.agent_index(owner.as_str()).expect("known agent");
        match by_agent.iter_mut().find(|(x, _)| *x == a) {
            Some((_, ps)) => ps.push(pos),
            None => by_agent.push((a, vec![pos])),
        }
    }
    by_agent.sort_by_key(|(a, _)| *a);
    by_agent
        .into_iter()
        .map(|(agent, positions)| {
            let mut best = vec![f64::NEG_INFINITY; space.size];
            for (index, eus) in table.iter().enumerate() {
                let k = space.group_key(index, &positions);
                if eus[agent] > best[k] {
                    best[k] = eus[agent];
                }
            }
            DeviationGroup {
                agent,
                positions,
                best,
            }
        })
        .collect()
}

fn is_stable(space: &JointSpace, groups: &[DeviationGroup], table: &[Vec<f64>], index: usize) -> bool {
    groups.iter().all(|g| {
        let k = space.group_key(index, &g.positions);
        g.best[k] <= table[index][g.agent] + DEVIATION_TOLERANCE
    })
}

/// Follows improving unilateral moves from profile 0 until a state repeats
/// and returns the repeating loop.
fn best_response_cycle(space: &JointSpace, groups: &[DeviationGroup], table: &[Vec<f64>]) -> Vec<usize> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut cur = 0;
    loop {
        if let Some(&at) = seen.get(&cur) {
            let mut cycle = path[at..].to_vec();
            cycle.push(cur);
            return cycle;
        }
        seen.insert(cur, path.len());
        path.push(cur);
        let mover = groups.iter().find(|g| {
            let k = space.group_key(cur, &g.positions);
            g.best[k] > table[cur][g.agent] + DEVIATION_TOLERANCE
        });
        let Some(g) = mover else {
            return path;
        };
        let k = space.group_key(cur, &g.positions);
        cur = space
            .group_members(k, &g.positions)
            .into_iter()
            .find(|&m| table[m][g.agent] >= g.best[k] - DEVIATION_TOLERANCE)
            .expect("group maximum is attained");
    }
}

/// Equilibrium rules for the decisions in `component`, holding every other
/// decision at its rule in `profile`.
///
/// A single decision gets its best response. Larger components are solved
/// by scanning joint pure rules in enumeration order and returning the
/// first where no owner gains by changing its own rules in the component.
pub fn scc_pure_equilibrium(
    maid: &Maid,
    profile: &StrategyProfile,
    component: &[NodeId],
    cfg: &SearchConfig,
) -> Result<StrategyProfile, EquilibriumError> {
    for &d in component {
        require_decision(maid, d)?;
    }
    profile.check(maid)?;
    let missing: Vec<String> = profile
        .missing(maid)
        .into_iter()
        .filter(|d| !component.contains(d))
        .map(|d| maid.name(d).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(EquilibriumError::WrongCoverage {
            decision: component
                .iter()
                .map(|&d| maid.name(d))
                .collect::<Vec<_>>()
                .join(","),
            missing,
        });
    }
    let ev = Evaluator::new(maid);
    let mut slots = ev.slots(profile);
    if let [d] = component {
        slots[d.0] = Slot::Free;
        let rule = best_response_with(maid, &ev, &slots, *d);
        return Ok([rule].into_iter().collect());
    }

    let space = JointSpace::new(maid, component, cfg.cap)?;
    let table = space.utility_table(&ev, &slots, cfg.parallel);
    let groups = deviation_groups(maid, &space, &table);
    match par::find_first(space.size, cfg.parallel, |i| is_stable(&space, &groups, &table, i)) {
        Some(index) => Ok(space.profile(index)),
        None => {
            let mut names: Vec<String> = component.iter().map(|&d| maid.name(d).to_string()).collect();
            names.sort();
            Err(EquilibriumError::NoPureEquilibrium {
                component: names,
                cycle: best_response_cycle(&space, &groups, &table)
                    .into_iter()
                    .map(|i| space.describe(maid, i))
                    .collect(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    BestResponse,
    PureEnumeration,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::BestResponse => "best-response",
            SolveMethod::PureEnumeration => "pure-enumeration",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSolve {
    pub members: Vec<NodeId>,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    /// One entry per agent, in model agent order.
    pub expected_utilities: Vec<(AgentId, f64)>,
    pub ordering: SccOrdering,
    /// Components in the order they were solved (last component first).
    pub log: Vec<ComponentSolve>,
    pub warnings: Vec<String>,
}

impl EquilibriumResult {
    pub fn expected_utility(&self, agent: &str) -> Option<f64> {
        self.expected_utilities
            .iter()
            .find(|(a, _)| a.as_str() == agent)
            .map(|(_, v)| *v)
    }
}

/// Solves `maid` component by component over its relevance graph: start
/// from the uniform fully mixed profile and, from the last component back
/// to the first, replace each component's rules with an equilibrium of the
/// game induced by the current rules everywhere else.
pub fn nash_equilibrium(maid: &Maid, cfg: &SearchConfig) -> Result<EquilibriumResult, EquilibriumError> {
    let mut warnings = Vec::new();
    for a in check_perfect_recall(maid).agents {
        if !a.holds {
            let (x, y) = a.violation.expect("violation recorded");
            warnings.push(format!(
                "agent `{}` lacks perfect recall ({} before {}); the result may not be an equilibrium",
                a.agent,
                maid.name(x),
                maid.name(y)
            ));
        }
    }
    if maid.is_illustrative() {
        warnings.push("model uses illustrative placeholder CPDs and utilities".to_string());
    }

    let ordering = scc_ordering(&relevance_graph_with(maid, cfg.parallel));
    let mut sigma = StrategyProfile::uniform(maid);
    let mut log = Vec::with_capacity(ordering.components.len());
    for component in ordering.components.iter().rev() {
        let tau = scc_pure_equilibrium(maid, &sigma, component, cfg)?;
        sigma = sigma.with(&tau);
        log.push(ComponentSolve {
            members: component.clone(),
            method: if component.len() == 1 {
                SolveMethod::BestResponse
            } else {
                SolveMethod::PureEnumeration
            },
        });
    }
    let eus = expected_utilities(maid, &sigma)?;
    Ok(EquilibriumResult {
        profile: sigma,
        expected_utilities: maid.agents().iter().cloned().zip(eus).collect(),
        ordering,
        log,
        warnings,
    })
}

/// Every full pure profile from which no agent gains by a joint change of
/// all its own rules.
pub fn enumerate_pure_ne(maid: &Maid, cfg: &SearchConfig) -> Result<Vec<StrategyProfile>, EquilibriumError> {
    let decisions: Vec<NodeId> = maid.decisions().collect();
    let space = JointSpace::new(maid, &decisions, cfg.cap)?;
    let ev = Evaluator::new(maid);
    let empty = StrategyProfile::new();
    let base = ev.slots(&empty);
    let table = space.utility_table(&ev, &base, cfg.parallel);
    let groups = deviation_groups(maid, &space, &table);
    let stable = par::map_range(space.size, cfg.parallel, |i| is_stable(&space, &groups, &table, i));
    Ok(stable
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(i, _)| space.profile(i))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub agent: AgentId,
    /// Utility gained over the checked profile (may be ≤ 0).
    pub gain: f64,
    /// The deviating agent's replacement rules.
    pub rules: StrategyProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashCheck {
    pub is_nash: bool,
    /// The most profitable unilateral deviation over all agents.
    pub best_deviation: Option<Deviation>,
}

impl NashCheck {
    pub fn max_gain(&self) -> f64 {
        self.best_deviation.as_ref().map_or(0.0, |d| d.gain)
    }
}

/// Checks every joint pure deviation of each agent over all its decisions.
pub fn is_nash(maid: &Maid, profile: &StrategyProfile, cfg: &SearchConfig) -> Result<NashCheck, EquilibriumError> {
    require_full(maid, profile)?;
    let ev = Evaluator::new(maid);
    let slots = ev.slots(profile);
    let base = ev.expected_utilities(&slots);
    let mut best: Option<Deviation> = None;
    for (a, agent) in maid.agents().iter().enumerate() {
        let own: Vec<NodeId> = maid.decisions_of(agent).collect();
        if own.is_empty() {
            continue;
        }
        let space = JointSpace::new(maid, &own, cfg.cap)?;
        let table = space.utility_table(&ev, &slots, cfg.parallel);
        let (index, top) = table
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, eus)| {
                if eus[a] > acc.1 {
                    (i, eus[a])
                } else {
                    acc
                }
            });
        let gain = top - base[a];
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            best = Some(Deviation {
                agent: agent.clone(),
                gain,
                rules: space.profile(index),
            });
        }
    }
    Ok(NashCheck {
        is_nash: best.as_ref().is_none_or(|d| d.gain <= DEVIATION_TOLERANCE),
        best_deviation: best,
    })
}
