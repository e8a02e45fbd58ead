//! Bundled governance games.
//!
//! Binary encodings: collateral risk `CR` is risky = "1" / not risky = "0",
//! market sentiment `MS` is good = "0" / bad = "1", and every vote is
//! yes = "1" / no = "0". Each domain lists its values in that order, so
//! "yes" is the lowest index of every vote.

use std::fmt;
use std::str::FromStr;

use crate::maid::{build_maid, Maid, MaidSpec, NodeSpec};

const CR: [&str; 2] = ["1", "0"];
const MS: [&str; 2] = ["0", "1"];
const VOTE: [&str; 2] = ["1", "0"];

/// Payoff of an honest vote by (CR, MS) and vote, in family order
/// CR ∈ [1, 0], MS ∈ [0, 1], vote ∈ [yes, no].
fn base(cr: usize, ms: usize, vote: usize) -> f64 {
    const TABLE: [[f64; 2]; 4] = [[50.0, -50.0], [100.0, -100.0], [-100.0, 100.0], [25.0, -25.0]];
    TABLE[cr * 2 + ms][vote]
}

fn uniform_prior(id: &str, domain: &[&str]) -> NodeSpec {
    let p = 1.0 / domain.len() as f64;
    NodeSpec::chance(id, domain, &[], vec![p; domain.len()])
}

fn build(spec: MaidSpec) -> Maid {
    build_maid(&spec).unwrap_or_else(|e| panic!("bundled model is invalid: {e}"))
}

/// One voter deciding on a risk-parameter proposal after observing
/// collateral risk and market sentiment.
pub fn single_agent_governance() -> Maid {
    let mut u = Vec::with_capacity(8);
    for cr in 0..2 {
        for ms in 0..2 {
            for v in 0..2 {
                u.push(base(cr, ms, v));
            }
        }
    }
    build(MaidSpec {
        agents: vec!["A".into()],
        nodes: vec![
            uniform_prior("CR", &CR),
            uniform_prior("MS", &MS),
            NodeSpec::decision("V", "A", &VOTE, &["CR", "MS"]),
            NodeSpec::utility("U", "A", &["CR", "MS", "V"], u),
        ],
        illustrative: false,
    })
}

/// Who follows the leader in [`two_agent_sequential`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Follower {
    /// Shares the leader's payoffs and is penalized for voting differently.
    Honest,
    /// Gains exactly what an honest vote loses.
    Attacker,
}

/// Leader `A1` votes on `V1`; follower `A2` observes the same state and
/// `V1` before voting on `V2`. Both utilities see the state and both votes.
///
/// Honest tables pay `base` for the agent's own vote when the votes match
/// and `-|base|` otherwise. In the attacker variant `A1` is paid `base` for
/// `V1` and `A2` is paid `-base` for `V2`, with no coordination term.
pub fn two_agent_sequential(follower: Follower) -> Maid {
    let mut u1 = Vec::with_capacity(16);
    let mut u2 = Vec::with_capacity(16);
    for cr in 0..2 {
        for ms in 0..2 {
            for v1 in 0..2 {
                for v2 in 0..2 {
                    let (b1, b2) = (base(cr, ms, v1), base(cr, ms, v2));
                    match follower {
                        Follower::Honest => {
                            u1.push(if v1 == v2 { b1 } else { -b1.abs() });
                            u2.push(if v1 == v2 { b2 } else { -b2.abs() });
                        }
                        Follower::Attacker => {
                            u1.push(b1);
                            u2.push(-b2);
                        }
                    }
                }
            }
        }
    }
    let family = ["CR", "MS", "V1", "V2"];
    build(MaidSpec {
        agents: vec!["A1".into(), "A2".into()],
        nodes: vec![
            uniform_prior("CR", &CR),
            uniform_prior("MS", &MS),
            NodeSpec::decision("V1", "A1", &VOTE, &["CR", "MS"]),
            NodeSpec::decision("V2", "A2", &VOTE, &["CR", "MS", "V1"]),
            NodeSpec::utility("U1", "A1", &family, u1),
            NodeSpec::utility("U2", "A2", &family, u2),
        ],
        illustrative: false,
    })
}

/// Simultaneous votes of an honest agent (`V_a`) and an attacker
/// (`V_a_prime`) with payoffs given cell by cell.
///
/// | a \ a' | 0         | 1         |
/// |--------|-----------|-----------|
/// | 0      | 0, 100    | -100, -100|
/// | 1      | 100, 100  | 100, -100 |
pub fn attacker_matrix_game() -> Maid {
    // rows (V_a, V_a_prime) = (1,1), (1,0), (0,1), (0,0)
    build(MaidSpec {
        agents: vec!["honest".into(), "attacker".into()],
        nodes: vec![
            NodeSpec::decision("V_a", "honest", &VOTE, &[]),
            NodeSpec::decision("V_a_prime", "attacker", &VOTE, &[]),
            NodeSpec::utility("U_a", "honest", &["V_a", "V_a_prime"], vec![100.0, 100.0, -100.0, 0.0]),
            NodeSpec::utility(
                "U_a_prime",
                "attacker",
                &["V_a", "V_a_prime"],
                vec![-100.0, 100.0, -100.0, 100.0],
            ),
        ],
        illustrative: false,
    })
}

/// Structure of the MakerDAO governance game. Every chance node has a
/// uniform prior and every utility table is zero; the model is flagged
/// illustrative.
pub fn makerdao_structure() -> Maid {
    const BIN: [&str; 2] = ["low", "high"];
    let chance = [
        ("SmartContractModules", ["secure", "vulnerable"]),
        ("MarketConditions", ["bull", "bear"]),
        ("CollateralDynamics", ["stable", "volatile"]),
        ("DaiDemand", BIN),
        ("SecurityRisks", BIN),
    ];
    let mut nodes: Vec<NodeSpec> = chance.iter().map(|(id, dom)| uniform_prior(id, dom)).collect();
    let profitability = ["CollateralDynamics", "DaiDemand", "Debt", "RiskParameters"];
    let sustainability = [
        "SmartContractModules",
        "CollateralDynamics",
        "SecurityRisks",
        "Debt",
        "RiskParameters",
    ];
    nodes.extend([
        NodeSpec::decision(
            "RiskParameters",
            "Governance",
            &["loosen", "tighten"],
            &["MarketConditions", "SecurityRisks"],
        ),
        NodeSpec::decision("Debt", "User", &BIN, &["MarketConditions", "DaiDemand", "RiskParameters"]),
        NodeSpec::utility("Profitability", "User", &profitability, vec![0.0; 16]),
        NodeSpec::utility("Sustainability", "Governance", &sustainability, vec![0.0; 32]),
    ]);
    build(MaidSpec {
        agents: vec!["User".into(), "Governance".into()],
        nodes,
        illustrative: true,
    })
}

/// Two players each pick heads or tails; `A` wins on a match and `B` on a
/// mismatch. No pure equilibrium exists.
pub fn matching_pennies() -> Maid {
    let sides = ["h", "t"];
    build(MaidSpec {
        agents: vec!["A".into(), "B".into()],
        nodes: vec![
            NodeSpec::decision("P1", "A", &sides, &[]),
            NodeSpec::decision("P2", "B", &sides, &[]),
            NodeSpec::utility("UA", "A", &["P1", "P2"], vec![1.0, -1.0, -1.0, 1.0]),
            NodeSpec::utility("UB", "B", &["P1", "P2"], vec![-1.0, 1.0, 1.0, -1.0]),
        ],
        illustrative: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BundledModelId {
    SingleAgent,
    TwoAgentHonest,
    TwoAgentAttacker,
    AttackerMatrix,
    MakerdaoStructure,
}

impl BundledModelId {
    pub const ALL: [BundledModelId; 5] = [
        BundledModelId::SingleAgent,
        BundledModelId::TwoAgentHonest,
        BundledModelId::TwoAgentAttacker,
        BundledModelId::AttackerMatrix,
        BundledModelId::MakerdaoStructure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BundledModelId::SingleAgent => "single-agent",
            BundledModelId::TwoAgentHonest => "two-agent-honest",
            BundledModelId::TwoAgentAttacker => "two-agent-attacker",
            BundledModelId::AttackerMatrix => "attacker-matrix",
            BundledModelId::MakerdaoStructure => "makerdao-structure",
        }
    }

    pub fn build(self) -> Maid {
        match self {
            BundledModelId::SingleAgent => single_agent_governance(),
            BundledModelId::TwoAgentHonest => two_agent_sequential(Follower::Honest),
            BundledModelId::TwoAgentAttacker => two_agent_sequential(Follower::Attacker),
            BundledModelId::AttackerMatrix => attacker_matrix_game(),
            BundledModelId::MakerdaoStructure => makerdao_structure(),
        }
    }
}

impl fmt::Display for BundledModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown bundled model `{0}`")]
pub struct UnknownModel(pub String);

impl FromStr for BundledModelId {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BundledModelId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| UnknownModel(s.to_string()))
    }
}
