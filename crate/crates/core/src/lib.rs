//! Multi-agent influence diagrams.
//!
//! Build a [`Maid`] from a [`MaidSpec`] or a model file, query the Bayes
//! network a strategy profile induces, derive the relevance graph over the
//! decisions, and solve for a Nash equilibrium component by component with
//! [`nash_equilibrium`]. [`enumerate_pure_ne`] and [`is_nash`] check the
//! result by brute force.
//!
//! ```
//! use maid_core::{models, nash_equilibrium, SearchConfig};
//!
//! let maid = models::single_agent_governance();
//! let result = nash_equilibrium(&maid, &SearchConfig::default()).unwrap();
//! assert_eq!(result.expected_utility("A"), Some(68.75));
//! ```

mod eval;
pub mod equilibrium;
pub mod inference;
pub mod io;
pub mod maid;
pub mod models;
pub mod number;
mod par;
pub mod radix;
pub mod random;
pub mod relevance;
pub mod strategy;

pub use equilibrium::{
    best_response_rule, enumerate_pure_ne, expected_utilities, expected_utility, expected_utility_joint, is_nash,
    nash_equilibrium, scc_pure_equilibrium, stake_weighted_eu, EquilibriumError, EquilibriumResult, SearchConfig,
};
pub use inference::{d_connected, induce, induce_bayes_net, joint_probability, marginal, Assignment, BayesNet, Dag};
pub use maid::{build_maid, AgentId, Domain, Maid, MaidSpec, NodeId, NodeKind, NodeSpec, ValidationError};
pub use models::BundledModelId;
pub use number::format_number;
pub use par::DEFAULT_PARALLEL;
pub use relevance::{check_perfect_recall, relevance_graph, s_reachable, scc_ordering, RelevanceGraph, SccOrdering};
pub use strategy::{DecisionRule, StrategyProfile};
