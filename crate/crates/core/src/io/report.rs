//! Solve reports (JSON and text) and strategy-profile documents.
//!
//! A profile document is any JSON object with a `decisions` array whose
//! entries look like the ones in a solve report:
//!
//! ```json
//! {"decisions": [{"decision": "V", "rules": [
//!   {"context": {"CR": "1", "MS": "0"}, "action": "1"},
//!   {"context": {"CR": "1", "MS": "1"}, "distribution": [0.5, 0.5]}
//! ]}]}
//! ```
//!
//! so a JSON solve report can be fed straight back as a profile. Other keys
//! are ignored; every parent instantiation must be covered exactly once.

use std::fmt::Write;

use serde_json::Value;
use thiserror::Error;

use super::doc::Doc;
use crate::equilibrium::EquilibriumResult;
use crate::maid::Maid;
use crate::number::format_number;
use crate::radix;
use crate::strategy::{DecisionRule, RuleError, StrategyProfile};

/// One row of a resolved decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleEntry {
    /// Parent value labels, aligned with the decision's parents.
    pub context: Vec<String>,
    /// Set when the row is deterministic.
    pub action: Option<String>,
    pub distribution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport {
    pub decision: String,
    pub owner: String,
    pub parents: Vec<String>,
    pub rules: Vec<RuleEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    pub members: Vec<String>,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub model: String,
    pub expected_utilities: Vec<(String, f64)>,
    pub decisions: Vec<DecisionReport>,
    /// In solve order.
    pub components: Vec<ComponentReport>,
    pub warnings: Vec<String>,
}

/// Per-row entries of every rule in `profile`, in model node order.
pub fn describe_profile(maid: &Maid, profile: &StrategyProfile) -> Vec<DecisionReport> {
    profile
        .rules()
        .map(|rule| {
            let d = rule.decision();
            let dom = &maid.node(d).domain;
            DecisionReport {
                decision: maid.name(d).to_string(),
                owner: maid.owner(d).map(|a| a.to_string()).unwrap_or_default(),
                parents: maid.parents(d).iter().map(|&p| maid.name(p).to_string()).collect(),
                rules: (0..rule.num_rows())
                    .map(|row| RuleEntry {
                        context: maid.row_labels(d, row).into_iter().map(String::from).collect(),
                        action: rule.action(row).map(|a| dom.label(a).to_string()),
                        distribution: rule.row(row).to_vec(),
                    })
                    .collect(),
            }
        })
        .collect()
}

impl SolveReport {
    pub fn new(maid: &Maid, model: &str, result: &EquilibriumResult) -> SolveReport {
        SolveReport {
            model: model.to_string(),
            expected_utilities: result
                .expected_utilities
                .iter()
                .map(|(a, v)| (a.to_string(), *v))
                .collect(),
            decisions: describe_profile(maid, &result.profile),
            components: result
                .log
                .iter()
                .map(|c| ComponentReport {
                    members: c.members.iter().map(|&d| maid.name(d).to_string()).collect(),
                    method: c.method.to_string(),
                })
                .collect(),
            warnings: result.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let eus = Doc::Obj(
            self.expected_utilities
                .iter()
                .map(|(a, v)| (a.clone(), Doc::Num(*v)))
                .collect(),
        );
        let decisions = self
            .decisions
            .iter()
            .map(|d| {
                let rules = d
                    .rules
                    .iter()
                    .map(|r| {
                        let context = Doc::Obj(
                            d.parents
                                .iter()
                                .zip(&r.context)
                                .map(|(p, v)| (p.clone(), Doc::str(v)))
                                .collect(),
                        );
                        let entry = Doc::obj().with("context", context);
                        match &r.action {
                            Some(a) => entry.with("action", Doc::str(a)),
                            None => entry.with("distribution", Doc::nums(&r.distribution)),
                        }
                    })
                    .collect();
                Doc::obj()
                    .with("decision", Doc::str(&d.decision))
                    .with("owner", Doc::str(&d.owner))
                    .with("parents", Doc::strs(&d.parents))
                    .with("rules", Doc::Arr(rules))
            })
            .collect();
        let components = self
            .components
            .iter()
            .map(|c| {
                Doc::obj()
                    .with("members", Doc::strs(&c.members))
                    .with("method", Doc::str(&c.method))
            })
            .collect();
        Doc::obj()
            .with("model", Doc::str(&self.model))
            .with("expected_utilities", eus)
            .with("decisions", Doc::Arr(decisions))
            .with("components", Doc::Arr(components))
            .with("warnings", Doc::strs(&self.warnings))
            .render()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", self.model);
        out.push_str("expected utility:\n");
        for (a, v) in &self.expected_utilities {
            let _ = writeln!(out, "  {a}: {}", format_number(*v));
        }
        out.push_str("equilibrium:\n");
        for d in &self.decisions {
            if d.parents.is_empty() {
                let _ = writeln!(out, "  {} ({}):", d.decision, d.owner);
            } else {
                let _ = writeln!(out, "  {} ({}) given {}:", d.decision, d.owner, d.parents.join(", "));
            }
            for r in &d.rules {
                let ctx: Vec<String> = d.parents.iter().zip(&r.context).map(|(p, v)| format!("{p}={v}")).collect();
                let ctx = if ctx.is_empty() { "always".to_string() } else { ctx.join(", ") };
                let act = match &r.action {
                    Some(a) => a.clone(),
                    None => {
                        let ps: Vec<String> = r.distribution.iter().map(|&p| format_number(p)).collect();
                        format!("[{}]", ps.join(", "))
                    }
                };
                let _ = writeln!(out, "    {ctx} -> {act}");
            }
        }
        out.push_str("components (solve order):\n");
        for c in &self.components {
            let _ = writeln!(out, "  {{{}}}: {}", c.members.join(", "), c.method);
        }
        if self.warnings.is_empty() {
            out.push_str("warnings: none\n");
        } else {
            out.push_str("warnings:\n");
            for w in &self.warnings {
                let _ = writeln!(out, "  {w}");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile is not valid JSON: {0}")]
    Syntax(String),
    #[error("profile schema: {0}")]
    Schema(String),
    #[error("profile names `{0}`, which is not a decision of the model")]
    UnknownDecision(String),
    #[error("rule for `{decision}` covers row {row} more than once")]
    DuplicateRow { decision: String, row: usize },
    #[error("rule for `{decision}` is missing context {context}")]
    MissingRow { decision: String, context: String },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

fn schema(msg: impl Into<String>) -> ProfileError {
    ProfileError::Schema(msg.into())
}

/// Reads a (possibly partial) strategy profile for `maid`.
pub fn parse_profile(maid: &Maid, text: &str) -> Result<StrategyProfile, ProfileError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ProfileError::Syntax(e.to_string()))?;
    let decisions = v
        .get("decisions")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("expected a top-level `decisions` array"))?;
    let mut profile = StrategyProfile::new();
    for entry in decisions {
        let name = entry
            .get("decision")
            .and_then(Value::as_str)
            .ok_or_else(|| schema("decision entry without a `decision` name"))?;
        let d = maid
            .node_id(name)
            .filter(|&d| maid.node(d).kind.is_decision())
            .ok_or_else(|| ProfileError::UnknownDecision(name.to_string()))?;
        let rules = entry
            .get("rules")
            .and_then(Value::as_array)
            .ok_or_else(|| schema(format!("`{name}` has no `rules` array")))?;
        let card = maid.card(d);
        let dom = &maid.node(d).domain;
        let parents = maid.parents(d);
        let cards = maid.parent_cards(d);
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; maid.num_rows(d)];
        for r in rules {
            let ctx = r
                .get("context")
                .and_then(Value::as_object)
                .ok_or_else(|| schema(format!("`{name}` rule without a `context` object")))?;
            if ctx.len() != parents.len() {
                return Err(schema(format!("`{name}` context must name exactly its parents")));
            }
            let mut digits = Vec::with_capacity(parents.len());
            for &p in parents {
                let pname = maid.name(p);
                let label = ctx
                    .get(pname)
                    .and_then(Value::as_str)
                    .ok_or_else(|| schema(format!("`{name}` context lacks parent `{pname}`")))?;
                let idx = maid
                    .node(p)
                    .domain
                    .index_of(label)
                    .ok_or_else(|| schema(format!("`{label}` is not a value of `{pname}`")))?;
                digits.push(idx);
            }
            let row = radix::encode(&cards, &digits);
            let probs = match (r.get("action"), r.get("distribution")) {
                (Some(a), None) => {
                    let label = a.as_str().ok_or_else(|| schema("`action` must be a string"))?;
                    let i = dom
                        .index_of(label)
                        .ok_or_else(|| schema(format!("`{label}` is not a value of `{name}`")))?;
                    let mut p = vec![0.0; card];
                    p[i] = 1.0;
                    p
                }
                (None, Some(dist)) => dist
                    .as_array()
                    .and_then(|xs| xs.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
                    .ok_or_else(|| schema("`distribution` must be an array of numbers"))?,
                _ => return Err(schema(format!("`{name}` rule needs exactly one of `action` or `distribution`"))),
            };
            if rows[row].replace(probs).is_some() {
                return Err(ProfileError::DuplicateRow {
                    decision: name.to_string(),
                    row,
                });
            }
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(row, r)| {
                r.ok_or_else(|| ProfileError::MissingRow {
                    decision: name.to_string(),
                    context: maid.row_labels(d, row).join(","),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        profile.insert(DecisionRule::from_rows(maid, d, rows)?);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{expected_utilities, nash_equilibrium, SearchConfig};
    use crate::models;

    #[test]
    fn report_feeds_back_as_profile() {
        let m = models::two_agent_sequential(models::Follower::Honest);
        let res = nash_equilibrium(&m, &SearchConfig::default()).unwrap();
        let report = SolveReport::new(&m, "two-agent-honest", &res);
        let profile = parse_profile(&m, &report.to_json()).unwrap();
        assert_eq!(profile, res.profile);
        let eus = expected_utilities(&m, &profile).unwrap();
        for ((_, want), got) in report.expected_utilities.iter().zip(eus) {
            assert!((want - got).abs() <= 1e-9);
        }
    }

    #[test]
    fn text_and_json_carry_the_same_values() {
        let m = models::single_agent_governance();
        let res = nash_equilibrium(&m, &SearchConfig::default()).unwrap();
        let report = SolveReport::new(&m, "single-agent", &res);
        let text = report.to_text();
        assert!(text.contains("  A: 68.75\n"), "{text}");
        assert!(text.contains("    CR=0, MS=0 -> 0\n"), "{text}");
        assert!(report.to_json().contains("\"A\": 68.75"));
    }

    #[test]
    fn profile_errors() {
        let m = models::single_agent_governance();
        let missing = r#"{"decisions": [{"decision": "V", "rules": [
            {"context": {"CR": "1", "MS": "0"}, "action": "1"}]}]}"#;
        assert!(matches!(parse_profile(&m, missing), Err(ProfileError::MissingRow { .. })));
        let unknown = r#"{"decisions": [{"decision": "CR", "rules": []}]}"#;
        assert!(matches!(parse_profile(&m, unknown), Err(ProfileError::UnknownDecision(_))));
        assert!(matches!(parse_profile(&m, "[1"), Err(ProfileError::Syntax(_))));
        let mixed = r#"{"decisions": [{"decision": "V", "rules": [
            {"context": {"CR": "1", "MS": "0"}, "distribution": [0.5, 0.5]},
            {"context": {"CR": "1", "MS": "1"}, "distribution": [0.5, 0.5]},
            {"context": {"CR": "0", "MS": "0"}, "distribution": [0.5, 0.5]},
            {"context": {"CR": "0", "MS": "1"}, "distribution": [0.5, 0.5]}]}]}"#;
        assert_eq!(parse_profile(&m, mixed).unwrap(), StrategyProfile::uniform(&m));
    }
}
