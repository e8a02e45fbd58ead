//! The JSON model file format.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "agents": ["A"],
//!   "nodes": [
//!     {"id": "CR", "kind": "chance", "domain": ["1", "0"], "parents": [], "table": [0.5, 0.5]},
//!     {"id": "V", "kind": "decision", "owner": "A", "domain": ["1", "0"], "parents": ["CR"]},
//!     {"id": "U", "kind": "utility", "owner": "A", "parents": ["CR", "V"], "table": [1, -1, 0, 2]}
//!   ]
//! }
//! ```
//!
//! Tables are flat and row-major in family-enumeration order. Utility nodes
//! take no domain and decision nodes take no table. An optional top-level
//! `"illustrative": true` marks placeholder numbers. Unknown keys are
//! rejected. [`serialize_model`] writes the canonical form, which parses
//! back to the same bytes.

use serde::Deserialize;
use thiserror::Error;

use super::doc::Doc;
use crate::maid::{build_maid, KindSpec, Maid, MaidSpec, NodeSpec, ValidationErrors};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelFileError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("invalid model: {0}")]
    Validation(ValidationErrors),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    #[allow(dead_code)]
    format_version: u64,
    agents: Vec<String>,
    #[serde(default)]
    illustrative: bool,
    nodes: Vec<FileNode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNode {
    id: String,
    kind: FileKind,
    #[serde(default)]
    owner: Option<String>,
    #[serde(default)]
    domain: Option<Vec<String>>,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default)]
    table: Option<Vec<f64>>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum FileKind {
    Chance,
    Decision,
    Utility,
}

fn json_error(e: serde_json::Error) -> ModelFileError {
    let (line, column, message) = (e.line(), e.column(), strip_position(&e.to_string()));
    if e.is_data() {
        ModelFileError::Schema { line, column, message }
    } else {
        ModelFileError::Syntax { line, column, message }
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Line and column of the first occurrence of `"key"` in `text`.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    text.lines()
        .enumerate()
        .find_map(|(i, l)| l.find(&needle).map(|c| (i + 1, c + 1)))
        .unwrap_or((1, 1))
}

/// Parses and validates a model document.
pub fn parse_model_file(text: &str) -> Result<Maid, ModelFileError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let (line, column) = locate(text, "format_version");
    match value.get("format_version") {
        None => {
            return Err(ModelFileError::Schema {
                line: 1,
                column: 1,
                message: "missing field `format_version`".into(),
            })
        }
        Some(v) if v.as_u64() != Some(FORMAT_VERSION) => {
            return Err(ModelFileError::Schema {
                line,
                column,
                message: format!("unsupported format_version {v} (expected {FORMAT_VERSION})"),
            })
        }
        Some(_) => {}
    }
    let doc: FileDoc = serde_json::from_str(text).map_err(json_error)?;
    let spec = MaidSpec {
        agents: doc.agents,
        illustrative: doc.illustrative,
        nodes: doc
            .nodes
            .into_iter()
            .map(|n| NodeSpec {
                id: n.id,
                kind: match n.kind {
                    FileKind::Chance => KindSpec::Chance,
                    FileKind::Decision => KindSpec::Decision,
                    FileKind::Utility => KindSpec::Utility,
                },
                owner: n.owner,
                domain: n.domain.unwrap_or_default(),
                parents: n.parents,
                table: n.table.unwrap_or_default(),
            })
            .collect(),
    };
    build_maid(&spec).map_err(ModelFileError::Validation)
}

/// Canonical document for `maid`.
pub fn serialize_model(maid: &Maid) -> String {
    let spec = maid.to_spec();
    let nodes = spec
        .nodes
        .iter()
        .map(|n| {
            let kind = match n.kind {
                KindSpec::Chance => "chance",
                KindSpec::Decision => "decision",
                KindSpec::Utility => "utility",
            };
            let mut d = Doc::obj().with("id", Doc::str(&n.id)).with("kind", Doc::str(kind));
            if let Some(owner) = &n.owner {
                d = d.with("owner", Doc::str(owner));
            }
            if n.kind != KindSpec::Utility {
                d = d.with("domain", Doc::strs(&n.domain));
            }
            d = d.with("parents", Doc::strs(&n.parents));
            if n.kind != KindSpec::Decision {
                d = d.with("table", Doc::nums(&n.table));
            }
            d
        })
        .collect();
    let mut doc = Doc::obj()
        .with("format_version", Doc::Num(FORMAT_VERSION as f64))
        .with("agents", Doc::strs(&spec.agents));
    if spec.illustrative {
        doc = doc.with("illustrative", Doc::Bool(true));
    }
    doc.with("nodes", Doc::Arr(nodes)).render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maid::ValidationError;
    use crate::models;

    #[test]
    fn bundled_single_agent_round_trips() {
        let m = models::single_agent_governance();
        let text = serialize_model(&m);
        let back = parse_model_file(&text).unwrap();
        assert_eq!(back.len(), 4);
        assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn row_sum_violation_is_reported() {
        let text = r#"{"format_version": 1, "agents": [],
            "nodes": [{"id": "X", "kind": "chance", "domain": ["a", "b"], "parents": [], "table": [0.5, 0.47]}]}"#;
        match parse_model_file(text) {
            Err(ModelFileError::Validation(errs)) => {
                assert!(matches!(errs.0[0], ValidationError::RowSumViolation { row: 0, .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn version_gate() {
        let text = "{\n  \"format_version\": 2,\n  \"agents\": [],\n  \"nodes\": []\n}";
        assert_eq!(
            parse_model_file(text),
            Err(ModelFileError::Schema {
                line: 2,
                column: 3,
                message: "unsupported format_version 2 (expected 1)".into()
            })
        );
    }

    #[test]
    fn unknown_keys_and_syntax() {
        let text = "{\"format_version\": 1, \"agents\": [], \"nodes\": [],\n \"extra\": 3}";
        match parse_model_file(text) {
            Err(ModelFileError::Schema { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("extra"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_model_file("{\"format_version\": 1,"),
            Err(ModelFileError::Syntax { .. })
        ));
        assert!(matches!(
            parse_model_file("{\"format_version\": 1, \"agents\": [], \"nodes\": [{\"id\": \"X\", \"kind\": \"oracle\"}]}"),
            Err(ModelFileError::Schema { .. })
        ));
    }
}
