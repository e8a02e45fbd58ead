//! A small JSON document tree with a canonical, byte-stable printer.
//!
//! Objects keep insertion order. Numbers go through [`format_number`].
//! Arrays whose elements are all scalars print on one line; everything
//! else is indented by two spaces per level.

use crate::number::format_number;

#[derive(Debug, Clone, PartialEq)]
pub enum Doc {
    Null,
    Bool(bool),
    Num(f64),
    Str(String),
    Arr(Vec<Doc>),
    Obj(Vec<(String, Doc)>),
}

impl Doc {
    pub fn str(s: impl Into<String>) -> Doc {
        Doc::Str(s.into())
    }

    pub fn strs<I, S>(items: I) -> Doc
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Doc::Arr(items.into_iter().map(|s| Doc::Str(s.into())).collect())
    }

    pub fn nums(items: &[f64]) -> Doc {
        Doc::Arr(items.iter().map(|&x| Doc::Num(x)).collect())
    }

    pub fn obj() -> Doc {
        Doc::Obj(Vec::new())
    }

    /// Appends a key to an object; panics on any other variant.
    pub fn with(mut self, key: &str, value: Doc) -> Doc {
        match &mut self {
            Doc::Obj(fields) => fields.push((key.to_string(), value)),
            _ => panic!("`with` on a non-object"),
        }
        self
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Doc::Arr(_) | Doc::Obj(_))
    }

    /// Canonical text, terminated by a newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Doc::Null => out.push_str("null"),
            Doc::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Doc::Num(x) => out.push_str(&format_number(*x)),
            Doc::Str(s) => out.push_str(&serde_json::to_string(s).expect("string encodes")),
            Doc::Arr(items) if items.is_empty() => out.push_str("[]"),
            Doc::Arr(items) if items.iter().all(Doc::is_scalar) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, indent);
                }
                out.push(']');
            }
            Doc::Arr(items) => {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
            Doc::Obj(fields) if fields.is_empty() => out.push_str("{}"),
            Doc::Obj(fields) => {
                out.push_str("{\n");
                for (i, (k, v)) in fields.iter().enumerate() {
                    pad(out, indent + 1);
                    out.push_str(&serde_json::to_string(k).expect("string encodes"));
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    out.push_str(if i + 1 < fields.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_nested_documents() {
        let d = Doc::obj()
            .with("a", Doc::Num(-0.0))
            .with("b", Doc::nums(&[0.5, 1e-7, 100.0]))
            .with("c", Doc::Arr(vec![Doc::obj().with("x", Doc::str("q\"")), Doc::Null]))
            .with("d", Doc::Arr(vec![]));
        let text = d.render();
        assert_eq!(
            text,
            "{\n  \"a\": 0,\n  \"b\": [0.5, 0.0000001, 100],\n  \"c\": [\n    {\n      \"x\": \"q\\\"\"\n    },\n    null\n  ],\n  \"d\": []\n}\n"
        );
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["b"][1], 1e-7);
    }
}
