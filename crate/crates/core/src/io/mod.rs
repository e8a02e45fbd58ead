//! Model files, DOT diagrams, solve reports and strategy-profile files.

mod doc;
pub mod dot;
pub mod model_file;
pub mod report;

pub use doc::Doc;
pub use dot::{export_dot, DotTarget};
pub use model_file::{parse_model_file, serialize_model, ModelFileError, FORMAT_VERSION};
pub use report::{parse_profile, ProfileError, RuleEntry, SolveReport};
