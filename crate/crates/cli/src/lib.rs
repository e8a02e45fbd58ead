//! The `maid` command line.
//!
//! Every subcommand takes a model source, which is either a path to a model
//! file or `demo:<id>` for a bundled game. Exit codes: 0 success, 1 invalid
//! input, 2 usage error, 3 no pure equilibrium, 4 search cap exceeded.
//! `MAID_SEARCH_CAP` overrides the pure-profile search cap.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use maid_core::equilibrium::{DEFAULT_SEARCH_CAP, DEVIATION_TOLERANCE};
use maid_core::io::report::describe_profile;
use maid_core::io::{export_dot, parse_model_file, parse_profile, serialize_model, DotTarget, SolveReport};
use maid_core::{
    check_perfect_recall, enumerate_pure_ne, expected_utilities, format_number, nash_equilibrium, relevance_graph,
    scc_ordering, BundledModelId, EquilibriumError, Maid, SearchConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_PURE_EQUILIBRIUM: i32 = 3;
pub const EXIT_CAP_EXCEEDED: i32 = 4;

pub const CAP_ENV: &str = "MAID_SEARCH_CAP";

#[derive(Parser)]
#[command(name = "maid", version, about = "Solve and inspect multi-agent influence diagrams")]
struct Cli {
    /// Run every search on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and list every violation.
    Validate { model: String },
    /// Compute an equilibrium component by component.
    Solve {
        model: String,
        #[arg(long = "out", value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Expected utility of every agent under a strategy profile.
    Eu {
        model: String,
        #[arg(long)]
        profile: String,
    },
    /// Relevance graph, its components and perfect recall per agent.
    Relevance {
        model: String,
        /// Also write the relevance graph as DOT.
        #[arg(long)]
        dot: Option<String>,
    },
    /// Write the diagram as DOT.
    Export {
        model: String,
        #[arg(long)]
        dot: String,
    },
    /// Print or write a bundled model file.
    Demo {
        id: String,
        #[arg(long)]
        write: Option<String>,
    },
    /// List every pure equilibrium by exhaustive search.
    Oracle { model: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

/// Failure carrying its exit code and message.
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INVALID, msg.into())
}

impl From<EquilibriumError> for Failure {
    fn from(e: EquilibriumError) -> Self {
        let code = match e {
            EquilibriumError::NoPureEquilibrium { .. } => EXIT_NO_PURE_EQUILIBRIUM,
            EquilibriumError::SearchSpaceTooLarge { .. } => EXIT_CAP_EXCEEDED,
            _ => EXIT_INVALID,
        };
        Failure(code, e.to_string())
    }
}

fn bundled(id: &str) -> Result<BundledModelId, Failure> {
    id.parse().map_err(|_| {
        let ids: Vec<&str> = BundledModelId::ALL.iter().map(|i| i.as_str()).collect();
        usage(format!("unknown bundled model `{id}` (expected one of {})", ids.join(", ")))
    })
}

fn load_model(source: &str) -> Result<Maid, Failure> {
    if let Some(id) = source.strip_prefix("demo:") {
        return Ok(bundled(id)?.build());
    }
    let text = fs::read_to_string(source).map_err(|e| usage(format!("cannot read `{source}`: {e}")))?;
    parse_model_file(&text).map_err(|e| invalid(format!("{source}: {e}")))
}

fn write_file(path: &str, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write `{path}`: {e}")))
}

fn search_config(sequential: bool) -> Result<SearchConfig, Failure> {
    let cap = match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| usage(format!("{CAP_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => DEFAULT_SEARCH_CAP,
    };
    let mut cfg = SearchConfig { cap, ..SearchConfig::default() };
    if sequential {
        cfg.parallel = false;
    }
    Ok(cfg)
}

fn profile_lines(maid: &Maid, profile: &maid_core::StrategyProfile) -> String {
    let mut out = String::new();
    for d in describe_profile(maid, profile) {
        let rows: Vec<String> = d
            .rules
            .iter()
            .map(|r| {
                let act = r.action.clone().unwrap_or_else(|| "mixed".into());
                if r.context.is_empty() {
                    act
                } else {
                    format!("{}->{act}", r.context.join(","))
                }
            })
            .collect();
        if d.parents.is_empty() {
            let _ = writeln!(out, "    {} = {}", d.decision, rows.join(" "));
        } else {
            let _ = writeln!(out, "    {} ({}) = {}", d.decision, d.parents.join(","), rows.join(" "));
        }
    }
    out
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = search_config(cli.sequential)?;
    let mut text = String::new();
    match cli.command {
        Command::Validate { model } => {
            let m = load_model(&model)?;
            let _ = writeln!(
                text,
                "{model}: valid ({} nodes, {} agents, {} decisions)",
                m.len(),
                m.agents().len(),
                m.decisions().count()
            );
        }
        Command::Solve { model, out: format } => {
            let m = load_model(&model)?;
            let result = nash_equilibrium(&m, &cfg)?;
            let report = SolveReport::new(&m, &model, &result);
            text = match format {
                OutFormat::Json => report.to_json(),
                OutFormat::Text => report.to_text(),
            };
        }
        Command::Eu { model, profile } => {
            let m = load_model(&model)?;
            let doc = fs::read_to_string(&profile).map_err(|e| usage(format!("cannot read `{profile}`: {e}")))?;
            let p = parse_profile(&m, &doc).map_err(|e| invalid(format!("{profile}: {e}")))?;
            let eus = expected_utilities(&m, &p)?;
            for (a, v) in m.agents().iter().zip(eus) {
                let _ = writeln!(text, "{a}: {}", format_number(v));
            }
        }
        Command::Relevance { model, dot } => {
            let m = load_model(&model)?;
            let rg = relevance_graph(&m);
            let _ = writeln!(
                text,
                "relevance graph: {} decisions, {} edges",
                rg.nodes().len(),
                rg.num_edges()
            );
            for (a, b) in rg.edges() {
                let _ = writeln!(text, "  {} -> {}", m.name(a), m.name(b));
            }
            let ord = scc_ordering(&rg);
            text.push_str("components:\n");
            for (i, c) in ord.components.iter().enumerate() {
                let names: Vec<&str> = c.iter().map(|&d| m.name(d)).collect();
                let _ = writeln!(text, "  C{}: {{{}}}", i + 1, names.join(", "));
            }
            text.push_str("perfect recall:\n");
            for r in check_perfect_recall(&m).agents {
                match r.violation {
                    None => {
                        let order: Vec<&str> = r.order.iter().map(|&d| m.name(d)).collect();
                        let _ = writeln!(text, "  {}: holds [{}]", r.agent, order.join(", "));
                    }
                    Some((x, y)) => {
                        let _ = writeln!(text, "  {}: violated by {} before {}", r.agent, m.name(x), m.name(y));
                    }
                }
            }
            if let Some(path) = dot {
                write_file(&path, &export_dot(&m, DotTarget::RelevanceGraph))?;
            }
        }
        Command::Export { model, dot } => {
            let m = load_model(&model)?;
            write_file(&dot, &export_dot(&m, DotTarget::MaidDiagram))?;
            let _ = writeln!(text, "wrote {dot}");
        }
        Command::Demo { id, write } => {
            let doc = serialize_model(&bundled(&id)?.build());
            match write {
                Some(path) => {
                    write_file(&path, &doc)?;
                    let _ = writeln!(text, "wrote {path}");
                }
                None => text = doc,
            }
        }
        Command::Oracle { model } => {
            let m = load_model(&model)?;
            let all = enumerate_pure_ne(&m, &cfg)?;
            let _ = writeln!(
                text,
                "{} pure equilibri{} (deviation tolerance {})",
                all.len(),
                if all.len() == 1 { "um" } else { "a" },
                format_number(DEVIATION_TOLERANCE)
            );
            for (i, p) in all.iter().enumerate() {
                let eus = expected_utilities(&m, p)?;
                let eus: Vec<String> = m
                    .agents()
                    .iter()
                    .zip(eus)
                    .map(|(a, v)| format!("{a}={}", format_number(v)))
                    .collect();
                let _ = writeln!(text, "  #{}: {}", i + 1, eus.join(" "));
                text.push_str(&profile_lines(&m, p));
            }
        }
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Failure(EXIT_USAGE, format!("cannot write output: {e}")))
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run_command<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let stream: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(stream, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
