//! The `obdax` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use obdax_core::reformulate::Direction;
use obdax_core::roles::TBoxClass;
use obdax_core::syntax::{answers_json, answers_text, serialize_query, serialize_ucq};
use obdax_core::{KnowledgeBase, Method};

use crate::ops;
use crate::report::{move_token, Failure, Kind};

#[derive(Parser, Debug)]
#[command(name = "obdax", version, about = "Query answering and exploration over DL-Lite knowledge bases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a knowledge base and report its class, consistency and admissibility.
    Check {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Print the rewriting of a query.
    Rewrite {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(short)]
        k: Option<i64>,
    },
    /// Print the certain answers of a query.
    Answer {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(short)]
        k: Option<i64>,
        #[arg(long)]
        json: bool,
    },
    /// List the one-step reformulations of a query.
    Moves {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Include data-driven moves.
        #[arg(long)]
        data: bool,
    },
    /// Apply a move listed by `moves` and print the resulting query.
    Apply {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long = "move")]
        move_id: String,
    },
    /// Roll a dimension variable up or drill it down.
    Navigate {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        var: String,
        #[arg(long, value_enum)]
        direction: NavArg,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        kb: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MethodArg {
    Auto,
    Rewrite,
    KRewrite,
    SmallModel,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Rewrite => Method::Rewrite,
            MethodArg::KRewrite => Method::KRewrite,
            MethodArg::SmallModel => Method::SmallModel,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum DirectionArg {
    Relax,
    Restrain,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum NavArg {
    Up,
    Down,
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            for line in &f.lines {
                let _ = writeln!(err, "{line}");
            }
            f.kind.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::message(Kind::Diagnostics, format!("{}: {e}", path.display())))
}

fn kb_at(path: &Path) -> Result<KnowledgeBase, Failure> {
    ops::load_kb(&read(path)?, &path.display().to_string(), 1)
}

fn inputs(kb: &Path, query: &Path) -> Result<(KnowledgeBase, obdax_core::ConjunctiveQuery), Failure> {
    let kb = kb_at(kb)?;
    let q = ops::load_query(&read(query)?, &query.display().to_string())?;
    Ok((kb, q))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::message(Kind::Diagnostics, e.to_string()))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Check { kb } => {
            let kb = kb_at(&kb)?;
            check(&kb, out)
        }
        Command::Rewrite { kb, query, k } => {
            let (kb, q) = inputs(&kb, &query)?;
            let ucq = ops::rewriting(&kb, &q, k)?;
            emit(out, &serialize_ucq(&ucq))
        }
        Command::Answer { kb, query, method, k, json } => {
            let (kb, q) = inputs(&kb, &query)?;
            let a = ops::answer(&kb, &q, method.into(), k)?;
            if json {
                let mut v = answers_json(&a);
                v["rewriting_size"] = a.rewriting_size.into();
                v["k"] = a.k.into();
                emit(out, &format!("{v}\n"))
            } else {
                emit(out, &answers_text(&a.answers))
            }
        }
        Command::Moves { kb, query, direction, data } => {
            let (kb, q) = inputs(&kb, &query)?;
            let direction = match direction {
                DirectionArg::Relax => Direction::Relax,
                DirectionArg::Restrain => Direction::Restrain,
            };
            let mut text = String::new();
            for m in ops::moves(&kb, &q, direction, data)? {
                text.push_str(&format!("{}  {}\n    {}\n", move_token(&m), m.description(), serialize_query(&m.result)));
            }
            emit(out, &text)
        }
        Command::Apply { kb, query, move_id } => {
            let (kb, q) = inputs(&kb, &query)?;
            let r = ops::apply(&kb, &q, &move_id)?;
            emit(out, &format!("{}\n", serialize_query(&r)))
        }
        Command::Navigate { kb, query, var, direction } => {
            let (kb, q) = inputs(&kb, &query)?;
            let direction = match direction {
                NavArg::Up => "up",
                NavArg::Down => "down",
            };
            let mut text = String::new();
            for c in ops::navigate(&kb, &q, &var, direction)? {
                text.push_str(&format!(
                    "{} -> {}\n    {}\n",
                    c.from_category.join("/"),
                    c.to_category.join("/"),
                    serialize_query(&c.result)
                ));
            }
            emit(out, &text)
        }
        Command::Serve { port, kb } => {
            let preload = match kb {
                Some(p) => Some(ops::load_kb(&read(&p)?, &p.display().to_string(), 1)?),
                None => None,
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::message(Kind::Diagnostics, e.to_string()))?;
            rt.block_on(crate::service::serve(port, preload, out))
                .map_err(|e| Failure::message(Kind::Diagnostics, e.to_string()))
        }
    }
}

/// Prints `class: …; consistent; admissible; k=N`, failing with exit code
/// 2 on an inconsistent knowledge base.
fn check(kb: &KnowledgeBase, out: &mut dyn Write) -> Result<(), Failure> {
    let mut parts = vec![format!("class: {}", kb.classification.class)];
    if kb.classification.class == TBoxClass::GeneralHR {
        emit(out, &format!("{}\n", parts[0]))?;
        let mut f = Failure::message(Kind::Unsupported, "TBox is outside the supported fragment");
        f.lines.extend(kb.classification.violations.iter().cloned());
        return Err(f);
    }
    let report = kb.consistency()?;
    if !report.consistent {
        emit(out, &format!("{}; inconsistent\n", parts[0]))?;
        ops::require_consistent(kb)?;
    }
    parts.push("consistent".into());
    if let Some(adm) = kb.admissibility() {
        parts.push(if adm.admissible { "admissible" } else { "not admissible" }.into());
    }
    if let Some(k) = kb.constraint_bound() {
        parts.push(format!("k={k}"));
    }
    emit(out, &format!("{}\n", parts.join("; ")))
}
