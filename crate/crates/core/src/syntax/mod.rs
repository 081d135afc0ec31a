//! Text formats for knowledge bases, queries and answers.
//!
//! A knowledge base is a sequence of statements, each ending in `.`:
//!
//! ```text
//! # inclusions
//! Concert sub CulturEvent.
//! exists occursIn- sub Location.
//! partOf sub locatedIn.
//! occursIn o locatedIn sub occursIn.
//! disjoint Concert Exhibition.
//! disjointRole hosts partOf.
//! simple locatedIn.
//! ord locatedIn { Venue < City < Country }.
//! # assertions
//! City(Vienna).
//! locatedIn(Vienna, Austria).
//! ```
//!
//! Concept names start with an upper-case letter and role names with a
//! lower-case one (leading underscores are ignored). Any name may be
//! written in double quotes. A query reads
//! `q(?x) :- Concert(?x), occursIn(?x,?y), ?y = Vienna.`

mod lexer;
mod parser;
mod print;

use std::fmt;

pub use parser::{parse_kb, parse_query, parse_ucq, KbDocument};
pub use print::{
    answers_json, answers_text, quote_name, serialize_abox, serialize_atom, serialize_axiom, serialize_constraint, serialize_kb,
    serialize_query, serialize_tbox, serialize_term, serialize_ucq,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub end_column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic { span, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)
    }
}

/// Whether an identifier denotes a concept by the naming convention.
pub fn is_concept_like(name: &str) -> bool {
    name.trim_start_matches('_').chars().next().is_some_and(|c| c.is_uppercase())
}
