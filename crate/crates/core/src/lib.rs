//! Reasoning over DL-Lite knowledge bases with role hierarchies and
//! complex role inclusions: query rewriting, consistency, certain answers,
//! query reformulation and dimensional navigation.

pub mod chase;
pub mod dimensions;
pub mod engine;
pub mod interp;
pub mod kb;
pub mod model;
pub mod query;
pub mod reformulate;
pub mod rewrite;
pub mod roles;
pub mod syntax;

pub use engine::KnowledgeBase;
pub use interp::AnswerSet;
pub use kb::{ABox, Assertion, Axiom, BasicConcept, Role, TBox};
pub use model::{AnswerOptions, Answers, Method, ReasonError};
pub use query::{Atom, ConjunctiveQuery, Term};
pub use syntax::{parse_kb, parse_query, Diagnostic, KbDocument};
