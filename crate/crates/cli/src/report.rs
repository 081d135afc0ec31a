//! Error classification and JSON views shared by the CLI and the service.

use obdax_core::dimensions::{dimension_report, AdmissibilityReport, Chain, DimensionError};
use obdax_core::reformulate::RuleInstance;
use obdax_core::rewrite::RewriteError;
use obdax_core::syntax::serialize_query;
use obdax_core::{Diagnostic, KnowledgeBase, ReasonError};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Diagnostics,
    Inconsistent,
    Unsupported,
    /// A move computed against another knowledge base version.
    Stale,
    NotFound,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Diagnostics | Kind::Stale | Kind::NotFound => 1,
            Kind::Inconsistent => 2,
            Kind::Unsupported => 3,
        }
    }
}

/// A failure with the lines to report.
#[derive(Debug, Clone)]
pub struct Failure {
    pub kind: Kind,
    pub lines: Vec<String>,
}

impl Failure {
    pub fn diagnostics(lines: Vec<String>) -> Self {
        Failure { kind: Kind::Diagnostics, lines }
    }

    pub fn message(kind: Kind, msg: impl Into<String>) -> Self {
        Failure { kind, lines: vec![msg.into()] }
    }

    pub fn parse(source: &str, diags: &[Diagnostic]) -> Self {
        Failure::diagnostics(diags.iter().map(|d| format!("{source}:{d}")).collect())
    }
}

impl From<ReasonError> for Failure {
    fn from(e: ReasonError) -> Self {
        let kind = match &e {
            ReasonError::InconsistentKB(v) => {
                let mut lines = vec!["knowledge base is inconsistent".to_string()];
                lines.extend(v.iter().map(|v| format!("violated: {v}")));
                return Failure { kind: Kind::Inconsistent, lines };
            }
            ReasonError::UnsupportedFragment(_) | ReasonError::UnboundedOrUnknown => Kind::Unsupported,
            ReasonError::Rewrite(r) => return r.clone().into(),
            ReasonError::NotInstanceQuery | ReasonError::UnsupportedShape(_) => Kind::Diagnostics,
        };
        Failure::message(kind, e.to_string())
    }
}

impl From<RewriteError> for Failure {
    fn from(e: RewriteError) -> Self {
        let kind = match e {
            RewriteError::RecursiveTBox(_) | RewriteError::NotRecursionSafe => Kind::Unsupported,
            RewriteError::CapExceeded { .. } | RewriteError::InvalidK(_) => Kind::Diagnostics,
        };
        Failure::message(kind, e.to_string())
    }
}

impl From<DimensionError> for Failure {
    fn from(e: DimensionError) -> Self {
        match e {
            DimensionError::Reason(r) => r.into(),
            e => Failure::message(Kind::Diagnostics, e.to_string()),
        }
    }
}

pub fn diagnostics_json(diags: &[Diagnostic]) -> Value {
    Value::Array(
        diags
            .iter()
            .map(|d| json!({"line": d.span.line, "column": d.span.column, "end_column": d.span.end_column, "message": d.message}))
            .collect(),
    )
}

fn admissibility_json(r: &AdmissibilityReport) -> Value {
    json!({
        "admissible": r.admissible,
        "verdicts": r.verdicts,
        "failures": r.failures.iter().map(|f| json!({
            "constraint": f.constraint,
            "role": f.role,
            "condition": f.condition,
            "pair": [f.pair.0, f.pair.1],
        })).collect::<Vec<_>>(),
    })
}

/// Class, consistency, admissibility and depth bound of a knowledge base.
pub fn kb_json(kb: &KnowledgeBase) -> Value {
    let (consistent, violations) = match kb.consistency() {
        Ok(r) => (json!(r.consistent), r.violations.iter().map(|v| v.to_string()).collect()),
        Err(e) => (Value::Null, vec![e.to_string()]),
    };
    let dims = dimension_report(kb);
    json!({
        "version": kb.version,
        "class": kb.classification.class.to_string(),
        "consistent": consistent,
        "violations": violations,
        "admissibility": kb.admissibility().map(admissibility_json),
        "covers": dims.covers.covered,
        "ell": dims.ell,
        "k": kb.constraint_bound(),
    })
}

/// The summary view: [`kb_json`] plus the signature and sizes.
pub fn summary_json(kb: &KnowledgeBase) -> Value {
    let mut v = kb_json(kb);
    let extra = json!({
        "concepts": kb.user_concepts().collect::<Vec<_>>(),
        "roles": kb.user_roles().collect::<Vec<_>>(),
        "recursive_roles": kb.classification.recursive_roles,
        "class_violations": kb.classification.violations,
        "axioms": kb.document.tbox.axioms.len(),
        "assertions": kb.abox.assertions.len(),
        "constraints": kb.constraints.len(),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

/// Move ids carry the knowledge base version after the content hash.
pub fn move_token(m: &RuleInstance) -> String {
    format!("{}.v{}", m.id, m.version)
}

/// Splits a move token into content hash and version.
pub fn split_token(token: &str) -> (&str, Option<u64>) {
    match token.rsplit_once(".v") {
        Some((id, v)) => match v.parse() {
            Ok(v) => (id, Some(v)),
            Err(_) => (token, None),
        },
        None => (token, None),
    }
}

pub fn move_json(m: &RuleInstance) -> Value {
    json!({
        "id": move_token(m),
        "rule": m.rule.to_string(),
        "direction": m.direction.to_string(),
        "data_driven": m.data_driven,
        "description": m.description(),
        "justification": m.justification.to_string(),
        "result_query": serialize_query(&m.result),
    })
}

pub fn chain_json(c: &Chain) -> Value {
    json!({
        "moves": c.moves.iter().map(move_json).collect::<Vec<_>>(),
        "result_query": serialize_query(&c.result),
        "from_category": c.from_category,
        "to_category": c.to_category,
    })
}
