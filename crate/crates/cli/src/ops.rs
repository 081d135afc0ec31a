//! Engine calls behind each CLI subcommand and service endpoint.

use obdax_core::dimensions::{drill_down, roll_up, Chain};
use obdax_core::reformulate::{find_move, relax_moves, restrain_moves, Direction, RuleInstance};
use obdax_core::rewrite::{k_rewrite, rewrite};
use obdax_core::roles::TBoxClass;
use obdax_core::{parse_kb, parse_query, AnswerOptions, Answers, ConjunctiveQuery, KnowledgeBase, Method};

use crate::report::{split_token, Failure, Kind};

pub fn load_kb(text: &str, source: &str, version: u64) -> Result<KnowledgeBase, Failure> {
    let doc = parse_kb(text).map_err(|d| Failure::parse(source, &d))?;
    Ok(KnowledgeBase::new(doc, version))
}

pub fn load_query(text: &str, source: &str) -> Result<ConjunctiveQuery, Failure> {
    parse_query(text).map_err(|d| Failure::parse(source, &d))
}

/// Fails with the violated axioms when the knowledge base is inconsistent.
pub fn require_consistent(kb: &KnowledgeBase) -> Result<(), Failure> {
    let r = kb.consistency()?;
    if !r.consistent {
        return Err(obdax_core::ReasonError::InconsistentKB(r.violations.clone()).into());
    }
    Ok(())
}

pub fn answer(kb: &KnowledgeBase, q: &ConjunctiveQuery, method: Method, k: Option<i64>) -> Result<Answers, Failure> {
    let opts = AnswerOptions { method, k, ..kb.answer_options() };
    Ok(kb.answer(q, &opts)?)
}

/// The rewriting over the knowledge base's own signature. Recursive TBoxes
/// need `k` or a depth bound from the order constraints.
pub fn rewriting(kb: &KnowledgeBase, q: &ConjunctiveQuery, k: Option<i64>) -> Result<Vec<ConjunctiveQuery>, Failure> {
    let k = match (k, kb.classification.class) {
        (Some(k), _) => k,
        (None, TBoxClass::NonRecursive) => {
            return Ok(rewrite(q, &kb.tbox, &kb.rewrite_options)?.queries);
        }
        (None, _) => match kb.constraint_bound() {
            Some(k) => k as i64,
            None => return Err(Failure::message(Kind::Unsupported, "recursive TBox: pass -k or add covering order constraints")),
        },
    };
    let (rs, u) = k_rewrite(q, &kb.tbox, k, &kb.rewrite_options)?;
    Ok(rs.avoiding_roles(&u.fresh_roles).into_iter().cloned().collect())
}

pub fn moves(kb: &KnowledgeBase, q: &ConjunctiveQuery, direction: Direction, data_driven: bool) -> Result<Vec<RuleInstance>, Failure> {
    require_consistent(kb)?;
    Ok(match direction {
        Direction::Restrain => restrain_moves(kb, q, data_driven)?,
        Direction::Relax => relax_moves(kb, q, data_driven)?,
    })
}

/// Applies the move named by `token`: a content hash, optionally with the
/// version it was computed against.
pub fn apply(kb: &KnowledgeBase, q: &ConjunctiveQuery, token: &str) -> Result<ConjunctiveQuery, Failure> {
    let (id, version) = split_token(token);
    if version.is_some_and(|v| v != kb.version) {
        return Err(Failure::message(Kind::Stale, format!("move {token} was computed for another knowledge base version")));
    }
    require_consistent(kb)?;
    match find_move(kb, q, id)? {
        Some(m) => Ok(m.result),
        None => Err(Failure::message(Kind::NotFound, format!("no move {token} for this query"))),
    }
}

pub fn navigate(kb: &KnowledgeBase, q: &ConjunctiveQuery, var: &str, direction: &str) -> Result<Vec<Chain>, Failure> {
    let var = var.trim_start_matches('?');
    require_consistent(kb)?;
    Ok(match direction {
        "up" => roll_up(kb, q, var)?,
        "down" => drill_down(kb, q, var)?,
        other => return Err(Failure::message(Kind::Diagnostics, format!("unknown direction `{other}`, expected up or down"))),
    })
}
