//! An immutable knowledge base snapshot with cached reasoning results.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::dimensions::{check_admissibility, covers, ell, AdmissibilityReport, OrderConstraint};
use crate::interp::AnswerSet;
use crate::kb::{is_generated_name, normalize, signature_of, ABox, Signature, TBox};
use crate::model::{certain_answers, check_consistency, instance_answers, AnswerOptions, Answers, ConsistencyReport, ReasonError};
use crate::query::{canonicalize, Atom, ConjunctiveQuery, Term};
use crate::rewrite::RewriteOptions;
use crate::roles::{classify, Classification};
use crate::syntax::KbDocument;

pub struct KnowledgeBase {
    /// The knowledge base as written.
    pub document: KbDocument,
    /// The normalized TBox used for reasoning.
    pub tbox: TBox,
    pub abox: ABox,
    pub constraints: Vec<OrderConstraint>,
    pub classification: Classification,
    pub version: u64,
    pub rewrite_options: RewriteOptions,
    user_signature: Signature,
    consistency: OnceLock<Result<ConsistencyReport, ReasonError>>,
    admissibility: OnceLock<Option<AdmissibilityReport>>,
    answers: Mutex<HashMap<ConjunctiveQuery, Result<AnswerSet, ReasonError>>>,
}

impl std::fmt::Debug for KnowledgeBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KnowledgeBase").field("version", &self.version).finish_non_exhaustive()
    }
}

impl KnowledgeBase {
    pub fn new(document: KbDocument, version: u64) -> Self {
        Self::with_options(document, version, RewriteOptions::default())
    }

    pub fn with_options(document: KbDocument, version: u64, rewrite_options: RewriteOptions) -> Self {
        let user_signature = signature_of(&document.tbox, &document.abox);
        let tbox = normalize(&document.tbox, &user_signature);
        let classification = classify(&tbox);
        KnowledgeBase {
            abox: document.abox.clone(),
            constraints: document.constraints.clone(),
            document,
            tbox,
            classification,
            version,
            rewrite_options,
            user_signature,
            consistency: OnceLock::new(),
            admissibility: OnceLock::new(),
            answers: Mutex::new(HashMap::new()),
        }
    }

    /// Concept and role names written by the user.
    pub fn user_signature(&self) -> &Signature {
        &self.user_signature
    }

    pub fn user_concepts(&self) -> impl Iterator<Item = &String> {
        self.user_signature.concepts.iter().filter(|n| !is_generated_name(n))
    }

    pub fn user_roles(&self) -> impl Iterator<Item = &String> {
        self.user_signature.roles.iter().filter(|n| !is_generated_name(n))
    }

    pub fn consistency(&self) -> Result<&ConsistencyReport, ReasonError> {
        self.consistency
            .get_or_init(|| check_consistency(&self.tbox, &self.abox, &self.rewrite_options))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Admissibility of the order constraints, if there are any.
    pub fn admissibility(&self) -> Option<&AdmissibilityReport> {
        self.admissibility
            .get_or_init(|| {
                if self.constraints.is_empty() {
                    return None;
                }
                check_admissibility(&self.tbox, &self.abox, &self.constraints).ok()
            })
            .as_ref()
    }

    /// The depth granted by covering, admissible order constraints.
    pub fn constraint_bound(&self) -> Option<usize> {
        if self.classification.guard_sets.is_empty() || !covers(&self.constraints, &self.tbox).covered {
            return None;
        }
        if !self.admissibility()?.admissible {
            return None;
        }
        ell(&self.constraints).ok()
    }

    pub fn answer_options(&self) -> AnswerOptions {
        AnswerOptions {
            k_hint: self.constraint_bound().map(|k| k as i64),
            rewrite: self.rewrite_options,
            ..Default::default()
        }
    }

    /// Certain answers with explicit options.
    pub fn answer(&self, q: &ConjunctiveQuery, opts: &AnswerOptions) -> Result<Answers, ReasonError> {
        let mut opts = opts.clone();
        if opts.k_hint.is_none() {
            opts.k_hint = self.constraint_bound().map(|k| k as i64);
        }
        certain_answers(q, &self.tbox, &self.abox, &opts)
    }

    /// Certain answers under the default dispatch, memoized per query.
    pub fn certain(&self, q: &ConjunctiveQuery) -> Result<AnswerSet, ReasonError> {
        let mut key = canonicalize(q);
        key.name = "q".into();
        if let Some(r) = self.answers.lock().unwrap().get(&key) {
            return r.clone();
        }
        let report = self.consistency()?;
        if !report.consistent {
            return Err(ReasonError::InconsistentKB(report.violations.clone()));
        }
        let r = if key.is_instance_query() {
            instance_answers(&key, &self.tbox, &self.abox, &self.rewrite_options)
        } else {
            self.answer(&key, &self.answer_options()).map(|a| a.answers)
        };
        self.answers.lock().unwrap().insert(key, r.clone());
        r
    }

    /// Whether the certain answers of `q1` are among those of `q2`.
    pub fn contained(&self, q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> Result<bool, ReasonError> {
        Ok(self.certain(q1)?.is_subset(&self.certain(q2)?))
    }
}

/// Whether `q` is `A(x)` or `r(x,y), B(y)` with answer variable `x`.
pub fn is_containment_shape(q: &ConjunctiveQuery) -> bool {
    let [x] = q.answer_vars.as_slice() else { return false };
    match q.atoms.as_slice() {
        [Atom::Concept(_, Term::Var(v))] => v == x,
        [Atom::Role(_, Term::Var(v), Term::Var(y)), Atom::Concept(_, Term::Var(y2))] => v == x && y == y2 && y != x,
        _ => false,
    }
}

/// Containment of certain answers over a knowledge base, for the query
/// shapes used by data-driven reformulation.
pub fn query_containment_k(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery, kb: &KnowledgeBase) -> Result<bool, ReasonError> {
    for q in [q1, q2] {
        if !is_containment_shape(q) {
            return Err(ReasonError::UnsupportedShape(q.to_string()));
        }
    }
    kb.contained(q1, q2)
}
