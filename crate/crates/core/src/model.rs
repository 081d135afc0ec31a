//! Small models, consistency checking and certain answers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::interp::{evaluate, evaluate_individuals, AnswerSet, Interpretation};
use crate::kb::{ABox, Axiom, BasicConcept, Role, TBox};
use crate::query::{concept_atoms, Atom, ConjunctiveQuery, FreshVars, Term};
use crate::rewrite::{k_rewrite, rewrite, RewriteError, RewriteOptions};
use crate::roles::{check_k_bounded, classify, longest_guard_path, Boundedness, Classification, TBoxClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonError {
    #[error("knowledge base is inconsistent: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InconsistentKB(Vec<Violation>),
    #[error("ABox is not known to be bounded for the recursive roles")]
    UnboundedOrUnknown,
    #[error("unsupported fragment: {0}")]
    UnsupportedFragment(String),
    #[error("the small-model method needs a single-atom query over answer variables")]
    NotInstanceQuery,
    #[error("containment is only decided for `A(x)` and `r(x,y), B(y)` shapes: {0}")]
    UnsupportedShape(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// Whether the small model is a faithful model for `class`.
pub fn small_model_applies(class: &Classification) -> bool {
    class.class != TBoxClass::GeneralHR && class.guards_unreachable()
}

fn anon_label(kind: &str, a: Option<&str>, r: &Role) -> String {
    match a {
        Some(a) => format!("{kind}[{a},{r}]"),
        None => format!("{kind}[{r}]"),
    }
}

/// Builds the small model of `(t, a)`: the ABox individuals, one witness
/// `c[a,r]` per individual and existential role, and one shared witness
/// `c[r]` per existential role, closed under the TBox.
pub fn build_small_model(t: &TBox, a: &ABox) -> Interpretation {
    let mut i = Interpretation::from_abox(a);
    let individuals: Vec<usize> = i.elements().collect();
    let mut ex_roles: BTreeSet<Role> = BTreeSet::new();
    for ax in &t.axioms {
        if let Axiom::ConceptInc(_, BasicConcept::Exists(r)) = ax {
            ex_roles.insert(r.clone());
        }
    }
    let mut per_ind = std::collections::HashMap::new();
    for &d in &individuals {
        for r in &ex_roles {
            let label = anon_label("c", Some(i.name(d)), r);
            let e = i.add_anonymous(label);
            per_ind.insert((d, r.clone()), e);
        }
    }
    let mut shared = std::collections::HashMap::new();
    for r in &ex_roles {
        let e = i.add_anonymous(anon_label("c", None, r));
        shared.insert(r.clone(), e);
    }

    loop {
        let mut changed = false;
        for ax in &t.axioms {
            match ax {
                Axiom::ConceptInc(b1, b2) => {
                    let members = i.members(b1);
                    for d in members {
                        match b2 {
                            BasicConcept::Name(n) => changed |= i.add_concept(n, d),
                            BasicConcept::Exists(r) => {
                                let filler = if i.is_individual(d) { per_ind[&(d, r.clone())] } else { shared[r] };
                                changed |= i.add_role_expr(r, d, filler);
                            }
                            BasicConcept::Top | BasicConcept::Bot => {}
                        }
                    }
                }
                Axiom::RoleInc(r, s) => {
                    for (x, y) in i.role_pairs(r) {
                        changed |= i.add_role_expr(s, x, y);
                    }
                }
                Axiom::Cri(r, s, u) => {
                    let mut new = Vec::new();
                    for (x, y) in i.role_pairs(r) {
                        for &z in i.successors(s, y) {
                            new.push((x, z));
                        }
                    }
                    for (x, z) in new {
                        changed |= i.add_role_expr(u, x, z);
                    }
                }
                Axiom::DisjConcepts(..) | Axiom::DisjRoles(..) => {}
            }
        }
        if !changed {
            return i;
        }
    }
}

/// A disjointness axiom violated by the knowledge base, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by ({})", self.axiom, self.witness.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violations: Vec<Violation>,
}

/// Disjointness violations in a given interpretation.
pub fn violations_in(t: &TBox, i: &Interpretation) -> Vec<Violation> {
    let mut out = Vec::new();
    for ax in &t.axioms {
        match ax {
            Axiom::DisjConcepts(b1, b2) => {
                if let Some(d) = i.members(b1).into_iter().find(|&d| i.is_member(b2, d)) {
                    out.push(Violation { axiom: ax.clone(), witness: vec![i.name(d).to_string()] });
                }
            }
            Axiom::DisjRoles(r, s) => {
                if let Some((x, y)) = i.role_pairs(r).into_iter().find(|&(x, y)| i.successors(s, x).contains(&y)) {
                    out.push(Violation {
                        axiom: ax.clone(),
                        witness: vec![i.name(x).to_string(), i.name(y).to_string()],
                    });
                }
            }
            Axiom::ConceptInc(b, BasicConcept::Bot) => {
                if let Some(d) = i.members(b).into_iter().next() {
                    out.push(Violation { axiom: ax.clone(), witness: vec![i.name(d).to_string()] });
                }
            }
            _ => {}
        }
    }
    out
}

/// The Boolean query that holds exactly when `ax` is violated.
pub fn violation_query(ax: &Axiom) -> Option<ConjunctiveQuery> {
    let x = Term::var("x");
    let mut fresh = FreshVars::avoiding("y", ["x".to_string()].into());
    let atoms = match ax {
        Axiom::DisjConcepts(b1, b2) => {
            let mut v = concept_atoms(b1, &x, &mut fresh);
            v.extend(concept_atoms(b2, &x, &mut fresh));
            v
        }
        Axiom::ConceptInc(b, BasicConcept::Bot) => concept_atoms(b, &x, &mut fresh),
        Axiom::DisjRoles(r, s) => {
            let y = Term::var("y");
            vec![Atom::for_role(r, x.clone(), y.clone()), Atom::for_role(s, x, y)]
        }
        _ => return None,
    };
    if atoms.is_empty() {
        return None;
    }
    Some(ConjunctiveQuery::new(vec![], atoms))
}

/// Decides satisfiability of `(t, a)`.
///
/// TBoxes with recursive role inclusions are checked on the small model;
/// others by rewriting one violation query per disjointness axiom.
pub fn check_consistency(t: &TBox, a: &ABox, opts: &RewriteOptions) -> Result<ConsistencyReport, ReasonError> {
    let class = classify(t);
    match class.class {
        TBoxClass::GeneralHR => Err(ReasonError::UnsupportedFragment(class.violations.join("; "))),
        TBoxClass::RecursionSafe => Ok(consistency_by_small_model(t, a)),
        TBoxClass::NonRecursive => consistency_by_rewriting(t, a, opts),
    }
}

pub fn consistency_by_small_model(t: &TBox, a: &ABox) -> ConsistencyReport {
    let violations = violations_in(t, &build_small_model(t, a));
    ConsistencyReport { consistent: violations.is_empty(), violations }
}

pub fn consistency_by_rewriting(t: &TBox, a: &ABox, opts: &RewriteOptions) -> Result<ConsistencyReport, ReasonError> {
    let data = Interpretation::from_abox(a);
    let mut violations = Vec::new();
    for ax in &t.axioms {
        let Some(vq) = violation_query(ax) else { continue };
        let rs = rewrite(&vq, t, opts)?;
        for q in &rs.queries {
            let mut witness_q = q.clone();
            witness_q.answer_vars = q.vars().into_iter().collect();
            if let Some(tuple) = evaluate(&witness_q, &data).tuples.into_iter().next() {
                violations.push(Violation { axiom: ax.clone(), witness: tuple });
                break;
            }
        }
    }
    Ok(ConsistencyReport { consistent: violations.is_empty(), violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    #[default]
    Auto,
    Rewrite,
    KRewrite,
    SmallModel,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::Rewrite => "rewrite",
            Method::KRewrite => "k-rewrite",
            Method::SmallModel => "small-model",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Method::Auto),
            "rewrite" => Ok(Method::Rewrite),
            "k-rewrite" => Ok(Method::KRewrite),
            "small-model" => Ok(Method::SmallModel),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnswerOptions {
    pub method: Method,
    /// Unfolding depth to use for recursive roles.
    pub k: Option<i64>,
    /// A depth believed to bound the ABox, e.g. from order constraints.
    /// It is verified before use.
    pub k_hint: Option<i64>,
    pub rewrite: RewriteOptions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answers {
    pub answers: AnswerSet,
    pub method: Method,
    /// False only when a caller-supplied `k` could not be shown to bound
    /// the ABox.
    pub exact: bool,
    pub rewriting_size: usize,
    pub k: Option<i64>,
}

/// Certain answers of `q` over `(t, a)`, restricted to ABox individuals.
pub fn certain_answers(
    q: &ConjunctiveQuery,
    t: &TBox,
    a: &ABox,
    opts: &AnswerOptions,
) -> Result<Answers, ReasonError> {
    let class = classify(t);
    if class.class == TBoxClass::GeneralHR {
        return Err(ReasonError::UnsupportedFragment(class.violations.join("; ")));
    }
    let report = check_consistency(t, a, &opts.rewrite)?;
    if !report.consistent {
        return Err(ReasonError::InconsistentKB(report.violations));
    }
    let method = match opts.method {
        Method::Auto => {
            if q.is_instance_query() && small_model_applies(&class) {
                Method::SmallModel
            } else if class.class == TBoxClass::NonRecursive {
                Method::Rewrite
            } else {
                Method::KRewrite
            }
        }
        m => m,
    };
    let parts = components(q);
    if method == Method::SmallModel || parts.len() < 2 {
        return answer_connected(q, t, a, &class, method, opts);
    }
    // Variable-disjoint parts are answered separately and joined.
    let mut rows: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    let mut total = Answers { answers: AnswerSet::empty(0), method, exact: true, rewriting_size: 0, k: None };
    for part in &parts {
        let ans = answer_connected(part, t, a, &class, method, opts)?;
        total.method = ans.method;
        total.exact &= ans.exact;
        total.rewriting_size += ans.rewriting_size;
        total.k = total.k.or(ans.k);
        let mut next = Vec::new();
        for row in &rows {
            for tuple in &ans.answers.tuples {
                let mut r = row.clone();
                r.extend(part.answer_vars.iter().cloned().zip(tuple.iter().cloned()));
                next.push(r);
            }
        }
        rows = next;
    }
    let mut answers = AnswerSet::empty(q.answer_vars.len());
    for row in rows {
        answers.tuples.insert(q.answer_vars.iter().map(|v| row[v].clone()).collect());
    }
    total.answers = answers;
    Ok(total)
}

/// Splits `q` into parts sharing no variable.
fn components(q: &ConjunctiveQuery) -> Vec<ConjunctiveQuery> {
    let mut groups: Vec<(BTreeSet<String>, Vec<Atom>)> = Vec::new();
    for atom in &q.atoms {
        let vars: BTreeSet<String> = atom.terms().iter().filter_map(|t| t.as_var().map(str::to_string)).collect();
        let mut merged = (vars, vec![atom.clone()]);
        let mut i = 0;
        while i < groups.len() {
            if groups[i].0.is_disjoint(&merged.0) {
                i += 1;
            } else {
                let (vs, atoms) = groups.remove(i);
                merged.0.extend(vs);
                merged.1.splice(0..0, atoms);
            }
        }
        groups.push(merged);
    }
    groups
        .into_iter()
        .map(|(vars, atoms)| {
            let answer = q.answer_vars.iter().filter(|v| vars.contains(*v)).cloned().collect();
            ConjunctiveQuery { name: q.name.clone(), answer_vars: answer, atoms }
        })
        .collect()
}

fn answer_connected(
    q: &ConjunctiveQuery,
    t: &TBox,
    a: &ABox,
    class: &Classification,
    method: Method,
    opts: &AnswerOptions,
) -> Result<Answers, ReasonError> {
    match method {
        Method::SmallModel => {
            if !q.is_instance_query() {
                return Err(ReasonError::NotInstanceQuery);
            }
            if !small_model_applies(class) {
                return Err(ReasonError::UnsupportedFragment(
                    "an existential axiom reaches the middle role of a complex role inclusion".into(),
                ));
            }
            let m = build_small_model(t, a);
            Ok(Answers { answers: evaluate_individuals(q, &m), method, exact: true, rewriting_size: 1, k: None })
        }
        Method::Rewrite => {
            let rs = rewrite(q, t, &opts.rewrite)?;
            let data = Interpretation::from_abox(a);
            let mut answers = AnswerSet::empty(q.answer_vars.len());
            for cq in &rs.queries {
                answers.extend(evaluate_individuals(cq, &data));
            }
            Ok(Answers { answers, method, exact: true, rewriting_size: rs.len(), k: None })
        }
        Method::KRewrite | Method::Auto => {
            let (k, exact) = choose_k(t, a, class, opts)?;
            let (rs, unfolding) = k_rewrite(q, t, k, &opts.rewrite)?;
            let data = Interpretation::from_abox(a);
            let mut answers = AnswerSet::empty(q.answer_vars.len());
            let relevant = rs.avoiding_roles(&unfolding.fresh_roles);
            for cq in &relevant {
                answers.extend(evaluate_individuals(cq, &data));
            }
            Ok(Answers { answers, method: Method::KRewrite, exact, rewriting_size: rs.len(), k: Some(k) })
        }
    }
}

fn choose_k(t: &TBox, a: &ABox, class: &Classification, opts: &AnswerOptions) -> Result<(i64, bool), ReasonError> {
    if let Some(k) = opts.k {
        let bounded = check_k_bounded(t, a, k).map_err(|e| RewriteError::InvalidK(e.0))?;
        return Ok((k, bounded == Boundedness::Bounded));
    }
    if let Some(k) = opts.k_hint {
        if k > 0 && check_k_bounded(t, a, k) == Ok(Boundedness::Bounded) {
            return Ok((k, true));
        }
    }
    match longest_guard_path(t, a, class) {
        Some((len, _)) => Ok((len.max(1) as i64, true)),
        None => Err(ReasonError::UnboundedOrUnknown),
    }
}

/// Answers of a single-atom query over answer variables, through the small
/// model when it applies and by rewriting otherwise.
pub fn instance_answers(q: &ConjunctiveQuery, t: &TBox, a: &ABox, opts: &RewriteOptions) -> Result<AnswerSet, ReasonError> {
    let class = classify(t);
    if small_model_applies(&class) && q.is_instance_query() {
        return Ok(evaluate_individuals(q, &build_small_model(t, a)));
    }
    let o = AnswerOptions { rewrite: *opts, ..Default::default() };
    certain_answers(q, t, a, &o).map(|r| r.answers)
}
