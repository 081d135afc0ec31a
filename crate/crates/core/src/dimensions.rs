//! Order constraints over dimension roles, and roll-up/drill-down
//! navigation along them.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::engine::KnowledgeBase;
use crate::interp::{evaluate, Interpretation};
use crate::kb::{ABox, Assertion, Axiom, Role, TBox};
use crate::model::{build_small_model, consistency_by_small_model, small_model_applies, ReasonError};
use crate::query::{Atom, ConjunctiveQuery, Term};
use crate::reformulate::{moves_of, Direction, Justification, RuleId, RuleInstance};
use crate::roles::classify;

/// `ord(s, A, ≺)`: the role `s` only links members of `A` upward in `≺`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderConstraint {
    pub role: String,
    pub concepts: BTreeSet<String>,
    /// The pairs as written; checks use their transitive closure.
    pub order: BTreeSet<(String, String)>,
}

impl OrderConstraint {
    pub fn new<'a>(role: &str, concepts: impl IntoIterator<Item = &'a str>, order: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        OrderConstraint {
            role: role.to_string(),
            concepts: concepts.into_iter().map(String::from).collect(),
            order: order.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    /// Rejects orders that mention unknown concepts or are not strict.
    pub fn check(&self) -> Result<(), String> {
        for (a, b) in &self.order {
            for n in [a, b] {
                if !self.concepts.contains(n) {
                    return Err(format!("`{n}` is not among the concepts of the order on `{}`", self.role));
                }
            }
            if a == b {
                return Err(format!("`{a} < {a}` makes the order on `{}` reflexive", self.role));
            }
        }
        if let Some((a, _)) = self.closure().iter().find(|(a, b)| a == b) {
            return Err(format!("the order on `{}` is cyclic through `{a}`", self.role));
        }
        Ok(())
    }

    pub fn closure(&self) -> BTreeSet<(String, String)> {
        let mut c = self.order.clone();
        loop {
            let extra: Vec<(String, String)> = c
                .iter()
                .flat_map(|(a, b)| c.iter().filter(move |(b2, _)| b2 == b).map(move |(_, d)| (a.clone(), d.clone())))
                .filter(|p| !c.contains(p))
                .collect();
            if extra.is_empty() {
                return c;
            }
            c.extend(extra);
        }
    }

    pub fn precedes(&self, a: &str, b: &str) -> bool {
        self.closure().contains(&(a.to_string(), b.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimensionError {
    #[error("constraint set is empty")]
    EmptyConstraintSet,
    #[error("?{0} is not the object of a role atom over a recursive role")]
    NotADimensionVariable(String),
    #[error("no navigation chain applies to ?{0}")]
    NoApplicableChain(String),
    #[error(transparent)]
    Reason(#[from] ReasonError),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverReport {
    pub covered: bool,
    /// Guard roles without a matching constraint.
    pub missing: Vec<String>,
    pub reasons: Vec<String>,
}

/// Whether `c` covers `t`: every guard role of a recursive role has a
/// constraint, and the constraints of one guard set agree on their
/// concepts and order. Requiring agreement keeps paths mixing several
/// guards within the bound given by [`ell`].
pub fn covers(c: &[OrderConstraint], t: &TBox) -> CoverReport {
    let class = classify(t);
    let mut report = CoverReport { covered: true, ..Default::default() };
    for (r, guards) in &class.guard_sets {
        let mut shapes: BTreeMap<(BTreeSet<String>, BTreeSet<(String, String)>), Vec<String>> = BTreeMap::new();
        for s in guards {
            let mine: Vec<&OrderConstraint> = c.iter().filter(|oc| &oc.role == s).collect();
            if mine.is_empty() {
                report.missing.push(s.clone());
                report.reasons.push(format!("no order constraint on `{s}`, a guard of `{r}`"));
            }
            for oc in mine {
                shapes.entry((oc.concepts.clone(), oc.closure())).or_default().push(s.clone());
            }
        }
        if shapes.len() > 1 {
            report.reasons.push(format!("the order constraints on the guards of `{r}` disagree"));
        }
    }
    report.covered = report.reasons.is_empty();
    report
}

/// The largest concept set among the constraints.
pub fn ell(c: &[OrderConstraint]) -> Result<usize, DimensionError> {
    c.iter().map(|oc| oc.concepts.len()).max().ok_or(DimensionError::EmptyConstraintSet)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityFailure {
    /// Index into the constraint list.
    pub constraint: usize,
    pub role: String,
    /// 1: the pair is not linked upward in the order; 2: the pair is
    /// linked against it.
    pub condition: u8,
    pub pair: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// One verdict per constraint.
    pub verdicts: Vec<bool>,
    pub failures: Vec<AdmissibilityFailure>,
}

fn pair_query(atoms: Vec<Atom>) -> ConjunctiveQuery {
    ConjunctiveQuery::new(vec!["x".into(), "y".into()], atoms)
}

fn ordered_pair(a: &str, b: &str, s: &str) -> ConjunctiveQuery {
    pair_query(vec![
        Atom::concept(a, Term::var("x")),
        Atom::role(s, Term::var("x"), Term::var("y")),
        Atom::concept(b, Term::var("y")),
    ])
}

/// Checks every constraint against the small model of `(t, a)`.
pub fn check_admissibility(t: &TBox, a: &ABox, c: &[OrderConstraint]) -> Result<AdmissibilityReport, ReasonError> {
    let class = classify(t);
    if !small_model_applies(&class) {
        return Err(ReasonError::UnsupportedFragment(
            "admissibility needs a recursion-safe or non-recursive TBox".into(),
        ));
    }
    let consistency = consistency_by_small_model(t, a);
    if !consistency.consistent {
        return Err(ReasonError::InconsistentKB(consistency.violations));
    }
    let model = build_small_model(t, a);
    Ok(admissibility_in(&model, c))
}

/// Evaluates the three queries per constraint over `model`.
pub fn admissibility_in(model: &Interpretation, c: &[OrderConstraint]) -> AdmissibilityReport {
    let mut report = AdmissibilityReport { admissible: true, verdicts: Vec::new(), failures: Vec::new() };
    for (idx, oc) in c.iter().enumerate() {
        let closure = oc.closure();
        let q1 = pair_query(vec![Atom::role(oc.role.clone(), Term::var("x"), Term::var("y"))]);
        let linked = evaluate(&q1, model);
        let mut up = linked.clone();
        up.tuples.clear();
        let mut against = up.clone();
        for a in &oc.concepts {
            for b in &oc.concepts {
                let ans = evaluate(&ordered_pair(a, b, &oc.role), model);
                if closure.contains(&(a.clone(), b.clone())) {
                    up.extend(ans);
                } else {
                    against.extend(ans);
                }
            }
        }
        let mut ok = true;
        for pair in &linked.tuples {
            let fail = |condition| AdmissibilityFailure {
                constraint: idx,
                role: oc.role.clone(),
                condition,
                pair: (pair[0].clone(), pair[1].clone()),
            };
            if !up.tuples.contains(pair) {
                report.failures.push(fail(1));
                ok = false;
            }
            if against.tuples.contains(pair) {
                report.failures.push(fail(2));
                ok = false;
            }
        }
        report.verdicts.push(ok);
        report.admissible &= ok;
    }
    report
}

/// A navigation step sequence with the categories it moves between.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub moves: Vec<RuleInstance>,
    pub result: ConjunctiveQuery,
    pub from_category: Vec<String>,
    pub to_category: Vec<String>,
}

/// The recursive role `r` and its guards for the atoms `r(x, var)`.
fn dimension_of(kb: &KnowledgeBase, q: &ConjunctiveQuery, var: &str) -> Result<Vec<(Atom, String, Vec<String>)>, DimensionError> {
    let mut out = Vec::new();
    for atom in &q.atoms {
        if let Atom::Role(r, _, Term::Var(y)) = atom {
            if y == var {
                if let Some(guards) = kb.classification.guard_sets.get(r) {
                    out.push((atom.clone(), r.clone(), guards.iter().cloned().collect()));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(DimensionError::NotADimensionVariable(var.to_string()));
    }
    Ok(out)
}

/// Concepts of the guard's order that `ind` certainly belongs to.
fn categories(kb: &KnowledgeBase, guard: &str, ind: &str) -> Result<Vec<String>, ReasonError> {
    let mut out = BTreeSet::new();
    for oc in kb.constraints.iter().filter(|oc| oc.role == guard) {
        for c in &oc.concepts {
            let q = ConjunctiveQuery::new(vec!["x".into()], vec![Atom::concept(c.clone(), Term::var("x"))]);
            if kb.certain(&q)?.contains(&[ind]) {
                out.insert(c.clone());
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn is_cri(j: &Justification, r: &str, s: &str) -> bool {
    matches!(j, Justification::Axiom(Axiom::Cri(a, b, c))
        if *a == Role::named(r) && *b == Role::named(s) && *c == Role::named(r))
}

/// Moves `var` one level up its dimension: a fact `s(a, b)` about the
/// current value `a` introduces `b`, and the complex role inclusion folds
/// the step into the dimension role.
pub fn roll_up(kb: &KnowledgeBase, q: &ConjunctiveQuery, var: &str) -> Result<Vec<Chain>, DimensionError> {
    let dims = dimension_of(kb, q, var)?;
    let mut chains = Vec::new();
    if let Some(a) = q.eq_binding(var) {
        let a = a.to_string();
        for first in moves_of(kb, q, Direction::Relax, &[RuleId::GD2])? {
            let Justification::Fact(Assertion::Role(s, _, b)) = &first.justification else { continue };
            let binds_var = first.target.iter().any(|t| matches!(t, Atom::Eq(..)) && t.mentions_var(var));
            for (atom, r, guards) in &dims {
                if !binds_var || !guards.contains(s) {
                    continue;
                }
                for second in moves_of(kb, &first.result, Direction::Relax, &[RuleId::G6])? {
                    if is_cri(&second.justification, r, s) && second.target.contains(atom) {
                        chains.push(Chain {
                            result: second.result.clone(),
                            moves: vec![first.clone(), second],
                            from_category: categories(kb, s, &a)?,
                            to_category: categories(kb, s, b)?,
                        });
                    }
                }
            }
        }
        return Ok(chains);
    }
    let concepts: Vec<&String> = q
        .atoms
        .iter()
        .filter_map(|g| match g {
            Atom::Concept(c, Term::Var(v)) if v == var => Some(c),
            _ => None,
        })
        .collect();
    if concepts.is_empty() {
        return Err(DimensionError::NoApplicableChain(var.to_string()));
    }
    for first in moves_of(kb, q, Direction::Relax, &[RuleId::GD4])? {
        let Justification::Containment { sub, sup } = &first.justification else { continue };
        let (Some(Atom::Concept(from, _)), Some(Atom::Role(s, ..)), Some(Atom::Concept(to, _))) =
            (sub.atoms.first(), sup.atoms.first(), sup.atoms.get(1))
        else {
            continue;
        };
        if !first.target.iter().any(|t| t.mentions_var(var)) {
            continue;
        }
        for (atom, r, guards) in &dims {
            if !guards.contains(s) {
                continue;
            }
            for second in moves_of(kb, &first.result, Direction::Relax, &[RuleId::G6])? {
                if is_cri(&second.justification, r, s) && second.target.contains(atom) {
                    chains.push(Chain {
                        result: second.result.clone(),
                        moves: vec![first.clone(), second],
                        from_category: vec![from.clone()],
                        to_category: vec![to.clone()],
                    });
                }
            }
        }
    }
    Ok(chains)
}

/// Moves `var` one level down its dimension: the complex role inclusion
/// splits the dimension role, and a fact `s(a, b)` about the current
/// value `b` binds the new intermediate variable to `a`.
pub fn drill_down(kb: &KnowledgeBase, q: &ConjunctiveQuery, var: &str) -> Result<Vec<Chain>, DimensionError> {
    let dims = dimension_of(kb, q, var)?;
    let Some(b) = q.eq_binding(var).map(str::to_string) else {
        return Err(DimensionError::NoApplicableChain(var.to_string()));
    };
    let mut chains = Vec::new();
    for first in moves_of(kb, q, Direction::Restrain, &[RuleId::S6])? {
        for (atom, r, guards) in &dims {
            if first.target != [atom.clone()] {
                continue;
            }
            for s in guards {
                if !is_cri(&first.justification, r, s) {
                    continue;
                }
                let fresh: BTreeSet<String> = first.result.vars().difference(&q.vars()).cloned().collect();
                for second in moves_of(kb, &first.result, Direction::Restrain, &[RuleId::SD2])? {
                    let Justification::Fact(Assertion::Role(s2, a, b2)) = &second.justification else { continue };
                    let binds_fresh = matches!(second.result.atoms.last(),
                        Some(Atom::Eq(Term::Var(z), Term::Ind(v))) if fresh.contains(z) && v == a);
                    if s2 == s && *b2 == b && binds_fresh {
                        chains.push(Chain {
                            result: second.result.clone(),
                            moves: vec![first.clone(), second.clone()],
                            from_category: categories(kb, s, &b)?,
                            to_category: categories(kb, s, a)?,
                        });
                    }
                }
            }
        }
    }
    Ok(chains)
}

/// Everything known about the order constraints of a knowledge base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionReport {
    pub covers: CoverReport,
    pub admissibility: Option<AdmissibilityReport>,
    pub ell: Option<usize>,
}

pub fn dimension_report(kb: &KnowledgeBase) -> DimensionReport {
    DimensionReport {
        covers: covers(&kb.constraints, &kb.tbox),
        admissibility: kb.admissibility().cloned(),
        ell: ell(&kb.constraints).ok(),
    }
}
