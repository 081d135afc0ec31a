//! Budgeted restricted chase, used as a reference oracle for certain answers.

use crate::interp::{evaluate_individuals, AnswerSet, Interpretation};
use crate::kb::{ABox, Axiom, BasicConcept, TBox};
use crate::model::{violations_in, Violation};
use crate::query::ConjunctiveQuery;

#[derive(Debug, Clone)]
pub struct ChaseResult {
    pub interpretation: Interpretation,
    /// True when no rule applies any more; the result is then a model.
    pub saturated: bool,
    pub steps: usize,
}

/// Applies the TBox to the ABox rule by rule, in axiom order, until nothing
/// changes or `budget` facts have been added. An existential axiom only
/// fires for elements without a suitable successor yet.
pub fn chase(t: &TBox, a: &ABox, budget: usize) -> ChaseResult {
    let mut i = Interpretation::from_abox(a);
    let mut steps = 0usize;
    let mut anon = 0usize;
    loop {
        let mut changed = false;
        for ax in &t.axioms {
            match ax {
                Axiom::ConceptInc(b1, b2) => {
                    for d in i.members(b1) {
                        let fired = match b2 {
                            BasicConcept::Name(n) => {
                                if i.has_concept(n, d) {
                                    continue;
                                }
                                if steps >= budget {
                                    return ChaseResult { interpretation: i, saturated: false, steps };
                                }
                                i.add_concept(n, d)
                            }
                            BasicConcept::Exists(r) => {
                                if !i.successors(r, d).is_empty() {
                                    continue;
                                }
                                if steps >= budget {
                                    return ChaseResult { interpretation: i, saturated: false, steps };
                                }
                                let e = i.add_anonymous(format!("_anon{anon}"));
                                anon += 1;
                                i.add_role_expr(r, d, e)
                            }
                            BasicConcept::Top | BasicConcept::Bot => false,
                        };
                        if fired {
                            steps += 1;
                            changed = true;
                        }
                    }
                }
                Axiom::RoleInc(r, s) => {
                    for (x, y) in i.role_pairs(r) {
                        let (p, q) = s.orient(x, y);
                        if i.has_role(&s.name, p, q) {
                            continue;
                        }
                        if steps >= budget {
                            return ChaseResult { interpretation: i, saturated: false, steps };
                        }
                        i.add_role_expr(s, x, y);
                        steps += 1;
                        changed = true;
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
                        let (p, q) = u.orient(x, z);
                        if i.has_role(&u.name, p, q) {
                            continue;
                        }
                        if steps >= budget {
                            return ChaseResult { interpretation: i, saturated: false, steps };
                        }
                        i.add_role_expr(u, x, z);
                        steps += 1;
                        changed = true;
                    }
                }
                Axiom::DisjConcepts(..) | Axiom::DisjRoles(..) => {}
            }
        }
        if !changed {
            return ChaseResult { interpretation: i, saturated: true, steps };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// Answers over the chase; exact when the chase saturated, otherwise a
    /// subset of the certain answers.
    Answers { answers: AnswerSet, saturated: bool },
    /// A disjointness violation found in the chase.
    Inconsistent(Vec<Violation>),
}

/// Certain answers computed by evaluating `q` over the chase of `(t, a)`.
pub fn oracle_certain_answers(q: &ConjunctiveQuery, t: &TBox, a: &ABox, budget: usize) -> OracleVerdict {
    let res = chase(t, a, budget);
    let violations = violations_in(t, &res.interpretation);
    if !violations.is_empty() {
        return OracleVerdict::Inconsistent(violations);
    }
    OracleVerdict::Answers { answers: evaluate_individuals(q, &res.interpretation), saturated: res.saturated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Assertion, Role};
    use crate::query::{Atom, Term};

    #[test]
    fn cri_closure_saturates() {
        let t = TBox::new(vec![Axiom::Cri(Role::named("r"), Role::named("s"), Role::named("r"))], ["s".to_string()]);
        let a = ABox::new([
            Assertion::Role("r".into(), "a".into(), "b".into()),
            Assertion::Role("s".into(), "b".into(), "c".into()),
            Assertion::Role("s".into(), "c".into(), "d".into()),
        ]);
        let res = chase(&t, &a, 100);
        assert!(res.saturated);
        assert_eq!(res.steps, 2);
        let q = ConjunctiveQuery::new(vec!["y".into()], vec![Atom::role("r", Term::ind("a"), Term::var("y"))]);
        match oracle_certain_answers(&q, &t, &a, 100) {
            OracleVerdict::Answers { answers, saturated } => {
                assert!(saturated);
                assert_eq!(answers.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infinite_chase_hits_budget() {
        let t = TBox::new(
            vec![
                Axiom::ConceptInc(BasicConcept::name("A"), BasicConcept::Exists(Role::named("r"))),
                Axiom::ConceptInc(BasicConcept::Exists(Role::inverse_of("r")), BasicConcept::name("A")),
            ],
            [],
        );
        let a = ABox::new([Assertion::Concept("A".into(), "a".into())]);
        let res = chase(&t, &a, 10);
        assert!(!res.saturated);
        assert_eq!(res.steps, 10);
    }

    #[test]
    fn restricted_existentials_reuse_successors() {
        let t = TBox::new(
            vec![Axiom::ConceptInc(BasicConcept::name("A"), BasicConcept::Exists(Role::named("r")))],
            [],
        );
        let a = ABox::new([
            Assertion::Concept("A".into(), "a".into()),
            Assertion::Role("r".into(), "a".into(), "b".into()),
        ]);
        let res = chase(&t, &a, 10);
        assert!(res.saturated);
        assert_eq!(res.interpretation.len(), 2);
    }
}
