//! Query reformulation: one-step moves that restrain (shrink) or relax
//! (grow) the certain answers of a query.
//!
//! Ontology-driven moves use TBox axioms. Data-driven moves use entailed
//! facts and containments between small queries, decided by comparing
//! certain answers over the knowledge base.

use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::KnowledgeBase;
use crate::kb::{is_generated_name, signature_of, ABox, Assertion, Axiom, BasicConcept, TBox};
use crate::model::ReasonError;
use crate::query::{canonicalize, concept_atoms, Atom, ConjunctiveQuery, Term, TOP};
use crate::rewrite::{s_steps, SRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    SD1,
    SD2,
    SD3,
    SD4,
    SD5,
    SD6,
    G1,
    G2,
    G3,
    G4,
    G5,
    G6,
    G7,
    GD1,
    GD2,
    GD3,
    GD4,
    GD5,
    GD6,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl From<SRule> for RuleId {
    fn from(r: SRule) -> Self {
        match r {
            SRule::S1 => RuleId::S1,
            SRule::S2 => RuleId::S2,
            SRule::S3 => RuleId::S3,
            SRule::S4 => RuleId::S4,
            SRule::S5 => RuleId::S5,
            SRule::S6 => RuleId::S6,
            SRule::S7 => RuleId::S7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Restrain,
    Relax,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Restrain => "restrain",
            Direction::Relax => "relax",
        })
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "restrain" => Ok(Direction::Restrain),
            "relax" => Ok(Direction::Relax),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

/// Why a move is sound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Axiom(Axiom),
    Unifier { from: String, to: Term },
    /// A fact entailed by the knowledge base.
    Fact(Assertion),
    /// Certain answers of `sub` are among those of `sup`.
    Containment { sub: ConjunctiveQuery, sup: ConjunctiveQuery },
    /// Dropping an atom over a non-answer variable.
    Drop,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(ax) => write!(f, "{ax}"),
            Justification::Unifier { from, to } => write!(f, "?{from} ↦ {to}"),
            Justification::Fact(a) => write!(f, "K ⊨ {a}"),
            Justification::Containment { sub, sup } => write!(f, "{} ⊆K {}", body(sub), body(sup)),
            Justification::Drop => f.write_str("non-answer variable"),
        }
    }
}

fn body(q: &ConjunctiveQuery) -> String {
    q.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
}

/// One applicable reformulation step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    /// Stable content hash of rule, target and justification.
    pub id: String,
    pub rule: RuleId,
    pub direction: Direction,
    pub data_driven: bool,
    /// Atoms of the source query the move rewrites or is triggered by.
    pub target: Vec<Atom>,
    pub justification: Justification,
    pub source: ConjunctiveQuery,
    pub result: ConjunctiveQuery,
    /// Version of the knowledge base the move was computed against.
    pub version: u64,
    atom_index: usize,
}

impl RuleInstance {
    pub fn description(&self) -> String {
        let targets = self.target.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
        match &self.justification {
            Justification::Unifier { from, to } => format!("{}: unify ?{from} with {to}", self.rule),
            Justification::Drop => format!("{}: drop {targets}", self.rule),
            j => format!("{}: rewrite {targets} using {j}", self.rule),
        }
    }
}

fn move_id(rule: RuleId, target: &[Atom], j: &Justification) -> String {
    let mut h = Sha256::new();
    h.update(rule.to_string());
    for a in target {
        h.update([0u8]);
        h.update(a.to_string());
    }
    h.update([1u8]);
    h.update(j.to_string());
    hex::encode(&h.finalize()[..8])
}

struct Builder<'a> {
    kb: &'a KnowledgeBase,
    q: &'a ConjunctiveQuery,
    direction: Direction,
    out: Vec<RuleInstance>,
    source_key: ConjunctiveQuery,
    only: Option<BTreeSet<RuleId>>,
}

impl<'a> Builder<'a> {
    fn new(kb: &'a KnowledgeBase, q: &'a ConjunctiveQuery, direction: Direction) -> Self {
        Builder { kb, q, direction, out: Vec::new(), source_key: canonicalize(q), only: None }
    }

    fn wants(&self, rules: &[RuleId]) -> bool {
        self.only.as_ref().map_or(true, |o| rules.iter().any(|r| o.contains(r)))
    }

    fn push(
        &mut self,
        rule: RuleId,
        atom_index: usize,
        target: Vec<Atom>,
        justification: Justification,
        result: ConjunctiveQuery,
    ) {
        let data_driven = matches!(
            rule,
            RuleId::SD1
                | RuleId::SD2
                | RuleId::SD3
                | RuleId::SD4
                | RuleId::SD5
                | RuleId::SD6
                | RuleId::GD1
                | RuleId::GD2
                | RuleId::GD3
                | RuleId::GD4
                | RuleId::GD5
                | RuleId::GD6
        );
        if !self.wants(&[rule]) || result.atoms.is_empty() || canonicalize(&result) == self.source_key {
            return;
        }
        let id = move_id(rule, &target, &justification);
        if self.out.iter().any(|m| m.id == id) {
            return;
        }
        self.out.push(RuleInstance {
            id,
            rule,
            direction: self.direction,
            data_driven,
            target,
            justification,
            source: self.q.clone(),
            result,
            version: self.kb.version,
            atom_index,
        });
    }

    fn finish(mut self) -> Vec<RuleInstance> {
        self.out.sort_by_key(|m| (m.rule, m.atom_index));
        self.out
    }
}

/// The TBox restricted to axioms over user symbols.
fn user_tbox(kb: &KnowledgeBase) -> TBox {
    let generated = |ax: &Axiom| {
        let sig = signature_of(&TBox::new(vec![ax.clone()], []), &ABox::default());
        sig.concepts.iter().chain(&sig.roles).any(|n| is_generated_name(n))
    };
    TBox {
        axioms: kb.tbox.axioms.iter().filter(|a| !generated(a)).cloned().collect(),
        simple_roles: kb.tbox.simple_roles.clone(),
    }
}

fn replace(q: &ConjunctiveQuery, remove: &[usize], add: Vec<Atom>) -> ConjunctiveQuery {
    let mut atoms = Vec::new();
    let first = remove.iter().copied().min();
    for (i, a) in q.atoms.iter().enumerate() {
        if Some(i) == first {
            atoms.extend(add.iter().cloned());
        }
        if !remove.contains(&i) {
            atoms.push(a.clone());
        }
    }
    q.with_atoms(atoms)
}

fn fresh(q: &ConjunctiveQuery) -> Term {
    Term::Var(q.fresh_vars("z").next())
}

/// Terms guaranteed to denote ABox individuals in every match over the
/// canonical model, so that containments decided on certain answers
/// transfer to them.
fn anchored(kb: &KnowledgeBase, q: &ConjunctiveQuery, t: &Term) -> bool {
    match t {
        Term::Ind(_) => true,
        Term::Var(v) => q.is_answer_var(v) || q.eq_binding(v).is_some() || !kb.tbox.has_existentials(),
    }
}

fn unary(atoms: Vec<Atom>) -> ConjunctiveQuery {
    ConjunctiveQuery::new(vec!["x".into()], atoms)
}

fn concept_query(a: &str) -> ConjunctiveQuery {
    unary(vec![Atom::concept(a, Term::var("x"))])
}

fn pattern_query(r: &str, a: &str) -> ConjunctiveQuery {
    unary(vec![Atom::role(r, Term::var("x"), Term::var("y")), Atom::concept(a, Term::var("y"))])
}

/// Pairs of atoms `r(x, y), A(y)` where `y` is a non-answer variable
/// occurring nowhere else.
fn patterns(q: &ConjunctiveQuery) -> Vec<(usize, usize, String, Term, String, String)> {
    let mut out = Vec::new();
    for (i, a) in q.atoms.iter().enumerate() {
        let Atom::Role(r, x, Term::Var(y)) = a else { continue };
        if q.is_answer_var(y) || q.occurrences(y) != 2 {
            continue;
        }
        for (j, b) in q.atoms.iter().enumerate() {
            if let Atom::Concept(c, Term::Var(y2)) = b {
                if y2 == y && c != TOP {
                    out.push((i, j, r.clone(), x.clone(), y.clone(), c.clone()));
                }
            }
        }
    }
    out
}

fn role_facts(kb: &KnowledgeBase, r: &str) -> Result<Vec<(String, String)>, ReasonError> {
    let q = ConjunctiveQuery::new(vec!["x".into(), "y".into()], vec![Atom::role(r, Term::var("x"), Term::var("y"))]);
    Ok(kb.certain(&q)?.tuples.into_iter().map(|t| (t[0].clone(), t[1].clone())).collect())
}

fn concept_facts(kb: &KnowledgeBase, c: &str) -> Result<Vec<String>, ReasonError> {
    Ok(kb.certain(&concept_query(c))?.tuples.into_iter().map(|t| t[0].clone()).collect())
}

/// Moves whose result has no more certain answers than `q`.
pub fn restrain_moves(kb: &KnowledgeBase, q: &ConjunctiveQuery, data_driven: bool) -> Result<Vec<RuleInstance>, ReasonError> {
    restrain(Builder::new(kb, q, Direction::Restrain), data_driven)
}

fn restrain(mut b: Builder, data_driven: bool) -> Result<Vec<RuleInstance>, ReasonError> {
    let (kb, q) = (b.kb, b.q);
    let t = user_tbox(kb);
    for step in s_steps(q, &t, "z") {
        let atom_index = step.target.first().and_then(|a| q.atoms.iter().position(|x| x == a)).unwrap_or(usize::MAX);
        let justification = match (&step.axiom, &step.unifier) {
            (Some(ax), _) => Justification::Axiom(ax.clone()),
            (None, Some((from, to))) => Justification::Unifier { from: from.clone(), to: to.clone() },
            (None, None) => unreachable!(),
        };
        b.push(step.rule.into(), atom_index, step.target, justification, step.result);
    }
    if data_driven {
        restrain_data(kb, q, &mut b)?;
    }
    Ok(b.finish())
}

fn restrain_data(kb: &KnowledgeBase, q: &ConjunctiveQuery, b: &mut Builder) -> Result<(), ReasonError> {
    let concepts: Vec<String> = kb.user_concepts().cloned().collect();
    let roles: Vec<String> = kb.user_roles().cloned().collect();
    let free_var = |t: &Term| match t {
        Term::Var(v) if q.eq_binding(v).is_none() => Some(v.clone()),
        _ => None,
    };
    for (i, g) in q.atoms.iter().enumerate() {
        if !b.wants(&[RuleId::SD1, RuleId::SD2]) {
            break;
        }
        match g {
            Atom::Concept(c, x) if c != TOP => {
                if let Some(v) = free_var(x) {
                    for a in concept_facts(kb, c)? {
                        let mut atoms = q.atoms.clone();
                        atoms.push(Atom::Eq(Term::var(v.clone()), Term::ind(a.clone())));
                        b.push(
                            RuleId::SD1,
                            i,
                            vec![g.clone()],
                            Justification::Fact(Assertion::Concept(c.clone(), a)),
                            q.with_atoms(atoms),
                        );
                    }
                }
            }
            Atom::Role(r, x, y) => {
                let facts = role_facts(kb, r)?;
                for (a, c) in &facts {
                    let fact = Assertion::Role(r.clone(), a.clone(), c.clone());
                    for (t, val) in [(x, a), (y, c)] {
                        if let Some(v) = free_var(t) {
                            let mut atoms = q.atoms.clone();
                            atoms.push(Atom::Eq(Term::var(v), Term::ind(val.clone())));
                            b.push(RuleId::SD2, i, vec![g.clone()], Justification::Fact(fact.clone()), q.with_atoms(atoms));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    // SD3, SD4: replace a concept atom with something contained in it.
    for (i, g) in q.atoms.iter().enumerate() {
        if !b.wants(&[RuleId::SD3, RuleId::SD4]) {
            break;
        }
        let Atom::Concept(a2, x) = g else { continue };
        if a2 == TOP || !anchored(kb, q, x) {
            continue;
        }
        let sup = concept_query(a2);
        for a1 in &concepts {
            let sub = concept_query(a1);
            if a1 == a2 || kb.certain(&sub)?.is_empty() || !kb.contained(&sub, &sup)? {
                continue;
            }
            b.push(
                RuleId::SD3,
                i,
                vec![g.clone()],
                Justification::Containment { sub, sup: sup.clone() },
                replace(q, &[i], vec![Atom::concept(a1.clone(), x.clone())]),
            );
        }
        for r in &roles {
            for a in &concepts {
                let sub = pattern_query(r, a);
                if kb.certain(&sub)?.is_empty() || !kb.contained(&sub, &sup)? {
                    continue;
                }
                let z = fresh(q);
                b.push(
                    RuleId::SD4,
                    i,
                    vec![g.clone()],
                    Justification::Containment { sub, sup: sup.clone() },
                    replace(q, &[i], vec![Atom::role(r.clone(), x.clone(), z.clone()), Atom::concept(a.clone(), z)]),
                );
            }
        }
    }
    // SD5, SD6: replace a pattern `r(x, y), A(y)` with something contained in it.
    for (i, j, r, x, _, a) in patterns(q) {
        if !b.wants(&[RuleId::SD5, RuleId::SD6]) {
            break;
        }
        if !anchored(kb, q, &x) {
            continue;
        }
        let sup = pattern_query(&r, &a);
        let target = vec![q.atoms[i].clone(), q.atoms[j].clone()];
        for c in &concepts {
            let sub = concept_query(c);
            if kb.certain(&sub)?.is_empty() || !kb.contained(&sub, &sup)? {
                continue;
            }
            b.push(
                RuleId::SD5,
                i.min(j),
                target.clone(),
                Justification::Containment { sub, sup: sup.clone() },
                replace(q, &[i, j], vec![Atom::concept(c.clone(), x.clone())]),
            );
        }
        for p in &roles {
            for a2 in &concepts {
                if *p == r && *a2 == a {
                    continue;
                }
                let sub = pattern_query(p, a2);
                if kb.certain(&sub)?.is_empty() || !kb.contained(&sub, &sup)? {
                    continue;
                }
                let z = fresh(q);
                b.push(
                    RuleId::SD6,
                    i.min(j),
                    target.clone(),
                    Justification::Containment { sub, sup: sup.clone() },
                    replace(q, &[i, j], vec![Atom::role(p.clone(), x.clone(), z.clone()), Atom::concept(a2.clone(), z)]),
                );
            }
        }
    }
    Ok(())
}

/// Moves whose result has no fewer certain answers than `q`.
pub fn relax_moves(kb: &KnowledgeBase, q: &ConjunctiveQuery, data_driven: bool) -> Result<Vec<RuleInstance>, ReasonError> {
    relax(Builder::new(kb, q, Direction::Relax), data_driven)
}

fn relax(mut b: Builder, data_driven: bool) -> Result<Vec<RuleInstance>, ReasonError> {
    let (kb, q) = (b.kb, b.q);
    relax_ontology(&user_tbox(kb), q, &mut b);
    if data_driven {
        relax_data(kb, q, &mut b)?;
    }
    Ok(b.finish())
}

fn relax_ontology(t: &TBox, q: &ConjunctiveQuery, b: &mut Builder) {
    for (i, g) in q.atoms.iter().enumerate() {
        for ax in &t.axioms {
            match ax {
                Axiom::ConceptInc(b1, b2) if !matches!(b2, BasicConcept::Top | BasicConcept::Bot) => {
                    let x = match (b1, g) {
                        (BasicConcept::Name(a1), Atom::Concept(c, x)) if a1 == c => x,
                        (BasicConcept::Exists(r), Atom::Role(..)) => match g.match_role(r) {
                            Some((x, y)) if q.is_unbound(y) => x,
                            _ => continue,
                        },
                        _ => continue,
                    };
                    let rule = match (b1, b2) {
                        (BasicConcept::Exists(_), _) => RuleId::G3,
                        (_, BasicConcept::Exists(_)) => RuleId::G2,
                        _ => RuleId::G1,
                    };
                    let mut fv = q.fresh_vars("z");
                    let add = concept_atoms(b2, x, &mut fv);
                    b.push(rule, i, vec![g.clone()], Justification::Axiom(ax.clone()), replace(q, &[i], add));
                }
                Axiom::RoleInc(r, s) => {
                    if let Some((x, y)) = g.match_role(r) {
                        let rule = if r.inverse == s.inverse { RuleId::G4 } else { RuleId::G5 };
                        let add = vec![Atom::for_role(s, x.clone(), y.clone())];
                        b.push(rule, i, vec![g.clone()], Justification::Axiom(ax.clone()), replace(q, &[i], add));
                    }
                }
                Axiom::Cri(r, s, u) => {
                    let Some((x, y)) = g.match_role(r) else { continue };
                    let Term::Var(yv) = y else { continue };
                    if q.is_answer_var(yv) || q.occurrences(yv) != 2 {
                        continue;
                    }
                    for (j, g2) in q.atoms.iter().enumerate() {
                        if j == i {
                            continue;
                        }
                        if let Some((y2, z)) = g2.match_role(s) {
                            if y2 == y && z != y {
                                let add = vec![Atom::for_role(u, x.clone(), z.clone())];
                                b.push(
                                    RuleId::G6,
                                    i.min(j),
                                    vec![g.clone(), g2.clone()],
                                    Justification::Axiom(ax.clone()),
                                    replace(q, &[i, j], add),
                                );
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        if let Atom::Concept(_, Term::Var(x)) = g {
            if !q.is_answer_var(x) {
                b.push(RuleId::G7, i, vec![g.clone()], Justification::Drop, replace(q, &[i], vec![]));
            }
        }
    }
}

fn relax_data(kb: &KnowledgeBase, q: &ConjunctiveQuery, b: &mut Builder) -> Result<(), ReasonError> {
    let concepts: Vec<String> = kb.user_concepts().cloned().collect();
    let roles: Vec<String> = kb.user_roles().cloned().collect();
    // GD1, GD2: replace a binding `x = a` with a fact about `a`.
    for (i, g) in q.atoms.iter().enumerate() {
        if !b.wants(&[RuleId::GD1, RuleId::GD2]) {
            break;
        }
        let (x, a) = match g {
            Atom::Eq(Term::Var(x), Term::Ind(a)) | Atom::Eq(Term::Ind(a), Term::Var(x)) => (x, a),
            _ => continue,
        };
        let xv = Term::var(x.clone());
        for c in &concepts {
            if concept_facts(kb, c)?.contains(a) {
                b.push(
                    RuleId::GD1,
                    i,
                    vec![g.clone()],
                    Justification::Fact(Assertion::Concept(c.clone(), a.clone())),
                    replace(q, &[i], vec![Atom::concept(c.clone(), xv.clone())]),
                );
            }
        }
        for r in &roles {
            for (s, o) in role_facts(kb, r)? {
                if s != *a {
                    continue;
                }
                let z = fresh(q);
                b.push(
                    RuleId::GD2,
                    i,
                    vec![g.clone()],
                    Justification::Fact(Assertion::Role(r.clone(), s, o.clone())),
                    replace(q, &[i], vec![Atom::role(r.clone(), xv.clone(), z.clone()), Atom::Eq(z, Term::ind(o))]),
                );
            }
        }
    }
    // GD3, GD4: replace a concept atom with something containing it.
    for (i, g) in q.atoms.iter().enumerate() {
        if !b.wants(&[RuleId::GD3, RuleId::GD4]) {
            break;
        }
        let Atom::Concept(a1, x) = g else { continue };
        if a1 == TOP || !anchored(kb, q, x) {
            continue;
        }
        let sub = concept_query(a1);
        for a2 in &concepts {
            let sup = concept_query(a2);
            if a1 == a2 || !kb.contained(&sub, &sup)? {
                continue;
            }
            b.push(
                RuleId::GD3,
                i,
                vec![g.clone()],
                Justification::Containment { sub: sub.clone(), sup },
                replace(q, &[i], vec![Atom::concept(a2.clone(), x.clone())]),
            );
        }
        for r in &roles {
            for a in &concepts {
                let sup = pattern_query(r, a);
                if !kb.contained(&sub, &sup)? {
                    continue;
                }
                let z = fresh(q);
                b.push(
                    RuleId::GD4,
                    i,
                    vec![g.clone()],
                    Justification::Containment { sub: sub.clone(), sup },
                    replace(q, &[i], vec![Atom::role(r.clone(), x.clone(), z.clone()), Atom::concept(a.clone(), z)]),
                );
            }
        }
    }
    // GD5, GD6: replace a pattern `r(x, y), A(y)` with something containing it.
    for (i, j, r, x, _, a) in patterns(q) {
        if !b.wants(&[RuleId::GD5, RuleId::GD6]) {
            break;
        }
        if !anchored(kb, q, &x) {
            continue;
        }
        let sub = pattern_query(&r, &a);
        let target = vec![q.atoms[i].clone(), q.atoms[j].clone()];
        for c in &concepts {
            let sup = concept_query(c);
            if !kb.contained(&sub, &sup)? {
                continue;
            }
            b.push(
                RuleId::GD5,
                i.min(j),
                target.clone(),
                Justification::Containment { sub: sub.clone(), sup },
                replace(q, &[i, j], vec![Atom::concept(c.clone(), x.clone())]),
            );
        }
        for p in &roles {
            for a2 in &concepts {
                if *p == r && *a2 == a {
                    continue;
                }
                let sup = pattern_query(p, a2);
                if !kb.contained(&sub, &sup)? {
                    continue;
                }
                let z = fresh(q);
                b.push(
                    RuleId::GD6,
                    i.min(j),
                    target.clone(),
                    Justification::Containment { sub: sub.clone(), sup },
                    replace(q, &[i, j], vec![Atom::role(p.clone(), x.clone(), z.clone()), Atom::concept(a2.clone(), z)]),
                );
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("move was computed for another query or knowledge base version")]
pub struct StaleMove;

/// Applies a move to the query it was computed for.
pub fn apply_move(kb: &KnowledgeBase, q: &ConjunctiveQuery, m: &RuleInstance) -> Result<ConjunctiveQuery, StaleMove> {
    if m.version != kb.version || canonicalize(q) != canonicalize(&m.source) {
        return Err(StaleMove);
    }
    Ok(m.result.clone())
}

/// All moves in both directions, ontology- and data-driven.
pub fn all_moves(kb: &KnowledgeBase, q: &ConjunctiveQuery) -> Result<Vec<RuleInstance>, ReasonError> {
    let mut out = restrain_moves(kb, q, true)?;
    out.extend(relax_moves(kb, q, true)?);
    Ok(out)
}

/// Finds a move by id among those computed for `q`.
pub fn find_move(kb: &KnowledgeBase, q: &ConjunctiveQuery, id: &str) -> Result<Option<RuleInstance>, ReasonError> {
    Ok(all_moves(kb, q)?.into_iter().find(|m| m.id == id))
}

/// Moves of the given rules only, skipping the work for all others.
pub fn moves_of(
    kb: &KnowledgeBase,
    q: &ConjunctiveQuery,
    direction: Direction,
    rules: &[RuleId],
) -> Result<Vec<RuleInstance>, ReasonError> {
    let mut b = Builder::new(kb, q, direction);
    b.only = Some(rules.iter().copied().collect());
    match direction {
        Direction::Restrain => restrain(b, true),
        Direction::Relax => relax(b, true),
    }
}
