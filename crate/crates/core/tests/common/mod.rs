#![allow(dead_code)]

use std::path::PathBuf;

use obdax_core::dimensions::OrderConstraint;
use obdax_core::kb::{validate_tbox, ABox, Assertion, Axiom, BasicConcept, Role, TBox};
use obdax_core::query::{Atom, ConjunctiveQuery, Term};
use obdax_core::roles::{classify, TBoxClass};
use obdax_core::syntax::{parse_kb, parse_query, KbDocument};
use obdax_core::KnowledgeBase;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fixture(name: &str) -> KnowledgeBase {
    KnowledgeBase::new(parse_kb(&fixture_text(name)).unwrap(), 1)
}

pub fn query(text: &str) -> ConjunctiveQuery {
    parse_query(text).unwrap()
}

pub fn names(v: &[&str]) -> Vec<Vec<String>> {
    v.iter().map(|s| vec![s.to_string()]).collect()
}

pub fn sorted(a: &obdax_core::AnswerSet) -> Vec<Vec<String>> {
    a.tuples.iter().cloned().collect()
}

const CONCEPTS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];
const ROLES: [&str; 5] = ["p", "q", "r", "s", "t"];
const INDIVIDUALS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratum {
    NonRecursive,
    RecursionSafe,
}

pub struct Generated {
    pub doc: KbDocument,
    pub stratum: Stratum,
}

fn role(rng: &mut StdRng, roles: &[&str]) -> Role {
    let name = *roles.choose(rng).unwrap();
    if rng.gen_bool(0.25) {
        Role::inverse_of(name)
    } else {
        Role::named(name)
    }
}

fn basic(rng: &mut StdRng, concepts: &[&str], roles: &[&str]) -> BasicConcept {
    if rng.gen_bool(0.65) {
        BasicConcept::name(*concepts.choose(rng).unwrap())
    } else {
        BasicConcept::exists(role(rng, roles))
    }
}

fn axiom(rng: &mut StdRng, concepts: &[&str], roles: &[&str], disjointness: f64) -> Axiom {
    let roll: f64 = rng.gen();
    if roll < disjointness {
        if rng.gen_bool(0.7) {
            Axiom::DisjConcepts(basic(rng, concepts, roles), basic(rng, concepts, roles))
        } else {
            Axiom::DisjRoles(role(rng, roles), role(rng, roles))
        }
    } else if roll < 0.75 {
        Axiom::ConceptInc(basic(rng, concepts, roles), basic(rng, concepts, roles))
    } else {
        let lhs = Role::named(*roles.choose(rng).unwrap());
        Axiom::RoleInc(lhs, role(rng, roles))
    }
}

fn abox(rng: &mut StdRng, concepts: &[&str], roles: &[&str], size: usize) -> ABox {
    let inds = &INDIVIDUALS[..rng.gen_range(2..=INDIVIDUALS.len())];
    let mut a = ABox::default();
    for _ in 0..size {
        let x = inds.choose(rng).unwrap().to_string();
        if rng.gen_bool(0.45) {
            a.insert(Assertion::Concept(concepts.choose(rng).unwrap().to_string(), x));
        } else {
            let y = inds.choose(rng).unwrap().to_string();
            a.insert(Assertion::Role(roles.choose(rng).unwrap().to_string(), x, y));
        }
    }
    a
}

/// A random well-formed knowledge base of the given stratum, or `None`
/// when the draw does not land in it.
fn try_generate(rng: &mut StdRng, stratum: Stratum, disjointness: f64) -> Option<Generated> {
    let concepts = &CONCEPTS[..rng.gen_range(2..=CONCEPTS.len())];
    let roles = &ROLES[..rng.gen_range(2..=ROLES.len())];
    let n_axioms = rng.gen_range(1..=15);
    let mut axioms = Vec::new();
    let mut simple: Vec<String> = Vec::new();
    if stratum == Stratum::RecursionSafe {
        let mut picks = roles.to_vec();
        picks.shuffle(rng);
        let (r, s) = (picks[0], picks[1]);
        axioms.push(Axiom::Cri(Role::named(r), Role::named(s), Role::named(r)));
        simple.push(s.to_string());
        if picks.len() > 2 && rng.gen_bool(0.5) {
            simple.push(picks[2].to_string());
        }
    }
    if stratum == Stratum::NonRecursive && roles.len() >= 3 && rng.gen_bool(0.5) {
        let mut picks = roles.to_vec();
        picks.shuffle(rng);
        axioms.push(Axiom::Cri(Role::named(picks[0]), Role::named(picks[1]), Role::named(picks[2])));
        simple.push(picks[1].to_string());
    }
    while axioms.len() < n_axioms {
        axioms.push(axiom(rng, concepts, roles, disjointness));
    }
    let t = TBox::new(axioms, simple);
    validate_tbox(&t).ok()?;
    let class = classify(&obdax_core::kb::normalize(&t, &obdax_core::kb::signature_of(&t, &ABox::default())));
    let wanted = match stratum {
        Stratum::NonRecursive => TBoxClass::NonRecursive,
        Stratum::RecursionSafe => TBoxClass::RecursionSafe,
    };
    if class.class != wanted || !class.guards_unreachable() {
        return None;
    }
    let size = rng.gen_range(0..=20);
    let a = abox(rng, concepts, roles, size);
    Some(Generated { doc: KbDocument { tbox: t, abox: a, constraints: Vec::new() }, stratum })
}

/// Deterministic stream of knowledge bases alternating between strata.
pub fn generate(seed: u64, index: usize, disjointness: f64) -> Generated {
    let stratum = if index % 2 == 0 { Stratum::NonRecursive } else { Stratum::RecursionSafe };
    let mut rng = StdRng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(index as u64));
    loop {
        if let Some(g) = try_generate(&mut rng, stratum, disjointness) {
            return g;
        }
    }
}

/// A random query over the symbols of `doc` with at most `max_atoms` atoms.
pub fn random_query(rng: &mut StdRng, doc: &KbDocument, max_atoms: usize) -> ConjunctiveQuery {
    let sig = obdax_core::kb::signature_of(&doc.tbox, &doc.abox);
    let concepts: Vec<&String> = sig.concepts.iter().collect();
    let roles: Vec<&String> = sig.roles.iter().collect();
    let inds: Vec<&String> = sig.individuals.iter().collect();
    let vars = ["x", "y", "z", "w"];
    let n = rng.gen_range(1..=max_atoms);
    let n_vars = rng.gen_range(1..=vars.len());
    let term = |rng: &mut StdRng| {
        if !inds.is_empty() && rng.gen_bool(0.1) {
            Term::ind(inds.choose(rng).unwrap().as_str())
        } else {
            Term::var(vars[rng.gen_range(0..n_vars)])
        }
    };
    let mut atoms = Vec::new();
    while atoms.len() < n {
        let roll: f64 = rng.gen();
        if roll < 0.4 && !concepts.is_empty() {
            atoms.push(Atom::concept(concepts.choose(rng).unwrap().as_str(), term(rng)));
        } else if roll < 0.9 && !roles.is_empty() {
            atoms.push(Atom::role(roles.choose(rng).unwrap().as_str(), term(rng), term(rng)));
        } else if !inds.is_empty() {
            let v = Term::var(vars[rng.gen_range(0..n_vars)]);
            atoms.push(Atom::Eq(v, Term::ind(inds.choose(rng).unwrap().as_str())));
        }
    }
    let mut used: Vec<String> = Vec::new();
    for a in &atoms {
        for t in a.terms() {
            if let Term::Var(v) = t {
                if !used.contains(v) {
                    used.push(v.clone());
                }
            }
        }
    }
    let n_answer = if used.is_empty() { 0 } else { rng.gen_range(0..=used.len().min(2)) };
    used.shuffle(rng);
    used.truncate(n_answer);
    used.sort();
    ConjunctiveQuery::new(used, atoms)
}

/// A recursion-safe knowledge base with a chain of categories along the
/// guard role, together with a covering order constraint. With
/// `admissible` the data respects the order.
pub fn dimensional(seed: u64, admissible: bool) -> KbDocument {
    let mut rng = StdRng::seed_from_u64(seed);
    let levels = rng.gen_range(1..=5);
    let cats: Vec<String> = (0..levels).map(|i| format!("L{i}")).collect();
    let mut a = ABox::default();
    let mut members: Vec<Vec<String>> = Vec::new();
    for (i, c) in cats.iter().enumerate() {
        let n = rng.gen_range(1..=3);
        let ms: Vec<String> = (0..n).map(|j| format!("m{i}_{j}")).collect();
        for m in &ms {
            a.insert(Assertion::Concept(c.clone(), m.clone()));
        }
        members.push(ms);
    }
    for _ in 0..rng.gen_range(0..=12) {
        let i = rng.gen_range(0..levels);
        let j = if admissible {
            if i + 1 >= levels {
                continue;
            }
            rng.gen_range(i + 1..levels)
        } else {
            rng.gen_range(0..levels)
        };
        let x = members[i].choose(&mut rng).unwrap().clone();
        let y = members[j].choose(&mut rng).unwrap().clone();
        a.insert(Assertion::Role("part".into(), x, y));
    }
    for k in 0..rng.gen_range(0..=4) {
        let y = members[rng.gen_range(0..levels)].choose(&mut rng).unwrap().clone();
        a.insert(Assertion::Role("at".into(), format!("e{k}"), y));
    }
    let t = TBox::new(
        vec![
            Axiom::Cri(Role::named("at"), Role::named("part"), Role::named("at")),
            Axiom::ConceptInc(BasicConcept::exists(Role::named("at")), BasicConcept::name("Event")),
        ],
        ["part".to_string()],
    );
    let order = cats.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let c = OrderConstraint { role: "part".into(), concepts: cats.into_iter().collect(), order };
    KbDocument { tbox: t, abox: a, constraints: vec![c] }
}
