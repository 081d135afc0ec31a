//! Query rewriting: the one-step S-rules, their saturation into a union of
//! conjunctive queries, and k-unfolding of recursive role inclusions.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::kb::{signature_of, ABox, Axiom, BasicConcept, NameSupply, Role, TBox};
use crate::query::{canonicalize, concept_atoms, condense, subsumes, Atom, ConjunctiveQuery, Term, TOP};
use crate::roles::{classify, TBoxClass};

pub const DEFAULT_MAX_STEPS: usize = 100_000;

/// Environment variable overriding [`DEFAULT_MAX_STEPS`].
pub const MAX_STEPS_ENV: &str = "OBDAX_MAX_STEPS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteOptions {
    pub max_steps: usize,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        let max_steps = std::env::var(MAX_STEPS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_MAX_STEPS);
        RewriteOptions { max_steps }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("TBox has recursive role inclusions for {}", .0.join(", "))]
    RecursiveTBox(Vec<String>),
    #[error("rewriting exceeded {cap} steps")]
    CapExceeded { cap: usize },
    #[error("k-unfolding needs a recursion-safe TBox")]
    NotRecursionSafe,
    #[error("k must be positive, got {0}")]
    InvalidK(i64),
}

/// Identifiers of the one-step rewriting rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SRule {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
}

impl fmt::Display for SRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One application of an S-rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: SRule,
    /// The axiom used, absent for unification.
    pub axiom: Option<Axiom>,
    /// Atoms of the source query that were replaced.
    pub target: Vec<Atom>,
    /// For unification, the substitution applied.
    pub unifier: Option<(String, Term)>,
    pub result: ConjunctiveQuery,
}

fn replace_atom(q: &ConjunctiveQuery, i: usize, with: Vec<Atom>) -> ConjunctiveQuery {
    let mut atoms = q.atoms.clone();
    atoms.splice(i..=i, with);
    q.with_atoms(atoms)
}

/// All one-step S-rule applications to `q`. Fresh variables use `prefix`.
pub fn s_steps(q: &ConjunctiveQuery, t: &TBox, prefix: &str) -> Vec<Step> {
    let mut out = axiom_steps(q, t, prefix);
    for (from, to) in unifiers(q) {
        let result = apply_unifier(q, &from, &to);
        out.push(Step { rule: SRule::S7, axiom: None, target: vec![], unifier: Some((from, to)), result });
    }
    out
}

fn axiom_steps(q: &ConjunctiveQuery, t: &TBox, prefix: &str) -> Vec<Step> {
    let mut out = Vec::new();
    for (i, g) in q.atoms.iter().enumerate() {
        match g {
            Atom::Concept(c, x) if c != TOP => {
                for ax in &t.axioms {
                    if let Axiom::ConceptInc(b1, BasicConcept::Name(a2)) = ax {
                        if a2 != c || matches!(b1, BasicConcept::Bot) {
                            continue;
                        }
                        let mut fresh = q.fresh_vars(prefix);
                        let rule = if matches!(b1, BasicConcept::Exists(_)) { SRule::S3 } else { SRule::S1 };
                        out.push(Step {
                            rule,
                            axiom: Some(ax.clone()),
                            target: vec![g.clone()],
                            unifier: None,
                            result: replace_atom(q, i, concept_atoms(b1, x, &mut fresh)),
                        });
                    }
                }
            }
            Atom::Role(p, _, _) => {
                for ax in &t.axioms {
                    match ax {
                        Axiom::ConceptInc(b1, BasicConcept::Exists(r)) if r.name == *p => {
                            if matches!(b1, BasicConcept::Bot) {
                                continue;
                            }
                            let (x, y) = g.match_role(r).unwrap();
                            if !q.is_unbound(y) {
                                continue;
                            }
                            let mut fresh = q.fresh_vars(prefix);
                            out.push(Step {
                                rule: SRule::S2,
                                axiom: Some(ax.clone()),
                                target: vec![g.clone()],
                                unifier: None,
                                result: replace_atom(q, i, concept_atoms(b1, x, &mut fresh)),
                            });
                        }
                        Axiom::RoleInc(r, s) if s.name == *p => {
                            let (x, y) = g.match_role(s).unwrap();
                            let rule = if r.inverse == s.inverse { SRule::S4 } else { SRule::S5 };
                            out.push(Step {
                                rule,
                                axiom: Some(ax.clone()),
                                target: vec![g.clone()],
                                unifier: None,
                                result: replace_atom(q, i, vec![Atom::for_role(r, x.clone(), y.clone())]),
                            });
                        }
                        Axiom::Cri(r, s, u) if u.name == *p => {
                            let (x, y) = g.match_role(u).unwrap();
                            let z = Term::Var(q.fresh_vars(prefix).next());
                            out.push(Step {
                                rule: SRule::S6,
                                axiom: Some(ax.clone()),
                                target: vec![g.clone()],
                                unifier: None,
                                result: replace_atom(
                                    q,
                                    i,
                                    vec![Atom::for_role(r, x.clone(), z.clone()), Atom::for_role(s, z, y.clone())],
                                ),
                            });
                        }
                        _ => {}
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Candidate variable substitutions: pairs of distinct terms at the same
/// position of two atoms with the same predicate. A non-answer variable
/// is replaced by the other term; an answer variable is only replaced
/// together with an equality that keeps it bound.
pub fn unifiers(q: &ConjunctiveQuery) -> Vec<(String, Term)> {
    let mut seen: BTreeSet<(String, Term)> = BTreeSet::new();
    let mut out = Vec::new();
    let atoms: Vec<&Atom> = q.atoms.iter().filter(|a| !matches!(a, Atom::Eq(..))).collect();
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            let same = match (a, b) {
                (Atom::Concept(c, _), Atom::Concept(d, _)) => c == d,
                (Atom::Role(r, _, _), Atom::Role(s, _, _)) => r == s,
                _ => false,
            };
            if !same {
                continue;
            }
            for (u, v) in a.terms().into_iter().zip(b.terms()) {
                if u == v {
                    continue;
                }
                let pick = match (u, v) {
                    (Term::Var(x), Term::Var(y)) => {
                        let (xa, ya) = (q.is_answer_var(x), q.is_answer_var(y));
                        if !xa {
                            Some((x.clone(), v.clone()))
                        } else if !ya {
                            Some((y.clone(), u.clone()))
                        } else {
                            let (keep, drop) = if x < y { (u, y) } else { (v, x) };
                            Some((drop.clone(), keep.clone()))
                        }
                    }
                    (Term::Var(x), Term::Ind(_)) => Some((x.clone(), v.clone())),
                    (Term::Ind(_), Term::Var(y)) => Some((y.clone(), u.clone())),
                    (Term::Ind(_), Term::Ind(_)) => None,
                };
                if let Some(p) = pick {
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Most general unifier of two atoms with the same predicate, as a
/// sequence of single substitutions applied left to right.
fn atom_mgu(a: &Atom, b: &Atom, q: &ConjunctiveQuery) -> Option<ConjunctiveQuery> {
    if a.predicate() != b.predicate() || matches!(a, Atom::Eq(..)) {
        return None;
    }
    let mut cur = q.clone();
    let (mut a, mut b) = (a.clone(), b.clone());
    loop {
        let pair = a.terms().into_iter().zip(b.terms()).find(|(u, v)| u != v).map(|(u, v)| (u.clone(), v.clone()));
        let Some((u, v)) = pair else {
            let mut atoms: Vec<Atom> = Vec::new();
            for a in cur.atoms.iter() {
                if !atoms.contains(a) {
                    atoms.push(a.clone());
                }
            }
            return Some(cur.with_atoms(atoms));
        };
        let (from, to) = match (&u, &v) {
            (Term::Ind(_), Term::Ind(_)) => return None,
            (Term::Var(x), Term::Var(y)) => {
                if !cur.is_answer_var(x) || (cur.is_answer_var(y) && x > y) {
                    (x.clone(), v.clone())
                } else {
                    (y.clone(), u.clone())
                }
            }
            (Term::Var(x), Term::Ind(_)) => (x.clone(), v.clone()),
            (Term::Ind(_), Term::Var(y)) => (y.clone(), u.clone()),
        };
        cur = apply_unifier(&cur, &from, &to);
        a = a.substitute(&from, &to);
        b = b.substitute(&from, &to);
    }
}

/// Results of merging two atoms of `q` into one.
pub fn reductions(q: &ConjunctiveQuery) -> Vec<ConjunctiveQuery> {
    let mut out = Vec::new();
    for (i, a) in q.atoms.iter().enumerate() {
        for b in &q.atoms[i + 1..] {
            if let Some(r) = atom_mgu(a, b, q) {
                out.push(r);
            }
        }
    }
    out
}

/// Replaces `from` by `to`; an answer variable stays bound through `from = to`.
pub fn apply_unifier(q: &ConjunctiveQuery, from: &str, to: &Term) -> ConjunctiveQuery {
    let mut r = q.substitute(from, to);
    if q.is_answer_var(from) {
        r.atoms.push(Atom::Eq(Term::Var(from.to_string()), to.clone()));
    }
    r
}

/// Eliminates equalities between variables where one side is not an answer
/// variable.
pub fn inline_var_equalities(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let mut q = q.clone();
    loop {
        let found = q.atoms.iter().find_map(|a| match a {
            Atom::Eq(Term::Var(x), Term::Var(y)) if x != y => {
                if !q.is_answer_var(x) {
                    Some((x.clone(), Term::Var(y.clone())))
                } else if !q.is_answer_var(y) {
                    Some((y.clone(), Term::Var(x.clone())))
                } else {
                    None
                }
            }
            _ => None,
        });
        match found {
            Some((from, to)) => q = q.substitute(&from, &to),
            None => return canonicalize(&q),
        }
    }
}

/// A union of conjunctive queries produced by saturation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewritingSet {
    pub queries: Vec<ConjunctiveQuery>,
    /// Rule applications that produced a query not seen before.
    pub steps: usize,
    /// Rule applications whose result was already known.
    pub dedup_hits: usize,
}

impl RewritingSet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn contains(&self, q: &ConjunctiveQuery) -> bool {
        let c = canonicalize(&condense(&inline_var_equalities(q)));
        self.queries.iter().any(|x| *x == c)
    }

    /// Queries that mention none of `roles`.
    pub fn avoiding_roles(&self, roles: &BTreeSet<String>) -> Vec<&ConjunctiveQuery> {
        self.queries
            .iter()
            .filter(|q| !q.atoms.iter().any(|a| matches!(a, Atom::Role(r, _, _) if roles.contains(r))))
            .collect()
    }
}

/// Saturates `{q}` under the S-rules for a TBox without recursive role
/// inclusions.
pub fn rewrite(q: &ConjunctiveQuery, t: &TBox, opts: &RewriteOptions) -> Result<RewritingSet, RewriteError> {
    let class = classify(t);
    if !class.recursive_roles.is_empty() {
        return Err(RewriteError::RecursiveTBox(class.recursive_roles.into_iter().collect()));
    }
    saturate(q, t, &BTreeSet::new(), opts)
}

/// Bits for each predicate and each predicate position holding a constant
/// or an answer variable. A query subsumes another only if its bits are a
/// subset of the other's.
fn feature_mask(q: &ConjunctiveQuery) -> u128 {
    let bit = |parts: &[&str]| -> u128 {
        let h = parts.iter().flat_map(|p| p.bytes().chain([0xff])).fold(0xcbf29ce484222325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x100000001b3)
        });
        1 << (h % 128)
    };
    let mut m = 0u128;
    for a in &q.atoms {
        let Some(p) = a.predicate() else { continue };
        m |= bit(&[p]);
        for (i, t) in a.terms().iter().enumerate() {
            let pos = i.to_string();
            match t {
                Term::Ind(c) => m |= bit(&[p, &pos, "c", c]),
                Term::Var(v) if q.is_answer_var(v) => m |= bit(&[p, &pos, "v", v]),
                Term::Var(_) => {}
            }
        }
    }
    m
}

/// Atoms over `focus` roles are expanded one at a time before anything
/// else: their rewriting steps touch no other atom and keep every variable
/// as bound as it was, so interleaving them with other steps only
/// multiplies intermediate queries.
fn saturate(q: &ConjunctiveQuery, t: &TBox, focus: &BTreeSet<String>, opts: &RewriteOptions) -> Result<RewritingSet, RewriteError> {
    let seed = canonicalize(&condense(&inline_var_equalities(q)));
    let mut seen: HashSet<ConjunctiveQuery> = HashSet::new();
    seen.insert(seed.clone());
    // Kept queries with their predicate masks and liveness; a query
    // subsumed by a later one is dropped along with its pending expansion.
    let mut kept: Vec<(ConjunctiveQuery, u128, bool)> = vec![(seed.clone(), feature_mask(&seed), true)];
    let mut queue = VecDeque::from([0usize]);
    let (mut steps, mut dedup_hits) = (0usize, 0usize);
    while let Some(idx) = queue.pop_front() {
        if !kept[idx].2 {
            continue;
        }
        let cur = kept[idx].0.clone();
        let focused = cur.atoms.iter().find(|a| matches!(a, Atom::Role(r, _, _) if focus.contains(r)));
        let successors: Vec<Step> = match focused {
            Some(atom) => axiom_steps(&cur, t, "_f").into_iter().filter(|s| s.target.first() == Some(atom)).collect(),
            None => {
                // Two atoms are merged only when the merge frees a variable for S2.
                let merged = reductions(&cur)
                    .into_iter()
                    .flat_map(|r| axiom_steps(&r, t, "_f"))
                    .filter(|s| s.rule == SRule::S2);
                axiom_steps(&cur, t, "_f").into_iter().chain(merged).collect()
            }
        };
        for step in successors {
            let c = canonicalize(&condense(&step.result));
            if !seen.insert(c.clone()) {
                dedup_hits += 1;
                continue;
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(RewriteError::CapExceeded { cap: opts.max_steps });
            }
            let m = feature_mask(&c);
            // Queries still holding focus atoms are transient; pruning them
            // costs more than expanding them.
            let transient = c.atoms.iter().any(|a| matches!(a, Atom::Role(r, _, _) if focus.contains(r)));
            if !transient {
                if kept.iter().any(|(o, om, live)| *live && om & !m == 0 && subsumes(o, &c)) {
                    continue;
                }
                // The seed stays: a query always belongs to its rewriting.
                for (o, om, live) in kept.iter_mut().skip(1) {
                    if *live && m & !*om == 0 && subsumes(&c, o) {
                        *live = false;
                    }
                }
            }
            kept.push((c, m, true));
            queue.push_back(kept.len() - 1);
        }
    }
    let queries = kept.into_iter().filter_map(|(q, _, live)| live.then_some(q)).collect();
    Ok(RewritingSet { queries, steps, dedup_hits })
}

/// A TBox with its recursive role inclusions unfolded up to depth `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unfolding {
    pub tbox: TBox,
    /// Each recursive role mapped to the role standing for its closure.
    pub hat: BTreeMap<String, String>,
    /// Every role introduced by the unfolding.
    pub fresh_roles: BTreeSet<String>,
}

impl Unfolding {
    /// Replaces atoms over recursive roles with their closure roles.
    pub fn hat_query(&self, q: &ConjunctiveQuery) -> ConjunctiveQuery {
        q.with_atoms(
            q.atoms
                .iter()
                .map(|a| match a {
                    Atom::Role(r, x, y) if self.hat.contains_key(r) => {
                        Atom::Role(self.hat[r].clone(), x.clone(), y.clone())
                    }
                    other => other.clone(),
                })
                .collect(),
        )
    }
}

/// Unfolds each recursive inclusion `r·s ⊑ r` into the chain
/// `r ⊑ r0`, `r(j-1)·s ⊑ rj` for `1 ≤ j ≤ k`, `rj ⊑ r^` for `0 ≤ j ≤ k`.
///
/// All guard roles of `r` share one chain so that paths may mix them.
/// Axioms that read `r` (on the left of inclusions, under `∃` on the left
/// of concept inclusions, as first role of another complex inclusion, or in
/// disjointness) read `r^` instead, since `r^` carries the derived pairs.
pub fn k_unfold(t: &TBox, k: i64) -> Result<Unfolding, RewriteError> {
    if k <= 0 {
        return Err(RewriteError::InvalidK(k));
    }
    let class = classify(t);
    if class.class == TBoxClass::GeneralHR {
        return Err(RewriteError::NotRecursionSafe);
    }
    let mut names = NameSupply::new(&signature_of(t, &ABox::default()));
    let mut hat: BTreeMap<String, String> = BTreeMap::new();
    let mut chains: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut fresh_roles = BTreeSet::new();
    for r in &class.recursive_roles {
        let chain: Vec<String> = (0..=k).map(|j| names.derived_role(r, &j.to_string())).collect();
        let h = names.derived_role(r, "hat");
        fresh_roles.extend(chain.iter().cloned());
        fresh_roles.insert(h.clone());
        hat.insert(r.clone(), h);
        chains.insert(r.clone(), chain);
    }
    let to_hat = |r: &Role| -> Role {
        match hat.get(&r.name) {
            Some(h) => Role { name: h.clone(), inverse: r.inverse },
            None => r.clone(),
        }
    };
    let hat_concept = |b: &BasicConcept| -> BasicConcept {
        match b {
            BasicConcept::Exists(r) => BasicConcept::Exists(to_hat(r)),
            other => other.clone(),
        }
    };
    let mut axioms = Vec::new();
    for ax in &t.axioms {
        let new = match ax {
            Axiom::Cri(r, _, u) if r == u && hat.contains_key(&u.name) => continue,
            Axiom::Cri(r, s, u) => Axiom::Cri(to_hat(r), s.clone(), u.clone()),
            Axiom::RoleInc(r, s) if r.name == s.name && hat.contains_key(&r.name) => {
                // feeding r back into its own chain would never terminate
                axioms.push(ax.clone());
                Axiom::RoleInc(to_hat(r), to_hat(s))
            }
            Axiom::RoleInc(r, s) => Axiom::RoleInc(to_hat(r), s.clone()),
            Axiom::ConceptInc(b1, b2) => Axiom::ConceptInc(hat_concept(b1), b2.clone()),
            Axiom::DisjConcepts(b1, b2) => Axiom::DisjConcepts(hat_concept(b1), hat_concept(b2)),
            Axiom::DisjRoles(r, s) => Axiom::DisjRoles(to_hat(r), to_hat(s)),
        };
        axioms.push(new);
    }
    for (r, guards) in &class.guard_sets {
        let chain = &chains[r];
        let h = &hat[r];
        axioms.push(Axiom::RoleInc(Role::named(r.clone()), Role::named(chain[0].clone())));
        for j in 1..chain.len() {
            for s in guards {
                axioms.push(Axiom::Cri(
                    Role::named(chain[j - 1].clone()),
                    Role::named(s.clone()),
                    Role::named(chain[j].clone()),
                ));
            }
        }
        for rj in chain {
            axioms.push(Axiom::RoleInc(Role::named(rj.clone()), Role::named(h.clone())));
        }
    }
    Ok(Unfolding { tbox: TBox { axioms, simple_roles: t.simple_roles.clone() }, hat, fresh_roles })
}

/// Rewrites `q` over the k-unfolding of `t`.
pub fn k_rewrite(
    q: &ConjunctiveQuery,
    t: &TBox,
    k: i64,
    opts: &RewriteOptions,
) -> Result<(RewritingSet, Unfolding), RewriteError> {
    let u = k_unfold(t, k)?;
    let rs = saturate(&u.hat_query(q), &u.tbox, &u.fresh_roles, opts)?;
    Ok((rs, u))
}
