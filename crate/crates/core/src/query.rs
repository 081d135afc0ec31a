//! Conjunctive queries and their canonical form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::kb::{BasicConcept, Role};

/// Reserved concept name denoting the whole domain.
pub const TOP: &str = "top";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Ind(String),
}

impl Term {
    pub fn var(v: impl Into<String>) -> Self {
        Term::Var(v.into())
    }

    pub fn ind(a: impl Into<String>) -> Self {
        Term::Ind(a.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Ind(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::serialize_term(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Concept(String, Term),
    Role(String, Term, Term),
    Eq(Term, Term),
}

impl Atom {
    pub fn concept(c: impl Into<String>, t: Term) -> Self {
        Atom::Concept(c.into(), t)
    }

    pub fn role(r: impl Into<String>, x: Term, y: Term) -> Self {
        Atom::Role(r.into(), x, y)
    }

    /// The atom `r(x, y)` for a possibly inverse role.
    pub fn for_role(r: &Role, x: Term, y: Term) -> Self {
        let (a, b) = r.orient(x, y);
        Atom::Role(r.name.clone(), a, b)
    }

    /// If this atom reads as `r(x, y)` for the possibly inverse role `r`,
    /// returns `(x, y)`.
    pub fn match_role(&self, r: &Role) -> Option<(&Term, &Term)> {
        match self {
            Atom::Role(n, a, b) if *n == r.name => Some(r.orient(a, b)),
            _ => None,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Concept(_, t) => vec![t],
            Atom::Role(_, a, b) | Atom::Eq(a, b) => vec![a, b],
        }
    }

    pub fn terms_mut(&mut self) -> Vec<&mut Term> {
        match self {
            Atom::Concept(_, t) => vec![t],
            Atom::Role(_, a, b) | Atom::Eq(a, b) => vec![a, b],
        }
    }

    pub fn mentions_var(&self, v: &str) -> bool {
        self.terms().iter().any(|t| t.as_var() == Some(v))
    }

    pub fn predicate(&self) -> Option<&str> {
        match self {
            Atom::Concept(c, _) => Some(c),
            Atom::Role(r, _, _) => Some(r),
            Atom::Eq(..) => None,
        }
    }

    pub fn substitute(&self, from: &str, to: &Term) -> Atom {
        let mut a = self.clone();
        for t in a.terms_mut() {
            if t.as_var() == Some(from) {
                *t = to.clone();
            }
        }
        a
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::serialize_atom(self))
    }
}

/// Atoms stating that `t` is an instance of `b`. Existentials use a fresh
/// variable drawn from `fresh`.
pub fn concept_atoms(b: &BasicConcept, t: &Term, fresh: &mut FreshVars) -> Vec<Atom> {
    match b {
        BasicConcept::Name(n) => vec![Atom::Concept(n.clone(), t.clone())],
        BasicConcept::Top => vec![Atom::Concept(TOP.to_string(), t.clone())],
        BasicConcept::Exists(r) => vec![Atom::for_role(r, t.clone(), Term::Var(fresh.next()))],
        BasicConcept::Bot => vec![],
    }
}

/// A conjunctive query `q(answer_vars) :- atoms`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConjunctiveQuery {
    pub name: String,
    pub answer_vars: Vec<String>,
    pub atoms: Vec<Atom>,
}

impl ConjunctiveQuery {
    pub fn new(answer_vars: Vec<String>, atoms: Vec<Atom>) -> Self {
        ConjunctiveQuery { name: "q".into(), answer_vars, atoms }
    }

    pub fn is_answer_var(&self, v: &str) -> bool {
        self.answer_vars.iter().any(|a| a == v)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.answer_vars.iter().cloned().collect();
        for a in &self.atoms {
            for t in a.terms() {
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
            }
        }
        out
    }

    pub fn individuals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            for t in a.terms() {
                if let Term::Ind(x) = t {
                    out.insert(x.clone());
                }
            }
        }
        out
    }

    /// Number of atom positions (equalities included) at which `v` occurs.
    pub fn occurrences(&self, v: &str) -> usize {
        self.atoms
            .iter()
            .flat_map(|a| a.terms())
            .filter(|t| t.as_var() == Some(v))
            .count()
    }

    /// Whether `t` is a non-answer variable occurring exactly once.
    pub fn is_unbound(&self, t: &Term) -> bool {
        match t {
            Term::Var(v) => !self.is_answer_var(v) && self.occurrences(v) == 1,
            Term::Ind(_) => false,
        }
    }

    /// The individual a variable is bound to by an equality atom, if any.
    pub fn eq_binding(&self, v: &str) -> Option<&str> {
        self.atoms.iter().find_map(|a| match a {
            Atom::Eq(Term::Var(x), Term::Ind(i)) | Atom::Eq(Term::Ind(i), Term::Var(x)) if x == v => {
                Some(i.as_str())
            }
            _ => None,
        })
    }

    pub fn with_atoms(&self, atoms: Vec<Atom>) -> Self {
        ConjunctiveQuery { name: self.name.clone(), answer_vars: self.answer_vars.clone(), atoms }
    }

    pub fn substitute(&self, from: &str, to: &Term) -> Self {
        self.with_atoms(self.atoms.iter().map(|a| a.substitute(from, to)).collect())
    }

    /// A single atom over answer variables and individuals only.
    pub fn is_instance_query(&self) -> bool {
        self.atoms.len() == 1
            && !matches!(self.atoms[0], Atom::Eq(..))
            && self.atoms[0]
                .terms()
                .iter()
                .all(|t| t.as_var().map_or(true, |v| self.is_answer_var(v)))
    }

    /// Answer variables that occur in no atom.
    pub fn unsafe_answer_vars(&self) -> Vec<&str> {
        self.answer_vars
            .iter()
            .filter(|v| !self.atoms.iter().any(|a| a.mentions_var(v)))
            .map(|v| v.as_str())
            .collect()
    }

    pub fn fresh_vars(&self, prefix: &str) -> FreshVars {
        FreshVars::avoiding(prefix, self.vars())
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::serialize_query(self))
    }
}

/// Generator of variable names outside a given set.
#[derive(Debug, Clone)]
pub struct FreshVars {
    prefix: String,
    counter: usize,
    taken: BTreeSet<String>,
}

impl FreshVars {
    pub fn avoiding(prefix: &str, taken: BTreeSet<String>) -> Self {
        FreshVars { prefix: prefix.to_string(), counter: 0, taken }
    }

    pub fn next(&mut self) -> String {
        loop {
            let v = if self.prefix == "z" && self.counter == 0 {
                "z".to_string()
            } else {
                format!("{}{}", self.prefix, self.counter)
            };
            self.counter += 1;
            if self.taken.insert(v.clone()) {
                return v;
            }
        }
    }
}

fn placeholder(t: &Term, q: &ConjunctiveQuery, names: &BTreeMap<String, usize>) -> (u8, String) {
    match t {
        Term::Ind(a) => (2, a.clone()),
        Term::Var(v) if q.is_answer_var(v) => (1, v.clone()),
        Term::Var(v) => match names.get(v) {
            Some(i) => (3, format!("{i:08}")),
            None => (0, String::new()),
        },
    }
}

fn atom_key(a: &Atom, q: &ConjunctiveQuery, names: &BTreeMap<String, usize>) -> (u8, String, Vec<(u8, String)>) {
    match a {
        Atom::Concept(c, t) => (0, c.clone(), vec![placeholder(t, q, names)]),
        Atom::Role(r, x, y) => (1, r.clone(), vec![placeholder(x, q, names), placeholder(y, q, names)]),
        Atom::Eq(x, y) => (2, String::new(), vec![placeholder(x, q, names), placeholder(y, q, names)]),
    }
}

fn orient_eq(a: Atom) -> Atom {
    match a {
        Atom::Eq(x, y) if y < x => Atom::Eq(y, x),
        other => other,
    }
}

/// Canonical form: atoms deduplicated and sorted, trivial equalities
/// dropped, non-answer variables renamed `_v0, _v1, …` in order of first
/// occurrence. Queries equal up to renaming of non-answer variables
/// usually share a canonical form; equal forms always denote equal queries.
pub fn canonicalize(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let mut atoms: Vec<Atom> = q
        .atoms
        .iter()
        .filter(|a| !matches!(a, Atom::Eq(x, y) if x == y))
        .cloned()
        .map(orient_eq)
        .collect();
    atoms.sort();
    atoms.dedup();
    let base = q.with_atoms(atoms);

    let prefix = if q.answer_vars.iter().any(|v| v.starts_with("_v")) { "__v" } else { "_v" };

    // Order variables by the shape of their atoms, ignoring other
    // non-answer variable names, then by first occurrence.
    let empty = BTreeMap::new();
    let mut sigs: BTreeMap<String, Vec<(u8, String, Vec<(u8, String)>, usize)>> = BTreeMap::new();
    for a in &base.atoms {
        let key = atom_key(a, &base, &empty);
        for (pos, t) in a.terms().iter().enumerate() {
            if let Term::Var(v) = t {
                if !base.is_answer_var(v) {
                    sigs.entry(v.clone()).or_default().push((key.0, key.1.clone(), key.2.clone(), pos));
                }
            }
        }
    }
    for s in sigs.values_mut() {
        s.sort();
    }
    let mut order_atoms: Vec<&Atom> = base.atoms.iter().collect();
    order_atoms.sort_by_cached_key(|a| atom_key(a, &base, &empty));
    let mut first_seen: BTreeMap<String, usize> = BTreeMap::new();
    for a in &order_atoms {
        for t in a.terms() {
            if let Term::Var(v) = t {
                if !base.is_answer_var(v) {
                    let n = first_seen.len();
                    first_seen.entry(v.clone()).or_insert(n);
                }
            }
        }
    }
    let mut vars: Vec<String> = first_seen.keys().cloned().collect();
    vars.sort_by(|a, b| (&sigs[a], first_seen[a]).cmp(&(&sigs[b], first_seen[b])));

    // Second pass: first occurrence in the atom order induced by the
    // provisional numbering.
    let provisional: BTreeMap<String, usize> = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
    let mut order_atoms: Vec<&Atom> = base.atoms.iter().collect();
    order_atoms.sort_by_cached_key(|a| atom_key(a, &base, &provisional));
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    for a in &order_atoms {
        for t in a.terms() {
            if let Term::Var(v) = t {
                if !base.is_answer_var(v) && !rename.contains_key(v) {
                    let n = rename.len();
                    rename.insert(v.clone(), format!("{prefix}{n}"));
                }
            }
        }
    }

    let mut atoms: Vec<Atom> = base
        .atoms
        .iter()
        .map(|a| {
            let mut a = a.clone();
            for t in a.terms_mut() {
                if let Term::Var(v) = t {
                    if let Some(n) = rename.get(v) {
                        *t = Term::Var(n.clone());
                    }
                }
            }
            orient_eq(a)
        })
        .collect();
    atoms.sort();
    atoms.dedup();
    ConjunctiveQuery { name: q.name.clone(), answer_vars: q.answer_vars.clone(), atoms }
}

/// Whether every answer of `specific` is an answer of `general` on any
/// database: a mapping of `general`'s non-answer variables sends each of
/// its atoms onto an atom of `specific`. Equalities in `specific` are
/// applied first, so an answer variable may land on the term it equals.
pub fn subsumes(general: &ConjunctiveQuery, specific: &ConjunctiveQuery) -> bool {
    if general.answer_vars != specific.answer_vars {
        return false;
    }
    let (specific, rep) = apply_equalities(specific);
    let target = |t: &Term| -> Option<Term> {
        match t {
            Term::Ind(_) => Some(t.clone()),
            Term::Var(v) if general.is_answer_var(v) => Some(resolve(t, &rep)),
            Term::Var(_) => None,
        }
    };
    // Candidate images per atom; constants and answer variables must match
    // in place.
    let mut plan: Vec<(&Atom, Vec<&Atom>)> = Vec::new();
    let mut eqs: Vec<&Atom> = Vec::new();
    for a in &general.atoms {
        if matches!(a, Atom::Eq(..)) {
            eqs.push(a);
            continue;
        }
        let cands: Vec<&Atom> = specific
            .atoms
            .iter()
            .filter(|c| {
                c.predicate() == a.predicate()
                    && std::mem::discriminant(a) == std::mem::discriminant(*c)
                    && a.terms().iter().zip(c.terms()).all(|(t, to)| target(t).map_or(true, |m| &m == to))
            })
            .collect();
        if cands.is_empty() {
            return false;
        }
        plan.push((a, cands));
    }
    let mut h: BTreeMap<String, Term> =
        general.answer_vars.iter().map(|v| (v.clone(), resolve(&Term::Var(v.clone()), &rep))).collect();
    extend_hom(&plan, &eqs, &specific, &mut h)
}

fn resolve(t: &Term, rep: &BTreeMap<String, Term>) -> Term {
    let mut cur = t.clone();
    while let Term::Var(v) = &cur {
        match rep.get(v) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

/// Merges the terms that `q`'s equality atoms identify. Equalities between
/// distinct individuals stay behind as atoms.
fn apply_equalities(q: &ConjunctiveQuery) -> (ConjunctiveQuery, BTreeMap<String, Term>) {
    let mut rep: BTreeMap<String, Term> = BTreeMap::new();
    if !q.atoms.iter().any(|a| matches!(a, Atom::Eq(..))) {
        return (q.clone(), rep);
    }
    let mut residual = Vec::new();
    for a in &q.atoms {
        let Atom::Eq(x, y) = a else { continue };
        let (x, y) = (resolve(x, &rep), resolve(y, &rep));
        match (&x, &y) {
            _ if x == y => {}
            (Term::Var(u), Term::Var(w)) => {
                let (from, to) = if u > w { (u, &y) } else { (w, &x) };
                rep.insert(from.clone(), to.clone());
            }
            (Term::Var(u), Term::Ind(_)) => {
                rep.insert(u.clone(), y.clone());
            }
            (Term::Ind(_), Term::Var(w)) => {
                rep.insert(w.clone(), x.clone());
            }
            _ => residual.push(Atom::Eq(x.clone(), y.clone())),
        }
    }
    let mut atoms: Vec<Atom> = q
        .atoms
        .iter()
        .filter(|a| !matches!(a, Atom::Eq(..)))
        .map(|a| {
            let mut a = a.clone();
            for t in a.terms_mut() {
                *t = resolve(t, &rep);
            }
            a
        })
        .collect();
    atoms.extend(residual);
    (q.with_atoms(atoms), rep)
}

/// Drops atoms whose removal leaves an equivalent query, yielding a core.
pub fn condense(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let mut cur = q.clone();
    let mut i = 0;
    while i < cur.atoms.len() {
        let mut atoms = cur.atoms.clone();
        atoms.remove(i);
        let smaller = cur.with_atoms(atoms);
        if subsumes(&cur, &smaller) {
            cur = smaller;
        } else {
            i += 1;
        }
    }
    cur
}

fn map_term(t: &Term, to: &Term, h: &mut BTreeMap<String, Term>, bound: &mut Vec<String>) -> bool {
    match t {
        Term::Ind(_) => t == to,
        Term::Var(v) => match h.get(v) {
            Some(m) => m == to,
            None => {
                h.insert(v.clone(), to.clone());
                bound.push(v.clone());
                true
            }
        },
    }
}

fn image(t: &Term, h: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => h.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Ind(_) => t.clone(),
    }
}

/// Checks `general`'s equalities under `h`, binding variables that occur
/// only in equalities.
fn eqs_hold(eqs: &[&Atom], specific: &ConjunctiveQuery, h: &BTreeMap<String, Term>) -> bool {
    let mut h = h.clone();
    eqs.iter().all(|a| {
        let Atom::Eq(x, y) = a else { return false };
        let free = |t: &Term, h: &BTreeMap<String, Term>| matches!(t, Term::Var(v) if !h.contains_key(v));
        match (free(x, &h), free(y, &h)) {
            (true, true) => {
                let w = Term::Var(format!("{x}={y}"));
                for t in [x, y] {
                    if let Term::Var(v) = t {
                        h.insert(v.clone(), w.clone());
                    }
                }
                return true;
            }
            (true, false) | (false, true) => {
                let (v, t) = if free(x, &h) { (x, y) } else { (y, x) };
                let img = image(t, &h);
                if let Term::Var(v) = v {
                    h.insert(v.clone(), img);
                }
                return true;
            }
            _ => {}
        }
        let (hx, hy) = (image(x, &h), image(y, &h));
        hx == hy
            || specific.atoms.iter().any(|a| match a {
                Atom::Eq(u, v) => (*u == hx && *v == hy) || (*u == hy && *v == hx),
                _ => false,
            })
    })
}

fn fits(a: &Atom, cand: &Atom, h: &BTreeMap<String, Term>) -> bool {
    let mut local: Vec<(&str, &Term)> = Vec::new();
    a.terms().iter().zip(cand.terms()).all(|(t, to)| match t {
        Term::Ind(_) => *t == to,
        Term::Var(v) => match h.get(v) {
            Some(m) => m == to,
            None => match local.iter().find(|(w, _)| w == v) {
                Some((_, m)) => *m == to,
                None => {
                    local.push((v, to));
                    true
                }
            },
        },
    })
}

/// Backtracking search that always extends the atom with the fewest
/// candidates consistent with the mapping so far.
fn extend_hom(
    plan: &[(&Atom, Vec<&Atom>)],
    eqs: &[&Atom],
    specific: &ConjunctiveQuery,
    h: &mut BTreeMap<String, Term>,
) -> bool {
    if plan.is_empty() {
        return eqs_hold(eqs, specific, h);
    }
    let mut best: Option<(usize, Vec<&Atom>)> = None;
    for (i, (a, cands)) in plan.iter().enumerate() {
        let ok: Vec<&Atom> = cands.iter().copied().filter(|c| fits(a, c, h)).collect();
        if ok.is_empty() {
            return false;
        }
        if best.as_ref().map_or(true, |(_, b)| ok.len() < b.len()) {
            best = Some((i, ok));
        }
    }
    let (i, cands) = best.unwrap();
    let atom = plan[i].0;
    let rest: Vec<(&Atom, Vec<&Atom>)> =
        plan.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, (a, c))| (*a, c.clone())).collect();
    for cand in cands {
        let mut bound = Vec::new();
        let ok = atom.terms().iter().zip(cand.terms()).all(|(t, to)| map_term(t, to, h, &mut bound));
        if ok && extend_hom(&rest, eqs, specific, h) {
            return true;
        }
        for v in bound {
            h.remove(&v);
        }
    }
    false
}
