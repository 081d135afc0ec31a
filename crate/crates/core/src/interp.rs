//! Finite interpretations and conjunctive query evaluation over them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::kb::{ABox, Assertion, BasicConcept, Role};
use crate::query::{Atom, ConjunctiveQuery, Term, TOP};

pub type Elem = usize;

#[derive(Debug, Clone, Default)]
struct RoleExt {
    pairs: HashSet<(Elem, Elem)>,
    fwd: HashMap<Elem, Vec<Elem>>,
    bwd: HashMap<Elem, Vec<Elem>>,
}

/// A finite interpretation whose elements are either named individuals or
/// anonymous elements.
#[derive(Debug, Clone, Default)]
pub struct Interpretation {
    names: Vec<String>,
    named: Vec<bool>,
    by_individual: HashMap<String, Elem>,
    concepts: HashMap<String, BTreeSet<Elem>>,
    roles: HashMap<String, RoleExt>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    /// The interpretation whose facts are exactly the assertions of `a`.
    pub fn from_abox(a: &ABox) -> Self {
        let mut i = Interpretation::new();
        for x in a.individuals() {
            i.add_individual(&x);
        }
        for asr in &a.assertions {
            match asr {
                Assertion::Concept(c, x) => {
                    let e = i.by_individual[x];
                    i.add_concept(c, e);
                }
                Assertion::Role(r, x, y) => {
                    let (ex, ey) = (i.by_individual[x], i.by_individual[y]);
                    i.add_role(r, ex, ey);
                }
            }
        }
        i
    }

    pub fn add_individual(&mut self, name: &str) -> Elem {
        if let Some(&e) = self.by_individual.get(name) {
            return e;
        }
        let e = self.names.len();
        self.names.push(name.to_string());
        self.named.push(true);
        self.by_individual.insert(name.to_string(), e);
        e
    }

    pub fn add_anonymous(&mut self, label: String) -> Elem {
        let e = self.names.len();
        self.names.push(label);
        self.named.push(false);
        e
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e]
    }

    pub fn is_individual(&self, e: Elem) -> bool {
        self.named[e]
    }

    pub fn individual(&self, name: &str) -> Option<Elem> {
        self.by_individual.get(name).copied()
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.names.len()
    }

    pub fn add_concept(&mut self, c: &str, e: Elem) -> bool {
        if c == TOP {
            return false;
        }
        self.concepts.entry(c.to_string()).or_default().insert(e)
    }

    pub fn add_role(&mut self, r: &str, x: Elem, y: Elem) -> bool {
        let ext = self.roles.entry(r.to_string()).or_default();
        if !ext.pairs.insert((x, y)) {
            return false;
        }
        ext.fwd.entry(x).or_default().push(y);
        ext.bwd.entry(y).or_default().push(x);
        true
    }

    /// Adds `r(x, y)` for a possibly inverse role.
    pub fn add_role_expr(&mut self, r: &Role, x: Elem, y: Elem) -> bool {
        let (a, b) = r.orient(x, y);
        self.add_role(&r.name, a, b)
    }

    pub fn has_concept(&self, c: &str, e: Elem) -> bool {
        c == TOP || self.concepts.get(c).is_some_and(|s| s.contains(&e))
    }

    pub fn has_role(&self, r: &str, x: Elem, y: Elem) -> bool {
        self.roles.get(r).is_some_and(|ext| ext.pairs.contains(&(x, y)))
    }

    pub fn concept_ext(&self, c: &str) -> Vec<Elem> {
        if c == TOP {
            return self.elements().collect();
        }
        self.concepts.get(c).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    /// Pairs `(x, y)` with `r(x, y)` for a possibly inverse role.
    pub fn role_pairs(&self, r: &Role) -> Vec<(Elem, Elem)> {
        let Some(ext) = self.roles.get(&r.name) else { return vec![] };
        let mut out: Vec<(Elem, Elem)> = ext.pairs.iter().map(|&(a, b)| r.orient(a, b)).collect();
        out.sort_unstable();
        out
    }

    /// Elements `y` with `r(x, y)`.
    pub fn successors(&self, r: &Role, x: Elem) -> &[Elem] {
        let Some(ext) = self.roles.get(&r.name) else { return &[] };
        let map = if r.inverse { &ext.bwd } else { &ext.fwd };
        map.get(&x).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn members(&self, b: &BasicConcept) -> Vec<Elem> {
        match b {
            BasicConcept::Top => self.elements().collect(),
            BasicConcept::Bot => vec![],
            BasicConcept::Name(n) => self.concept_ext(n),
            BasicConcept::Exists(r) => {
                let Some(ext) = self.roles.get(&r.name) else { return vec![] };
                let map = if r.inverse { &ext.bwd } else { &ext.fwd };
                let mut v: Vec<Elem> = map.keys().copied().collect();
                v.sort_unstable();
                v
            }
        }
    }

    pub fn is_member(&self, b: &BasicConcept, e: Elem) -> bool {
        match b {
            BasicConcept::Top => true,
            BasicConcept::Bot => false,
            BasicConcept::Name(n) => self.has_concept(n, e),
            BasicConcept::Exists(r) => !self.successors(r, e).is_empty(),
        }
    }

    pub fn concept_names(&self) -> impl Iterator<Item = &String> {
        self.concepts.keys()
    }

    pub fn role_names(&self) -> impl Iterator<Item = &String> {
        self.roles.keys()
    }

    /// Total number of concept and role facts.
    pub fn fact_count(&self) -> usize {
        self.concepts.values().map(|s| s.len()).sum::<usize>()
            + self.roles.values().map(|r| r.pairs.len()).sum::<usize>()
    }
}

/// A set of answer tuples of fixed arity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnswerSet {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<String>>,
}

impl AnswerSet {
    pub fn empty(arity: usize) -> Self {
        AnswerSet { arity, tuples: BTreeSet::new() }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[&str]) -> bool {
        self.tuples.contains(&t.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    pub fn is_subset(&self, other: &AnswerSet) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    pub fn extend(&mut self, other: AnswerSet) {
        self.tuples.extend(other.tuples);
    }

    /// Keeps the tuples whose components all satisfy `keep`.
    pub fn retain_components(&mut self, keep: impl Fn(&str) -> bool) {
        self.tuples.retain(|t| t.iter().all(|x| keep(x)));
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Var(usize),
    Const(Elem),
}

enum CAtom {
    Concept(String, Slot),
    Role(String, Slot, Slot),
    Eq(Slot, Slot),
}

struct Evaluator<'a> {
    interp: &'a Interpretation,
    atoms: Vec<CAtom>,
    nvars: usize,
    answer: Vec<usize>,
    foreign: Vec<String>,
    results: BTreeSet<Vec<Elem>>,
}

const FOREIGN_BASE: Elem = usize::MAX / 2;

impl<'a> Evaluator<'a> {
    fn value(&self, s: Slot, bind: &[Option<Elem>]) -> Option<Elem> {
        match s {
            Slot::Var(i) => bind[i],
            Slot::Const(e) => Some(e),
        }
    }

    fn cost(&self, a: &CAtom, bind: &[Option<Elem>]) -> usize {
        let i = self.interp;
        match a {
            CAtom::Concept(c, s) => match self.value(*s, bind) {
                Some(_) => 0,
                None => i.concept_ext(c).len().max(1),
            },
            CAtom::Role(r, x, y) => match (self.value(*x, bind), self.value(*y, bind)) {
                (Some(_), Some(_)) => 0,
                (Some(e), None) => 1 + i.successors(&Role::named(r.clone()), e).len(),
                (None, Some(e)) => 1 + i.successors(&Role::inverse_of(r.clone()), e).len(),
                (None, None) => 2 + i.roles.get(r).map_or(0, |x| x.pairs.len()),
            },
            CAtom::Eq(x, y) => match (self.value(*x, bind), self.value(*y, bind)) {
                (None, None) => usize::MAX,
                _ => 0,
            },
        }
    }

    fn solve(&mut self, remaining: &mut Vec<usize>, bind: &mut Vec<Option<Elem>>) {
        if remaining.is_empty() {
            self.finish(bind, 0);
            return;
        }
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(p, &ai)| (p, self.cost(&self.atoms[ai], bind)))
            .min_by_key(|&(_, c)| c)
            .unwrap();
        let ai = remaining.swap_remove(pos);
        let candidates: Vec<Vec<(usize, Elem)>> = self.candidates(ai, bind);
        for assignment in candidates {
            for &(v, e) in &assignment {
                bind[v] = Some(e);
            }
            self.solve(remaining, bind);
            for &(v, _) in &assignment {
                bind[v] = None;
            }
        }
        remaining.push(ai);
        let last = remaining.len() - 1;
        remaining.swap(pos, last);
    }

    /// Extensions of `bind` satisfying atom `ai`, as lists of new bindings.
    fn candidates(&self, ai: usize, bind: &[Option<Elem>]) -> Vec<Vec<(usize, Elem)>> {
        let i = self.interp;
        let var_of = |s: Slot| match s {
            Slot::Var(v) => v,
            Slot::Const(_) => unreachable!(),
        };
        match &self.atoms[ai] {
            CAtom::Concept(c, s) => match self.value(*s, bind) {
                Some(e) => {
                    let ok = e < FOREIGN_BASE && i.has_concept(c, e);
                    if ok {
                        vec![vec![]]
                    } else {
                        vec![]
                    }
                }
                None => i.concept_ext(c).into_iter().map(|e| vec![(var_of(*s), e)]).collect(),
            },
            CAtom::Role(r, x, y) => {
                let (vx, vy) = (self.value(*x, bind), self.value(*y, bind));
                match (vx, vy) {
                    (Some(a), Some(b)) => {
                        if i.has_role(r, a, b) {
                            vec![vec![]]
                        } else {
                            vec![]
                        }
                    }
                    (Some(a), None) => i
                        .successors(&Role::named(r.clone()), a)
                        .iter()
                        .map(|&b| vec![(var_of(*y), b)])
                        .collect(),
                    (None, Some(b)) => i
                        .successors(&Role::inverse_of(r.clone()), b)
                        .iter()
                        .map(|&a| vec![(var_of(*x), a)])
                        .collect(),
                    (None, None) => {
                        let (sx, sy) = (var_of(*x), var_of(*y));
                        i.role_pairs(&Role::named(r.clone()))
                            .into_iter()
                            .filter(|(a, b)| sx != sy || a == b)
                            .map(|(a, b)| if sx == sy { vec![(sx, a)] } else { vec![(sx, a), (sy, b)] })
                            .collect()
                    }
                }
            }
            CAtom::Eq(x, y) => match (self.value(*x, bind), self.value(*y, bind)) {
                (Some(a), Some(b)) => {
                    if a == b {
                        vec![vec![]]
                    } else {
                        vec![]
                    }
                }
                (Some(a), None) => vec![vec![(var_of(*y), a)]],
                (None, Some(b)) => vec![vec![(var_of(*x), b)]],
                (None, None) => {
                    let (sx, sy) = (var_of(*x), var_of(*y));
                    i.elements().map(|e| if sx == sy { vec![(sx, e)] } else { vec![(sx, e), (sy, e)] }).collect()
                }
            },
        }
    }

    /// Answer variables left unbound range over the whole domain.
    fn finish(&mut self, bind: &mut Vec<Option<Elem>>, from: usize) {
        for k in from..self.answer.len() {
            let v = self.answer[k];
            if bind[v].is_none() {
                for e in self.interp.elements() {
                    bind[v] = Some(e);
                    self.finish(bind, k + 1);
                }
                bind[v] = None;
                return;
            }
        }
        let tuple: Vec<Elem> = self.answer.iter().map(|&v| bind[v].unwrap()).collect();
        self.results.insert(tuple);
    }

    fn elem_name(&self, e: Elem) -> String {
        if e >= FOREIGN_BASE {
            self.foreign[e - FOREIGN_BASE].clone()
        } else {
            self.interp.name(e).to_string()
        }
    }
}

/// Answers of `q` over `interp` as tuples of element names.
pub fn evaluate(q: &ConjunctiveQuery, interp: &Interpretation) -> AnswerSet {
    evaluate_elems(q, interp)
        .map(|(ev, res)| AnswerSet {
            arity: q.answer_vars.len(),
            tuples: res.into_iter().map(|t| t.into_iter().map(|e| ev.elem_name(e)).collect()).collect(),
        })
        .unwrap_or_else(|| AnswerSet::empty(q.answer_vars.len()))
}

/// Like [`evaluate`] but keeps only tuples of named individuals.
pub fn evaluate_individuals(q: &ConjunctiveQuery, interp: &Interpretation) -> AnswerSet {
    let Some((ev, res)) = evaluate_elems(q, interp) else {
        return AnswerSet::empty(q.answer_vars.len());
    };
    AnswerSet {
        arity: q.answer_vars.len(),
        tuples: res
            .into_iter()
            .filter(|t| t.iter().all(|&e| e < FOREIGN_BASE && interp.is_individual(e)))
            .map(|t| t.into_iter().map(|e| ev.elem_name(e)).collect())
            .collect(),
    }
}

fn evaluate_elems<'a>(q: &ConjunctiveQuery, interp: &'a Interpretation) -> Option<(Evaluator<'a>, BTreeSet<Vec<Elem>>)> {
    let mut var_idx: BTreeMap<String, usize> = BTreeMap::new();
    for v in q.vars() {
        let n = var_idx.len();
        var_idx.insert(v, n);
    }
    let mut foreign: Vec<String> = Vec::new();
    let mut slot = |t: &Term| -> Slot {
        match t {
            Term::Var(v) => Slot::Var(var_idx[v]),
            Term::Ind(a) => match interp.individual(a) {
                Some(e) => Slot::Const(e),
                None => {
                    let pos = foreign.iter().position(|f| f == a).unwrap_or_else(|| {
                        foreign.push(a.clone());
                        foreign.len() - 1
                    });
                    Slot::Const(FOREIGN_BASE + pos)
                }
            },
        }
    };
    let mut atoms = Vec::new();
    for a in &q.atoms {
        atoms.push(match a {
            Atom::Concept(c, t) => CAtom::Concept(c.clone(), slot(t)),
            Atom::Role(r, x, y) => CAtom::Role(r.clone(), slot(x), slot(y)),
            Atom::Eq(x, y) => CAtom::Eq(slot(x), slot(y)),
        });
    }
    let answer = q.answer_vars.iter().map(|v| var_idx[v]).collect();
    let mut ev = Evaluator { interp, atoms, nvars: var_idx.len(), answer, foreign, results: BTreeSet::new() };
    let mut remaining: Vec<usize> = (0..ev.atoms.len()).collect();
    let mut bind = vec![None; ev.nvars];
    ev.solve(&mut remaining, &mut bind);
    let res = std::mem::take(&mut ev.results);
    Some((ev, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    fn abox() -> ABox {
        ABox::new([
            Assertion::Concept("A".into(), "a".into()),
            Assertion::Role("r".into(), "a".into(), "b".into()),
            Assertion::Role("r".into(), "b".into(), "b".into()),
        ])
    }

    #[test]
    fn joins_and_equalities() {
        let i = Interpretation::from_abox(&abox());
        let q = ConjunctiveQuery::new(
            vec!["x".into()],
            vec![Atom::role("r", v("x"), v("y")), Atom::Eq(v("y"), Term::ind("b"))],
        );
        let ans = evaluate(&q, &i);
        assert_eq!(ans.len(), 2);
        let q = ConjunctiveQuery::new(vec!["x".into()], vec![Atom::role("r", v("x"), v("x"))]);
        assert!(evaluate(&q, &i).contains(&["b"]));
        assert_eq!(evaluate(&q, &i).len(), 1);
    }

    #[test]
    fn boolean_queries() {
        let i = Interpretation::from_abox(&abox());
        let yes = ConjunctiveQuery::new(vec![], vec![Atom::concept("A", v("x"))]);
        let no = ConjunctiveQuery::new(vec![], vec![Atom::concept("B", v("x"))]);
        assert_eq!(evaluate(&yes, &i).len(), 1);
        assert!(evaluate(&no, &i).is_empty());
    }

    #[test]
    fn unknown_individuals_and_top() {
        let i = Interpretation::from_abox(&abox());
        let q = ConjunctiveQuery::new(vec!["x".into()], vec![Atom::Eq(v("x"), Term::ind("zz"))]);
        assert!(evaluate(&q, &i).contains(&["zz"]));
        assert!(evaluate_individuals(&q, &i).is_empty());
        let q = ConjunctiveQuery::new(vec!["x".into()], vec![Atom::concept(TOP, v("x"))]);
        assert_eq!(evaluate(&q, &i).len(), 2);
    }
}
