//! Recursion graph, TBox classification, simple super-roles and
//! k-boundedness of ABoxes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::kb::{ABox, Assertion, Axiom, BasicConcept, Role, TBox};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Concept(String),
    Role(String),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Concept(c) => write!(f, "v_{c}"),
            Vertex::Role(r) => write!(f, "v_{r}"),
        }
    }
}

/// Dependency graph: an edge `u → v` means the extension of `u` may be
/// derived from that of `v`.
#[derive(Debug, Clone, Default)]
pub struct RecursionGraph {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<(Vertex, Vertex)>,
}

impl RecursionGraph {
    pub fn has_edge(&self, from: &Vertex, to: &Vertex) -> bool {
        self.edges.contains(&(from.clone(), to.clone()))
    }

    /// Strongly connected components that contain a cycle.
    pub fn cyclic_components(&self) -> Vec<BTreeSet<Vertex>> {
        let mut g: DiGraph<Vertex, ()> = DiGraph::new();
        let mut idx: HashMap<&Vertex, NodeIndex> = HashMap::new();
        for v in &self.vertices {
            idx.insert(v, g.add_node(v.clone()));
        }
        for (a, b) in &self.edges {
            g.add_edge(idx[a], idx[b], ());
        }
        tarjan_scc(&g)
            .into_iter()
            .filter(|c| c.len() > 1 || self.has_edge(&g[c[0]], &g[c[0]]))
            .map(|c| c.into_iter().map(|n| g[n].clone()).collect())
            .collect()
    }

    pub fn recursive_vertices(&self) -> BTreeSet<Vertex> {
        self.cyclic_components().into_iter().flatten().collect()
    }
}

fn concept_vertex(b: &BasicConcept) -> Option<Vertex> {
    match b {
        BasicConcept::Name(n) => Some(Vertex::Concept(n.clone())),
        BasicConcept::Exists(r) => Some(Vertex::Role(r.name.clone())),
        BasicConcept::Top | BasicConcept::Bot => None,
    }
}

pub fn recursion_graph(t: &TBox) -> RecursionGraph {
    let mut g = RecursionGraph::default();
    let edge = |g: &mut RecursionGraph, a: Vertex, b: Vertex| {
        g.vertices.insert(a.clone());
        g.vertices.insert(b.clone());
        g.edges.insert((a, b));
    };
    for ax in &t.axioms {
        match ax {
            Axiom::ConceptInc(b1, b2) => {
                for v in [concept_vertex(b1), concept_vertex(b2)].into_iter().flatten() {
                    g.vertices.insert(v);
                }
                if let (Some(v1), Some(v2)) = (concept_vertex(b1), concept_vertex(b2)) {
                    edge(&mut g, v2, v1);
                }
            }
            Axiom::RoleInc(r, s) => edge(&mut g, Vertex::Role(s.name.clone()), Vertex::Role(r.name.clone())),
            Axiom::Cri(r, s, u) => {
                edge(&mut g, Vertex::Role(u.name.clone()), Vertex::Role(r.name.clone()));
                edge(&mut g, Vertex::Role(u.name.clone()), Vertex::Role(s.name.clone()));
            }
            Axiom::DisjConcepts(b1, b2) => {
                for v in [concept_vertex(b1), concept_vertex(b2)].into_iter().flatten() {
                    g.vertices.insert(v);
                }
            }
            Axiom::DisjRoles(r, s) => {
                g.vertices.insert(Vertex::Role(r.name.clone()));
                g.vertices.insert(Vertex::Role(s.name.clone()));
            }
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TBoxClass {
    NonRecursive,
    RecursionSafe,
    GeneralHR,
}

impl fmt::Display for TBoxClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TBoxClass::NonRecursive => "non-recursive",
            TBoxClass::RecursionSafe => "recursion-safe",
            TBoxClass::GeneralHR => "general",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub class: TBoxClass,
    /// Roles that are the target of a recursive complex role inclusion.
    pub recursive_roles: BTreeSet<String>,
    /// For each recursive role `r`, the roles `s` with `r·s ⊑ r`.
    pub guard_sets: BTreeMap<String, BTreeSet<String>>,
    /// Human-readable reasons when the class is [`TBoxClass::GeneralHR`].
    pub violations: Vec<String>,
}

impl Classification {
    /// Whether the TBox satisfies the existential restriction on the middle
    /// roles of its complex role inclusions, which the small model needs.
    pub fn guards_unreachable(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Roles reachable from `r` through inclusions whose right-hand side is a
/// simple role, including `r` itself.
pub fn simple_superroles(t: &TBox, r: &Role) -> BTreeSet<Role> {
    let mut seen: BTreeSet<Role> = BTreeSet::new();
    let mut stack = vec![r.clone()];
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        for ax in &t.axioms {
            if let Axiom::RoleInc(a, b) = ax {
                if !t.is_simple(&b.name) {
                    continue;
                }
                if *a == cur {
                    stack.push(b.clone());
                } else if a.inv() == cur {
                    stack.push(b.inv());
                }
            }
        }
    }
    seen
}

/// Classifies `t` as non-recursive, recursion-safe or general.
pub fn classify(t: &TBox) -> Classification {
    let g = recursion_graph(t);
    let components = g.cyclic_components();
    let component_of = |r: &str| components.iter().find(|c| c.contains(&Vertex::Role(r.to_string())));

    let mut recursive_roles = BTreeSet::new();
    let mut guard_sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut any_recursive = false;

    for (r, s, u) in t.cris() {
        if let Some(comp) = component_of(&u.name) {
            any_recursive = true;
            recursive_roles.insert(u.name.clone());
            if comp.len() > 1 {
                violations.push(format!(
                    "{r}·{s} ⊑ {u}: `{}` lies on a cycle through other symbols",
                    u.name
                ));
            } else if r.name != u.name {
                violations.push(format!("{r}·{s} ⊑ {u}: recursive target differs from the first role"));
            } else {
                guard_sets.entry(u.name.clone()).or_default().insert(s.name.clone());
            }
        }
    }

    // No existential may produce a role below a middle role.
    let middles: BTreeSet<&str> = t.cris().map(|(_, s, _)| s.name.as_str()).collect();
    for ax in &t.axioms {
        if let Axiom::ConceptInc(_, BasicConcept::Exists(role)) = ax {
            for sup in simple_superroles(t, role) {
                if middles.contains(sup.name.as_str()) {
                    violations.push(format!("{ax}: existential reaches middle role `{}`", sup.name));
                }
            }
        }
    }

    let class = if violations.is_empty() {
        if any_recursive {
            TBoxClass::RecursionSafe
        } else {
            TBoxClass::NonRecursive
        }
    } else if any_recursive {
        TBoxClass::GeneralHR
    } else {
        TBoxClass::NonRecursive
    };
    Classification { class, recursive_roles, guard_sets, violations }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    /// A path of the recursive role's guard roles that is longer than `k`.
    NotBounded { role: String, witness: Vec<String> },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("k must be positive, got {0}")]
pub struct InvalidBound(pub i64);

const PATH_SEARCH_BUDGET: usize = 10_000;

/// Directed edges `a → b` of `role`'s guard relation in the ABox.
fn guard_edges(t: &TBox, a: &ABox, guards: &BTreeSet<String>) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for asr in &a.assertions {
        if let Assertion::Role(p, x, y) = asr {
            for sup in simple_superroles(t, &Role::named(p.clone())) {
                if guards.contains(&sup.name) {
                    let (from, to) = sup.orient(x, y);
                    out.entry(from.clone()).or_default().insert(to.clone());
                }
            }
        }
    }
    out
}

/// Longest guard path for each recursive role: `Some(path)` with the
/// individuals visited, or `None` if the search budget ran out.
fn longest_path(edges: &BTreeMap<String, BTreeSet<String>>) -> Option<Vec<String>> {
    let nodes: BTreeSet<&String> = edges
        .iter()
        .flat_map(|(a, bs)| std::iter::once(a).chain(bs.iter()))
        .collect();
    // Acyclic case: dynamic programming over a topological order.
    let mut indeg: BTreeMap<&String, usize> = nodes.iter().map(|n| (*n, 0)).collect();
    for bs in edges.values() {
        for b in bs {
            *indeg.get_mut(b).unwrap() += 1;
        }
    }
    let mut queue: Vec<&String> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut topo = Vec::new();
    while let Some(n) = queue.pop() {
        topo.push(n);
        if let Some(bs) = edges.get(n) {
            for b in bs {
                let d = indeg.get_mut(b).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push(b);
                }
            }
        }
    }
    if topo.len() == nodes.len() {
        let mut best: BTreeMap<&String, Vec<String>> = BTreeMap::new();
        for n in topo.iter().rev() {
            let mut path = vec![(*n).clone()];
            if let Some(bs) = edges.get(*n) {
                if let Some(tail) = bs.iter().map(|b| &best[b]).max_by_key(|p| p.len()) {
                    path.extend(tail.iter().cloned());
                }
            }
            best.insert(n, path);
        }
        return Some(best.into_values().max_by_key(|p| p.len()).unwrap_or_default());
    }

    // Cyclic case: bounded search over paths whose intermediate nodes are
    // pairwise distinct and differ from both endpoints.
    let mut budget = PATH_SEARCH_BUDGET;
    let mut best: Vec<String> = Vec::new();
    for start in &nodes {
        let mut path = vec![(*start).clone()];
        if !dfs(edges, &mut path, &mut best, &mut budget) {
            return None;
        }
    }
    Some(best)
}

fn dfs(
    edges: &BTreeMap<String, BTreeSet<String>>,
    path: &mut Vec<String>,
    best: &mut Vec<String>,
    budget: &mut usize,
) -> bool {
    if path.len() > best.len() {
        *best = path.clone();
    }
    let last = path.last().unwrap().clone();
    // A path that returned to its start cannot be extended: the start
    // would become an intermediate node.
    if path.len() > 1 && last == path[0] {
        return true;
    }
    let Some(next) = edges.get(&last) else { return true };
    for b in next {
        let start = &path[0];
        let used_inside = path[1..].contains(b);
        if used_inside {
            continue;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        // Extending through `b` makes `last` intermediate; it must differ
        // from the new endpoint and the start, which holds unless last is
        // the start itself (only for the first step).
        if path.len() > 1 && (last == *b || last == *start) {
            continue;
        }
        path.push(b.clone());
        let ok = dfs(edges, path, best, budget);
        path.pop();
        if !ok {
            return false;
        }
    }
    true
}

/// Length of the longest guard path over all recursive roles, or `None`
/// when the search budget is exhausted.
pub fn longest_guard_path(t: &TBox, a: &ABox, class: &Classification) -> Option<(usize, Option<(String, Vec<String>)>)> {
    let mut best: (usize, Option<(String, Vec<String>)>) = (0, None);
    for (r, guards) in &class.guard_sets {
        let edges = guard_edges(t, a, guards);
        let path = longest_path(&edges)?;
        let len = path.len().saturating_sub(1);
        if len > best.0 {
            best = (len, Some((r.clone(), path)));
        }
    }
    Some(best)
}

/// Whether every guard path in `a` has at most `k` edges.
pub fn check_k_bounded(t: &TBox, a: &ABox, k: i64) -> Result<Boundedness, InvalidBound> {
    if k <= 0 {
        return Err(InvalidBound(k));
    }
    let class = classify(t);
    Ok(match longest_guard_path(t, a, &class) {
        None => Boundedness::Unknown,
        Some((len, witness)) if len as i64 > k => {
            let (role, path) = witness.expect("a positive length has a witness");
            Boundedness::NotBounded { role, witness: path }
        }
        Some(_) => Boundedness::Bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Assertion, BasicConcept as B};

    fn cri(r: &str, s: &str, t: &str) -> Axiom {
        Axiom::Cri(Role::named(r), Role::named(s), Role::named(t))
    }

    #[test]
    fn self_loop_is_recursion_safe() {
        let t = TBox::new(vec![cri("r", "s", "r")], ["s".to_string()]);
        let c = classify(&t);
        assert_eq!(c.class, TBoxClass::RecursionSafe);
        assert_eq!(c.guard_sets["r"], BTreeSet::from(["s".to_string()]));
    }

    #[test]
    fn existential_guard_is_general() {
        let t = TBox::new(
            vec![cri("r", "s", "r"), Axiom::ConceptInc(B::name("A"), B::Exists(Role::named("s")))],
            ["s".to_string()],
        );
        assert_eq!(classify(&t).class, TBoxClass::GeneralHR);
    }

    #[test]
    fn two_cycle_is_general() {
        let t = TBox::new(
            vec![cri("r", "s", "p"), Axiom::RoleInc(Role::named("p"), Role::named("r"))],
            ["s".to_string()],
        );
        let c = classify(&t);
        assert_eq!(c.class, TBoxClass::GeneralHR);
        assert!(!c.violations.is_empty());
    }

    #[test]
    fn recursion_graph_edges() {
        let t = TBox::new(
            vec![
                Axiom::ConceptInc(B::name("A"), B::name("C")),
                Axiom::ConceptInc(B::Exists(Role::inverse_of("p")), B::name("A")),
                cri("r", "s", "t"),
            ],
            ["s".to_string()],
        );
        let g = recursion_graph(&t);
        assert!(g.has_edge(&Vertex::Concept("C".into()), &Vertex::Concept("A".into())));
        assert!(g.has_edge(&Vertex::Concept("A".into()), &Vertex::Role("p".into())));
        assert!(g.has_edge(&Vertex::Role("t".into()), &Vertex::Role("s".into())));
        assert!(g.recursive_vertices().is_empty());
    }

    #[test]
    fn simple_superroles_follow_inverses() {
        let t = TBox::new(
            vec![
                Axiom::RoleInc(Role::named("p"), Role::inverse_of("s")),
                Axiom::RoleInc(Role::named("s"), Role::named("u")),
                Axiom::RoleInc(Role::named("u"), Role::named("big")),
            ],
            ["p", "s", "u"].map(String::from),
        );
        let sup = simple_superroles(&t, &Role::named("p"));
        assert_eq!(
            sup,
            BTreeSet::from([Role::named("p"), Role::inverse_of("s"), Role::inverse_of("u")])
        );
    }

    fn chain_abox(n: usize) -> ABox {
        ABox::new((0..n).map(|i| Assertion::Role("s".into(), format!("a{i}"), format!("a{}", i + 1))))
    }

    #[test]
    fn chain_lengths() {
        let t = TBox::new(vec![cri("r", "s", "r")], ["s".to_string()]);
        assert_eq!(check_k_bounded(&t, &chain_abox(3), 3), Ok(Boundedness::Bounded));
        match check_k_bounded(&t, &chain_abox(3), 2).unwrap() {
            Boundedness::NotBounded { witness, .. } => assert_eq!(witness.len(), 4),
            other => panic!("{other:?}"),
        }
        assert_eq!(check_k_bounded(&t, &chain_abox(3), 0), Err(InvalidBound(0)));
    }

    #[test]
    fn cycles_bound_by_distinct_intermediates() {
        let t = TBox::new(vec![cri("r", "s", "r")], ["s".to_string()]);
        let mut a = chain_abox(2);
        a.insert(Assertion::Role("s".into(), "a2".into(), "a0".into()));
        // a0 → a1 → a2 → a0 has distinct intermediates a1, a2.
        assert_eq!(check_k_bounded(&t, &a, 3), Ok(Boundedness::Bounded));
        assert!(matches!(check_k_bounded(&t, &a, 2), Ok(Boundedness::NotBounded { .. })));
    }
}
