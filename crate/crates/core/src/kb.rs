//! Knowledge base data model: roles, basic concepts, axioms, TBoxes and ABoxes.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A role name or its inverse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role {
    pub name: String,
    pub inverse: bool,
}

impl Role {
    pub fn named(name: impl Into<String>) -> Self {
        Role { name: name.into(), inverse: false }
    }

    pub fn inverse_of(name: impl Into<String>) -> Self {
        Role { name: name.into(), inverse: true }
    }

    pub fn inv(&self) -> Role {
        Role { name: self.name.clone(), inverse: !self.inverse }
    }

    /// Orients a pair `(x, y)` read as `self(x, y)` into the pair stored
    /// under the role name.
    pub fn orient<T>(&self, x: T, y: T) -> (T, T) {
        if self.inverse {
            (y, x)
        } else {
            (x, y)
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}⁻", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicConcept {
    Top,
    Bot,
    Name(String),
    Exists(Role),
}

impl BasicConcept {
    pub fn name(n: impl Into<String>) -> Self {
        BasicConcept::Name(n.into())
    }

    pub fn exists(r: Role) -> Self {
        BasicConcept::Exists(r)
    }
}

impl fmt::Display for BasicConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicConcept::Top => f.write_str("⊤"),
            BasicConcept::Bot => f.write_str("⊥"),
            BasicConcept::Name(n) => f.write_str(n),
            BasicConcept::Exists(r) => write!(f, "∃{r}"),
        }
    }
}

/// A TBox axiom. Roles inside [`Axiom::Cri`] are always role names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    ConceptInc(BasicConcept, BasicConcept),
    RoleInc(Role, Role),
    Cri(Role, Role, Role),
    DisjConcepts(BasicConcept, BasicConcept),
    DisjRoles(Role, Role),
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::ConceptInc(a, b) => write!(f, "{a} ⊑ {b}"),
            Axiom::RoleInc(a, b) => write!(f, "{a} ⊑ {b}"),
            Axiom::Cri(r, s, t) => write!(f, "{r}·{s} ⊑ {t}"),
            Axiom::DisjConcepts(a, b) => write!(f, "disj({a}, {b})"),
            Axiom::DisjRoles(a, b) => write!(f, "disj({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TBox {
    pub axioms: Vec<Axiom>,
    pub simple_roles: BTreeSet<String>,
}

impl TBox {
    pub fn new(axioms: Vec<Axiom>, simple_roles: impl IntoIterator<Item = String>) -> Self {
        TBox { axioms, simple_roles: simple_roles.into_iter().collect() }
    }

    pub fn is_simple(&self, role: &str) -> bool {
        self.simple_roles.contains(role)
    }

    pub fn cris(&self) -> impl Iterator<Item = (&Role, &Role, &Role)> {
        self.axioms.iter().filter_map(|ax| match ax {
            Axiom::Cri(r, s, t) => Some((r, s, t)),
            _ => None,
        })
    }

    /// Whether any axiom has an existential on its right-hand side.
    pub fn has_existentials(&self) -> bool {
        self.axioms
            .iter()
            .any(|ax| matches!(ax, Axiom::ConceptInc(_, BasicConcept::Exists(_))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    Concept(String, String),
    Role(String, String, String),
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::Concept(c, a) => write!(f, "{c}({a})"),
            Assertion::Role(r, a, b) => write!(f, "{r}({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ABox {
    pub assertions: BTreeSet<Assertion>,
}

impl ABox {
    pub fn new(assertions: impl IntoIterator<Item = Assertion>) -> Self {
        ABox { assertions: assertions.into_iter().collect() }
    }

    pub fn insert(&mut self, a: Assertion) -> bool {
        self.assertions.insert(a)
    }

    pub fn individuals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.assertions {
            match a {
                Assertion::Concept(_, x) => {
                    out.insert(x.clone());
                }
                Assertion::Role(_, x, y) => {
                    out.insert(x.clone());
                    out.insert(y.clone());
                }
            }
        }
        out
    }

    pub fn role_pairs<'a>(&'a self, role: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.assertions.iter().filter_map(move |a| match a {
            Assertion::Role(r, x, y) if r == role => Some((x.as_str(), y.as_str())),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
}

impl Signature {
    pub fn contains_name(&self, n: &str) -> bool {
        self.concepts.contains(n) || self.roles.contains(n) || self.individuals.contains(n)
    }
}

fn note_concept(sig: &mut Signature, b: &BasicConcept) {
    match b {
        BasicConcept::Name(n) => {
            sig.concepts.insert(n.clone());
        }
        BasicConcept::Exists(r) => {
            sig.roles.insert(r.name.clone());
        }
        BasicConcept::Top | BasicConcept::Bot => {}
    }
}

pub fn signature_of(t: &TBox, a: &ABox) -> Signature {
    let mut sig = Signature::default();
    for ax in &t.axioms {
        match ax {
            Axiom::ConceptInc(b1, b2) | Axiom::DisjConcepts(b1, b2) => {
                note_concept(&mut sig, b1);
                note_concept(&mut sig, b2);
            }
            Axiom::RoleInc(r, s) | Axiom::DisjRoles(r, s) => {
                sig.roles.insert(r.name.clone());
                sig.roles.insert(s.name.clone());
            }
            Axiom::Cri(r, s, u) => {
                for x in [r, s, u] {
                    sig.roles.insert(x.name.clone());
                }
            }
        }
    }
    sig.roles.extend(t.simple_roles.iter().cloned());
    for asr in &a.assertions {
        match asr {
            Assertion::Concept(c, x) => {
                sig.concepts.insert(c.clone());
                sig.individuals.insert(x.clone());
            }
            Assertion::Role(r, x, y) => {
                sig.roles.insert(r.clone());
                sig.individuals.insert(x.clone());
                sig.individuals.insert(y.clone());
            }
        }
    }
    sig
}

/// Names starting with an underscore are reserved for generated symbols.
pub fn is_generated_name(n: &str) -> bool {
    n.starts_with('_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{axiom}: {message}")]
pub struct ValidationError {
    pub axiom: Axiom,
    pub message: String,
}

/// Checks the well-formedness conditions on simple roles and complex role
/// inclusions.
pub fn validate_tbox(t: &TBox) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    let mut err = |ax: &Axiom, m: &str| {
        errors.push(ValidationError { axiom: ax.clone(), message: m.to_string() })
    };
    for ax in &t.axioms {
        match ax {
            Axiom::Cri(r, s, u) => {
                if r.inverse || s.inverse || u.inverse {
                    err(ax, "complex role inclusions take role names only");
                }
                if !t.is_simple(&s.name) {
                    err(ax, &format!("second role `{}` must be simple", s.name));
                }
                if t.is_simple(&u.name) {
                    err(ax, &format!("target role `{}` must not be simple", u.name));
                }
            }
            Axiom::RoleInc(s, u) => {
                if t.is_simple(&u.name) && !t.is_simple(&s.name) {
                    err(
                        ax,
                        &format!("`{}` is included in simple role `{}` but is not simple", s.name, u.name),
                    );
                }
            }
            _ => {}
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Produces fresh concept and role names that do not clash with a signature.
#[derive(Debug, Clone)]
pub struct NameSupply {
    taken: BTreeSet<String>,
    next: usize,
}

impl NameSupply {
    pub fn new(sig: &Signature) -> Self {
        let mut taken = BTreeSet::new();
        taken.extend(sig.concepts.iter().cloned());
        taken.extend(sig.roles.iter().cloned());
        taken.extend(sig.individuals.iter().cloned());
        NameSupply { taken, next: 0 }
    }

    fn claim(&mut self, mut candidate: String) -> String {
        while self.taken.contains(&candidate) {
            candidate.insert(0, '_');
        }
        self.taken.insert(candidate.clone());
        candidate
    }

    pub fn concept(&mut self) -> String {
        let c = format!("_N{}", self.next);
        self.next += 1;
        self.claim(c)
    }

    pub fn role(&mut self) -> String {
        let c = format!("_n{}", self.next);
        self.next += 1;
        self.claim(c)
    }

    /// A fresh role derived from `base`, e.g. `_occursIn_2`.
    pub fn derived_role(&mut self, base: &str, suffix: &str) -> String {
        self.claim(format!("_{base}_{suffix}"))
    }
}

/// Rewrites a TBox into normal form.
///
/// Concept inclusions keep at most one existential side, role inclusions
/// have a role name on the left, disjointness holds between concept names
/// or role names only, and `B ⊑ ⊥` becomes `disj(B, B)`. Fresh symbols
/// come from a [`NameSupply`] seeded with `sig`.
pub fn normalize(t: &TBox, sig: &Signature) -> TBox {
    let mut names = NameSupply::new(sig);
    normalize_with(t, &mut names)
}

pub fn normalize_with(t: &TBox, names: &mut NameSupply) -> TBox {
    let mut out: Vec<Axiom> = Vec::new();
    let push = |out: &mut Vec<Axiom>, ax: Axiom| {
        if !out.contains(&ax) {
            out.push(ax);
        }
    };
    for ax in &t.axioms {
        match ax {
            Axiom::ConceptInc(b1, b2) => match (b1, b2) {
                (BasicConcept::Bot, _) | (_, BasicConcept::Top) => {}
                (_, BasicConcept::Bot) => {
                    for d in disjoint_concepts(b1, b1, names, &mut Vec::new()) {
                        push(&mut out, d);
                    }
                }
                (BasicConcept::Exists(_), BasicConcept::Exists(_))
                | (BasicConcept::Top, BasicConcept::Exists(_)) => {
                    let x = BasicConcept::Name(names.concept());
                    push(&mut out, Axiom::ConceptInc(b1.clone(), x.clone()));
                    push(&mut out, Axiom::ConceptInc(x, b2.clone()));
                }
                _ => push(&mut out, ax.clone()),
            },
            Axiom::RoleInc(r, s) => {
                if r == s {
                    continue;
                }
                let ax = if r.inverse {
                    Axiom::RoleInc(r.inv(), s.inv())
                } else {
                    ax.clone()
                };
                push(&mut out, ax);
            }
            Axiom::Cri(..) => push(&mut out, ax.clone()),
            Axiom::DisjConcepts(b1, b2) => {
                let mut extra = Vec::new();
                for d in disjoint_concepts(b1, b2, names, &mut extra) {
                    push(&mut out, d);
                }
                for e in extra {
                    push(&mut out, e);
                }
            }
            Axiom::DisjRoles(r, s) => {
                let (r, s) = if r.inverse { (r.inv(), s.inv()) } else { (r.clone(), s.clone()) };
                if s.inverse {
                    let fresh = names.role();
                    push(&mut out, Axiom::RoleInc(Role::named(s.name.clone()), Role::inverse_of(fresh.clone())));
                    push(&mut out, Axiom::DisjRoles(r, Role::named(fresh)));
                } else {
                    push(&mut out, Axiom::DisjRoles(r, s));
                }
            }
        }
    }
    // Inclusions introduced for disjointness are emitted before the
    // disjointness itself so that the order reads naturally.
    let mut incs: Vec<Axiom> = Vec::new();
    let mut disj: Vec<Axiom> = Vec::new();
    let mut rest: Vec<Axiom> = Vec::new();
    for ax in out {
        match ax {
            Axiom::DisjConcepts(..) | Axiom::DisjRoles(..) => disj.push(ax),
            Axiom::ConceptInc(..) | Axiom::RoleInc(..) => incs.push(ax),
            Axiom::Cri(..) => rest.push(ax),
        }
    }
    incs.extend(rest);
    incs.extend(disj);
    TBox { axioms: incs, simple_roles: t.simple_roles.clone() }
}

fn disjoint_concepts(
    b1: &BasicConcept,
    b2: &BasicConcept,
    names: &mut NameSupply,
    extra: &mut Vec<Axiom>,
) -> Vec<Axiom> {
    let atomize = |b: &BasicConcept, names: &mut NameSupply, extra: &mut Vec<Axiom>| match b {
        BasicConcept::Name(_) => Some(b.clone()),
        BasicConcept::Exists(_) | BasicConcept::Top => {
            let x = BasicConcept::Name(names.concept());
            extra.push(Axiom::ConceptInc(b.clone(), x.clone()));
            Some(x)
        }
        BasicConcept::Bot => None,
    };
    // disj(⊤, B) says B is empty.
    let (b1, b2) = match (b1, b2) {
        (BasicConcept::Top, b) | (b, BasicConcept::Top) => (b, b),
        _ => (b1, b2),
    };
    let Some(x1) = atomize(b1, names, extra) else { return vec![] };
    let x2 = if b1 == b2 {
        x1.clone()
    } else {
        match atomize(b2, names, extra) {
            Some(x) => x,
            None => return vec![],
        }
    };
    vec![Axiom::DisjConcepts(x1, x2)]
}

/// Whether every axiom already has normal form.
pub fn is_normal(t: &TBox) -> bool {
    t.axioms.iter().all(|ax| match ax {
        Axiom::ConceptInc(b1, b2) => {
            !matches!(b2, BasicConcept::Top | BasicConcept::Bot)
                && !matches!(b1, BasicConcept::Bot)
                && !(matches!(b1, BasicConcept::Exists(_) | BasicConcept::Top)
                    && matches!(b2, BasicConcept::Exists(_)))
        }
        Axiom::RoleInc(r, _) => !r.inverse,
        Axiom::Cri(r, s, t) => !r.inverse && !s.inverse && !t.inverse,
        Axiom::DisjConcepts(a, b) => {
            matches!(a, BasicConcept::Name(_)) && matches!(b, BasicConcept::Name(_))
        }
        Axiom::DisjRoles(r, s) => !r.inverse && !s.inverse,
    })
}
