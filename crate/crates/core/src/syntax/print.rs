use std::borrow::Cow;
use std::fmt::Write;

use serde_json::json;

use super::parser::KbDocument;
use crate::dimensions::OrderConstraint;
use crate::interp::AnswerSet;
use crate::kb::{ABox, Assertion, Axiom, BasicConcept, Role, TBox};
use crate::model::Answers;
use crate::query::{Atom, ConjunctiveQuery, Term};

const KEYWORDS: &[&str] = &["sub", "o", "exists", "top", "bot", "disjoint", "disjointRole", "simple", "ord"];

/// Quotes a name unless it is a plain identifier.
pub fn quote_name(n: &str) -> Cow<'_, str> {
    let plain = !n.is_empty() && n.chars().all(|c| c.is_alphanumeric() || c == '_') && !KEYWORDS.contains(&n);
    if plain {
        return Cow::Borrowed(n);
    }
    let mut s = String::with_capacity(n.len() + 2);
    s.push('"');
    for c in n.chars() {
        if c == '"' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    Cow::Owned(s)
}

fn role(r: &Role) -> String {
    if r.inverse {
        format!("{}-", quote_name(&r.name))
    } else {
        quote_name(&r.name).into_owned()
    }
}

fn concept(b: &BasicConcept) -> String {
    match b {
        BasicConcept::Top => "top".into(),
        BasicConcept::Bot => "bot".into(),
        BasicConcept::Name(n) => quote_name(n).into_owned(),
        BasicConcept::Exists(r) => format!("exists {}", role(r)),
    }
}

pub fn serialize_axiom(ax: &Axiom) -> String {
    match ax {
        Axiom::ConceptInc(a, b) => format!("{} sub {}.", concept(a), concept(b)),
        Axiom::RoleInc(r, s) => format!("{} sub {}.", role(r), role(s)),
        Axiom::Cri(r, s, t) => format!("{} o {} sub {}.", role(r), role(s), role(t)),
        Axiom::DisjConcepts(a, b) => format!("disjoint {} {}.", concept(a), concept(b)),
        Axiom::DisjRoles(r, s) => format!("disjointRole {} {}.", role(r), role(s)),
    }
}

pub fn serialize_tbox(t: &TBox) -> String {
    let mut out = String::new();
    if !t.simple_roles.is_empty() {
        let names: Vec<_> = t.simple_roles.iter().map(|n| quote_name(n).into_owned()).collect();
        let _ = writeln!(out, "simple {}.", names.join(", "));
    }
    for ax in &t.axioms {
        let _ = writeln!(out, "{}", serialize_axiom(ax));
    }
    out
}

pub fn serialize_constraint(c: &OrderConstraint) -> String {
    let mut items: Vec<String> =
        c.order.iter().map(|(a, b)| format!("{} < {}", quote_name(a), quote_name(b))).collect();
    for n in &c.concepts {
        if !c.order.iter().any(|(a, b)| a == n || b == n) {
            items.push(quote_name(n).into_owned());
        }
    }
    format!("ord {} {{ {} }}.", quote_name(&c.role), items.join(", "))
}

pub fn serialize_abox(a: &ABox) -> String {
    let mut out = String::new();
    for asr in &a.assertions {
        match asr {
            Assertion::Concept(c, x) => {
                let _ = writeln!(out, "{}({}).", quote_name(c), quote_name(x));
            }
            Assertion::Role(r, x, y) => {
                let _ = writeln!(out, "{}({}, {}).", quote_name(r), quote_name(x), quote_name(y));
            }
        }
    }
    out
}

pub fn serialize_kb(doc: &KbDocument) -> String {
    let mut out = serialize_tbox(&doc.tbox);
    for c in &doc.constraints {
        let _ = writeln!(out, "{}", serialize_constraint(c));
    }
    out.push_str(&serialize_abox(&doc.abox));
    out
}

pub fn serialize_term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{v}"),
        Term::Ind(a) => quote_name(a).into_owned(),
    }
}

pub fn serialize_atom(a: &Atom) -> String {
    match a {
        Atom::Concept(c, x) => format!("{}({})", quote_name(c), serialize_term(x)),
        Atom::Role(r, x, y) => format!("{}({},{})", quote_name(r), serialize_term(x), serialize_term(y)),
        Atom::Eq(x, y) => format!("{} = {}", serialize_term(x), serialize_term(y)),
    }
}

pub fn serialize_query(q: &ConjunctiveQuery) -> String {
    let head: Vec<String> = q.answer_vars.iter().map(|v| format!("?{v}")).collect();
    let body: Vec<String> = q.atoms.iter().map(serialize_atom).collect();
    format!("{}({}) :- {}.", quote_name(&q.name), head.join(","), body.join(", "))
}

pub fn serialize_ucq<'a>(qs: impl IntoIterator<Item = &'a ConjunctiveQuery>) -> String {
    let mut out = String::new();
    for q in qs {
        out.push_str(&serialize_query(q));
        out.push('\n');
    }
    out
}

/// One sorted line per tuple; Boolean queries print `true` or `false`.
pub fn answers_text(a: &AnswerSet) -> String {
    if a.arity == 0 {
        return if a.is_empty() { "false\n".into() } else { "true\n".into() };
    }
    let mut out = String::new();
    for t in &a.tuples {
        out.push_str(&t.join(", "));
        out.push('\n');
    }
    out
}

pub fn answers_json(a: &Answers) -> serde_json::Value {
    json!({
        "answers": a.answers.tuples.iter().collect::<Vec<_>>(),
        "method": a.method.to_string(),
        "exact": a.exact,
    })
}
