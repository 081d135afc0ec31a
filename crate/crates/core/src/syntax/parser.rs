use std::collections::BTreeSet;

use super::lexer::{lex, Tok, Token};
use super::{is_concept_like, Diagnostic, SourceSpan};
use crate::dimensions::OrderConstraint;
use crate::kb::{validate_tbox, ABox, Assertion, Axiom, BasicConcept, Role, TBox};
use crate::query::{Atom, ConjunctiveQuery, Term, TOP};

/// A parsed knowledge base file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KbDocument {
    pub tbox: TBox,
    pub abox: ABox,
    pub constraints: Vec<OrderConstraint>,
}

type PResult<T> = Result<T, Diagnostic>;

fn span_of(toks: &[Token]) -> SourceSpan {
    let first = toks[0].span;
    let last = toks[toks.len() - 1].span;
    if first.line == last.line {
        SourceSpan { end_column: last.end_column, ..first }
    } else {
        first
    }
}

/// Splits a token stream into `.`-terminated statements.
fn statements(toks: Vec<Token>, diags: &mut Vec<Diagnostic>) -> Vec<(Vec<Token>, SourceSpan)> {
    let mut out = Vec::new();
    let mut cur: Vec<Token> = Vec::new();
    for t in toks {
        if t.tok == Tok::Dot {
            if cur.is_empty() {
                diags.push(Diagnostic::new(t.span, "empty statement"));
            } else {
                let span = span_of(&cur);
                out.push((std::mem::take(&mut cur), span));
            }
        } else {
            cur.push(t);
        }
    }
    if !cur.is_empty() {
        let span = span_of(&cur);
        diags.push(Diagnostic::new(cur[cur.len() - 1].span, "missing `.` at end of statement"));
        out.push((cur, span));
    }
    out
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    end_span: SourceSpan,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token]) -> Self {
        let last = toks.last().map(|t| t.span).unwrap_or(SourceSpan { line: 1, column: 1, end_column: 1 });
        let end_span = SourceSpan { line: last.line, column: last.end_column, end_column: last.end_column + 1 };
        Cursor { toks, pos: 0, end_span }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn span(&self) -> SourceSpan {
        self.peek().map(|t| t.span).unwrap_or(self.end_span)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().map(|t| &t.tok) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        match self.peek() {
            Some(t) => Diagnostic::new(t.span, format!("expected {wanted}, found {}", t.tok.describe())),
            None => Diagnostic::new(self.end_span, format!("expected {wanted}")),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, bool, SourceSpan)> {
        match self.peek() {
            Some(Token { tok: Tok::Ident { text, quoted }, span }) => {
                self.pos += 1;
                Ok((text.clone(), *quoted, *span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of statement"))
        }
    }
}

fn concept_name(name: String, span: SourceSpan) -> PResult<String> {
    if is_concept_like(&name) {
        Ok(name)
    } else {
        Err(Diagnostic::new(span, format!("concept name `{name}` must start with an upper-case letter")))
    }
}

fn role_name(name: String, span: SourceSpan) -> PResult<String> {
    if is_concept_like(&name) {
        Err(Diagnostic::new(span, format!("role name `{name}` must start with a lower-case letter")))
    } else {
        Ok(name)
    }
}

fn role_expr(c: &mut Cursor) -> PResult<Role> {
    let (name, _, span) = c.ident("a role name")?;
    let name = role_name(name, span)?;
    let inverse = c.eat(&Tok::Minus);
    Ok(Role { name, inverse })
}

enum Side {
    Concept(BasicConcept),
    Role(Role),
}

fn side(c: &mut Cursor) -> PResult<Side> {
    let t = c.peek().ok_or_else(|| c.unexpected("a concept or role"))?;
    if t.tok.is_kw("top") {
        c.next();
        return Ok(Side::Concept(BasicConcept::Top));
    }
    if t.tok.is_kw("bot") {
        c.next();
        return Ok(Side::Concept(BasicConcept::Bot));
    }
    if t.tok.is_kw("exists") {
        c.next();
        return Ok(Side::Concept(BasicConcept::Exists(role_expr(c)?)));
    }
    let (name, _, span) = c.ident("a concept or role")?;
    if c.eat(&Tok::Minus) {
        return Ok(Side::Role(Role::inverse_of(role_name(name, span)?)));
    }
    if is_concept_like(&name) {
        Ok(Side::Concept(BasicConcept::Name(name)))
    } else {
        Ok(Side::Role(Role::named(name)))
    }
}

fn concept_expr(c: &mut Cursor) -> PResult<BasicConcept> {
    let span = c.span();
    match side(c)? {
        Side::Concept(b) => Ok(b),
        Side::Role(r) => Err(Diagnostic::new(span, format!("expected a concept, found role `{r}`"))),
    }
}

enum Statement {
    Axiom(Axiom),
    Simple(Vec<String>),
    Assertion(Assertion),
    Ord(OrderConstraint),
}

fn statement(toks: &[Token]) -> PResult<Statement> {
    let mut c = Cursor::new(toks);
    let first = &toks[0];
    if toks.len() >= 2 && toks[1].tok == Tok::LParen {
        let (pred, _, pspan) = c.ident("a predicate")?;
        c.expect(Tok::LParen)?;
        let (a, _, _) = c.ident("an individual")?;
        let st = if c.eat(&Tok::Comma) {
            let (b, _, _) = c.ident("an individual")?;
            Assertion::Role(role_name(pred, pspan)?, a, b)
        } else {
            Assertion::Concept(concept_name(pred, pspan)?, a)
        };
        c.expect(Tok::RParen)?;
        c.finish()?;
        return Ok(Statement::Assertion(st));
    }
    if first.tok.is_kw("simple") {
        c.next();
        let mut names = Vec::new();
        loop {
            let (n, _, span) = c.ident("a role name")?;
            names.push(role_name(n, span)?);
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
        c.finish()?;
        return Ok(Statement::Simple(names));
    }
    if first.tok.is_kw("disjoint") {
        c.next();
        let a = concept_expr(&mut c)?;
        let b = concept_expr(&mut c)?;
        c.finish()?;
        return Ok(Statement::Axiom(Axiom::DisjConcepts(a, b)));
    }
    if first.tok.is_kw("disjointRole") {
        c.next();
        let a = role_expr(&mut c)?;
        let b = role_expr(&mut c)?;
        c.finish()?;
        return Ok(Statement::Axiom(Axiom::DisjRoles(a, b)));
    }
    if first.tok.is_kw("ord") {
        c.next();
        return ord(&mut c).map(Statement::Ord);
    }
    if !toks.iter().any(|t| t.tok.is_kw("sub")) {
        return Err(match &first.tok {
            Tok::Ident { text, quoted: false } => {
                Diagnostic::new(first.span, format!("unknown statement `{text}`; expected an inclusion, assertion or keyword"))
            }
            other => Diagnostic::new(first.span, format!("unexpected {}", other.describe())),
        });
    }
    if toks.len() > 1 && toks[1].tok.is_kw("o") {
        let r = role_expr(&mut c)?;
        if r.inverse {
            return Err(Diagnostic::new(first.span, "complex role inclusions take role names only"));
        }
        c.next();
        let s = role_expr(&mut c)?;
        if !c.next().is_some_and(|t| t.tok.is_kw("sub")) {
            return Err(Diagnostic::new(c.toks[c.pos - 1].span, "expected `sub`"));
        }
        let t = role_expr(&mut c)?;
        c.finish()?;
        if s.inverse || t.inverse {
            return Err(Diagnostic::new(first.span, "complex role inclusions take role names only"));
        }
        return Ok(Statement::Axiom(Axiom::Cri(r, s, t)));
    }
    let lspan = c.span();
    let lhs = side(&mut c)?;
    if !c.peek().is_some_and(|t| t.tok.is_kw("sub")) {
        return Err(c.unexpected("`sub`"));
    }
    c.next();
    let rspan = c.span();
    let rhs = side(&mut c)?;
    c.finish()?;
    match (lhs, rhs) {
        (Side::Concept(a), Side::Concept(b)) => Ok(Statement::Axiom(Axiom::ConceptInc(a, b))),
        (Side::Role(a), Side::Role(b)) => Ok(Statement::Axiom(Axiom::RoleInc(a, b))),
        (Side::Concept(_), Side::Role(r)) => {
            Err(Diagnostic::new(rspan, format!("expected a concept on the right, found role `{r}`")))
        }
        (Side::Role(r), Side::Concept(_)) => {
            Err(Diagnostic::new(lspan, format!("role `{r}` cannot be included in a concept")))
        }
    }
}

fn ord(c: &mut Cursor) -> PResult<OrderConstraint> {
    let (role, _, span) = c.ident("a role name")?;
    let role = role_name(role, span)?;
    c.expect(Tok::LBrace)?;
    let mut concepts = BTreeSet::new();
    let mut order = BTreeSet::new();
    if !c.eat(&Tok::RBrace) {
        loop {
            let (n, _, span) = c.ident("a concept name")?;
            let mut prev = concept_name(n, span)?;
            concepts.insert(prev.clone());
            while c.eat(&Tok::Lt) {
                let (n, _, span) = c.ident("a concept name")?;
                let n = concept_name(n, span)?;
                concepts.insert(n.clone());
                order.insert((prev, n.clone()));
                prev = n;
            }
            if c.eat(&Tok::RBrace) {
                break;
            }
            c.expect(Tok::Comma)?;
        }
    }
    c.finish()?;
    let oc = OrderConstraint { role, concepts, order };
    if let Err(e) = oc.check() {
        return Err(Diagnostic::new(span, e));
    }
    Ok(oc)
}

/// Parses and validates a knowledge base, reporting every problem found.
pub fn parse_kb(src: &str) -> Result<KbDocument, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let toks = lex(src, &mut diags);
    let mut doc = KbDocument::default();
    let mut spans: Vec<SourceSpan> = Vec::new();
    let mut ord_spans: Vec<SourceSpan> = Vec::new();
    for (stmt, span) in statements(toks, &mut diags) {
        match statement(&stmt) {
            Ok(Statement::Axiom(ax)) => {
                if !doc.tbox.axioms.contains(&ax) {
                    doc.tbox.axioms.push(ax);
                    spans.push(span);
                }
            }
            Ok(Statement::Simple(names)) => doc.tbox.simple_roles.extend(names),
            Ok(Statement::Assertion(a)) => {
                doc.abox.insert(a);
            }
            Ok(Statement::Ord(oc)) => {
                if let Some(i) = doc.constraints.iter().position(|o| o.role == oc.role) {
                    diags.push(Diagnostic::new(
                        span,
                        format!(
                            "duplicate order constraint for role `{}` (first at line {})",
                            oc.role, ord_spans[i].line
                        ),
                    ));
                } else {
                    doc.constraints.push(oc);
                    ord_spans.push(span);
                }
            }
            Err(d) => diags.push(d),
        }
    }
    if let Err(errs) = validate_tbox(&doc.tbox) {
        for e in errs {
            let i = doc.tbox.axioms.iter().position(|a| *a == e.axiom).unwrap_or(0);
            let span = spans.get(i).copied().unwrap_or(SourceSpan { line: 1, column: 1, end_column: 1 });
            diags.push(Diagnostic::new(span, e.to_string()));
        }
    }
    if diags.is_empty() {
        Ok(doc)
    } else {
        diags.sort_by_key(|d| d.span);
        Err(diags)
    }
}

fn term(c: &mut Cursor) -> PResult<Term> {
    match c.peek() {
        Some(Token { tok: Tok::Var(v), .. }) => {
            c.next();
            Ok(Term::Var(v.clone()))
        }
        Some(Token { tok: Tok::Ident { text, .. }, .. }) => {
            c.next();
            Ok(Term::Ind(text.clone()))
        }
        _ => Err(c.unexpected("a variable or individual")),
    }
}

fn atom(c: &mut Cursor) -> PResult<Atom> {
    let is_pred = matches!(c.peek(), Some(Token { tok: Tok::Ident { .. }, .. }))
        && matches!(c.toks.get(c.pos + 1), Some(Token { tok: Tok::LParen, .. }));
    if is_pred {
        let (pred, quoted, span) = c.ident("a predicate")?;
        c.expect(Tok::LParen)?;
        let x = term(c)?;
        let a = if c.eat(&Tok::Comma) {
            let y = term(c)?;
            Atom::Role(role_name(pred, span)?, x, y)
        } else if pred == TOP && !quoted {
            Atom::Concept(TOP.to_string(), x)
        } else {
            Atom::Concept(concept_name(pred, span)?, x)
        };
        c.expect(Tok::RParen)?;
        return Ok(a);
    }
    let x = term(c)?;
    c.expect(Tok::Equals)?;
    let y = term(c)?;
    Ok(Atom::Eq(x, y))
}

fn query(toks: &[Token], span: SourceSpan) -> PResult<ConjunctiveQuery> {
    let mut c = Cursor::new(toks);
    let (name, _, _) = c.ident("a query name")?;
    c.expect(Tok::LParen)?;
    let mut answer_vars = Vec::new();
    if !c.eat(&Tok::RParen) {
        loop {
            match c.next() {
                Some(Token { tok: Tok::Var(v), span }) => {
                    if answer_vars.contains(v) {
                        return Err(Diagnostic::new(*span, format!("answer variable `?{v}` listed twice")));
                    }
                    answer_vars.push(v.clone());
                }
                _ => {
                    c.pos -= 1;
                    return Err(c.unexpected("an answer variable"));
                }
            }
            if c.eat(&Tok::RParen) {
                break;
            }
            c.expect(Tok::Comma)?;
        }
    }
    c.expect(Tok::Turnstile)?;
    if c.at_end() {
        return Err(Diagnostic::new(span, "query body is empty"));
    }
    let mut atoms = Vec::new();
    loop {
        atoms.push(atom(&mut c)?);
        if c.at_end() {
            break;
        }
        c.expect(Tok::Comma)?;
    }
    let q = ConjunctiveQuery { name, answer_vars, atoms };
    if let Some(v) = q.unsafe_answer_vars().first() {
        return Err(Diagnostic::new(span, format!("answer variable `?{v}` does not occur in the body")));
    }
    Ok(q)
}

/// Parses one or more queries.
pub fn parse_ucq(src: &str) -> Result<Vec<ConjunctiveQuery>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let toks = lex(src, &mut diags);
    let mut out = Vec::new();
    let stmts = statements_lenient(toks);
    for (stmt, span) in stmts {
        match query(&stmt, span) {
            Ok(q) => out.push(q),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

/// Parses exactly one query; the final `.` is optional.
pub fn parse_query(src: &str) -> Result<ConjunctiveQuery, Vec<Diagnostic>> {
    let mut qs = parse_ucq(src)?;
    match qs.len() {
        1 => Ok(qs.remove(0)),
        0 => Err(vec![Diagnostic::new(SourceSpan { line: 1, column: 1, end_column: 1 }, "no query found")]),
        _ => Err(vec![Diagnostic::new(SourceSpan { line: 1, column: 1, end_column: 1 }, "expected a single query")]),
    }
}

fn statements_lenient(toks: Vec<Token>) -> Vec<(Vec<Token>, SourceSpan)> {
    let mut out = Vec::new();
    let mut cur: Vec<Token> = Vec::new();
    for t in toks {
        if t.tok == Tok::Dot {
            if !cur.is_empty() {
                let span = span_of(&cur);
                out.push((std::mem::take(&mut cur), span));
            }
        } else {
            cur.push(t);
        }
    }
    if !cur.is_empty() {
        let span = span_of(&cur);
        out.push((cur, span));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusions_of_every_shape() {
        let doc = parse_kb(
            "A sub B. exists r- sub A. A sub exists r. r sub s-. r o s sub t. simple s. simple r.\n\
             disjoint A exists r. disjointRole r s-. top sub A. A sub bot.",
        )
        .unwrap();
        assert_eq!(doc.tbox.axioms.len(), 9);
        assert!(doc.tbox.is_simple("s"));
    }

    #[test]
    fn recovers_after_errors() {
        let errs = parse_kb("A sub B.\nsubclass A B.\nC(x).\nr(a b).\n").unwrap_err();
        assert_eq!(errs.len(), 2);
        assert_eq!((errs[0].span.line, errs[0].span.column), (2, 1));
        assert_eq!(errs[1].span.line, 4);
    }

    #[test]
    fn duplicate_ord_is_reported() {
        let errs = parse_kb("ord r { A < B }.\nord r { B < C }.\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("duplicate"));
    }

    #[test]
    fn cyclic_ord_is_reported() {
        assert!(parse_kb("ord r { A < B, B < A }.").is_err());
    }

    #[test]
    fn validation_errors_carry_spans() {
        let errs = parse_kb("A sub B.\nr o s sub r.\n").unwrap_err();
        assert_eq!(errs[0].span.line, 2);
    }

    #[test]
    fn queries() {
        let q = parse_query("q(?x) :- Concert(?x), occursIn(?x,?y), ?y = Vienna.").unwrap();
        assert_eq!(q.answer_vars, vec!["x".to_string()]);
        assert_eq!(q.atoms[2], Atom::Eq(Term::var("y"), Term::ind("Vienna")));
        assert!(parse_query("q(?x) :- A(?y).").is_err());
        assert!(parse_query("q(?x) :- A(?x), .").is_err());
        let q = parse_query("q() :- top(?x)").unwrap();
        assert_eq!(q.atoms[0], Atom::Concept(TOP.into(), Term::var("x")));
    }

    #[test]
    fn quoted_names() {
        let errs = parse_kb("\"new city\"(x).").unwrap_err();
        assert!(errs[0].message.contains("upper-case"));
        let doc = parse_kb("City(\"Big \\\"Apple\\\"\").").unwrap();
        assert!(doc.abox.individuals().contains("Big \"Apple\""));
    }
}
