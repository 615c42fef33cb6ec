//! Canonical rendering of normalized terms as many-sorted predicate-logic
//! formulas, plus machine-readable reading reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::composer::Reading;
use crate::kernel::{logical, SortScope, Term, Type};
use crate::syntax::SyntaxError;

/// Connective spelling: Unicode (`∧`, `∃x0:P.`) or pure ASCII
/// (`and`, `exists x0:P.`) for diffing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderStyle {
    #[default]
    Unicode,
    Ascii,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("unrenderable term: {detail}")]
    UnrenderableTerm { detail: String },
}

/// Renames bound variables to `x0, x1, ...` (terms) and `a0, a1, ...`
/// (types) in leftmost-outermost traversal order. The result is α-equal to
/// the input and canonicalization is idempotent; α-equal inputs yield
/// syntactically identical outputs.
pub fn canonicalize(term: &Term) -> Term {
    let mut avoid: BTreeSet<String> = term.free_vars();
    avoid.extend(term.free_type_vars());
    let mut canon = Canon {
        avoid,
        next_term: 0,
        next_type: 0,
    };
    canon.term(term, &mut Vec::new(), &mut Vec::new())
}

struct Canon {
    avoid: BTreeSet<String>,
    next_term: usize,
    next_type: usize,
}

impl Canon {
    fn fresh_term(&mut self) -> String {
        loop {
            let name = format!("x{}", self.next_term);
            self.next_term += 1;
            if !self.avoid.contains(&name) {
                return name;
            }
        }
    }

    fn fresh_type(&mut self) -> String {
        loop {
            let name = format!("a{}", self.next_type);
            self.next_type += 1;
            if !self.avoid.contains(&name) {
                return name;
            }
        }
    }

    fn ty(&mut self, ty: &Type, tymap: &mut Vec<(String, String)>) -> Type {
        match ty {
            Type::Prop | Type::Sort(_) => ty.clone(),
            Type::Var(v) => {
                for (old, new) in tymap.iter().rev() {
                    if old == v {
                        return Type::Var(new.clone());
                    }
                }
                ty.clone()
            }
            Type::Arrow(d, c) => Type::arrow(self.ty(d, tymap), self.ty(c, tymap)),
            Type::Forall(b, body) => {
                let nb = self.fresh_type();
                tymap.push((b.clone(), nb.clone()));
                let body = self.ty(body, tymap);
                tymap.pop();
                Type::forall(nb, body)
            }
        }
    }

    fn term(
        &mut self,
        term: &Term,
        map: &mut Vec<(String, String)>,
        tymap: &mut Vec<(String, String)>,
    ) -> Term {
        match term {
            Term::Const(n, ty) => Term::Const(n.clone(), self.ty(ty, tymap)),
            Term::Var(v) => {
                for (old, new) in map.iter().rev() {
                    if old == v {
                        return Term::Var(new.clone());
                    }
                }
                term.clone()
            }
            Term::Abs(x, ty, body) => {
                let nx = self.fresh_term();
                let ty = self.ty(ty, tymap);
                map.push((x.clone(), nx.clone()));
                let body = self.term(body, map, tymap);
                map.pop();
                Term::abs(nx, ty, body)
            }
            Term::App(f, a) => {
                let f = self.term(f, map, tymap);
                let a = self.term(a, map, tymap);
                Term::app(f, a)
            }
            Term::TyAbs(a, body) => {
                let na = self.fresh_type();
                tymap.push((a.clone(), na.clone()));
                let body = self.term(body, map, tymap);
                tymap.pop();
                Term::tyabs(na, body)
            }
            Term::TyApp(f, ty) => {
                let f = self.term(f, map, tymap);
                let ty = self.ty(ty, tymap);
                Term::tyapp(f, ty)
            }
        }
    }
}

struct Tokens<'s> {
    style: RenderStyle,
    _marker: std::marker::PhantomData<&'s ()>,
}

impl Tokens<'_> {
    fn and(&self) -> &'static str {
        match self.style {
            RenderStyle::Unicode => " \u{2227} ",
            RenderStyle::Ascii => " and ",
        }
    }
    fn or(&self) -> &'static str {
        match self.style {
            RenderStyle::Unicode => " \u{2228} ",
            RenderStyle::Ascii => " or ",
        }
    }
    fn implies(&self) -> &'static str {
        match self.style {
            RenderStyle::Unicode => " \u{2192} ",
            RenderStyle::Ascii => " implies ",
        }
    }
    fn not(&self) -> &'static str {
        match self.style {
            RenderStyle::Unicode => "\u{ac}",
            RenderStyle::Ascii => "not ",
        }
    }
    fn exists(&self) -> &'static str {
        match self.style {
            RenderStyle::Unicode => "\u{2203}",
            RenderStyle::Ascii => "exists ",
        }
    }
    fn forall(&self) -> &'static str {
        match self.style {
            RenderStyle::Unicode => "\u{2200}",
            RenderStyle::Ascii => "forall ",
        }
    }
}

fn binary_match<'t>(term: &'t Term, op: &str) -> Option<(&'t Term, &'t Term)> {
    if let Term::App(f, b) = term {
        if let Term::App(g, a) = f.as_ref() {
            if matches!(g.as_ref(), Term::Const(n, _) if n == op) {
                return Some((a, b));
            }
        }
    }
    None
}

fn unary_match<'t>(term: &'t Term, op: &str) -> Option<&'t Term> {
    if let Term::App(f, a) = term {
        if matches!(f.as_ref(), Term::Const(n, _) if n == op) {
            return Some(a);
        }
    }
    None
}

/// `Exists [T] (lam x:T. body)` and the `Forall` counterpart.
fn quantifier_match(term: &Term) -> Option<(&str, &str, &Type, &Term)> {
    if let Term::App(f, a) = term {
        if let Term::TyApp(q, _) = f.as_ref() {
            if let Term::Const(name, _) = q.as_ref() {
                if name == logical::EXISTS || name == logical::FORALL {
                    if let Term::Abs(x, ty, body) = a.as_ref() {
                        return Some((name.as_str(), x.as_str(), ty, body));
                    }
                }
            }
        }
    }
    None
}

/// Renders a β-normal, canonical term of type `t` (or of a sort, for
/// sub-term rendering) in linear predicate-logic syntax. Curried constant
/// applications flatten to `pred(a1, ..., an)`; a residual abstraction at
/// top level is unrenderable.
pub fn render(term: &Term) -> Result<String, RenderError> {
    render_with(term, RenderStyle::Unicode)
}

pub fn render_with(term: &Term, style: RenderStyle) -> Result<String, RenderError> {
    if matches!(term, Term::Abs(_, _, _) | Term::TyAbs(_, _)) {
        return Err(RenderError::UnrenderableTerm {
            detail: format!("residual abstraction at top level: {term}"),
        });
    }
    let toks = Tokens {
        style,
        _marker: std::marker::PhantomData,
    };
    let mut out = String::new();
    formula(term, 0, &toks, &mut out)?;
    Ok(out)
}

fn wrap(
    needed: bool,
    out: &mut String,
    inner: impl FnOnce(&mut String) -> Result<(), RenderError>,
) -> Result<(), RenderError> {
    if needed {
        out.push('(');
        inner(out)?;
        out.push(')');
        Ok(())
    } else {
        inner(out)
    }
}

// Precedence: quantifiers 0, implies 1 (right assoc), or 2, and 3, not 4,
// atoms 5.
fn formula(
    term: &Term,
    min_prec: u8,
    toks: &Tokens<'_>,
    out: &mut String,
) -> Result<(), RenderError> {
    if let Some((q, x, ty, body)) = quantifier_match(term) {
        let sym = if q == logical::EXISTS {
            toks.exists()
        } else {
            toks.forall()
        };
        return wrap(min_prec > 0, out, |out| {
            out.push_str(sym);
            out.push_str(x);
            out.push(':');
            if matches!(ty, Type::Arrow(_, _) | Type::Forall(_, _)) {
                out.push('(');
                out.push_str(&ty.to_string());
                out.push(')');
            } else {
                out.push_str(&ty.to_string());
            }
            out.push_str(". ");
            formula(body, 0, toks, out)
        });
    }
    if let Some((a, b)) = binary_match(term, logical::IMPLIES) {
        return wrap(min_prec > 1, out, |out| {
            formula(a, 2, toks, out)?;
            out.push_str(toks.implies());
            formula(b, 1, toks, out)
        });
    }
    if let Some((a, b)) = binary_match(term, logical::OR) {
        return wrap(min_prec > 2, out, |out| {
            formula(a, 2, toks, out)?;
            out.push_str(toks.or());
            formula(b, 3, toks, out)
        });
    }
    if let Some((a, b)) = binary_match(term, logical::AND) {
        return wrap(min_prec > 3, out, |out| {
            formula(a, 3, toks, out)?;
            out.push_str(toks.and());
            formula(b, 4, toks, out)
        });
    }
    if let Some(a) = unary_match(term, logical::NOT) {
        return wrap(min_prec > 4, out, |out| {
            out.push_str(toks.not());
            formula(a, 4, toks, out)
        });
    }
    atom(term, toks, out)
}

enum SpinePart<'t> {
    Arg(&'t Term),
    TypeArg(&'t Type),
}

fn atom(term: &Term, toks: &Tokens<'_>, out: &mut String) -> Result<(), RenderError> {
    let mut head = term;
    let mut parts: Vec<SpinePart<'_>> = Vec::new();
    loop {
        match head {
            Term::App(f, a) => {
                parts.push(SpinePart::Arg(a));
                head = f;
            }
            Term::TyApp(f, ty) => {
                parts.push(SpinePart::TypeArg(ty));
                head = f;
            }
            _ => break,
        }
    }
    parts.reverse();
    let name = match head {
        Term::Const(n, _) | Term::Var(n) => n.clone(),
        other => {
            return Err(RenderError::UnrenderableTerm {
                detail: format!("abstraction in head position: {other}"),
            })
        }
    };
    out.push_str(&name);
    let mut group: Vec<&Term> = Vec::new();
    let flush = |group: &mut Vec<&Term>, out: &mut String| -> Result<(), RenderError> {
        if group.is_empty() {
            return Ok(());
        }
        out.push('(');
        for (i, arg) in group.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            match arg {
                Term::Abs(_, _, _) | Term::TyAbs(_, _) => {
                    // λ-arguments fall back to raw concrete syntax.
                    out.push_str(&arg.to_string());
                }
                _ => formula(arg, 0, toks, out)?,
            }
        }
        out.push(')');
        group.clear();
        Ok(())
    };
    for part in parts {
        match part {
            SpinePart::TypeArg(ty) => {
                flush(&mut group, out)?;
                out.push('[');
                out.push_str(&ty.to_string());
                out.push(']');
            }
            SpinePart::Arg(a) => group.push(a),
        }
    }
    flush(&mut group, out)?;
    Ok(())
}

/// One reading rendered for humans: the formula, the sorts of its bound
/// variables, and the coercion trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReading {
    pub formula: String,
    pub sort_annotations: BTreeMap<String, String>,
    pub trace: Vec<TraceStep>,
    pub cost: usize,
}

/// One trace entry of a reading report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub modifier: String,
    pub source: String,
    pub target: String,
    pub path: Vec<usize>,
}

fn trace_steps(reading: &Reading) -> Vec<TraceStep> {
    reading
        .trace
        .iter()
        .map(|s| TraceStep {
            modifier: s.modifier.clone(),
            source: s.source.to_string(),
            target: s.target.to_string(),
            path: s.at_path.clone(),
        })
        .collect()
}

fn quantified_sorts(term: &Term, out: &mut BTreeMap<String, String>) {
    if let Some((_, x, ty, body)) = quantifier_match(term) {
        out.insert(x.to_string(), ty.to_string());
        quantified_sorts(body, out);
        return;
    }
    match term {
        Term::App(f, a) => {
            quantified_sorts(f, out);
            quantified_sorts(a, out);
        }
        Term::TyApp(f, _) => quantified_sorts(f, out),
        Term::Abs(_, _, body) | Term::TyAbs(_, body) => quantified_sorts(body, out),
        _ => {}
    }
}

/// Canonicalizes and renders a reading. The formula of the result parses
/// back (via [`parse_rendered`]) to a term α-equal to the reading's term.
pub fn render_reading(
    reading: &Reading,
    style: RenderStyle,
) -> Result<RenderedReading, RenderError> {
    let canonical = canonicalize(&reading.term);
    let formula = render_with(&canonical, style)?;
    let mut sort_annotations = BTreeMap::new();
    quantified_sorts(&canonical, &mut sort_annotations);
    Ok(RenderedReading {
        formula,
        sort_annotations,
        trace: trace_steps(reading),
        cost: reading.cost,
    })
}

/// Machine-readable reading report. Serialized key order is fixed:
/// formula, type, cost, trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadingReport {
    pub formula: String,
    #[serde(rename = "type")]
    pub type_: String,
    pub cost: usize,
    pub trace: Vec<TraceStep>,
}

impl ReadingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

pub fn reading_report(reading: &Reading) -> ReadingReport {
    reading_report_with(reading, RenderStyle::Unicode)
}

/// Reports fall back to raw concrete syntax when the formula renderer cannot
/// flatten the term (a reading of higher-order type).
pub fn reading_report_with(reading: &Reading, style: RenderStyle) -> ReadingReport {
    let canonical = canonicalize(&reading.term);
    let formula = render_with(&canonical, style).unwrap_or_else(|_| canonical.to_string());
    ReadingReport {
        formula,
        type_: reading.ty.to_string(),
        cost: reading.cost,
        trace: trace_steps(reading),
    }
}

/// Parses a rendered formula back into a term. `sig` gives the constants'
/// types (for a reading, [`crate::kernel::collect_signature`] of its term);
/// both Unicode and ASCII connectives are accepted.
pub fn parse_rendered(
    src: &str,
    sig: &BTreeMap<String, Type>,
    scope: &impl SortScope,
) -> Result<Term, SyntaxError> {
    let tokens = formula_tokens(src)?;
    let mut parser = FormulaParser {
        tokens,
        pos: 0,
        len: src.len(),
        sig,
        binders: Vec::new(),
    };
    let term = parser.formula(scope)?;
    parser.finish()?;
    Ok(term)
}

#[derive(Debug, Clone, PartialEq)]
enum FTok {
    Ident(String),
    And,
    Or,
    Implies,
    Not,
    Exists,
    Forall,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Arrow,
}

fn formula_tokens(src: &str) -> Result<Vec<(usize, FTok)>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '\u{2227}' => {
                out.push((pos, FTok::And));
                i += 1;
            }
            '\u{2228}' => {
                out.push((pos, FTok::Or));
                i += 1;
            }
            '\u{2192}' => {
                out.push((pos, FTok::Implies));
                i += 1;
            }
            '\u{ac}' => {
                out.push((pos, FTok::Not));
                i += 1;
            }
            '\u{2203}' => {
                out.push((pos, FTok::Exists));
                i += 1;
            }
            '\u{2200}' => {
                out.push((pos, FTok::Forall));
                i += 1;
            }
            '(' => {
                out.push((pos, FTok::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, FTok::RParen));
                i += 1;
            }
            '[' => {
                out.push((pos, FTok::LBracket));
                i += 1;
            }
            ']' => {
                out.push((pos, FTok::RBracket));
                i += 1;
            }
            ',' => {
                out.push((pos, FTok::Comma));
                i += 1;
            }
            ':' => {
                out.push((pos, FTok::Colon));
                i += 1;
            }
            '.' => {
                out.push((pos, FTok::Dot));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1).map(|(_, c)| *c) == Some('>') {
                    out.push((pos, FTok::Arrow));
                    i += 2;
                } else {
                    return Err(SyntaxError {
                        pos,
                        message: "expected '->'".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|(_, c)| c).collect();
                let tok = match word.as_str() {
                    "and" => FTok::And,
                    "or" => FTok::Or,
                    "implies" => FTok::Implies,
                    "not" => FTok::Not,
                    "exists" => FTok::Exists,
                    "forall" => FTok::Forall,
                    _ => FTok::Ident(word),
                };
                out.push((pos, tok));
            }
            other => {
                return Err(SyntaxError {
                    pos,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct FormulaParser<'a> {
    tokens: Vec<(usize, FTok)>,
    pos: usize,
    len: usize,
    sig: &'a BTreeMap<String, Type>,
    binders: Vec<(String, Type)>,
}

impl FormulaParser<'_> {
    fn peek(&self) -> Option<&FTok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<FTok> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            pos: self.here(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: FTok, what: &str) -> Result<(), SyntaxError> {
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected {what}"))
            }
        }
    }

    fn finish(&self) -> Result<(), SyntaxError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            self.err("trailing input")
        }
    }

    fn ty(&mut self, scope: &impl SortScope) -> Result<Type, SyntaxError> {
        let lhs = self.ty_atom(scope)?;
        if let Some(FTok::Arrow) = self.peek() {
            self.bump();
            let rhs = self.ty(scope)?;
            Ok(Type::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self, scope: &impl SortScope) -> Result<Type, SyntaxError> {
        match self.bump() {
            Some(FTok::Ident(n)) if n == "t" => Ok(Type::Prop),
            Some(FTok::Ident(n)) => {
                if scope.has_sort(&n) {
                    Ok(Type::Sort(n))
                } else {
                    self.err(format!("unknown sort {n}"))
                }
            }
            Some(FTok::LParen) => {
                let ty = self.ty(scope)?;
                self.expect(FTok::RParen, "')'")?;
                Ok(ty)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a type")
            }
        }
    }

    fn formula(&mut self, scope: &impl SortScope) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(FTok::Exists) | Some(FTok::Forall) => {
                let quant = self.bump().unwrap();
                let name = match self.bump() {
                    Some(FTok::Ident(n)) => n,
                    _ => return self.err("expected a bound variable"),
                };
                self.expect(FTok::Colon, "':'")?;
                let ty = self.ty(scope)?;
                self.expect(FTok::Dot, "'.'")?;
                self.binders.push((name.clone(), ty.clone()));
                let body = self.formula(scope);
                self.binders.pop();
                let body = body?;
                let q = if quant == FTok::Exists {
                    logical::exists_term()
                } else {
                    logical::forall_term()
                };
                Ok(Term::app(
                    Term::tyapp(q, ty.clone()),
                    Term::abs(name, ty, body),
                ))
            }
            _ => self.implies_chain(scope),
        }
    }

    fn implies_chain(&mut self, scope: &impl SortScope) -> Result<Term, SyntaxError> {
        let lhs = self.or_chain(scope)?;
        if let Some(FTok::Implies) = self.peek() {
            self.bump();
            let rhs = self.formula(scope)?;
            Ok(Term::apps(logical::implies_term(), [lhs, rhs]))
        } else {
            Ok(lhs)
        }
    }

    fn or_chain(&mut self, scope: &impl SortScope) -> Result<Term, SyntaxError> {
        let mut lhs = self.and_chain(scope)?;
        while let Some(FTok::Or) = self.peek() {
            self.bump();
            let rhs = self.and_chain(scope)?;
            lhs = Term::apps(logical::or_term(), [lhs, rhs]);
        }
        Ok(lhs)
    }

    fn and_chain(&mut self, scope: &impl SortScope) -> Result<Term, SyntaxError> {
        let mut lhs = self.unary(scope)?;
        while let Some(FTok::And) = self.peek() {
            self.bump();
            let rhs = self.unary(scope)?;
            lhs = Term::apps(logical::and_term(), [lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self, scope: &impl SortScope) -> Result<Term, SyntaxError> {
        if let Some(FTok::Not) = self.peek() {
            self.bump();
            let inner = self.unary(scope)?;
            return Ok(Term::app(logical::not_term(), inner));
        }
        self.postfix(scope)
    }

    fn postfix(&mut self, scope: &impl SortScope) -> Result<Term, SyntaxError> {
        let mut head = self.primary(scope)?;
        loop {
            match self.peek() {
                Some(FTok::LBracket) => {
                    self.bump();
                    let ty = self.ty(scope)?;
                    self.expect(FTok::RBracket, "']'")?;
                    head = Term::tyapp(head, ty);
                }
                Some(FTok::LParen) => {
                    self.bump();
                    let mut args = vec![self.formula(scope)?];
                    while let Some(FTok::Comma) = self.peek() {
                        self.bump();
                        args.push(self.formula(scope)?);
                    }
                    self.expect(FTok::RParen, "')'")?;
                    head = Term::apps(head, args);
                }
                _ => return Ok(head),
            }
        }
    }

    fn primary(&mut self, scope: &impl SortScope) -> Result<Term, SyntaxError> {
        match self.bump() {
            Some(FTok::Ident(name)) => {
                for (n, _ty) in self.binders.iter().rev() {
                    if *n == name {
                        return Ok(Term::var(name));
                    }
                }
                if let Some(sig) = logical::signature(&name) {
                    return Ok(Term::constant(name, sig));
                }
                match self.sig.get(&name) {
                    Some(ty) => Ok(Term::constant(name, ty.clone())),
                    None => self.err(format!("unknown constant {name}")),
                }
            }
            Some(FTok::LParen) => {
                let inner = self.formula(scope)?;
                self.expect(FTok::RParen, "')'")?;
                Ok(inner)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a formula")
            }
        }
    }
}

impl fmt::Display for RenderedReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)
    }
}
