//! Concrete syntax for types and terms, and elaboration of surface terms
//! into fully annotated Church-style kernel terms.
//!
//! Types: `t` (the proposition type), sort names, `A -> B` (right
//! associative), `forall a. T`, parentheses.
//!
//! Terms: `lam x:T. body`, `Lam a. body`, juxtaposition application (left
//! associative), `term [T]` (type application), constants and variables as
//! identifiers.
//!
//! Identifiers that are not bound by an enclosing `lam`/`Lam` and are not
//! reserved logical names denote domain constants. Their types are fixed by
//! bidirectional elaboration: synthesized bottom-up where possible, otherwise
//! propagated from the expected type (so `birmingham` checked against `T`
//! becomes the constant `birmingham^T`, and the head of `give s o d` checked
//! against `t` becomes `give^{e->e->e->t}`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kernel::logical;
use crate::kernel::{is_identifier, SortScope, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {pos}: {message}")]
pub struct SyntaxError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("expected {expected}, computed {computed}")]
    TypeMismatch { expected: Type, computed: Type },
    #[error("binder {binder} annotated {annotated} where {expected} is expected")]
    BinderMismatch {
        binder: String,
        annotated: Type,
        expected: Type,
    },
    #[error("cannot infer a type for constant {name}")]
    CannotSynthesize { name: String },
    #[error("constant {name} used at {second} but previously at {first}")]
    ConflictingConstant {
        name: String,
        first: Type,
        second: Type,
    },
    #[error("reserved name {name} cannot be bound")]
    ReservedBinder { name: String },
    #[error("unknown sort or type variable {name}")]
    UnknownTypeName { name: String },
    #[error("term of type {found} {applied}")]
    NotApplicable { found: Type, applied: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Dot,
    Arrow,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, SyntaxError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            '[' => {
                out.push((i, Token::LBracket));
                i += 1;
            }
            ']' => {
                out.push((i, Token::RBracket));
                i += 1;
            }
            ':' => {
                out.push((i, Token::Colon));
                i += 1;
            }
            '.' => {
                out.push((i, Token::Dot));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((i, Token::Arrow));
                    i += 2;
                } else {
                    return Err(SyntaxError {
                        pos: i,
                        message: "expected '->'".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
            }
            other => {
                return Err(SyntaxError {
                    pos: i,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// Unresolved type syntax: names are classified as sorts or type variables
/// only during resolution, when the binder scope is known.
#[derive(Debug, Clone, PartialEq)]
enum UType {
    Prop,
    Named(String),
    Arrow(Box<UType>, Box<UType>),
    Forall(String, Box<UType>),
}

#[derive(Debug, Clone, PartialEq)]
enum Surface {
    Ident(String),
    Lam(String, UType, Box<Surface>),
    TyLam(String, Box<Surface>),
    App(Box<Surface>, Box<Surface>),
    TyApp(Box<Surface>, UType),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, SyntaxError> {
        let tokens = tokenize(src)?;
        Ok(Parser {
            len: src.len(),
            tokens,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.len)
    }

    fn next(&mut self) -> Option<Token> {
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

    fn expect(&mut self, want: Token, what: &str) -> Result<(), SyntaxError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected {what}"))
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.next() {
            Some(Token::Ident(n)) => Ok(n),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected {what}"))
            }
        }
    }

    // type := 'forall' IDENT '.' type | atom ('->' type)?
    fn utype(&mut self) -> Result<UType, SyntaxError> {
        if let Some(Token::Ident(n)) = self.peek() {
            if n == "forall" {
                self.next();
                let binder = self.ident("type-variable binder")?;
                self.expect(Token::Dot, "'.' after forall binder")?;
                let body = self.utype()?;
                return Ok(UType::Forall(binder, Box::new(body)));
            }
        }
        let lhs = self.utype_atom()?;
        if let Some(Token::Arrow) = self.peek() {
            self.next();
            let rhs = self.utype()?;
            Ok(UType::Arrow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn utype_atom(&mut self) -> Result<UType, SyntaxError> {
        match self.next() {
            Some(Token::Ident(n)) if n == "t" => Ok(UType::Prop),
            Some(Token::Ident(n)) => Ok(UType::Named(n)),
            Some(Token::LParen) => {
                let ty = self.utype()?;
                self.expect(Token::RParen, "')'")?;
                Ok(ty)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a type")
            }
        }
    }

    // term := 'lam' IDENT ':' type '.' term | 'Lam' IDENT '.' term | appchain
    fn term(&mut self) -> Result<Surface, SyntaxError> {
        match self.peek() {
            Some(Token::Ident(n)) if n == "lam" => {
                self.next();
                let binder = self.ident("binder")?;
                self.expect(Token::Colon, "':' after binder")?;
                let ann = self.utype()?;
                self.expect(Token::Dot, "'.' after annotation")?;
                let body = self.term()?;
                Ok(Surface::Lam(binder, ann, Box::new(body)))
            }
            Some(Token::Ident(n)) if n == "Lam" => {
                self.next();
                let binder = self.ident("type binder")?;
                self.expect(Token::Dot, "'.' after type binder")?;
                let body = self.term()?;
                Ok(Surface::TyLam(binder, Box::new(body)))
            }
            _ => self.appchain(),
        }
    }

    fn appchain(&mut self) -> Result<Surface, SyntaxError> {
        let mut head = self.atom()?;
        loop {
            match self.peek() {
                Some(Token::Ident(n)) if n == "lam" || n == "Lam" => {
                    // `f lam x:T. b` needs parentheses; stop here.
                    return self.err("lambda in argument position needs parentheses");
                }
                Some(Token::Ident(_)) | Some(Token::LParen) => {
                    let arg = self.atom()?;
                    head = Surface::App(Box::new(head), Box::new(arg));
                }
                Some(Token::LBracket) => {
                    self.next();
                    let ty = self.utype()?;
                    self.expect(Token::RBracket, "']'")?;
                    head = Surface::TyApp(Box::new(head), ty);
                }
                _ => return Ok(head),
            }
        }
    }

    fn atom(&mut self) -> Result<Surface, SyntaxError> {
        match self.next() {
            Some(Token::Ident(n)) => Ok(Surface::Ident(n)),
            Some(Token::LParen) => {
                let t = self.term()?;
                self.expect(Token::RParen, "')'")?;
                Ok(t)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a term")
            }
        }
    }

    fn finish(&mut self) -> Result<(), SyntaxError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            self.err("trailing input")
        }
    }
}

/// Parses a closed type. Free identifiers must be declared sorts.
pub fn parse_type(src: &str, scope: &impl SortScope) -> Result<Type, SyntaxError> {
    let mut p = Parser::new(src)?;
    let ut = p.utype()?;
    p.finish()?;
    resolve_utype(&ut, scope, &mut Vec::new()).map_err(|e| match e {
        ElabError::UnknownTypeName { name } => SyntaxError {
            pos: 0,
            message: format!("unknown sort or type variable {name} in {src:?}"),
        },
        other => SyntaxError {
            pos: 0,
            message: other.to_string(),
        },
    })
}

fn resolve_utype(
    ut: &UType,
    scope: &impl SortScope,
    bound: &mut Vec<String>,
) -> Result<Type, ElabError> {
    match ut {
        UType::Prop => Ok(Type::Prop),
        UType::Named(n) => {
            if bound.iter().any(|b| b == n) {
                Ok(Type::Var(n.clone()))
            } else if scope.has_sort(n) {
                Ok(Type::Sort(n.clone()))
            } else {
                Err(ElabError::UnknownTypeName { name: n.clone() })
            }
        }
        UType::Arrow(d, c) => Ok(Type::arrow(
            resolve_utype(d, scope, bound)?,
            resolve_utype(c, scope, bound)?,
        )),
        UType::Forall(b, body) => {
            bound.push(b.clone());
            let body = resolve_utype(body, scope, bound);
            bound.pop();
            Ok(Type::forall(b.clone(), body?))
        }
    }
}

/// Constant signature accumulated while elaborating one lexical entry.
pub type ConstSig = BTreeMap<String, Type>;

struct Elab<'a, S: SortScope> {
    scope: &'a S,
    sig: &'a mut ConstSig,
    term_scope: Vec<(String, Type)>,
    ty_scope: Vec<String>,
}

enum SpineArg<'s> {
    Term(&'s Surface),
    Type(&'s UType),
}

fn unfold_spine(s: &Surface) -> (&Surface, Vec<SpineArg<'_>>) {
    let mut args = Vec::new();
    let mut head = s;
    loop {
        match head {
            Surface::App(f, a) => {
                args.push(SpineArg::Term(a));
                head = f;
            }
            Surface::TyApp(f, t) => {
                args.push(SpineArg::Type(t));
                head = f;
            }
            _ => break,
        }
    }
    args.reverse();
    (head, args)
}

impl<S: SortScope> Elab<'_, S> {
    fn resolve(&mut self, ut: &UType) -> Result<Type, ElabError> {
        let mut bound = self.ty_scope.clone();
        resolve_utype(ut, self.scope, &mut bound)
    }

    fn lookup_var(&self, name: &str) -> Option<Type> {
        self.term_scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.clone())
    }

    /// Head resolution for bound variables, logical constants and constants
    /// already in the signature. `None` means an as-yet-unknown constant.
    fn known_head(&self, name: &str) -> Option<(Term, Type)> {
        if let Some(ty) = self.lookup_var(name) {
            return Some((Term::var(name), ty));
        }
        if name == logical::POLY_AND {
            return Some((logical::polymorphic_and(), logical::poly_and_type()));
        }
        if let Some(sig) = logical::signature(name) {
            return Some((Term::constant(name, sig.clone()), sig));
        }
        self.sig
            .get(name)
            .map(|ty| (Term::constant(name, ty.clone()), ty.clone()))
    }

    fn check(&mut self, s: &Surface, expected: &Type) -> Result<Term, ElabError> {
        match s {
            Surface::Lam(x, ann, body) => {
                if logical::is_reserved(x) {
                    return Err(ElabError::ReservedBinder { name: x.clone() });
                }
                let ann = self.resolve(ann)?;
                let (dom, cod) = expected.as_arrow().ok_or_else(|| ElabError::TypeMismatch {
                    expected: expected.clone(),
                    computed: Type::arrow(ann.clone(), Type::var("_")),
                })?;
                if !ann.alpha_eq(dom) {
                    return Err(ElabError::BinderMismatch {
                        binder: x.clone(),
                        annotated: ann,
                        expected: dom.clone(),
                    });
                }
                self.term_scope.push((x.clone(), ann.clone()));
                let body = self.check(body, cod);
                self.term_scope.pop();
                Ok(Term::abs(x.clone(), ann, body?))
            }
            Surface::TyLam(a, body) => {
                if logical::is_reserved(a) {
                    return Err(ElabError::ReservedBinder { name: a.clone() });
                }
                let (binder, bty) = match expected {
                    Type::Forall(b, t) => (b.clone(), t.as_ref().clone()),
                    other => {
                        return Err(ElabError::TypeMismatch {
                            expected: other.clone(),
                            computed: Type::forall(a.clone(), Type::var("_")),
                        })
                    }
                };
                let expected_body = if binder == *a {
                    bty
                } else {
                    bty.subst(&binder, &Type::Var(a.clone()))
                };
                self.ty_scope.push(a.clone());
                let body = self.check(body, &expected_body);
                self.ty_scope.pop();
                Ok(Term::tyabs(a.clone(), body?))
            }
            _ => {
                let (head, args) = unfold_spine(s);
                if let Surface::Ident(name) = head {
                    if self.known_head(name).is_none() {
                        return self.check_unknown_spine(name, &args, expected);
                    }
                }
                let (term, ty) = self.synth_spine(head, &args)?;
                if ty.alpha_eq(expected) {
                    Ok(term)
                } else {
                    Err(ElabError::TypeMismatch {
                        expected: expected.clone(),
                        computed: ty,
                    })
                }
            }
        }
    }

    /// A spine headed by a fresh constant: synthesize the argument types and
    /// give the head the arrow type ending in `expected`.
    fn check_unknown_spine(
        &mut self,
        name: &str,
        args: &[SpineArg<'_>],
        expected: &Type,
    ) -> Result<Term, ElabError> {
        let mut arg_terms = Vec::new();
        let mut arg_types = Vec::new();
        for arg in args {
            match arg {
                SpineArg::Type(_) => {
                    return Err(ElabError::CannotSynthesize {
                        name: name.to_string(),
                    })
                }
                SpineArg::Term(a) => {
                    let (t, ty) = self.synth(a)?;
                    arg_terms.push(t);
                    arg_types.push(ty);
                }
            }
        }
        let head_ty = Type::arrows(arg_types, expected.clone());
        self.sig.insert(name.to_string(), head_ty.clone());
        Ok(Term::apps(Term::constant(name, head_ty), arg_terms))
    }

    fn synth(&mut self, s: &Surface) -> Result<(Term, Type), ElabError> {
        match s {
            Surface::Lam(x, ann, body) => {
                if logical::is_reserved(x) {
                    return Err(ElabError::ReservedBinder { name: x.clone() });
                }
                let ann = self.resolve(ann)?;
                self.term_scope.push((x.clone(), ann.clone()));
                let body = self.synth(body);
                self.term_scope.pop();
                let (body, body_ty) = body?;
                Ok((
                    Term::abs(x.clone(), ann.clone(), body),
                    Type::arrow(ann, body_ty),
                ))
            }
            Surface::TyLam(a, body) => {
                if logical::is_reserved(a) {
                    return Err(ElabError::ReservedBinder { name: a.clone() });
                }
                self.ty_scope.push(a.clone());
                let body = self.synth(body);
                self.ty_scope.pop();
                let (body, body_ty) = body?;
                Ok((
                    Term::tyabs(a.clone(), body),
                    Type::forall(a.clone(), body_ty),
                ))
            }
            _ => {
                let (head, args) = unfold_spine(s);
                self.synth_spine(head, &args)
            }
        }
    }

    fn synth_spine(
        &mut self,
        head: &Surface,
        args: &[SpineArg<'_>],
    ) -> Result<(Term, Type), ElabError> {
        let (mut term, mut ty) = match head {
            Surface::Ident(name) => self
                .known_head(name)
                .ok_or_else(|| ElabError::CannotSynthesize { name: name.clone() })?,
            other => self.synth(other)?,
        };
        for arg in args {
            match arg {
                SpineArg::Type(ut) => {
                    let t = self.resolve(ut)?;
                    match &ty {
                        Type::Forall(b, body) => {
                            ty = body.subst(b, &t);
                            term = Term::tyapp(term, t);
                        }
                        other => {
                            return Err(ElabError::NotApplicable {
                                found: other.clone(),
                                applied: format!("instantiated at [{t}]"),
                            })
                        }
                    }
                }
                SpineArg::Term(a) => match ty.clone() {
                    Type::Arrow(dom, cod) => {
                        let arg = self.check(a, &dom)?;
                        term = Term::app(term, arg);
                        ty = *cod;
                    }
                    other => {
                        return Err(ElabError::NotApplicable {
                            found: other,
                            applied: "applied to an argument".into(),
                        })
                    }
                },
            }
        }
        Ok((term, ty))
    }
}

/// Parses `src` and elaborates it against `expected`. Synthesis is attempted
/// first so a determinate computed type can be reported on mismatch; terms
/// mentioning fresh constants fall back to checking mode, which fixes those
/// constants' types from the expected type.
///
/// `sig` carries the constant types already fixed for the current lexical
/// entry and is extended with any newly inferred constants.
pub fn elaborate_term(
    src: &str,
    expected: &Type,
    scope: &impl SortScope,
    sig: &mut ConstSig,
) -> Result<Term, ElabError> {
    let mut p = Parser::new(src)?;
    let surface = p.term()?;
    p.finish()?;
    for name in collect_idents(&surface) {
        if !is_identifier(&name) {
            // The tokenizer only builds identifier-shaped names; keep the
            // check as a guard for future token kinds.
            return Err(ElabError::Syntax(SyntaxError {
                pos: 0,
                message: format!("invalid identifier {name:?}"),
            }));
        }
    }
    let mut elab = Elab {
        scope,
        sig,
        term_scope: Vec::new(),
        ty_scope: Vec::new(),
    };
    match elab.synth(&surface) {
        Ok((term, ty)) => {
            if ty.alpha_eq(expected) {
                Ok(term)
            } else {
                Err(ElabError::TypeMismatch {
                    expected: expected.clone(),
                    computed: ty,
                })
            }
        }
        Err(ElabError::CannotSynthesize { .. }) => elab.check(&surface, expected),
        Err(other) => Err(other),
    }
}

fn collect_idents(s: &Surface) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(s: &Surface, out: &mut BTreeSet<String>) {
        match s {
            Surface::Ident(n) => {
                out.insert(n.clone());
            }
            Surface::Lam(n, _, b) => {
                out.insert(n.clone());
                go(b, out);
            }
            Surface::TyLam(n, b) => {
                out.insert(n.clone());
                go(b, out);
            }
            Surface::App(f, a) => {
                go(f, out);
                go(a, out);
            }
            Surface::TyApp(f, _) => go(f, out),
        }
    }
    go(s, &mut out);
    out
}

impl fmt::Display for UType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UType::Prop => write!(f, "t"),
            UType::Named(n) => write!(f, "{n}"),
            UType::Arrow(d, c) => write!(f, "({d}) -> {c}"),
            UType::Forall(b, body) => write!(f, "forall {b}. {body}"),
        }
    }
}
