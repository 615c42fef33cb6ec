//! Church-style second-order λ-terms with typed constants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ty::{fresh_name, Type};

/// A term. Every abstraction carries its annotation and every type
/// instantiation is an explicit `TyApp`, so type checking is syntax-directed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    /// A typed constant.
    Const(String, Type),
    Var(String),
    /// `lam x:T. body`
    Abs(String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `Lam a. body`
    TyAbs(String, Box<Term>),
    /// `f [T]`
    TyApp(Box<Term>, Type),
}

impl Term {
    pub fn constant(name: impl Into<String>, ty: Type) -> Term {
        Term::Const(name.into(), ty)
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn abs(var: impl Into<String>, annotation: Type, body: Term) -> Term {
        Term::Abs(var.into(), annotation, Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// Left-associated application `f a1 a2 ...`.
    pub fn apps(fun: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    pub fn tyabs(binder: impl Into<String>, body: Term) -> Term {
        Term::TyAbs(binder.into(), Box::new(body))
    }

    pub fn tyapp(fun: Term, type_arg: Type) -> Term {
        Term::TyApp(Box::new(fun), type_arg)
    }

    /// Free term variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                Term::Const(_, _) => {}
                Term::Var(v) => {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.clone());
                    }
                }
                Term::Abs(x, _, body) => {
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::TyAbs(_, body) => go(body, bound, out),
                Term::TyApp(f, _) => go(f, bound, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Free type variables, including those occurring in annotations.
    pub fn free_type_vars(&self) -> BTreeSet<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            let collect_ty = |ty: &Type, bound: &[String], out: &mut BTreeSet<String>| {
                for v in ty.free_vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            };
            match t {
                Term::Const(_, ty) => collect_ty(ty, bound, out),
                Term::Var(_) => {}
                Term::Abs(_, ty, body) => {
                    collect_ty(ty, bound, out);
                    go(body, bound, out);
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::TyAbs(a, body) => {
                    bound.push(a.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::TyApp(f, ty) => {
                    go(f, bound, out);
                    collect_ty(ty, bound, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn is_atom(&self) -> bool {
        matches!(self, Term::Const(_, _) | Term::Var(_))
    }
}

/// Equality up to consistent renaming of bound term and type variables.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    fn matched(env: &[(String, String)], x: &str, y: &str) -> bool {
        for (l, r) in env.iter().rev() {
            if l == x || r == y {
                return l == x && r == y;
            }
        }
        x == y
    }

    fn ty_eq(a: &Type, b: &Type, tyenv: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (Type::Prop, Type::Prop) => true,
            (Type::Sort(x), Type::Sort(y)) => x == y,
            (Type::Var(x), Type::Var(y)) => matched(tyenv, x, y),
            (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
                ty_eq(d1, d2, tyenv) && ty_eq(c1, c2, tyenv)
            }
            (Type::Forall(x, b1), Type::Forall(y, b2)) => {
                tyenv.push((x.clone(), y.clone()));
                let r = ty_eq(b1, b2, tyenv);
                tyenv.pop();
                r
            }
            _ => false,
        }
    }

    fn go(
        a: &Term,
        b: &Term,
        env: &mut Vec<(String, String)>,
        tyenv: &mut Vec<(String, String)>,
    ) -> bool {
        match (a, b) {
            (Term::Const(n1, t1), Term::Const(n2, t2)) => n1 == n2 && ty_eq(t1, t2, tyenv),
            (Term::Var(x), Term::Var(y)) => matched(env, x, y),
            (Term::Abs(x, t1, b1), Term::Abs(y, t2, b2)) => {
                if !ty_eq(t1, t2, tyenv) {
                    return false;
                }
                env.push((x.clone(), y.clone()));
                let r = go(b1, b2, env, tyenv);
                env.pop();
                r
            }
            (Term::App(f1, a1), Term::App(f2, a2)) => {
                go(f1, f2, env, tyenv) && go(a1, a2, env, tyenv)
            }
            (Term::TyAbs(x, b1), Term::TyAbs(y, b2)) => {
                tyenv.push((x.clone(), y.clone()));
                let r = go(b1, b2, env, tyenv);
                tyenv.pop();
                r
            }
            (Term::TyApp(f1, t1), Term::TyApp(f2, t2)) => {
                go(f1, f2, env, tyenv) && ty_eq(t1, t2, tyenv)
            }
            _ => false,
        }
    }

    go(a, b, &mut Vec::new(), &mut Vec::new())
}

/// Capture-avoiding substitution of `replacement` for the free term variable
/// `var`. No free variable of `replacement` becomes bound.
pub fn substitute(term: &Term, var: &str, replacement: &Term) -> Term {
    match term {
        Term::Const(_, _) => term.clone(),
        Term::Var(v) => {
            if v == var {
                replacement.clone()
            } else {
                term.clone()
            }
        }
        Term::Abs(x, ty, body) => {
            if x == var {
                term.clone()
            } else if replacement.free_vars().contains(x) {
                let mut avoid = replacement.free_vars();
                avoid.extend(body.free_vars());
                avoid.insert(var.to_string());
                avoid.insert(x.clone());
                let fresh = fresh_name(x, &avoid);
                let renamed = substitute(body, x, &Term::Var(fresh.clone()));
                Term::abs(fresh, ty.clone(), substitute(&renamed, var, replacement))
            } else {
                Term::abs(x.clone(), ty.clone(), substitute(body, var, replacement))
            }
        }
        Term::App(f, a) => Term::app(
            substitute(f, var, replacement),
            substitute(a, var, replacement),
        ),
        Term::TyAbs(a, body) => {
            // The replacement's free type variables must not be captured.
            if replacement.free_type_vars().contains(a) {
                let mut avoid = replacement.free_type_vars();
                avoid.extend(body.free_type_vars());
                avoid.insert(a.clone());
                let fresh = fresh_name(a, &avoid);
                let renamed = substitute_type(body, a, &Type::Var(fresh.clone()));
                Term::tyabs(fresh, substitute(&renamed, var, replacement))
            } else {
                Term::tyabs(a.clone(), substitute(body, var, replacement))
            }
        }
        Term::TyApp(f, ty) => Term::tyapp(substitute(f, var, replacement), ty.clone()),
    }
}

/// Capture-avoiding substitution of a type for the free type variable `var`
/// throughout a term (annotations and type arguments included).
pub fn substitute_type(term: &Term, var: &str, ty: &Type) -> Term {
    match term {
        Term::Const(n, t) => Term::Const(n.clone(), t.subst(var, ty)),
        Term::Var(_) => term.clone(),
        Term::Abs(x, t, body) => {
            Term::abs(x.clone(), t.subst(var, ty), substitute_type(body, var, ty))
        }
        Term::App(f, a) => Term::app(substitute_type(f, var, ty), substitute_type(a, var, ty)),
        Term::TyAbs(a, body) => {
            if a == var {
                term.clone()
            } else if ty.free_vars().contains(a) {
                let mut avoid = ty.free_vars();
                avoid.extend(body.free_type_vars());
                avoid.insert(var.to_string());
                let fresh = fresh_name(a, &avoid);
                let renamed = substitute_type(body, a, &Type::Var(fresh.clone()));
                Term::tyabs(fresh, substitute_type(&renamed, var, ty))
            } else {
                Term::tyabs(a.clone(), substitute_type(body, var, ty))
            }
        }
        Term::TyApp(f, t) => Term::tyapp(substitute_type(f, var, ty), t.subst(var, ty)),
    }
}

/// The constants occurring in a term, mapped to their annotations. The first
/// occurrence of a name wins.
pub fn collect_signature(term: &Term) -> BTreeMap<String, Type> {
    fn go(t: &Term, out: &mut BTreeMap<String, Type>) {
        match t {
            Term::Const(n, ty) => {
                out.entry(n.clone()).or_insert_with(|| ty.clone());
            }
            Term::Var(_) => {}
            Term::Abs(_, _, body) | Term::TyAbs(_, body) => go(body, out),
            Term::App(f, a) => {
                go(f, out);
                go(a, out);
            }
            Term::TyApp(f, _) => go(f, out),
        }
    }
    let mut out = BTreeMap::new();
    go(term, &mut out);
    out
}

impl fmt::Display for Term {
    /// Concrete syntax: `lam x:T. body`, `Lam a. body`, juxtaposition
    /// application, `f [T]`. Constant annotations are not printed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(n, _) | Term::Var(n) => write!(f, "{n}"),
            Term::Abs(x, ty, body) => write!(f, "lam {x}:{ty}. {body}"),
            Term::TyAbs(a, body) => write!(f, "Lam {a}. {body}"),
            Term::App(fun, arg) => {
                match fun.as_ref() {
                    Term::Abs(_, _, _) | Term::TyAbs(_, _) => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                if arg.is_atom() {
                    write!(f, " {arg}")
                } else {
                    write!(f, " ({arg})")
                }
            }
            Term::TyApp(fun, ty) => {
                match fun.as_ref() {
                    Term::Abs(_, _, _) | Term::TyAbs(_, _) => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                write!(f, " [{ty}]")
            }
        }
    }
}
