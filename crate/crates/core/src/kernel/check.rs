//! Syntax-directed type checking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::logical;
use super::term::Term;
use super::ty::{well_formed_type, SortScope, Type};

/// Path into a term: the sequence of child indices from the root. For `Abs`,
/// `TyAbs` and `TyApp` the single child is 0; for `App` the function is 0 and
/// the argument is 1.
pub type TermPath = Vec<usize>;

pub fn render_path(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable {name}")]
    UnboundVariable { name: String },
    #[error(
        "argument type mismatch at {}: expected {expected}, actual {actual}",
        render_path(path)
    )]
    ArgumentTypeMismatch {
        expected: Type,
        actual: Type,
        path: TermPath,
    },
    #[error("term at {} of type {found} is not a function", render_path(path))]
    NotAFunction { found: Type, path: TermPath },
    #[error("ill-formed type at {}: {detail}", render_path(path))]
    IllFormedType { detail: String, path: TermPath },
}

/// Term-variable typings plus in-scope type variables for checking open terms.
#[derive(Debug, Clone, Default)]
pub struct TypingContext {
    term_vars: BTreeMap<String, Type>,
    type_vars: BTreeSet<String>,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds a term variable. Reserved logical-constant names are rejected.
    pub fn bind_term(&mut self, name: impl Into<String>, ty: Type) -> Result<(), TypeError> {
        let name = name.into();
        if logical::is_reserved(&name) {
            return Err(TypeError::IllFormedType {
                detail: format!("reserved name {name} cannot be bound"),
                path: Vec::new(),
            });
        }
        self.term_vars.insert(name, ty);
        Ok(())
    }

    pub fn bind_type(&mut self, name: impl Into<String>) -> Result<(), TypeError> {
        let name = name.into();
        if logical::is_reserved(&name) {
            return Err(TypeError::IllFormedType {
                detail: format!("reserved name {name} cannot be bound"),
                path: Vec::new(),
            });
        }
        self.type_vars.insert(name);
        Ok(())
    }

    pub fn term_var(&self, name: &str) -> Option<&Type> {
        self.term_vars.get(name)
    }

    pub fn type_vars(&self) -> &BTreeSet<String> {
        &self.type_vars
    }
}

struct Env<'a> {
    base: &'a TypingContext,
    terms: Vec<(String, Type)>,
    tyvars: Vec<String>,
}

impl Env<'_> {
    fn lookup_term(&self, name: &str) -> Option<&Type> {
        self.terms
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .or_else(|| self.base.term_var(name))
    }

    fn bound_tyvars(&self) -> BTreeSet<String> {
        let mut out = self.base.type_vars().clone();
        out.extend(self.tyvars.iter().cloned());
        out
    }
}

/// The unique type of a Church-style term, by syntax-directed rules.
pub fn type_of(
    term: &Term,
    ctx: &TypingContext,
    scope: &impl SortScope,
) -> Result<Type, TypeError> {
    let mut env = Env {
        base: ctx,
        terms: Vec::new(),
        tyvars: Vec::new(),
    };
    let mut path = Vec::new();
    check(term, &mut env, scope, &mut path)
}

fn ensure_well_formed(
    ty: &Type,
    env: &Env<'_>,
    scope: &impl SortScope,
    path: &[usize],
) -> Result<(), TypeError> {
    if well_formed_type(ty, scope, &env.bound_tyvars()) {
        Ok(())
    } else {
        Err(TypeError::IllFormedType {
            detail: format!("{ty} mentions an undeclared sort or unbound type variable"),
            path: path.to_vec(),
        })
    }
}

fn check(
    term: &Term,
    env: &mut Env<'_>,
    scope: &impl SortScope,
    path: &mut Vec<usize>,
) -> Result<Type, TypeError> {
    match term {
        Term::Const(name, ty) => {
            if let Some(sig) = logical::signature(name) {
                if !ty.alpha_eq(&sig) {
                    return Err(TypeError::IllFormedType {
                        detail: format!(
                            "reserved constant {name} annotated {ty}, but its signature is {sig}"
                        ),
                        path: path.clone(),
                    });
                }
            }
            ensure_well_formed(ty, env, scope, path)?;
            Ok(ty.clone())
        }
        Term::Var(name) => env
            .lookup_term(name)
            .cloned()
            .ok_or_else(|| TypeError::UnboundVariable { name: name.clone() }),
        Term::Abs(x, ty, body) => {
            if logical::is_reserved(x) {
                return Err(TypeError::IllFormedType {
                    detail: format!("reserved name {x} cannot be bound"),
                    path: path.clone(),
                });
            }
            ensure_well_formed(ty, env, scope, path)?;
            env.terms.push((x.clone(), ty.clone()));
            path.push(0);
            let body_ty = check(body, env, scope, path);
            path.pop();
            env.terms.pop();
            Ok(Type::arrow(ty.clone(), body_ty?))
        }
        Term::App(f, a) => {
            path.push(0);
            let fun_ty = check(f, env, scope, path);
            path.pop();
            let fun_ty = fun_ty?;
            path.push(1);
            let arg_ty = check(a, env, scope, path);
            path.pop();
            let arg_ty = arg_ty?;
            match fun_ty {
                Type::Arrow(dom, cod) => {
                    if dom.alpha_eq(&arg_ty) {
                        Ok(*cod)
                    } else {
                        let mut p = path.clone();
                        p.push(1);
                        Err(TypeError::ArgumentTypeMismatch {
                            expected: *dom,
                            actual: arg_ty,
                            path: p,
                        })
                    }
                }
                other => {
                    let mut p = path.clone();
                    p.push(0);
                    Err(TypeError::NotAFunction {
                        found: other,
                        path: p,
                    })
                }
            }
        }
        Term::TyAbs(a, body) => {
            if logical::is_reserved(a) {
                return Err(TypeError::IllFormedType {
                    detail: format!("reserved name {a} cannot be bound"),
                    path: path.clone(),
                });
            }
            env.tyvars.push(a.clone());
            path.push(0);
            let body_ty = check(body, env, scope, path);
            path.pop();
            env.tyvars.pop();
            Ok(Type::forall(a.clone(), body_ty?))
        }
        Term::TyApp(f, ty_arg) => {
            ensure_well_formed(ty_arg, env, scope, path)?;
            path.push(0);
            let fun_ty = check(f, env, scope, path);
            path.pop();
            match fun_ty? {
                Type::Forall(binder, body) => Ok(body.subst(&binder, ty_arg)),
                other => {
                    let mut p = path.clone();
                    p.push(0);
                    Err(TypeError::NotAFunction {
                        found: other,
                        path: p,
                    })
                }
            }
        }
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = self
            .term_vars
            .iter()
            .map(|(n, t)| format!("{n}:{t}"))
            .collect();
        write!(f, "[{}]", vars.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::logical::{and_term, polymorphic_and};
    use crate::kernel::Term;

    fn scope() -> BTreeSet<String> {
        ["T", "P", "Pl"].iter().map(|s| s.to_string()).collect()
    }

    fn t3() -> Term {
        Term::constant("t3", Type::arrow(Type::sort("T"), Type::sort("Pl")))
    }

    fn t2() -> Term {
        Term::constant("t2", Type::arrow(Type::sort("T"), Type::sort("P")))
    }

    fn birmingham() -> Term {
        Term::constant("Birmingham", Type::sort("T"))
    }

    fn huge_place() -> Term {
        Term::constant("huge_place", Type::arrow(Type::sort("Pl"), Type::Prop))
    }

    fn voted() -> Term {
        Term::constant("voted", Type::arrow(Type::sort("P"), Type::Prop))
    }

    #[test]
    fn constant_has_its_annotation() {
        let ty = type_of(&t3(), &TypingContext::new(), &scope()).unwrap();
        assert_eq!(ty, Type::arrow(Type::sort("T"), Type::sort("Pl")));
    }

    #[test]
    fn identity_abstraction() {
        let term = Term::abs("x", Type::sort("T"), Term::var("x"));
        let ty = type_of(&term, &TypingContext::new(), &scope()).unwrap();
        assert_eq!(ty, Type::arrow(Type::sort("T"), Type::sort("T")));
    }

    #[test]
    fn predicate_argument_mismatch() {
        let term = Term::app(huge_place(), birmingham());
        let err = type_of(&term, &TypingContext::new(), &scope()).unwrap_err();
        match err {
            TypeError::ArgumentTypeMismatch {
                expected, actual, ..
            } => {
                assert_eq!(expected, Type::sort("Pl"));
                assert_eq!(actual, Type::sort("T"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn copredication_formula_is_a_proposition() {
        let term = Term::apps(
            and_term(),
            [
                Term::app(huge_place(), Term::app(t3(), birmingham())),
                Term::app(voted(), Term::app(t2(), birmingham())),
            ],
        );
        let ty = type_of(&term, &TypingContext::new(), &scope()).unwrap();
        assert_eq!(ty, Type::Prop);
    }

    #[test]
    fn unbound_variable_is_reported() {
        let err = type_of(&Term::var("x"), &TypingContext::new(), &scope()).unwrap_err();
        assert_eq!(err, TypeError::UnboundVariable { name: "x".into() });
    }

    #[test]
    fn applying_a_sort_constant_is_not_a_function() {
        let term = Term::app(birmingham(), birmingham());
        let err = type_of(&term, &TypingContext::new(), &scope()).unwrap_err();
        assert!(matches!(err, TypeError::NotAFunction { .. }));
    }

    #[test]
    fn reserved_constant_with_wrong_annotation_is_rejected() {
        let bad = Term::constant("and", Type::arrow(Type::Prop, Type::Prop));
        let err = type_of(&bad, &TypingContext::new(), &scope()).unwrap_err();
        assert!(matches!(err, TypeError::IllFormedType { .. }));
    }

    #[test]
    fn undeclared_sort_in_annotation_is_ill_formed() {
        let term = Term::constant("c", Type::sort("X"));
        let err = type_of(&term, &TypingContext::new(), &scope()).unwrap_err();
        assert!(matches!(err, TypeError::IllFormedType { .. }));
    }

    #[test]
    fn type_application_instantiates() {
        let term = Term::tyapp(polymorphic_and(), Type::sort("Pl"));
        let ty = type_of(&term, &TypingContext::new(), &scope()).unwrap();
        assert!(matches!(ty, Type::Forall(_, _)));
    }
}
