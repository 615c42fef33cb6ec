//! Types of the many-sorted second-order fragment.

use std::collections::BTreeSet;
use std::fmt;

/// Scope query for declared base sorts.
pub trait SortScope {
    fn has_sort(&self, name: &str) -> bool;
}

impl SortScope for BTreeSet<String> {
    fn has_sort(&self, name: &str) -> bool {
        self.contains(name)
    }
}

impl<S: SortScope> SortScope for &S {
    fn has_sort(&self, name: &str) -> bool {
        (**self).has_sort(name)
    }
}

/// A type: the proposition type `t`, a base sort, an arrow, a type variable,
/// or a universally quantified type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Prop,
    Sort(String),
    Arrow(Box<Type>, Box<Type>),
    Var(String),
    Forall(String, Box<Type>),
}

impl Type {
    pub fn sort(name: impl Into<String>) -> Type {
        Type::Sort(name.into())
    }

    pub fn var(name: impl Into<String>) -> Type {
        Type::Var(name.into())
    }

    pub fn arrow(domain: Type, codomain: Type) -> Type {
        Type::Arrow(Box::new(domain), Box::new(codomain))
    }

    pub fn forall(binder: impl Into<String>, body: Type) -> Type {
        Type::Forall(binder.into(), Box::new(body))
    }

    /// Right-associated arrow chain `a1 -> a2 -> ... -> result`.
    pub fn arrows(domains: impl IntoIterator<Item = Type>, result: Type) -> Type {
        let doms: Vec<Type> = domains.into_iter().collect();
        doms.into_iter()
            .rev()
            .fold(result, |acc, d| Type::arrow(d, acc))
    }

    pub fn as_arrow(&self) -> Option<(&Type, &Type)> {
        match self {
            Type::Arrow(d, c) => Some((d, c)),
            _ => None,
        }
    }

    /// Free type variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(ty: &Type, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match ty {
                Type::Prop | Type::Sort(_) => {}
                Type::Var(v) => {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.clone());
                    }
                }
                Type::Arrow(d, c) => {
                    go(d, bound, out);
                    go(c, bound, out);
                }
                Type::Forall(b, body) => {
                    bound.push(b.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Equality up to consistent renaming of bound type variables.
    pub fn alpha_eq(&self, other: &Type) -> bool {
        fn go(a: &Type, b: &Type, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (Type::Prop, Type::Prop) => true,
                (Type::Sort(x), Type::Sort(y)) => x == y,
                (Type::Var(x), Type::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if l == x || r == y {
                            return l == x && r == y;
                        }
                    }
                    x == y
                }
                (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => go(d1, d2, env) && go(c1, c2, env),
                (Type::Forall(x, b1), Type::Forall(y, b2)) => {
                    env.push((x.clone(), y.clone()));
                    let r = go(b1, b2, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Capture-avoiding substitution of `replacement` for the free type
    /// variable `var`.
    pub fn subst(&self, var: &str, replacement: &Type) -> Type {
        match self {
            Type::Prop | Type::Sort(_) => self.clone(),
            Type::Var(v) => {
                if v == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Type::Arrow(d, c) => Type::arrow(d.subst(var, replacement), c.subst(var, replacement)),
            Type::Forall(b, body) => {
                if b == var {
                    self.clone()
                } else if replacement.free_vars().contains(b) {
                    let mut avoid = replacement.free_vars();
                    avoid.extend(body.free_vars());
                    avoid.insert(var.to_string());
                    let fresh = fresh_name(b, &avoid);
                    let renamed = body.subst(b, &Type::Var(fresh.clone()));
                    Type::forall(fresh, renamed.subst(var, replacement))
                } else {
                    Type::forall(b.clone(), body.subst(var, replacement))
                }
            }
        }
    }

    fn is_atom(&self) -> bool {
        matches!(self, Type::Prop | Type::Sort(_) | Type::Var(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Prop => write!(f, "t"),
            Type::Sort(n) | Type::Var(n) => write!(f, "{n}"),
            Type::Arrow(d, c) => {
                if d.is_atom() {
                    write!(f, "{d} -> {c}")
                } else {
                    write!(f, "({d}) -> {c}")
                }
            }
            Type::Forall(b, body) => write!(f, "forall {b}. {body}"),
        }
    }
}

/// True iff every `Sort` reference is declared in `scope` and every type
/// variable is either in `bound` or bound by an enclosing `forall`.
pub fn well_formed_type(ty: &Type, scope: &impl SortScope, bound: &BTreeSet<String>) -> bool {
    fn go(
        ty: &Type,
        scope: &dyn Fn(&str) -> bool,
        stack: &mut Vec<String>,
        bound: &BTreeSet<String>,
    ) -> bool {
        match ty {
            Type::Prop => true,
            Type::Sort(s) => scope(s),
            Type::Var(v) => bound.contains(v) || stack.iter().any(|b| b == v),
            Type::Arrow(d, c) => go(d, scope, stack, bound) && go(c, scope, stack, bound),
            Type::Forall(b, body) => {
                stack.push(b.clone());
                let r = go(body, scope, stack, bound);
                stack.pop();
                r
            }
        }
    }
    go(ty, &|s| scope.has_sort(s), &mut Vec::new(), bound)
}

/// True for identifiers of the shape `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A name based on `base` that does not occur in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    for n in 1.. {
        let candidate = format!("{stem}{n}");
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
    unreachable!()
}
