//! The fixed logical signature shared by every lexicon.
//!
//! `and`, `or`, `implies`, `not`, `Exists` and `Forall` are opaque constants.
//! `AND` is the polymorphic conjunction used for copredication; it is a
//! defined combinator and occurrences of the name expand to its body.

use super::term::Term;
use super::ty::Type;

pub const AND: &str = "and";
pub const OR: &str = "or";
pub const IMPLIES: &str = "implies";
pub const NOT: &str = "not";
pub const EXISTS: &str = "Exists";
pub const FORALL: &str = "Forall";
pub const POLY_AND: &str = "AND";

/// Names a lexicon may not redeclare.
pub const RESERVED: &[&str] = &[AND, OR, IMPLIES, NOT, EXISTS, FORALL, POLY_AND];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

fn binary_prop() -> Type {
    Type::arrows([Type::Prop, Type::Prop], Type::Prop)
}

fn quantifier_type() -> Type {
    // forall a. (a -> t) -> t
    Type::forall(
        "a",
        Type::arrow(Type::arrow(Type::var("a"), Type::Prop), Type::Prop),
    )
}

/// The polymorphic conjunction's type:
/// `forall a. forall b. (a -> t) -> (b -> t) -> forall xi. xi -> (xi -> a) -> (xi -> b) -> t`.
pub fn poly_and_type() -> Type {
    Type::forall(
        "a",
        Type::forall(
            "b",
            Type::arrows(
                [
                    Type::arrow(Type::var("a"), Type::Prop),
                    Type::arrow(Type::var("b"), Type::Prop),
                ],
                Type::forall(
                    "xi",
                    Type::arrows(
                        [
                            Type::var("xi"),
                            Type::arrow(Type::var("xi"), Type::var("a")),
                            Type::arrow(Type::var("xi"), Type::var("b")),
                        ],
                        Type::Prop,
                    ),
                ),
            ),
        ),
    )
}

/// The fixed signature of a reserved constant, if `name` is reserved.
pub fn signature(name: &str) -> Option<Type> {
    match name {
        AND | OR | IMPLIES => Some(binary_prop()),
        NOT => Some(Type::arrow(Type::Prop, Type::Prop)),
        EXISTS | FORALL => Some(quantifier_type()),
        POLY_AND => Some(poly_and_type()),
        _ => None,
    }
}

pub fn and_term() -> Term {
    Term::constant(AND, binary_prop())
}

pub fn or_term() -> Term {
    Term::constant(OR, binary_prop())
}

pub fn implies_term() -> Term {
    Term::constant(IMPLIES, binary_prop())
}

pub fn not_term() -> Term {
    Term::constant(NOT, Type::arrow(Type::Prop, Type::Prop))
}

pub fn exists_term() -> Term {
    Term::constant(EXISTS, quantifier_type())
}

pub fn forall_term() -> Term {
    Term::constant(FORALL, quantifier_type())
}

/// The defining body of the polymorphic conjunction:
/// `Lam a. Lam b. lam P:a->t. lam Q:b->t. Lam xi. lam x:xi. lam f:xi->a. lam g:xi->b. and (P (f x)) (Q (g x))`.
pub fn polymorphic_and() -> Term {
    let body = Term::apps(
        and_term(),
        [
            Term::app(Term::var("P"), Term::app(Term::var("f"), Term::var("x"))),
            Term::app(Term::var("Q"), Term::app(Term::var("g"), Term::var("x"))),
        ],
    );
    Term::tyabs(
        "a",
        Term::tyabs(
            "b",
            Term::abs(
                "P",
                Type::arrow(Type::var("a"), Type::Prop),
                Term::abs(
                    "Q",
                    Type::arrow(Type::var("b"), Type::Prop),
                    Term::tyabs(
                        "xi",
                        Term::abs(
                            "x",
                            Type::var("xi"),
                            Term::abs(
                                "f",
                                Type::arrow(Type::var("xi"), Type::var("a")),
                                Term::abs("g", Type::arrow(Type::var("xi"), Type::var("b")), body),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    )
}
