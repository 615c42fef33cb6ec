//! β-normalization by normal-order reduction.
//!
//! Both term-level redexes `(lam x:T. b) a` and type-level redexes
//! `(Lam a. b) [T]` are contracted. No η-reduction. Well-typed terms of the
//! fragment are strongly normalizing; a step budget guards against ill-typed
//! input.

use thiserror::Error;

use super::term::{substitute, substitute_type, Term};

/// Default contraction budget; generous enough for any term this crate
/// produces.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("reduction budget of {budget} steps exhausted (is the term well-typed?)")]
pub struct BudgetExhausted {
    pub budget: usize,
}

/// β-normal form of a well-typed term.
///
/// Panics if the default budget is exhausted, which cannot happen on
/// well-typed input.
pub fn beta_normalize(term: &Term) -> Term {
    beta_normalize_budgeted(term, DEFAULT_BUDGET)
        .expect("reduction budget exhausted on supposedly well-typed term")
}

/// β-normal form with an explicit contraction budget.
pub fn beta_normalize_budgeted(term: &Term, budget: usize) -> Result<Term, BudgetExhausted> {
    let mut fuel = budget;
    let out = normal_form(term.clone(), &mut fuel, budget)?;
    Ok(out)
}

fn spend(fuel: &mut usize, budget: usize) -> Result<(), BudgetExhausted> {
    if *fuel == 0 {
        Err(BudgetExhausted { budget })
    } else {
        *fuel -= 1;
        Ok(())
    }
}

/// Weak head normal form: contract head redexes only, leaving arguments
/// untouched (normal order).
fn weak_head(mut term: Term, fuel: &mut usize, budget: usize) -> Result<Term, BudgetExhausted> {
    loop {
        match term {
            Term::App(f, a) => {
                let f = weak_head(*f, fuel, budget)?;
                if let Term::Abs(x, _, body) = f {
                    spend(fuel, budget)?;
                    term = substitute(&body, &x, &a);
                } else {
                    return Ok(Term::App(Box::new(f), a));
                }
            }
            Term::TyApp(f, ty) => {
                let f = weak_head(*f, fuel, budget)?;
                if let Term::TyAbs(a, body) = f {
                    spend(fuel, budget)?;
                    term = substitute_type(&body, &a, &ty);
                } else {
                    return Ok(Term::TyApp(Box::new(f), ty));
                }
            }
            other => return Ok(other),
        }
    }
}

fn normal_form(term: Term, fuel: &mut usize, budget: usize) -> Result<Term, BudgetExhausted> {
    match weak_head(term, fuel, budget)? {
        t @ (Term::Var(_) | Term::Const(_, _)) => Ok(t),
        Term::Abs(x, ty, body) => Ok(Term::Abs(
            x,
            ty,
            Box::new(normal_form(*body, fuel, budget)?),
        )),
        Term::TyAbs(a, body) => Ok(Term::TyAbs(a, Box::new(normal_form(*body, fuel, budget)?))),
        Term::App(f, a) => {
            // The head is stuck on a variable or constant; normalize inside.
            let f = normal_form(*f, fuel, budget)?;
            let a = normal_form(*a, fuel, budget)?;
            Ok(Term::app(f, a))
        }
        Term::TyApp(f, ty) => {
            let f = normal_form(*f, fuel, budget)?;
            Ok(Term::tyapp(f, ty))
        }
    }
}
