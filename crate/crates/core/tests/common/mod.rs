//! Shared test support: fixture loading, goal-directed random well-typed
//! term generation, and random (lexicon, derivation) instances for the
//! oracle-equivalence suite.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use sorted_montague::composer::{ComposeError, ComposerOptions, DerivationNode, Reading};
use sorted_montague::kernel::{alpha_equal, substitute, substitute_type, Term, Type};
use sorted_montague::lexicon::{load_lexicon, load_sort_inventory, Lexicon, SortInventory};

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("cannot read fixture {name}: {e}"))
}

pub fn fixture_inventory(name: &str) -> SortInventory {
    load_sort_inventory(&fixture_text(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// Parses a fixture inventory without validating it (for the bad fixtures).
pub fn fixture_inventory_unchecked(name: &str) -> SortInventory {
    sorted_montague::lexicon::parse_sort_inventory(&fixture_text(name))
        .unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn fixture_lexicon(sorts: &str, lex: &str) -> Lexicon {
    let inv = fixture_inventory(sorts);
    load_lexicon(&fixture_text(lex), &inv).unwrap_or_else(|e| panic!("fixture {lex}: {e}"))
}

/// Goal-directed generator of closed, well-typed terms over a small sort
/// inventory. Application nodes frequently generate abstractions in functor
/// position, so the output is rich in β- and type-level redexes.
pub struct TermGen {
    rng: StdRng,
    sorts: Vec<String>,
    counter: usize,
}

impl TermGen {
    pub fn new(seed: u64, n_sorts: usize) -> Self {
        TermGen {
            rng: StdRng::seed_from_u64(seed),
            sorts: (0..n_sorts.max(1)).map(|i| format!("S{i}")).collect(),
            counter: 0,
        }
    }

    pub fn scope(&self) -> BTreeSet<String> {
        self.sorts.iter().cloned().collect()
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    pub fn gen_type(&mut self, depth: usize) -> Type {
        let pick = if depth == 0 {
            self.rng.gen_range(0..6)
        } else {
            self.rng.gen_range(0..10)
        };
        match pick {
            0..=3 => {
                let sort = self.sorts.choose(&mut self.rng).unwrap().clone();
                Type::Sort(sort)
            }
            4 | 5 => Type::Prop,
            _ => Type::arrow(self.gen_type(depth - 1), self.gen_type(depth - 1)),
        }
    }

    /// A closed well-typed term of a freshly chosen type.
    pub fn gen_term(&mut self, depth: usize) -> (Term, Type) {
        let target = self.gen_type(2);
        let term = self.go(&target, &mut Vec::new(), depth);
        (term, target)
    }

    /// A closed well-typed term of the given type.
    pub fn gen_term_of(&mut self, target: &Type, depth: usize) -> Term {
        self.go(target, &mut Vec::new(), depth)
    }

    /// A well-typed term that may use the given free variables.
    pub fn gen_open_term(&mut self, free: &[(String, Type)], depth: usize) -> Term {
        let target = self.gen_type(2);
        let mut ctx: Vec<(String, Type)> = free.to_vec();
        self.go(&target, &mut ctx, depth)
    }

    fn base(&mut self, target: &Type, ctx: &[(String, Type)]) -> Term {
        let candidates: Vec<&(String, Type)> =
            ctx.iter().filter(|(_, ty)| ty.alpha_eq(target)).collect();
        if !candidates.is_empty() && self.rng.gen_bool(0.7) {
            let (name, _) = candidates.choose(&mut self.rng).unwrap();
            return Term::var(name.clone());
        }
        let name = self.fresh("c");
        Term::constant(name, target.clone())
    }

    fn go(&mut self, target: &Type, ctx: &mut Vec<(String, Type)>, depth: usize) -> Term {
        if depth == 0 {
            return self.base(target, ctx);
        }
        let roll = self.rng.gen_range(0..10);
        match target {
            Type::Arrow(dom, cod) if roll < 5 => {
                let x = self.fresh("v");
                ctx.push((x.clone(), dom.as_ref().clone()));
                let body = self.go(cod, ctx, depth - 1);
                ctx.pop();
                Term::abs(x, dom.as_ref().clone(), body)
            }
            Type::Forall(binder, body) if roll < 5 => {
                let fresh = self.fresh("t");
                let renamed = body.subst(binder, &Type::Var(fresh.clone()));
                let inner = self.go(&renamed, ctx, depth - 1);
                Term::tyabs(fresh, inner)
            }
            _ if roll < 3 => self.base(target, ctx),
            _ if roll < 7 => {
                // Application at a random domain type.
                let dom = self.gen_type(1);
                let fun = self.go(&Type::arrow(dom.clone(), target.clone()), ctx, depth - 1);
                let arg = self.go(&dom, ctx, depth - 1);
                Term::app(fun, arg)
            }
            _ => {
                // Type application: abstract some occurrences of a chosen
                // instantiation type out of the target, then instantiate.
                let inst = self.gen_type(1);
                let binder = self.fresh("t");
                let abstracted = self.abstract_ty(target, &inst, &binder);
                let fun = self.go(&Type::forall(binder, abstracted), ctx, depth - 1);
                Term::tyapp(fun, inst)
            }
        }
    }

    fn abstract_ty(&mut self, ty: &Type, pattern: &Type, var: &str) -> Type {
        if ty.alpha_eq(pattern) && self.rng.gen_bool(0.5) {
            return Type::var(var);
        }
        match ty {
            Type::Arrow(d, c) => Type::arrow(
                self.abstract_ty(d, pattern, var),
                self.abstract_ty(c, pattern, var),
            ),
            Type::Forall(b, body) => Type::forall(b.clone(), self.abstract_ty(body, pattern, var)),
            other => other.clone(),
        }
    }
}

/// An α-variant: some binders consistently renamed to fresh names.
pub fn alpha_variant(term: &Term, rng: &mut StdRng, counter: &mut usize) -> Term {
    match term {
        Term::Const(_, _) | Term::Var(_) => term.clone(),
        Term::Abs(x, ty, body) => {
            let body = alpha_variant(body, rng, counter);
            if rng.gen_bool(0.5) {
                *counter += 1;
                let fresh = format!("rn{counter}");
                let renamed = substitute(&body, x, &Term::var(fresh.clone()));
                Term::abs(fresh, ty.clone(), renamed)
            } else {
                Term::abs(x.clone(), ty.clone(), body)
            }
        }
        Term::App(f, a) => Term::app(
            alpha_variant(f, rng, counter),
            alpha_variant(a, rng, counter),
        ),
        Term::TyAbs(a, body) => {
            let body = alpha_variant(body, rng, counter);
            if rng.gen_bool(0.5) {
                *counter += 1;
                let fresh = format!("rt{counter}");
                let renamed = substitute_type(&body, a, &Type::var(fresh.clone()));
                Term::tyabs(fresh, renamed)
            } else {
                Term::tyabs(a.clone(), body)
            }
        }
        Term::TyApp(f, ty) => Term::tyapp(alpha_variant(f, rng, counter), ty.clone()),
    }
}

/// Asserts that two composition results are interchangeable: α-equal reading
/// lists in the same order (with equal costs and traces), or errors of the
/// same kind.
pub fn assert_oracle_agreement(
    got: &Result<Vec<Reading>, ComposeError>,
    want: &Result<Vec<Reading>, ComposeError>,
    context: &str,
) {
    match (got, want) {
        (Ok(a), Ok(b)) => {
            assert_eq!(a.len(), b.len(), "{context}: reading counts differ");
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                assert!(
                    alpha_equal(&x.term, &y.term),
                    "{context}: reading {i} differs:\n  compose: {}\n  oracle:  {}",
                    x.term,
                    y.term
                );
                assert_eq!(x.cost, y.cost, "{context}: cost of reading {i}");
                assert_eq!(x.trace, y.trace, "{context}: trace of reading {i}");
                assert!(x.ty.alpha_eq(&y.ty), "{context}: type of reading {i}");
            }
        }
        (Err(e1), Err(e2)) => {
            assert_eq!(
                std::mem::discriminant(e1),
                std::mem::discriminant(e2),
                "{context}: error kinds differ: {e1} vs {e2}"
            );
        }
        (Ok(a), Err(e)) => panic!(
            "{context}: compose found {} readings, oracle failed: {e}",
            a.len()
        ),
        (Err(e), Ok(b)) => panic!("{context}: compose failed ({e}), oracle found {}", b.len()),
    }
}

/// One randomized oracle-equivalence instance.
pub struct Instance {
    pub lexicon: Lexicon,
    pub derivation: DerivationNode,
    pub opts: ComposerOptions,
}

pub fn gen_instance(seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let n_sorts = rng.gen_range(2..=6);
    let sorts: Vec<String> = (0..n_sorts).map(|i| format!("S{i}")).collect();

    // Upward edges only, so the subsumption relation is acyclic.
    let mut edges = Vec::new();
    for i in 0..n_sorts {
        if i + 1 < n_sorts && rng.gen_bool(0.4) {
            let j = rng.gen_range(i + 1..n_sorts);
            edges.push(format!(
                r#"{{"sub": "S{i}", "super": "S{j}", "coercion": "co_{i}_{j}"}}"#
            ));
        }
    }
    let inventory_json = format!(
        r#"{{ "sorts": [{}], "subsumption": [{}], "derive_subsumption_coercions": {} }}"#,
        sorts
            .iter()
            .map(|s| format!(r#"{{"name": "{s}"}}"#))
            .collect::<Vec<_>>()
            .join(", "),
        edges.join(", "),
        rng.gen_bool(0.7)
    );
    let inventory = load_sort_inventory(&inventory_json).expect("generated inventory is valid");

    let pick_sort = |rng: &mut StdRng| sorts[rng.gen_range(0..n_sorts)].clone();

    let n_nouns = rng.gen_range(2..=4);
    let n_preds = rng.gen_range(2..=4);
    let mut entries = Vec::new();
    let mut nouns = Vec::new();
    let mut preds = Vec::new();
    for k in 0..n_nouns {
        let word = format!("n{k}");
        let sort = pick_sort(&mut rng);
        let n_mods = if rng.gen_bool(0.15) {
            rng.gen_range(5..=8)
        } else {
            rng.gen_range(0..=4)
        };
        let mods: Vec<String> = (0..n_mods)
            .map(|j| {
                let source = if rng.gen_bool(0.6) {
                    sort.clone()
                } else {
                    pick_sort(&mut rng)
                };
                let target = pick_sort(&mut rng);
                let rigid = rng.gen_bool(0.15);
                format!(
                    r#"{{"name": "m{k}_{j}", "term": "mc{k}_{j}", "source": "{source}", "target": "{target}", "rigid": {rigid}}}"#
                )
            })
            .collect();
        entries.push(format!(
            r#"{{"word": "{word}", "term": "{word}_c", "type": "{sort}", "modifiers": [{}]}}"#,
            mods.join(", ")
        ));
        nouns.push(word);
    }
    for k in 0..n_preds {
        let word = format!("p{k}");
        let s1 = pick_sort(&mut rng);
        let ty = if rng.gen_bool(0.3) {
            let s2 = pick_sort(&mut rng);
            format!("{s1} -> {s2} -> t")
        } else {
            format!("{s1} -> t")
        };
        entries.push(format!(
            r#"{{"word": "{word}", "term": "{word}_c", "type": "{ty}"}}"#
        ));
        preds.push(word);
    }
    let lexicon_json = format!(r#"{{ "entries": [{}] }}"#, entries.join(", "));
    let lexicon = load_lexicon(&lexicon_json, &inventory).expect("generated lexicon is valid");

    fn gen_tree(
        rng: &mut StdRng,
        nouns: &[String],
        preds: &[String],
        leaves_left: &mut usize,
        depth: usize,
    ) -> DerivationNode {
        let leaf = |rng: &mut StdRng, pool: &[String], leaves_left: &mut usize| {
            *leaves_left = leaves_left.saturating_sub(1);
            DerivationNode::leaf(pool[rng.gen_range(0..pool.len())].clone())
        };
        if depth == 0 || *leaves_left <= 1 {
            let pool = if rng.gen_bool(0.5) { nouns } else { preds };
            return leaf(rng, pool, leaves_left);
        }
        match rng.gen_range(0..10) {
            0..=2 => {
                // Coordination over a shared argument.
                *leaves_left = leaves_left.saturating_sub(3);
                let left = leaf(rng, preds, leaves_left);
                let right = leaf(rng, preds, leaves_left);
                let shared = if rng.gen_bool(0.8) || *leaves_left < 2 {
                    leaf(rng, nouns, leaves_left)
                } else {
                    gen_tree(rng, nouns, preds, leaves_left, depth - 1)
                };
                DerivationNode::coord("and", left, right, shared)
            }
            3..=7 => {
                *leaves_left = leaves_left.saturating_sub(1);
                let functor = if rng.gen_bool(0.8) {
                    leaf(rng, preds, leaves_left)
                } else {
                    gen_tree(rng, nouns, preds, leaves_left, depth - 1)
                };
                let argument = if rng.gen_bool(0.7) || *leaves_left == 0 {
                    leaf(rng, nouns, leaves_left)
                } else {
                    gen_tree(rng, nouns, preds, leaves_left, depth - 1)
                };
                DerivationNode::apply(functor, argument)
            }
            _ => {
                let pool = if rng.gen_bool(0.5) { nouns } else { preds };
                leaf(rng, pool, leaves_left)
            }
        }
    }

    let mut leaves_left = 8usize;
    let derivation = gen_tree(&mut rng, &nouns, &preds, &mut leaves_left, 3);

    let opts = ComposerOptions {
        max_chain: rng.gen_range(1..=3),
        max_readings: 100_000,
        all_readings: rng.gen_bool(0.5),
    };

    Instance {
        lexicon,
        derivation,
        opts,
    }
}
