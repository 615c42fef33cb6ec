//! Exhaustive reference implementation of composition, for testing.
//!
//! Where `compose` searches chains goal-directed (by source/target types),
//! the oracle enumerates every composable modifier sequence at every slot,
//! assembles the candidate term optimistically, and keeps exactly those
//! candidates the kernel type checker accepts. Results are normalized,
//! deduplicated by α-equivalence and sorted like `compose`'s.

use crate::kernel::{beta_normalize, logical, type_of, Term, Type, TypingContext};
use crate::lexicon::{Lexicon, Modifier};

use super::{
    and_application, anomaly_for_apply, anomaly_for_coord, chain_fn, chain_steps, chain_wrap,
    finalize, rigidity_conflict, CoercionStep, ComposeError, ComposerOptions, DerivationNode,
    Reading, SearchCtx,
};

/// Every sequence of non-identity modifiers of length ≤ `max_chain` whose
/// adjacent source/target types compose, the empty sequence included. No
/// goal types are consulted; ill-fitting sequences are rejected later by the
/// kernel type check of the assembled term.
fn composable_sequences(available: &[Modifier], max_chain: usize) -> Vec<Vec<Modifier>> {
    let mods: Vec<&Modifier> = available.iter().filter(|m| !m.is_identity()).collect();
    let mut out: Vec<Vec<Modifier>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<Modifier>> = vec![Vec::new()];
    for _ in 0..max_chain {
        let mut next = Vec::new();
        for chain in &frontier {
            for m in &mods {
                let composes = chain
                    .last()
                    .map(|prev| prev.target.alpha_eq(&m.source))
                    .unwrap_or(true);
                if composes {
                    let mut extended = chain.clone();
                    extended.push((*m).clone());
                    out.push(extended.clone());
                    next.push(extended);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    out
}

/// A candidate reading carrying its raw (unnormalized) term.
struct Candidate {
    term: Term,
    ty: Type,
    trace: Vec<CoercionStep>,
    cost: usize,
}

fn well_typed(term: &Term, lexicon: &Lexicon) -> Option<Type> {
    type_of(term, &TypingContext::new(), lexicon.inventory()).ok()
}

fn enum_node(
    ctx: &SearchCtx<'_>,
    node: &DerivationNode,
    path: &mut Vec<usize>,
) -> Result<Vec<Candidate>, ComposeError> {
    match node {
        DerivationNode::Leaf(word) => {
            let entry = ctx
                .lexicon
                .lookup(word)
                .map_err(|_| ComposeError::UnknownWord {
                    word: word.clone(),
                    path: path.clone(),
                })?;
            Ok(vec![Candidate {
                term: entry.main_term.clone(),
                ty: entry.main_type.clone(),
                trace: Vec::new(),
                cost: 0,
            }])
        }
        DerivationNode::Apply { functor, argument } => {
            path.push(0);
            let functor_cs = enum_node(ctx, functor, path);
            path.pop();
            let functor_cs = functor_cs?;
            path.push(1);
            let arg_cs = enum_node(ctx, argument, path);
            path.pop();
            let arg_cs = arg_cs?;

            let available = ctx.available_for(argument);
            let sequences = composable_sequences(&available, ctx.opts.max_chain);
            let mut slot = path.clone();
            slot.push(1);

            let mut out = Vec::new();
            for fc in &functor_cs {
                for ac in &arg_cs {
                    for seq in &sequences {
                        let term = Term::app(fc.term.clone(), chain_wrap(&ac.term, seq));
                        let Some(ty) = well_typed(&term, ctx.lexicon) else {
                            continue;
                        };
                        let mut trace = fc.trace.clone();
                        trace.extend(ac.trace.iter().cloned());
                        trace.extend(chain_steps(seq, &slot));
                        out.push(Candidate {
                            term,
                            ty,
                            cost: fc.cost + ac.cost + seq.len(),
                            trace,
                        });
                    }
                }
            }
            if out.is_empty() {
                let functor_rs = to_readings(functor_cs);
                let arg_rs = to_readings(arg_cs);
                return Err(anomaly_for_apply(&functor_rs, &arg_rs, &available, path));
            }
            Ok(out)
        }
        DerivationNode::Coord {
            conj,
            left,
            right,
            shared,
        } => {
            if conj != logical::AND {
                return Err(ComposeError::UnsupportedConjunction { word: conj.clone() });
            }
            path.push(0);
            let left_cs = enum_node(ctx, left, path);
            path.pop();
            let left_cs = left_cs?;
            path.push(1);
            let right_cs = enum_node(ctx, right, path);
            path.pop();
            let right_cs = right_cs?;
            path.push(2);
            let shared_cs = enum_node(ctx, shared, path);
            path.pop();
            let shared_cs = shared_cs?;

            let available = ctx.available_for(shared);
            let sequences = composable_sequences(&available, ctx.opts.max_chain);
            let mut f_slot = path.clone();
            f_slot.push(2);
            let mut g_slot = path.clone();
            g_slot.push(3);

            let mut out = Vec::new();
            let mut rigid_reject: Option<String> = None;
            for lp in &left_cs {
                let Some((alpha, lcod)) = lp.ty.as_arrow() else {
                    continue;
                };
                if !lcod.alpha_eq(&Type::Prop) {
                    continue;
                }
                for rp in &right_cs {
                    let Some((beta, rcod)) = rp.ty.as_arrow() else {
                        continue;
                    };
                    if !rcod.alpha_eq(&Type::Prop) {
                        continue;
                    }
                    for sa in &shared_cs {
                        for f in &sequences {
                            for g in &sequences {
                                if let Some(offender) = rigidity_conflict(f, g) {
                                    // Only note rejections that would otherwise
                                    // have type-checked.
                                    let term = and_application(
                                        alpha,
                                        beta,
                                        &lp.term,
                                        &rp.term,
                                        &sa.ty,
                                        &sa.term,
                                        &chain_fn(&sa.ty, f),
                                        &chain_fn(&sa.ty, g),
                                    );
                                    if well_typed(&term, ctx.lexicon).is_some() {
                                        rigid_reject.get_or_insert(offender);
                                    }
                                    continue;
                                }
                                let term = and_application(
                                    alpha,
                                    beta,
                                    &lp.term,
                                    &rp.term,
                                    &sa.ty,
                                    &sa.term,
                                    &chain_fn(&sa.ty, f),
                                    &chain_fn(&sa.ty, g),
                                );
                                let Some(ty) = well_typed(&term, ctx.lexicon) else {
                                    continue;
                                };
                                let mut trace = lp.trace.clone();
                                trace.extend(rp.trace.iter().cloned());
                                trace.extend(sa.trace.iter().cloned());
                                trace.extend(chain_steps(f, &f_slot));
                                trace.extend(chain_steps(g, &g_slot));
                                out.push(Candidate {
                                    term,
                                    ty,
                                    cost: lp.cost + rp.cost + sa.cost + f.len() + g.len(),
                                    trace,
                                });
                            }
                        }
                    }
                }
            }
            if out.is_empty() {
                if let Some(modifier) = rigid_reject {
                    return Err(ComposeError::RigidityViolation { modifier });
                }
                let left_rs = to_readings(left_cs);
                let right_rs = to_readings(right_cs);
                let shared_rs = to_readings(shared_cs);
                return Err(anomaly_for_coord(
                    &left_rs,
                    &right_rs,
                    &shared_rs,
                    &available,
                    ctx.opts.max_chain,
                    path,
                ));
            }
            Ok(out)
        }
    }
}

fn to_readings(cs: Vec<Candidate>) -> Vec<Reading> {
    cs.into_iter()
        .map(|c| Reading {
            term: c.term,
            ty: c.ty,
            trace: c.trace,
            cost: c.cost,
        })
        .collect()
}

/// Exhaustively enumerates every modifier-chain assignment at every slot,
/// keeps the type-correct ones, normalizes, deduplicates by α-equivalence
/// and sorts exactly like [`super::compose`]. Intended for small instances
/// (≤ 8 leaves, ≤ 8 modifiers per entry, max_chain ≤ 3).
pub fn brute_force_oracle(
    root: &DerivationNode,
    lexicon: &Lexicon,
    opts: &ComposerOptions,
) -> Result<Vec<Reading>, ComposeError> {
    let ctx = SearchCtx::new(lexicon, opts);
    let candidates = enum_node(&ctx, root, &mut Vec::new())?;
    let readings = candidates
        .into_iter()
        .map(|c| Reading {
            term: beta_normalize(&c.term),
            ty: c.ty,
            trace: c.trace,
            cost: c.cost,
        })
        .collect();
    finalize(readings, opts)
}
