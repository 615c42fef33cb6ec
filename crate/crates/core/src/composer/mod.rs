//! Composition of binary derivation trees into typed logical forms.
//!
//! Type clashes are repaired by inserting modifiers from the argument's
//! lexical entry (plus derived subsumption coercions); copredication is
//! handled by instantiating the polymorphic conjunction. Every reading keeps
//! the trace of inserted modifiers and its cost (number of non-identity
//! steps).

mod oracle;

pub use oracle::brute_force_oracle;

use std::fmt;

use thiserror::Error;

use crate::kernel::{beta_normalize, logical, render_path, type_of, Term, Type, TypingContext};
use crate::lexicon::{Lexicon, Modifier};
use crate::logic::canonicalize;
use crate::syntax::SyntaxError;

/// A binary derivation tree, the input to composition.
///
/// Tree addresses: for `Apply`, the functor is child 0 and the argument
/// child 1. For `Coord`, the left predicate is 0, the right predicate 1 and
/// the shared argument 2; coercion steps repairing the shared argument for
/// the *right* conjunct are recorded at the virtual child 3 so the two
/// chains at the one slot stay distinguishable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivationNode {
    Leaf(String),
    Apply {
        functor: Box<DerivationNode>,
        argument: Box<DerivationNode>,
    },
    Coord {
        conj: String,
        left: Box<DerivationNode>,
        right: Box<DerivationNode>,
        shared: Box<DerivationNode>,
    },
}

impl DerivationNode {
    pub fn leaf(word: impl Into<String>) -> DerivationNode {
        DerivationNode::Leaf(word.into())
    }

    pub fn apply(functor: DerivationNode, argument: DerivationNode) -> DerivationNode {
        DerivationNode::Apply {
            functor: Box::new(functor),
            argument: Box::new(argument),
        }
    }

    pub fn coord(
        conj: impl Into<String>,
        left: DerivationNode,
        right: DerivationNode,
        shared: DerivationNode,
    ) -> DerivationNode {
        DerivationNode::Coord {
            conj: conj.into(),
            left: Box::new(left),
            right: Box::new(right),
            shared: Box::new(shared),
        }
    }
}

impl fmt::Display for DerivationNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationNode::Leaf(w) => write!(f, "{w}"),
            DerivationNode::Apply { functor, argument } => {
                write!(f, "(app {functor} {argument})")
            }
            DerivationNode::Coord {
                conj,
                left,
                right,
                shared,
            } => write!(f, "(coord {conj} {left} {right} {shared})"),
        }
    }
}

/// Parses one derivation: `(app F A)`, `(coord and P Q A)`, or a bare word.
pub fn parse_derivation(src: &str) -> Result<DerivationNode, SyntaxError> {
    #[derive(Debug, PartialEq)]
    enum Tok {
        Open,
        Close,
        Atom(String),
    }
    let mut tokens = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                tokens.push((i, Tok::Open));
                i += 1;
            }
            b')' => {
                tokens.push((i, Tok::Close));
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !matches!(bytes[i], b' ' | b'\t' | b'\r' | b'\n' | b'(' | b')')
                {
                    i += 1;
                }
                tokens.push((start, Tok::Atom(src[start..i].to_string())));
            }
        }
    }

    fn node(
        tokens: &[(usize, Tok)],
        pos: &mut usize,
        len: usize,
    ) -> Result<DerivationNode, SyntaxError> {
        let err = |pos: usize, message: &str| SyntaxError {
            pos,
            message: message.to_string(),
        };
        let here = tokens.get(*pos).map(|(p, _)| *p).unwrap_or(len);
        match tokens.get(*pos) {
            Some((_, Tok::Atom(w))) => {
                *pos += 1;
                Ok(DerivationNode::leaf(w.clone()))
            }
            Some((_, Tok::Open)) => {
                *pos += 1;
                let head = match tokens.get(*pos) {
                    Some((_, Tok::Atom(h))) => h.clone(),
                    _ => return Err(err(here, "expected 'app' or 'coord' after '('")),
                };
                *pos += 1;
                let out = match head.as_str() {
                    "app" => {
                        let functor = node(tokens, pos, len)?;
                        let argument = node(tokens, pos, len)?;
                        DerivationNode::apply(functor, argument)
                    }
                    "coord" => {
                        let conj = match tokens.get(*pos) {
                            Some((_, Tok::Atom(c))) => c.clone(),
                            _ => return Err(err(here, "expected a conjunction word")),
                        };
                        *pos += 1;
                        let left = node(tokens, pos, len)?;
                        let right = node(tokens, pos, len)?;
                        let shared = node(tokens, pos, len)?;
                        DerivationNode::coord(conj, left, right, shared)
                    }
                    other => return Err(err(here, &format!("unknown node kind {other:?}"))),
                };
                match tokens.get(*pos) {
                    Some((_, Tok::Close)) => {
                        *pos += 1;
                        Ok(out)
                    }
                    _ => Err(err(here, "expected ')'")),
                }
            }
            _ => Err(err(here, "expected a derivation node")),
        }
    }

    let mut pos = 0;
    let out = node(&tokens, &mut pos, src.len())?;
    if pos != tokens.len() {
        return Err(SyntaxError {
            pos: tokens[pos].0,
            message: "trailing input after derivation".into(),
        });
    }
    Ok(out)
}

/// One modifier insertion: which modifier, at which tree address, shifting
/// which type to which.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoercionStep {
    pub modifier: String,
    pub at_path: Vec<usize>,
    pub source: Type,
    pub target: Type,
}

impl CoercionStep {
    /// Stable rendering, also the lexicographic ordering key for traces.
    pub fn render(&self) -> String {
        format!(
            "{}:{}:{} -> {}",
            render_path(&self.at_path),
            self.modifier,
            self.source,
            self.target
        )
    }
}

impl fmt::Display for CoercionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// A normalized logical form with the coercions that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    pub term: Term,
    pub ty: Type,
    pub trace: Vec<CoercionStep>,
    pub cost: usize,
}

impl Reading {
    pub fn trace_key(&self) -> String {
        self.trace
            .iter()
            .map(CoercionStep::render)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposerOptions {
    /// Maximum modifiers composed per slot (at least 1).
    pub max_chain: usize,
    /// Maximum readings returned before `AmbiguityOverflow`.
    pub max_readings: usize,
    /// Return all readings instead of the minimal-cost ones only.
    pub all_readings: bool,
}

impl Default for ComposerOptions {
    fn default() -> Self {
        ComposerOptions {
            max_chain: 2,
            max_readings: 16,
            all_readings: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("unknown word {word:?} at {}", render_path(path))]
    UnknownWord { word: String, path: Vec<usize> },
    #[error(
        "semantic anomaly at {}: expected {expected}, actual {actual}; tried [{}]",
        render_path(path),
        tried.join(", ")
    )]
    SemanticAnomaly {
        expected: Type,
        actual: Type,
        path: Vec<usize>,
        tried: Vec<String>,
    },
    #[error("ambiguity overflow: {count} readings")]
    AmbiguityOverflow { count: usize },
    #[error("rigidity violation: modifier {modifier}")]
    RigidityViolation { modifier: String },
    #[error("unsupported conjunction {word:?}")]
    UnsupportedConjunction { word: String },
    #[error("invalid trace address {}", render_path(path))]
    InvalidTraceAddress { path: Vec<usize> },
    #[error("modifier {name} not available at {}", render_path(path))]
    ModifierNotAvailable { name: String, path: Vec<usize> },
}

/// All repair chains of length ≤ `max_chain` from `actual` to `expected`,
/// built from the non-identity modifiers of `available`, ordered by
/// (length, lexicographic modifier names). The empty chain is returned iff
/// `actual` already equals `expected`.
pub fn enumerate_coercions(
    actual: &Type,
    expected: &Type,
    available: &[Modifier],
    max_chain: usize,
) -> Vec<Vec<Modifier>> {
    let mut mods: Vec<&Modifier> = available.iter().filter(|m| !m.is_identity()).collect();
    mods.sort_by(|a, b| a.name.cmp(&b.name));

    let mut out: Vec<Vec<Modifier>> = Vec::new();
    if actual.alpha_eq(expected) {
        out.push(Vec::new());
    }
    // Breadth-first over chain length keeps the output ordered.
    let mut frontier: Vec<(Vec<Modifier>, Type)> = vec![(Vec::new(), actual.clone())];
    for _ in 0..max_chain {
        let mut next = Vec::new();
        for (chain, cur) in &frontier {
            for m in &mods {
                if m.source.alpha_eq(cur) {
                    let mut extended = chain.clone();
                    extended.push((*m).clone());
                    if m.target.alpha_eq(expected) {
                        out.push(extended.clone());
                    }
                    next.push((extended, m.target.clone()));
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

pub(crate) struct SearchCtx<'a> {
    pub lexicon: &'a Lexicon,
    pub derived: Vec<Modifier>,
    pub opts: ComposerOptions,
}

impl<'a> SearchCtx<'a> {
    pub fn new(lexicon: &'a Lexicon, opts: &ComposerOptions) -> Self {
        let derived = if lexicon.inventory().derive_subsumption_coercions {
            lexicon.inventory().coercion_constants()
        } else {
            Vec::new()
        };
        SearchCtx {
            lexicon,
            derived,
            opts: opts.clone(),
        }
    }

    /// The modifier set governing a tree address: the entry's modifiers for
    /// a leaf (which include the implicit identity), the derived coercion
    /// set alone for a complex argument.
    pub fn available_for(&self, node: &DerivationNode) -> Vec<Modifier> {
        let mut out = match node {
            DerivationNode::Leaf(word) => self
                .lexicon
                .lookup(word)
                .map(|e| e.modifiers.clone())
                .unwrap_or_default(),
            _ => Vec::new(),
        };
        out.extend(self.derived.iter().cloned());
        out
    }
}

fn child_path(path: &[usize], child: usize) -> Vec<usize> {
    let mut p = path.to_vec();
    p.push(child);
    p
}

pub(crate) fn chain_steps(chain: &[Modifier], at: &[usize]) -> Vec<CoercionStep> {
    chain
        .iter()
        .map(|m| CoercionStep {
            modifier: m.name.clone(),
            at_path: at.to_vec(),
            source: m.source.clone(),
            target: m.target.clone(),
        })
        .collect()
}

/// Wraps an argument term in a chain: `m_k (... (m_1 arg))`.
pub(crate) fn chain_wrap(arg: &Term, chain: &[Modifier]) -> Term {
    chain
        .iter()
        .fold(arg.clone(), |acc, m| Term::app(m.term.clone(), acc))
}

/// A chain as a function term of type `source -> target`: the identity
/// abstraction for the empty chain, the bare modifier term for a singleton,
/// an explicit composition otherwise.
pub(crate) fn chain_fn(source: &Type, chain: &[Modifier]) -> Term {
    match chain {
        [] => Term::abs("x", source.clone(), Term::var("x")),
        [m] => m.term.clone(),
        _ => {
            let body = chain_wrap(&Term::var("x"), chain);
            Term::abs("x", chain[0].source.clone(), body)
        }
    }
}

/// Both chains of a coordination must agree whenever either contains a rigid
/// modifier.
pub(crate) fn rigidity_conflict(f: &[Modifier], g: &[Modifier]) -> Option<String> {
    let has_rigid = |c: &[Modifier]| c.iter().find(|m| m.rigid).map(|m| m.name.clone());
    let offender = has_rigid(f).or_else(|| has_rigid(g))?;
    let fnames: Vec<&str> = f.iter().map(|m| m.name.as_str()).collect();
    let gnames: Vec<&str> = g.iter().map(|m| m.name.as_str()).collect();
    if fnames == gnames {
        None
    } else {
        Some(offender)
    }
}

/// Builds the fully applied polymorphic conjunction
/// `AND [α] [β] P Q [ξ] x f g` (unreduced).
#[allow(clippy::too_many_arguments)]
pub(crate) fn and_application(
    alpha: &Type,
    beta: &Type,
    left: &Term,
    right: &Term,
    xi: &Type,
    arg: &Term,
    f: &Term,
    g: &Term,
) -> Term {
    Term::apps(
        Term::tyapp(
            Term::apps(
                Term::tyapp(
                    Term::tyapp(logical::polymorphic_and(), alpha.clone()),
                    beta.clone(),
                ),
                [left.clone(), right.clone()],
            ),
            xi.clone(),
        ),
        [arg.clone(), f.clone(), g.clone()],
    )
}

pub(crate) fn sorted_modifier_names(available: &[Modifier]) -> Vec<String> {
    let mut names: Vec<String> = available
        .iter()
        .filter(|m| !m.is_identity())
        .map(|m| m.name.clone())
        .collect();
    names.sort();
    names.dedup();
    names
}

pub(crate) fn anomaly_for_apply(
    functor_rs: &[Reading],
    arg_rs: &[Reading],
    available: &[Modifier],
    path: &[usize],
) -> ComposeError {
    match functor_rs.iter().find(|r| r.ty.as_arrow().is_some()) {
        None => ComposeError::SemanticAnomaly {
            expected: Type::arrow(Type::var("a"), Type::var("b")),
            actual: functor_rs[0].ty.clone(),
            path: child_path(path, 0),
            tried: Vec::new(),
        },
        Some(fr) => {
            let (dom, _) = fr.ty.as_arrow().unwrap();
            ComposeError::SemanticAnomaly {
                expected: dom.clone(),
                actual: arg_rs[0].ty.clone(),
                path: child_path(path, 1),
                tried: sorted_modifier_names(available),
            }
        }
    }
}

fn is_predicate(ty: &Type) -> Option<&Type> {
    match ty.as_arrow() {
        Some((dom, cod)) if cod.alpha_eq(&Type::Prop) => Some(dom),
        _ => None,
    }
}

pub(crate) fn anomaly_for_coord(
    left_rs: &[Reading],
    right_rs: &[Reading],
    shared_rs: &[Reading],
    available: &[Modifier],
    max_chain: usize,
    path: &[usize],
) -> ComposeError {
    let xi = shared_rs[0].ty.clone();
    let left_dom = left_rs.iter().find_map(|r| is_predicate(&r.ty));
    let right_dom = right_rs.iter().find_map(|r| is_predicate(&r.ty));
    match (left_dom, right_dom) {
        (None, _) => ComposeError::SemanticAnomaly {
            expected: Type::arrow(xi, Type::Prop),
            actual: left_rs[0].ty.clone(),
            path: child_path(path, 0),
            tried: Vec::new(),
        },
        (_, None) => ComposeError::SemanticAnomaly {
            expected: Type::arrow(xi, Type::Prop),
            actual: right_rs[0].ty.clone(),
            path: child_path(path, 1),
            tried: Vec::new(),
        },
        (Some(alpha), Some(beta)) => {
            let f_possible = !enumerate_coercions(&xi, alpha, available, max_chain).is_empty();
            let (expected, child) = if f_possible {
                (beta.clone(), 3)
            } else {
                (alpha.clone(), 2)
            };
            ComposeError::SemanticAnomaly {
                expected,
                actual: xi,
                path: child_path(path, child),
                tried: sorted_modifier_names(available),
            }
        }
    }
}

fn leaf_reading(ctx: &SearchCtx<'_>, word: &str, path: &[usize]) -> Result<Reading, ComposeError> {
    let entry = ctx
        .lexicon
        .lookup(word)
        .map_err(|_| ComposeError::UnknownWord {
            word: word.to_string(),
            path: path.to_vec(),
        })?;
    Ok(Reading {
        term: beta_normalize(&entry.main_term),
        ty: entry.main_type.clone(),
        trace: Vec::new(),
        cost: 0,
    })
}

fn node_readings(
    ctx: &SearchCtx<'_>,
    node: &DerivationNode,
    path: &mut Vec<usize>,
) -> Result<Vec<Reading>, ComposeError> {
    match node {
        DerivationNode::Leaf(word) => Ok(vec![leaf_reading(ctx, word, path)?]),
        DerivationNode::Apply { functor, argument } => {
            path.push(0);
            let functor_rs = node_readings(ctx, functor, path);
            path.pop();
            let functor_rs = functor_rs?;
            path.push(1);
            let arg_rs = node_readings(ctx, argument, path);
            path.pop();
            let arg_rs = arg_rs?;

            let available = ctx.available_for(argument);
            let slot = child_path(path, 1);
            let mut out = Vec::new();
            for fr in &functor_rs {
                let Some((dom, cod)) = fr.ty.as_arrow() else {
                    continue;
                };
                for ar in &arg_rs {
                    for chain in enumerate_coercions(&ar.ty, dom, &available, ctx.opts.max_chain) {
                        let term = beta_normalize(&Term::app(
                            fr.term.clone(),
                            chain_wrap(&ar.term, &chain),
                        ));
                        let mut trace = fr.trace.clone();
                        trace.extend(ar.trace.iter().cloned());
                        trace.extend(chain_steps(&chain, &slot));
                        out.push(Reading {
                            term,
                            ty: cod.clone(),
                            cost: fr.cost + ar.cost + chain.len(),
                            trace,
                        });
                    }
                }
            }
            if out.is_empty() {
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
            let left_rs = node_readings(ctx, left, path);
            path.pop();
            let left_rs = left_rs?;
            path.push(1);
            let right_rs = node_readings(ctx, right, path);
            path.pop();
            let right_rs = right_rs?;
            path.push(2);
            let shared_rs = node_readings(ctx, shared, path);
            path.pop();
            let shared_rs = shared_rs?;
            let available = ctx.available_for(shared);
            coordinate_readings(ctx, &left_rs, &right_rs, &shared_rs, &available, path)
        }
    }
}

/// The shared-argument copredication combinator: instantiate the polymorphic
/// conjunction at the two predicate domains, apply both predicates, then
/// search the shared argument's modifiers for the two repair chains.
pub(crate) fn coordinate_readings(
    ctx: &SearchCtx<'_>,
    left_rs: &[Reading],
    right_rs: &[Reading],
    shared_rs: &[Reading],
    available: &[Modifier],
    path: &[usize],
) -> Result<Vec<Reading>, ComposeError> {
    let f_slot = child_path(path, 2);
    let g_slot = child_path(path, 3);
    let mut out = Vec::new();
    let mut rigid_reject: Option<String> = None;
    for lp in left_rs {
        let Some(alpha) = is_predicate(&lp.ty) else {
            continue;
        };
        for rp in right_rs {
            let Some(beta) = is_predicate(&rp.ty) else {
                continue;
            };
            for sa in shared_rs {
                let fchains = enumerate_coercions(&sa.ty, alpha, available, ctx.opts.max_chain);
                let gchains = enumerate_coercions(&sa.ty, beta, available, ctx.opts.max_chain);
                for f in &fchains {
                    for g in &gchains {
                        if let Some(offender) = rigidity_conflict(f, g) {
                            rigid_reject.get_or_insert(offender);
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
                        let mut trace = lp.trace.clone();
                        trace.extend(rp.trace.iter().cloned());
                        trace.extend(sa.trace.iter().cloned());
                        trace.extend(chain_steps(f, &f_slot));
                        trace.extend(chain_steps(g, &g_slot));
                        out.push(Reading {
                            term: beta_normalize(&term),
                            ty: Type::Prop,
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
        return Err(anomaly_for_coord(
            left_rs,
            right_rs,
            shared_rs,
            available,
            ctx.opts.max_chain,
            path,
        ));
    }
    Ok(out)
}

/// Sorts by (cost, trace rendering), drops α-duplicates keeping the first,
/// keeps only minimal-cost readings unless `all_readings`, and enforces
/// `max_readings`.
pub(crate) fn finalize(
    mut readings: Vec<Reading>,
    opts: &ComposerOptions,
) -> Result<Vec<Reading>, ComposeError> {
    readings.sort_by_cached_key(|r| (r.cost, r.trace_key()));
    let mut seen: Vec<Term> = Vec::new();
    let mut kept = Vec::new();
    for reading in readings {
        let canon = canonicalize(&reading.term);
        if seen.contains(&canon) {
            continue;
        }
        seen.push(canon);
        kept.push(reading);
    }
    if !opts.all_readings {
        if let Some(min) = kept.first().map(|r| r.cost) {
            kept.retain(|r| r.cost == min);
        }
    }
    if kept.len() > opts.max_readings {
        return Err(ComposeError::AmbiguityOverflow { count: kept.len() });
    }
    Ok(kept)
}

/// Composes a derivation tree into its readings: sorted by
/// (cost, lexicographic trace rendering), β-normal, well-typed and
/// deterministic. With `all_readings` off only minimal-cost readings are
/// returned.
pub fn compose(
    root: &DerivationNode,
    lexicon: &Lexicon,
    opts: &ComposerOptions,
) -> Result<Vec<Reading>, ComposeError> {
    let ctx = SearchCtx::new(lexicon, opts);
    let readings = node_readings(&ctx, root, &mut Vec::new())?;
    finalize(readings, opts)
}

/// Coordinates two predicate reading sets over a shared argument reading
/// set, as if the coordination were the derivation root. `shared_modifiers`
/// is the shared argument's lexical modifier set; the implicit identity and
/// any derived subsumption coercions are added here.
pub fn coordinate(
    conj_word: &str,
    left: &[Reading],
    right: &[Reading],
    shared: &[Reading],
    shared_modifiers: &[Modifier],
    lexicon: &Lexicon,
    opts: &ComposerOptions,
) -> Result<Vec<Reading>, ComposeError> {
    if conj_word != logical::AND {
        return Err(ComposeError::UnsupportedConjunction {
            word: conj_word.to_string(),
        });
    }
    if left.is_empty() || right.is_empty() || shared.is_empty() {
        return Err(ComposeError::SemanticAnomaly {
            expected: Type::arrow(Type::var("a"), Type::Prop),
            actual: Type::var("a"),
            path: Vec::new(),
            tried: Vec::new(),
        });
    }
    let ctx = SearchCtx::new(lexicon, opts);
    let mut available = shared_modifiers.to_vec();
    available.extend(ctx.derived.iter().cloned());
    if !available.iter().any(|m| m.is_identity()) {
        let xi = shared[0].ty.clone();
        available.push(Modifier {
            name: crate::lexicon::IDENTITY_MODIFIER.to_string(),
            term: Term::abs("x", xi.clone(), Term::var("x")),
            source: xi.clone(),
            target: xi,
            rigid: false,
        });
    }
    let readings = coordinate_readings(&ctx, left, right, shared, &available, &[])?;
    finalize(readings, opts)
}

/// Rebuilds a reading's normal-form term from its derivation and trace.
pub fn replay_trace(
    root: &DerivationNode,
    lexicon: &Lexicon,
    trace: &[CoercionStep],
) -> Result<Term, ComposeError> {
    let opts = ComposerOptions {
        max_chain: usize::MAX,
        ..ComposerOptions::default()
    };
    let ctx = SearchCtx::new(lexicon, &opts);
    let mut used = vec![false; trace.len()];

    fn chain_at(
        ctx: &SearchCtx<'_>,
        node: &DerivationNode,
        slot: &[usize],
        trace: &[CoercionStep],
        used: &mut [bool],
    ) -> Result<Vec<Modifier>, ComposeError> {
        let available = ctx.available_for(node);
        let mut chain = Vec::new();
        for (i, step) in trace.iter().enumerate() {
            if step.at_path != slot {
                continue;
            }
            used[i] = true;
            let modifier = available
                .iter()
                .find(|m| {
                    m.name == step.modifier
                        && m.source.alpha_eq(&step.source)
                        && m.target.alpha_eq(&step.target)
                })
                .ok_or_else(|| ComposeError::ModifierNotAvailable {
                    name: step.modifier.clone(),
                    path: slot.to_vec(),
                })?;
            chain.push(modifier.clone());
        }
        Ok(chain)
    }

    fn rebuild(
        ctx: &SearchCtx<'_>,
        node: &DerivationNode,
        path: &mut Vec<usize>,
        trace: &[CoercionStep],
        used: &mut [bool],
    ) -> Result<Term, ComposeError> {
        match node {
            DerivationNode::Leaf(word) => Ok(ctx
                .lexicon
                .lookup(word)
                .map_err(|_| ComposeError::UnknownWord {
                    word: word.clone(),
                    path: path.clone(),
                })?
                .main_term
                .clone()),
            DerivationNode::Apply { functor, argument } => {
                path.push(0);
                let f = rebuild(ctx, functor, path, trace, used);
                path.pop();
                let f = f?;
                path.push(1);
                let a = rebuild(ctx, argument, path, trace, used);
                path.pop();
                let a = a?;
                let slot = child_path(path, 1);
                let chain = chain_at(ctx, argument, &slot, trace, used)?;
                Ok(Term::app(f, chain_wrap(&a, &chain)))
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
                let p = rebuild(ctx, left, path, trace, used);
                path.pop();
                let p = p?;
                path.push(1);
                let q = rebuild(ctx, right, path, trace, used);
                path.pop();
                let q = q?;
                path.push(2);
                let x = rebuild(ctx, shared, path, trace, used);
                path.pop();
                let x = x?;

                let scope = ctx.lexicon.inventory();
                let ectx = TypingContext::new();
                let invalid = |path: &[usize]| ComposeError::InvalidTraceAddress {
                    path: path.to_vec(),
                };
                let p_ty = type_of(&p, &ectx, scope).map_err(|_| invalid(path))?;
                let q_ty = type_of(&q, &ectx, scope).map_err(|_| invalid(path))?;
                let xi = type_of(&x, &ectx, scope).map_err(|_| invalid(path))?;
                let alpha = is_predicate(&p_ty).ok_or_else(|| invalid(path))?;
                let beta = is_predicate(&q_ty).ok_or_else(|| invalid(path))?;

                let f_chain = chain_at(ctx, shared, &child_path(path, 2), trace, used)?;
                let g_chain = chain_at(ctx, shared, &child_path(path, 3), trace, used)?;
                Ok(and_application(
                    alpha,
                    beta,
                    &p,
                    &q,
                    &xi,
                    &x,
                    &chain_fn(&xi, &f_chain),
                    &chain_fn(&xi, &g_chain),
                ))
            }
        }
    }

    let raw = rebuild(&ctx, root, &mut Vec::new(), trace, &mut used)?;
    if let Some(first_unused) = used.iter().position(|u| !u) {
        return Err(ComposeError::InvalidTraceAddress {
            path: trace[first_unused].at_path.clone(),
        });
    }
    // A trace that assembles an ill-typed term is not a valid trace.
    type_of(&raw, &TypingContext::new(), lexicon.inventory())
        .map_err(|_| ComposeError::InvalidTraceAddress { path: Vec::new() })?;
    Ok(beta_normalize(&raw))
}
