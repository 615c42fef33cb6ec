//! Many-sorted Montagovian semantic composition with lexical coercions.
//!
//! The crate type-checks second-order λ-terms over classifier-derived base
//! sorts, repairs type clashes by inserting lexically declared modifiers,
//! composes copredications through a polymorphic conjunction, and emits
//! normalized many-sorted logical formulas together with the coercion trace
//! that produced them.
//!
//! Module map:
//! - [`kernel`] — types, Church-style terms, type checking, β-normalization;
//! - [`syntax`] — concrete term/type syntax and bidirectional elaboration;
//! - [`lexicon`] — sort inventories and lexica (loading, validation, queries);
//! - [`composer`] — derivation trees to readings, coercion search, oracle;
//! - [`logic`] — canonical renaming, formula rendering, reading reports;
//! - [`cli`] — the `sorted-montague` command-line pipeline.

pub mod cli;
pub mod composer;
pub mod kernel;
pub mod lexicon;
pub mod logic;
pub mod syntax;

pub use composer::{
    brute_force_oracle, compose, coordinate, enumerate_coercions, parse_derivation, replay_trace,
    CoercionStep, ComposeError, ComposerOptions, DerivationNode, Reading,
};
pub use kernel::{
    alpha_equal, beta_normalize, substitute, type_of, well_formed_type, Sort, Term, Tier, Type,
    TypeError, TypingContext,
};
pub use lexicon::{
    load_lexicon, load_sort_inventory, validate_inventory, Finding, LexEntry, Lexicon,
    LexiconError, Modifier, SortInventory,
};
pub use logic::{
    canonicalize, parse_rendered, reading_report, render, render_reading, ReadingReport,
    RenderError, RenderStyle, RenderedReading,
};
