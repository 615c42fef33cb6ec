//! Representation, type checking and normalization of second-order λ-terms
//! over a declared set of sorts.

mod check;
pub mod logical;
mod normalize;
mod term;
mod ty;

pub use check::{render_path, type_of, TermPath, TypeError, TypingContext};
pub use normalize::{beta_normalize, beta_normalize_budgeted, BudgetExhausted, DEFAULT_BUDGET};
pub use term::{alpha_equal, collect_signature, substitute, substitute_type, Term};
pub use ty::{fresh_name, is_identifier, well_formed_type, SortScope, Type};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Classifier tier, metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Generic,
    Common,
    Specialised,
    #[default]
    Domain,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tier::Generic => "generic",
            Tier::Common => "common",
            Tier::Specialised => "specialised",
            Tier::Domain => "domain",
        };
        write!(f, "{s}")
    }
}

/// A base sort, typically derived from a classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sort {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
    #[serde(default)]
    pub tier: Tier,
}

impl Sort {
    pub fn new(name: impl Into<String>, tier: Tier) -> Self {
        Sort {
            name: name.into(),
            gloss: None,
            tier,
        }
    }

    pub fn with_gloss(mut self, gloss: impl Into<String>) -> Self {
        self.gloss = Some(gloss.into());
        self
    }
}
