//! Sort inventories (classifier-derived ontologies) and lexica
//! (word → main term + modifier set): loading, validation and queries.
//!
//! Both resources are UTF-8 JSON documents; see the crate README for the
//! schemas. Types and terms inside a lexicon use the concrete syntax of
//! [`crate::syntax`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{is_identifier, logical, type_of, Sort, SortScope, Term, Type, TypingContext};
use crate::syntax::{elaborate_term, parse_type, ConstSig, ElabError};

/// Name of the implicit identity modifier every entry carries.
pub const IDENTITY_MODIFIER: &str = "Id";

/// Reserved words of the type syntax; sorts may not use them as names.
const RESERVED_TYPE_NAMES: &[&str] = &["t", "forall", "lam", "Lam"];

/// A subsumption edge `hyponym ⊑ hyperonym` inducing a coercion constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsumptionEdge {
    #[serde(rename = "sub")]
    pub hyponym: String,
    #[serde(rename = "super")]
    pub hyperonym: String,
    #[serde(rename = "coercion")]
    pub coercion_name: String,
}

/// A classifier-derived base-sort ontology.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SortInventory {
    pub sorts: Vec<Sort>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsumption: Vec<SubsumptionEdge>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub noun_classifiers: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub derive_subsumption_coercions: bool,
}

impl SortScope for SortInventory {
    fn has_sort(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s.name == name)
    }
}

impl SortInventory {
    pub fn sort(&self, name: &str) -> Option<&Sort> {
        self.sorts.iter().find(|s| s.name == name)
    }

    /// One coercion modifier per subsumption edge: a fresh constant of type
    /// `hyponym -> hyperonym`, non-rigid. No transitive closure is
    /// materialized; chains are found by the composer's search.
    pub fn coercion_constants(&self) -> Vec<Modifier> {
        self.subsumption
            .iter()
            .map(|edge| {
                let source = Type::sort(&edge.hyponym);
                let target = Type::sort(&edge.hyperonym);
                Modifier {
                    name: edge.coercion_name.clone(),
                    term: Term::constant(
                        &edge.coercion_name,
                        Type::arrow(source.clone(), target.clone()),
                    ),
                    source,
                    target,
                    rigid: false,
                }
            })
            .collect()
    }

    /// The declared classifier sorts for `noun`, in declaration order;
    /// empty if the noun is unlisted.
    pub fn classifiers_of(&self, noun: &str) -> Vec<String> {
        self.noun_classifiers.get(noun).cloned().unwrap_or_default()
    }

    /// Sorts ordered so that every hyponym precedes its hyperonyms, ties
    /// broken by declaration order.
    pub fn topologically_sorted(&self) -> Vec<&Sort> {
        let index: BTreeMap<&str, usize> = self
            .sorts
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();
        let mut incoming: Vec<usize> = vec![0; self.sorts.len()];
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); self.sorts.len()];
        for edge in &self.subsumption {
            if let (Some(&sub), Some(&sup)) = (
                index.get(edge.hyponym.as_str()),
                index.get(edge.hyperonym.as_str()),
            ) {
                incoming[sup] += 1;
                outgoing[sub].push(sup);
            }
        }
        let mut done = vec![false; self.sorts.len()];
        let mut out = Vec::with_capacity(self.sorts.len());
        while out.len() < self.sorts.len() {
            let next = (0..self.sorts.len()).find(|&i| !done[i] && incoming[i] == 0);
            let i = match next {
                Some(i) => i,
                // Leftover cycle; fall back to declaration order.
                None => (0..self.sorts.len()).find(|&i| !done[i]).unwrap(),
            };
            done[i] = true;
            for &j in &outgoing[i] {
                incoming[j] = incoming[j].saturating_sub(1);
            }
            out.push(&self.sorts[i]);
        }
        out
    }
}

/// A lexically attached coercion function.
#[derive(Debug, Clone, PartialEq)]
pub struct Modifier {
    pub name: String,
    pub term: Term,
    pub source: Type,
    pub target: Type,
    pub rigid: bool,
}

impl Modifier {
    /// True if applying this modifier is a no-op: its term is the literal
    /// identity abstraction. Identity modifiers never occur in coercion
    /// chains; the empty chain plays that role.
    pub fn is_identity(&self) -> bool {
        match &self.term {
            Term::Abs(x, ty, body) => {
                matches!(body.as_ref(), Term::Var(v) if v == x) && ty.alpha_eq(&self.source)
            }
            _ => false,
        }
    }

    fn identity_on(ty: &Type) -> Modifier {
        Modifier {
            name: IDENTITY_MODIFIER.to_string(),
            term: Term::abs("x", ty.clone(), Term::var("x")),
            source: ty.clone(),
            target: ty.clone(),
            rigid: false,
        }
    }
}

/// A lexical entry: one main term plus its modifier set. The modifier list
/// always starts with the implicit identity on the entry's main type.
#[derive(Debug, Clone, PartialEq)]
pub struct LexEntry {
    pub word: String,
    pub main_term: Term,
    pub main_type: Type,
    pub modifiers: Vec<Modifier>,
}

/// A validated lexicon over a validated inventory.
#[derive(Debug, Clone)]
pub struct Lexicon {
    inventory: SortInventory,
    entries: BTreeMap<String, LexEntry>,
    order: Vec<String>,
}

impl Lexicon {
    pub fn inventory(&self) -> &SortInventory {
        &self.inventory
    }

    /// Case-sensitive, token-exact lookup.
    pub fn lookup(&self, word: &str) -> Result<&LexEntry, LexiconError> {
        self.entries
            .get(word)
            .ok_or_else(|| LexiconError::UnknownWord(word.to_string()))
    }

    /// Entries in document order.
    pub fn entries(&self) -> impl Iterator<Item = &LexEntry> {
        self.order.iter().map(|w| &self.entries[w])
    }

    /// The document this lexicon serializes to. The injected identity
    /// modifier is left implicit.
    pub fn to_document(&self) -> LexiconDocument {
        LexiconDocument {
            entries: self
                .entries()
                .map(|e| EntryDocument {
                    word: e.word.clone(),
                    term: e.main_term.to_string(),
                    type_: e.main_type.to_string(),
                    modifiers: e
                        .modifiers
                        .iter()
                        .filter(|m| !(m.name == IDENTITY_MODIFIER && m.is_identity()))
                        .map(|m| ModifierDocument {
                            name: m.name.clone(),
                            term: m.term.to_string(),
                            source: m.source.to_string(),
                            target: m.target.to_string(),
                            rigid: m.rigid,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconDocument {
    pub entries: Vec<EntryDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDocument {
    pub word: String,
    pub term: String,
    #[serde(rename = "type")]
    pub type_: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modifiers: Vec<ModifierDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModifierDocument {
    pub name: String,
    pub term: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rigid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate sort {0}")]
    DuplicateSort(String),
    #[error("unknown sort {0} in subsumption edge")]
    UnknownSortInEdge(String),
    #[error("subsumption cycle: {}", render_cycle(.0))]
    SubsumptionCycle(Vec<String>),
    #[error("invalid inventory: {0}")]
    InvalidInventory(String),
    #[error("entry {word}: {detail}")]
    TypeErrorInEntry { word: String, detail: String },
    #[error("entry {word}, modifier {modifier}: declared {declared} but term has type {computed}")]
    ModifierTypeMismatch {
        word: String,
        modifier: String,
        declared: Type,
        computed: Type,
    },
    #[error("reserved name {0} cannot be declared by a lexicon")]
    ReservedName(String),
    #[error("unknown word {0}")]
    UnknownWord(String),
}

fn render_cycle(path: &[String]) -> String {
    path.join(" \u{2291} ") // ⊑
}

/// Kinds of validation findings, in report order within one element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FindingKind {
    InvalidSortName,
    ReservedSortName,
    DuplicateSort,
    UnknownSortInEdge,
    InvalidCoercionName,
    DuplicateCoercion,
    UnknownSortInClassifiers,
    SubsumptionCycle,
    ReservedWord,
    DuplicateWord,
    DuplicateModifier,
    CoercionNameCollision,
    ModifierTypeMismatch,
    TypeErrorInEntry,
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FindingKind::InvalidSortName => "invalid sort name",
            FindingKind::ReservedSortName => "reserved sort name",
            FindingKind::DuplicateSort => "duplicate sort",
            FindingKind::UnknownSortInEdge => "unknown sort in edge",
            FindingKind::InvalidCoercionName => "invalid coercion name",
            FindingKind::DuplicateCoercion => "duplicate coercion name",
            FindingKind::UnknownSortInClassifiers => "unknown sort in noun classifiers",
            FindingKind::SubsumptionCycle => "subsumption cycle",
            FindingKind::ReservedWord => "reserved word",
            FindingKind::DuplicateWord => "duplicate word",
            FindingKind::DuplicateModifier => "duplicate modifier",
            FindingKind::CoercionNameCollision => "modifier name collides with a derived coercion",
            FindingKind::ModifierTypeMismatch => "modifier type mismatch",
            FindingKind::TypeErrorInEntry => "type error in entry",
        };
        write!(f, "{s}")
    }
}

/// One violated invariant. Findings are produced in deterministic order:
/// by document element, then by kind, then by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    /// Document location, e.g. `sorts[2]` or `entries[1].modifiers[0]`.
    pub location: String,
    pub kind: FindingKind,
    pub name: String,
    pub message: String,
    /// Full cycle path for `SubsumptionCycle` findings, empty otherwise.
    pub cycle: Vec<String>,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.location, self.kind, self.message)
    }
}

fn finding(location: String, kind: FindingKind, name: &str, message: String) -> Finding {
    Finding {
        location,
        kind,
        name: name.to_string(),
        message,
        cycle: Vec::new(),
    }
}

/// Reports every violated inventory invariant. An empty report means the
/// inventory is valid.
pub fn validate_inventory(inv: &SortInventory) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, sort) in inv.sorts.iter().enumerate() {
        let loc = format!("sorts[{i}]");
        if !is_identifier(&sort.name) {
            out.push(finding(
                loc.clone(),
                FindingKind::InvalidSortName,
                &sort.name,
                format!("sort name {:?} is not an identifier", sort.name),
            ));
        }
        if RESERVED_TYPE_NAMES.contains(&sort.name.as_str()) {
            out.push(finding(
                loc.clone(),
                FindingKind::ReservedSortName,
                &sort.name,
                format!("sort name {:?} is reserved by the type syntax", sort.name),
            ));
        }
        if !seen.insert(sort.name.clone()) {
            out.push(finding(
                loc,
                FindingKind::DuplicateSort,
                &sort.name,
                format!("sort {} is declared more than once", sort.name),
            ));
        }
    }
    let mut coercions = BTreeSet::new();
    for (i, edge) in inv.subsumption.iter().enumerate() {
        let loc = format!("subsumption[{i}]");
        for endpoint in [&edge.hyponym, &edge.hyperonym] {
            if !inv.has_sort(endpoint) {
                out.push(finding(
                    loc.clone(),
                    FindingKind::UnknownSortInEdge,
                    endpoint,
                    format!("edge endpoint {endpoint} is not a declared sort"),
                ));
            }
        }
        if !is_identifier(&edge.coercion_name) {
            out.push(finding(
                loc.clone(),
                FindingKind::InvalidCoercionName,
                &edge.coercion_name,
                format!(
                    "coercion name {:?} is not an identifier",
                    edge.coercion_name
                ),
            ));
        }
        if !coercions.insert(edge.coercion_name.clone()) {
            out.push(finding(
                loc,
                FindingKind::DuplicateCoercion,
                &edge.coercion_name,
                format!(
                    "coercion name {} is used by more than one edge",
                    edge.coercion_name
                ),
            ));
        }
    }
    for (j, (noun, sorts)) in inv.noun_classifiers.iter().enumerate() {
        for sort in sorts {
            if !inv.has_sort(sort) {
                out.push(finding(
                    format!("noun_classifiers[{j}]"),
                    FindingKind::UnknownSortInClassifiers,
                    sort,
                    format!("noun {noun:?} lists undeclared sort {sort}"),
                ));
            }
        }
    }
    if let Some(path) = find_cycle(inv) {
        out.push(Finding {
            location: "subsumption".to_string(),
            kind: FindingKind::SubsumptionCycle,
            name: path[0].clone(),
            message: render_cycle(&path),
            cycle: path,
        });
    }
    out
}

/// First subsumption cycle in deterministic order, as a closed path
/// `[A, B, ..., A]`, if any.
fn find_cycle(inv: &SortInventory) -> Option<Vec<String>> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for edge in &inv.subsumption {
        adjacency
            .entry(edge.hyponym.as_str())
            .or_default()
            .push(edge.hyperonym.as_str());
    }

    fn dfs<'a>(
        node: &'a str,
        adjacency: &BTreeMap<&'a str, Vec<&'a str>>,
        stack: &mut Vec<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Option<Vec<String>> {
        if let Some(pos) = stack.iter().position(|n| *n == node) {
            let mut path: Vec<String> = stack[pos..].iter().map(|s| s.to_string()).collect();
            path.push(node.to_string());
            return Some(path);
        }
        if done.contains(node) {
            return None;
        }
        stack.push(node);
        if let Some(nexts) = adjacency.get(node) {
            for next in nexts {
                if let Some(path) = dfs(next, adjacency, stack, done) {
                    return Some(path);
                }
            }
        }
        stack.pop();
        done.insert(node);
        None
    }

    let mut done = BTreeSet::new();
    for start in adjacency.keys().copied().collect::<Vec<_>>() {
        let mut stack = Vec::new();
        if let Some(path) = dfs(start, &adjacency, &mut stack, &mut done) {
            return Some(path);
        }
    }
    None
}

fn first_finding_error(findings: &[Finding]) -> Option<LexiconError> {
    let f = findings.first()?;
    Some(match f.kind {
        FindingKind::DuplicateSort => LexiconError::DuplicateSort(f.name.clone()),
        FindingKind::UnknownSortInEdge => LexiconError::UnknownSortInEdge(f.name.clone()),
        FindingKind::SubsumptionCycle => LexiconError::SubsumptionCycle(f.cycle.clone()),
        _ => LexiconError::InvalidInventory(f.to_string()),
    })
}

fn parse_error(err: serde_json::Error) -> LexiconError {
    LexiconError::Parse {
        line: err.line(),
        message: err.to_string(),
    }
}

/// Parses an inventory document without validating it.
pub fn parse_sort_inventory(document: &str) -> Result<SortInventory, LexiconError> {
    serde_json::from_str(document).map_err(parse_error)
}

/// Parses and validates an inventory document.
pub fn load_sort_inventory(document: &str) -> Result<SortInventory, LexiconError> {
    let inv = parse_sort_inventory(document)?;
    match first_finding_error(&validate_inventory(&inv)) {
        None => Ok(inv),
        Some(err) => Err(err),
    }
}

/// Parses a lexicon document without compiling it.
pub fn parse_lexicon_document(document: &str) -> Result<LexiconDocument, LexiconError> {
    serde_json::from_str(document).map_err(parse_error)
}

fn compile_entry(
    entry: &EntryDocument,
    inv: &SortInventory,
    coercion_names: &BTreeSet<String>,
) -> Result<LexEntry, LexiconError> {
    let word = entry.word.clone();
    if logical::is_reserved(&word) {
        return Err(LexiconError::ReservedName(word));
    }
    let entry_error = |detail: String| LexiconError::TypeErrorInEntry {
        word: word.clone(),
        detail,
    };

    let main_type = parse_type(&entry.type_, inv).map_err(|e| entry_error(e.to_string()))?;
    let mut sig = ConstSig::new();
    let main_term = elaborate_term(&entry.term, &main_type, inv, &mut sig)
        .map_err(|e| entry_error(e.to_string()))?;
    if !main_term.free_vars().is_empty() {
        return Err(entry_error(format!(
            "main term has free variables: {:?}",
            main_term.free_vars()
        )));
    }
    let checked =
        type_of(&main_term, &TypingContext::new(), inv).map_err(|e| entry_error(e.to_string()))?;
    if !checked.alpha_eq(&main_type) {
        return Err(entry_error(format!(
            "main term has type {checked}, entry declares {main_type}"
        )));
    }

    let mut modifiers = vec![Modifier::identity_on(&main_type)];
    let mut names = BTreeSet::new();
    for m in &entry.modifiers {
        if m.name == IDENTITY_MODIFIER {
            return Err(entry_error(format!(
                "modifier name {IDENTITY_MODIFIER} is reserved for the implicit identity"
            )));
        }
        if !names.insert(m.name.clone()) {
            return Err(entry_error(format!("duplicate modifier {}", m.name)));
        }
        if coercion_names.contains(&m.name) {
            return Err(entry_error(format!(
                "modifier {} collides with a derived coercion constant",
                m.name
            )));
        }
        let source = parse_type(&m.source, inv)
            .map_err(|e| entry_error(format!("modifier {}: {e}", m.name)))?;
        let target = parse_type(&m.target, inv)
            .map_err(|e| entry_error(format!("modifier {}: {e}", m.name)))?;
        let declared = Type::arrow(source.clone(), target.clone());
        let term = match elaborate_term(&m.term, &declared, inv, &mut sig) {
            Ok(t) => t,
            Err(ElabError::TypeMismatch { expected, computed }) if expected == declared => {
                return Err(LexiconError::ModifierTypeMismatch {
                    word,
                    modifier: m.name.clone(),
                    declared,
                    computed,
                })
            }
            Err(e) => return Err(entry_error(format!("modifier {}: {e}", m.name))),
        };
        let checked = type_of(&term, &TypingContext::new(), inv)
            .map_err(|e| entry_error(format!("modifier {}: {e}", m.name)))?;
        if !checked.alpha_eq(&declared) {
            return Err(LexiconError::ModifierTypeMismatch {
                word,
                modifier: m.name.clone(),
                declared,
                computed: checked,
            });
        }
        modifiers.push(Modifier {
            name: m.name.clone(),
            term,
            source,
            target,
            rigid: m.rigid,
        });
    }

    Ok(LexEntry {
        word,
        main_term,
        main_type,
        modifiers,
    })
}

/// Compiles a parsed lexicon document against a valid inventory, stopping at
/// the first error.
pub fn compile_lexicon(
    doc: &LexiconDocument,
    inventory: &SortInventory,
) -> Result<Lexicon, LexiconError> {
    if let Some(err) = first_finding_error(&validate_inventory(inventory)) {
        return Err(err);
    }
    let coercion_names: BTreeSet<String> = inventory
        .subsumption
        .iter()
        .map(|e| e.coercion_name.clone())
        .collect();
    let mut entries = BTreeMap::new();
    let mut order = Vec::new();
    for entry in &doc.entries {
        let compiled = compile_entry(entry, inventory, &coercion_names)?;
        if entries.contains_key(&compiled.word) {
            return Err(LexiconError::TypeErrorInEntry {
                word: compiled.word,
                detail: "word is declared more than once".into(),
            });
        }
        order.push(compiled.word.clone());
        entries.insert(compiled.word.clone(), compiled);
    }
    Ok(Lexicon {
        inventory: inventory.clone(),
        entries,
        order,
    })
}

/// Parses and compiles a lexicon document. Every entry and modifier is
/// type-checked against the kernel; reserved logical names are rejected.
pub fn load_lexicon(document: &str, inventory: &SortInventory) -> Result<Lexicon, LexiconError> {
    let doc = parse_lexicon_document(document)?;
    compile_lexicon(&doc, inventory)
}

/// Collects every entry-level problem in a lexicon document as findings,
/// continuing across entries. The inventory must be valid.
pub fn validate_lexicon(doc: &LexiconDocument, inventory: &SortInventory) -> Vec<Finding> {
    let coercion_names: BTreeSet<String> = inventory
        .subsumption
        .iter()
        .map(|e| e.coercion_name.clone())
        .collect();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, entry) in doc.entries.iter().enumerate() {
        let loc = format!("entries[{i}]");
        if !seen.insert(entry.word.clone()) {
            out.push(finding(
                loc.clone(),
                FindingKind::DuplicateWord,
                &entry.word,
                format!("word {:?} is declared more than once", entry.word),
            ));
            continue;
        }
        match compile_entry(entry, inventory, &coercion_names) {
            Ok(_) => {}
            Err(LexiconError::ReservedName(name)) => out.push(finding(
                loc,
                FindingKind::ReservedWord,
                &name,
                format!("word {name:?} is a reserved logical name"),
            )),
            Err(LexiconError::ModifierTypeMismatch {
                modifier,
                declared,
                computed,
                ..
            }) => out.push(finding(
                loc,
                FindingKind::ModifierTypeMismatch,
                &modifier,
                format!(
                    "entry {:?}, modifier {modifier}: declared {declared} but term has type {computed}",
                    entry.word
                ),
            )),
            Err(e) => out.push(finding(
                loc,
                FindingKind::TypeErrorInEntry,
                &entry.word,
                e.to_string(),
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::alpha_equal;

    fn birmingham_inventory() -> SortInventory {
        SortInventory {
            sorts: vec![
                Sort::new("T", crate::kernel::Tier::Domain).with_gloss("town"),
                Sort::new("P", crate::kernel::Tier::Domain).with_gloss("people"),
                Sort::new("Pl", crate::kernel::Tier::Domain).with_gloss("place"),
            ],
            ..Default::default()
        }
    }

    fn birmingham_doc() -> LexiconDocument {
        serde_json::from_str(
            r#"{ "entries": [
                { "word": "Birmingham", "term": "Birmingham", "type": "T",
                  "modifiers": [
                    { "name": "t2", "term": "t2", "source": "T", "target": "P" },
                    { "name": "t3", "term": "t3", "source": "T", "target": "Pl" } ] },
                { "word": "is_a_huge_place", "term": "huge_place", "type": "Pl -> t" },
                { "word": "voted", "term": "voted", "type": "P -> t" } ] }"#,
        )
        .unwrap()
    }

    #[test]
    fn birmingham_entry_loads_with_implicit_identity() {
        let lex = compile_lexicon(&birmingham_doc(), &birmingham_inventory()).unwrap();
        let entry = lex.lookup("Birmingham").unwrap();
        assert_eq!(entry.modifiers.len(), 3);
        assert!(entry.modifiers[0].is_identity());
        assert_eq!(entry.modifiers[1].name, "t2");
        assert_eq!(entry.modifiers[2].name, "t3");
    }

    #[test]
    fn lookup_is_case_sensitive() {
        let lex = compile_lexicon(&birmingham_doc(), &birmingham_inventory()).unwrap();
        assert!(matches!(
            lex.lookup("birmingham"),
            Err(LexiconError::UnknownWord(_))
        ));
        assert!(matches!(
            lex.lookup("zzz"),
            Err(LexiconError::UnknownWord(_))
        ));
    }

    #[test]
    fn give_loads_over_a_one_sort_inventory() {
        let inv = SortInventory {
            sorts: vec![Sort::new("e", crate::kernel::Tier::Generic)],
            ..Default::default()
        };
        let doc: LexiconDocument = serde_json::from_str(
            r#"{ "entries": [ { "word": "give",
                 "term": "lam s:e. lam o:e. lam d:e. give s o d",
                 "type": "e -> e -> e -> t" } ] }"#,
        )
        .unwrap();
        let lex = compile_lexicon(&doc, &inv).unwrap();
        let entry = lex.lookup("give").unwrap();
        assert!(entry.main_term.free_vars().is_empty());
    }

    #[test]
    fn modifier_type_mismatch_is_reported_with_both_types() {
        let doc: LexiconDocument = serde_json::from_str(
            r#"{ "entries": [
                { "word": "Birmingham", "term": "Birmingham", "type": "T",
                  "modifiers": [
                    { "name": "t3", "term": "t3", "source": "T", "target": "Pl" },
                    { "name": "t2", "term": "lam x:T. t3 x", "source": "T", "target": "P" } ] } ] }"#,
        )
        .unwrap();
        let err = compile_lexicon(&doc, &birmingham_inventory()).unwrap_err();
        match err {
            LexiconError::ModifierTypeMismatch {
                word,
                modifier,
                declared,
                computed,
            } => {
                assert_eq!(word, "Birmingham");
                assert_eq!(modifier, "t2");
                assert_eq!(declared.to_string(), "T -> P");
                assert_eq!(computed.to_string(), "T -> Pl");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reserved_words_are_rejected() {
        let doc: LexiconDocument = serde_json::from_str(
            r#"{ "entries": [ { "word": "and", "term": "c", "type": "T" } ] }"#,
        )
        .unwrap();
        assert!(matches!(
            compile_lexicon(&doc, &birmingham_inventory()),
            Err(LexiconError::ReservedName(_))
        ));
    }

    #[test]
    fn two_cycle_is_rejected() {
        let inv: SortInventory = serde_json::from_str(
            r#"{ "sorts": [ {"name": "A"}, {"name": "B"} ],
                 "subsumption": [
                   {"sub": "A", "super": "B", "coercion": "ab"},
                   {"sub": "B", "super": "A", "coercion": "ba"} ] }"#,
        )
        .unwrap();
        match first_finding_error(&validate_inventory(&inv)) {
            Some(LexiconError::SubsumptionCycle(path)) => {
                assert_eq!(path.first(), path.last());
                assert_eq!(path.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn three_cycle_reports_the_full_path() {
        let inv: SortInventory = serde_json::from_str(
            r#"{ "sorts": [ {"name": "A"}, {"name": "B"}, {"name": "C"} ],
                 "subsumption": [
                   {"sub": "A", "super": "B", "coercion": "ab"},
                   {"sub": "B", "super": "C", "coercion": "bc"},
                   {"sub": "C", "super": "A", "coercion": "ca"} ] }"#,
        )
        .unwrap();
        let findings = validate_inventory(&inv);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].kind, FindingKind::SubsumptionCycle);
        assert_eq!(
            findings[0].cycle,
            vec!["A", "B", "C", "A"]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn duplicate_sort_yields_one_finding_naming_it() {
        let inv: SortInventory =
            serde_json::from_str(r#"{ "sorts": [ {"name": "A"}, {"name": "A"} ] }"#).unwrap();
        let findings = validate_inventory(&inv);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].kind, FindingKind::DuplicateSort);
        assert_eq!(findings[0].name, "A");
    }

    #[test]
    fn findings_are_ordered_by_location_then_kind() {
        let inv: SortInventory = serde_json::from_str(
            r#"{ "sorts": [ {"name": "A"}, {"name": "t"}, {"name": "A"} ],
                 "subsumption": [
                   {"sub": "A", "super": "Zob", "coercion": "a_z"},
                   {"sub": "A", "super": "A", "coercion": "a_z"} ],
                 "noun_classifiers": { "thing": ["Nope"] } }"#,
        )
        .unwrap();
        let findings = validate_inventory(&inv);
        let summary: Vec<(String, FindingKind, String)> = findings
            .iter()
            .map(|f| (f.location.clone(), f.kind, f.name.clone()))
            .collect();
        assert_eq!(
            summary,
            vec![
                (
                    "sorts[1]".to_string(),
                    FindingKind::ReservedSortName,
                    "t".to_string()
                ),
                (
                    "sorts[2]".to_string(),
                    FindingKind::DuplicateSort,
                    "A".to_string()
                ),
                (
                    "subsumption[0]".to_string(),
                    FindingKind::UnknownSortInEdge,
                    "Zob".to_string()
                ),
                (
                    "subsumption[1]".to_string(),
                    FindingKind::DuplicateCoercion,
                    "a_z".to_string()
                ),
                (
                    "noun_classifiers[0]".to_string(),
                    FindingKind::UnknownSortInClassifiers,
                    "Nope".to_string()
                ),
                (
                    "subsumption".to_string(),
                    FindingKind::SubsumptionCycle,
                    "A".to_string()
                ),
            ]
        );
        // Deterministic across repeated validation.
        assert_eq!(validate_inventory(&inv), findings);
    }

    #[test]
    fn coercion_constants_follow_edges() {
        let inv: SortInventory = serde_json::from_str(
            r#"{ "sorts": [ {"name": "Path"}, {"name": "Region"},
                            {"name": "Village"}, {"name": "Mountain"} ],
                 "subsumption": [
                   {"sub": "Village", "super": "Region", "coercion": "coerce_Village_Region"},
                   {"sub": "Mountain", "super": "Region", "coercion": "coerce_Mountain_Region"} ],
                 "derive_subsumption_coercions": true }"#,
        )
        .unwrap();
        let coercions = inv.coercion_constants();
        assert_eq!(coercions.len(), 2);
        assert_eq!(coercions[0].name, "coerce_Village_Region");
        assert!(coercions[0]
            .term
            .to_string()
            .contains("coerce_Village_Region"));
        assert_eq!(coercions[0].source, Type::sort("Village"));
        assert_eq!(coercions[0].target, Type::sort("Region"));
        assert!(!coercions[0].rigid);

        let empty = birmingham_inventory().coercion_constants();
        assert!(empty.is_empty());
    }

    #[test]
    fn round_trip_preserves_entries() {
        let inv = birmingham_inventory();
        let lex = compile_lexicon(&birmingham_doc(), &inv).unwrap();
        let json = serde_json::to_string(&lex.to_document()).unwrap();
        let reloaded = load_lexicon(&json, &inv).unwrap();
        for entry in lex.entries() {
            let other = reloaded.lookup(&entry.word).unwrap();
            assert!(alpha_equal(&entry.main_term, &other.main_term));
            assert!(entry.main_type.alpha_eq(&other.main_type));
            assert_eq!(entry.modifiers.len(), other.modifiers.len());
            for (m1, m2) in entry.modifiers.iter().zip(&other.modifiers) {
                assert!(alpha_equal(&m1.term, &m2.term));
            }
        }

        let inv_json = serde_json::to_string(&inv).unwrap();
        let inv2 = load_sort_inventory(&inv_json).unwrap();
        assert!(validate_inventory(&inv2).is_empty());
    }
}
