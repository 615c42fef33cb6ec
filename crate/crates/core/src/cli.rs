//! The `sorted-montague` command-line pipeline: validate resources, analyze
//! derivation corpora, inspect sort inventories.
//!
//! Exit codes: 0 success, 2 usage/parse/I-O, 3 validation findings,
//! 4 anomaly in strict mode.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::thread;

use serde::Serialize;

use crate::composer::{compose, parse_derivation, ComposeError, ComposerOptions, Reading};
use crate::lexicon::{
    compile_lexicon, parse_lexicon_document, parse_sort_inventory, validate_inventory,
    validate_lexicon, Lexicon, SortInventory,
};
use crate::logic::{canonicalize, reading_report_with, render_reading, RenderStyle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_ANOMALY: i32 = 4;

/// A failure that aborts the command, with the exit code to use.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::parse(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    /// Canonical λ-terms instead of flattened formulas.
    Raw,
}

/// Configuration of one `analyze` run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inventory: PathBuf,
    pub lexicon: PathBuf,
    pub input: PathBuf,
    pub all_readings: bool,
    pub max_chain: usize,
    pub format: OutputFormat,
    pub strict: bool,
    /// Lines analyzed concurrently; output stays in input order. 1 forces
    /// strictly sequential processing.
    pub jobs: usize,
    pub ascii: bool,
}

impl RunConfig {
    pub fn new(
        inventory: impl Into<PathBuf>,
        lexicon: impl Into<PathBuf>,
        input: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            inventory: inventory.into(),
            lexicon: lexicon.into(),
            input: input.into(),
            all_readings: false,
            max_chain: 2,
            format: OutputFormat::Text,
            strict: false,
            jobs: 1,
            ascii: false,
        }
    }

    fn style(&self) -> RenderStyle {
        if self.ascii {
            RenderStyle::Ascii
        } else {
            RenderStyle::Unicode
        }
    }

    fn composer_options(&self) -> ComposerOptions {
        ComposerOptions {
            max_chain: self.max_chain.max(1),
            all_readings: self.all_readings,
            ..ComposerOptions::default()
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))
}

fn load_inventory(path: &Path) -> Result<SortInventory, CliError> {
    let text = read_file(path)?;
    parse_sort_inventory(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

/// Validates an inventory and, when given, a lexicon; prints every finding.
/// Exit 0 iff the report is empty.
pub fn cmd_check(
    inventory_path: &Path,
    lexicon_path: Option<&Path>,
    out: &mut impl Write,
) -> Result<i32, CliError> {
    let inventory = load_inventory(inventory_path)?;
    let inv_findings = validate_inventory(&inventory);
    for finding in &inv_findings {
        writeln!(out, "inventory:{finding}")?;
    }
    let mut lex_findings = Vec::new();
    if let Some(path) = lexicon_path {
        let text = read_file(path)?;
        let doc = parse_lexicon_document(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        if inv_findings.is_empty() {
            lex_findings = validate_lexicon(&doc, &inventory);
            for finding in &lex_findings {
                writeln!(out, "lexicon:{finding}")?;
            }
        }
    }
    if inv_findings.is_empty() && lex_findings.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_VALIDATION)
    }
}

/// Lists the sorts of an inventory (topologically, hyponyms first) or, with
/// a noun, the noun's classifier sorts in declaration order.
pub fn cmd_sorts(
    inventory_path: &Path,
    noun: Option<&str>,
    out: &mut impl Write,
) -> Result<i32, CliError> {
    let inventory = load_inventory(inventory_path)?;
    let findings = validate_inventory(&inventory);
    if !findings.is_empty() {
        for finding in &findings {
            writeln!(out, "inventory:{finding}")?;
        }
        return Ok(EXIT_VALIDATION);
    }
    match noun {
        Some(noun) => {
            for sort in inventory.classifiers_of(noun) {
                writeln!(out, "{sort}")?;
            }
        }
        None => {
            for sort in inventory.topologically_sorted() {
                match &sort.gloss {
                    Some(gloss) => writeln!(out, "{} [{}] {}", sort.name, sort.tier, gloss)?,
                    None => writeln!(out, "{} [{}]", sort.name, sort.tier)?,
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn load_lexicon_checked(config: &RunConfig, out: &mut impl Write) -> Result<Lexicon, CliError> {
    let inventory = load_inventory(&config.inventory)?;
    let inv_findings = validate_inventory(&inventory);
    if !inv_findings.is_empty() {
        for finding in &inv_findings {
            writeln!(out, "inventory:{finding}")?;
        }
        return Err(CliError {
            code: EXIT_VALIDATION,
            message: format!("{} has validation findings", config.inventory.display()),
        });
    }
    let text = read_file(&config.lexicon)?;
    let doc = parse_lexicon_document(&text)
        .map_err(|e| CliError::parse(format!("{}: {e}", config.lexicon.display())))?;
    let findings = validate_lexicon(&doc, &inventory);
    if !findings.is_empty() {
        for finding in &findings {
            writeln!(out, "lexicon:{finding}")?;
        }
        return Err(CliError {
            code: EXIT_VALIDATION,
            message: format!("{} has validation findings", config.lexicon.display()),
        });
    }
    compile_lexicon(&doc, &inventory).map_err(|e| CliError {
        code: EXIT_VALIDATION,
        message: e.to_string(),
    })
}

#[derive(Serialize)]
struct ErrorRecord {
    error: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    word: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modifier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    actual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tried: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
}

fn error_record(err: &ComposeError) -> ErrorRecord {
    let mut record = ErrorRecord {
        error: "error",
        word: None,
        modifier: None,
        expected: None,
        actual: None,
        path: None,
        tried: None,
        count: None,
    };
    match err {
        ComposeError::UnknownWord { word, path } => {
            record.error = "UnknownWord";
            record.word = Some(word.clone());
            record.path = Some(path.clone());
        }
        ComposeError::SemanticAnomaly {
            expected,
            actual,
            path,
            tried,
        } => {
            record.error = "SemanticAnomaly";
            record.expected = Some(expected.to_string());
            record.actual = Some(actual.to_string());
            record.path = Some(path.clone());
            record.tried = Some(tried.clone());
        }
        ComposeError::AmbiguityOverflow { count } => {
            record.error = "AmbiguityOverflow";
            record.count = Some(*count);
        }
        ComposeError::RigidityViolation { modifier } => {
            record.error = "RigidityViolation";
            record.modifier = Some(modifier.clone());
        }
        ComposeError::UnsupportedConjunction { word } => {
            record.error = "UnsupportedConjunction";
            record.word = Some(word.clone());
        }
        ComposeError::InvalidTraceAddress { path } => {
            record.error = "InvalidTraceAddress";
            record.path = Some(path.clone());
        }
        ComposeError::ModifierNotAvailable { name, path } => {
            record.error = "ModifierNotAvailable";
            record.modifier = Some(name.clone());
            record.path = Some(path.clone());
        }
    }
    record
}

/// The output block for one derivation line, plus whether it failed.
fn render_block(
    result: &Result<Vec<Reading>, ComposeError>,
    format: OutputFormat,
    style: RenderStyle,
) -> (String, bool) {
    match result {
        Ok(readings) => {
            let mut lines = Vec::new();
            match format {
                OutputFormat::Text => {
                    for reading in readings {
                        // Readings of higher-order type fall back to the raw
                        // canonical term.
                        let line = match render_reading(reading, style) {
                            Ok(rendered) => rendered.formula,
                            Err(_) => canonicalize(&reading.term).to_string(),
                        };
                        lines.push(line);
                    }
                }
                OutputFormat::Raw => {
                    for reading in readings {
                        lines.push(canonicalize(&reading.term).to_string());
                    }
                }
                OutputFormat::Json => {
                    let reports: Vec<_> = readings
                        .iter()
                        .map(|r| reading_report_with(r, style))
                        .collect();
                    lines.push(
                        serde_json::to_string(&reports).expect("report serialization cannot fail"),
                    );
                }
            }
            (lines.join("\n"), false)
        }
        Err(err) => {
            let line = match format {
                OutputFormat::Json => serde_json::to_string(&error_record(err))
                    .expect("record serialization cannot fail"),
                _ => format!("! {err}"),
            };
            (line, true)
        }
    }
}

/// Outcome of an analyze run.
#[derive(Debug, Default, Clone, Copy)]
pub struct AnalyzeOutcome {
    pub lines: usize,
    pub failures: usize,
}

/// Analyzes one derivation per input line, emitting results in input order.
/// Blank lines and `#` comments are skipped. Parse failures abort with their
/// line number; per-line composition failures are reported and counted but
/// do not stop the run.
pub fn analyze_stream(
    input: impl BufRead,
    lexicon: &Lexicon,
    config: &RunConfig,
    out: &mut impl Write,
) -> Result<AnalyzeOutcome, CliError> {
    let opts = config.composer_options();
    let style = config.style();
    let jobs = config.jobs.max(1);
    let mut outcome = AnalyzeOutcome::default();

    let mut flush = |batch: &mut Vec<crate::composer::DerivationNode>,
                     out: &mut dyn Write|
     -> Result<(), CliError> {
        if batch.is_empty() {
            return Ok(());
        }
        let results: Vec<Result<Vec<Reading>, ComposeError>> = if jobs > 1 && batch.len() > 1 {
            thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|node| scope.spawn(|| compose(node, lexicon, &opts)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("analysis worker panicked"))
                    .collect()
            })
        } else {
            batch
                .iter()
                .map(|node| compose(node, lexicon, &opts))
                .collect()
        };
        for result in &results {
            let (block, failed) = render_block(result, config.format, style);
            writeln!(out, "{block}").map_err(CliError::from)?;
            if failed {
                outcome.failures += 1;
            }
            outcome.lines += 1;
        }
        batch.clear();
        Ok(())
    };

    let mut batch = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(CliError::from)?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let node = parse_derivation(trimmed).map_err(|e| {
            // Emit what was already analyzed before failing.
            let _ = flush(&mut batch, out);
            CliError::parse(format!("line {line_no}: {e}"))
        })?;
        batch.push(node);
        if batch.len() >= jobs {
            flush(&mut batch, out)?;
        }
    }
    flush(&mut batch, out)?;
    Ok(outcome)
}

/// Checks the resources, then streams the input corpus through the composer.
pub fn cmd_analyze(config: &RunConfig, out: &mut impl Write) -> Result<i32, CliError> {
    let lexicon = load_lexicon_checked(config, out)?;
    let file = fs::File::open(&config.input)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", config.input.display())))?;
    let reader = io::BufReader::new(file);
    let outcome = analyze_stream(reader, &lexicon, config, out)?;
    if outcome.failures > 0 && config.strict {
        Ok(EXIT_ANOMALY)
    } else {
        Ok(EXIT_OK)
    }
}
