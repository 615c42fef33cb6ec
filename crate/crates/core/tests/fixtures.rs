//! Sweeps over the shipped fixtures: content checks, reading soundness,
//! trace replay, report schema round-trips and formula parse-back.

mod common;

use common::{fixture_inventory, fixture_lexicon, fixture_text};
use sorted_montague::composer::{
    compose, parse_derivation, replay_trace, ComposerOptions, Reading,
};
use sorted_montague::kernel::{
    alpha_equal, beta_normalize, collect_signature, type_of, TypingContext,
};
use sorted_montague::lexicon::Lexicon;
use sorted_montague::logic::{
    canonicalize, parse_rendered, reading_report_with, render_reading, RenderStyle,
};

#[test]
fn japanese_fixture_carries_the_classifier_tiers() {
    let inv = fixture_inventory("japanese.sorts");
    assert!(inv.sorts.len() >= 9, "only {} sorts", inv.sorts.len());
    for name in ["Tsu", "Nin", "Mai", "Dai", "Ko", "Hon", "Hai", "Bi", "Koma"] {
        assert!(inv.sort(name).is_some(), "missing sort {name}");
    }
    let tsu = inv.sort("Tsu").unwrap();
    assert!(tsu
        .gloss
        .as_deref()
        .unwrap()
        .contains("empty semantic content"));
    assert_eq!(inv.classifiers_of("person"), vec!["Nin", "Mei"]);
    assert!(inv.classifiers_of("quasar").is_empty());
}

#[test]
fn lsf_fixture_lists_both_car_proforms() {
    let inv = fixture_inventory("lsf.sorts");
    assert_eq!(inv.classifiers_of("car"), vec!["M_horizontal", "C_shape"]);
}

#[test]
fn itipy_fixture_derives_two_coercion_constants() {
    let inv = fixture_inventory("itipy.sorts");
    assert!(inv.derive_subsumption_coercions);
    let coercions = inv.coercion_constants();
    assert_eq!(coercions.len(), 2);
    let names: Vec<&str> = coercions.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(
        names,
        vec!["coerce_Village_Region", "coerce_Mountain_Region"]
    );
}

fn corpus_readings(lexicon: &Lexicon, corpus: &str) -> Vec<(String, Vec<Reading>)> {
    let opts = ComposerOptions::default();
    let mut out = Vec::new();
    for line in fixture_text(corpus).lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let root = parse_derivation(line).unwrap();
        if let Ok(readings) = compose(&root, lexicon, &opts) {
            out.push((line.to_string(), readings));
        }
    }
    out
}

fn fixture_corpora() -> Vec<(Lexicon, &'static str)> {
    vec![
        (
            fixture_lexicon("birmingham.sorts", "birmingham.lex"),
            "corpus/birmingham_100.deriv",
        ),
        (
            fixture_lexicon("bark.sorts", "bark.lex"),
            "corpus/bark.deriv",
        ),
        (
            fixture_lexicon("bank.sorts", "bank.lex"),
            "corpus/bank.deriv",
        ),
        (
            fixture_lexicon("itipy.sorts", "itipy.lex"),
            "corpus/itipy.deriv",
        ),
    ]
}

/// Soundness: every reading over the fixture corpora type-checks to its
/// recorded type and is β-normal.
#[test]
fn fixture_readings_are_well_typed_and_normal() {
    for (lexicon, corpus) in fixture_corpora() {
        for (line, readings) in corpus_readings(&lexicon, corpus) {
            for reading in readings {
                let ty = type_of(&reading.term, &TypingContext::new(), lexicon.inventory())
                    .unwrap_or_else(|e| panic!("{corpus}: {line}: {e}"));
                assert!(ty.alpha_eq(&reading.ty), "{corpus}: {line}");
                assert!(
                    alpha_equal(&beta_normalize(&reading.term), &reading.term),
                    "{corpus}: {line}: reading is not normal"
                );
            }
        }
    }
}

/// Trace faithfulness: replaying every emitted trace reproduces its reading.
#[test]
fn replaying_every_fixture_trace_reproduces_the_reading() {
    for (lexicon, corpus) in fixture_corpora() {
        for (line, readings) in corpus_readings(&lexicon, corpus) {
            let root = parse_derivation(&line).unwrap();
            for reading in readings {
                let replayed = replay_trace(&root, &lexicon, &reading.trace)
                    .unwrap_or_else(|e| panic!("{corpus}: {line}: {e}"));
                assert!(
                    alpha_equal(&replayed, &reading.term),
                    "{corpus}: {line}: replay diverged"
                );
            }
        }
    }
}

/// Schema sweep: every fixture reading's report is valid JSON and its trace
/// path addresses survive the round trip.
#[test]
fn fixture_reports_round_trip_as_json() {
    for (lexicon, corpus) in fixture_corpora() {
        for (line, readings) in corpus_readings(&lexicon, corpus) {
            for reading in &readings {
                let report = reading_report_with(reading, RenderStyle::Unicode);
                let json = report.to_json();
                let value: serde_json::Value =
                    serde_json::from_str(&json).unwrap_or_else(|e| panic!("{line}: {e}"));
                let trace = value["trace"].as_array().unwrap();
                assert_eq!(trace.len(), reading.trace.len(), "{corpus}: {line}");
                for (step, original) in trace.iter().zip(&reading.trace) {
                    let path: Vec<usize> = step["path"]
                        .as_array()
                        .unwrap()
                        .iter()
                        .map(|v| v.as_u64().unwrap() as usize)
                        .collect();
                    assert_eq!(path, original.at_path, "{corpus}: {line}");
                }
            }
        }
    }
}

/// Parse-back: each rendered Prop-typed reading parses back (given its own
/// constant signature) to a term α-equal to the reading; distinct readings
/// render distinctly.
#[test]
fn rendered_fixture_formulas_parse_back_and_are_injective() {
    for (lexicon, corpus) in fixture_corpora() {
        let mut seen: Vec<(String, sorted_montague::kernel::Term)> = Vec::new();
        for (line, readings) in corpus_readings(&lexicon, corpus) {
            for reading in &readings {
                let Ok(rendered) = render_reading(reading, RenderStyle::Unicode) else {
                    continue; // higher-order readings render raw elsewhere
                };
                let canonical = canonicalize(&reading.term);
                let sig = collect_signature(&canonical);
                let back = parse_rendered(&rendered.formula, &sig, lexicon.inventory())
                    .unwrap_or_else(|e| panic!("{corpus}: {line}: {} : {e}", rendered.formula));
                assert!(
                    alpha_equal(&back, &canonical),
                    "{corpus}: {line}: {} reparsed as {back}",
                    rendered.formula
                );
                if let Some((other_line, other)) = seen.iter().find(|(f, _)| *f == rendered.formula)
                {
                    assert!(
                        alpha_equal(other, &canonical),
                        "{corpus}: formula {} of {line} also names a different reading from {other_line}",
                        rendered.formula
                    );
                } else {
                    seen.push((rendered.formula.clone(), canonical));
                }
            }
        }
    }
}

/// The copredication report carries both modifiers, in order.
#[test]
fn copredication_report_lists_both_modifiers() {
    let lexicon = fixture_lexicon("birmingham.sorts", "birmingham.lex");
    let root = parse_derivation("(coord and is_a_huge_place voted Birmingham)").unwrap();
    let readings = compose(&root, &lexicon, &ComposerOptions::default()).unwrap();
    let report = reading_report_with(&readings[0], RenderStyle::Unicode);
    assert_eq!(report.trace.len(), 2);
    assert_eq!(report.trace[0].modifier, "t3");
    assert_eq!(report.trace[1].modifier, "t2");
    assert_eq!(report.type_, "t");

    let cost0 = compose(
        &parse_derivation("(app barked the_hound)").unwrap(),
        &fixture_lexicon("bark.sorts", "bark.lex"),
        &ComposerOptions::default(),
    )
    .unwrap();
    let report = reading_report_with(&cost0[0], RenderStyle::Unicode);
    assert!(report.trace.is_empty());
    assert_eq!(report.cost, 0);
}

/// Concurrent composition over one shared lexicon.
#[test]
fn compose_is_safe_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<Lexicon>();

    let lexicon = fixture_lexicon("birmingham.sorts", "birmingham.lex");
    let root = parse_derivation("(coord and is_a_huge_place voted Birmingham)").unwrap();
    let expected = compose(&root, &lexicon, &ComposerOptions::default()).unwrap();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..8)
            .map(|_| scope.spawn(|| compose(&root, &lexicon, &ComposerOptions::default()).unwrap()))
            .collect();
        for handle in handles {
            let got = handle.join().unwrap();
            assert_eq!(got.len(), expected.len());
            assert!(alpha_equal(&got[0].term, &expected[0].term));
        }
    });
}
