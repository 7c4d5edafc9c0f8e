//! The end-to-end pipeline and its report.

mod common;

use common::{dutch_lexicon, noun, PHRASE};
use lambek::deduction::{ProveError, SearchBudget};
use lambek::pipeline::{leaf_names, run, Report, RunError, RunOptions};
use lambek::semantics::LambdaMode;
use lambek::tensor::{validate_density, Matrix, C64};

fn options(max_comm: usize) -> RunOptions {
    let mut o = RunOptions::new(noun());
    o.budget = SearchBudget::with_max_comm(max_comm);
    o
}

fn matrix(rows: &[Vec<[f64; 2]>]) -> Matrix {
    let data = rows
        .iter()
        .flatten()
        .map(|[re, im]| C64::new(*re, *im))
        .collect();
    Matrix::from_vec(rows.len(), data).unwrap()
}

#[test]
fn relative_clause_has_two_spin_separated_readings() {
    let lex = dutch_lexicon();
    let report = run(&PHRASE, &lex, &options(1)).unwrap();
    assert_eq!(report.readings.len(), 2);
    assert_eq!(report.readings[0].spin_eigenstate, Some(0));
    assert_eq!(report.readings[1].spin_eigenstate, Some(1));
    assert!(report.readings_distinguished);
    assert_eq!(
        report.antecedent,
        "(man:n, (die:(n\\n)/(<>[]np\\s), ((de:np/n, hond:n), bijt:np\\(np\\s))))"
    );
    for r in &report.readings {
        assert!(r.spatial.check.passed, "{:?}", r.spatial.check);
        assert!(r.spin.check.passed);
        assert!(r.spatial.raw_trace > 0.0);
        assert!((r.weight - 0.5).abs() < 1e-12);
    }
    assert!(validate_density(&matrix(&report.direct_sum)).passed);
}

#[test]
fn without_commutation_only_the_subject_reading_remains() {
    let lex = dutch_lexicon();
    let report = run(&PHRASE, &lex, &options(0)).unwrap();
    assert_eq!(report.readings.len(), 1);
    assert_eq!(report.readings[0].comm_count, 0);
    assert_eq!(report.readings[0].spin_eigenstate, Some(0));
}

#[test]
fn single_word_returns_its_lexical_meaning() {
    let lex = dutch_lexicon();
    let report = run(&["man"], &lex, &options(1)).unwrap();
    assert_eq!(report.readings.len(), 1);
    let entry = &lex.get("man").unwrap().meaning;
    let r = &report.readings[0];
    assert!((r.spatial.raw_trace - 1.0).abs() < 1e-12);
    assert!(matrix(&r.spatial.matrix).max_abs_diff(entry.spatial.op()) < 1e-12);
    assert!(matrix(&r.spin.matrix).max_abs_diff(&entry.spin) < 1e-12);
    assert_eq!(r.derivation.trim(), "Ax man:n |- n");
}

#[test]
fn modes_agree() {
    let lex = dutch_lexicon();
    let lazy = run(&PHRASE, &lex, &options(1)).unwrap();
    let mut o = options(1);
    o.mode = LambdaMode::ExplicitSum;
    let explicit = run(&PHRASE, &lex, &o).unwrap();
    for (a, b) in lazy.readings.iter().zip(&explicit.readings) {
        assert!(matrix(&a.spatial.matrix).max_abs_diff(&matrix(&b.spatial.matrix)) < 1e-10);
        assert!(matrix(&a.spin.matrix).max_abs_diff(&matrix(&b.spin.matrix)) < 1e-10);
    }
}

#[test]
fn weights_are_normalised_and_validated() {
    let lex = dutch_lexicon();
    let mut o = options(1);
    o.weights = Some(vec![1.0, 3.0]);
    let report = run(&PHRASE, &lex, &o).unwrap();
    assert!((report.readings[0].weight - 0.25).abs() < 1e-12);
    assert!((report.readings[1].weight - 0.75).abs() < 1e-12);
    o.weights = Some(vec![1.0]);
    assert!(matches!(run(&PHRASE, &lex, &o), Err(RunError::Weights(_))));
    o.weights = Some(vec![1.0, -1.0]);
    assert!(matches!(run(&PHRASE, &lex, &o), Err(RunError::Weights(_))));
}

#[test]
fn explicit_bracketing() {
    let lex = dutch_lexicon();
    let mut o = options(1);
    o.bracketing = Some("(man, (die, ((de, hond), bijt)))".into());
    assert_eq!(run(&PHRASE, &lex, &o).unwrap().readings.len(), 2);
    o.bracketing = Some("(man, ((die, (de, hond)), bijt))".into());
    assert!(run(&PHRASE, &lex, &o).unwrap().readings.is_empty());
    o.bracketing = Some("(man, (die, ((de, hond), man)))".into());
    assert!(matches!(
        run(&PHRASE, &lex, &o),
        Err(RunError::BracketingMismatch { .. })
    ));
}

#[test]
fn input_errors() {
    let lex = dutch_lexicon();
    assert!(matches!(
        run(&[], &lex, &options(1)),
        Err(RunError::EmptyPhrase)
    ));
    assert!(matches!(
        run(&["man", "kat"], &lex, &options(1)),
        Err(RunError::UnknownWord(w)) if w == "kat"
    ));
    assert!(matches!(
        run(&PHRASE, &lex, &options(2)),
        Err(RunError::Prove(ProveError::BudgetExceedsLadder { .. }))
    ));
}

#[test]
fn report_serialises_and_renders() {
    let lex = dutch_lexicon();
    let report = run(&PHRASE, &lex, &options(1)).unwrap();
    let json = serde_json::to_string(&report).unwrap();
    let back: Report = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
    let text = report.to_text();
    assert!(text.contains("readings: 2"));
    assert!(text.contains("|1⟩⟨1|"));
}

#[test]
fn leaf_names_are_unique_identifiers() {
    assert_eq!(
        leaf_names(&["de", "man", "de"]),
        vec!["de_0", "man", "de_2"]
    );
    assert_eq!(leaf_names(&["'s", "x"]), vec!["w_0", "x"]);
}
