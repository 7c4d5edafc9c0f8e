//! Proof search, compiled extraction and term extraction.

mod common;

use common::{atoms, dutch_lexicon, noun, PHRASE};
use lambek::deduction::{check, expand_xleft, prove, ProveError, RuleTag, SearchBudget};
use lambek::lambda::{alpha_eq, extract_term, normalize};
use lambek::pipeline::build_antecedent;
use lambek::syntax::{parse_formula, parse_structure};

fn formula(text: &str) -> lambek::syntax::Formula {
    parse_formula(text, &atoms()).unwrap()
}

#[test]
fn determiner_noun_has_one_derivation() {
    let ant = parse_structure("(d:np/n, h:n)", &atoms()).unwrap();
    let out = prove(&ant, &formula("np"), &SearchBudget::default()).unwrap();
    assert_eq!(out.derivations.len(), 1);
    assert!(!out.truncated);
    let d = &out.derivations[0];
    assert_eq!(d.rule, RuleTag::ER);
    assert!(check(d).is_ok());
    assert_eq!(normalize(&extract_term(d)).to_string(), "(d ◁ h)");
}

#[test]
fn unprovable_sequent_has_no_derivation() {
    let ant = parse_structure("(d:np/n, h:np)", &atoms()).unwrap();
    let out = prove(&ant, &formula("np"), &SearchBudget::default()).unwrap();
    assert!(out.derivations.is_empty());
}

#[test]
fn product_is_not_associative() {
    let ant = parse_structure("((a:np, v:np\\(s/np)), o:np)", &atoms()).unwrap();
    assert_eq!(
        prove(&ant, &formula("s"), &SearchBudget::default())
            .unwrap()
            .derivations
            .len(),
        1
    );
    let ant = parse_structure("(a:np, (v:(np\\s)/np, o:np))", &atoms()).unwrap();
    assert_eq!(
        prove(&ant, &formula("s"), &SearchBudget::default())
            .unwrap()
            .derivations
            .len(),
        1
    );
    let ant = parse_structure("((a:np, v:(np\\s)/np), o:np)", &atoms()).unwrap();
    assert!(prove(&ant, &formula("s"), &SearchBudget::default())
        .unwrap()
        .derivations
        .is_empty());
}

#[test]
fn relative_clause_derivations_check() {
    let lex = dutch_lexicon();
    let ant = build_antecedent(&PHRASE, &lex, None).unwrap();
    let out = prove(&ant, &noun(), &SearchBudget::with_max_comm(1)).unwrap();
    assert_eq!(out.derivations.len(), 2);
    let counts: Vec<usize> = out.derivations.iter().map(|d| d.comm_count()).collect();
    assert_eq!(counts, vec![0, 1]);
    for d in &out.derivations {
        assert!(check(d).is_ok(), "{}", d.to_text());
        assert!(d.to_text().contains("XLeft{"));
    }
}

#[test]
fn expansion_removes_compiled_rule_and_keeps_term() {
    let lex = dutch_lexicon();
    let ant = build_antecedent(&PHRASE, &lex, None).unwrap();
    for d in prove(&ant, &noun(), &SearchBudget::with_max_comm(1))
        .unwrap()
        .derivations
    {
        let expanded = expand_xleft(&d);
        assert!(check(&expanded).is_ok(), "{}", expanded.to_text());
        let text = expanded.to_text();
        assert!(!text.contains("XLeft"));
        assert!(text.contains("E<>{"));
        assert_eq!(text.matches("Comm<>").count(), d.comm_count());
        assert!(alpha_eq(
            &normalize(&extract_term(&expanded)),
            &normalize(&extract_term(&d))
        ));
    }
}

#[test]
fn reading_terms() {
    let lex = dutch_lexicon();
    let ant = build_antecedent(&PHRASE, &lex, None).unwrap();
    let out = prove(&ant, &noun(), &SearchBudget::with_max_comm(1)).unwrap();
    let terms: Vec<String> = out
        .derivations
        .iter()
        .map(|d| {
            let t = normalize(&extract_term(d));
            lambek::lambda::canonical(&t).to_string()
        })
        .collect();
    assert_eq!(
        terms[0],
        "(man ▷ (die ◁ (λˡ#0.(∨∪#0 ▷ ((de ◁ hond) ▷ bijt)))))"
    );
    assert_eq!(
        terms[1],
        "(man ▷ (die ◁ (λˡ#0.ᶜ¹((de ◁ hond) ▷ (∨∪#0 ▷ bijt)))))"
    );
}

#[test]
fn derivation_limit_truncates() {
    let lex = dutch_lexicon();
    let ant = build_antecedent(&PHRASE, &lex, None).unwrap();
    let budget = SearchBudget {
        max_derivations: 1,
        ..SearchBudget::with_max_comm(1)
    };
    let out = prove(&ant, &noun(), &budget).unwrap();
    assert_eq!(out.derivations.len(), 1);
    assert!(out.truncated);
}

#[test]
fn budget_must_fit_the_spin_ladder() {
    assert!(SearchBudget::with_max_comm(1).validate(2).is_ok());
    assert!(matches!(
        SearchBudget::with_max_comm(2).validate(2),
        Err(ProveError::BudgetExceedsLadder { .. })
    ));
}

#[test]
fn repeated_variables_are_rejected() {
    let ant = parse_structure("(x:np/n, x:n)", &atoms()).unwrap();
    assert!(matches!(
        prove(&ant, &formula("np"), &SearchBudget::default()),
        Err(ProveError::NonLinearVariable(_))
    ));
}
