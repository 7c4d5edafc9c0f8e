//! From a phrase to its weighted readings.
//!
//! [`run`] builds the antecedent from the words of a phrase, searches for
//! derivations of the goal type, extracts and interprets one term per
//! derivation, and combines the readings into a [`Report`].
//!
//! Without an explicit bracketing, the phrase is grouped right-branching
//! over constituents, where a word whose type is `B/A` with `A` atomic
//! (a determiner, say) first combines with the word that follows it; this
//! yields `(man, (die, ((de, hond), bijt)))` for a five-word relative
//! clause. Leaf variables are the words themselves, suffixed with their
//! position when a word repeats or is not an identifier.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deduction::{prove, DerivationRecord, ProveError, SearchBudget};
use crate::lambda::{extract_term, normalize};
use crate::lexicon::Lexicon;
use crate::semantics::{ambiguous_sum, interpret, Assignment, LambdaMode, SemanticsError};
use crate::syntax::{is_identifier, parse_structure_with, Formula, ParseError, Structure};
use crate::tensor::{validate_density, DensityReport, LabeledTensor, Matrix};

/// Default tolerance for labelling spins as ladder eigenstates.
pub const DEFAULT_SPIN_TOLERANCE: f64 = 1e-9;

/// Options of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Goal type.
    pub goal: Formula,
    /// Search limits.
    pub budget: SearchBudget,
    /// Reading weights (uniform when absent).
    pub weights: Option<Vec<f64>>,
    /// Explicit bracketing over the words, e.g. `(a, (b, c))`.
    pub bracketing: Option<String>,
    /// Abstraction strategy.
    pub mode: LambdaMode,
    /// Tolerance used when labelling spin states.
    pub spin_tolerance: f64,
}

impl RunOptions {
    /// Defaults for a goal type.
    pub fn new(goal: Formula) -> Self {
        RunOptions {
            goal,
            budget: SearchBudget::default(),
            weights: None,
            bracketing: None,
            mode: LambdaMode::Lazy,
            spin_tolerance: DEFAULT_SPIN_TOLERANCE,
        }
    }
}

/// Errors raised by [`run`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    /// The phrase is empty.
    #[error("the phrase has no words")]
    EmptyPhrase,
    /// A word is missing from the lexicon.
    #[error("word `{0}` is not in the lexicon")]
    UnknownWord(String),
    /// The bracketing does not parse.
    #[error("bracketing: {0}")]
    Bracketing(#[from] ParseError),
    /// The bracketing lists other words than the phrase.
    #[error("bracketing words {found:?} differ from the phrase {expected:?}")]
    BracketingMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    /// Search could not start.
    #[error(transparent)]
    Prove(#[from] ProveError),
    /// A reading could not be interpreted.
    #[error("reading {reading}: {source}")]
    Semantics {
        reading: usize,
        source: SemanticsError,
    },
    /// Weights do not fit the readings.
    #[error(transparent)]
    Weights(SemanticsError),
}

/// A matrix with its validation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    /// Slot signature, e.g. `[N]`.
    pub signature: String,
    /// Side length.
    pub dimension: usize,
    /// Rows of `[re, im]` pairs, scaled to unit trace.
    pub matrix: Vec<Vec<[f64; 2]>>,
    /// Trace before scaling. Contractions of density operators are
    /// positive but generally not of unit trace.
    pub raw_trace: f64,
    /// Density diagnostics of the scaled matrix.
    pub check: DensityReport,
}

impl OperatorReport {
    fn new(signature: String, m: &Matrix) -> Self {
        let raw_trace = m.trace().re;
        let scaled = if raw_trace.abs() > f64::EPSILON {
            m.scale(crate::tensor::C64::new(1.0 / raw_trace, 0.0))
        } else {
            m.clone()
        };
        OperatorReport {
            signature,
            dimension: m.dim(),
            matrix: matrix_rows(&scaled),
            raw_trace,
            check: validate_density(&scaled),
        }
    }
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<[f64; 2]>> {
    m.rows()
        .iter()
        .map(|r| r.iter().map(|c| [c.re, c.im]).collect())
        .collect()
}

/// One reading of the phrase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingReport {
    /// Identifier, `r0`, `r1`, ….
    pub id: String,
    /// Normalised weight in the ambiguous sum.
    pub weight: f64,
    /// Controlled commutations used.
    pub comm_count: usize,
    /// Derivation in the indented text format.
    pub derivation: String,
    /// Derivation as a record tree.
    pub derivation_tree: DerivationRecord,
    /// Normalised term, Unicode notation.
    pub term: String,
    /// Normalised term, ASCII notation.
    pub term_ascii: String,
    /// Spatial meaning.
    pub spatial: OperatorReport,
    /// Spin meaning.
    pub spin: OperatorReport,
    /// The ladder state `|a⟩` the spin equals within tolerance, if any.
    pub spin_eigenstate: Option<usize>,
}

/// Output of [`run`]; serialises to the structured output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// The phrase.
    pub phrase: Vec<String>,
    /// The antecedent searched, canonical ASCII.
    pub antecedent: String,
    /// The goal type.
    pub goal: String,
    /// Search limits used.
    pub budget: SearchBudget,
    /// Abstraction strategy used.
    pub mode: LambdaMode,
    /// Whether search hit a limit.
    pub truncated: bool,
    /// Tolerance used for eigenstate labels.
    pub spin_tolerance: f64,
    /// Readings in order of commutation count.
    pub readings: Vec<ReadingReport>,
    /// `Tr(ρ_i ρ_j)` for the reading spins.
    pub spin_overlaps: Vec<Vec<f64>>,
    /// Whether all pairs of reading spins are orthogonal within tolerance.
    pub readings_distinguished: bool,
    /// The weighted direct sum of the readings, as `[re, im]` rows.
    pub direct_sum: Vec<Vec<[f64; 2]>>,
    /// Lexicon warnings.
    pub warnings: Vec<String>,
}

impl Report {
    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("phrase: {}\n", self.phrase.join(" ")));
        out.push_str(&format!("sequent: {} |- {}\n", self.antecedent, self.goal));
        out.push_str(&format!(
            "readings: {}{}\n",
            self.readings.len(),
            if self.truncated {
                " (search truncated)"
            } else {
                ""
            }
        ));
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        for r in &self.readings {
            out.push_str(&format!(
                "\n[{}] weight {:.6}, {} commutation(s)\n",
                r.id, r.weight, r.comm_count
            ));
            out.push_str(&format!("term: {}\n", r.term));
            out.push_str("derivation:\n");
            for line in r.derivation.lines() {
                out.push_str(&format!("  {line}\n"));
            }
            out.push_str(&format!(
                "spatial {} (unit trace; raw trace {:.6e}):\n",
                r.spatial.signature, r.spatial.raw_trace
            ));
            out.push_str(&render_rows(&r.spatial.matrix));
            out.push_str("spin:\n");
            out.push_str(&render_rows(&r.spin.matrix));
            if let Some(a) = r.spin_eigenstate {
                out.push_str(&format!("spin is the ladder state |{a}⟩⟨{a}|\n"));
            }
        }
        if self.readings.len() > 1 {
            out.push_str(&format!(
                "\nspin overlaps: {:?}\nreadings distinguished by spin: {}\n",
                self.spin_overlaps
                    .iter()
                    .map(|row| row.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                self.readings_distinguished
            ));
        }
        out
    }
}

fn render_rows(rows: &[Vec<[f64; 2]>]) -> String {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|[re, im]| crate::tensor::format_complex(crate::tensor::C64::new(*re, *im)))
            .collect();
        out.push_str(&format!("  [{}]\n", cells.join(", ")));
    }
    out
}

/// Leaf variable names for the words of a phrase.
pub fn leaf_names(words: &[&str]) -> Vec<String> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let repeated = words.iter().filter(|v| *v == w).count() > 1;
            if !is_identifier(w) {
                format!("w_{i}")
            } else if repeated {
                format!("{w}_{i}")
            } else {
                (*w).to_string()
            }
        })
        .collect()
}

/// The antecedent for a phrase, from an explicit bracketing or the
/// default grouping described in the module documentation.
pub fn build_antecedent(
    words: &[&str],
    lexicon: &Lexicon,
    bracketing: Option<&str>,
) -> Result<Structure, RunError> {
    if words.is_empty() {
        return Err(RunError::EmptyPhrase);
    }
    let names = leaf_names(words);
    let mut leaves = Vec::with_capacity(words.len());
    for (w, name) in words.iter().zip(&names) {
        let entry = lexicon
            .get(w)
            .ok_or_else(|| RunError::UnknownWord((*w).to_string()))?;
        leaves.push(Structure::leaf(name.clone(), entry.formula.clone()));
    }
    match bracketing {
        Some(text) => {
            let mut found = Vec::new();
            let mut next = 0;
            let structure = parse_structure_with(text, &lexicon.space.atoms, |word, _| {
                found.push(word.to_string());
                let leaf = leaves.get(next).cloned();
                next += 1;
                Ok(leaf.unwrap_or_else(|| Structure::leaf(word, Formula::atom(word))))
            })?;
            if found != words {
                return Err(RunError::BracketingMismatch {
                    expected: words.iter().map(|w| (*w).to_string()).collect(),
                    found,
                });
            }
            Ok(structure)
        }
        None => Ok(default_bracketing(leaves)),
    }
}

fn default_bracketing(leaves: Vec<Structure>) -> Structure {
    let mut units: Vec<Structure> = Vec::new();
    let mut iter = leaves.into_iter().peekable();
    while let Some(leaf) = iter.next() {
        let combines_right = matches!(
            &leaf,
            Structure::Leaf { formula: Formula::RightDiv(_, a), .. } if matches!(a.as_ref(), Formula::Atom(_))
        );
        match iter.peek() {
            Some(_) if combines_right => {
                let next = iter.next().expect("peeked");
                units.push(Structure::node(leaf, next));
            }
            _ => units.push(leaf),
        }
    }
    let mut rest = units.pop().expect("at least one word");
    while let Some(u) = units.pop() {
        rest = Structure::node(u, rest);
    }
    rest
}

/// Runs the whole pipeline on a phrase.
pub fn run(words: &[&str], lexicon: &Lexicon, options: &RunOptions) -> Result<Report, RunError> {
    options.budget.validate(lexicon.space.spin_levels)?;
    let antecedent = build_antecedent(words, lexicon, options.bracketing.as_deref())?;
    let outcome = prove(&antecedent, &options.goal, &options.budget)?;

    let mut assignment = Assignment::new();
    for (w, name) in words.iter().zip(leaf_names(words)) {
        let entry = lexicon
            .get(w)
            .ok_or_else(|| RunError::UnknownWord((*w).to_string()))?;
        assignment.insert(name, entry.meaning.clone());
    }

    let terms: Vec<_> = outcome
        .derivations
        .iter()
        .map(|d| normalize(&extract_term(d)))
        .collect();
    let meanings: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = terms
            .iter()
            .map(|t| {
                scope.spawn(|| {
                    interpret(t, &assignment, &lexicon.space, &lexicon.spin, options.mode)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("interpretation does not panic"))
            .collect()
    });
    let mut interpreted = Vec::with_capacity(meanings.len());
    for (i, m) in meanings.into_iter().enumerate() {
        let meaning = m.map_err(|source| RunError::Semantics { reading: i, source })?;
        interpreted.push((format!("r{i}"), meaning));
    }
    let sum = ambiguous_sum(interpreted, options.weights.as_deref()).map_err(RunError::Weights)?;

    let readings: Vec<ReadingReport> = sum
        .readings
        .iter()
        .zip(&outcome.derivations)
        .zip(&terms)
        .map(|((r, d), t)| ReadingReport {
            id: r.id.clone(),
            weight: r.weight,
            comm_count: d.comm_count(),
            derivation: d.to_text(),
            derivation_tree: d.to_record(),
            term: t.to_string(),
            term_ascii: t.to_ascii(),
            spatial: OperatorReport::new(
                signature_text(&r.meaning.spatial),
                r.meaning.spatial.op(),
            ),
            spin: OperatorReport::new("[Spin]".into(), &r.meaning.spin),
            spin_eigenstate: (0..lexicon.spin.levels()).find(|&a| {
                r.meaning.spin.max_abs_diff(&lexicon.spin.projector(a)) <= options.spin_tolerance
            }),
        })
        .collect();
    let spin_overlaps = sum.spin_overlaps();
    let readings_distinguished = spin_overlaps.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, v)| i == j || v.abs() <= options.spin_tolerance)
    });
    Ok(Report {
        phrase: words.iter().map(|w| (*w).to_string()).collect(),
        antecedent: antecedent.to_string(),
        goal: options.goal.to_string(),
        budget: options.budget,
        mode: options.mode,
        truncated: outcome.truncated,
        spin_tolerance: options.spin_tolerance,
        readings,
        spin_overlaps,
        readings_distinguished,
        direct_sum: matrix_rows(&sum.direct_sum()),
        warnings: lexicon.warnings().to_vec(),
    })
}

fn signature_text(t: &LabeledTensor) -> String {
    t.signature().to_string()
}
