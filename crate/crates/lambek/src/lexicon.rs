//! Lexicon files: typed words with spatial and spin meanings.
//!
//! A lexicon is a TOML document:
//!
//! ```toml
//! [space]
//! dim_n = 2
//! dim_s = 2
//! spin_levels = 2
//! # atoms = { s = "S", np = "N", n = "N" }   (the default)
//! # [space.metrics]
//! # N = [[1.0, 0.0], [0.0, 2.0]]
//!
//! # [spin_operators]                         (all keys optional)
//! # basis = [[0, 1], [1, 0]]                  (|0⟩, |1⟩, …)
//! # coefficients = [1.0, 0.0]
//! # unitaries = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
//! # selections = [true, false]
//! # raising = [[0, 1], [0, 0]]
//!
//! [words.man]
//! type = "n"
//! spatial = "random(42)"
//! spin = "diagonal(42)"
//! ```
//!
//! Matrices are arrays of rows whose entries are numbers or `[re, im]`
//! pairs. Instead of a matrix, `spatial` and `spin` accept a generator:
//! `random(seed)` (full-rank random density), `diagonal(seed)` (random
//! diagonal density), `mixed` (maximally mixed) or, for spins only,
//! `pure(a)` (the projector onto the ladder state `|a⟩`). Generators draw
//! from a stream keyed by seed, word and part, so entries are independent.
//!
//! Spatial data lives on the carrier of the word's type — its spatial
//! signature without the spin pairs contributed by modalities.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{random_density, random_diagonal_density, stream};
use crate::semantics::Interpretation;
use crate::spin::{SpinError, SpinOperatorConfig};
use crate::syntax::{
    carrier_signature, parse_formula, AtomSet, AtomicSpace, ConfigError, Formula, ParseError,
    SpaceConfig,
};
use crate::tensor::{validate_density, DensityReport, LabeledTensor, Matrix, C64};

/// The shipped Dutch relative-clause lexicon.
pub const DUTCH: &str = include_str!("../data/dutch.lex");

/// Distance below which a spin counts as an `S_z` eigenstate.
pub const EIGENSTATE_WARNING_TOL: f64 = 1e-6;

/// Errors raised while loading a lexicon.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexiconError {
    /// The file could not be read.
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    /// The document is not valid TOML or does not follow the schema.
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        message: String,
    },
    /// A word's type does not parse.
    #[error("type of `{word}`: {source}")]
    Formula { word: String, source: ParseError },
    /// The space configuration is invalid.
    #[error(transparent)]
    Space(#[from] ConfigError),
    /// The spin operators are invalid.
    #[error(transparent)]
    SpinOperators(#[from] SpinError),
    /// A matrix has the wrong size.
    #[error("{part} of `{word}` must be {expected}x{expected}, got {actual}")]
    Shape {
        word: String,
        part: String,
        expected: usize,
        actual: usize,
    },
    /// A matrix is not a density operator.
    #[error("{part} of `{word}` is not a density operator: {report}")]
    DensityViolation {
        word: String,
        part: String,
        report: DensityReport,
    },
    /// A generator expression is not recognised.
    #[error("{part} of `{word}`: unknown generator `{text}`")]
    UnknownGenerator {
        word: String,
        part: String,
        text: String,
    },
}

/// A typed word with its meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct LexicalEntry {
    /// Syntactic type.
    pub formula: Formula,
    /// Spatial tensor (on the carrier of the type) and spin.
    pub meaning: Interpretation,
}

/// Words, spaces and spin operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    /// Space configuration.
    pub space: SpaceConfig,
    /// Spin operator families.
    pub spin: SpinOperatorConfig,
    entries: BTreeMap<String, LexicalEntry>,
    warnings: Vec<String>,
}

impl Lexicon {
    /// An empty lexicon; the spin operators must match the spin levels.
    pub fn new(space: SpaceConfig, spin: SpinOperatorConfig) -> Result<Self, LexiconError> {
        spin.validate()?;
        if spin.levels() != space.spin_levels {
            return Err(LexiconError::Parse {
                line: None,
                message: format!(
                    "spin operators act on {} levels but the space has {}",
                    spin.levels(),
                    space.spin_levels
                ),
            });
        }
        Ok(Lexicon {
            space,
            spin,
            entries: BTreeMap::new(),
            warnings: Vec::new(),
        })
    }

    /// Adds a word after validating shapes and densities. A spin that is
    /// (nearly) a ladder eigenstate is accepted with a warning.
    pub fn insert(
        &mut self,
        word: &str,
        formula: Formula,
        spatial: Matrix,
        spin: Matrix,
    ) -> Result<(), LexiconError> {
        let carrier = carrier_signature(&formula, &self.space);
        let expected = carrier.dimension(&self.space);
        check_density(word, "spatial", &spatial, expected)?;
        check_density(word, "spin", &spin, self.space.spin_levels)?;
        for a in 0..self.spin.levels() {
            if spin.max_abs_diff(&self.spin.projector(a)) < EIGENSTATE_WARNING_TOL {
                let message = format!("spin of `{word}` is the ladder eigenstate |{a}⟩; readings may not be separable");
                log::warn!("{message}");
                self.warnings.push(message);
            }
        }
        let spatial =
            LabeledTensor::from_signature(&carrier, &self.space, spatial).map_err(|_| {
                LexiconError::Shape {
                    word: word.to_string(),
                    part: "spatial".into(),
                    expected,
                    actual: 0,
                }
            })?;
        self.entries.insert(
            word.to_string(),
            LexicalEntry {
                formula,
                meaning: Interpretation::new(spatial, spin),
            },
        );
        Ok(())
    }

    /// The entry for `word`.
    pub fn get(&self, word: &str) -> Option<&LexicalEntry> {
        self.entries.get(word)
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Warnings raised while loading.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The shipped Dutch relative-clause lexicon.
    pub fn dutch() -> Self {
        Lexicon::from_toml_str(DUTCH).expect("shipped lexicon is valid")
    }

    /// Reads a lexicon file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LexiconError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Lexicon::from_toml_str(&text)
    }

    /// Parses a lexicon document.
    pub fn from_toml_str(text: &str) -> Result<Self, LexiconError> {
        let doc: Document = toml::from_str(text).map_err(|e| LexiconError::Parse {
            line: e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        let atoms = match &doc.space.atoms {
            None => AtomSet::default(),
            Some(map) => AtomSet::new(map.iter().map(|(k, v)| (k.clone(), *v)))?,
        };
        let mut space = SpaceConfig::new(
            doc.space.dim_n,
            doc.space.dim_s,
            doc.space.spin_levels,
            atoms,
        )?;
        for (name, rows) in &doc.space.metrics {
            let which = match name.as_str() {
                "N" => AtomicSpace::N,
                "S" => AtomicSpace::S,
                other => {
                    return Err(LexiconError::Parse {
                        line: None,
                        message: format!("metrics are defined for N and S, not `{other}`"),
                    })
                }
            };
            let metric = matrix_from_rows(rows, "metric", name)?;
            space = space.with_metric(which, metric)?;
        }
        let spin = spin_operators(doc.spin_operators.as_ref(), space.spin_levels)?;
        let mut lexicon = Lexicon::new(space, spin)?;
        for (word, entry) in &doc.words {
            let formula = parse_formula(&entry.ty, &lexicon.space.atoms).map_err(|source| {
                LexiconError::Formula {
                    word: word.clone(),
                    source,
                }
            })?;
            let spatial_dim = carrier_signature(&formula, &lexicon.space).dimension(&lexicon.space);
            let spatial = materialise(&entry.spatial, word, "spatial", spatial_dim, &lexicon.spin)?;
            let spin = materialise(
                &entry.spin,
                word,
                "spin",
                lexicon.space.spin_levels,
                &lexicon.spin,
            )?;
            lexicon.insert(word, formula, spatial, spin)?;
        }
        Ok(lexicon)
    }
}

impl Lexicon {
    /// Writes the lexicon as a document that [`Lexicon::from_toml_str`]
    /// reads back to an equal lexicon. All matrices are written out
    /// explicitly as `[re, im]` entries.
    pub fn to_toml_string(&self) -> String {
        let atoms: BTreeMap<String, AtomicSpace> = self
            .space
            .atoms
            .names()
            .filter_map(|n| Some((n.to_string(), self.space.atoms.space_of(n)?)))
            .collect();
        let mut metrics = BTreeMap::new();
        for (name, which) in [("N", AtomicSpace::N), ("S", AtomicSpace::S)] {
            if let Some(g) = self.space.metric(which) {
                metrics.insert(name.to_string(), entry_rows(g));
            }
        }
        let spin = &self.spin;
        let spin_operators = SpinSection {
            basis: Some(
                spin.basis()
                    .iter()
                    .map(|v| v.iter().map(|c| Entry::Complex([c.re, c.im])).collect())
                    .collect(),
            ),
            coefficients: Some(spin.coefficients().to_vec()),
            unitaries: Some(spin.unitaries().iter().map(entry_rows).collect()),
            selections: Some(spin.selections().to_vec()),
            raising: Some(entry_rows(spin.raising())),
        };
        let words = self
            .entries
            .iter()
            .map(|(w, e)| {
                (
                    w.clone(),
                    WordSection {
                        ty: e.formula.to_string(),
                        spatial: Source::Matrix(entry_rows(e.meaning.spatial.op())),
                        spin: Source::Matrix(entry_rows(&e.meaning.spin)),
                    },
                )
            })
            .collect();
        let doc = Document {
            space: SpaceSection {
                dim_n: self.space.dim_n,
                dim_s: self.space.dim_s,
                spin_levels: self.space.spin_levels,
                atoms: Some(atoms),
                metrics,
            },
            spin_operators: Some(spin_operators),
            words,
        };
        toml::to_string(&doc).expect("lexicon documents always serialise")
    }
}

fn entry_rows(m: &Matrix) -> Vec<Vec<Entry>> {
    m.rows()
        .iter()
        .map(|r| r.iter().map(|c| Entry::Complex([c.re, c.im])).collect())
        .collect()
}

fn check_density(word: &str, part: &str, m: &Matrix, expected: usize) -> Result<(), LexiconError> {
    if m.dim() != expected {
        return Err(LexiconError::Shape {
            word: word.to_string(),
            part: part.to_string(),
            expected,
            actual: m.dim(),
        });
    }
    let report = validate_density(m);
    if !report.passed {
        return Err(LexiconError::DensityViolation {
            word: word.to_string(),
            part: part.to_string(),
            report,
        });
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    space: SpaceSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    spin_operators: Option<SpinSection>,
    #[serde(default)]
    words: BTreeMap<String, WordSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSection {
    dim_n: usize,
    dim_s: usize,
    spin_levels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms: Option<BTreeMap<String, AtomicSpace>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metrics: BTreeMap<String, Vec<Vec<Entry>>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpinSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    basis: Option<Vec<Vec<Entry>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitaries: Option<Vec<Vec<Vec<Entry>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selections: Option<Vec<bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    raising: Option<Vec<Vec<Entry>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordSection {
    #[serde(rename = "type")]
    ty: String,
    spatial: Source,
    spin: Source,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Source {
    Generator(String),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Integer(i64),
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Integer(i) => C64::new(i as f64, 0.0),
            Entry::Real(r) => C64::new(r, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

fn matrix_from_rows(rows: &[Vec<Entry>], part: &str, word: &str) -> Result<Matrix, LexiconError> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(LexiconError::Shape {
            word: word.to_string(),
            part: part.to_string(),
            expected: n,
            actual: bad.len(),
        });
    }
    let data = rows.iter().flatten().map(|e| e.value()).collect();
    Matrix::from_vec(n, data).map_err(|_| LexiconError::Shape {
        word: word.to_string(),
        part: part.to_string(),
        expected: n,
        actual: n,
    })
}

fn spin_operators(
    section: Option<&SpinSection>,
    levels: usize,
) -> Result<SpinOperatorConfig, LexiconError> {
    let mut cfg = SpinOperatorConfig::standard(levels);
    let Some(section) = section else {
        return Ok(cfg);
    };
    if let Some(vectors) = &section.basis {
        let basis = vectors
            .iter()
            .map(|v| v.iter().map(|e| e.value()).collect())
            .collect();
        cfg = cfg.with_basis(basis)?;
    }
    if let Some(c) = &section.coefficients {
        cfg = cfg.with_coefficients(c.clone())?;
    }
    if let Some(us) = &section.unitaries {
        let unitaries = us
            .iter()
            .enumerate()
            .map(|(b, rows)| matrix_from_rows(rows, &format!("unitary {b}"), "spin_operators"))
            .collect::<Result<Vec<_>, _>>()?;
        let selections = section
            .selections
            .clone()
            .unwrap_or_else(|| vec![true; unitaries.len()]);
        cfg = cfg.with_unitaries(unitaries, selections)?;
    } else if section.selections.is_some() {
        return Err(LexiconError::Parse {
            line: None,
            message: "`selections` requires `unitaries`".into(),
        });
    }
    if let Some(rows) = &section.raising {
        cfg = cfg.with_raising(matrix_from_rows(rows, "raising", "spin_operators")?)?;
    }
    Ok(cfg)
}

fn materialise(
    source: &Source,
    word: &str,
    part: &str,
    dim: usize,
    spin: &SpinOperatorConfig,
) -> Result<Matrix, LexiconError> {
    let text = match source {
        Source::Matrix(rows) => return matrix_from_rows(rows, part, word),
        Source::Generator(text) => text.trim(),
    };
    let unknown = || LexiconError::UnknownGenerator {
        word: word.to_string(),
        part: part.to_string(),
        text: text.to_string(),
    };
    if text == "mixed" {
        return Ok(Matrix::maximally_mixed(dim));
    }
    let (name, arg) = text
        .strip_suffix(')')
        .and_then(|t| t.split_once('('))
        .ok_or_else(unknown)?;
    let arg: u64 = arg.trim().parse().map_err(|_| unknown())?;
    match name.trim() {
        "random" => Ok(random_density(dim, &mut stream(arg, &[word, part]))),
        "diagonal" => Ok(random_diagonal_density(
            dim,
            &mut stream(arg, &[word, part]),
        )),
        "pure" if part == "spin" && (arg as usize) < spin.levels() => {
            Ok(spin.projector(arg as usize))
        }
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
[space]
dim_n = 2
dim_s = 2
spin_levels = 2

[words.john]
type = "np"
spatial = [[0.5, 0], [0, 0.5]]
spin = "mixed"

[words.sleeps]
type = 'np\s'
spatial = "random(3)"
spin = "diagonal(3)"
"#;

    #[test]
    fn loads_small_lexicon() {
        let lex = Lexicon::from_toml_str(SMALL).unwrap();
        assert_eq!(lex.words().collect::<Vec<_>>(), vec!["john", "sleeps"]);
        let sleeps = lex.get("sleeps").unwrap();
        assert_eq!(sleeps.meaning.spatial.op().dim(), 4);
        assert!(lex.warnings().is_empty());
    }

    #[test]
    fn reports_parse_line() {
        let err = Lexicon::from_toml_str("[space]\ndim_n = 2\ndim_s = \n").unwrap_err();
        assert!(
            matches!(err, LexiconError::Parse { line: Some(3), .. }),
            "{err:?}"
        );
    }

    #[test]
    fn rejects_wrong_shape_and_non_density() {
        let bad_shape = SMALL.replace("[[0.5, 0], [0, 0.5]]", "[[1.0]]");
        assert!(matches!(
            Lexicon::from_toml_str(&bad_shape),
            Err(LexiconError::Shape { .. })
        ));
        let bad_density = SMALL.replace("[[0.5, 0], [0, 0.5]]", "[[1.5, 0], [0, -0.5]]");
        assert!(matches!(
            Lexicon::from_toml_str(&bad_density),
            Err(LexiconError::DensityViolation { .. })
        ));
    }

    #[test]
    fn writes_and_reads_back() {
        let lex = Lexicon::from_toml_str(SMALL).unwrap();
        let again = Lexicon::from_toml_str(&lex.to_toml_string()).unwrap();
        assert_eq!(lex, again);
    }

    #[test]
    fn warns_on_eigenstate_spin() {
        let lex = Lexicon::from_toml_str(&SMALL.replace("spin = \"mixed\"", "spin = \"pure(0)\""))
            .unwrap();
        assert_eq!(lex.warnings().len(), 1);
    }
}
