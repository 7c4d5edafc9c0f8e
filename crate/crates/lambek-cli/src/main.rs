//! `lambek`: parse types, search for derivations and interpret phrases.
//!
//! Exit status is 0 on success (for `prove` and `interpret`: at least one
//! reading), 2 when a phrase has no reading or a derivation fails to
//! check, and 1 on any other error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lambek::deduction::{check, expand_xleft, prove, Derivation, DerivationRecord, SearchBudget};
use lambek::lambda::{extract_term, normalize};
use lambek::lexicon::Lexicon;
use lambek::pipeline::{build_antecedent, run, RunOptions, DEFAULT_SPIN_TOLERANCE};
use lambek::semantics::LambdaMode;
use lambek::syntax::{carrier_signature, full_signature, parse_formula, AtomSet, Formula};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "lambek",
    version,
    about = "Modal Lambek calculus with density-matrix semantics"
)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a type and show its canonical forms and spaces.
    Parse {
        /// The type, e.g. `(n\n)/(<>[]np\s)`.
        formula: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Search for derivations of a phrase.
    Prove {
        /// The words of the phrase.
        #[arg(required = true)]
        words: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Derive, extract and interpret every reading of a phrase.
    Interpret {
        /// The words of the phrase.
        #[arg(required = true)]
        words: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
        /// Reading weights, comma separated (uniform by default).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Evaluate abstractions by explicit basis sums.
        #[arg(long)]
        explicit_sum: bool,
        /// Tolerance for labelling spins as ladder states.
        #[arg(long, env = "LAMBEK_SPIN_TOL", default_value_t = DEFAULT_SPIN_TOLERANCE)]
        spin_tol: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Verify a derivation file (indented text or a JSON record).
    Check {
        /// The derivation file; `-` reads standard input.
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Replace compiled extraction steps by their primitive rules.
    Expand {
        /// The derivation file; `-` reads standard input.
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Lexicon file (the shipped Dutch lexicon by default).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Goal type.
    #[arg(long)]
    goal: String,
    /// Largest number of controlled commutations per extraction.
    #[arg(long, default_value_t = 1)]
    budget: usize,
    /// Largest depth of the search tree.
    #[arg(long, default_value_t = SearchBudget::default().max_depth)]
    max_depth: usize,
    /// Largest number of derivations.
    #[arg(long, default_value_t = SearchBudget::default().max_derivations)]
    max_derivations: usize,
    /// Explicit bracketing over the words, e.g. `(man, (die, ((de, hond), bijt)))`.
    #[arg(long)]
    brackets: Option<String>,
}

impl SearchArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_comm: self.budget,
            max_depth: self.max_depth,
            max_derivations: self.max_derivations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable text.
    Text,
    /// JSON.
    Structured,
}

/// Outcome of a command that succeeded in running.
enum Status {
    Found,
    Empty,
}

fn main() -> ExitCode {
    // Usage errors exit with 1: status 2 is reserved for "no readings".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let mut out = String::new();
    let status = execute(cli.command, &mut out);
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout
        .write_all(out.as_bytes())
        .and_then(|()| stdout.flush())
    {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing output: {e}");
            return ExitCode::from(1);
        }
    }
    match status {
        Ok(Status::Found) => ExitCode::SUCCESS,
        Ok(Status::Empty) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon> {
    match path {
        Some(p) => Lexicon::load(p).with_context(|| format!("loading lexicon {}", p.display())),
        None => Ok(Lexicon::dutch()),
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).context("reading standard input");
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_derivation(path: &Path, atoms: &AtomSet) -> Result<Derivation> {
    let text = read_input(path)?;
    if text.trim_start().starts_with('{') {
        let record: DerivationRecord =
            serde_json::from_str(&text).context("parsing derivation record")?;
        Ok(Derivation::from_record(&record, atoms)?)
    } else {
        Ok(Derivation::from_text(&text, atoms)?)
    }
}

fn goal(text: &str, atoms: &AtomSet) -> Result<Formula> {
    parse_formula(text, atoms).with_context(|| format!("goal `{text}`"))
}

fn print_json(out: &mut String, value: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn execute(command: Command, out: &mut String) -> Result<Status> {
    match command {
        Command::Parse { formula, common } => {
            let lex = load_lexicon(common.lexicon.as_deref())?;
            let f = parse_formula(&formula, &lex.space.atoms)?;
            let carrier = carrier_signature(&f, &lex.space);
            let full = full_signature(&f, &lex.space);
            match common.format {
                Format::Text => {
                    writeln!(out, "{f}")?;
                    writeln!(out, "{}", f.to_unicode())?;
                    writeln!(
                        out,
                        "carrier {carrier} (dimension {})",
                        carrier.dimension(&lex.space)
                    )?;
                    writeln!(
                        out,
                        "space {full} (dimension {})",
                        full.dimension(&lex.space)
                    )?;
                }
                Format::Structured => print_json(
                    out,
                    &json!({
                        "ascii": f.to_string(),
                        "unicode": f.to_unicode(),
                        "formula": f,
                        "carrier": carrier.to_string(),
                        "carrier_dimension": carrier.dimension(&lex.space),
                        "space": full.to_string(),
                        "space_dimension": full.dimension(&lex.space),
                    }),
                )?,
            }
            Ok(Status::Found)
        }
        Command::Prove {
            words,
            search,
            common,
        } => {
            let lex = load_lexicon(common.lexicon.as_deref())?;
            let words: Vec<&str> = words.iter().map(String::as_str).collect();
            let budget = search.budget();
            budget.validate(lex.space.spin_levels)?;
            let ant = build_antecedent(&words, &lex, search.brackets.as_deref())?;
            let goal = goal(&search.goal, &lex.space.atoms)?;
            let outcome = prove(&ant, &goal, &budget)?;
            match common.format {
                Format::Text => {
                    writeln!(
                        out,
                        "{ant} |- {goal}: {} derivation(s){}",
                        outcome.derivations.len(),
                        truncation(outcome.truncated)
                    )?;
                    for (i, d) in outcome.derivations.iter().enumerate() {
                        writeln!(out, "\n[r{i}] {} commutation(s)", d.comm_count())?;
                        writeln!(out, "term: {}", normalize(&extract_term(d)))?;
                        out.push_str(&d.to_text());
                    }
                }
                Format::Structured => {
                    let derivations: Vec<_> = outcome
                        .derivations
                        .iter()
                        .enumerate()
                        .map(|(i, d)| {
                            let t = normalize(&extract_term(d));
                            json!({
                                "id": format!("r{i}"),
                                "comm_count": d.comm_count(),
                                "derivation": d.to_text(),
                                "derivation_tree": d.to_record(),
                                "term": t.to_string(),
                                "term_ascii": t.to_ascii(),
                            })
                        })
                        .collect();
                    print_json(
                        out,
                        &json!({
                            "antecedent": ant.to_string(),
                            "goal": goal.to_string(),
                            "budget": budget,
                            "truncated": outcome.truncated,
                            "derivations": derivations,
                        }),
                    )?;
                }
            }
            Ok(found(!outcome.derivations.is_empty()))
        }
        Command::Interpret {
            words,
            search,
            weights,
            explicit_sum,
            spin_tol,
            common,
        } => {
            if !(spin_tol.is_finite() && spin_tol >= 0.0) {
                bail!("spin tolerance must be a non-negative number, got {spin_tol}");
            }
            let lex = load_lexicon(common.lexicon.as_deref())?;
            let words: Vec<&str> = words.iter().map(String::as_str).collect();
            let mut options = RunOptions::new(goal(&search.goal, &lex.space.atoms)?);
            options.budget = search.budget();
            options.bracketing = search.brackets.clone();
            options.weights = weights;
            options.mode = if explicit_sum {
                LambdaMode::ExplicitSum
            } else {
                LambdaMode::Lazy
            };
            options.spin_tolerance = spin_tol;
            let report = run(&words, &lex, &options)?;
            match common.format {
                Format::Text => out.push_str(&report.to_text()),
                Format::Structured => print_json(out, &serde_json::to_value(&report)?)?,
            }
            Ok(found(!report.readings.is_empty()))
        }
        Command::Check { file, common } => {
            let lex = load_lexicon(common.lexicon.as_deref())?;
            let d = read_derivation(&file, &lex.space.atoms)?;
            let result = check(&d);
            match common.format {
                Format::Text => match &result {
                    Ok(()) => writeln!(out, "valid: {}", d.conclusion)?,
                    Err(e) => writeln!(out, "invalid: {e}")?,
                },
                Format::Structured => print_json(
                    out,
                    &json!({
                        "valid": result.is_ok(),
                        "sequent": d.conclusion.to_string(),
                        "error": result.as_ref().err().map(ToString::to_string),
                    }),
                )?,
            }
            Ok(found(result.is_ok()))
        }
        Command::Expand { file, common } => {
            let lex = load_lexicon(common.lexicon.as_deref())?;
            let d = read_derivation(&file, &lex.space.atoms)?;
            check(&d).context("input derivation does not check")?;
            let expanded = expand_xleft(&d);
            check(&expanded).context("expanded derivation does not check")?;
            match common.format {
                Format::Text => out.push_str(&expanded.to_text()),
                Format::Structured => {
                    print_json(out, &serde_json::to_value(expanded.to_record())?)?
                }
            }
            Ok(Status::Found)
        }
    }
}

fn found(any: bool) -> Status {
    if any {
        Status::Found
    } else {
        Status::Empty
    }
}

fn truncation(truncated: bool) -> &'static str {
    if truncated {
        " (search truncated)"
    } else {
        ""
    }
}
