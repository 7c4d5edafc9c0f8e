//! Natural deduction for NL◇ with controlled extraction.
//!
//! Derivations are trees of [`Sequent`]s labelled by [`RuleTag`]s. The
//! checker verifies each inference locally; the prover enumerates
//! derivations of a sequent with a goal-directed search that uses the
//! compiled extraction rule `XLeft` instead of its primitive expansion
//! (diamond elimination, structural moves, box elimination and
//! abstraction), which [`expand_xleft`] recovers on demand.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse_sequent, AtomSet, Formula, ParseError, Step, Structure};

/// A sequent `Γ ⊢ A`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sequent {
    /// The antecedent structure.
    pub antecedent: Structure,
    /// The succedent formula.
    pub succedent: Formula,
}

impl Sequent {
    /// Builds a sequent.
    pub fn new(antecedent: Structure, succedent: Formula) -> Self {
        Sequent {
            antecedent,
            succedent,
        }
    }

    /// Parses `Γ |- A`; an empty antecedent is reported as such.
    pub fn parse(text: &str, atoms: &AtomSet) -> Result<Self, DerivationParseError> {
        let trimmed = text.trim_start();
        if trimmed.starts_with("|-") || trimmed.starts_with('⊢') {
            return Err(DerivationParseError::EmptyAntecedent);
        }
        let (antecedent, succedent) = parse_sequent(text, atoms)?;
        Ok(Sequent::new(antecedent, succedent))
    }

    /// Unicode rendering.
    pub fn to_unicode(&self) -> String {
        format!(
            "{} ⊢ {}",
            self.antecedent.to_unicode(),
            self.succedent.to_unicode()
        )
    }
}

impl fmt::Display for Sequent {
    /// Canonical ASCII form; re-parses to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.antecedent, self.succedent)
    }
}

/// Inference rules.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleTag {
    /// `x:A ⊢ A`.
    Ax,
    /// `/` elimination: from `Γ ⊢ B/A` and `Δ ⊢ A` infer `(Γ, Δ) ⊢ B`.
    ER,
    /// `\` elimination: from `Γ ⊢ A` and `Δ ⊢ A\B` infer `(Γ, Δ) ⊢ B`.
    EL,
    /// `/` introduction discharging the rightmost hypothesis `var`.
    IR { var: String },
    /// `\` introduction discharging the leftmost hypothesis `var`.
    IL { var: String },
    /// `□` elimination: from `Γ ⊢ □A` infer `<Γ> ⊢ A`.
    EBox,
    /// `□` introduction: from `<Γ> ⊢ A` infer `Γ ⊢ □A`.
    IBox,
    /// `◇` elimination: from `Δ ⊢ ◇A` and `Γ[<var:A>] ⊢ B` infer `Γ[Δ] ⊢ B`.
    EDia { var: String },
    /// `◇` introduction: from `Γ ⊢ A` infer `<Γ> ⊢ ◇A`.
    IDia,
    /// Mixed associativity: `Γ[((<Δ1>, Δ2), Δ3)]` to `Γ[(<Δ1>, (Δ2, Δ3))]`.
    AssDia,
    /// Mixed commutativity: `Γ[(Δ2, (<Δ1>, Δ3))]` to `Γ[(<Δ1>, (Δ2, Δ3))]`.
    CommDia,
    /// Compiled extraction: from `Γ[(hyp:A, Δ)] ⊢ B` infer `Γ[Δ] ⊢ ◇□A\B`,
    /// where the path to the `(hyp, Δ)` node takes `n` right steps.
    XLeft {
        n: usize,
        hyp: String,
        bound: String,
    },
}

impl RuleTag {
    /// Parses the textual tag written by [`fmt::Display`].
    pub fn parse(text: &str) -> Option<RuleTag> {
        let simple = match text {
            "Ax" => Some(RuleTag::Ax),
            "E/" => Some(RuleTag::ER),
            "E\\" => Some(RuleTag::EL),
            "E[]" => Some(RuleTag::EBox),
            "I[]" => Some(RuleTag::IBox),
            "I<>" => Some(RuleTag::IDia),
            "Ass<>" => Some(RuleTag::AssDia),
            "Comm<>" => Some(RuleTag::CommDia),
            _ => None,
        };
        if simple.is_some() {
            return simple;
        }
        let open = text.find('{')?;
        let args = text.get(open + 1..)?.strip_suffix('}')?;
        let name = &text[..open];
        let valid = |s: &str| crate::syntax::is_identifier(s);
        match name {
            "I/" if valid(args) => Some(RuleTag::IR { var: args.into() }),
            "I\\" if valid(args) => Some(RuleTag::IL { var: args.into() }),
            "E<>" if valid(args) => Some(RuleTag::EDia { var: args.into() }),
            "XLeft" => {
                let parts: Vec<&str> = args.split(',').map(str::trim).collect();
                match parts.as_slice() {
                    [n, hyp, bound] if valid(hyp) && valid(bound) => Some(RuleTag::XLeft {
                        n: n.parse().ok()?,
                        hyp: (*hyp).into(),
                        bound: (*bound).into(),
                    }),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Number of premises the rule takes.
    pub fn arity(&self) -> usize {
        match self {
            RuleTag::Ax => 0,
            RuleTag::ER | RuleTag::EL | RuleTag::EDia { .. } => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleTag::Ax => write!(f, "Ax"),
            RuleTag::ER => write!(f, "E/"),
            RuleTag::EL => write!(f, "E\\"),
            RuleTag::IR { var } => write!(f, "I/{{{var}}}"),
            RuleTag::IL { var } => write!(f, "I\\{{{var}}}"),
            RuleTag::EBox => write!(f, "E[]"),
            RuleTag::IBox => write!(f, "I[]"),
            RuleTag::EDia { var } => write!(f, "E<>{{{var}}}"),
            RuleTag::IDia => write!(f, "I<>"),
            RuleTag::AssDia => write!(f, "Ass<>"),
            RuleTag::CommDia => write!(f, "Comm<>"),
            RuleTag::XLeft { n, hyp, bound } => write!(f, "XLeft{{{n},{hyp},{bound}}}"),
        }
    }
}

/// A derivation tree; the conclusion is the sequent at the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Derivation {
    /// The last rule applied.
    pub rule: RuleTag,
    /// Sub-derivations of the premises, left to right.
    pub premises: Vec<Derivation>,
    /// The derived sequent.
    pub conclusion: Sequent,
}

impl Derivation {
    /// Builds a derivation node.
    pub fn new(rule: RuleTag, premises: Vec<Derivation>, conclusion: Sequent) -> Self {
        Derivation {
            rule,
            premises,
            conclusion,
        }
    }

    /// The axiom `var:f ⊢ f`.
    pub fn axiom(var: &str, f: &Formula) -> Self {
        Derivation::new(
            RuleTag::Ax,
            vec![],
            Sequent::new(Structure::leaf(var, f.clone()), f.clone()),
        )
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Total number of controlled commutations, counting each compiled
    /// extraction by its `n`.
    pub fn comm_count(&self) -> usize {
        let own = match &self.rule {
            RuleTag::XLeft { n, .. } => *n,
            RuleTag::CommDia => 1,
            _ => 0,
        };
        own + self
            .premises
            .iter()
            .map(Derivation::comm_count)
            .sum::<usize>()
    }

    /// Every variable name mentioned anywhere in the tree.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        out.extend(
            self.conclusion
                .antecedent
                .vars()
                .into_iter()
                .map(str::to_string),
        );
        match &self.rule {
            RuleTag::IR { var } | RuleTag::IL { var } | RuleTag::EDia { var } => {
                out.insert(var.clone());
            }
            RuleTag::XLeft { hyp, bound, .. } => {
                out.insert(hyp.clone());
                out.insert(bound.clone());
            }
            _ => {}
        }
        for p in &self.premises {
            p.collect_names(out);
        }
    }

    /// The indented text format: one `TAG sequent` line per node,
    /// premises indented two spaces below their conclusion.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(0, &mut out);
        out
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{} {}\n", self.rule, self.conclusion));
        for p in &self.premises {
            p.write_text(depth + 1, out);
        }
    }

    /// Parses the format written by [`Derivation::to_text`].
    pub fn from_text(text: &str, atoms: &AtomSet) -> Result<Self, DerivationParseError> {
        let mut lines = Vec::new();
        for (number, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let indent = raw.len() - raw.trim_start_matches(' ').len();
            if indent % 2 != 0 {
                return Err(DerivationParseError::Layout {
                    line: number + 1,
                    message: "indentation must be a multiple of two spaces".into(),
                });
            }
            let body = raw.trim();
            let (tag, sequent) =
                body.split_once(' ')
                    .ok_or_else(|| DerivationParseError::Layout {
                        line: number + 1,
                        message: "expected `TAG sequent`".into(),
                    })?;
            let rule = RuleTag::parse(tag).ok_or_else(|| DerivationParseError::UnknownRule {
                line: number + 1,
                tag: tag.to_string(),
            })?;
            let sequent = Sequent::parse(sequent, atoms).map_err(|e| e.at_line(number + 1))?;
            lines.push((indent / 2, number + 1, rule, sequent));
        }
        let mut pos = 0;
        let tree = build_tree(&lines, &mut pos, 0)?;
        if let Some(&(_, line, ..)) = lines.get(pos) {
            return Err(DerivationParseError::Layout {
                line,
                message: "more than one root".into(),
            });
        }
        Ok(tree)
    }

    /// The serialisable record form used in structured output.
    pub fn to_record(&self) -> DerivationRecord {
        DerivationRecord {
            rule: self.rule.to_string(),
            sequent: self.conclusion.to_string(),
            premises: self.premises.iter().map(Derivation::to_record).collect(),
        }
    }

    /// Rebuilds a derivation from its record form.
    pub fn from_record(
        record: &DerivationRecord,
        atoms: &AtomSet,
    ) -> Result<Self, DerivationParseError> {
        let rule =
            RuleTag::parse(&record.rule).ok_or_else(|| DerivationParseError::UnknownRule {
                line: 0,
                tag: record.rule.clone(),
            })?;
        let conclusion = Sequent::parse(&record.sequent, atoms)?;
        let premises = record
            .premises
            .iter()
            .map(|p| Derivation::from_record(p, atoms))
            .collect::<Result<_, _>>()?;
        Ok(Derivation::new(rule, premises, conclusion))
    }
}

fn build_tree(
    lines: &[(usize, usize, RuleTag, Sequent)],
    pos: &mut usize,
    depth: usize,
) -> Result<Derivation, DerivationParseError> {
    let Some((d, line, rule, sequent)) = lines.get(*pos).cloned() else {
        return Err(DerivationParseError::Layout {
            line: 0,
            message: "empty derivation".into(),
        });
    };
    if d != depth {
        return Err(DerivationParseError::Layout {
            line,
            message: format!("expected indentation level {depth}, found {d}"),
        });
    }
    *pos += 1;
    let mut premises = Vec::new();
    while let Some(&(d, ..)) = lines.get(*pos) {
        if d <= depth {
            break;
        }
        premises.push(build_tree(lines, pos, depth + 1)?);
    }
    Ok(Derivation::new(rule, premises, sequent))
}

/// Serialisable form of a derivation: rule tag and sequent as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRecord {
    /// Rule tag as written in the text format.
    pub rule: String,
    /// Conclusion in canonical ASCII.
    pub sequent: String,
    /// Premise records.
    pub premises: Vec<DerivationRecord>,
}

/// Errors raised while reading a derivation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationParseError {
    /// A sequent has nothing to the left of the turnstile.
    #[error("sequent has an empty antecedent")]
    EmptyAntecedent,
    /// A sequent failed to parse.
    #[error("line {line}: {source}")]
    Sequent { line: usize, source: ParseError },
    /// An unknown rule tag.
    #[error("line {line}: unknown rule tag `{tag}`")]
    UnknownRule { line: usize, tag: String },
    /// The indentation does not describe a tree.
    #[error("line {line}: {message}")]
    Layout { line: usize, message: String },
}

impl DerivationParseError {
    fn at_line(self, line: usize) -> Self {
        match self {
            DerivationParseError::Sequent { source, .. } => {
                DerivationParseError::Sequent { line, source }
            }
            other => other,
        }
    }
}

impl From<ParseError> for DerivationParseError {
    fn from(source: ParseError) -> Self {
        DerivationParseError::Sequent { line: 0, source }
    }
}

/// Errors found by [`check`]. Paths list premise indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    /// A node does not instantiate its rule.
    #[error("invalid {rule} inference at node {path:?}: {reason}")]
    InvalidInference {
        path: Vec<usize>,
        rule: String,
        reason: String,
    },
    /// A variable labels more than one leaf of a sequent.
    #[error("variable `{name}` occurs more than once in the sequent at node {path:?}")]
    NonLinearVariable { name: String, path: Vec<usize> },
    /// A sequent has an empty antecedent.
    #[error("empty antecedent at node {path:?}")]
    EmptyAntecedent { path: Vec<usize> },
}

/// Verifies every inference of a derivation.
pub fn check(d: &Derivation) -> Result<(), CheckError> {
    check_at(d, &mut Vec::new())
}

fn check_at(d: &Derivation, path: &mut Vec<usize>) -> Result<(), CheckError> {
    if let Some(name) = d.conclusion.antecedent.duplicate_var() {
        return Err(CheckError::NonLinearVariable {
            name,
            path: path.clone(),
        });
    }
    check_node(d).map_err(|reason| CheckError::InvalidInference {
        path: path.clone(),
        rule: d.rule.to_string(),
        reason,
    })?;
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_at(p, path)?;
        path.pop();
    }
    Ok(())
}

fn ensure(condition: bool, reason: impl FnOnce() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(reason())
    }
}

/// Checks the local shape of one inference.
fn check_node(d: &Derivation) -> Result<(), String> {
    ensure(d.premises.len() == d.rule.arity(), || {
        format!(
            "expected {} premise(s), found {}",
            d.rule.arity(),
            d.premises.len()
        )
    })?;
    let ant = &d.conclusion.antecedent;
    let goal = &d.conclusion.succedent;
    let prem = |i: usize| &d.premises[i].conclusion;
    match &d.rule {
        RuleTag::Ax => match ant {
            Structure::Leaf { formula, .. } => ensure(formula == goal, || {
                format!("hypothesis {formula} does not match {goal}")
            }),
            _ => Err("antecedent must be a single hypothesis".into()),
        },
        RuleTag::ER => {
            let expected = Structure::node(prem(0).antecedent.clone(), prem(1).antecedent.clone());
            ensure(*ant == expected, || {
                format!("antecedent must be {expected}")
            })?;
            let function = Formula::right_div(goal.clone(), prem(1).succedent.clone());
            ensure(prem(0).succedent == function, || {
                format!("left premise must prove {function}")
            })
        }
        RuleTag::EL => {
            let expected = Structure::node(prem(0).antecedent.clone(), prem(1).antecedent.clone());
            ensure(*ant == expected, || {
                format!("antecedent must be {expected}")
            })?;
            let function = Formula::left_div(prem(0).succedent.clone(), goal.clone());
            ensure(prem(1).succedent == function, || {
                format!("right premise must prove {function}")
            })
        }
        RuleTag::IR { var } => {
            let Formula::RightDiv(b, a) = goal else {
                return Err("succedent must have the form B/A".into());
            };
            let expected =
                Structure::node(ant.clone(), Structure::leaf(var.clone(), (**a).clone()));
            ensure(prem(0).antecedent == expected, || {
                format!("premise antecedent must be {expected}")
            })?;
            ensure(prem(0).succedent == **b, || {
                format!("premise must prove {b}")
            })
        }
        RuleTag::IL { var } => {
            let Formula::LeftDiv(a, b) = goal else {
                return Err("succedent must have the form A\\B".into());
            };
            let expected =
                Structure::node(Structure::leaf(var.clone(), (**a).clone()), ant.clone());
            ensure(prem(0).antecedent == expected, || {
                format!("premise antecedent must be {expected}")
            })?;
            ensure(prem(0).succedent == **b, || {
                format!("premise must prove {b}")
            })
        }
        RuleTag::EBox => {
            let expected = Structure::bracket(prem(0).antecedent.clone());
            ensure(*ant == expected, || {
                format!("antecedent must be {expected}")
            })?;
            let boxed = Formula::boxed(goal.clone());
            ensure(prem(0).succedent == boxed, || {
                format!("premise must prove {boxed}")
            })
        }
        RuleTag::IBox => {
            let Formula::Box(a) = goal else {
                return Err("succedent must have the form []A".into());
            };
            let expected = Structure::bracket(ant.clone());
            ensure(prem(0).antecedent == expected, || {
                format!("premise antecedent must be {expected}")
            })?;
            ensure(prem(0).succedent == **a, || {
                format!("premise must prove {a}")
            })
        }
        RuleTag::IDia => {
            let Formula::Dia(a) = goal else {
                return Err("succedent must have the form <>A".into());
            };
            let expected = Structure::bracket(prem(0).antecedent.clone());
            ensure(*ant == expected, || {
                format!("antecedent must be {expected}")
            })?;
            ensure(prem(0).succedent == **a, || {
                format!("premise must prove {a}")
            })
        }
        RuleTag::EDia { var } => {
            let Formula::Dia(a) = &prem(0).succedent else {
                return Err("left premise must prove a formula <>A".into());
            };
            let minor = &prem(1).antecedent;
            let leaf_path = minor
                .path_to_var(var)
                .ok_or_else(|| format!("right premise has no hypothesis `{var}`"))?;
            let Some((Step::Inside, bracket_path)) = leaf_path.split_last() else {
                return Err(format!("hypothesis `{var}` must be bracketed on its own"));
            };
            let bracket = Structure::bracket(Structure::leaf(var.clone(), (**a).clone()));
            ensure(minor.at(bracket_path) == Some(&bracket), || {
                format!("right premise must contain {bracket}")
            })?;
            let expected = minor
                .replace_at(bracket_path, prem(0).antecedent.clone())
                .ok_or("invalid bracket path")?;
            ensure(*ant == expected, || {
                format!("antecedent must be {expected}")
            })?;
            ensure(prem(1).succedent == *goal, || {
                format!("right premise must prove {goal}")
            })
        }
        RuleTag::AssDia | RuleTag::CommDia => {
            ensure(prem(0).succedent == *goal, || {
                format!("premise must prove {goal}")
            })?;
            let before = &prem(0).antecedent;
            let found = before.paths().into_iter().any(|p| {
                let moved = match before.at(&p) {
                    Some(s) => structural_move(&d.rule, s),
                    None => None,
                };
                moved.and_then(|m| before.replace_at(&p, m)).as_ref() == Some(ant)
            });
            ensure(found, || "no matching structural rewrite".into())
        }
        RuleTag::XLeft { n, hyp, bound } => {
            let Formula::LeftDiv(dia_box, b) = goal else {
                return Err("succedent must have the form <>[]A\\B".into());
            };
            let a = dia_box
                .strip_dia_box()
                .ok_or("succedent must have the form <>[]A\\B")?;
            ensure(prem(0).succedent == **b, || {
                format!("premise must prove {b}")
            })?;
            let premise = &prem(0).antecedent;
            let leaf_path = premise
                .path_to_var(hyp)
                .ok_or_else(|| format!("premise has no hypothesis `{hyp}`"))?;
            ensure(
                premise.at(&leaf_path) == Some(&Structure::leaf(hyp.clone(), a.clone())),
                || format!("hypothesis `{hyp}` must have type {a}"),
            )?;
            let Some((Step::Left, node_path)) = leaf_path.split_last() else {
                return Err(format!("hypothesis `{hyp}` must be a left daughter"));
            };
            ensure(node_path.iter().all(|s| *s != Step::Inside), || {
                format!("hypothesis `{hyp}` must not be inside a bracket")
            })?;
            let rights = node_path.iter().filter(|s| **s == Step::Right).count();
            ensure(rights == *n, || {
                format!("path needs {rights} commutation(s), tag says {n}")
            })?;
            let Some(Structure::Node(_, rest)) = premise.at(node_path) else {
                return Err("invalid hypothesis path".into());
            };
            let expected = premise
                .replace_at(node_path, (**rest).clone())
                .ok_or("invalid hypothesis path")?;
            ensure(*ant == expected, || {
                format!("antecedent must be {expected}")
            })?;
            ensure(!ant.vars().contains(&bound.as_str()), || {
                format!("bound variable `{bound}` already occurs in the antecedent")
            })
        }
    }
}

/// The rewrite of [`RuleTag::AssDia`] or [`RuleTag::CommDia`] at a node, if
/// the node has the required shape.
fn structural_move(rule: &RuleTag, s: &Structure) -> Option<Structure> {
    let Structure::Node(l, r) = s else {
        return None;
    };
    match rule {
        RuleTag::AssDia => {
            let Structure::Node(ll, lr) = l.as_ref() else {
                return None;
            };
            matches!(ll.as_ref(), Structure::Bracket(_)).then(|| {
                Structure::node(
                    (**ll).clone(),
                    Structure::node((**lr).clone(), (**r).clone()),
                )
            })
        }
        RuleTag::CommDia => {
            let Structure::Node(rl, rr) = r.as_ref() else {
                return None;
            };
            matches!(rl.as_ref(), Structure::Bracket(_)).then(|| {
                Structure::node(
                    (**rl).clone(),
                    Structure::node((**l).clone(), (**rr).clone()),
                )
            })
        }
        _ => None,
    }
}

/// Replaces every compiled extraction step by its primitive expansion:
/// box elimination on a fresh hypothesis in place of the extracted one,
/// the associativity and commutativity moves that bring it to the left
/// edge (innermost first), diamond elimination, and `\` introduction.
pub fn expand_xleft(d: &Derivation) -> Derivation {
    let premises: Vec<Derivation> = d.premises.iter().map(expand_xleft).collect();
    let RuleTag::XLeft { hyp, bound, .. } = &d.rule else {
        return Derivation::new(d.rule.clone(), premises, d.conclusion.clone());
    };
    let premise = &premises[0];
    let Formula::LeftDiv(dia_box, _) = &d.conclusion.succedent else {
        return Derivation::new(d.rule.clone(), premises, d.conclusion.clone());
    };
    let Some(a) = dia_box.strip_dia_box() else {
        return Derivation::new(d.rule.clone(), premises, d.conclusion.clone());
    };
    let Some(leaf_path) = premise.conclusion.antecedent.path_to_var(hyp) else {
        return Derivation::new(d.rule.clone(), premises, d.conclusion.clone());
    };
    let mut avoid = premise.names();
    avoid.extend(d.names());
    let z = crate::lambda::fresh_name("z", &avoid);
    let boxed = Formula::boxed(a.clone());
    let mut current = graft(premise, hyp, &z, a);

    // Move <z> from the leaf position to the left edge, innermost first.
    let node_path = &leaf_path[..leaf_path.len() - 1];
    for k in (1..=node_path.len()).rev() {
        let parent = &node_path[..k - 1];
        let ant = &current.conclusion.antecedent;
        let rule = if node_path[k - 1] == Step::Right {
            RuleTag::CommDia
        } else {
            RuleTag::AssDia
        };
        let moved = ant
            .at(parent)
            .and_then(|s| structural_move(&rule, s))
            .and_then(|m| ant.replace_at(parent, m))
            .expect("the extraction path has the required shape");
        let conclusion = Sequent::new(moved, current.conclusion.succedent.clone());
        current = Derivation::new(rule, vec![current], conclusion);
    }

    let hypothesis = Structure::leaf(bound.clone(), (**dia_box).clone());
    let opened = current
        .conclusion
        .antecedent
        .replace_at(&[Step::Left], hypothesis)
        .expect("the bracket sits at the left edge");
    let elim = Derivation::new(
        RuleTag::EDia { var: z },
        vec![
            Derivation::axiom(bound, &Formula::dia(boxed)),
            current.clone(),
        ],
        Sequent::new(opened, current.conclusion.succedent.clone()),
    );
    Derivation::new(
        RuleTag::IL { var: bound.clone() },
        vec![elim],
        d.conclusion.clone(),
    )
}

/// Replaces the hypothesis `y:a` by `<z:□a>` throughout the branch that
/// carries it, turning its axiom into box elimination.
fn graft(d: &Derivation, y: &str, z: &str, a: &Formula) -> Derivation {
    let bracket = Structure::bracket(Structure::leaf(z, Formula::boxed(a.clone())));
    let ant = &d.conclusion.antecedent;
    let Some(path) = ant.path_to_var(y) else {
        return d.clone();
    };
    let antecedent = ant.replace_at(&path, bracket).expect("path is valid");
    let conclusion = Sequent::new(antecedent, d.conclusion.succedent.clone());
    if d.rule == RuleTag::Ax {
        return Derivation::new(
            RuleTag::EBox,
            vec![Derivation::axiom(z, &Formula::boxed(a.clone()))],
            conclusion,
        );
    }
    let premises = d.premises.iter().map(|p| graft(p, y, z, a)).collect();
    Derivation::new(d.rule.clone(), premises, conclusion)
}

/// Limits on proof search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Largest number of controlled commutations per extraction.
    pub max_comm: usize,
    /// Largest depth of the search tree.
    pub max_depth: usize,
    /// Largest number of derivations returned.
    pub max_derivations: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_comm: 1,
            max_depth: 64,
            max_derivations: 64,
        }
    }
}

impl SearchBudget {
    /// Budget with the given commutation limit and default other limits.
    pub fn with_max_comm(max_comm: usize) -> Self {
        SearchBudget {
            max_comm,
            ..SearchBudget::default()
        }
    }

    /// The commutation limit must leave room on the spin ladder: with
    /// `levels` levels at most `levels - 1` raisings are meaningful.
    pub fn validate(&self, levels: usize) -> Result<(), ProveError> {
        if self.max_comm + 1 > levels {
            return Err(ProveError::BudgetExceedsLadder {
                max_comm: self.max_comm,
                levels,
            });
        }
        Ok(())
    }
}

/// Errors raised before search starts.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProveError {
    /// The input antecedent reuses a variable.
    #[error("variable `{0}` occurs more than once in the antecedent")]
    NonLinearVariable(String),
    /// The commutation budget exceeds what the spin ladder can record.
    #[error("commutation budget {max_comm} needs at least {} spin levels, have {levels}", max_comm + 1)]
    BudgetExceedsLadder { max_comm: usize, levels: usize },
}

/// Result of proof search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Distinct derivations, in increasing order of commutation count and
    /// otherwise in enumeration order.
    pub derivations: Vec<Derivation>,
    /// Whether a limit cut the search short.
    pub truncated: bool,
}

/// Enumerates derivations of `antecedent ⊢ goal`.
///
/// Search is goal-directed: axioms first, then introduction rules
/// determined by the goal (including compiled extraction for goals
/// `◇□A\B`, with candidate extraction sites ordered by commutation count
/// and then left to right), box and diamond elimination, and finally the
/// two slash eliminations at the top product node, whose major premise is
/// restricted to subformulas of the hypotheses on the function side.
pub fn prove(
    antecedent: &Structure,
    goal: &Formula,
    budget: &SearchBudget,
) -> Result<SearchOutcome, ProveError> {
    if let Some(name) = antecedent.duplicate_var() {
        return Err(ProveError::NonLinearVariable(name));
    }
    let mut searcher = Searcher {
        budget: *budget,
        truncated: false,
        visiting: Vec::new(),
    };
    let mut derivations = searcher.search(antecedent, goal, 0);
    let mut seen = BTreeSet::new();
    derivations.retain(|d| seen.insert(d.clone()));
    derivations.sort_by_key(Derivation::comm_count);
    if derivations.len() > budget.max_derivations {
        derivations.truncate(budget.max_derivations);
        searcher.truncated = true;
    }
    Ok(SearchOutcome {
        derivations,
        truncated: searcher.truncated,
    })
}

struct Searcher {
    budget: SearchBudget,
    truncated: bool,
    visiting: Vec<(Structure, Formula)>,
}

impl Searcher {
    fn search(&mut self, ant: &Structure, goal: &Formula, depth: usize) -> Vec<Derivation> {
        if depth > self.budget.max_depth {
            self.truncated = true;
            return Vec::new();
        }
        let key = (ant.clone(), goal.clone());
        if self.visiting.contains(&key) {
            return Vec::new();
        }
        self.visiting.push(key);
        let mut out = Vec::new();
        self.axiom(ant, goal, &mut out);
        self.introductions(ant, goal, depth, &mut out);
        self.modal_eliminations(ant, goal, depth, &mut out);
        self.slash_eliminations(ant, goal, depth, &mut out);
        self.visiting.pop();
        if out.len() > self.budget.max_derivations {
            out.truncate(self.budget.max_derivations);
            self.truncated = true;
        }
        out
    }

    fn full(&self, out: &[Derivation]) -> bool {
        out.len() >= self.budget.max_derivations
    }

    fn axiom(&mut self, ant: &Structure, goal: &Formula, out: &mut Vec<Derivation>) {
        if let Structure::Leaf { var, formula } = ant {
            if formula == goal {
                out.push(Derivation::axiom(var, goal));
            }
        }
    }

    fn introductions(
        &mut self,
        ant: &Structure,
        goal: &Formula,
        depth: usize,
        out: &mut Vec<Derivation>,
    ) {
        let avoid: BTreeSet<String> = ant.vars().into_iter().map(str::to_string).collect();
        match goal {
            Formula::Box(a) => {
                let premise = Structure::bracket(ant.clone());
                for p in self.search(&premise, a, depth + 1) {
                    out.push(Derivation::new(
                        RuleTag::IBox,
                        vec![p],
                        Sequent::new(ant.clone(), goal.clone()),
                    ));
                }
            }
            Formula::Dia(a) => {
                if let Structure::Bracket(inner) = ant {
                    for p in self.search(inner, a, depth + 1) {
                        out.push(Derivation::new(
                            RuleTag::IDia,
                            vec![p],
                            Sequent::new(ant.clone(), goal.clone()),
                        ));
                    }
                }
            }
            Formula::LeftDiv(a, b) => {
                if let Some(extracted) = a.strip_dia_box() {
                    self.extractions(ant, goal, extracted, b, depth, out);
                } else if a.contains_dia_box() {
                    let x = crate::lambda::fresh_name("x", &avoid);
                    let premise =
                        Structure::node(Structure::leaf(x.clone(), (**a).clone()), ant.clone());
                    for p in self.search(&premise, b, depth + 1) {
                        out.push(Derivation::new(
                            RuleTag::IL { var: x.clone() },
                            vec![p],
                            Sequent::new(ant.clone(), goal.clone()),
                        ));
                    }
                }
            }
            Formula::RightDiv(b, a) => {
                if a.contains_dia_box() {
                    let x = crate::lambda::fresh_name("x", &avoid);
                    let premise =
                        Structure::node(ant.clone(), Structure::leaf(x.clone(), (**a).clone()));
                    for p in self.search(&premise, b, depth + 1) {
                        out.push(Derivation::new(
                            RuleTag::IR { var: x.clone() },
                            vec![p],
                            Sequent::new(ant.clone(), goal.clone()),
                        ));
                    }
                }
            }
            Formula::Atom(_) => {}
        }
    }

    /// Compiled extraction at every product-only path within budget.
    fn extractions(
        &mut self,
        ant: &Structure,
        goal: &Formula,
        a: &Formula,
        b: &Formula,
        depth: usize,
        out: &mut Vec<Derivation>,
    ) {
        let avoid: BTreeSet<String> = ant.vars().into_iter().map(str::to_string).collect();
        let hyp = crate::lambda::fresh_name("y", &avoid);
        let mut sites: Vec<(usize, usize, Vec<Step>)> = ant
            .paths()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| p.iter().all(|s| *s != Step::Inside))
            .map(|(order, p)| (p.iter().filter(|s| **s == Step::Right).count(), order, p))
            .filter(|(n, ..)| *n <= self.budget.max_comm)
            .collect();
        sites.sort_by_key(|(n, order, _)| (*n, *order));
        for (n, _, path) in sites {
            if self.full(out) {
                self.truncated = true;
                return;
            }
            let Some(target) = ant.at(&path) else {
                continue;
            };
            let node = Structure::node(Structure::leaf(hyp.clone(), a.clone()), target.clone());
            let Some(premise) = ant.replace_at(&path, node) else {
                continue;
            };
            for p in self.search(&premise, b, depth + 1) {
                let mut names = p.names();
                names.extend(avoid.iter().cloned());
                names.insert(hyp.clone());
                let bound = crate::lambda::fresh_name("x", &names);
                out.push(Derivation::new(
                    RuleTag::XLeft {
                        n,
                        hyp: hyp.clone(),
                        bound,
                    },
                    vec![p],
                    Sequent::new(ant.clone(), goal.clone()),
                ));
            }
        }
    }

    fn modal_eliminations(
        &mut self,
        ant: &Structure,
        goal: &Formula,
        depth: usize,
        out: &mut Vec<Derivation>,
    ) {
        // Box elimination when the antecedent is a bracket whose content
        // can supply □goal.
        if let Structure::Bracket(inner) = ant {
            let boxed = Formula::boxed(goal.clone());
            if has_subformula(inner, &boxed) {
                for p in self.search(inner, &boxed, depth + 1) {
                    out.push(Derivation::new(
                        RuleTag::EBox,
                        vec![p],
                        Sequent::new(ant.clone(), goal.clone()),
                    ));
                }
            }
        }
        // Diamond elimination on the leftmost diamond hypothesis.
        let paths = ant.paths();
        let leftmost = paths.iter().find_map(|p| match ant.at(p) {
            Some(Structure::Leaf {
                var,
                formula: Formula::Dia(a),
            }) if !(matches!(ant, Structure::Leaf { .. })) => {
                Some((p.clone(), var.clone(), (**a).clone()))
            }
            _ => None,
        });
        if let Some((path, var, a)) = leftmost {
            let avoid: BTreeSet<String> = ant.vars().into_iter().map(str::to_string).collect();
            let z = crate::lambda::fresh_name("z", &avoid);
            let opened = ant
                .replace_at(
                    &path,
                    Structure::bracket(Structure::leaf(z.clone(), a.clone())),
                )
                .expect("path is valid");
            for p in self.search(&opened, goal, depth + 1) {
                out.push(Derivation::new(
                    RuleTag::EDia { var: z.clone() },
                    vec![Derivation::axiom(&var, &Formula::dia(a.clone())), p],
                    Sequent::new(ant.clone(), goal.clone()),
                ));
            }
        }
    }

    fn slash_eliminations(
        &mut self,
        ant: &Structure,
        goal: &Formula,
        depth: usize,
        out: &mut Vec<Derivation>,
    ) {
        let Structure::Node(left, right) = ant else {
            return;
        };
        for a in argument_candidates(left, |f| match f {
            Formula::RightDiv(b, a) if **b == *goal => Some((**a).clone()),
            _ => None,
        }) {
            let function = Formula::right_div(goal.clone(), a.clone());
            self.combine(
                RuleTag::ER,
                left,
                &function,
                right,
                &a,
                ant,
                goal,
                depth,
                out,
            );
        }
        for a in argument_candidates(right, |f| match f {
            Formula::LeftDiv(a, b) if **b == *goal => Some((**a).clone()),
            _ => None,
        }) {
            let function = Formula::left_div(a.clone(), goal.clone());
            self.combine(
                RuleTag::EL,
                left,
                &a,
                right,
                &function,
                ant,
                goal,
                depth,
                out,
            );
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn combine(
        &mut self,
        rule: RuleTag,
        left: &Structure,
        left_goal: &Formula,
        right: &Structure,
        right_goal: &Formula,
        ant: &Structure,
        goal: &Formula,
        depth: usize,
        out: &mut Vec<Derivation>,
    ) {
        let lefts = self.search(left, left_goal, depth + 1);
        if lefts.is_empty() {
            return;
        }
        let rights = self.search(right, right_goal, depth + 1);
        for l in &lefts {
            for r in &rights {
                if self.full(out) {
                    self.truncated = true;
                    return;
                }
                out.push(Derivation::new(
                    rule.clone(),
                    vec![l.clone(), r.clone()],
                    Sequent::new(ant.clone(), goal.clone()),
                ));
            }
        }
    }
}

fn has_subformula(s: &Structure, target: &Formula) -> bool {
    s.leaves()
        .iter()
        .any(|(_, f)| f.subformulas().contains(&target))
}

/// Distinct values of `pick` over the subformulas of the leaves of `s`,
/// in order of first occurrence.
fn argument_candidates(s: &Structure, pick: impl Fn(&Formula) -> Option<Formula>) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for (_, f) in s.leaves() {
        for sub in f.subformulas() {
            if let Some(a) = pick(sub) {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
        }
    }
    out
}
