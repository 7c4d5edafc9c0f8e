//! Formulas, antecedent structures, and the maps from types to spaces.
//!
//! Formulas of NL◇ are built from atoms with the two directional
//! implications `\` and `/` and the unary modalities ◇ and □. Antecedents
//! are binary trees whose internal nodes are either the structural product
//! `(Γ, Δ)` or the structural counterpart of ◇, written `<Γ>`.
//!
//! The concrete syntax is deliberately strict so that a single token of
//! lookahead suffices: every operand of `\` or `/` that is itself a binary
//! formula must be parenthesised.
//!
//! | connective | ASCII | alternative |
//! |------------|-------|-------------|
//! | A\B        | `\`   |             |
//! | B/A        | `/`   |             |
//! | ◇A         | `<>`  | `◇`         |
//! | □A         | `[]`  | `□`         |
//! | ⟨Γ⟩        | `<Γ>` | `⟨Γ⟩`       |
//! | Γ·Δ        | `(Γ, Δ)` |          |
//! | ⊢          | `\|-` | `⊢`         |

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::Matrix;

/// The atomic spaces that interpretations are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtomicSpace {
    /// Noun space Ñ = N ⊗ N*.
    N,
    /// Sentence space S̃ = S ⊗ S*.
    S,
    /// The auxiliary spin space.
    Spin,
}

impl fmt::Display for AtomicSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomicSpace::N => write!(f, "N"),
            AtomicSpace::S => write!(f, "S"),
            AtomicSpace::Spin => write!(f, "Spin"),
        }
    }
}

/// The configured atomic types together with the space each one maps to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSet {
    atoms: BTreeMap<String, AtomicSpace>,
}

impl Default for AtomSet {
    /// The atoms `s`, `np` and `n`, with `s` in the sentence space and the
    /// other two in the noun space.
    fn default() -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert("s".to_string(), AtomicSpace::S);
        atoms.insert("np".to_string(), AtomicSpace::N);
        atoms.insert("n".to_string(), AtomicSpace::N);
        AtomSet { atoms }
    }
}

impl AtomSet {
    /// Builds an atom set from explicit `(name, space)` pairs.
    ///
    /// The spin space is reserved for the derivational history and cannot
    /// host an atom; such entries are rejected.
    pub fn new<I, S>(atoms: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (S, AtomicSpace)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, space) in atoms {
            let name = name.into();
            if space == AtomicSpace::Spin {
                return Err(ConfigError::SpinAtom(name));
            }
            if !is_identifier(&name) {
                return Err(ConfigError::BadAtomName(name));
            }
            map.insert(name, space);
        }
        if map.is_empty() {
            return Err(ConfigError::NoAtoms);
        }
        Ok(AtomSet { atoms: map })
    }

    /// The space an atom maps to, if the atom is known.
    pub fn space_of(&self, name: &str) -> Option<AtomicSpace> {
        self.atoms.get(name).copied()
    }

    /// Whether `name` is a configured atom.
    pub fn contains(&self, name: &str) -> bool {
        self.atoms.contains_key(name)
    }

    /// Iterates over the atom names in lexicographic order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.atoms.keys().map(String::as_str)
    }
}

/// A syntactic type of NL◇.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    /// An atomic type.
    Atom(String),
    /// `A\B`: looks for an `A` on its left to produce a `B`.
    LeftDiv(Box<Formula>, Box<Formula>),
    /// `B/A`: looks for an `A` on its right to produce a `B`. The first
    /// field is the result `B`, the second the argument `A`.
    RightDiv(Box<Formula>, Box<Formula>),
    /// `◇A`.
    Dia(Box<Formula>),
    /// `□A`.
    Box(Box<Formula>),
}

impl Formula {
    /// An atomic formula.
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    /// `a\b`.
    pub fn left_div(a: Formula, b: Formula) -> Self {
        Formula::LeftDiv(Box::new(a), Box::new(b))
    }

    /// `b/a`.
    pub fn right_div(b: Formula, a: Formula) -> Self {
        Formula::RightDiv(Box::new(b), Box::new(a))
    }

    /// `◇a`.
    pub fn dia(a: Formula) -> Self {
        Formula::Dia(Box::new(a))
    }

    /// `□a`.
    pub fn boxed(a: Formula) -> Self {
        Formula::Box(Box::new(a))
    }

    /// Whether the formula is binary (`\` or `/`).
    pub fn is_binary(&self) -> bool {
        matches!(self, Formula::LeftDiv(..) | Formula::RightDiv(..))
    }

    /// Whether a `◇□` pair occurs anywhere in the formula.
    pub fn contains_dia_box(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Dia(inner) => {
                matches!(inner.as_ref(), Formula::Box(_)) || inner.contains_dia_box()
            }
            Formula::Box(inner) => inner.contains_dia_box(),
            Formula::LeftDiv(a, b) | Formula::RightDiv(a, b) => {
                a.contains_dia_box() || b.contains_dia_box()
            }
        }
    }

    /// If the formula is `◇□A`, returns `A`.
    pub fn strip_dia_box(&self) -> Option<&Formula> {
        match self {
            Formula::Dia(inner) => match inner.as_ref() {
                Formula::Box(a) => Some(a),
                _ => None,
            },
            _ => None,
        }
    }

    /// All subformulas, including the formula itself, in pre-order.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        out.push(self);
        match self {
            Formula::Atom(_) => {}
            Formula::Dia(a) | Formula::Box(a) => a.collect_subformulas(out),
            Formula::LeftDiv(a, b) | Formula::RightDiv(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
        }
    }

    /// Number of connectives and atoms.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Dia(a) | Formula::Box(a) => 1 + a.size(),
            Formula::LeftDiv(a, b) | Formula::RightDiv(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Renders the formula with Unicode modalities (`◇`, `□`).
    pub fn to_unicode(&self) -> String {
        self.render(true)
    }

    fn render(&self, unicode: bool) -> String {
        let operand = |f: &Formula| {
            if f.is_binary() {
                format!("({})", f.render(unicode))
            } else {
                f.render(unicode)
            }
        };
        match self {
            Formula::Atom(name) => name.clone(),
            Formula::LeftDiv(a, b) => format!("{}\\{}", operand(a), operand(b)),
            Formula::RightDiv(b, a) => format!("{}/{}", operand(b), operand(a)),
            Formula::Dia(a) => format!("{}{}", if unicode { "◇" } else { "<>" }, operand(a)),
            Formula::Box(a) => format!("{}{}", if unicode { "□" } else { "[]" }, operand(a)),
        }
    }
}

impl fmt::Display for Formula {
    /// Canonical ASCII form; re-parses to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// One step of a path from the root of a [`Structure`] to a subtree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    /// Into the left daughter of a product node.
    Left,
    /// Into the right daughter of a product node.
    Right,
    /// Into the content of a bracket.
    Inside,
}

/// An antecedent structure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Structure {
    /// A hypothesis `var : formula`.
    Leaf { var: String, formula: Formula },
    /// The structural product `(Γ, Δ)`.
    Node(Box<Structure>, Box<Structure>),
    /// The bracket `<Γ>`.
    Bracket(Box<Structure>),
}

impl Structure {
    /// A single hypothesis.
    pub fn leaf(var: impl Into<String>, formula: Formula) -> Self {
        Structure::Leaf {
            var: var.into(),
            formula,
        }
    }

    /// The product `(left, right)`.
    pub fn node(left: Structure, right: Structure) -> Self {
        Structure::Node(Box::new(left), Box::new(right))
    }

    /// The bracket `<inner>`.
    pub fn bracket(inner: Structure) -> Self {
        Structure::Bracket(Box::new(inner))
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<(&str, &Formula)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a Formula)>) {
        match self {
            Structure::Leaf { var, formula } => out.push((var, formula)),
            Structure::Node(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
            Structure::Bracket(inner) => inner.collect_leaves(out),
        }
    }

    /// Variable names in left-to-right order.
    pub fn vars(&self) -> Vec<&str> {
        self.leaves().into_iter().map(|(v, _)| v).collect()
    }

    /// The first variable name that occurs in more than one leaf.
    pub fn duplicate_var(&self) -> Option<String> {
        let mut seen = std::collections::BTreeSet::new();
        self.vars()
            .into_iter()
            .find(|v| !seen.insert(*v))
            .map(str::to_string)
    }

    /// The subtree at `path`, if the path is valid.
    pub fn at(&self, path: &[Step]) -> Option<&Structure> {
        let Some((first, rest)) = path.split_first() else {
            return Some(self);
        };
        match (self, first) {
            (Structure::Node(l, _), Step::Left) => l.at(rest),
            (Structure::Node(_, r), Step::Right) => r.at(rest),
            (Structure::Bracket(inner), Step::Inside) => inner.at(rest),
            _ => None,
        }
    }

    /// A copy with the subtree at `path` replaced by `with`.
    pub fn replace_at(&self, path: &[Step], with: Structure) -> Option<Structure> {
        let Some((first, rest)) = path.split_first() else {
            return Some(with);
        };
        match (self, first) {
            (Structure::Node(l, r), Step::Left) => {
                Some(Structure::node(l.replace_at(rest, with)?, (**r).clone()))
            }
            (Structure::Node(l, r), Step::Right) => {
                Some(Structure::node((**l).clone(), r.replace_at(rest, with)?))
            }
            (Structure::Bracket(inner), Step::Inside) => {
                Some(Structure::bracket(inner.replace_at(rest, with)?))
            }
            _ => None,
        }
    }

    /// Every path in the structure, in pre-order (root first, left before
    /// right).
    pub fn paths(&self) -> Vec<Vec<Step>> {
        let mut out = Vec::new();
        self.collect_paths(&mut Vec::new(), &mut out);
        out
    }

    fn collect_paths(&self, prefix: &mut Vec<Step>, out: &mut Vec<Vec<Step>>) {
        out.push(prefix.clone());
        match self {
            Structure::Leaf { .. } => {}
            Structure::Node(l, r) => {
                prefix.push(Step::Left);
                l.collect_paths(prefix, out);
                prefix.pop();
                prefix.push(Step::Right);
                r.collect_paths(prefix, out);
                prefix.pop();
            }
            Structure::Bracket(inner) => {
                prefix.push(Step::Inside);
                inner.collect_paths(prefix, out);
                prefix.pop();
            }
        }
    }

    /// The path to the leaf binding `var`.
    pub fn path_to_var(&self, var: &str) -> Option<Vec<Step>> {
        self.paths()
            .into_iter()
            .find(|p| matches!(self.at(p), Some(Structure::Leaf { var: v, .. }) if v == var))
    }

    /// Number of leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            Structure::Leaf { .. } => 1,
            Structure::Node(l, r) => l.leaf_count() + r.leaf_count(),
            Structure::Bracket(inner) => inner.leaf_count(),
        }
    }

    /// Renders the structure with Unicode brackets and `·`.
    pub fn to_unicode(&self) -> String {
        match self {
            Structure::Leaf { var, formula } => format!("{var}:{}", formula.to_unicode()),
            Structure::Node(l, r) => format!("({} · {})", l.to_unicode(), r.to_unicode()),
            Structure::Bracket(inner) => format!("⟨{}⟩", inner.to_unicode()),
        }
    }
}

impl fmt::Display for Structure {
    /// Canonical ASCII form; re-parses to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Leaf { var, formula } => write!(f, "{var}:{formula}"),
            Structure::Node(l, r) => write!(f, "({l}, {r})"),
            Structure::Bracket(inner) => write!(f, "<{inner}>"),
        }
    }
}

/// Errors raised while parsing formulas, structures and sequents.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    /// The input does not follow the surface grammar.
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    /// An identifier in formula position is not a configured atom.
    #[error("unknown atom `{name}` at position {position}")]
    UnknownAtom { name: String, position: usize },
}

/// Errors raised while building a space configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    /// A dimension was zero.
    #[error("dimension of space {0} must be positive")]
    ZeroDimension(AtomicSpace),
    /// An atom was mapped to the spin space.
    #[error("atom `{0}` cannot live in the spin space")]
    SpinAtom(String),
    /// An atom name is not an identifier.
    #[error("atom name `{0}` is not an identifier")]
    BadAtomName(String),
    /// The atom set is empty.
    #[error("at least one atom must be configured")]
    NoAtoms,
    /// A metric has the wrong size.
    #[error("metric for space {space} must be {expected}x{expected}, got {actual}x{actual}")]
    MetricShape {
        space: AtomicSpace,
        expected: usize,
        actual: usize,
    },
    /// A metric is not Hermitian positive definite.
    #[error("metric for space {0} is not symmetric positive definite")]
    MetricNotPositive(AtomicSpace),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    Backslash,
    Slash,
    Dia,
    BoxOp,
    Lt,
    Gt,
    Comma,
    Colon,
    Turnstile,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::LParen => write!(f, "`(`"),
            Token::RParen => write!(f, "`)`"),
            Token::Backslash => write!(f, "`\\`"),
            Token::Slash => write!(f, "`/`"),
            Token::Dia => write!(f, "`<>`"),
            Token::BoxOp => write!(f, "`[]`"),
            Token::Lt => write!(f, "`<`"),
            Token::Gt => write!(f, "`>`"),
            Token::Comma => write!(f, "`,`"),
            Token::Colon => write!(f, "`:`"),
            Token::Turnstile => write!(f, "`|-`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Whether `s` is a valid identifier of the surface syntax.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let err = |message: &str| ParseError::Syntax {
            position: start,
            message: message.to_string(),
        };
        let token = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Token::LParen,
            ')' => Token::RParen,
            '\\' => Token::Backslash,
            '/' => Token::Slash,
            ',' => Token::Comma,
            ':' => Token::Colon,
            '◇' => Token::Dia,
            '□' => Token::BoxOp,
            '⟨' => Token::Lt,
            '⟩' => Token::Gt,
            '⊢' => Token::Turnstile,
            '>' => Token::Gt,
            '<' => {
                if chars.get(i + 1) == Some(&'>') {
                    i += 1;
                    Token::Dia
                } else {
                    Token::Lt
                }
            }
            '[' => {
                if chars.get(i + 1) == Some(&']') {
                    i += 1;
                    Token::BoxOp
                } else {
                    return Err(err("expected `[]`"));
                }
            }
            '|' => {
                if chars.get(i + 1) == Some(&'-') {
                    i += 1;
                    Token::Turnstile
                } else {
                    return Err(err("expected `|-`"));
                }
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let ident: String = chars[i..j].iter().collect();
                i = j;
                out.push((start, Token::Ident(ident)));
                continue;
            }
            other => return Err(err(&format!("unexpected character `{other}`"))),
        };
        i += 1;
        out.push((start, token));
    }
    Ok(out)
}

/// What a structure parser does with a bare identifier or `name:formula`
/// in leaf position.
type LeafHandler<'h> =
    dyn FnMut(&str, Option<Formula>, usize) -> Result<Structure, ParseError> + 'h;

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    atoms: &'a AtomSet,
}

impl<'a> Parser<'a> {
    fn new(text: &str, atoms: &'a AtomSet) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
            end: text.chars().count(),
            atoms,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position: self.position(),
            message: message.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, token: Token, wanted: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.operand()?;
        let result = match self.peek() {
            Some(Token::Backslash) => {
                self.pos += 1;
                Formula::left_div(left, self.operand()?)
            }
            Some(Token::Slash) => {
                self.pos += 1;
                Formula::right_div(left, self.operand()?)
            }
            _ => return Ok(left),
        };
        if matches!(self.peek(), Some(Token::Backslash | Token::Slash)) {
            return Err(self.error("nested implications must be parenthesised"));
        }
        Ok(result)
    }

    fn operand(&mut self) -> Result<Formula, ParseError> {
        let position = self.position();
        match self.peek().cloned() {
            Some(Token::Dia) => {
                self.pos += 1;
                Ok(Formula::dia(self.operand()?))
            }
            Some(Token::BoxOp) => {
                self.pos += 1;
                Ok(Formula::boxed(self.operand()?))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if self.atoms.contains(&name) {
                    Ok(Formula::Atom(name))
                } else {
                    Err(ParseError::UnknownAtom { name, position })
                }
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn structure(&mut self, leaf: &mut LeafHandler<'_>) -> Result<Structure, ParseError> {
        let position = self.position();
        match self.peek().cloned() {
            Some(Token::LParen) => {
                self.pos += 1;
                let left = self.structure(leaf)?;
                self.expect(Token::Comma, "`,`")?;
                let right = self.structure(leaf)?;
                self.expect(Token::RParen, "`)`")?;
                Ok(Structure::node(left, right))
            }
            Some(Token::Lt) => {
                self.pos += 1;
                let inner = self.structure(leaf)?;
                self.expect(Token::Gt, "`>`")?;
                Ok(Structure::bracket(inner))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let formula = if self.peek() == Some(&Token::Colon) {
                    self.pos += 1;
                    Some(self.formula()?)
                } else {
                    None
                };
                leaf(&name, formula, position)
            }
            _ => Err(self.unexpected("a structure")),
        }
    }
}

fn typed_leaf(
    name: &str,
    formula: Option<Formula>,
    position: usize,
) -> Result<Structure, ParseError> {
    match formula {
        Some(formula) => Ok(Structure::leaf(name, formula)),
        None => Err(ParseError::Syntax {
            position,
            message: format!("leaf `{name}` needs a type annotation `{name}:A`"),
        }),
    }
}

/// Parses a formula in the surface syntax.
///
/// ```
/// use lambek::syntax::{parse_formula, AtomSet, Formula};
/// let f = parse_formula("np\\(np\\s)", &AtomSet::default()).unwrap();
/// assert_eq!(f.to_string(), "np\\(np\\s)");
/// ```
pub fn parse_formula(text: &str, atoms: &AtomSet) -> Result<Formula, ParseError> {
    let mut parser = Parser::new(text, atoms)?;
    let f = parser.formula()?;
    parser.finish()?;
    Ok(f)
}

/// Parses a structure whose leaves are written `var:formula`.
pub fn parse_structure(text: &str, atoms: &AtomSet) -> Result<Structure, ParseError> {
    let mut parser = Parser::new(text, atoms)?;
    let s = parser.structure(&mut typed_leaf)?;
    parser.finish()?;
    Ok(s)
}

/// Parses a structure whose leaves are bare identifiers, resolving each
/// one through `leaf`. Used for word-level bracketings such as
/// `(man, (die, ((de, hond), bijt)))`.
pub fn parse_structure_with<F>(
    text: &str,
    atoms: &AtomSet,
    mut leaf: F,
) -> Result<Structure, ParseError>
where
    F: FnMut(&str, usize) -> Result<Structure, ParseError>,
{
    let mut parser = Parser::new(text, atoms)?;
    let mut handler = |name: &str, formula: Option<Formula>, position: usize| match formula {
        None => leaf(name, position),
        Some(_) => Err(ParseError::Syntax {
            position,
            message: "type annotations are not allowed here".to_string(),
        }),
    };
    let s = parser.structure(&mut handler)?;
    parser.finish()?;
    Ok(s)
}

/// Parses a sequent `Γ |- A`.
pub fn parse_sequent(text: &str, atoms: &AtomSet) -> Result<(Structure, Formula), ParseError> {
    let mut parser = Parser::new(text, atoms)?;
    let s = parser.structure(&mut typed_leaf)?;
    parser.expect(Token::Turnstile, "`|-`")?;
    let f = parser.formula()?;
    parser.finish()?;
    Ok((s, f))
}

/// One tensor factor of a space signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    /// The atomic space.
    pub space: AtomicSpace,
    /// Whether this is the dual copy.
    pub dual: bool,
}

impl Factor {
    /// A non-dual factor.
    pub fn plain(space: AtomicSpace) -> Self {
        Factor { space, dual: false }
    }

    /// A dual factor.
    pub fn dual(space: AtomicSpace) -> Self {
        Factor { space, dual: true }
    }

    /// The same space with the dual flag flipped.
    pub fn flipped(self) -> Self {
        Factor {
            space: self.space,
            dual: !self.dual,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.space, if self.dual { "*" } else { "" })
    }
}

/// An ordered tensor product of atomic (density-matrix) spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SpaceSignature {
    /// The factors, outermost first.
    pub factors: Vec<Factor>,
}

impl SpaceSignature {
    /// Wraps a factor list.
    pub fn new(factors: Vec<Factor>) -> Self {
        SpaceSignature { factors }
    }

    /// The dual space: reversed order with every dual flag flipped, so that
    /// `(A ⊗ B)* = B* ⊗ A*`.
    pub fn dual(&self) -> Self {
        SpaceSignature {
            factors: self.factors.iter().rev().map(|f| f.flipped()).collect(),
        }
    }

    /// Concatenation.
    pub fn concat(mut self, other: SpaceSignature) -> Self {
        self.factors.extend(other.factors);
        self
    }

    /// Number of factors.
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    /// Whether there are no factors.
    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Per-factor dimensions under `cfg`.
    pub fn dims(&self, cfg: &SpaceConfig) -> Vec<usize> {
        self.factors.iter().map(|f| cfg.dim(f.space)).collect()
    }

    /// Dimension of the underlying vector space (the operator acting on it
    /// is `dimension × dimension`).
    pub fn dimension(&self, cfg: &SpaceConfig) -> usize {
        self.dims(cfg).iter().product()
    }
}

impl fmt::Display for SpaceSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(Factor::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Dimensions, atoms and metrics of the interpretation spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceConfig {
    /// Dimension of N.
    pub dim_n: usize,
    /// Dimension of S.
    pub dim_s: usize,
    /// Number of spin levels (maximum extraction count plus one).
    pub spin_levels: usize,
    /// The atomic types.
    pub atoms: AtomSet,
    metrics: BTreeMap<AtomicSpace, Matrix>,
}

impl Default for SpaceConfig {
    /// Two-dimensional noun and sentence spaces with a two-level spin
    /// space and the default atoms.
    fn default() -> Self {
        SpaceConfig {
            dim_n: 2,
            dim_s: 2,
            spin_levels: 2,
            atoms: AtomSet::default(),
            metrics: BTreeMap::new(),
        }
    }
}

impl SpaceConfig {
    /// A configuration with identity metrics.
    pub fn new(
        dim_n: usize,
        dim_s: usize,
        spin_levels: usize,
        atoms: AtomSet,
    ) -> Result<Self, ConfigError> {
        for (space, dim) in [
            (AtomicSpace::N, dim_n),
            (AtomicSpace::S, dim_s),
            (AtomicSpace::Spin, spin_levels),
        ] {
            if dim == 0 {
                return Err(ConfigError::ZeroDimension(space));
            }
        }
        Ok(SpaceConfig {
            dim_n,
            dim_s,
            spin_levels,
            atoms,
            metrics: BTreeMap::new(),
        })
    }

    /// Installs a non-identity metric for one atomic space. The metric must
    /// be Hermitian positive definite of the space's dimension.
    pub fn with_metric(mut self, space: AtomicSpace, metric: Matrix) -> Result<Self, ConfigError> {
        let expected = self.dim(space);
        if metric.dim() != expected {
            return Err(ConfigError::MetricShape {
                space,
                expected,
                actual: metric.dim(),
            });
        }
        let positive = metric.hermitian_defect() < 1e-10
            && metric
                .eigh()
                .map(|(vals, _)| vals[0] > 1e-12)
                .unwrap_or(false);
        if !positive {
            return Err(ConfigError::MetricNotPositive(space));
        }
        self.metrics.insert(space, metric);
        Ok(self)
    }

    /// Dimension of an atomic space.
    pub fn dim(&self, space: AtomicSpace) -> usize {
        match space {
            AtomicSpace::N => self.dim_n,
            AtomicSpace::S => self.dim_s,
            AtomicSpace::Spin => self.spin_levels,
        }
    }

    /// The metric of an atomic space, or `None` for the identity.
    pub fn metric(&self, space: AtomicSpace) -> Option<&Matrix> {
        self.metrics.get(&space)
    }

    /// Whether every metric is the identity.
    pub fn has_identity_metric(&self) -> bool {
        self.metrics.is_empty()
    }
}

fn atom_space(name: &str, atoms: &AtomSet) -> AtomicSpace {
    // Formulas are validated against the atom set when parsed; atoms built
    // programmatically that are not in the set default to the noun space.
    atoms.space_of(name).unwrap_or(AtomicSpace::N)
}

/// The spatial interpretation space ⌈A⌉, including the `Spin ⊗ Spin*`
/// factors contributed by each modality.
pub fn spatial_signature(f: &Formula, cfg: &SpaceConfig) -> SpaceSignature {
    signature(f, cfg, true)
}

/// The full interpretation space ⌊A⌋ = ⌈A⌉ ⊗ Spin.
pub fn full_signature(f: &Formula, cfg: &SpaceConfig) -> SpaceSignature {
    let mut sig = spatial_signature(f, cfg);
    sig.factors.push(Factor::plain(AtomicSpace::Spin));
    sig
}

/// The factors that carry lexical spatial data: ⌈A⌉ without the modal
/// `Spin ⊗ Spin*` pairs. Those pairs are realised by the configured spin
/// operators rather than stored, so `⌈◇□A⌉` and `⌈A⌉` share a carrier.
pub fn carrier_signature(f: &Formula, cfg: &SpaceConfig) -> SpaceSignature {
    signature(f, cfg, false)
}

fn signature(f: &Formula, cfg: &SpaceConfig, modal_factors: bool) -> SpaceSignature {
    match f {
        Formula::Atom(name) => {
            SpaceSignature::new(vec![Factor::plain(atom_space(name, &cfg.atoms))])
        }
        Formula::RightDiv(b, a) => {
            signature(b, cfg, modal_factors).concat(signature(a, cfg, modal_factors).dual())
        }
        Formula::LeftDiv(a, b) => {
            signature(a, cfg, modal_factors)
                .dual()
                .concat(signature(b, cfg, modal_factors))
        }
        Formula::Dia(a) | Formula::Box(a) => {
            let mut sig = signature(a, cfg, modal_factors);
            if modal_factors {
                sig.factors.push(Factor::plain(AtomicSpace::Spin));
                sig.factors.push(Factor::dual(AtomicSpace::Spin));
            }
            sig
        }
    }
}
