//! Directional lambda terms.
//!
//! Proof terms distinguish left and right abstraction (`λˡ`, `λʳ`) and
//! application (`u ▷ t` applies `t` to a left argument `u`, `t ◁ u` to a
//! right argument), carry the four unary markers `∪ ∩ ∨ ∧` of the modal
//! rules, and a counter `ᶜⁿ` recording controlled commutations.
//!
//! Term equality throughout is alpha-equivalence ([`alpha_eq`]).

use std::collections::BTreeSet;
use std::fmt;

use crate::deduction::{Derivation, RuleTag};
use crate::syntax::Formula;

/// A directional lambda term.
///
/// Abstractions may carry the type of their bound variable; extracted
/// terms always do, and the semantics needs it to size the abstracted
/// space. Annotations are ignored by [`alpha_eq`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// A variable.
    Var(String),
    /// A constant of a lexical program.
    Const(String),
    /// `λʳx.t`.
    LamR {
        var: String,
        ty: Option<Formula>,
        body: Box<Term>,
    },
    /// `λˡx.t`.
    LamL {
        var: String,
        ty: Option<Formula>,
        body: Box<Term>,
    },
    /// `t ◁ u`: function first, argument second.
    AppR(Box<Term>, Box<Term>),
    /// `u ▷ t`: argument first, function second.
    AppL(Box<Term>, Box<Term>),
    /// `∪t`.
    Cup(Box<Term>),
    /// `∩t`.
    Cap(Box<Term>),
    /// `∨t`.
    Vee(Box<Term>),
    /// `∧t`.
    Wedge(Box<Term>),
    /// `ᶜⁿt` with `n ≥ 1`.
    Comm(Box<Term>, usize),
    /// The logical conjunction constant of lexical programs.
    And(Box<Term>, Box<Term>),
}

impl Term {
    /// A variable.
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    /// A constant.
    pub fn constant(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }

    /// `λʳx.body` without a type annotation.
    pub fn lam_r(var: impl Into<String>, body: Term) -> Term {
        Term::LamR {
            var: var.into(),
            ty: None,
            body: Box::new(body),
        }
    }

    /// `λˡx.body` without a type annotation.
    pub fn lam_l(var: impl Into<String>, body: Term) -> Term {
        Term::LamL {
            var: var.into(),
            ty: None,
            body: Box::new(body),
        }
    }

    /// `λʳx.body` with the bound variable typed `ty`.
    pub fn lam_r_typed(var: impl Into<String>, ty: Formula, body: Term) -> Term {
        Term::LamR {
            var: var.into(),
            ty: Some(ty),
            body: Box::new(body),
        }
    }

    /// `λˡx.body` with the bound variable typed `ty`.
    pub fn lam_l_typed(var: impl Into<String>, ty: Formula, body: Term) -> Term {
        Term::LamL {
            var: var.into(),
            ty: Some(ty),
            body: Box::new(body),
        }
    }

    /// `fun ◁ arg`.
    pub fn app_r(fun: Term, arg: Term) -> Term {
        Term::AppR(Box::new(fun), Box::new(arg))
    }

    /// `arg ▷ fun`.
    pub fn app_l(arg: Term, fun: Term) -> Term {
        Term::AppL(Box::new(arg), Box::new(fun))
    }

    /// `∪t`.
    pub fn cup(t: Term) -> Term {
        Term::Cup(Box::new(t))
    }

    /// `∩t`.
    pub fn cap(t: Term) -> Term {
        Term::Cap(Box::new(t))
    }

    /// `∨t`.
    pub fn vee(t: Term) -> Term {
        Term::Vee(Box::new(t))
    }

    /// `∧t`.
    pub fn wedge(t: Term) -> Term {
        Term::Wedge(Box::new(t))
    }

    /// `t ∧ u` (logical conjunction).
    pub fn and(t: Term, u: Term) -> Term {
        Term::And(Box::new(t), Box::new(u))
    }

    /// `ᶜⁿt`, with `ᶜ⁰t = t` and stacked counters merged.
    pub fn comm(t: Term, n: usize) -> Term {
        if n == 0 {
            return t;
        }
        match t {
            Term::Comm(inner, k) => Term::Comm(inner, k + n),
            other => Term::Comm(Box::new(other), n),
        }
    }

    /// Immediate subterms, left to right.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Const(_) => vec![],
            Term::LamR { body, .. } | Term::LamL { body, .. } => vec![body],
            Term::AppR(a, b) | Term::AppL(a, b) | Term::And(a, b) => vec![a, b],
            Term::Cup(t) | Term::Cap(t) | Term::Vee(t) | Term::Wedge(t) | Term::Comm(t, _) => {
                vec![t]
            }
        }
    }

    /// Free variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Const(_) => {}
            Term::LamR { var, body, .. } | Term::LamL { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Every variable name occurring in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::LamR { var, body, .. } | Term::LamL { var, body, .. } => {
                out.insert(var.clone());
                body.collect_names(out);
            }
            _ => {
                for c in self.children() {
                    c.collect_names(out);
                }
            }
        }
    }

    /// Number of free occurrences of `x`.
    pub fn occurrences(&self, x: &str) -> usize {
        match self {
            Term::Var(y) => usize::from(y == x),
            Term::Const(_) => 0,
            Term::LamR { var, body, .. } | Term::LamL { var, body, .. } => {
                if var == x {
                    0
                } else {
                    body.occurrences(x)
                }
            }
            _ => self.children().iter().map(|c| c.occurrences(x)).sum(),
        }
    }

    /// Whether every bound variable occurs exactly once in its scope and
    /// every free variable exactly once overall.
    pub fn is_linear(&self) -> bool {
        self.free_vars().iter().all(|x| self.occurrences(x) == 1) && self.binders_linear()
    }

    fn binders_linear(&self) -> bool {
        match self {
            Term::LamR { var, body, .. } | Term::LamL { var, body, .. } => {
                body.occurrences(var) == 1 && body.binders_linear()
            }
            _ => self.children().iter().all(|c| c.binders_linear()),
        }
    }

    /// Total of all commutation counters.
    pub fn comm_count(&self) -> usize {
        let own = if let Term::Comm(_, n) = self { *n } else { 0 };
        own + self
            .children()
            .iter()
            .map(|c| c.comm_count())
            .sum::<usize>()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Renders with ASCII notation: `\l x.t`, `\r x.t`, `(u |> t)`,
    /// `(t <| u)`, `cup`, `cap`, `vee`, `wedge`, `c^n`, `&`.
    pub fn to_ascii(&self) -> String {
        render(self, false)
    }
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn superscript(n: usize) -> String {
    n.to_string()
        .chars()
        .map(|d| SUPERSCRIPTS[d.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

fn render(t: &Term, unicode: bool) -> String {
    let operand = |u: &Term| match u {
        Term::LamR { .. } | Term::LamL { .. } => format!("({})", render(u, unicode)),
        _ => render(u, unicode),
    };
    let prefix = |sym: &str, word: &str, u: &Term| {
        if unicode {
            format!("{sym}{}", operand(u))
        } else {
            format!("{word} {}", operand(u))
        }
    };
    match t {
        Term::Var(x) | Term::Const(x) => x.clone(),
        Term::LamR { var, body, .. } => {
            if unicode {
                format!("λʳ{var}.{}", render(body, unicode))
            } else {
                format!("\\r {var}.{}", render(body, unicode))
            }
        }
        Term::LamL { var, body, .. } => {
            if unicode {
                format!("λˡ{var}.{}", render(body, unicode))
            } else {
                format!("\\l {var}.{}", render(body, unicode))
            }
        }
        Term::AppR(f, a) => format!(
            "({} {} {})",
            operand(f),
            if unicode { "◁" } else { "<|" },
            operand(a)
        ),
        Term::AppL(a, f) => format!(
            "({} {} {})",
            operand(a),
            if unicode { "▷" } else { "|>" },
            operand(f)
        ),
        Term::Cup(u) => prefix("∪", "cup", u),
        Term::Cap(u) => prefix("∩", "cap", u),
        Term::Vee(u) => prefix("∨", "vee", u),
        Term::Wedge(u) => prefix("∧", "wedge", u),
        Term::Comm(u, n) => {
            if unicode {
                format!("ᶜ{}{}", superscript(*n), operand(u))
            } else {
                format!("c^{n} {}", operand(u))
            }
        }
        Term::And(a, b) => format!(
            "({} {} {})",
            operand(a),
            if unicode { "∧" } else { "&" },
            operand(b)
        ),
    }
}

impl fmt::Display for Term {
    /// Unicode notation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, true))
    }
}

/// A name based on `base` that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}{k}"))
        .find(|candidate| !avoid.contains(candidate))
        .expect("an unbounded range always yields a fresh name")
}

/// Capture-avoiding substitution `t[x := u]`.
pub fn substitute(t: &Term, x: &str, u: &Term) -> Term {
    let fv_u = u.free_vars();
    subst(t, x, u, &fv_u)
}

fn subst(t: &Term, x: &str, u: &Term, fv_u: &BTreeSet<String>) -> Term {
    let rec = |s: &Term| Box::new(subst(s, x, u, fv_u));
    match t {
        Term::Var(y) if y == x => u.clone(),
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::LamR { var, ty, body } | Term::LamL { var, ty, body } => {
            let left = matches!(t, Term::LamL { .. });
            let rebuild = |var: String, body: Term| {
                if left {
                    Term::LamL {
                        var,
                        ty: ty.clone(),
                        body: Box::new(body),
                    }
                } else {
                    Term::LamR {
                        var,
                        ty: ty.clone(),
                        body: Box::new(body),
                    }
                }
            };
            if var == x || body.occurrences(x) == 0 {
                return t.clone();
            }
            if fv_u.contains(var) {
                let mut avoid = fv_u.clone();
                avoid.extend(body.all_names());
                avoid.insert(x.to_string());
                let renamed = fresh_name(var, &avoid);
                let body = substitute(body, var, &Term::Var(renamed.clone()));
                rebuild(renamed, subst(&body, x, u, fv_u))
            } else {
                rebuild(var.clone(), subst(body, x, u, fv_u))
            }
        }
        Term::AppR(a, b) => Term::AppR(rec(a), rec(b)),
        Term::AppL(a, b) => Term::AppL(rec(a), rec(b)),
        Term::And(a, b) => Term::And(rec(a), rec(b)),
        Term::Cup(s) => Term::Cup(rec(s)),
        Term::Cap(s) => Term::Cap(rec(s)),
        Term::Vee(s) => Term::Vee(rec(s)),
        Term::Wedge(s) => Term::Wedge(rec(s)),
        Term::Comm(s, n) => Term::comm(subst(s, x, u, fv_u), *n),
    }
}

/// Simultaneous substitution of several free variables.
pub fn instantiate(t: &Term, bindings: &[(&str, Term)]) -> Term {
    // Rename targets to placeholders first so that the substitutions do not
    // interfere with each other.
    let mut avoid = t.all_names();
    for (_, u) in bindings {
        avoid.extend(u.all_names());
    }
    let mut staged = t.clone();
    let mut placeholders = Vec::new();
    for (x, _) in bindings {
        let p = fresh_name(&format!("{x}_"), &avoid);
        avoid.insert(p.clone());
        staged = substitute(&staged, x, &Term::Var(p.clone()));
        placeholders.push(p);
    }
    for (p, (_, u)) in placeholders.iter().zip(bindings) {
        staged = substitute(&staged, p, u);
    }
    staged
}

/// If `t` is itself a redex, its one-step contractum.
///
/// Redexes are `(u ▷ λˡx.t)`, `(λʳx.t ◁ u)`, `∪∩t`, `∨∧t`, stacked
/// counters, and — for lexical programs written without direction — the
/// mismatched applications `(λˡx.t ◁ u)` and `(u ▷ λʳx.t)`, which never
/// arise from typed derivations.
pub fn contract_redex(t: &Term) -> Option<Term> {
    match t {
        Term::AppL(arg, fun) => match fun.as_ref() {
            Term::LamL { var, body, .. } | Term::LamR { var, body, .. } => {
                Some(substitute(body, var, arg))
            }
            _ => None,
        },
        Term::AppR(fun, arg) => match fun.as_ref() {
            Term::LamR { var, body, .. } | Term::LamL { var, body, .. } => {
                Some(substitute(body, var, arg))
            }
            _ => None,
        },
        Term::Cup(inner) => match inner.as_ref() {
            Term::Cap(u) => Some((**u).clone()),
            _ => None,
        },
        Term::Vee(inner) => match inner.as_ref() {
            Term::Wedge(u) => Some((**u).clone()),
            _ => None,
        },
        Term::Comm(inner, n) => match inner.as_ref() {
            Term::Comm(u, k) => Some(Term::Comm(u.clone(), n + k)),
            _ => None,
        },
        _ => None,
    }
}

/// Whether `t` is a beta redex (an application of an abstraction).
pub fn is_beta_redex(t: &Term) -> bool {
    match t {
        Term::AppL(_, fun) | Term::AppR(fun, _) => {
            matches!(fun.as_ref(), Term::LamL { .. } | Term::LamR { .. })
        }
        _ => false,
    }
}

/// Paths (child indices from the root) of every beta redex, outermost first.
pub fn beta_redex_paths(t: &Term) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    collect_redexes(t, &mut Vec::new(), &mut out);
    out
}

fn collect_redexes(t: &Term, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if is_beta_redex(t) {
        out.push(prefix.clone());
    }
    for (i, c) in t.children().into_iter().enumerate() {
        prefix.push(i);
        collect_redexes(c, prefix, out);
        prefix.pop();
    }
}

/// The subterm at a path of child indices.
pub fn subterm<'a>(t: &'a Term, path: &[usize]) -> Option<&'a Term> {
    match path.split_first() {
        None => Some(t),
        Some((&i, rest)) => subterm(t.children().get(i)?, rest),
    }
}

/// Replaces the subterm at `path` (no capture checks: the replacement
/// must have the same free variables, as a contractum does).
pub fn replace_subterm(t: &Term, path: &[usize], with: Term) -> Option<Term> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(with);
    };
    let child = |k: usize, c: &Term| -> Option<Box<Term>> {
        if k == i {
            Some(Box::new(replace_subterm(c, rest, with.clone())?))
        } else {
            Some(Box::new(c.clone()))
        }
    };
    Some(match t {
        Term::Var(_) | Term::Const(_) => return None,
        Term::LamR { var, ty, body } => Term::LamR {
            var: var.clone(),
            ty: ty.clone(),
            body: child(0, body)?,
        },
        Term::LamL { var, ty, body } => Term::LamL {
            var: var.clone(),
            ty: ty.clone(),
            body: child(0, body)?,
        },
        Term::AppR(a, b) => Term::AppR(child(0, a)?, child(1, b)?),
        Term::AppL(a, b) => Term::AppL(child(0, a)?, child(1, b)?),
        Term::And(a, b) => Term::And(child(0, a)?, child(1, b)?),
        Term::Cup(s) => Term::Cup(child(0, s)?),
        Term::Cap(s) => Term::Cap(child(0, s)?),
        Term::Vee(s) => Term::Vee(child(0, s)?),
        Term::Wedge(s) => Term::Wedge(child(0, s)?),
        Term::Comm(s, n) => Term::Comm(child(0, s)?, *n),
    })
}

/// Normal form under beta (both directions), `∪∩` and `∨∧` cancellation and
/// counter merging. Reduction is leftmost-outermost, which reaches the
/// normal form whenever one exists.
pub fn normalize(t: &Term) -> Term {
    let mut current = t.clone();
    while let Some(next) = step(&current) {
        current = next;
    }
    current
}

/// One leftmost-outermost reduction step, if any redex exists.
pub fn step(t: &Term) -> Option<Term> {
    if let Some(c) = contract_redex(t) {
        return Some(c);
    }
    let children = t.children();
    for (i, c) in children.iter().enumerate() {
        if let Some(reduced) = step(c) {
            return replace_subterm(t, &[i], reduced);
        }
    }
    None
}

/// Forgets directions and commutation counters: `u ▷ t` becomes `t ◁ u`,
/// `λˡ` becomes `λʳ`, `ᶜⁿt` becomes `t`. Used to compare with
/// non-directional lexical semantics.
pub fn erase_directions(t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::LamR { var, body, .. } | Term::LamL { var, body, .. } => {
            Term::lam_r(var.clone(), erase_directions(body))
        }
        Term::AppR(f, a) | Term::AppL(a, f) => {
            Term::app_r(erase_directions(f), erase_directions(a))
        }
        Term::And(a, b) => Term::and(erase_directions(a), erase_directions(b)),
        Term::Cup(s) => Term::cup(erase_directions(s)),
        Term::Cap(s) => Term::cap(erase_directions(s)),
        Term::Vee(s) => Term::vee(erase_directions(s)),
        Term::Wedge(s) => Term::wedge(erase_directions(s)),
        Term::Comm(s, _) => erase_directions(s),
    }
}

/// Canonical form with bound variables renamed by binding depth and type
/// annotations dropped; two terms are alpha-equivalent iff their canonical
/// forms are equal.
pub fn canonical(t: &Term) -> Term {
    canon(t, &mut Vec::new())
}

fn canon(t: &Term, bound: &mut Vec<String>) -> Term {
    let name_of = |x: &str, bound: &Vec<String>| match bound.iter().rposition(|b| b == x) {
        Some(level) => format!("#{level}"),
        None => x.to_string(),
    };
    match t {
        Term::Var(x) => Term::Var(name_of(x, bound)),
        Term::Const(_) => t.clone(),
        Term::LamR { var, body, .. } | Term::LamL { var, body, .. } => {
            let level = format!("#{}", bound.len());
            bound.push(var.clone());
            let body = canon(body, bound);
            bound.pop();
            if matches!(t, Term::LamL { .. }) {
                Term::lam_l(level, body)
            } else {
                Term::lam_r(level, body)
            }
        }
        Term::AppR(a, b) => Term::app_r(canon(a, bound), canon(b, bound)),
        Term::AppL(a, b) => Term::app_l(canon(a, bound), canon(b, bound)),
        Term::And(a, b) => Term::and(canon(a, bound), canon(b, bound)),
        Term::Cup(s) => Term::cup(canon(s, bound)),
        Term::Cap(s) => Term::cap(canon(s, bound)),
        Term::Vee(s) => Term::vee(canon(s, bound)),
        Term::Wedge(s) => Term::wedge(canon(s, bound)),
        Term::Comm(s, n) => Term::comm(canon(s, bound), *n),
    }
}

/// Alpha-equivalence (type annotations ignored).
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    canonical(a) == canonical(b)
}

/// The Curry–Howard term of a derivation.
///
/// Each rule contributes its term former; diamond elimination substitutes
/// `∪t` for the bracketed hypothesis, controlled commutation adds one to
/// the counter, associativity leaves the term alone, and the compiled
/// extraction rule yields `λˡx.ᶜⁿt[∨∪x/y]`.
pub fn extract_term(d: &Derivation) -> Term {
    let sub = |i: usize| extract_term(&d.premises[i]);
    match &d.rule {
        RuleTag::Ax => match &d.conclusion.antecedent {
            crate::syntax::Structure::Leaf { var, .. } => Term::Var(var.clone()),
            _ => Term::Var(String::from("?")),
        },
        RuleTag::ER => Term::app_r(sub(0), sub(1)),
        RuleTag::EL => Term::app_l(sub(0), sub(1)),
        RuleTag::IR { var } => {
            let ty = match &d.conclusion.succedent {
                Formula::RightDiv(_, a) => Some((**a).clone()),
                _ => None,
            };
            Term::LamR {
                var: var.clone(),
                ty,
                body: Box::new(sub(0)),
            }
        }
        RuleTag::IL { var } => {
            let ty = match &d.conclusion.succedent {
                Formula::LeftDiv(a, _) => Some((**a).clone()),
                _ => None,
            };
            Term::LamL {
                var: var.clone(),
                ty,
                body: Box::new(sub(0)),
            }
        }
        RuleTag::EBox => Term::vee(sub(0)),
        RuleTag::IBox => Term::wedge(sub(0)),
        RuleTag::IDia => Term::cap(sub(0)),
        RuleTag::EDia { var } => substitute(&sub(1), var, &Term::cup(sub(0))),
        RuleTag::AssDia => sub(0),
        RuleTag::CommDia => Term::comm(sub(0), 1),
        RuleTag::XLeft { n, hyp, bound } => {
            let ty = match &d.conclusion.succedent {
                Formula::LeftDiv(a, _) => Some((**a).clone()),
                _ => None,
            };
            let body = Term::comm(sub(0), *n);
            let hole = Term::vee(Term::cup(Term::Var(bound.clone())));
            Term::LamL {
                var: bound.clone(),
                ty,
                body: Box::new(substitute(&body, hyp, &hole)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    #[test]
    fn substitution_examples() {
        let t = Term::app_l(v("x"), v("z"));
        let hole = Term::vee(Term::cup(v("x1")));
        assert_eq!(
            substitute(&t, "x", &hole),
            Term::app_l(hole.clone(), v("z"))
        );
        assert_eq!(substitute(&v("x"), "x", &v("u")), v("u"));
        let t = Term::lam_l("x", Term::app_r(v("x"), v("y")));
        assert_eq!(
            substitute(&t, "y", &v("w")),
            Term::lam_l("x", Term::app_r(v("x"), v("w")))
        );
    }

    #[test]
    fn substitution_avoids_capture() {
        let t = Term::lam_l("x", Term::app_r(v("x"), v("y")));
        let out = substitute(&t, "y", &v("x"));
        match &out {
            Term::LamL { var, body, .. } => {
                assert_ne!(var, "x");
                assert_eq!(**body, Term::app_r(v(var), v("x")));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn normalisation_examples() {
        let redex = Term::app_l(
            Term::app_l(v("w"), v("z")),
            Term::lam_l("x", Term::app_r(v("x"), v("y"))),
        );
        assert_eq!(
            normalize(&redex),
            Term::app_r(Term::app_l(v("w"), v("z")), v("y"))
        );
        assert_eq!(normalize(&Term::vee(Term::wedge(v("z")))), v("z"));
        assert_eq!(normalize(&Term::cup(Term::cap(v("z")))), v("z"));
        let stacked = Term::Comm(Box::new(Term::Comm(Box::new(v("t")), 1)), 2);
        assert_eq!(normalize(&stacked), Term::Comm(Box::new(v("t")), 3));
    }

    #[test]
    fn printing() {
        let t = Term::lam_l(
            "x1",
            Term::comm(Term::app_l(Term::vee(Term::cup(v("x1"))), v("z2")), 1),
        );
        assert_eq!(t.to_string(), "λˡx1.ᶜ¹(∨∪x1 ▷ z2)");
        assert_eq!(t.to_ascii(), "\\l x1.c^1 (vee cup x1 |> z2)");
    }

    #[test]
    fn alpha_equivalence() {
        let a = Term::lam_r("x", Term::app_r(v("f"), v("x")));
        let b = Term::lam_r("y", Term::app_r(v("f"), v("y")));
        let c = Term::lam_l("y", Term::app_r(v("f"), v("y")));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
        assert!(!alpha_eq(
            &a,
            &Term::lam_r("y", Term::app_r(v("g"), v("y")))
        ));
    }

    #[test]
    fn linearity() {
        assert!(Term::lam_l("x", Term::app_l(v("x"), v("f"))).is_linear());
        assert!(!Term::lam_l("x", Term::app_l(v("x"), v("x"))).is_linear());
        assert!(!Term::lam_l("x", v("f")).is_linear());
    }

    #[test]
    fn instantiate_is_simultaneous() {
        let t = Term::app_r(v("a"), v("b"));
        let out = instantiate(&t, &[("a", v("b")), ("b", v("a"))]);
        assert_eq!(out, Term::app_r(v("b"), v("a")));
    }
}
