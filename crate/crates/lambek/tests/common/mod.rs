//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use lambek::deduction::{prove, Derivation, RuleTag, SearchBudget, Sequent};
use lambek::lambda::{extract_term, normalize, Term};
use lambek::lexicon::Lexicon;
use lambek::pipeline::{build_antecedent, leaf_names};
use lambek::sampling::{random_density, stream};
use lambek::semantics::{interpret, Assignment, Interpretation, LambdaMode};
use lambek::syntax::{carrier_signature, parse_formula, AtomSet, Formula, SpaceConfig, Structure};
use lambek::tensor::{LabeledTensor, Matrix, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// The relative clause phrase of the shipped lexicon.
pub const PHRASE: [&str; 5] = ["man", "die", "de", "hond", "bijt"];

/// The shipped Dutch lexicon.
pub fn dutch_lexicon() -> Lexicon {
    Lexicon::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/dutch.lex"))
        .expect("shipped lexicon loads")
}

/// The goal type `n`.
pub fn noun() -> Formula {
    Formula::atom("n")
}

/// One reading of the phrase, computed through the library pieces.
pub struct Reading {
    pub derivation: Derivation,
    pub term: Term,
    pub meaning: Interpretation,
}

/// Assignment of the lexical meanings to the leaf names of `words`.
pub fn lexical_assignment(lex: &Lexicon, words: &[&str]) -> Assignment {
    let mut g = Assignment::new();
    for (w, name) in words.iter().zip(leaf_names(words)) {
        g.insert(name, lex.get(w).expect("word in lexicon").meaning.clone());
    }
    g
}

/// Derivations, normal terms and meanings of the phrase at `max_comm`.
pub fn dutch_readings(lex: &Lexicon, max_comm: usize, mode: LambdaMode) -> Vec<Reading> {
    let ant = build_antecedent(&PHRASE, lex, None).expect("default bracketing");
    let outcome =
        prove(&ant, &noun(), &SearchBudget::with_max_comm(max_comm)).expect("search runs");
    let g = lexical_assignment(lex, &PHRASE);
    outcome
        .derivations
        .into_iter()
        .map(|d| {
            let term = normalize(&extract_term(&d));
            let meaning = interpret(&term, &g, &lex.space, &lex.spin, mode)
                .expect("reading is interpretable");
            Reading {
                derivation: d,
                term,
                meaning,
            }
        })
        .collect()
}

/// Entry of an operator at multi-indices (first index most significant,
/// every factor of dimension `d`).
pub fn at(m: &Matrix, d: usize, row: &[usize], col: &[usize]) -> C64 {
    let flat = |ix: &[usize]| ix.iter().fold(0, |acc, v| acc * d + v);
    m.get(flat(row), flat(col))
}

/// Brute-force index sum for the noun-phrase determiner block:
/// `H[j, j'] = Σ De[(j, a), (j', a')] · Hond[a', a]`.
fn determiner_block(de: &Matrix, hond: &Matrix, d: usize) -> Matrix {
    let mut h = Matrix::zeros(d);
    for j in 0..d {
        for jp in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                for ap in 0..d {
                    acc += at(de, d, &[j, a], &[jp, ap]) * hond.get(ap, a);
                }
            }
            h.set(j, jp, acc);
        }
    }
    h
}

/// Brute-force index sum for a relative clause reading. `object` selects
/// which of the verb's two contravariant noun slots the gap fills.
///
/// `result[t, t'] = Σ M[r, r'] · D[(r', t, m', n), (r, t', m, n')]
///                  · H[j, j'] · B[verb row, verb col]`
/// with verb indices `((j', n', m), (j, n, m'))` for the subject reading and
/// `((n', j', m), (n, j, m'))` for the object reading.
pub fn relative_clause_oracle(lex: &Lexicon, object: bool) -> Matrix {
    let d = lex.space.dim_n;
    assert_eq!(
        d, lex.space.dim_s,
        "oracle written for equal noun and sentence dimensions"
    );
    let op = |w: &str| lex.get(w).unwrap().meaning.spatial.op().clone();
    let (man, die, de, hond, bijt) = (op("man"), op("die"), op("de"), op("hond"), op("bijt"));
    let h = determiner_block(&de, &hond, d);
    let mut out = Matrix::zeros(d);
    for t in 0..d {
        for tp in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                for rp in 0..d {
                    for m in 0..d {
                        for mp in 0..d {
                            for n in 0..d {
                                for np in 0..d {
                                    let dm = at(&die, d, &[rp, t, mp, n], &[r, tp, m, np]);
                                    for j in 0..d {
                                        for jp in 0..d {
                                            let b = if object {
                                                at(&bijt, d, &[np, jp, m], &[n, j, mp])
                                            } else {
                                                at(&bijt, d, &[jp, np, m], &[j, n, mp])
                                            };
                                            acc += man.get(r, rp) * dm * h.get(j, jp) * b;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            out.set(t, tp, acc);
        }
    }
    out
}

/// Atoms used by the random generators.
pub const ATOMS: [&str; 3] = ["n", "np", "s"];

/// A random formula of depth at most `depth`.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return Formula::atom(ATOMS[rng.gen_range(0..ATOMS.len())]);
    }
    match rng.gen_range(0..4) {
        0 => Formula::left_div(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
        1 => Formula::right_div(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
        2 => Formula::dia(random_formula(rng, depth - 1)),
        _ => Formula::boxed(random_formula(rng, depth - 1)),
    }
}

/// Generates random valid derivations with fresh, linear variable names.
pub struct DerivationGen<'a> {
    rng: &'a mut ChaCha8Rng,
    next: usize,
}

impl<'a> DerivationGen<'a> {
    pub fn new(rng: &'a mut ChaCha8Rng) -> Self {
        DerivationGen { rng, next: 0 }
    }

    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("v{}", self.next)
    }

    /// A random derivation of some sequent with succedent `goal`.
    pub fn derive(&mut self, goal: &Formula, depth: usize) -> Derivation {
        if depth == 0 {
            return Derivation::axiom(&self.fresh(), goal);
        }
        match self.rng.gen_range(0..7) {
            0 => Derivation::axiom(&self.fresh(), goal),
            1 => {
                let a = random_formula(self.rng, 1);
                let f = self.derive(&Formula::right_div(goal.clone(), a.clone()), depth - 1);
                let x = self.derive(&a, depth - 1);
                let ant = Structure::node(
                    f.conclusion.antecedent.clone(),
                    x.conclusion.antecedent.clone(),
                );
                Derivation::new(RuleTag::ER, vec![f, x], Sequent::new(ant, goal.clone()))
            }
            2 => {
                let a = random_formula(self.rng, 1);
                let x = self.derive(&a, depth - 1);
                let f = self.derive(&Formula::left_div(a.clone(), goal.clone()), depth - 1);
                let ant = Structure::node(
                    x.conclusion.antecedent.clone(),
                    f.conclusion.antecedent.clone(),
                );
                Derivation::new(RuleTag::EL, vec![x, f], Sequent::new(ant, goal.clone()))
            }
            3 => match goal {
                // Eta-expansion: Γ ⊢ B/A from (Γ, x:A) ⊢ B.
                Formula::RightDiv(b, a) => {
                    let f = self.derive(goal, depth - 1);
                    let var = self.fresh();
                    let body_ant = Structure::node(
                        f.conclusion.antecedent.clone(),
                        Structure::leaf(&var, (**a).clone()),
                    );
                    let ant = f.conclusion.antecedent.clone();
                    let body = Derivation::new(
                        RuleTag::ER,
                        vec![f, Derivation::axiom(&var, a)],
                        Sequent::new(body_ant, (**b).clone()),
                    );
                    Derivation::new(
                        RuleTag::IR { var },
                        vec![body],
                        Sequent::new(ant, goal.clone()),
                    )
                }
                Formula::LeftDiv(a, b) => {
                    let f = self.derive(goal, depth - 1);
                    let var = self.fresh();
                    let body_ant = Structure::node(
                        Structure::leaf(&var, (**a).clone()),
                        f.conclusion.antecedent.clone(),
                    );
                    let ant = f.conclusion.antecedent.clone();
                    let body = Derivation::new(
                        RuleTag::EL,
                        vec![Derivation::axiom(&var, a), f],
                        Sequent::new(body_ant, (**b).clone()),
                    );
                    Derivation::new(
                        RuleTag::IL { var },
                        vec![body],
                        Sequent::new(ant, goal.clone()),
                    )
                }
                _ => self.derive(goal, depth - 1),
            },
            4 => match goal {
                // Γ ⊢ □A from <Γ> ⊢ A, itself from Γ ⊢ □A.
                Formula::Box(a) => {
                    let inner = self.derive(goal, depth - 1);
                    let ant = inner.conclusion.antecedent.clone();
                    let elim = Derivation::new(
                        RuleTag::EBox,
                        vec![inner],
                        Sequent::new(Structure::bracket(ant.clone()), (**a).clone()),
                    );
                    Derivation::new(RuleTag::IBox, vec![elim], Sequent::new(ant, goal.clone()))
                }
                _ => self.derive(goal, depth - 1),
            },
            5 => match goal {
                Formula::Dia(a) => {
                    let inner = self.derive(a, depth - 1);
                    let ant = Structure::bracket(inner.conclusion.antecedent.clone());
                    Derivation::new(RuleTag::IDia, vec![inner], Sequent::new(ant, goal.clone()))
                }
                _ => self.derive(goal, depth - 1),
            },
            _ => {
                let inner = self.derive(&Formula::boxed(goal.clone()), depth - 1);
                let ant = Structure::bracket(inner.conclusion.antecedent.clone());
                Derivation::new(RuleTag::EBox, vec![inner], Sequent::new(ant, goal.clone()))
            }
        }
    }
}

/// The default atom set, for parsing.
pub fn atoms() -> AtomSet {
    AtomSet::default()
}

/// The lexical program of the relative pronoun:
/// `λx.λy.λz.((y z) ∧ (x ∩∧z))`.
pub fn die_program() -> Term {
    let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
    Term::lam_r(
        "x",
        Term::lam_r(
            "y",
            Term::lam_r(
                "z",
                Term::and(
                    Term::app_r(y, z.clone()),
                    Term::app_r(x, Term::cap(Term::wedge(z))),
                ),
            ),
        ),
    )
}

pub fn random_entry(
    f: &Formula,
    space: &SpaceConfig,
    levels: usize,
    seed: u64,
    name: &str,
) -> Interpretation {
    let sig = carrier_signature(f, space);
    let spatial = random_density(sig.dimension(space), &mut stream(seed, &[name, "spatial"]));
    let spin = random_density(levels, &mut stream(seed, &[name, "spin"]));
    Interpretation::new(
        LabeledTensor::from_signature(&sig, space, spatial).unwrap(),
        spin,
    )
}

/// The two-argument redex `(w ▷ z) ▷ λˡx.(x ◁ y)` with `w, y : n`,
/// `z : n\(s/n)`, together with a random typed assignment.
pub fn two_argument_redex(space: &SpaceConfig, levels: usize) -> (Term, Assignment) {
    let atoms = AtomSet::default();
    let n = parse_formula("n", &atoms).unwrap();
    let z_ty = parse_formula(r"n\(s/n)", &atoms).unwrap();
    let x_ty = parse_formula("s/n", &atoms).unwrap();
    let term = Term::app_l(
        Term::app_l(Term::var("w"), Term::var("z")),
        Term::lam_l_typed("x", x_ty, Term::app_r(Term::var("x"), Term::var("y"))),
    );
    let mut g = Assignment::new();
    for (name, ty) in [("w", &n), ("z", &z_ty), ("y", &n)] {
        g.insert_typed(name, ty, random_entry(ty, space, levels, 4, name), space)
            .unwrap();
    }
    (term, g)
}
