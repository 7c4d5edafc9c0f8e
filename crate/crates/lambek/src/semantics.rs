//! Interpretation of proof terms in density matrices with a spin register.
//!
//! A meaning is a pair of a spatial density tensor, whose slots follow the
//! spatial signature of its type, and a spin density matrix. Application
//! contracts the argument's slots with the function's argument block
//! (mirrored factor by factor, as dual spaces list their factors in reverse)
//! and combines spins by the phaser `u^{1/2} t u^{1/2} / Tr`, with the
//! argument as the measuring operator. The modal term formers act on the
//! spin only, and a commutation counter raises the spin that many rungs.
//!
//! Abstraction has two interchangeable implementations ([`LambdaMode`]):
//! an explicit sum over basis elements of the abstracted space, and a
//! lazy form that threads a cap tensor through the body and reorders its
//! open slots at the binder.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lambda::{beta_redex_paths, contract_redex, replace_subterm, subterm, Term};
use crate::sampling::{random_density, stream};
use crate::spin::{
    evolve_dia, intro_box, intro_dia, project_box, raise, SpinError, SpinOperatorConfig,
};
use crate::syntax::{carrier_signature, Formula, SpaceConfig, SpaceSignature};
use crate::tensor::{contract_with_metric, star, LabeledTensor, Matrix, Slot, TensorError, C64};

/// The meaning of a term: spatial tensor and spin state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    /// Spatial density tensor.
    pub spatial: LabeledTensor,
    /// Spin density matrix.
    pub spin: Matrix,
}

impl Interpretation {
    /// Pairs a spatial tensor with a spin state.
    pub fn new(spatial: LabeledTensor, spin: Matrix) -> Self {
        Interpretation { spatial, spin }
    }

    /// Largest entry-wise deviation of the spatial parts.
    pub fn spatial_deviation(&self, other: &Interpretation) -> f64 {
        self.spatial.max_abs_diff(&other.spatial)
    }

    /// Largest entry-wise deviation of the spin parts.
    pub fn spin_deviation(&self, other: &Interpretation) -> f64 {
        if self.spin.dim() != other.spin.dim() {
            return f64::INFINITY;
        }
        self.spin.max_abs_diff(&other.spin)
    }
}

/// Errors raised while interpreting a term. Paths list child indices from
/// the root of the term.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    /// A variable has no value.
    #[error("variable `{name}` at {path:?} is not assigned")]
    Unbound { name: String, path: Vec<usize> },
    /// Slots that must be contracted do not match.
    #[error("signature mismatch at {path:?}: {detail}")]
    SignatureMismatch { path: Vec<usize>, detail: String },
    /// A spin operation failed.
    #[error("spin operation failed at {path:?}: {source}")]
    Spin { path: Vec<usize>, source: SpinError },
    /// The construct has no numerical interpretation.
    #[error("{construct} at {path:?} has no numerical interpretation")]
    NotInterpretable { construct: String, path: Vec<usize> },
    /// An abstraction lacks the type of its bound variable.
    #[error("abstraction over `{var}` at {path:?} has no type annotation")]
    MissingBinderType { var: String, path: Vec<usize> },
    /// A bound variable was used a number of times other than once.
    #[error("bound variable `{var}` at {path:?} must be used exactly once")]
    NonLinearBinder { var: String, path: Vec<usize> },
    /// An assignment entry does not fit its type.
    #[error("assignment for `{name}` is invalid: {reason}")]
    InvalidAssignment { name: String, reason: String },
    /// Weights and readings differ in number.
    #[error("{weights} weight(s) given for {readings} reading(s)")]
    LengthMismatch { readings: usize, weights: usize },
    /// A weight is negative or not finite.
    #[error("weight {0} must be finite and non-negative")]
    InvalidWeight(f64),
}

/// How abstraction is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaMode {
    /// Cap tensors with deferred slot reordering.
    #[default]
    Lazy,
    /// Explicit sum over basis elements of the abstracted space.
    ExplicitSum,
}

/// Values of free variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    entries: BTreeMap<String, Interpretation>,
}

impl Assignment {
    /// An empty assignment.
    pub fn new() -> Self {
        Assignment::default()
    }

    /// Assigns a value without type checks.
    pub fn insert(&mut self, name: impl Into<String>, value: Interpretation) {
        self.entries.insert(name.into(), value);
    }

    /// Assigns a value after checking that its slots follow the spatial
    /// signature of `ty` and its spin lives on the configured ladder.
    pub fn insert_typed(
        &mut self,
        name: impl Into<String>,
        ty: &Formula,
        value: Interpretation,
        space: &SpaceConfig,
    ) -> Result<(), SemanticsError> {
        let name = name.into();
        let expected = carrier_signature(ty, space);
        if value.spatial.signature() != expected
            || value.spatial.dims() != expected.dims(space).as_slice()
        {
            return Err(SemanticsError::InvalidAssignment {
                name,
                reason: format!(
                    "spatial slots {} do not match {expected}",
                    value.spatial.signature()
                ),
            });
        }
        if value.spin.dim() != space.spin_levels {
            return Err(SemanticsError::InvalidAssignment {
                name,
                reason: format!("spin must be {0}x{0}", space.spin_levels),
            });
        }
        self.entries.insert(name, value);
        Ok(())
    }

    /// The value of `name`.
    pub fn get(&self, name: &str) -> Option<&Interpretation> {
        self.entries.get(name)
    }

    /// Assigned names with their values, in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Interpretation)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether the assignment is empty.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Override mapping `name` to the basis element `|k⟩⟨k'|` of the space
    /// of `sig`, with the maximally mixed spin.
    pub fn with_basis_element(
        &self,
        name: &str,
        sig: &SpaceSignature,
        space: &SpaceConfig,
        k: usize,
        k_prime: usize,
    ) -> Result<Self, TensorError> {
        let mut op = Matrix::zeros(sig.dimension(space));
        op.set(k, k_prime, C64::new(1.0, 0.0));
        let spatial = LabeledTensor::from_signature(sig, space, op)?;
        let mut out = self.clone();
        out.insert(
            name,
            Interpretation::new(spatial, Matrix::maximally_mixed(space.spin_levels)),
        );
        Ok(out)
    }

    /// Override replacing the spin of `name` by the maximally mixed state.
    pub fn with_identity_spin(&self, name: &str, levels: usize) -> Self {
        let mut out = self.clone();
        if let Some(entry) = out.entries.get_mut(name) {
            entry.spin = Matrix::maximally_mixed(levels);
        }
        out
    }

    /// Override giving `name` the value of `other`.
    pub fn with_alias(&self, name: &str, other: &str) -> Option<Self> {
        let value = self.entries.get(other)?.clone();
        let mut out = self.clone();
        out.insert(name, value);
        Some(out)
    }
}

/// Interprets `term` under `assignment`.
pub fn interpret(
    term: &Term,
    assignment: &Assignment,
    space: &SpaceConfig,
    spin: &SpinOperatorConfig,
    mode: LambdaMode,
) -> Result<Interpretation, SemanticsError> {
    let evaluator = Evaluator { space, spin, mode };
    evaluator.eval(term, assignment, &mut Vec::new())
}

struct Evaluator<'a> {
    space: &'a SpaceConfig,
    spin: &'a SpinOperatorConfig,
    mode: LambdaMode,
}

impl Evaluator<'_> {
    fn eval(
        &self,
        term: &Term,
        env: &Assignment,
        path: &mut Vec<usize>,
    ) -> Result<Interpretation, SemanticsError> {
        match term {
            Term::Var(name) | Term::Const(name) => {
                env.get(name)
                    .cloned()
                    .ok_or_else(|| SemanticsError::Unbound {
                        name: name.clone(),
                        path: path.clone(),
                    })
            }
            Term::AppR(fun, arg) => {
                let f = self.child(fun, env, path, 0)?;
                let a = self.child(arg, env, path, 1)?;
                self.apply(&f, &a, false, path)
            }
            Term::AppL(arg, fun) => {
                let a = self.child(arg, env, path, 0)?;
                let f = self.child(fun, env, path, 1)?;
                self.apply(&f, &a, true, path)
            }
            Term::LamR { var, ty, body } | Term::LamL { var, ty, body } => {
                let left = matches!(term, Term::LamL { .. });
                let ty = ty
                    .as_ref()
                    .ok_or_else(|| SemanticsError::MissingBinderType {
                        var: var.clone(),
                        path: path.clone(),
                    })?;
                match self.mode {
                    LambdaMode::Lazy => self.abstract_lazy(var, ty, body, left, env, path),
                    LambdaMode::ExplicitSum => {
                        self.abstract_explicit(var, ty, body, left, env, path)
                    }
                }
            }
            Term::Cup(t) => self.spin_step(t, env, path, evolve_dia),
            Term::Cap(t) => self.spin_step(t, env, path, intro_dia),
            Term::Vee(t) => self.spin_step(t, env, path, project_box),
            Term::Wedge(t) => self.spin_step(t, env, path, intro_box),
            Term::Comm(t, n) => self.spin_step(t, env, path, |rho, cfg| raise(rho, *n, cfg)),
            Term::And(..) => Err(SemanticsError::NotInterpretable {
                construct: "logical conjunction".into(),
                path: path.clone(),
            }),
        }
    }

    fn child(
        &self,
        t: &Term,
        env: &Assignment,
        path: &mut Vec<usize>,
        index: usize,
    ) -> Result<Interpretation, SemanticsError> {
        path.push(index);
        let out = self.eval(t, env, path);
        path.pop();
        out
    }

    fn spin_step(
        &self,
        t: &Term,
        env: &Assignment,
        path: &mut Vec<usize>,
        op: impl Fn(&Matrix, &SpinOperatorConfig) -> Result<Matrix, SpinError>,
    ) -> Result<Interpretation, SemanticsError> {
        let inner = self.child(t, env, path, 0)?;
        let spin = op(&inner.spin, self.spin).map_err(|source| SemanticsError::Spin {
            path: path.clone(),
            source,
        })?;
        Ok(Interpretation::new(inner.spatial, spin))
    }

    /// Contracts the argument's open slots into the function's argument
    /// block: the first open slots for a left argument, the last ones for a
    /// right argument, paired in mirror order.
    fn apply(
        &self,
        f: &Interpretation,
        a: &Interpretation,
        left: bool,
        path: &[usize],
    ) -> Result<Interpretation, SemanticsError> {
        let mismatch = |detail: String| SemanticsError::SignatureMismatch {
            path: path.to_vec(),
            detail,
        };
        let fun_slots = f.spatial.free_slots();
        let arg_slots = a.spatial.free_slots();
        let k = arg_slots.len();
        if fun_slots.len() < k {
            return Err(mismatch(format!(
                "function has {} open slot(s), argument needs {k}",
                fun_slots.len()
            )));
        }
        let block = if left {
            &fun_slots[..k]
        } else {
            &fun_slots[fun_slots.len() - k..]
        };
        let pairs: Vec<(usize, usize)> = (0..k).map(|i| (block[k - 1 - i], arg_slots[i])).collect();
        let spatial = contract_with_metric(&f.spatial, &a.spatial, &pairs, self.space)
            .map_err(|e| mismatch(e.to_string()))?;
        let spin = star(&f.spin, &a.spin).map_err(|e| SemanticsError::Spin {
            path: path.to_vec(),
            source: e.into(),
        })?;
        Ok(Interpretation::new(spatial, spin))
    }

    fn abstract_lazy(
        &self,
        var: &str,
        ty: &Formula,
        body: &Term,
        left: bool,
        env: &Assignment,
        path: &mut Vec<usize>,
    ) -> Result<Interpretation, SemanticsError> {
        let carrier = carrier_signature(ty, self.space);
        let levels = self.spin.levels();
        let cap = Interpretation::new(
            cap_tensor(&carrier, self.space, var),
            Matrix::maximally_mixed(levels),
        );
        let mut inner_env = env.clone();
        inner_env.insert(var, cap);
        let inner = self.child(body, &inner_env, path, 0)?;
        let open = inner.spatial.slots_bound_to(var);
        if open.len() != carrier.len() {
            return Err(SemanticsError::NonLinearBinder {
                var: var.to_string(),
                path: path.clone(),
            });
        }
        let rest: Vec<usize> = (0..inner.spatial.slots().len())
            .filter(|i| !open.contains(i))
            .collect();
        let (order, released): (Vec<usize>, Vec<usize>) = if left {
            ([open.clone(), rest].concat(), (0..open.len()).collect())
        } else {
            let start = rest.len();
            (
                [rest, open.clone()].concat(),
                (start..start + open.len()).collect(),
            )
        };
        let spatial = inner.spatial.permute(&order).bind_slots(&released, None);
        Ok(Interpretation::new(spatial, inner.spin))
    }

    fn abstract_explicit(
        &self,
        var: &str,
        ty: &Formula,
        body: &Term,
        left: bool,
        env: &Assignment,
        path: &mut Vec<usize>,
    ) -> Result<Interpretation, SemanticsError> {
        let carrier = carrier_signature(ty, self.space);
        let dims = carrier.dims(self.space);
        let d = carrier.dimension(self.space);
        let dual = carrier.dual();
        let dual_dims = dual.dims(self.space);
        let mut blocks: Vec<(usize, usize, Interpretation)> = Vec::with_capacity(d * d);
        for l in 0..d {
            for l_prime in 0..d {
                let overridden = env
                    .with_basis_element(var, &carrier, self.space, l, l_prime)
                    .map_err(|e| SemanticsError::SignatureMismatch {
                        path: path.clone(),
                        detail: e.to_string(),
                    })?;
                let value = self.child(body, &overridden, path, 0)?;
                blocks.push((l, l_prime, value));
            }
        }
        let first = &blocks[0].2;
        let body_slots: Vec<Slot> = first.spatial.slots().to_vec();
        let body_dims: Vec<usize> = first.spatial.dims().to_vec();
        let m = first.spatial.op().dim();
        let dual_slots: Vec<Slot> = dual
            .factors
            .iter()
            .copied()
            .map(Slot::from_factor)
            .collect();
        let (slots, all_dims) = if left {
            (
                [dual_slots, body_slots].concat(),
                [dual_dims, body_dims].concat(),
            )
        } else {
            (
                [body_slots, dual_slots].concat(),
                [body_dims, dual_dims].concat(),
            )
        };
        let mut op = Matrix::zeros(d * m);
        for (l, l_prime, value) in &blocks {
            let row_a = reversed_index(*l_prime, &dims);
            let col_a = reversed_index(*l, &dims);
            for r in 0..m {
                for c in 0..m {
                    let v = value.spatial.op().get(r, c);
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let (row, col) = if left {
                        (row_a * m + r, col_a * m + c)
                    } else {
                        (r * d + row_a, c * d + col_a)
                    };
                    op.set(row, col, v);
                }
            }
        }
        let spatial = LabeledTensor::new(slots, all_dims, op).map_err(|e| {
            SemanticsError::SignatureMismatch {
                path: path.clone(),
                detail: e.to_string(),
            }
        })?;
        Ok(Interpretation::new(spatial, first.spin.clone()))
    }
}

/// The index of the multi-index of `index` (under `dims`) read backwards,
/// under the reversed dimensions.
fn reversed_index(index: usize, dims: &[usize]) -> usize {
    let mut digits = vec![0; dims.len()];
    let mut rest = index;
    for k in (0..dims.len()).rev() {
        digits[k] = rest % dims[k];
        rest /= dims[k];
    }
    digits
        .iter()
        .rev()
        .zip(dims.iter().rev())
        .fold(0, |acc, (v, d)| acc * d + v)
}

/// The cap tensor standing for a bound variable: regular slots over the
/// carrier, open slots over its dual tagged with `var`, and entries
/// `J[(i, ρ), (i', γ)] = [ρ = rev(i')]·[γ = rev(i)]`.
fn cap_tensor(carrier: &SpaceSignature, space: &SpaceConfig, var: &str) -> LabeledTensor {
    let dims = carrier.dims(space);
    let d = carrier.dimension(space);
    let dual = carrier.dual();
    let mut slots: Vec<Slot> = carrier
        .factors
        .iter()
        .copied()
        .map(Slot::from_factor)
        .collect();
    slots.extend(dual.factors.iter().map(|f| Slot {
        space: f.space,
        dual: f.dual,
        binder: Some(var.to_string()),
    }));
    let mut all_dims = dims.clone();
    all_dims.extend(dual.dims(space));
    let mut op = Matrix::zeros(d * d);
    for i in 0..d {
        for i_prime in 0..d {
            let row = i * d + reversed_index(i_prime, &dims);
            let col = i_prime * d + reversed_index(i, &dims);
            op.set(row, col, C64::new(1.0, 0.0));
        }
    }
    LabeledTensor::new(slots, all_dims, op).expect("cap tensor shape is consistent")
}

/// A reading paired with its weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedReading {
    /// Identifier of the reading.
    pub id: String,
    /// Normalised weight.
    pub weight: f64,
    /// Its meaning.
    pub meaning: Interpretation,
}

/// A formal weighted sum of readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguousMeaning {
    /// The summands, in input order.
    pub readings: Vec<WeightedReading>,
}

impl AmbiguousMeaning {
    /// The block-diagonal operator `⊕_k p_k (spatial_k ⊗ spin_k)`, each
    /// spatial part scaled to unit trace so the sum is a density operator.
    pub fn direct_sum(&self) -> Matrix {
        let blocks: Vec<Matrix> = self
            .readings
            .iter()
            .map(|r| {
                let spatial = r.meaning.spatial.op();
                let trace = spatial.trace().re;
                let norm = if trace.abs() > f64::EPSILON {
                    r.weight / trace
                } else {
                    r.weight
                };
                spatial.kron(&r.meaning.spin).scale(C64::new(norm, 0.0))
            })
            .collect();
        let n: usize = blocks.iter().map(Matrix::dim).sum();
        let mut out = Matrix::zeros(n);
        let mut offset = 0;
        for b in &blocks {
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    out.set(offset + i, offset + j, b.get(i, j));
                }
            }
            offset += b.dim();
        }
        out
    }

    /// Pairwise spin overlaps `Tr(ρ_i ρ_j)`; zero off the diagonal means
    /// the spins tell the readings apart.
    pub fn spin_overlaps(&self) -> Vec<Vec<f64>> {
        self.readings
            .iter()
            .map(|a| {
                self.readings
                    .iter()
                    .map(|b| a.meaning.spin.trace_product(&b.meaning.spin).re)
                    .collect()
            })
            .collect()
    }
}

/// Combines readings with the given weights (uniform when absent),
/// normalised to sum to one.
pub fn ambiguous_sum(
    readings: Vec<(String, Interpretation)>,
    weights: Option<&[f64]>,
) -> Result<AmbiguousMeaning, SemanticsError> {
    let n = readings.len();
    let raw: Vec<f64> = match weights {
        Some(w) if w.len() != n => {
            return Err(SemanticsError::LengthMismatch {
                readings: n,
                weights: w.len(),
            })
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; n],
    };
    if let Some(&bad) = raw.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(SemanticsError::InvalidWeight(bad));
    }
    let total: f64 = raw.iter().sum();
    let normalised: Vec<f64> = if total > 0.0 {
        raw.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / n.max(1) as f64; n]
    };
    Ok(AmbiguousMeaning {
        readings: readings
            .into_iter()
            .zip(normalised)
            .map(|((id, meaning), weight)| WeightedReading {
                id,
                weight,
                meaning,
            })
            .collect(),
    })
}

/// Deviation between a term and its one-step contraction at one redex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedexReport {
    /// Path of the redex in the term.
    pub path: Vec<usize>,
    /// The redex.
    pub redex: String,
    /// Its contractum.
    pub contractum: String,
    /// Largest spatial deviation over all trials.
    pub spatial_deviation: f64,
    /// Largest spin deviation over all trials.
    pub spin_deviation: f64,
    /// Why the redex could not be evaluated, if it could not.
    pub error: Option<String>,
}

/// Result of [`beta_soundness_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    /// Number of random assignments tried.
    pub trials: usize,
    /// One entry per beta redex.
    pub redexes: Vec<RedexReport>,
}

impl BetaReport {
    /// Largest spatial deviation over evaluable redexes.
    pub fn max_spatial_deviation(&self) -> f64 {
        self.evaluated()
            .map(|r| r.spatial_deviation)
            .fold(0.0, f64::max)
    }

    /// Largest spin deviation over evaluable redexes.
    pub fn max_spin_deviation(&self) -> f64 {
        self.evaluated()
            .map(|r| r.spin_deviation)
            .fold(0.0, f64::max)
    }

    /// Redexes that could not be evaluated.
    pub fn skipped(&self) -> usize {
        self.redexes.iter().filter(|r| r.error.is_some()).count()
    }

    fn evaluated(&self) -> impl Iterator<Item = &RedexReport> {
        self.redexes.iter().filter(|r| r.error.is_none())
    }
}

/// Compares the meaning of `term` with that of its one-step contraction
/// at each beta redex, under `trials` random assignments with the same slot
/// structure as `assignment` (the first trial uses `assignment` itself).
pub fn beta_soundness_check(
    term: &Term,
    assignment: &Assignment,
    space: &SpaceConfig,
    spin: &SpinOperatorConfig,
    trials: usize,
    seed: u64,
) -> BetaReport {
    let mut assignments = vec![assignment.clone()];
    for trial in 1..trials {
        assignments.push(random_like(assignment, seed, trial));
    }
    let redexes = beta_redex_paths(term)
        .into_iter()
        .map(|path| {
            let redex = subterm(term, &path).expect("redex path is valid");
            let contractum = contract_redex(redex).expect("path points at a redex");
            let reduced =
                replace_subterm(term, &path, contractum.clone()).expect("redex path is valid");
            let mut report = RedexReport {
                path: path.clone(),
                redex: redex.to_string(),
                contractum: contractum.to_string(),
                spatial_deviation: 0.0,
                spin_deviation: 0.0,
                error: None,
            };
            for g in &assignments {
                let before = interpret(term, g, space, spin, LambdaMode::Lazy);
                let after = interpret(&reduced, g, space, spin, LambdaMode::Lazy);
                match (before, after) {
                    (Ok(b), Ok(a)) => {
                        report.spatial_deviation =
                            report.spatial_deviation.max(b.spatial_deviation(&a));
                        report.spin_deviation = report.spin_deviation.max(b.spin_deviation(&a));
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        report.error = Some(e.to_string());
                        break;
                    }
                }
            }
            report
        })
        .collect();
    BetaReport {
        trials: assignments.len(),
        redexes,
    }
}

/// A random assignment with the same names, slots and spin size.
fn random_like(assignment: &Assignment, seed: u64, trial: usize) -> Assignment {
    let tag = trial.to_string();
    let mut out = Assignment::new();
    for (name, value) in assignment.iter() {
        let mut rng = stream(seed, &[name, "spatial", &tag]);
        let op = random_density(value.spatial.op().dim(), &mut rng);
        let spatial = LabeledTensor::new(
            value.spatial.slots().to_vec(),
            value.spatial.dims().to_vec(),
            op,
        )
        .expect("shape copied from a valid tensor");
        let mut rng = stream(seed, &[name, "spin", &tag]);
        let spin = random_density(value.spin.dim(), &mut rng);
        out.insert(name, Interpretation::new(spatial, spin));
    }
    out
}
