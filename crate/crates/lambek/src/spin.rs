//! The spin space that records derivational history.
//!
//! Every interpretation carries, next to its spatial tensor, a density
//! matrix on an `L`-level spin space. The modalities act on it through two
//! operator families:
//!
//! * box elimination projects onto the eigenbasis `{|a⟩}` of the chosen
//!   observable, mixing the outcomes with coefficients `c_a`
//!   ([`project_box`]);
//! * diamond elimination applies a selected chain of unitaries `U_b`
//!   ([`evolve_dia`]).
//!
//! Introduction rules reuse the elimination family of the other modality,
//! and each controlled commutation raises the state one rung up the ladder
//! ([`raise`]).
//!
//! With two levels the basis follows the `S_z` eigenvectors
//! `|0⟩ = (0, 1)ᵀ` and `|1⟩ = (1, 0)ᵀ`, so `|0⟩⟨0| = [[0,0],[0,1]]` and the
//! raising operator is `S₊ = [[0,1],[0,0]]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{star, Matrix, TensorError, C64, TRACE_FLOOR};

/// A density matrix on the spin space.
pub type SpinState = Matrix;

/// Tolerance for unitarity, orthonormality and coefficient sums.
pub const OPERATOR_TOL: f64 = 1e-12;

/// Errors raised by spin operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    /// A projection met a state with no weight on the target eigenvector.
    #[error("degenerate measurement: normalising trace {trace:e} is not positive")]
    DegenerateMeasurement { trace: f64 },
    /// Raising annihilated the state.
    #[error("raising {steps} time(s) overflowed the spin ladder (trace {trace:e})")]
    LadderOverflow { steps: usize, trace: f64 },
    /// The state does not live on the configured spin space.
    #[error("spin state has dimension {actual}, expected {expected}")]
    Dimension { expected: usize, actual: usize },
    /// The operator configuration violates an invariant.
    #[error("invalid spin operator configuration: {0}")]
    Config(String),
    /// An underlying operator routine failed.
    #[error(transparent)]
    Tensor(TensorError),
}

impl From<TensorError> for SpinError {
    fn from(e: TensorError) -> Self {
        match e {
            TensorError::DegenerateMeasurement { trace } => {
                SpinError::DegenerateMeasurement { trace }
            }
            other => SpinError::Tensor(other),
        }
    }
}

/// Operator families acting on the spin space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinOperatorConfig {
    levels: usize,
    basis: Vec<Vec<C64>>,
    coefficients: Vec<f64>,
    unitaries: Vec<Matrix>,
    selections: Vec<bool>,
    raising: Matrix,
}

impl SpinOperatorConfig {
    /// The default operators on `levels` levels: the standard basis ordered
    /// so that `|a⟩ = e_{L-1-a}`, projection onto `|0⟩` only, the identity as
    /// the single selected unitary, and the superdiagonal ladder as `S₊`.
    pub fn standard(levels: usize) -> Self {
        let basis = (0..levels)
            .map(|a| {
                let mut v = vec![C64::new(0.0, 0.0); levels];
                v[levels - 1 - a] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        let mut coefficients = vec![0.0; levels];
        coefficients[0] = 1.0;
        let mut raising = Matrix::zeros(levels);
        for k in 1..levels {
            raising.set(k - 1, k, C64::new(1.0, 0.0));
        }
        SpinOperatorConfig {
            levels,
            basis,
            coefficients,
            unitaries: vec![Matrix::identity(levels)],
            selections: vec![true],
            raising,
        }
    }

    /// Replaces the projection coefficients `c_a`.
    pub fn with_coefficients(mut self, coefficients: Vec<f64>) -> Result<Self, SpinError> {
        self.coefficients = coefficients;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the eigenbasis `{|a⟩}`.
    pub fn with_basis(mut self, basis: Vec<Vec<C64>>) -> Result<Self, SpinError> {
        self.basis = basis;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the unitaries `U_b` and their selections `d_b`. `U_0` must
    /// be the identity.
    pub fn with_unitaries(
        mut self,
        unitaries: Vec<Matrix>,
        selections: Vec<bool>,
    ) -> Result<Self, SpinError> {
        self.unitaries = unitaries;
        self.selections = selections;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the raising operator.
    pub fn with_raising(mut self, raising: Matrix) -> Result<Self, SpinError> {
        self.raising = raising;
        self.validate()?;
        Ok(self)
    }

    /// Number of levels.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// The eigenbasis `{|a⟩}`.
    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    /// The projection coefficients `c_a`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// The unitaries `U_b`.
    pub fn unitaries(&self) -> &[Matrix] {
        &self.unitaries
    }

    /// The selection flags `d_b`.
    pub fn selections(&self) -> &[bool] {
        &self.selections
    }

    /// The projector `|a⟩⟨a|`.
    pub fn projector(&self, a: usize) -> Matrix {
        Matrix::outer(&self.basis[a])
    }

    /// The raising operator `S₊`.
    pub fn raising(&self) -> &Matrix {
        &self.raising
    }

    /// The lowering operator `S₋ = S₊†`.
    pub fn lowering(&self) -> Matrix {
        self.raising.adjoint()
    }

    /// Largest entry of `S₊S₊† + S₋S₋† − I`.
    pub fn completeness_defect(&self) -> f64 {
        let up = self.raising.mul(&self.raising.adjoint());
        let down = self.lowering().mul(&self.raising);
        up.add(&down).max_abs_diff(&Matrix::identity(self.levels))
    }

    /// Checks every invariant of the configuration.
    pub fn validate(&self) -> Result<(), SpinError> {
        let l = self.levels;
        let bad = |m: String| Err(SpinError::Config(m));
        if l == 0 {
            return bad("at least one level is required".into());
        }
        if self.basis.len() != l || self.basis.iter().any(|v| v.len() != l) {
            return bad(format!("basis must hold {l} vectors of length {l}"));
        }
        for a in 0..l {
            for b in 0..l {
                let ip: C64 = self.basis[a]
                    .iter()
                    .zip(&self.basis[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                if (ip - C64::new(expected, 0.0)).norm() > OPERATOR_TOL {
                    return bad("basis is not orthonormal".into());
                }
            }
        }
        if self.coefficients.len() != l {
            return bad(format!("expected {l} projection coefficients"));
        }
        if (self.coefficients.iter().sum::<f64>() - 1.0).abs() > OPERATOR_TOL {
            return bad("projection coefficients must sum to 1".into());
        }
        if self.unitaries.is_empty() || self.unitaries.len() != self.selections.len() {
            return bad("each unitary needs exactly one selection flag".into());
        }
        for (b, u) in self.unitaries.iter().enumerate() {
            if u.dim() != l {
                return bad(format!("unitary {b} must be {l}x{l}"));
            }
            if u.mul(&u.adjoint()).max_abs_diff(&Matrix::identity(l)) > OPERATOR_TOL {
                return bad(format!("matrix {b} is not unitary"));
            }
        }
        if self.unitaries[0].max_abs_diff(&Matrix::identity(l)) > OPERATOR_TOL {
            return bad("U_0 must be the identity".into());
        }
        if self.raising.dim() != l {
            return bad(format!("raising operator must be {l}x{l}"));
        }
        Ok(())
    }

    fn check_state(&self, rho: &Matrix) -> Result<(), SpinError> {
        if rho.dim() != self.levels {
            return Err(SpinError::Dimension {
                expected: self.levels,
                actual: rho.dim(),
            });
        }
        Ok(())
    }
}

/// Box elimination: `Σ_a c_a · (ρ measured by |a⟩⟨a|)`. With the default
/// coefficients this is the projection onto the lowest eigenstate `|0⟩`.
pub fn project_box(rho: &SpinState, cfg: &SpinOperatorConfig) -> Result<SpinState, SpinError> {
    cfg.check_state(rho)?;
    let mut out = Matrix::zeros(cfg.levels);
    for (a, &c) in cfg.coefficients.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let projected = star(rho, &cfg.projector(a))?;
        out = out.add(&projected.scale(C64::new(c, 0.0)));
    }
    Ok(out)
}

/// Diamond elimination: applies `ρ ↦ U_b ρ U_b†` for every selected `b`,
/// in increasing order of `b`. The default selects only `U_0 = I`.
pub fn evolve_dia(rho: &SpinState, cfg: &SpinOperatorConfig) -> Result<SpinState, SpinError> {
    cfg.check_state(rho)?;
    let mut out = rho.clone();
    for (u, &selected) in cfg.unitaries.iter().zip(&cfg.selections) {
        if selected {
            out = u.mul(&out).mul(&u.adjoint());
        }
    }
    Ok(out)
}

/// `S₊ᵐ ρ (S₊†)ᵐ`, renormalised. Fails with [`SpinError::LadderOverflow`]
/// when the state is annihilated.
pub fn raise(rho: &SpinState, m: usize, cfg: &SpinOperatorConfig) -> Result<SpinState, SpinError> {
    cfg.check_state(rho)?;
    if m == 0 {
        return Ok(rho.clone());
    }
    let mut power = Matrix::identity(cfg.levels);
    for _ in 0..m {
        power = cfg.raising.mul(&power);
    }
    let raised = power.mul(rho).mul(&power.adjoint());
    let trace = raised.trace().re;
    if trace <= TRACE_FLOOR {
        return Err(SpinError::LadderOverflow { steps: m, trace });
    }
    Ok(raised.scale(C64::new(1.0 / trace, 0.0)).hermitian_part())
}

/// Box introduction, interpreted by the diamond-elimination family.
pub fn intro_box(rho: &SpinState, cfg: &SpinOperatorConfig) -> Result<SpinState, SpinError> {
    evolve_dia(rho, cfg)
}

/// Diamond introduction, interpreted by the box-elimination family.
pub fn intro_dia(rho: &SpinState, cfg: &SpinOperatorConfig) -> Result<SpinState, SpinError> {
    project_box(rho, cfg)
}
