//! Dense complex operators and labelled tensors.
//!
//! Every interpretation in this crate is an operator on a tensor product of
//! small spaces. [`Matrix`] is a dense square complex matrix (row-major);
//! [`LabeledTensor`] attaches to it an ordered list of [`Slot`]s, one per
//! tensor factor, each carrying a row (ket) index and a column (bra) index.
//! Row and column multi-indices are laid out row-major with the first slot
//! most significant.
//!
//! Contraction follows the trace-of-product pattern `Tr_A(X · Y)`: when a
//! slot of `X` is paired with a slot of `Y`, the row index of one is summed
//! against the column index of the other,
//! `Σ_{i,i'} X[.. i ..; .. i' ..] · Y[.. i' ..; .. i ..]`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{AtomicSpace, Factor, SpaceConfig, SpaceSignature};

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Normalising traces at or below this value signal a degenerate measurement.
pub const TRACE_FLOOR: f64 = 1e-12;
/// Tolerance for Hermiticity, trace and positivity in density-matrix validation.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-NEG_CLAMP, 0)` are treated as rounding noise by [`psd_sqrt`].
pub const NEG_CLAMP: f64 = 1e-8;
/// Off-diagonal norm at which the Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-13;
/// Maximum number of Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues below this multiple of the spectral radius count as exact
/// zeros in [`psd_sqrt`]; the square root would otherwise amplify rounding
/// noise of order `1e-16` to `1e-8`.
pub const SQRT_ZERO_FLOOR: f64 = 1e-14;

/// Errors raised by tensor and operator routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    /// Two operators that must act on the same space do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    /// A contraction pairs slots that cannot be paired.
    #[error("slot mismatch between slot {left} and slot {right}: {reason}")]
    SlotMismatch {
        left: usize,
        right: usize,
        reason: String,
    },
    /// The operator has an eigenvalue below the clamping threshold.
    #[error("operator is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    /// The operator is not Hermitian.
    #[error("operator is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    /// The normalising trace of a measurement vanished.
    #[error("degenerate measurement: normalising trace {trace:e} is not positive")]
    DegenerateMeasurement { trace: f64 },
    /// The eigensolver did not converge.
    #[error("Jacobi eigensolver did not converge (off-diagonal norm {off_norm:e})")]
    NoConvergence { off_norm: f64 },
    /// Data of the wrong length.
    #[error("expected {expected} entries, got {actual}")]
    Shape { expected: usize, actual: usize },
}

/// A dense square complex matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    /// The `n × n` zero matrix.
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    /// The `n × n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// The maximally mixed state `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Matrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0))
    }

    /// A diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Matrix::zeros(n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = C64::new(*v, 0.0);
        }
        m
    }

    /// The projector `|v⟩⟨v|` (not normalised).
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j].conj();
            }
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(n: usize, data: Vec<C64>) -> Result<Self, TensorError> {
        if data.len() != n * n {
            return Err(TensorError::Shape {
                expected: n * n,
                actual: data.len(),
            });
        }
        Ok(Matrix { n, data })
    }

    /// Builds a matrix from rows of real numbers.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix rows must be square");
            for (j, v) in row.iter().enumerate() {
                m.data[i * n + j] = C64::new(*v, 0.0);
            }
        }
        m
    }

    /// Side length.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    /// Sets entry `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    /// Rows as vectors, for export.
    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data
            .chunks(self.n.max(1))
            .map(<[C64]>::to_vec)
            .collect()
    }

    /// Matrix product.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "matrix product of mismatched sizes");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Trace.
    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "sum of mismatched sizes");
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Entry-wise difference.
    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "difference of mismatched sizes");
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "comparison of mismatched sizes");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self - self†`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Matrix {
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (n, m) = (self.n, other.n);
        let size = n * m;
        let mut out = Matrix::zeros(size);
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * size + (j * m + l)] = a * other.data[k * m + l];
                    }
                }
            }
        }
        out
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Matrix) -> C64 {
        assert_eq!(self.n, other.n, "trace of mismatched sizes");
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    fn off_diagonal_norm(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += self.data[i * n + j].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    /// Eigendecomposition of the Hermitian part of `self` by cyclic Jacobi
    /// rotations. Returns eigenvalues in ascending order and the unitary
    /// whose columns are the matching eigenvectors.
    pub fn eigh(&self) -> Result<(Vec<f64>, Matrix), TensorError> {
        let n = self.n;
        let mut a = self.hermitian_part();
        let mut v = Matrix::identity(n);
        let scale = a.frobenius_norm().max(1.0);
        let mut converged = n <= 1;
        for _ in 0..JACOBI_MAX_SWEEPS {
            if a.off_diagonal_norm() < JACOBI_TOL * scale {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }
        let off = a.off_diagonal_norm();
        if !converged && off >= JACOBI_TOL * scale {
            return Err(TensorError::NoConvergence { off_norm: off });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
        let values = order.iter().map(|&i| a.get(i, i).re).collect();
        let mut vectors = Matrix::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                vectors.set(row, col, v.get(row, src));
            }
        }
        Ok((values, vectors))
    }
}

/// One Jacobi rotation annihilating `a[p][q]` (and `a[q][p]`), accumulated
/// into `v`. The complex phase of `a[p][q]` is first rotated away so the
/// 2×2 block becomes real symmetric, then the classic real rotation applies.
fn jacobi_rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = a.n;
    let apq = a.get(p, q);
    let magnitude = apq.norm();
    if magnitude < 1e-300 {
        return;
    }
    let phase = apq / magnitude;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * magnitude);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Block of the unitary: diag(1, conj(phase)) · [[c, s], [-s, c]].
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase.conj() * (-s);
    let g_qq = phase.conj() * c;
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * g_pp + akq * g_qp);
        a.set(k, q, akp * g_pq + akq * g_qq);
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * g_pp + vkq * g_qp);
        v.set(k, q, vkp * g_pq + vkq * g_qq);
    }
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, g_pp.conj() * apk + g_qp.conj() * aqk);
        a.set(q, k, g_pq.conj() * apk + g_qq.conj() * aqk);
    }
    a.set(p, q, C64::new(0.0, 0.0));
    a.set(q, p, C64::new(0.0, 0.0));
    a.set(p, p, C64::new(a.get(p, p).re, 0.0));
    a.set(q, q, C64::new(a.get(q, q).re, 0.0));
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|c| format_complex(*c)).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Formats a complex number compactly, dropping a negligible imaginary part.
pub fn format_complex(c: C64) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(c.re), clean(c.im));
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

/// Square root of a Hermitian positive semidefinite operator.
///
/// Eigenvalues in `[-1e-8, 0)` are clamped to zero, as are positive ones
/// below [`SQRT_ZERO_FLOOR`]; anything more negative is reported as
/// [`TensorError::NotPsd`].
pub fn psd_sqrt(m: &Matrix) -> Result<Matrix, TensorError> {
    let defect = m.hermitian_defect();
    if defect > NEG_CLAMP {
        return Err(TensorError::NotHermitian { defect });
    }
    let (values, vectors) = m.eigh()?;
    if let Some(&min) = values.first() {
        if min < -NEG_CLAMP {
            return Err(TensorError::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    let radius = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let floor = SQRT_ZERO_FLOOR * radius.max(1.0);
    let roots: Vec<f64> = values
        .iter()
        .map(|&v| if v <= floor { 0.0 } else { v.sqrt() })
        .collect();
    let scaled = vectors.mul(&Matrix::diagonal(&roots));
    Ok(scaled.mul(&vectors.adjoint()).hermitian_part())
}

/// The normalised measurement map `u^{1/2} · t · u^{1/2} / Tr(·)`: the
/// state `t` measured by the state `u`.
pub fn star(t: &Matrix, u: &Matrix) -> Result<Matrix, TensorError> {
    if t.dim() != u.dim() {
        return Err(TensorError::DimensionMismatch {
            left: t.dim(),
            right: u.dim(),
        });
    }
    let defect = t.hermitian_defect();
    if defect > NEG_CLAMP {
        return Err(TensorError::NotHermitian { defect });
    }
    let root = psd_sqrt(u)?;
    let conjugated = root.mul(t).mul(&root);
    let trace = conjugated.trace().re;
    if trace <= TRACE_FLOOR {
        return Err(TensorError::DegenerateMeasurement { trace });
    }
    Ok(conjugated
        .scale(C64::new(1.0 / trace, 0.0))
        .hermitian_part())
}

/// Diagnostics of [`validate_density`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    /// Largest entry-wise modulus of `M - M†`.
    pub hermitian_defect: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
    /// `|Tr M - 1|`.
    pub trace_defect: f64,
    /// Whether all three are within [`DENSITY_TOL`].
    pub passed: bool,
}

impl fmt::Display for DensityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hermitian defect {:.3e}, min eigenvalue {:.3e}, trace defect {:.3e} ({})",
            self.hermitian_defect,
            self.min_eigenvalue,
            self.trace_defect,
            if self.passed { "valid" } else { "invalid" }
        )
    }
}

/// Checks that `m` is Hermitian, positive semidefinite and of unit trace.
pub fn validate_density(m: &Matrix) -> DensityReport {
    let hermitian_defect = m.hermitian_defect();
    let min_eigenvalue = m
        .eigh()
        .map(|(values, _)| values.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NEG_INFINITY);
    let trace_defect = (m.trace() - C64::new(1.0, 0.0)).norm();
    DensityReport {
        hermitian_defect,
        min_eigenvalue,
        trace_defect,
        passed: hermitian_defect <= DENSITY_TOL
            && min_eigenvalue >= -DENSITY_TOL
            && trace_defect <= DENSITY_TOL,
    }
}

/// One tensor factor of a [`LabeledTensor`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    /// The atomic space.
    pub space: AtomicSpace,
    /// Whether this is the dual copy of the space.
    pub dual: bool,
    /// For slots left open by a pending lambda abstraction, the bound
    /// variable they belong to.
    pub binder: Option<String>,
}

impl Slot {
    /// A slot for a signature factor, not bound to any variable.
    pub fn from_factor(f: Factor) -> Self {
        Slot {
            space: f.space,
            dual: f.dual,
            binder: None,
        }
    }

    /// The factor this slot ranges over.
    pub fn factor(&self) -> Factor {
        Factor {
            space: self.space,
            dual: self.dual,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.factor())?;
        if let Some(b) = &self.binder {
            write!(f, "@{b}")?;
        }
        Ok(())
    }
}

/// An operator on a tensor product of atomic spaces, with one labelled
/// slot per factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTensor {
    slots: Vec<Slot>,
    dims: Vec<usize>,
    op: Matrix,
}

/// Mixed-radix digits of `index` under `dims` (first digit most significant).
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Inverse of [`digits`].
fn compose(values: &[usize], dims: &[usize]) -> usize {
    values.iter().zip(dims).fold(0, |acc, (v, d)| acc * d + v)
}

impl LabeledTensor {
    /// Wraps an operator; the product of `dims` must equal its side length.
    pub fn new(slots: Vec<Slot>, dims: Vec<usize>, op: Matrix) -> Result<Self, TensorError> {
        let expected: usize = dims.iter().product();
        if slots.len() != dims.len() || expected != op.dim() {
            return Err(TensorError::Shape {
                expected,
                actual: op.dim(),
            });
        }
        Ok(LabeledTensor { slots, dims, op })
    }

    /// Wraps an operator on the space described by `sig`.
    pub fn from_signature(
        sig: &SpaceSignature,
        cfg: &SpaceConfig,
        op: Matrix,
    ) -> Result<Self, TensorError> {
        let slots = sig.factors.iter().copied().map(Slot::from_factor).collect();
        LabeledTensor::new(slots, sig.dims(cfg), op)
    }

    /// The scalar `1` with no slots.
    pub fn scalar_one() -> Self {
        LabeledTensor {
            slots: Vec::new(),
            dims: Vec::new(),
            op: Matrix::identity(1),
        }
    }

    /// The slots.
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Per-slot dimensions.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// The underlying operator.
    pub fn op(&self) -> &Matrix {
        &self.op
    }

    /// The signature formed by the slots (binders dropped).
    pub fn signature(&self) -> SpaceSignature {
        SpaceSignature::new(self.slots.iter().map(Slot::factor).collect())
    }

    /// Indices of slots not bound to any pending abstraction.
    pub fn free_slots(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&i| self.slots[i].binder.is_none())
            .collect()
    }

    /// Indices of slots bound to `var`.
    pub fn slots_bound_to(&self, var: &str) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&i| self.slots[i].binder.as_deref() == Some(var))
            .collect()
    }

    /// Sets the binder of the listed slots.
    pub fn bind_slots(mut self, indices: &[usize], binder: Option<&str>) -> Self {
        for &i in indices {
            self.slots[i].binder = binder.map(str::to_string);
        }
        self
    }

    /// Reorders the slots: slot `k` of the result is slot `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Self {
        let k = self.slots.len();
        assert_eq!(order.len(), k, "permutation length");
        let new_dims: Vec<usize> = order.iter().map(|&i| self.dims[i]).collect();
        let new_slots: Vec<Slot> = order.iter().map(|&i| self.slots[i].clone()).collect();
        let size = self.op.dim();
        let mut op = Matrix::zeros(size);
        let mut rd = vec![0; k];
        let mut cd = vec![0; k];
        let mut old_r = vec![0; k];
        let mut old_c = vec![0; k];
        for r in 0..size {
            digits(r, &new_dims, &mut rd);
            for (pos, &src) in order.iter().enumerate() {
                old_r[src] = rd[pos];
            }
            let or = compose(&old_r, &self.dims);
            for c in 0..size {
                digits(c, &new_dims, &mut cd);
                for (pos, &src) in order.iter().enumerate() {
                    old_c[src] = cd[pos];
                }
                op.set(r, c, self.op.get(or, compose(&old_c, &self.dims)));
            }
        }
        LabeledTensor {
            slots: new_slots,
            dims: new_dims,
            op,
        }
    }

    /// Applies the single-factor operator `g` on both the row and the
    /// column side of slot `slot`: `K · self · K` with `K = I ⊗ … ⊗ g ⊗ … ⊗ I`.
    pub fn sandwich_slot(&self, slot: usize, g: &Matrix) -> Self {
        let mut k = Matrix::identity(1);
        for (i, &d) in self.dims.iter().enumerate() {
            k = if i == slot {
                k.kron(g)
            } else {
                k.kron(&Matrix::identity(d))
            };
        }
        LabeledTensor {
            slots: self.slots.clone(),
            dims: self.dims.clone(),
            op: k.mul(&self.op).mul(&k),
        }
    }

    /// Largest entry-wise difference of the operators; infinite when the
    /// slot structure differs.
    pub fn max_abs_diff(&self, other: &LabeledTensor) -> f64 {
        if self.dims != other.dims || self.signature() != other.signature() {
            return f64::INFINITY;
        }
        self.op.max_abs_diff(&other.op)
    }
}

/// Tensor product: slots concatenate, operators combine by Kronecker product.
pub fn tensor_product(a: &LabeledTensor, b: &LabeledTensor) -> LabeledTensor {
    let mut slots = a.slots.clone();
    slots.extend(b.slots.iter().cloned());
    let mut dims = a.dims.clone();
    dims.extend(&b.dims);
    LabeledTensor {
        slots,
        dims,
        op: a.op.kron(&b.op),
    }
}

/// Traces out one slot.
pub fn partial_trace(t: &LabeledTensor, slot: usize) -> LabeledTensor {
    let k = t.slots.len();
    let keep: Vec<usize> = (0..k).filter(|&i| i != slot).collect();
    let new_dims: Vec<usize> = keep.iter().map(|&i| t.dims[i]).collect();
    let size: usize = new_dims.iter().product();
    let mut op = Matrix::zeros(size);
    let mut rd = vec![0; keep.len()];
    let mut cd = vec![0; keep.len()];
    let mut full_r = vec![0; k];
    let mut full_c = vec![0; k];
    for r in 0..size {
        digits(r, &new_dims, &mut rd);
        for c in 0..size {
            digits(c, &new_dims, &mut cd);
            for (pos, &src) in keep.iter().enumerate() {
                full_r[src] = rd[pos];
                full_c[src] = cd[pos];
            }
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..t.dims[slot] {
                full_r[slot] = i;
                full_c[slot] = i;
                acc +=
                    t.op.get(compose(&full_r, &t.dims), compose(&full_c, &t.dims));
            }
            op.set(r, c, acc);
        }
    }
    LabeledTensor {
        slots: keep.iter().map(|&i| t.slots[i].clone()).collect(),
        dims: new_dims,
        op,
    }
}

/// Contracts slot pairs `(i, j)` of `a` and `b` with the identity metric.
///
/// Each pair must join a space with its dual. The result carries the
/// unpaired slots of `a` followed by the unpaired slots of `b`; its entries
/// are `Σ a[.. α ..; .. β ..] · b[.. β ..; .. α ..]` over the paired indices.
pub fn contract(
    a: &LabeledTensor,
    b: &LabeledTensor,
    pairs: &[(usize, usize)],
) -> Result<LabeledTensor, TensorError> {
    check_pairs(a, b, pairs)?;
    Ok(contract_unchecked(a, b, pairs))
}

/// As [`contract`], but first interposes the configured metric of each
/// paired space on the `b` side. With identity metrics this is [`contract`].
pub fn contract_with_metric(
    a: &LabeledTensor,
    b: &LabeledTensor,
    pairs: &[(usize, usize)],
    cfg: &SpaceConfig,
) -> Result<LabeledTensor, TensorError> {
    check_pairs(a, b, pairs)?;
    let mut b = b.clone();
    for &(_, j) in pairs {
        if let Some(g) = cfg.metric(b.slots[j].space) {
            b = b.sandwich_slot(j, g);
        }
    }
    Ok(contract_unchecked(a, &b, pairs))
}

fn check_pairs(
    a: &LabeledTensor,
    b: &LabeledTensor,
    pairs: &[(usize, usize)],
) -> Result<(), TensorError> {
    let mut used_a = vec![false; a.slots.len()];
    let mut used_b = vec![false; b.slots.len()];
    for &(i, j) in pairs {
        let mismatch = |reason: &str| TensorError::SlotMismatch {
            left: i,
            right: j,
            reason: reason.to_string(),
        };
        if i >= a.slots.len() || j >= b.slots.len() {
            return Err(mismatch("slot index out of range"));
        }
        if std::mem::replace(&mut used_a[i], true) || std::mem::replace(&mut used_b[j], true) {
            return Err(mismatch("slot paired twice"));
        }
        let (sa, sb) = (&a.slots[i], &b.slots[j]);
        if sa.space != sb.space {
            return Err(mismatch(&format!(
                "spaces {} and {} differ",
                sa.space, sb.space
            )));
        }
        if sa.dual == sb.dual {
            return Err(mismatch(&format!(
                "{} must pair with its dual",
                sa.factor()
            )));
        }
        if a.dims[i] != b.dims[j] {
            return Err(mismatch(&format!(
                "dimensions {} and {} differ",
                a.dims[i], b.dims[j]
            )));
        }
    }
    Ok(())
}

fn contract_unchecked(
    a: &LabeledTensor,
    b: &LabeledTensor,
    pairs: &[(usize, usize)],
) -> LabeledTensor {
    let free_a: Vec<usize> = (0..a.slots.len())
        .filter(|i| pairs.iter().all(|p| p.0 != *i))
        .collect();
    let free_b: Vec<usize> = (0..b.slots.len())
        .filter(|j| pairs.iter().all(|p| p.1 != *j))
        .collect();
    let mut slots: Vec<Slot> = free_a.iter().map(|&i| a.slots[i].clone()).collect();
    slots.extend(free_b.iter().map(|&j| b.slots[j].clone()));
    let mut dims: Vec<usize> = free_a.iter().map(|&i| a.dims[i]).collect();
    dims.extend(free_b.iter().map(|&j| b.dims[j]));
    let pair_dims: Vec<usize> = pairs.iter().map(|&(i, _)| a.dims[i]).collect();
    let pair_count: usize = pair_dims.iter().product();
    let size: usize = dims.iter().product();

    let na = free_a.len();
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    let mut alpha = vec![0; pairs.len()];
    let mut beta = vec![0; pairs.len()];
    let mut ar = vec![0; a.slots.len()];
    let mut ac = vec![0; a.slots.len()];
    let mut br = vec![0; b.slots.len()];
    let mut bc = vec![0; b.slots.len()];
    let mut op = Matrix::zeros(size);
    for r in 0..size {
        digits(r, &dims, &mut rd);
        for c in 0..size {
            digits(c, &dims, &mut cd);
            for (pos, &i) in free_a.iter().enumerate() {
                ar[i] = rd[pos];
                ac[i] = cd[pos];
            }
            for (pos, &j) in free_b.iter().enumerate() {
                br[j] = rd[na + pos];
                bc[j] = cd[na + pos];
            }
            let mut acc = C64::new(0.0, 0.0);
            for x in 0..pair_count {
                digits(x, &pair_dims, &mut alpha);
                for y in 0..pair_count {
                    digits(y, &pair_dims, &mut beta);
                    for (p, &(i, j)) in pairs.iter().enumerate() {
                        ar[i] = alpha[p];
                        ac[i] = beta[p];
                        br[j] = beta[p];
                        bc[j] = alpha[p];
                    }
                    let av = a.op.get(compose(&ar, &a.dims), compose(&ac, &a.dims));
                    if av == C64::new(0.0, 0.0) {
                        continue;
                    }
                    acc += av * b.op.get(compose(&br, &b.dims), compose(&bc, &b.dims));
                }
            }
            op.set(r, c, acc);
        }
    }
    LabeledTensor { slots, dims, op }
}
