//! Dense complex linear algebra over small multi-qubit Hilbert spaces.
//!
//! Tensor products follow the Kronecker convention with the first operand as
//! the most significant factor, so basis index `i_1 i_2 ... i_m` (read as a
//! binary number) labels `|i_1⟩ ⊗ |i_2⟩ ⊗ ... ⊗ |i_m⟩`.
//!
//! For star networks the joint ordering is `(a_1, ..., a_n, b_1, ..., b_n)`,
//! where `b_i` is the central party's half of pair `i`. Pair states are built
//! in `(a_i, b_i)` order and regrouped with [`StateVector::permute_qubits`] or
//! [`Operator::permute_subsystems`].

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for Hermiticity and normalization checks.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Tolerance for unit norm of states and unit trace of density operators.
pub const NORM_TOL: f64 = 1e-9;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-9;

const DEFAULT_MAX_JOINT_DIM: usize = 1 << 20;
static MAX_JOINT_DIM: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_JOINT_DIM);

/// Largest Hilbert-space dimension a tensor product may produce.
pub fn max_joint_dim() -> usize {
    MAX_JOINT_DIM.load(Ordering::Relaxed)
}

/// Overrides the dimension guard for the whole process.
pub fn set_max_joint_dim(dim: usize) {
    MAX_JOINT_DIM.store(dim.max(1), Ordering::Relaxed);
}

fn check_dim(what: &'static str, dim: u128) -> Result<usize> {
    let limit = max_joint_dim() as u128;
    if dim > limit {
        return Err(Error::Size {
            what,
            needed: dim,
            limit,
        });
    }
    Ok(dim as usize)
}

fn check_power_of_two(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!("dimension {dim} is not a power of 2")));
    }
    Ok(())
}

/// Single-qubit Pauli operators, used to spell out Pauli strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Operator {
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        let entries = match self {
            Pauli::I => [o, z, z, o],
            Pauli::X => [z, o, o, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [o, z, z, -o],
        };
        Operator::from_row_slice(2, &entries).expect("2x2 literal")
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Renders a Pauli string such as `XYY`.
pub fn pauli_label(string: &[Pauli]) -> String {
    string.iter().map(|p| p.symbol()).collect()
}

/// Tensor product of single-qubit Paulis, first entry most significant.
pub fn pauli_string(string: &[Pauli]) -> Result<Operator> {
    Operator::kron_all(string.iter().map(|p| p.matrix()))
}

/// A pure state over `log2(dim)` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C64>", into = "Vec<C64>")]
pub struct StateVector {
    amps: Vec<C64>,
}

impl TryFrom<Vec<C64>> for StateVector {
    type Error = Error;
    fn try_from(amps: Vec<C64>) -> Result<Self> {
        StateVector::new(amps)
    }
}

impl From<StateVector> for Vec<C64> {
    fn from(s: StateVector) -> Self {
        s.amps
    }
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        check_power_of_two(amps.len())?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        Ok(StateVector { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_power_of_two(dim)?;
        if index >= dim {
            return Err(Error::Index { index, len: dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "inner product of dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scale(&self, factor: C64) -> StateVector {
        StateVector {
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("adding states of different dims".into()));
        }
        Ok(StateVector {
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        check_dim("kron", self.dim() as u128 * other.dim() as u128)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector { amps })
    }

    pub fn kron_all<I: IntoIterator<Item = StateVector>>(parts: I) -> Result<StateVector> {
        let mut iter = parts.into_iter();
        let first = iter.next().ok_or_else(|| Error::Shape("empty tensor product".into()))?;
        iter.try_fold(first, |acc, s| acc.kron(&s))
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> Operator {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        Operator { mat: &v * v.adjoint() }
    }

    /// Reorders qubits so that output qubit `k` is input qubit `perm[k]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<StateVector> {
        let m = self.num_qubits();
        let map = SubsystemPermutation::new(&vec![2; m], perm)?;
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        for (new_idx, amp) in amps.iter_mut().enumerate() {
            *amp = self.amps[map.source_index(new_idx)];
        }
        Ok(StateVector { amps })
    }
}

/// Dense square complex operator.
///
/// Hermiticity is checked where it matters ([`Operator::is_hermitian`]) rather
/// than enforced on construction: intermediate products like `(M ⊗ 1)ρ` are
/// not Hermitian.
#[derive(Clone, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator(dim={})", self.dim())?;
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let z = self.mat[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    /// Row-major `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let entries = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| [self.mat[(r, c)].re, self.mat[(r, c)].im])
            .collect();
        OperatorRepr { dim: d, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(d)?;
        let vals: Vec<C64> = repr.entries.iter().map(|e| C64::new(e[0], e[1])).collect();
        Operator::from_row_slice(repr.dim, &vals).map_err(serde::de::Error::custom)
    }
}

impl Operator {
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries for a {dim}x{dim} operator",
                entries.len()
            )));
        }
        if entries.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Validation("non-finite operator entry".into()));
        }
        Ok(Operator {
            mat: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<C64> = rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect();
        Self::from_row_slice(dim, &entries)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Operator {
            mat: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub(crate) fn from_matrix(mat: DMatrix<C64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        Operator { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            mat: &self.mat * C64::new(factor, 0.0),
        }
    }

    pub fn scale_complex(&self, factor: C64) -> Operator {
        Operator {
            mat: &self.mat * factor,
        }
    }

    /// `tr(self · other)`, computed without forming the product.
    pub fn trace_product(&self, other: &Operator) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.mat[(r, c)] * other.mat[(c, r)];
            }
        }
        acc
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|r| (r..d).all(|c| (self.mat[(r, c)] - self.mat[(c, r)].conj()).norm() <= tol))
    }

    /// Eigenvalues in ascending order. Only meaningful for Hermitian input.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.hermitian_part().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigen-decomposition of the Hermitian part: `(eigenvalues, eigenvector columns)`.
    pub(crate) fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = self.hermitian_part().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }

    fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0)
    }

    pub fn is_psd(&self) -> bool {
        self.is_hermitian(HERMITIAN_TOL) && self.eigenvalues().first().is_none_or(|&e| e >= PSD_FLOOR)
    }

    /// Checks that `self` is a density operator: Hermitian, PSD, unit trace.
    pub fn validate_density(&self) -> Result<()> {
        if !self.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::Validation("density operator is not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::Validation(format!("density operator has trace {tr}")));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < PSD_FLOOR {
                return Err(Error::Validation(format!("density operator has eigenvalue {min}")));
            }
        }
        Ok(())
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "operator of dim {} applied to state of dim {}",
                self.dim(),
                state.dim()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        StateVector::new((&self.mat * v).iter().copied().collect())
    }

    /// `⟨ψ|self|ψ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        state.inner(&self.apply(state)?)
    }

    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        check_dim("kron", self.dim() as u128 * other.dim() as u128)?;
        Ok(Operator {
            mat: self.mat.kronecker(&other.mat),
        })
    }

    pub fn kron_all<I: IntoIterator<Item = Operator>>(parts: I) -> Result<Operator> {
        let mut iter = parts.into_iter();
        let first = iter.next().ok_or_else(|| Error::Shape("empty tensor product".into()))?;
        iter.try_fold(first, |acc, op| acc.kron(&op))
    }

    /// Traces out the subsystems listed in `traced`.
    ///
    /// `subsystem_dims` lists the factor dimensions, most significant first.
    /// The kept subsystems stay in their original relative order.
    pub fn partial_trace(&self, subsystem_dims: &[usize], traced: &[usize]) -> Result<Operator> {
        let total: usize = subsystem_dims.iter().product();
        if total != self.dim() || subsystem_dims.contains(&0) {
            return Err(Error::Shape(format!(
                "subsystem dims {subsystem_dims:?} do not multiply to {}",
                self.dim()
            )));
        }
        let m = subsystem_dims.len();
        let mut is_traced = vec![false; m];
        for &t in traced {
            if t >= m {
                return Err(Error::Index { index: t, len: m });
            }
            is_traced[t] = true;
        }
        let kept: Vec<usize> = (0..m).filter(|&k| !is_traced[k]).collect();
        let gone: Vec<usize> = (0..m).filter(|&k| is_traced[k]).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&k| subsystem_dims[k]).collect();
        let gone_dims: Vec<usize> = gone.iter().map(|&k| subsystem_dims[k]).collect();
        let kept_dim: usize = kept_dims.iter().product();
        let gone_dim: usize = gone_dims.iter().product();

        // Stride of each subsystem in the full index.
        let mut strides = vec![1usize; m];
        for k in (0..m.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * subsystem_dims[k + 1];
        }
        let offsets = |which: &[usize], dims: &[usize], count: usize| -> Vec<usize> {
            (0..count)
                .map(|mut idx| {
                    let mut off = 0;
                    for (pos, &k) in which.iter().enumerate().rev() {
                        off += (idx % dims[pos]) * strides[k];
                        idx /= dims[pos];
                    }
                    off
                })
                .collect()
        };
        let kept_off = offsets(&kept, &kept_dims, kept_dim);
        let gone_off = offsets(&gone, &gone_dims, gone_dim);

        let mat = DMatrix::from_fn(kept_dim, kept_dim, |r, c| {
            gone_off
                .iter()
                .map(|&t| self.mat[(kept_off[r] + t, kept_off[c] + t)])
                .sum()
        });
        Ok(Operator { mat })
    }

    /// Reorders tensor factors so that output factor `k` is input factor `perm[k]`.
    pub fn permute_subsystems(&self, subsystem_dims: &[usize], perm: &[usize]) -> Result<Operator> {
        let total: usize = subsystem_dims.iter().product();
        if total != self.dim() {
            return Err(Error::Shape(format!(
                "subsystem dims {subsystem_dims:?} do not multiply to {}",
                self.dim()
            )));
        }
        let map = SubsystemPermutation::new(subsystem_dims, perm)?;
        let src: Vec<usize> = (0..total).map(|i| map.source_index(i)).collect();
        Ok(Operator {
            mat: DMatrix::from_fn(total, total, |r, c| self.mat[(src[r], src[c])]),
        })
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat * &rhs.mat,
        }
    }
}

/// Index map for a reordering of tensor factors.
struct SubsystemPermutation {
    in_strides: Vec<usize>,
    out_dims: Vec<usize>,
    perm: Vec<usize>,
}

impl SubsystemPermutation {
    fn new(dims: &[usize], perm: &[usize]) -> Result<Self> {
        let m = dims.len();
        let mut seen = vec![false; m];
        if perm.len() != m {
            return Err(Error::Shape(format!(
                "permutation of length {} for {m} subsystems",
                perm.len()
            )));
        }
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::Shape(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let mut in_strides = vec![1usize; m];
        for k in (0..m.saturating_sub(1)).rev() {
            in_strides[k] = in_strides[k + 1] * dims[k + 1];
        }
        Ok(SubsystemPermutation {
            in_strides,
            out_dims: perm.iter().map(|&p| dims[p]).collect(),
            perm: perm.to_vec(),
        })
    }

    /// Input index feeding output index `out`.
    fn source_index(&self, mut out: usize) -> usize {
        let mut src = 0;
        for k in (0..self.perm.len()).rev() {
            let digit = out % self.out_dims[k];
            out /= self.out_dims[k];
            src += digit * self.in_strides[self.perm[k]];
        }
        src
    }
}

/// Named states used throughout the toolkit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateKind {
    /// `(|01⟩ − |10⟩)/√2`.
    Singlet,
    /// `(|00⟩ + |11⟩)/√2`.
    PhiPlus,
    /// `(|0…0⟩ + |1…1⟩)/√2` on `n ≥ 2` qubits.
    Ghz(usize),
    /// `Z^{i_1} ⊗ X^{i_2} ⊗ … ⊗ X^{i_n} |GHZ_n⟩`; `label` holds `i_1 … i_n`
    /// with `i_1` as the most significant bit.
    GenBell { n: usize, label: usize },
}

pub fn build_state(kind: &StateKind) -> Result<StateVector> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match *kind {
        StateKind::Singlet => StateVector::from_real(&[0.0, h, -h, 0.0]),
        StateKind::PhiPlus => StateVector::from_real(&[h, 0.0, 0.0, h]),
        StateKind::Ghz(n) => {
            if n < 2 {
                return Err(Error::Domain(format!("GHZ state needs n >= 2, got {n}")));
            }
            let dim = check_dim("ghz", 1u128 << n)?;
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            amps[0] = C64::new(h, 0.0);
            amps[dim - 1] = C64::new(h, 0.0);
            StateVector::new(amps)
        }
        StateKind::GenBell { n, label } => {
            let ghz = build_state(&StateKind::Ghz(n))?;
            if label >= 1 << n {
                return Err(Error::Index {
                    index: label,
                    len: 1 << n,
                });
            }
            let factors = (0..n).map(|k| {
                let bit = (label >> (n - 1 - k)) & 1 == 1;
                match (k, bit) {
                    (_, false) => Pauli::I,
                    (0, true) => Pauli::Z,
                    (_, true) => Pauli::X,
                }
            });
            let string: Vec<Pauli> = factors.collect();
            pauli_string(&string)?.apply(&ghz)
        }
    }
}

/// `v |ψ⟩⟨ψ| + (1 − v) I/d` for a pure `ψ`.
pub fn mix_with_white_noise(state: &StateVector, v: f64) -> Result<Operator> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(Error::Domain(format!("visibility {v} outside [0, 1]")));
    }
    let d = state.dim() as f64;
    Ok(&state.projector().scale(v) + &Operator::identity(state.dim()).scale((1.0 - v) / d))
}

/// Werner state `v |ψ−⟩⟨ψ−| + (1 − v) I/4`.
pub fn build_werner(v: f64) -> Result<Operator> {
    mix_with_white_noise(&build_state(&StateKind::Singlet)?, v)
}
