//! Scenario descriptors, behavior tables, and the correlator functionals.
//!
//! # Table layout
//!
//! A [`Behavior`] stores `P(a_1 … a_n, b | x_1 … x_n, y)` as a flat row-major
//! array indexed by `(x, y, a, b)`, inputs outermost:
//!
//! ```text
//! index = ((x * m_b + y) * 2^n + a) * 2^k + b
//! ```
//!
//! `x` and `a` pack the party bits with party 1 as the most significant bit,
//! `b` packs Bob's bits with `b^1` as the most significant bit. Bob's bits are
//! therefore the fastest-varying coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::GjFamily;

/// Slack on negative table entries before they are rejected.
pub const NEGATIVE_ENTRY_TOL: f64 = 1e-12;
/// Tolerance on per-input normalization of a behavior.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Largest behavior table accepted.
pub const MAX_TABLE_LEN: usize = 1 << 24;

/// Packs `bits` (each 0 or 1) into an integer, first entry most significant.
pub fn pack_bits(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b as usize & 1))
}

/// Inverse of [`pack_bits`] for a fixed width.
pub fn unpack_bits(value: usize, width: usize) -> Vec<u8> {
    (0..width).map(|k| ((value >> (width - 1 - k)) & 1) as u8).collect()
}

pub(crate) fn parity(v: usize) -> usize {
    (v.count_ones() & 1) as usize
}

pub(crate) fn sign(parity_bit: usize) -> f64 {
    if parity_bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The two measurement scenarios for the central party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Bob chooses between two binary measurements.
    TwoToTwo,
    /// Bob performs one measurement and outputs `2^{n−1}` processed bits.
    SingleMeasurement,
}

#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    n: usize,
    m_a: usize,
    d_a: usize,
    m_b: usize,
    k: usize,
}

/// Star network with `n` edge parties, each with two binary measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct ScenarioSpec {
    n: usize,
    m_b: usize,
    k: usize,
}

impl TryFrom<ScenarioRepr> for ScenarioSpec {
    type Error = Error;
    fn try_from(r: ScenarioRepr) -> Result<Self> {
        if r.m_a != 2 || r.d_a != 2 {
            return Err(Error::Shape(format!(
                "edge parties must have m_a = d_a = 2, got {} and {}",
                r.m_a, r.d_a
            )));
        }
        ScenarioSpec::new(r.n, r.m_b, r.k)
    }
}

impl From<ScenarioSpec> for ScenarioRepr {
    fn from(s: ScenarioSpec) -> Self {
        ScenarioRepr {
            n: s.n,
            m_a: 2,
            d_a: 2,
            m_b: s.m_b,
            k: s.k,
        }
    }
}

impl ScenarioSpec {
    pub fn new(n: usize, m_b: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("star network needs n >= 1".into()));
        }
        if n >= 24 {
            return Err(Error::Size {
                what: "edge parties",
                needed: n as u128,
                limit: 23,
            });
        }
        let bits = 1usize << (n - 1);
        if !((m_b == 2 && k == 1) || (m_b == 1 && k == bits)) {
            return Err(Error::Shape(format!(
                "(m_b, k) = ({m_b}, {k}) is neither (2, 1) nor (1, {bits})"
            )));
        }
        let spec = ScenarioSpec { n, m_b, k };
        let needed = spec.table_len_u128();
        if needed > MAX_TABLE_LEN as u128 {
            return Err(Error::Size {
                what: "behavior table",
                needed,
                limit: MAX_TABLE_LEN as u128,
            });
        }
        Ok(spec)
    }

    /// Bob has two binary measurements.
    pub fn two_to_two(n: usize) -> Result<Self> {
        Self::new(n, 2, 1)
    }

    /// Bob has a single measurement producing `2^{n−1}` bits.
    pub fn single_measurement(n: usize) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(Error::Size {
                what: "single-measurement parties",
                needed: n as u128,
                limit: 6,
            });
        }
        Self::new(n, 1, 1 << (n - 1))
    }

    pub fn kind(&self) -> ScenarioKind {
        if self.m_b == 2 {
            ScenarioKind::TwoToTwo
        } else {
            ScenarioKind::SingleMeasurement
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_b(&self) -> usize {
        self.m_b
    }

    /// Number of output bits of the central party.
    pub fn k(&self) -> usize {
        self.k
    }

    /// `2^n` joint settings of the edge parties.
    pub fn num_settings(&self) -> usize {
        1 << self.n
    }

    /// `2^k` outcome strings of the central party.
    pub fn num_bob_outcomes(&self) -> usize {
        1 << self.k
    }

    pub fn table_len(&self) -> usize {
        self.table_len_u128() as usize
    }

    fn table_len_u128(&self) -> u128 {
        let alice = 1u128 << (2 * self.n);
        alice * self.m_b as u128 * (1u128 << self.k)
    }

    /// Offset of `(x, y, a, b)`; all arguments packed.
    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.m_b + y) * self.num_settings() + a) * self.num_bob_outcomes() + b
    }

    /// Number of outcome cells `(a, b)` per input tuple.
    pub fn block_len(&self) -> usize {
        self.num_settings() * self.num_bob_outcomes()
    }

    fn require(&self, kind: ScenarioKind) -> Result<()> {
        if self.kind() != kind {
            return Err(Error::Shape(format!(
                "operation needs a {kind:?} scenario, behavior is {:?}",
                self.kind()
            )));
        }
        Ok(())
    }
}

/// Conditional probability table `P(a, b | x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviorRepr", into = "BehaviorRepr")]
pub struct Behavior {
    spec: ScenarioSpec,
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BehaviorRepr {
    spec: ScenarioSpec,
    /// Flat table, index `((x * m_b + y) * 2^n + a) * 2^k + b`.
    table: Vec<f64>,
}

impl TryFrom<BehaviorRepr> for Behavior {
    type Error = Error;
    fn try_from(r: BehaviorRepr) -> Result<Self> {
        Behavior::new(r.spec, r.table)
    }
}

impl From<Behavior> for BehaviorRepr {
    fn from(b: Behavior) -> Self {
        BehaviorRepr {
            spec: b.spec,
            table: b.table,
        }
    }
}

impl Behavior {
    /// Validates and clips a raw table.
    pub fn new(spec: ScenarioSpec, mut table: Vec<f64>) -> Result<Self> {
        if table.len() != spec.table_len() {
            return Err(Error::Shape(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                spec.table_len()
            )));
        }
        for (idx, p) in table.iter_mut().enumerate() {
            if !p.is_finite() || *p < -NEGATIVE_ENTRY_TOL {
                return Err(Error::Validation(format!("entry {idx} is {p}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let block = spec.block_len();
        for (input, chunk) in table.chunks(block).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Validation(format!("input tuple {input} sums to {total}")));
            }
        }
        Ok(Behavior { spec, table })
    }

    /// Builds a table from `f(x, y, a, b)` over packed indices.
    pub fn from_fn(spec: ScenarioSpec, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut table = Vec::with_capacity(spec.table_len());
        for x in 0..spec.num_settings() {
            for y in 0..spec.m_b() {
                for a in 0..spec.num_settings() {
                    for b in 0..spec.num_bob_outcomes() {
                        table.push(f(x, y, a, b));
                    }
                }
            }
        }
        Self::new(spec, table)
    }

    /// Every outcome equally likely.
    pub fn uniform(spec: ScenarioSpec) -> Self {
        let p = 1.0 / spec.block_len() as f64;
        Behavior {
            spec,
            table: vec![p; spec.table_len()],
        }
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn prob(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.table[self.spec.index(x, y, a, b)]
    }

    /// Outcome distribution for one input tuple, indexed by `a * 2^k + b`.
    pub fn block(&self, x: usize, y: usize) -> &[f64] {
        let start = self.spec.index(x, y, 0, 0);
        &self.table[start..start + self.spec.block_len()]
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Behavior, lambda: f64) -> Result<Behavior> {
        if self.spec != other.spec {
            return Err(Error::Shape("mixing behaviors of different scenarios".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("mixing weight {lambda}")));
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(p, q)| lambda * p + (1.0 - lambda) * q)
            .collect();
        Behavior::new(self.spec, table)
    }

    /// Largest entrywise difference between two tables of the same scenario.
    pub fn max_abs_diff(&self, other: &Behavior) -> f64 {
        if self.spec != other.spec {
            return f64::INFINITY;
        }
        self.table
            .iter()
            .zip(&other.table)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    fn check_settings(&self, settings: &[u8]) -> Result<usize> {
        if settings.len() != self.spec.n() || settings.iter().any(|&s| s > 1) {
            return Err(Error::Shape(format!(
                "settings {settings:?} for {} binary parties",
                self.spec.n()
            )));
        }
        Ok(pack_bits(settings))
    }

    /// `⟨A_{x_1} … A_{x_n} B_y⟩ = Σ (−1)^{b + Σ a_i} P(a, b | x, y)`.
    pub fn full_correlator(&self, settings: &[u8], y: usize) -> Result<f64> {
        self.spec.require(ScenarioKind::TwoToTwo)?;
        let x = self.check_settings(settings)?;
        if y >= 2 {
            return Err(Error::Index { index: y, len: 2 });
        }
        Ok(self.full_correlator_packed(x, y))
    }

    pub(crate) fn full_correlator_packed(&self, x: usize, y: usize) -> f64 {
        self.block(x, y)
            .chunks(2)
            .enumerate()
            .map(|(a, pb)| sign(parity(a)) * (pb[0] - pb[1]))
            .sum()
    }

    /// `⟨A_{x_1} … A_{x_n} B^j⟩`: Bob's bits other than `b^j` are
    /// marginalized. `bit` is zero-based, so `bit = 0` is `b^1`.
    pub fn bit_correlator(&self, settings: &[u8], bit: usize) -> Result<f64> {
        self.spec.require(ScenarioKind::SingleMeasurement)?;
        let x = self.check_settings(settings)?;
        if bit >= self.spec.k() {
            return Err(Error::Index {
                index: bit,
                len: self.spec.k(),
            });
        }
        Ok(self.bit_correlator_packed(x, bit))
    }

    pub(crate) fn bit_correlator_packed(&self, x: usize, bit: usize) -> f64 {
        let k = self.spec.k();
        let shift = k - 1 - bit;
        let nb = self.spec.num_bob_outcomes();
        self.block(x, 0)
            .chunks(nb)
            .enumerate()
            .map(|(a, pb)| {
                let sa = sign(parity(a));
                pb.iter()
                    .enumerate()
                    .map(|(b, p)| sa * sign(b >> shift) * p)
                    .sum::<f64>()
            })
            .sum()
    }

    /// `I = 2^{-n} Σ_x ⟨A_x B_0⟩` and `J = 2^{-n} Σ_x (−1)^{Σ x_i} ⟨A_x B_1⟩`.
    pub fn compute_i_j(&self) -> Result<IJValues> {
        self.spec.require(ScenarioKind::TwoToTwo)?;
        let settings = self.spec.num_settings();
        let (mut i, mut j) = (0.0, 0.0);
        for x in 0..settings {
            i += self.full_correlator_packed(x, 0);
            j += sign(parity(x)) * self.full_correlator_packed(x, 1);
        }
        let norm = settings as f64;
        Ok(IJValues::Pair {
            i: i / norm,
            j: j / norm,
        })
    }

    /// `I_j = 2^{-n} Σ_x (−1)^{g_j(x)} ⟨A_x B^j⟩` for every `g_j` in
    /// [`GjFamily`] order.
    pub fn compute_i_vector(&self) -> Result<IJValues> {
        self.spec.require(ScenarioKind::SingleMeasurement)?;
        let n = self.spec.n();
        if n < 2 {
            return Err(Error::Shape("I-vector needs n >= 2".into()));
        }
        let family = GjFamily::new(n)?;
        let settings = self.spec.num_settings();
        let values = (0..family.len())
            .map(|j| {
                let total: f64 = (0..settings)
                    .map(|x| sign(family.eval_packed(j, x)) * self.bit_correlator_packed(x, j))
                    .sum();
                total / settings as f64
            })
            .collect();
        Ok(IJValues::Vector { values })
    }
}

/// The linear functionals entering the n-locality inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum IJValues {
    /// `(I, J)` in the two-measurement scenario.
    Pair { i: f64, j: f64 },
    /// `(I_1, …, I_{2^{n−1}})` in the single-measurement scenario.
    Vector { values: Vec<f64> },
}

impl IJValues {
    pub fn pair(i: f64, j: f64) -> Self {
        IJValues::Pair { i, j }
    }

    pub fn vector(values: Vec<f64>) -> Self {
        IJValues::Vector { values }
    }

    pub fn kind(&self) -> ScenarioKind {
        match self {
            IJValues::Pair { .. } => ScenarioKind::TwoToTwo,
            IJValues::Vector { .. } => ScenarioKind::SingleMeasurement,
        }
    }

    pub fn as_pair(&self) -> Option<(f64, f64)> {
        match *self {
            IJValues::Pair { i, j } => Some((i, j)),
            IJValues::Vector { .. } => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            IJValues::Vector { values } => Some(values),
            IJValues::Pair { .. } => None,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            IJValues::Pair { i, j } => vec![*i, *j],
            IJValues::Vector { values } => values.clone(),
        }
    }
}
