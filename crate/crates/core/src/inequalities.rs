//! n-locality inequalities for the star network and their evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{parity, IJValues};

/// Margin above the bound before a value counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Largest `n` for which the g-family is materialized.
pub const MAX_GJ_PARTIES: usize = 20;

/// The `2^{n−1}` linear functions `g_j(x) = Σ_{i ∈ S_j} x_i` over subsets
/// `S_j` of even size.
///
/// Masks use bit `i − 1` for party `i` and are sorted ascending, which for
/// `n = 3` gives `∅, {1,2}, {1,3}, {2,3}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GjFamily {
    n: usize,
    masks: Vec<u32>,
    #[serde(skip)]
    packed: Vec<usize>,
}

impl GjFamily {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("g-family needs n >= 2, got {n}")));
        }
        if n > MAX_GJ_PARTIES {
            return Err(Error::Size {
                what: "g-family parties",
                needed: n as u128,
                limit: MAX_GJ_PARTIES as u128,
            });
        }
        let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() % 2 == 0).collect();
        // Same subsets in the packed-settings convention (party 1 most significant).
        let packed = masks
            .iter()
            .map(|&m| {
                (0..n)
                    .filter(|i| m >> i & 1 == 1)
                    .fold(0usize, |acc, i| acc | 1 << (n - 1 - i))
            })
            .collect();
        Ok(GjFamily { n, masks, packed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Raw masks, bit `i − 1` set when `x_i` appears in `g_j`.
    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    /// One-based parties appearing in `g_j` (`j` zero-based).
    pub fn parties(&self, j: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|i| self.masks[j] >> i & 1 == 1)
            .map(|i| i + 1)
            .collect()
    }

    /// Whether party `i` (zero-based) appears in `g_j`.
    pub fn contains(&self, j: usize, party: usize) -> bool {
        self.masks[j] >> party & 1 == 1
    }

    /// `g_j` written as a party-ordered bit string, e.g. `"110"` for `x_1 + x_2`.
    pub fn label(&self, j: usize) -> String {
        (0..self.n)
            .map(|i| if self.contains(j, i) { '1' } else { '0' })
            .collect()
    }

    /// `g_j(x) mod 2` for explicit settings.
    pub fn eval(&self, j: usize, settings: &[u8]) -> usize {
        settings
            .iter()
            .enumerate()
            .filter(|(i, _)| self.contains(j, *i))
            .map(|(_, &x)| x as usize)
            .sum::<usize>()
            & 1
    }

    /// `g_j(x) mod 2` with `x` packed party-1-first.
    #[inline]
    pub fn eval_packed(&self, j: usize, x: usize) -> usize {
        parity(self.packed[j] & x)
    }
}

/// Which inequality a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `|I|^{1/n} + |J|^{1/n} ≤ 1`.
    NLocalPair,
    /// `Σ_j |I_j|^{1/n} ≤ 2^{n−2}`.
    NLocalVector,
    /// `|I| + |J| ≤ 1`.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub inequality: InequalityKind,
    pub n: usize,
    pub ij: IJValues,
    pub lhs: f64,
    pub bound: f64,
    pub violated: bool,
    pub margin: f64,
}

impl InequalityReport {
    fn new(inequality: InequalityKind, n: usize, ij: IJValues, lhs: f64, bound: f64) -> Self {
        InequalityReport {
            inequality,
            n,
            ij,
            lhs,
            bound,
            violated: lhs > bound + VIOLATION_TOL,
            margin: lhs - bound,
        }
    }
}

/// `|v|^{1/n}`, with `0^{1/n} = 0`.
pub fn abs_root(v: f64, n: usize) -> f64 {
    let a = v.abs();
    if a == 0.0 {
        0.0
    } else {
        (a.ln() / n as f64).exp()
    }
}

fn pair_of(ij: &IJValues) -> Result<(f64, f64)> {
    ij.as_pair()
        .ok_or_else(|| Error::Shape("inequality needs an (I, J) pair".into()))
}

/// `|I|^{1/n} + |J|^{1/n} ≤ 1`.
pub fn evaluate_theorem1(ij: &IJValues, n: usize) -> Result<InequalityReport> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let (i, j) = pair_of(ij)?;
    let lhs = abs_root(i, n) + abs_root(j, n);
    Ok(InequalityReport::new(
        InequalityKind::NLocalPair,
        n,
        ij.clone(),
        lhs,
        1.0,
    ))
}

/// `Σ_j |I_j|^{1/n} ≤ 2^{n−2}`.
pub fn evaluate_theorem2(ij: &IJValues, n: usize) -> Result<InequalityReport> {
    let values = ij
        .as_vector()
        .ok_or_else(|| Error::Shape("inequality needs an I-vector".into()))?;
    if n < 2 {
        return Err(Error::Domain(format!("needs n >= 2, got {n}")));
    }
    if values.len() != 1 << (n - 1) {
        return Err(Error::Shape(format!("I-vector of length {} for n = {n}", values.len())));
    }
    let lhs = values.iter().map(|&v| abs_root(v, n)).sum();
    let bound = 2f64.powi(n as i32 - 2);
    Ok(InequalityReport::new(
        InequalityKind::NLocalVector,
        n,
        ij.clone(),
        lhs,
        bound,
    ))
}

/// `|I| + |J| ≤ 1`, the bound without the independence of the sources.
pub fn evaluate_local_bound(ij: &IJValues) -> Result<InequalityReport> {
    let (i, j) = pair_of(ij)?;
    Ok(InequalityReport::new(
        InequalityKind::Local,
        0,
        ij.clone(),
        i.abs() + j.abs(),
        1.0,
    ))
}

/// Both sides of `Σ_k (Π_i x_i^k)^{1/n} ≤ Π_i (Σ_k x_i^k)^{1/n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Lemma1Sides {
    /// Holds up to `1e-12` relative to the magnitude of the right side.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12 * self.rhs.abs().max(1.0)
    }
}

/// Evaluates both sides for `rows[k][i] = x_i^k` (`m` rows, `n` columns).
pub fn lemma1_check(rows: &[Vec<f64>]) -> Result<Lemma1Sides> {
    let n = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("ragged matrix".into()));
    }
    if let Some(v) = rows.iter().flatten().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Domain(format!("entry {v} is not a non-negative real")));
    }
    let lhs = rows
        .iter()
        .map(|r| r.iter().product::<f64>().powf(1.0 / n as f64))
        .sum();
    let rhs = (0..n)
        .map(|i| rows.iter().map(|r| r[i]).sum::<f64>().powf(1.0 / n as f64))
        .product();
    Ok(Lemma1Sides { lhs, rhs })
}
