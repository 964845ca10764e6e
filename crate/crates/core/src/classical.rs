//! n-local hidden-variable strategies for the star network.
//!
//! Each source `i` carries an independent variable `λ_i` with finite support
//! and weights `q_i`. Alice `i` answers from `(x_i, λ_i)` only, while Bob sees
//! every `λ`:
//!
//! ```text
//! P(a, b | x, y) = Σ_λ Π_i q_i(λ_i) P(a_i | x_i, λ_i) · P(b | y, λ_1 … λ_n)
//! ```
//!
//! Local randomness of the edge parties is folded into the source variable,
//! so one slot per source is enough.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Behavior, ScenarioSpec};

/// Tolerance on the normalization of weights and response tables.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Largest Bob response table (`Π L_i · m_b · 2^k`).
pub const MAX_RESPONSE_LEN: usize = 1 << 24;
/// Largest number of behaviors [`enumerate_deterministic_nlocal`] will yield.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

fn check_distribution(what: &str, probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Validation(format!("{what} has a negative entry")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Validation(format!("{what} sums to {total}")));
    }
    Ok(())
}

/// Finite n-local model.
///
/// `alice[i][(λ * 2 + x) * 2 + a] = P(a | x, λ)` for source `i`, and
/// `bob[(λ * m_b + y) * 2^k + b] = P(b | y, λ)` with the tuple `λ` packed in
/// mixed radix, `λ_1` most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyRepr", into = "StrategyRepr")]
pub struct NLocalStrategy {
    spec: ScenarioSpec,
    sources: Vec<Vec<f64>>,
    alice: Vec<Vec<f64>>,
    bob: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StrategyRepr {
    spec: ScenarioSpec,
    sources: Vec<Vec<f64>>,
    alice: Vec<Vec<f64>>,
    bob: Vec<f64>,
}

impl TryFrom<StrategyRepr> for NLocalStrategy {
    type Error = Error;
    fn try_from(r: StrategyRepr) -> Result<Self> {
        NLocalStrategy::new(r.spec, r.sources, r.alice, r.bob)
    }
}

impl From<NLocalStrategy> for StrategyRepr {
    fn from(s: NLocalStrategy) -> Self {
        StrategyRepr {
            spec: s.spec,
            sources: s.sources,
            alice: s.alice,
            bob: s.bob,
        }
    }
}

impl NLocalStrategy {
    pub fn new(spec: ScenarioSpec, sources: Vec<Vec<f64>>, alice: Vec<Vec<f64>>, bob: Vec<f64>) -> Result<Self> {
        let n = spec.n();
        if sources.len() != n || alice.len() != n {
            return Err(Error::Shape(format!(
                "{} sources and {} Alice tables for n = {n}",
                sources.len(),
                alice.len()
            )));
        }
        for (i, q) in sources.iter().enumerate() {
            if q.is_empty() {
                return Err(Error::Shape(format!("source {i} has empty support")));
            }
            check_distribution(&format!("weights of source {i}"), q)?;
        }
        for (i, table) in alice.iter().enumerate() {
            if table.len() != sources[i].len() * 4 {
                return Err(Error::Shape(format!(
                    "Alice {i} table has {} entries, expected {}",
                    table.len(),
                    sources[i].len() * 4
                )));
            }
            for (row, pair) in table.chunks(2).enumerate() {
                check_distribution(&format!("Alice {i} row {row}"), pair)?;
            }
        }
        let tuples = sources
            .iter()
            .try_fold(1u128, |acc, q| acc.checked_mul(q.len() as u128))
            .unwrap_or(u128::MAX);
        let needed = tuples * spec.m_b() as u128 * spec.num_bob_outcomes() as u128;
        if needed > MAX_RESPONSE_LEN as u128 {
            return Err(Error::Size {
                what: "Bob response table",
                needed,
                limit: MAX_RESPONSE_LEN as u128,
            });
        }
        if bob.len() as u128 != needed {
            return Err(Error::Shape(format!(
                "Bob table has {} entries, expected {needed}",
                bob.len()
            )));
        }
        for (row, dist) in bob.chunks(spec.num_bob_outcomes()).enumerate() {
            check_distribution(&format!("Bob row {row}"), dist)?;
        }
        Ok(NLocalStrategy {
            spec,
            sources,
            alice,
            bob,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn source_weights(&self, i: usize) -> &[f64] {
        &self.sources[i]
    }

    pub fn supports(&self) -> Vec<usize> {
        self.sources.iter().map(Vec::len).collect()
    }

    /// `P(a | x, λ)` of Alice `i`.
    pub fn alice_prob(&self, i: usize, lambda: usize, x: usize, a: usize) -> f64 {
        self.alice[i][(lambda * 2 + x) * 2 + a]
    }

    /// `P(b | y, λ)` for the packed tuple `λ`.
    pub fn bob_prob(&self, lambda: usize, y: usize, b: usize) -> f64 {
        self.bob[(lambda * self.spec.m_b() + y) * self.spec.num_bob_outcomes() + b]
    }

    /// Packs a hidden-variable tuple, `λ_1` most significant.
    pub fn pack_lambda(&self, lambdas: &[usize]) -> usize {
        lambdas
            .iter()
            .zip(&self.sources)
            .fold(0, |acc, (&l, q)| acc * q.len() + l)
    }

    pub fn to_behavior(&self) -> Result<Behavior> {
        strategy_to_behavior(self, &self.spec)
    }
}

/// Exact finite mixture realizing the strategy as a behavior.
pub fn strategy_to_behavior(s: &NLocalStrategy, spec: &ScenarioSpec) -> Result<Behavior> {
    if s.spec != *spec {
        return Err(Error::Shape(format!(
            "strategy built for {:?}, requested {spec:?}",
            s.spec
        )));
    }
    let n = spec.n();
    let settings = spec.num_settings();
    let nb = spec.num_bob_outcomes();
    let m_b = spec.m_b();
    let supports = s.supports();
    let tuples: usize = supports.iter().product();

    let mut table = vec![0.0; spec.table_len()];
    let mut lambdas = vec![0usize; n];
    // Π_i P(a_i | x_i, λ_i), indexed x * 2^n + a.
    let mut alice_prod = vec![0.0; settings * settings];
    for packed in 0..tuples {
        let weight: f64 = lambdas.iter().enumerate().map(|(i, &l)| s.sources[i][l]).product();
        if weight > 0.0 {
            fill_alice_product(s, &lambdas, &mut alice_prod);
            for x in 0..settings {
                for y in 0..m_b {
                    let bob_row = &s.bob[(packed * m_b + y) * nb..(packed * m_b + y + 1) * nb];
                    for a in 0..settings {
                        let c = weight * alice_prod[x * settings + a];
                        if c == 0.0 {
                            continue;
                        }
                        let start = spec.index(x, y, a, 0);
                        for (cell, p) in table[start..start + nb].iter_mut().zip(bob_row) {
                            *cell += c * p;
                        }
                    }
                }
            }
        }
        // Mixed-radix increment, last source fastest.
        for i in (0..n).rev() {
            lambdas[i] += 1;
            if lambdas[i] < supports[i] {
                break;
            }
            lambdas[i] = 0;
        }
    }
    Behavior::new(*spec, table)
}

fn fill_alice_product(s: &NLocalStrategy, lambdas: &[usize], out: &mut [f64]) {
    // Grow the (x, a) product one party at a time; after `i` parties the
    // entry for prefixes (x, a) sits at x * 2^i + a.
    out[0] = 1.0;
    let mut width = 1usize;
    let mut scratch = vec![0.0; out.len()];
    for (i, &l) in lambdas.iter().enumerate() {
        let next = width * 2;
        for x in 0..width {
            for a in 0..width {
                let base = out[x * width + a];
                for xi in 0..2 {
                    for ai in 0..2 {
                        scratch[(x * 2 + xi) * next + a * 2 + ai] = base * s.alice_prob(i, l, xi, ai);
                    }
                }
            }
        }
        out[..next * next].copy_from_slice(&scratch[..next * next]);
        width = next;
    }
}

/// Local randomness `μ_i` of each edge party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRandomness {
    weights: Vec<Vec<f64>>,
}

impl LocalRandomness {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        for (i, w) in weights.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::Shape(format!("party {i} has empty local support")));
            }
            check_distribution(&format!("local weights of party {i}"), w)?;
        }
        Ok(LocalRandomness { weights })
    }

    /// Binary `μ_i` with `P(μ_i = 0) = p0` for all `n` parties.
    pub fn binary(n: usize, p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::Domain(format!("probability {p0} outside [0, 1]")));
        }
        Self::new(vec![vec![p0, 1.0 - p0]; n])
    }

    /// Deterministic `μ` given as a bit string, party 1 first.
    pub fn fixed(bits: &[u8]) -> Result<Self> {
        Self::new(
            bits.iter()
                .map(|&b| if b == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
                .collect(),
        )
    }

    pub fn parties(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }
}

/// Sign pattern for `(I, J)` produced by [`theorem1_saturating_strategy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrant {
    PlusPlus,
    MinusPlus,
    PlusMinus,
    MinusMinus,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::PlusPlus,
        Quadrant::MinusPlus,
        Quadrant::PlusMinus,
        Quadrant::MinusMinus,
    ];

    /// Whether Bob flips his bit for setting `y`.
    fn flips(self, y: usize) -> bool {
        matches!(
            (self, y),
            (Quadrant::MinusPlus | Quadrant::MinusMinus, 0) | (Quadrant::PlusMinus | Quadrant::MinusMinus, 1)
        )
    }

    pub fn signs(self) -> (f64, f64) {
        let s = |y| if self.flips(y) { -1.0 } else { 1.0 };
        (s(0), s(1))
    }
}

/// Uniform shared bit `λ_i`, local bits `μ_i`; Alice outputs `λ_i ⊕ μ_i x_i`
/// and every Bob bit is `⊕_i λ_i` (flipped per setting by `quadrant`).
///
/// Source `i` has support `2 · |μ_i|` with `v = λ_i · |μ_i| + μ_i`.
pub fn parity_strategy(spec: ScenarioSpec, local: &LocalRandomness, quadrant: Quadrant) -> Result<NLocalStrategy> {
    let n = spec.n();
    if local.parties() != n {
        return Err(Error::Shape(format!("{} local weights for n = {n}", local.parties())));
    }
    let mut sources = Vec::with_capacity(n);
    let mut alice = Vec::with_capacity(n);
    for i in 0..n {
        let mu = local.weights(i);
        if mu.len() > 2 {
            return Err(Error::Shape("local bits must be binary".into()));
        }
        let mut q = Vec::with_capacity(2 * mu.len());
        let mut table = Vec::with_capacity(8 * mu.len());
        for lambda in 0..2usize {
            for (m, &w) in mu.iter().enumerate() {
                q.push(0.5 * w);
                for x in 0..2 {
                    let a = lambda ^ (m & x);
                    table.extend(if a == 0 { [1.0, 0.0] } else { [0.0, 1.0] });
                }
            }
        }
        sources.push(q);
        alice.push(table);
    }
    let supports: Vec<usize> = sources.iter().map(Vec::len).collect();
    let tuples: usize = supports.iter().product();
    let (m_b, nb) = (spec.m_b(), spec.num_bob_outcomes());
    let mut bob = vec![0.0; tuples * m_b * nb];
    for packed in 0..tuples {
        // λ_i is the upper half of source i's support.
        let mut rest = packed;
        let mut lambda_parity = 0;
        for &len in supports.iter().rev() {
            lambda_parity ^= usize::from(rest % len >= len / 2);
            rest /= len;
        }
        for y in 0..m_b {
            let bit = lambda_parity ^ usize::from(quadrant.flips(y));
            // All k bits equal `bit`.
            let b = if bit == 1 { nb - 1 } else { 0 };
            bob[(packed * m_b + y) * nb + b] = 1.0;
        }
    }
    NLocalStrategy::new(spec, sources, alice, bob)
}

/// Strategy reaching `(I, J) = (±r^n, ±(1 − r)^n)`.
pub fn theorem1_saturating_strategy(n: usize, r: f64, quadrant: Quadrant) -> Result<NLocalStrategy> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, 1]")));
    }
    parity_strategy(ScenarioSpec::two_to_two(n)?, &LocalRandomness::binary(n, r)?, quadrant)
}

/// Strategy reaching `I_j = 2^{-n}` for every `j`.
pub fn theorem2_saturating_strategy(n: usize) -> Result<NLocalStrategy> {
    if n < 2 {
        return Err(Error::Domain(format!("needs n >= 2, got {n}")));
    }
    parity_strategy(
        ScenarioSpec::single_measurement(n)?,
        &LocalRandomness::binary(n, 0.5)?,
        Quadrant::PlusPlus,
    )
}

/// Behaviors of every strategy with point-mass sources and deterministic
/// responses.
pub struct DeterministicEnumeration {
    spec: ScenarioSpec,
    total: usize,
    next: usize,
}

impl DeterministicEnumeration {
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

impl Iterator for DeterministicEnumeration {
    type Item = Behavior;

    fn next(&mut self) -> Option<Behavior> {
        if self.next >= self.total {
            return None;
        }
        let code = self.next;
        self.next += 1;
        let spec = self.spec;
        let n = spec.n();
        let (m_b, nb) = (spec.m_b(), spec.num_bob_outcomes());
        // Low digits: Alice functions x -> a (4 each); high digits: Bob's
        // outcome per setting.
        let mut rest = code;
        let alice_fns: Vec<usize> = (0..n)
            .map(|_| {
                let f = rest % 4;
                rest /= 4;
                f
            })
            .collect();
        let bob_out: Vec<usize> = (0..m_b)
            .map(|_| {
                let b = rest % nb;
                rest /= nb;
                b
            })
            .collect();
        let alice = alice_fns
            .iter()
            .map(|&f| {
                (0..2)
                    .flat_map(|x| if (f >> x) & 1 == 0 { [1.0, 0.0] } else { [0.0, 1.0] })
                    .collect()
            })
            .collect();
        let mut bob = vec![0.0; m_b * nb];
        for (y, &b) in bob_out.iter().enumerate() {
            bob[y * nb + b] = 1.0;
        }
        let strategy = NLocalStrategy::new(spec, vec![vec![1.0]; n], alice, bob).expect("enumerated strategy is valid");
        Some(strategy.to_behavior().expect("shapes match"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (left, Some(left))
    }
}

/// Enumerates deterministic n-local behaviors, `4^n · (2^k)^{m_b}` of them.
pub fn enumerate_deterministic_nlocal(n: usize, spec: &ScenarioSpec) -> Result<DeterministicEnumeration> {
    if spec.n() != n {
        return Err(Error::Shape(format!("n = {n} but scenario has n = {}", spec.n())));
    }
    if n > 3 {
        return Err(Error::Size {
            what: "enumeration parties",
            needed: n as u128,
            limit: 3,
        });
    }
    let bob_choices = (spec.num_bob_outcomes() as u128).pow(spec.m_b() as u32);
    let total = 4u128.pow(n as u32) * bob_choices;
    if total > ENUMERATION_BUDGET {
        return Err(Error::Size {
            what: "deterministic enumeration",
            needed: total,
            limit: ENUMERATION_BUDGET,
        });
    }
    Ok(DeterministicEnumeration {
        spec: *spec,
        total: total as usize,
        next: 0,
    })
}

fn random_distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    // Half the rows are deterministic; extreme responses are where bounds bite.
    if rng.random_bool(0.5) {
        let mut v = vec![0.0; len];
        v[rng.random_range(0..len)] = 1.0;
        return v;
    }
    // Flat Dirichlet via normalized exponentials.
    let raw: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // Push the rounding residue into the largest entry.
    let residue = 1.0 - v.iter().sum::<f64>();
    let imax = (0..len).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
    v[imax] += residue;
    v
}

/// Seeded random n-local strategy with `support` values per source.
pub fn sample_random_nlocal(n: usize, spec: &ScenarioSpec, support: usize, seed: u64) -> Result<NLocalStrategy> {
    if spec.n() != n {
        return Err(Error::Shape(format!("n = {n} but scenario has n = {}", spec.n())));
    }
    if support == 0 {
        return Err(Error::Domain("support must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            if support == 1 {
                vec![1.0]
            } else {
                let raw: Vec<f64> = (0..support).map(|_| rng.random::<f64>() + 1e-3).collect();
                let total: f64 = raw.iter().sum();
                let mut q: Vec<f64> = raw.iter().map(|w| w / total).collect();
                let residue = 1.0 - q.iter().sum::<f64>();
                q[0] += residue;
                q
            }
        })
        .collect();
    let alice = (0..n)
        .map(|_| {
            (0..support * 2)
                .flat_map(|_| random_distribution(&mut rng, 2))
                .collect()
        })
        .collect();
    let rows = support.pow(n as u32) * spec.m_b();
    let bob = (0..rows)
        .flat_map(|_| random_distribution(&mut rng, spec.num_bob_outcomes()))
        .collect();
    NLocalStrategy::new(*spec, sources, alice, bob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{abs_root, evaluate_theorem1, evaluate_theorem2, GjFamily};
    use crate::scenario::unpack_bits;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn deterministic_zero_strategy_is_a_point_distribution() {
        let spec = ScenarioSpec::two_to_two(2).unwrap();
        let s = NLocalStrategy::new(
            spec,
            vec![vec![1.0]; 2],
            vec![vec![1.0, 0.0, 1.0, 0.0]; 2],
            vec![1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let beh = s.to_behavior().unwrap();
        for x in 0..4 {
            for y in 0..2 {
                assert_eq!(beh.prob(x, y, 0, 0), 1.0);
            }
        }
    }

    #[test]
    fn rejects_bad_strategies() {
        let spec = ScenarioSpec::two_to_two(1).unwrap();
        let ok_alice = vec![vec![1.0, 0.0, 1.0, 0.0]];
        assert!(NLocalStrategy::new(spec, vec![vec![0.5, 0.6]], ok_alice.clone(), vec![]).is_err());
        assert!(NLocalStrategy::new(spec, vec![vec![1.0]], vec![vec![1.0, 0.0]], vec![0.5; 4]).is_err());
        assert!(NLocalStrategy::new(spec, vec![vec![1.0]], ok_alice.clone(), vec![0.5, 0.4, 0.5, 0.5]).is_err());
        assert!(NLocalStrategy::new(spec, vec![vec![1.0]], ok_alice, vec![0.5; 4]).is_ok());
    }

    #[test]
    fn mixture_matches_loop_nest_oracle() {
        // Independent oracle: explicit nested sums over λ_1, λ_2, λ_3.
        let n = 3;
        let spec = ScenarioSpec::two_to_two(n).unwrap();
        let s = sample_random_nlocal(n, &spec, 3, 99).unwrap();
        let beh = s.to_behavior().unwrap();
        let mut worst = 0.0f64;
        for x in 0..8 {
            let xb = unpack_bits(x, 3);
            for y in 0..2 {
                for a in 0..8 {
                    let ab = unpack_bits(a, 3);
                    for b in 0..2 {
                        let mut p = 0.0;
                        for l1 in 0..3 {
                            for l2 in 0..3 {
                                for l3 in 0..3 {
                                    let ls = [l1, l2, l3];
                                    let mut term = s.bob_prob(l1 * 9 + l2 * 3 + l3, y, b);
                                    for i in 0..3 {
                                        term *= s.source_weights(i)[ls[i]]
                                            * s.alice_prob(i, ls[i], xb[i] as usize, ab[i] as usize);
                                    }
                                    p += term;
                                }
                            }
                        }
                        worst = worst.max((p - beh.prob(x, y, a, b)).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-14, "{worst}");
    }

    #[test]
    fn two_source_mixture_matches_double_sum() {
        let spec = ScenarioSpec::single_measurement(2).unwrap();
        let s = sample_random_nlocal(2, &spec, 3, 5).unwrap();
        let beh = s.to_behavior().unwrap();
        for x in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    let mut p = 0.0;
                    for l1 in 0..3 {
                        for l2 in 0..3 {
                            p += s.source_weights(0)[l1]
                                * s.source_weights(1)[l2]
                                * s.alice_prob(0, l1, x >> 1, a >> 1)
                                * s.alice_prob(1, l2, x & 1, a & 1)
                                * s.bob_prob(l1 * 3 + l2, 0, b);
                        }
                    }
                    assert_close(p, beh.prob(x, 0, a, b), 1e-14);
                }
            }
        }
    }

    #[test]
    fn theorem1_strategy_points() {
        let ij = |n, r, q| {
            theorem1_saturating_strategy(n, r, q)
                .unwrap()
                .to_behavior()
                .unwrap()
                .compute_i_j()
                .unwrap()
                .as_pair()
                .unwrap()
        };
        let (i, j) = ij(2, 1.0, Quadrant::PlusPlus);
        assert_close(i, 1.0, 1e-12);
        assert_close(j, 0.0, 1e-12);
        let (i, j) = ij(2, 0.5, Quadrant::PlusPlus);
        assert_close(i, 0.25, 1e-12);
        assert_close(j, 0.25, 1e-12);
        let (i, j) = ij(3, 0.0, Quadrant::PlusPlus);
        assert_close(i, 0.0, 1e-12);
        assert_close(j, 1.0, 1e-12);
        let (i, j) = ij(2, 0.5, Quadrant::MinusPlus);
        assert_close(i, -0.25, 1e-12);
        assert_close(j, 0.25, 1e-12);
        for q in Quadrant::ALL {
            let (si, sj) = q.signs();
            let (i, j) = ij(3, 0.3, q);
            assert_close(i, si * 0.3f64.powi(3), 1e-12);
            assert_close(j, sj * 0.7f64.powi(3), 1e-12);
        }
    }

    #[test]
    fn theorem1_strategy_traces_the_boundary() {
        for n in 2..=4 {
            for step in 0..=40 {
                let r = step as f64 / 40.0;
                let beh = theorem1_saturating_strategy(n, r, Quadrant::PlusPlus)
                    .unwrap()
                    .to_behavior()
                    .unwrap();
                let rep = evaluate_theorem1(&beh.compute_i_j().unwrap(), n).unwrap();
                assert_close(rep.lhs, 1.0, 1e-9);
            }
        }
    }

    #[test]
    fn theorem2_strategy_points() {
        for n in [2usize, 3] {
            let beh = theorem2_saturating_strategy(n).unwrap().to_behavior().unwrap();
            let ij = beh.compute_i_vector().unwrap();
            for v in ij.values() {
                assert_close(v, 2f64.powi(-(n as i32)), 1e-12);
            }
            let rep = evaluate_theorem2(&ij, n).unwrap();
            assert_close(rep.lhs, 2f64.powi(n as i32 - 2), 1e-12);
        }
    }

    #[test]
    fn parity_bookkeeping_for_fixed_mu() {
        let spec = ScenarioSpec::single_measurement(3).unwrap();
        let family = GjFamily::new(3).unwrap();
        for mu in 0..8usize {
            let bits = unpack_bits(mu, 3);
            let s = parity_strategy(spec, &LocalRandomness::fixed(&bits).unwrap(), Quadrant::PlusPlus).unwrap();
            let v = s.to_behavior().unwrap().compute_i_vector().unwrap().values();
            for (j, val) in v.iter().enumerate() {
                let hit = mu.count_ones() % 2 == 0
                    && family.label(j).as_bytes() == bits.iter().map(|b| b'0' + b).collect::<Vec<u8>>().as_slice();
                assert_close(*val, if hit { 1.0 } else { 0.0 }, 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_n2_extremes() {
        let spec = ScenarioSpec::two_to_two(2).unwrap();
        let all = enumerate_deterministic_nlocal(2, &spec).unwrap();
        assert_eq!(all.len(), 64);
        let (mut best_lin, mut best_root) = (0.0f64, 0.0f64);
        for beh in all {
            let (i, j) = beh.compute_i_j().unwrap().as_pair().unwrap();
            best_lin = best_lin.max(i.abs() + j.abs());
            best_root = best_root.max(abs_root(i, 2) + abs_root(j, 2));
        }
        assert_close(best_lin, 1.0, 1e-12);
        assert_close(best_root, 1.0, 1e-12);
    }

    #[test]
    fn enumeration_guards() {
        let spec = ScenarioSpec::two_to_two(4).unwrap();
        assert!(matches!(
            enumerate_deterministic_nlocal(4, &spec),
            Err(Error::Size { .. })
        ));
        let spec = ScenarioSpec::two_to_two(2).unwrap();
        assert!(enumerate_deterministic_nlocal(3, &spec).is_err());
        let spec = ScenarioSpec::single_measurement(3).unwrap();
        let it = enumerate_deterministic_nlocal(3, &spec).unwrap();
        assert_eq!(it.len(), 64 * 16);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let spec = ScenarioSpec::two_to_two(3).unwrap();
        let a = sample_random_nlocal(3, &spec, 4, 1234).unwrap();
        let b = sample_random_nlocal(3, &spec, 4, 1234).unwrap();
        let c = sample_random_nlocal(3, &spec, 4, 1235).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn support_one_gives_product_behavior() {
        let spec = ScenarioSpec::two_to_two(2).unwrap();
        let s = sample_random_nlocal(2, &spec, 1, 8).unwrap();
        let beh = s.to_behavior().unwrap();
        for x in 0..4 {
            for y in 0..2 {
                for a in 0..4 {
                    for b in 0..2 {
                        let product =
                            s.alice_prob(0, 0, x >> 1, a >> 1) * s.alice_prob(1, 0, x & 1, a & 1) * s.bob_prob(0, y, b);
                        assert_close(beh.prob(x, y, a, b), product, 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_strategies_respect_both_theorems() {
        for seed in 0..500 {
            let spec = ScenarioSpec::two_to_two(3).unwrap();
            let beh = sample_random_nlocal(3, &spec, 3, seed).unwrap().to_behavior().unwrap();
            let rep = evaluate_theorem1(&beh.compute_i_j().unwrap(), 3).unwrap();
            assert!(rep.margin <= 1e-9, "seed {seed}: {rep:?}");
            let spec = ScenarioSpec::single_measurement(3).unwrap();
            let beh = sample_random_nlocal(3, &spec, 2, seed).unwrap().to_behavior().unwrap();
            let rep = evaluate_theorem2(&beh.compute_i_vector().unwrap(), 3).unwrap();
            assert!(rep.margin <= 1e-9, "seed {seed}: {rep:?}");
        }
    }

    #[test]
    fn strategy_json_round_trip() {
        let spec = ScenarioSpec::two_to_two(2).unwrap();
        let s = sample_random_nlocal(2, &spec, 3, 77).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: NLocalStrategy = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
    }
}
