//! Born-rule behaviors for star networks of two-qubit sources.
//!
//! Each source `i` emits a state `ρ_i` on `(a_i, b_i)`; Alice `i` measures the
//! first qubit and Bob measures all second qubits jointly. Probabilities are
//! evaluated through Bob's conditional states
//! `σ_i(a|x) = tr_{a_i}((M_{a|x} ⊗ 1) ρ_i)`, so that
//! `P(a, b | x, y) = tr((σ_1(a_1|x_1) ⊗ … ⊗ σ_n(a_n|x_n)) M_{b|y})` and the
//! `4^n`-dimensional joint state is never formed.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::GjFamily;
use crate::scenario::{pack_bits, parity, Behavior, ScenarioSpec};
use crate::tensor::{build_state, mix_with_white_noise, Operator, Pauli, StateKind, NORM_TOL};

/// A positive operator-valued measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    dim: usize,
    effects: Vec<Operator>,
}

#[derive(Serialize, Deserialize)]
struct PovmRepr {
    dim: usize,
    effects: Vec<Operator>,
}

impl TryFrom<PovmRepr> for Povm {
    type Error = Error;
    fn try_from(r: PovmRepr) -> Result<Self> {
        let povm = Povm::new(r.effects)?;
        if povm.dim != r.dim {
            return Err(Error::Shape(format!(
                "declared dim {} but effects have dim {}",
                r.dim, povm.dim
            )));
        }
        Ok(povm)
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> Self {
        PovmRepr {
            dim: p.dim,
            effects: p.effects,
        }
    }
}

impl Povm {
    /// Checks positivity of every effect and completeness.
    pub fn new(effects: Vec<Operator>) -> Result<Self> {
        let dim = effects
            .first()
            .map(Operator::dim)
            .ok_or_else(|| Error::Shape("POVM without effects".into()))?;
        let mut total = Operator::zeros(dim);
        for (k, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::Shape(format!("effect {k} has dim {}, expected {dim}", e.dim())));
            }
            if !e.is_psd() {
                return Err(Error::Validation(format!("effect {k} is not positive semidefinite")));
            }
            total = &total + e;
        }
        let gap = total.max_abs_diff(&Operator::identity(dim));
        if gap > NORM_TOL {
            return Err(Error::Validation(format!("effects miss the identity by {gap}")));
        }
        Ok(Povm { dim, effects })
    }

    /// `{(1 + A)/2, (1 − A)/2}` for a `±1`-valued observable `A`.
    pub fn from_observable(obs: &Operator) -> Result<Self> {
        let id = Operator::identity(obs.dim());
        Povm::new(vec![(&id + obs).scale(0.5), (&id - obs).scale(0.5)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn effect(&self, outcome: usize) -> &Operator {
        &self.effects[outcome]
    }

    /// Detector with efficiency `eta` whose no-click events are reported as
    /// outcome 0: `E_0 = η M_0 + (1 − η) 1`, `E_b = η M_b` otherwise.
    pub fn with_efficiency(&self, eta: f64) -> Result<Povm> {
        check_unit("efficiency", eta)?;
        let effects = self
            .effects
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let kept = e.scale(eta);
                if k == 0 {
                    &kept + &Operator::identity(self.dim).scale(1.0 - eta)
                } else {
                    kept
                }
            })
            .collect();
        Povm::new(effects)
    }
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{what} {v} outside [0, 1]")));
    }
    Ok(())
}

/// Bob's measurement on his `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BobMeasurement {
    /// One joint POVM per setting, `2^k` outcomes each.
    Joint { povms: Vec<Povm> },
    /// Per setting, one binary POVM per qubit; the output is the parity of
    /// the qubit results.
    Wiring { qubits: Vec<Vec<Povm>> },
    /// A single parent POVM whose raw outcome `r` is mapped to the bits
    /// `bits[ℓ][r]`, `b^1` most significant.
    Processed { parent: Povm, bits: Vec<Vec<u8>> },
}

impl BobMeasurement {
    fn settings(&self) -> usize {
        match self {
            BobMeasurement::Joint { povms } => povms.len(),
            BobMeasurement::Wiring { qubits } => qubits.len(),
            BobMeasurement::Processed { .. } => 1,
        }
    }

    /// One POVM per setting over the packed output strings.
    pub fn joint_povms(&self) -> Result<Vec<Povm>> {
        let outcomes = match self {
            BobMeasurement::Joint { povms } => return Ok(povms.clone()),
            BobMeasurement::Wiring { .. } => 2,
            BobMeasurement::Processed { bits, .. } => 1 << bits.len(),
        };
        self.grouped_effects()?
            .into_iter()
            .map(|group| {
                let mut effects = vec![Operator::zeros(group[0].1.dim()); outcomes];
                for (b, e) in group {
                    effects[b] = e;
                }
                Povm::new(effects)
            })
            .collect()
    }

    /// Per setting, the effects grouped by packed output string.
    fn grouped_effects(&self) -> Result<Vec<Vec<(usize, Operator)>>> {
        match self {
            BobMeasurement::Joint { povms } => Ok(povms
                .iter()
                .map(|p| p.effects().iter().cloned().enumerate().collect())
                .collect()),
            BobMeasurement::Wiring { qubits } => qubits
                .iter()
                .map(|per_qubit| {
                    let joint = wired_parity_effects(per_qubit)?;
                    Ok(joint.into_iter().enumerate().collect())
                })
                .collect(),
            BobMeasurement::Processed { parent, bits } => {
                let k = bits.len();
                let mut grouped: Vec<Option<Operator>> = vec![None; 1 << k];
                for (r, e) in parent.effects().iter().enumerate() {
                    let string: Vec<u8> = bits.iter().map(|f| f[r]).collect();
                    let b = pack_bits(&string);
                    grouped[b] = Some(match grouped[b].take() {
                        Some(acc) => &acc + e,
                        None => e.clone(),
                    });
                }
                Ok(vec![grouped
                    .into_iter()
                    .enumerate()
                    .filter_map(|(b, e)| e.map(|e| (b, e)))
                    .collect()])
            }
        }
    }
}

/// `M_b = Σ_{b_1 ⊕ … ⊕ b_n = b} E^1_{b_1} ⊗ … ⊗ E^n_{b_n}`.
fn wired_parity_effects(per_qubit: &[Povm]) -> Result<Vec<Operator>> {
    let n = per_qubit.len();
    let mut effects = [Operator::zeros(1 << n), Operator::zeros(1 << n)];
    for bits in 0..1usize << n {
        let term = Operator::kron_all((0..n).map(|i| per_qubit[i].effect((bits >> (n - 1 - i)) & 1).clone()))?;
        let b = parity(bits);
        effects[b] = &effects[b] + &term;
    }
    Ok(effects.to_vec())
}

/// Alice and Bob measurements for a star network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssemblyRepr", into = "AssemblyRepr")]
pub struct MeasurementAssembly {
    spec: ScenarioSpec,
    alice: Vec<Vec<Povm>>,
    bob: BobMeasurement,
}

#[derive(Serialize, Deserialize)]
struct AssemblyRepr {
    spec: ScenarioSpec,
    alice: Vec<Vec<Povm>>,
    bob: BobMeasurement,
}

impl TryFrom<AssemblyRepr> for MeasurementAssembly {
    type Error = Error;
    fn try_from(r: AssemblyRepr) -> Result<Self> {
        MeasurementAssembly::new(r.spec, r.alice, r.bob)
    }
}

impl From<MeasurementAssembly> for AssemblyRepr {
    fn from(m: MeasurementAssembly) -> Self {
        AssemblyRepr {
            spec: m.spec,
            alice: m.alice,
            bob: m.bob,
        }
    }
}

impl MeasurementAssembly {
    pub fn new(spec: ScenarioSpec, alice: Vec<Vec<Povm>>, bob: BobMeasurement) -> Result<Self> {
        let n = spec.n();
        if alice.len() != n {
            return Err(Error::Shape(format!("{} Alice parties for n = {n}", alice.len())));
        }
        for (i, settings) in alice.iter().enumerate() {
            if settings.len() != 2 || settings.iter().any(|p| p.dim() != 2 || p.num_outcomes() != 2) {
                return Err(Error::Shape(format!("Alice {i} needs two binary qubit measurements")));
            }
        }
        if bob.settings() != spec.m_b() {
            return Err(Error::Shape(format!(
                "Bob has {} settings, scenario needs {}",
                bob.settings(),
                spec.m_b()
            )));
        }
        let bob_dim = 1usize << n;
        match &bob {
            BobMeasurement::Joint { povms } => {
                if povms
                    .iter()
                    .any(|p| p.dim() != bob_dim || p.num_outcomes() != spec.num_bob_outcomes())
                {
                    return Err(Error::Shape(format!(
                        "Bob POVMs must act on dim {bob_dim} with {} outcomes",
                        spec.num_bob_outcomes()
                    )));
                }
            }
            BobMeasurement::Wiring { qubits } => {
                if spec.k() != 1 {
                    return Err(Error::Shape("a parity wiring outputs a single bit".into()));
                }
                if qubits
                    .iter()
                    .any(|q| q.len() != n || q.iter().any(|p| p.dim() != 2 || p.num_outcomes() != 2))
                {
                    return Err(Error::Shape(format!(
                        "each Bob setting needs {n} binary qubit measurements"
                    )));
                }
            }
            BobMeasurement::Processed { parent, bits } => {
                if parent.dim() != bob_dim {
                    return Err(Error::Shape(format!(
                        "parent POVM has dim {}, expected {bob_dim}",
                        parent.dim()
                    )));
                }
                if bits.len() != spec.k() {
                    return Err(Error::Shape(format!(
                        "{} bit functions for k = {}",
                        bits.len(),
                        spec.k()
                    )));
                }
                if bits
                    .iter()
                    .any(|f| f.len() != parent.num_outcomes() || f.iter().any(|&b| b > 1))
                {
                    return Err(Error::Shape(
                        "bit functions must map every raw outcome to 0 or 1".into(),
                    ));
                }
            }
        }
        Ok(MeasurementAssembly { spec, alice, bob })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    /// `alice_povms()[i][x]`.
    pub fn alice_povms(&self) -> &[Vec<Povm>] {
        &self.alice
    }

    pub fn bob(&self) -> &BobMeasurement {
        &self.bob
    }
}

/// Detector efficiencies with no-click events binned to outcome 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    pub eta_alice: f64,
    pub eta_bob: f64,
    pub binning: Binning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    DeterministicZero,
}

impl EfficiencyModel {
    pub fn new(eta_alice: f64, eta_bob: f64) -> Result<Self> {
        check_unit("eta_alice", eta_alice)?;
        check_unit("eta_bob", eta_bob)?;
        Ok(EfficiencyModel {
            eta_alice,
            eta_bob,
            binning: Binning::DeterministicZero,
        })
    }

    /// Same efficiency on every detector.
    pub fn uniform(eta: f64) -> Result<Self> {
        Self::new(eta, eta)
    }

    fn validate(&self) -> Result<()> {
        check_unit("eta_alice", self.eta_alice)?;
        check_unit("eta_bob", self.eta_bob)
    }
}

fn check_states(states: &[Operator], n: usize) -> Result<()> {
    if states.len() != n {
        return Err(Error::Shape(format!("{} states for n = {n}", states.len())));
    }
    for (i, rho) in states.iter().enumerate() {
        if rho.dim() != 4 {
            return Err(Error::Shape(format!("state {i} has dim {}, expected 4", rho.dim())));
        }
        rho.validate_density()
            .map_err(|e| Error::Validation(format!("state {i}: {e}")))?;
    }
    Ok(())
}

/// `σ(a|x) = tr_A((M_{a|x} ⊗ 1) ρ)` for one source; indexed `[x][a]`.
pub fn assemblage(rho: &Operator, povms: &[Povm]) -> Result<Vec<Vec<Operator>>> {
    let id = Operator::identity(2);
    povms
        .iter()
        .map(|p| {
            p.effects()
                .iter()
                .map(|m| (&m.kron(&id)? * rho).partial_trace(&[2, 2], &[0]))
                .collect()
        })
        .collect()
}

/// Born-rule behavior of `n` two-qubit sources under `assembly`.
pub fn born_behavior(states: &[Operator], assembly: &MeasurementAssembly) -> Result<Behavior> {
    let spec = *assembly.spec();
    let n = spec.n();
    check_states(states, n)?;
    let sigma: Vec<Vec<Vec<Operator>>> = states
        .iter()
        .zip(assembly.alice_povms())
        .map(|(rho, povms)| assemblage(rho, povms))
        .collect::<Result<_>>()?;
    let bob = assembly.bob().grouped_effects()?;

    let settings = spec.num_settings();
    let mut table = vec![0.0; spec.table_len()];
    for x in 0..settings {
        for a in 0..settings {
            let steered = Operator::kron_all((0..n).map(|i| {
                let shift = n - 1 - i;
                sigma[i][(x >> shift) & 1][(a >> shift) & 1].clone()
            }))?;
            for (y, effects) in bob.iter().enumerate() {
                for (b, e) in effects {
                    table[spec.index(x, y, a, *b)] = steered.trace_product(e).re;
                }
            }
        }
    }
    Behavior::new(spec, table)
}

/// Literal parity measurements `M_{b|0} = Σ_{⊕b_i = b} Π^x_{b_1} ⊗ … ⊗ Π^x_{b_n}`
/// and the `Z` analogue.
pub fn parity_bob_povms(n: usize) -> Result<[Povm; 2]> {
    if n == 0 {
        return Err(Error::Domain("parity measurement needs n >= 1".into()));
    }
    let make = |p: Pauli| -> Result<Povm> {
        let qubit = Povm::from_observable(&p.matrix())?;
        Povm::new(wired_parity_effects(&vec![qubit; n])?)
    };
    Ok([make(Pauli::X)?, make(Pauli::Z)?])
}

fn qubit_observable(cx: f64, cz: f64) -> Operator {
    &Pauli::X.matrix().scale(cx) + &Pauli::Z.matrix().scale(cz)
}

/// Alice `A_0 = cos θ X + sin θ Z`, `A_1 = cos φ X + sin φ Z` for every
/// party; Bob wires single-qubit measurements of `−X` (`y = 0`) and `−Z`
/// (`y = 1`).
///
/// The sign on Bob's observables relabels each qubit outcome so that singlet
/// correlations come out positive: `⟨A_x ⊗ (−X)⟩ = ⟨A_x⟩·x̂` on `|ψ−⟩`.
pub fn rotated_assembly(n: usize, theta: f64, phi: f64) -> Result<MeasurementAssembly> {
    let spec = ScenarioSpec::two_to_two(n)?;
    let alice_pair = vec![
        Povm::from_observable(&qubit_observable(theta.cos(), theta.sin()))?,
        Povm::from_observable(&qubit_observable(phi.cos(), phi.sin()))?,
    ];
    let bob_x = Povm::from_observable(&qubit_observable(-1.0, 0.0))?;
    let bob_z = Povm::from_observable(&qubit_observable(0.0, -1.0))?;
    MeasurementAssembly::new(
        spec,
        vec![alice_pair; n],
        BobMeasurement::Wiring {
            qubits: vec![vec![bob_x; n], vec![bob_z; n]],
        },
    )
}

/// `A_{0/1} = (X ± Z)/√2` with Bob's wired `X`/`Z` parities.
pub fn chsh_assembly(n: usize) -> Result<MeasurementAssembly> {
    let q = std::f64::consts::FRAC_PI_4;
    rotated_assembly(n, q, -q)
}

/// `n` Werner states `v_i |ψ−⟩⟨ψ−| + (1 − v_i) 1/4`.
pub fn werner_network(visibilities: &[f64]) -> Result<Vec<Operator>> {
    let singlet = build_state(&StateKind::Singlet)?;
    visibilities
        .iter()
        .map(|&v| mix_with_white_noise(&singlet, v))
        .collect()
}

/// `n` noisy `|φ+⟩` states `v_i |φ+⟩⟨φ+| + (1 − v_i) 1/4`.
pub fn phi_plus_network(visibilities: &[f64]) -> Result<Vec<Operator>> {
    let phi = build_state(&StateKind::PhiPlus)?;
    visibilities.iter().map(|&v| mix_with_white_noise(&phi, v)).collect()
}

/// Bob's generalized Bell-state measurement with its coarse-grainings.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzParent {
    /// Rank-one projectors onto `ψ_r`, raw outcome `r = i_1 … i_n`.
    pub povm: Povm,
    /// Pauli strings with `Y` on the parties of `g_j` and `X` elsewhere.
    pub stabilizers: Vec<Vec<Pauli>>,
    /// `bit_functions[ℓ][r]` is the eigenvalue bit of `ψ_r` under `S_ℓ`.
    pub bit_functions: Vec<Vec<u8>>,
}

impl GhzParent {
    /// `(M^ℓ_0, M^ℓ_1)`.
    pub fn coarse_grained(&self, l: usize) -> (Operator, Operator) {
        let dim = self.povm.dim();
        let mut out = (Operator::zeros(dim), Operator::zeros(dim));
        for (r, e) in self.povm.effects().iter().enumerate() {
            if self.bit_functions[l][r] == 0 {
                out.0 = &out.0 + e;
            } else {
                out.1 = &out.1 + e;
            }
        }
        out
    }
}

pub const MAX_GHZ_PARTIES: usize = 4;

fn check_ghz_n(n: usize) -> Result<()> {
    if !(2..=MAX_GHZ_PARTIES).contains(&n) {
        return Err(Error::Domain(format!(
            "GHZ scenario supports 2 <= n <= {MAX_GHZ_PARTIES}, got {n}"
        )));
    }
    Ok(())
}

/// Projective measurement onto `Z^{i_1} ⊗ X^{i_2} ⊗ … ⊗ X^{i_n} |GHZ_n⟩`.
///
/// For a string `S` with `Y` on the set `T` (`|T|` even) and `X` elsewhere,
/// `S ψ_i = (−1)^{i_1 + Σ_{k ∈ T, k ≥ 2} i_k + |T|/2} ψ_i`, which gives the
/// bit functions.
pub fn ghz_parent_measurement(n: usize) -> Result<GhzParent> {
    check_ghz_n(n)?;
    let effects = (0..1usize << n)
        .map(|r| Ok(build_state(&StateKind::GenBell { n, label: r })?.projector()))
        .collect::<Result<Vec<_>>>()?;
    let povm = Povm::new(effects)?;
    let family = GjFamily::new(n)?;
    let mut stabilizers = Vec::with_capacity(family.len());
    let mut bit_functions = Vec::with_capacity(family.len());
    for j in 0..family.len() {
        let string: Vec<Pauli> = (0..n)
            .map(|p| if family.contains(j, p) { Pauli::Y } else { Pauli::X })
            .collect();
        let ys = family.parties(j).len();
        let bits = (0..1usize << n)
            .map(|r| {
                let mut bit = (r >> (n - 1)) & 1;
                for p in 1..n {
                    if family.contains(j, p) {
                        bit ^= (r >> (n - 1 - p)) & 1;
                    }
                }
                (bit ^ ((ys / 2) & 1)) as u8
            })
            .collect();
        stabilizers.push(string);
        bit_functions.push(bits);
    }
    Ok(GhzParent {
        povm,
        stabilizers,
        bit_functions,
    })
}

/// Alice `A_{0/1} = (X ± Y)/√2`, Bob's generalized Bell-state measurement.
pub fn ghz_assembly(n: usize) -> Result<MeasurementAssembly> {
    check_ghz_n(n)?;
    let spec = ScenarioSpec::single_measurement(n)?;
    let obs = |s: f64| (&Pauli::X.matrix() + &Pauli::Y.matrix().scale(s)).scale(FRAC_1_SQRT_2);
    let alice_pair = vec![Povm::from_observable(&obs(1.0))?, Povm::from_observable(&obs(-1.0))?];
    let parent = ghz_parent_measurement(n)?;
    MeasurementAssembly::new(
        spec,
        vec![alice_pair; n],
        BobMeasurement::Processed {
            parent: parent.povm,
            bits: parent.bit_functions,
        },
    )
}

/// Behavior of `n` noisy `|φ+⟩` sources in the generalized Bell-state setup.
pub fn ghz_behavior(n: usize, visibilities: &[f64]) -> Result<Behavior> {
    check_ghz_n(n)?;
    if visibilities.len() != n {
        return Err(Error::Shape(format!("{} visibilities for n = {n}", visibilities.len())));
    }
    born_behavior(&phi_plus_network(visibilities)?, &ghz_assembly(n)?)
}

/// Replaces each Alice outcome by 0 with probability `1 − η_A`.
///
/// Bob's losses cannot be expressed on a behavior (his parity wiring discards
/// the per-qubit results), so `eta_bob < 1` is rejected here; see
/// [`lossy_assembly`].
pub fn apply_inefficiency(beh: &Behavior, model: &EfficiencyModel) -> Result<Behavior> {
    model.validate()?;
    if model.eta_bob < 1.0 {
        return Err(Error::Unsupported(
            "Bob losses act on his detectors; build the behavior from a lossy assembly".into(),
        ));
    }
    let spec = *beh.spec();
    let n = spec.n();
    let eta = model.eta_alice;
    let nb = spec.num_bob_outcomes();
    let mut table = beh.table().to_vec();
    // One party at a time: P'(a_i = 0) = P(0) + (1 − η) P(1), P'(1) = η P(1).
    for party in 0..n {
        let bit = 1usize << (n - 1 - party);
        for x in 0..spec.num_settings() {
            for y in 0..spec.m_b() {
                for a in (0..spec.num_settings()).filter(|a| a & bit == 0) {
                    for b in 0..nb {
                        let (i0, i1) = (spec.index(x, y, a, b), spec.index(x, y, a | bit, b));
                        let moved = (1.0 - eta) * table[i1];
                        table[i0] += moved;
                        table[i1] -= moved;
                    }
                }
            }
        }
    }
    Behavior::new(spec, table)
}

/// The assembly with every detector replaced by its lossy version.
///
/// Bob losses need a per-qubit wiring; for other Bob measurements
/// `eta_bob` must be 1.
pub fn lossy_assembly(assembly: &MeasurementAssembly, model: &EfficiencyModel) -> Result<MeasurementAssembly> {
    model.validate()?;
    let alice = assembly
        .alice_povms()
        .iter()
        .map(|ps| ps.iter().map(|p| p.with_efficiency(model.eta_alice)).collect())
        .collect::<Result<Vec<Vec<Povm>>>>()?;
    let bob = match assembly.bob() {
        BobMeasurement::Wiring { qubits } => BobMeasurement::Wiring {
            qubits: qubits
                .iter()
                .map(|ps| ps.iter().map(|p| p.with_efficiency(model.eta_bob)).collect())
                .collect::<Result<_>>()?,
        },
        other if model.eta_bob == 1.0 => other.clone(),
        _ => {
            return Err(Error::Unsupported(
                "Bob losses are modelled only for per-qubit wirings".into(),
            ))
        }
    };
    MeasurementAssembly::new(*assembly.spec(), alice, bob)
}

/// `I = |(cos θ + cos φ)/2|^n`, `J = |(sin θ − sin φ)/2|^n`.
pub fn quantum_boundary_point(n: usize, theta: f64, phi: f64) -> (f64, f64) {
    let e = n as i32;
    (
        ((theta.cos() + phi.cos()) / 2.0).abs().powi(e),
        ((theta.sin() - phi.sin()) / 2.0).abs().powi(e),
    )
}
