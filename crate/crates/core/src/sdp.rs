//! Optimization of Bob's measurement with sources and Alice measurements fixed.
//!
//! With `Λ_i = Σ_{x,a} (−1)^a σ_i(a|x)` and `Ω_i = Σ_{x,a} (−1)^{a+x} σ_i(a|x)`
//! the functionals become linear in Bob's effects:
//!
//! ```text
//! I = 2^{−n} Σ_b (−1)^b tr((Λ_1 ⊗ … ⊗ Λ_n) M_{b|0})
//! J = 2^{−n} Σ_b (−1)^b tr((Ω_1 ⊗ … ⊗ Ω_n) M_{b|1})
//! ```
//!
//! and maximizing `I` on the slice `I = αJ` is a semidefinite program. It is
//! solved with ADMM: an affine projection (completeness and the ratio
//! hyperplane), an eigenvalue clip per effect, and a scaled dual update.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::GjFamily;
use crate::quantum::{assemblage, Povm};
use crate::scenario::ScenarioKind;
use crate::tensor::{Operator, C64, HERMITIAN_TOL};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 50_000;
/// Largest number of parties (Bob's dimension `2^n ≤ 16`).
pub const MAX_SDP_PARTIES: usize = 4;

/// Per-source operators on Bob's qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedOperators {
    pub lambdas: Vec<Operator>,
    pub omegas: Vec<Operator>,
}

impl ReducedOperators {
    pub fn new(lambdas: Vec<Operator>, omegas: Vec<Operator>) -> Result<Self> {
        if lambdas.len() != omegas.len() || lambdas.is_empty() {
            return Err(Error::Shape(format!(
                "{} Λ and {} Ω operators",
                lambdas.len(),
                omegas.len()
            )));
        }
        for op in lambdas.iter().chain(&omegas) {
            if op.dim() != 2 {
                return Err(Error::Shape(format!("reduced operator of dim {}", op.dim())));
            }
            if !op.is_hermitian(HERMITIAN_TOL) {
                return Err(Error::Validation("reduced operator is not Hermitian".into()));
            }
            let norm = op.eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()));
            if norm > 1.0 + 1e-9 {
                return Err(Error::Validation(format!("reduced operator has norm {norm}")));
            }
        }
        Ok(ReducedOperators { lambdas, omegas })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }
}

/// `Λ_i` and `Ω_i` for each source and its Alice measurements.
pub fn reduce_operators(states: &[Operator], alice_povms: &[Vec<Povm>]) -> Result<ReducedOperators> {
    if states.len() != alice_povms.len() {
        return Err(Error::Shape(format!(
            "{} states and {} Alice parties",
            states.len(),
            alice_povms.len()
        )));
    }
    let mut lambdas = Vec::with_capacity(states.len());
    let mut omegas = Vec::with_capacity(states.len());
    for (i, (rho, povms)) in states.iter().zip(alice_povms).enumerate() {
        if rho.dim() != 4 {
            return Err(Error::Shape(format!("state {i} has dim {}, expected 4", rho.dim())));
        }
        rho.validate_density()
            .map_err(|e| Error::Validation(format!("state {i}: {e}")))?;
        if povms.len() != 2 || povms.iter().any(|p| p.dim() != 2 || p.num_outcomes() != 2) {
            return Err(Error::Shape(format!("Alice {i} needs two binary qubit measurements")));
        }
        let sigma = assemblage(rho, povms)?;
        let mut lambda = Operator::zeros(2);
        let mut omega = Operator::zeros(2);
        for (x, row) in sigma.iter().enumerate() {
            for (a, s) in row.iter().enumerate() {
                let sa = if a == 0 { 1.0 } else { -1.0 };
                let sx = if x == 0 { 1.0 } else { -1.0 };
                lambda = &lambda + &s.scale(sa);
                omega = &omega + &s.scale(sa * sx);
            }
        }
        lambdas.push(lambda);
        omegas.push(omega);
    }
    ReducedOperators::new(lambdas, omegas)
}

/// Linear functional `X ↦ Σ_{g,o} tr(C_{g,o} M_{g,o})` over grouped effects.
type Functional = Vec<Vec<Operator>>;

/// Maximize `objective` over POVM groups subject to `constraint = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub scenario: ScenarioKind,
    pub n: usize,
    pub alpha: f64,
    pub dim: usize,
    /// Outcomes per POVM group.
    pub outcomes: Vec<usize>,
    /// `I` as a functional of Bob's effects.
    pub objective: Functional,
    /// `J` (or `I_2`) as a functional of Bob's effects.
    pub secondary: Functional,
    /// `I − αJ`, or `J` alone when `α = 0`.
    pub constraint: Functional,
}

fn tensor(ops: &[&Operator]) -> Result<Operator> {
    Operator::kron_all(ops.iter().map(|o| (*o).clone()))
}

/// Builds the program over Bob's measurements.
///
/// In the single-measurement scenario the variable is one POVM over the bit
/// pair `(b_1, b_2)`; `I` is `I_1` (all `Λ`) and `J` is `I_2`, whose factors
/// are `Ω` on the parties of `g_2` and `Λ` elsewhere.
pub fn build_sdp(reduced: &ReducedOperators, alpha: f64, scenario: ScenarioKind) -> Result<SdpProblem> {
    let n = reduced.n();
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha = {alpha}")));
    }
    if n > MAX_SDP_PARTIES {
        return Err(Error::Size {
            what: "SDP parties",
            needed: n as u128,
            limit: MAX_SDP_PARTIES as u128,
        });
    }
    let dim = 1usize << n;
    let norm = 1.0 / dim as f64;
    let zero = Operator::zeros(dim);
    let lam: Vec<&Operator> = reduced.lambdas.iter().collect();
    let big_lambda = tensor(&lam)?.scale(norm);

    let (outcomes, objective, secondary) = match scenario {
        ScenarioKind::TwoToTwo => {
            let om: Vec<&Operator> = reduced.omegas.iter().collect();
            let big_omega = tensor(&om)?.scale(norm);
            (
                vec![2, 2],
                vec![
                    vec![big_lambda.clone(), big_lambda.scale(-1.0)],
                    vec![zero.clone(), zero.clone()],
                ],
                vec![
                    vec![zero.clone(), zero.clone()],
                    vec![big_omega.clone(), big_omega.scale(-1.0)],
                ],
            )
        }
        ScenarioKind::SingleMeasurement => {
            if n < 2 {
                return Err(Error::Domain("single-measurement scenario needs n >= 2".into()));
            }
            let family = GjFamily::new(n)?;
            let mixed: Vec<&Operator> = (0..n)
                .map(|p| {
                    if family.contains(1, p) {
                        &reduced.omegas[p]
                    } else {
                        &reduced.lambdas[p]
                    }
                })
                .collect();
            let big_mixed = tensor(&mixed)?.scale(norm);
            // Outcome index (b_1, b_2) with b_1 most significant.
            let sign = |bit: usize| if bit == 0 { 1.0 } else { -1.0 };
            (
                vec![4],
                vec![(0..4).map(|o| big_lambda.scale(sign(o >> 1))).collect()],
                vec![(0..4).map(|o| big_mixed.scale(sign(o & 1))).collect()],
            )
        }
    };
    let constraint = if alpha == 0.0 {
        secondary.clone()
    } else {
        combine(&objective, 1.0, &secondary, -alpha)
    };
    Ok(SdpProblem {
        scenario,
        n,
        alpha,
        dim,
        outcomes,
        objective,
        secondary,
        constraint,
    })
}

fn combine(a: &Functional, ca: f64, b: &Functional, cb: f64) -> Functional {
    a.iter()
        .zip(b)
        .map(|(ga, gb)| ga.iter().zip(gb).map(|(x, y)| &x.scale(ca) + &y.scale(cb)).collect())
        .collect()
}

fn inner(a: &Functional, b: &Functional) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ga, gb)| ga.iter().zip(gb))
        .map(|(x, y)| x.trace_product(y).re)
        .sum()
}

fn norm(a: &Functional) -> f64 {
    inner(a, a).sqrt()
}

fn axpy(a: &Functional, c: f64, b: &Functional) -> Functional {
    combine(a, 1.0, b, c)
}

/// Removes the per-group mean, projecting onto `{Σ_o M_o = 0}`.
fn remove_group_means(a: &Functional) -> Functional {
    a.iter()
        .map(|group| {
            let m = group.len() as f64;
            let mean = group
                .iter()
                .fold(Operator::zeros(group[0].dim()), |acc, e| &acc + e)
                .scale(1.0 / m);
            group.iter().map(|e| e - &mean).collect()
        })
        .collect()
}

/// Orthogonal projection onto `{Σ_o M_{g,o} = 1 ∀g, ⟨G, M⟩ = 0}`.
struct AffineProjector {
    dim: usize,
    /// Component of `G` inside the completeness subspace, and its squared norm.
    direction: Functional,
    direction_sq: f64,
}

impl AffineProjector {
    fn new(problem: &SdpProblem) -> Result<Self> {
        let direction = remove_group_means(&problem.constraint);
        let direction_sq = inner(&direction, &direction);
        let projector = AffineProjector {
            dim: problem.dim,
            direction,
            direction_sq,
        };
        if direction_sq <= 1e-24 {
            // ⟨G, M⟩ is constant on the completeness set: check it is zero.
            let uniform: Functional = problem
                .outcomes
                .iter()
                .map(|&m| vec![Operator::identity(problem.dim).scale(1.0 / m as f64); m])
                .collect();
            let value = inner(&problem.constraint, &uniform);
            if value.abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "ratio constraint is infeasible (constant value {value})"
                )));
            }
        }
        Ok(projector)
    }

    fn project(&self, x: &Functional, constraint: &Functional) -> Functional {
        let id = Operator::identity(self.dim);
        let on_completeness: Functional = x
            .iter()
            .map(|group| {
                let m = group.len() as f64;
                let excess = &group.iter().fold(Operator::zeros(self.dim), |acc, e| &acc + e) - &id;
                let shift = excess.scale(1.0 / m);
                group.iter().map(|e| e - &shift).collect()
            })
            .collect();
        if self.direction_sq <= 1e-24 {
            return on_completeness;
        }
        let t = inner(constraint, &on_completeness) / self.direction_sq;
        axpy(&on_completeness, -t, &self.direction)
    }
}

/// Nearest PSD operator in Frobenius norm.
fn clip_psd(op: &Operator) -> Operator {
    let (vals, vecs) = op.eigh();
    let d = op.dim();
    let clipped = DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(vals[r].max(0.0), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let m = &vecs * clipped * vecs.adjoint();
    Operator::from_matrix((&m + m.adjoint()) * C64::new(0.5, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Converged,
    MaxIterations,
}

/// Best iterate of the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// `I*`.
    pub optimum: f64,
    /// `J` at the optimum.
    pub secondary: f64,
    /// `max_g ‖Σ_o M_{g,o} − 1‖_F`.
    pub completeness_residual: f64,
    /// `|⟨G, M⟩|`, i.e. `|I − αJ|` (or `|J|` when `α = 0`).
    pub constraint_residual: f64,
    /// Smallest eigenvalue over all effects.
    pub min_eigenvalue: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub effects: Vec<Vec<Operator>>,
}

impl SdpSolution {
    /// Effects rescaled by `S^{−1/2} · S^{−1/2}` with `S = Σ_o M_o`, which
    /// restores exact completeness while keeping positivity.
    pub fn povms(&self) -> Result<Vec<Povm>> {
        self.effects
            .iter()
            .map(|group| {
                let d = group[0].dim();
                let total = group.iter().fold(Operator::zeros(d), |acc, e| &acc + e);
                let (vals, vecs) = total.eigh();
                if vals.iter().any(|&v| v <= 1e-9) {
                    return Err(Error::Validation("effects do not sum to a full-rank operator".into()));
                }
                let inv_sqrt = DMatrix::from_fn(d, d, |r, c| {
                    if r == c {
                        C64::new(1.0 / vals[r].sqrt(), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let w = Operator::from_matrix(&vecs * inv_sqrt * vecs.adjoint());
                let effects: Vec<Operator> = group
                    .iter()
                    .map(|e| {
                        let m = &(&w * e) * &w;
                        (&m + &m.adjoint()).scale(0.5)
                    })
                    .collect();
                Povm::new(effects)
            })
            .collect()
    }
}

/// ADMM for `max ⟨F, M⟩` over `M` in (PSD cone) ∩ (affine set).
pub fn solve_sdp(problem: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let projector = AffineProjector::new(problem)?;
    let f_norm = norm(&problem.objective);
    let f_unit: Functional = if f_norm > 0.0 {
        problem
            .objective
            .iter()
            .map(|g| g.iter().map(|e| e.scale(1.0 / f_norm)).collect())
            .collect()
    } else {
        problem.objective.clone()
    };
    let dim = problem.dim;
    let mut z: Functional = problem
        .outcomes
        .iter()
        .map(|&m| vec![Operator::identity(dim).scale(1.0 / m as f64); m])
        .collect();
    let mut u: Functional = problem
        .outcomes
        .iter()
        .map(|&m| vec![Operator::zeros(dim); m])
        .collect();
    let mut rho = 1.0;
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = max_iter;

    for it in 1..=max_iter {
        let shifted = combine(&axpy(&z, -1.0, &u), 1.0, &f_unit, 1.0 / rho);
        let x = projector.project(&shifted, &problem.constraint);
        let z_prev = z;
        let xu = combine(&x, 1.0, &u, 1.0);
        z = xu.iter().map(|g| g.iter().map(clip_psd).collect()).collect();
        let r = axpy(&x, -1.0, &z);
        u = combine(&u, 1.0, &r, 1.0);
        let primal = norm(&r);
        let dual = rho * norm(&axpy(&z, -1.0, &z_prev));
        if primal <= tol && dual <= tol {
            status = SdpStatus::Converged;
            iterations = it;
            break;
        }
        // Residual balancing; the scaled dual variable moves inversely.
        if primal > 10.0 * dual {
            rho *= 2.0;
            u = u.iter().map(|g| g.iter().map(|e| e.scale(0.5)).collect()).collect();
        } else if dual > 10.0 * primal {
            rho *= 0.5;
            u = u.iter().map(|g| g.iter().map(|e| e.scale(2.0)).collect()).collect();
        }
    }

    let id = Operator::identity(dim);
    let completeness_residual = z
        .iter()
        .map(|g| (&g.iter().fold(Operator::zeros(dim), |acc, e| &acc + e) - &id).frobenius_norm())
        .fold(0.0, f64::max);
    let min_eigenvalue = z
        .iter()
        .flatten()
        .flat_map(|e| e.eigenvalues())
        .fold(f64::INFINITY, f64::min);
    Ok(SdpSolution {
        status,
        optimum: inner(&problem.objective, &z),
        secondary: inner(&problem.secondary, &z),
        completeness_residual,
        constraint_residual: inner(&problem.constraint, &z).abs(),
        min_eigenvalue,
        iterations,
        effects: z,
    })
}
