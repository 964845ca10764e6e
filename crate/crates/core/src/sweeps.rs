//! Parameter sweeps over simulated behaviors and threshold searches.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::classical::{theorem1_saturating_strategy, Quadrant};
use crate::error::{Error, Result};
use crate::inequalities::{evaluate_theorem1, evaluate_theorem2, InequalityReport};
use crate::quantum::{
    apply_inefficiency, born_behavior, chsh_assembly, ghz_behavior, lossy_assembly, quantum_boundary_point,
    werner_network, EfficiencyModel,
};
use crate::scenario::IJValues;

/// One evaluated point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub report: InequalityReport,
}

impl SweepRow {
    pub fn ij(&self) -> &IJValues {
        &self.report.ij
    }
}

/// Evenly spaced points on `[lo, hi]`, both ends included.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Smallest `t` in `[lo, hi]` with `f(t) > 0`, for `f` increasing in `t`.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo > 0.0 || f_hi <= 0.0 {
        return Err(Error::Domain(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Theorem-1 report for `n` Werner sources of total visibility `V = Π v_i`
/// (each `v_i = V^{1/n}`) under the CHSH assembly.
pub fn noise_point(n: usize, total_v: f64) -> Result<SweepRow> {
    if !(0.0..=1.0).contains(&total_v) {
        return Err(Error::Domain(format!("visibility {total_v} outside [0, 1]")));
    }
    let v = total_v.powf(1.0 / n as f64);
    let beh = born_behavior(&werner_network(&vec![v; n])?, &chsh_assembly(n)?)?;
    Ok(SweepRow {
        param: total_v,
        report: evaluate_theorem1(&beh.compute_i_j()?, n)?,
    })
}

/// Theorem-1 report with every detector at efficiency `eta`, no-clicks binned to 0.
pub fn efficiency_point(n: usize, eta: f64) -> Result<SweepRow> {
    let model = EfficiencyModel::uniform(eta)?;
    let assembly = lossy_assembly(&chsh_assembly(n)?, &model)?;
    let beh = born_behavior(&werner_network(&vec![1.0; n])?, &assembly)?;
    Ok(SweepRow {
        param: eta,
        report: evaluate_theorem1(&beh.compute_i_j()?, n)?,
    })
}

/// Theorem-2 report for the GHZ scenario with Alice efficiency `eta` and an
/// ideal Bob.
pub fn ghz_efficiency_point(n: usize, eta: f64) -> Result<SweepRow> {
    let model = EfficiencyModel::new(eta, 1.0)?;
    let beh = apply_inefficiency(&ghz_behavior(n, &vec![1.0; n])?, &model)?;
    Ok(SweepRow {
        param: eta,
        report: evaluate_theorem2(&beh.compute_i_vector()?, n)?,
    })
}

pub const THRESHOLD_TOL: f64 = 1e-10;

/// Smallest visibility at which the network violates Theorem 1.
pub fn noise_threshold(n: usize) -> Result<f64> {
    bisect(|v| Ok(noise_point(n, v)?.report.margin), 0.0, 1.0, THRESHOLD_TOL)
}

/// Smallest uniform detector efficiency at which Theorem 1 is violated.
///
/// At `η = 0` every outcome is 0 and the bound is met with equality, so the
/// search starts at `η = 1/2`.
pub fn efficiency_threshold(n: usize) -> Result<f64> {
    bisect(|e| Ok(efficiency_point(n, e)?.report.margin), 0.5, 1.0, THRESHOLD_TOL)
}

/// Smallest Alice efficiency at which the GHZ scenario violates Theorem 2.
pub fn ghz_efficiency_threshold(n: usize) -> Result<f64> {
    bisect(
        |e| Ok(ghz_efficiency_point(n, e)?.report.margin),
        0.0,
        1.0,
        THRESHOLD_TOL,
    )
}

/// Which curve of the `(I, J)` plane a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    NLocal,
    Local,
    Quantum,
}

impl Curve {
    pub fn name(self) -> &'static str {
        match self {
            Curve::NLocal => "nlocal",
            Curve::Local => "local",
            Curve::Quantum => "quantum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub curve: Curve,
    pub param: f64,
    pub i: f64,
    pub j: f64,
}

/// Boundaries of the n-local set, the local square and the quantum set,
/// each traced in all four sign quadrants with `points` samples per quadrant.
///
/// The n-local curve comes from the saturating strategies (`param = r`); the
/// quantum curve from `A_{0/1} = cos θ X ± sin θ Z` (`param = θ`).
pub fn region(n: usize, points: usize) -> Result<Vec<RegionPoint>> {
    if n < 2 {
        return Err(Error::Domain(format!("region needs n >= 2, got {n}")));
    }
    let mut out = Vec::with_capacity(12 * points);
    for q in Quadrant::ALL {
        for r in grid(0.0, 1.0, points) {
            let beh = theorem1_saturating_strategy(n, r, q)?.to_behavior()?;
            let (i, j) = beh.compute_i_j()?.as_pair().expect("two-to-two scenario");
            out.push(RegionPoint {
                curve: Curve::NLocal,
                param: r,
                i,
                j,
            });
        }
    }
    for q in Quadrant::ALL {
        let (si, sj) = q.signs();
        for r in grid(0.0, 1.0, points) {
            out.push(RegionPoint {
                curve: Curve::Local,
                param: r,
                i: si * r,
                j: sj * (1.0 - r),
            });
        }
    }
    for q in Quadrant::ALL {
        let (si, sj) = q.signs();
        for theta in grid(0.0, FRAC_PI_2, points) {
            let (i, j) = quantum_boundary_point(n, theta, -theta);
            out.push(RegionPoint {
                curve: Curve::Quantum,
                param: theta,
                i: si * i,
                j: sj * j,
            });
        }
    }
    Ok(out)
}
