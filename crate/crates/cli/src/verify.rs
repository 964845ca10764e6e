//! The full check suite behind `starlocal verify`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use starlocal::classical::{
    enumerate_deterministic_nlocal, sample_random_nlocal, theorem1_saturating_strategy, theorem2_saturating_strategy,
    Quadrant,
};
use starlocal::inequalities::{abs_root, evaluate_local_bound, evaluate_theorem1, evaluate_theorem2, lemma1_check};
use starlocal::quantum::{
    born_behavior, chsh_assembly, ghz_behavior, ghz_parent_measurement, quantum_boundary_point, rotated_assembly,
    werner_network,
};
use starlocal::scenario::{Behavior, ScenarioKind, ScenarioSpec};
use starlocal::sweeps::{
    efficiency_point, efficiency_threshold, ghz_efficiency_point, ghz_efficiency_threshold, grid, noise_threshold,
};
use starlocal::tensor::{build_state, Operator, StateKind, StateVector};
use starlocal::Result;

use crate::commands;
use crate::table::{Check, Table};

/// Samples per scenario for the n-local property suite.
pub const SAMPLES: usize = 10_000;

fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn within(name: &str, deviation: f64, tol: f64) -> Check {
    Check::new(
        name,
        deviation <= tol,
        format!("max deviation {deviation:.3e} (tol {tol:.0e})"),
    )
}

fn theorem1_saturation() -> Result<Check> {
    let (mut dev_ij, mut dev_lhs) = (0.0f64, 0.0f64);
    for n in 2..=5 {
        for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let beh = theorem1_saturating_strategy(n, r, Quadrant::PlusPlus)?.to_behavior()?;
            let ij = beh.compute_i_j()?;
            let (i, j) = ij.as_pair().expect("pair");
            dev_ij = dev_ij
                .max((i - r.powi(n as i32)).abs())
                .max((j - (1.0 - r).powi(n as i32)).abs());
            if r > 0.0 && r < 1.0 {
                dev_lhs = dev_lhs.max((evaluate_theorem1(&ij, n)?.lhs - 1.0).abs());
            }
        }
    }
    Ok(Check::new(
        "1 theorem-1 saturation",
        dev_ij <= 1e-12 && dev_lhs <= 1e-12,
        format!("(I, J) deviation {dev_ij:.3e}, lhs deviation {dev_lhs:.3e}"),
    ))
}

fn opt_quantum(n: usize, x: usize, y: usize, a: usize, b: usize) -> f64 {
    let s = (a.count_ones() as usize + b + y * x.count_ones() as usize) % 2;
    let sign = if s == 0 { 1.0 } else { -1.0 };
    (1.0 + FRAC_1_SQRT_2.powi(n as i32) * sign) / 2f64.powi(n as i32 + 1)
}

fn chsh_violation() -> Result<Check> {
    let (mut dev_ij, mut dev_table) = (0.0f64, 0.0f64);
    for n in 2..=4 {
        let beh = born_behavior(&werner_network(&vec![1.0; n])?, &chsh_assembly(n)?)?;
        let ij = beh.compute_i_j()?;
        let (i, j) = ij.as_pair().expect("pair");
        let want = 2f64.powf(-(n as f64) / 2.0);
        let lhs = evaluate_theorem1(&ij, n)?.lhs;
        dev_ij = dev_ij
            .max((i - want).abs())
            .max((j - want).abs())
            .max((lhs - SQRT_2).abs());
        let closed = Behavior::from_fn(*beh.spec(), |x, y, a, b| opt_quantum(n, x, y, a, b))?;
        dev_table = dev_table.max(beh.max_abs_diff(&closed));
    }
    Ok(Check::new(
        "2 quantum violation (2->2)",
        dev_ij <= 1e-9 && dev_table <= 1e-12,
        format!("I/J/lhs deviation {dev_ij:.3e}, table deviation {dev_table:.3e}"),
    ))
}

fn noise_thresholds() -> Result<Check> {
    let dev = worst(
        (2..=4)
            .map(|n| Ok((noise_threshold(n)? - 2f64.powf(-(n as f64) / 2.0)).abs()))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(within("3 noise threshold", dev, 1e-6))
}

fn chsh_efficiency() -> Result<Check> {
    let mut dev = 0.0f64;
    for eta in grid(0.0, 1.0, 41) {
        let lhs = efficiency_point(2, eta)?.report.lhs;
        dev = dev.max((lhs - (eta * eta * SQRT_2 + (1.0 - eta).powi(2))).abs());
    }
    let eta_c = efficiency_threshold(2)?;
    let dev_c = (eta_c - 2.0 / (1.0 + SQRT_2)).abs();
    Ok(Check::new(
        "4 detection efficiency (2->2)",
        dev <= 1e-9 && dev_c <= 1e-4,
        format!("curve deviation {dev:.3e}, eta_c = {eta_c:.9}"),
    ))
}

fn ghz_violation() -> Result<Check> {
    let mut dev = 0.0f64;
    let mut violated = true;
    for n in 2..=4 {
        let ij = ghz_behavior(n, &vec![1.0; n])?.compute_i_vector()?;
        if n == 3 {
            dev = dev.max(worst(ij.values().iter().map(|v| (v - 0.5 * FRAC_1_SQRT_2).abs())));
        }
        let rep = evaluate_theorem2(&ij, n)?;
        let scale = 2f64.powi(n as i32 - 2);
        dev = dev.max((rep.lhs - scale * SQRT_2).abs()).max((rep.bound - scale).abs());
        violated &= rep.violated;
    }
    Ok(Check::new(
        "5 theorem-2 quantum violation",
        dev <= 1e-9 && violated,
        format!("max deviation {dev:.3e}, all violated: {violated}"),
    ))
}

fn theorem2_saturation() -> Result<Check> {
    let mut dev = 0.0f64;
    for n in 2..=4 {
        let ij = theorem2_saturating_strategy(n)?.to_behavior()?.compute_i_vector()?;
        dev = dev.max(worst(ij.values().iter().map(|v| (v - 2f64.powi(-(n as i32))).abs())));
        dev = dev.max((evaluate_theorem2(&ij, n)?.lhs - 2f64.powi(n as i32 - 2)).abs());
    }
    Ok(within("6 theorem-2 saturation", dev, 1e-12))
}

fn ghz_efficiency() -> Result<Check> {
    let mut dev = 0.0f64;
    for eta in grid(0.0, 1.0, 41) {
        let lhs = ghz_efficiency_point(3, eta)?.report.lhs;
        dev = dev.max((lhs - 2.0 * eta * SQRT_2).abs());
    }
    let eta_c = ghz_efficiency_threshold(3)?;
    let dev_c = (eta_c - FRAC_1_SQRT_2).abs();
    Ok(Check::new(
        "7 GHZ efficiency",
        dev <= 1e-9 && dev_c <= 1e-6,
        format!("curve deviation {dev:.3e}, eta_c = {eta_c:.9}"),
    ))
}

fn quantum_region() -> Result<Check> {
    let mut dev = 0.0f64;
    for n in [2usize, 3] {
        let states = werner_network(&vec![1.0; n])?;
        for theta in grid(0.0, FRAC_PI_2, 181) {
            let beh = born_behavior(&states, &rotated_assembly(n, theta, -theta)?)?;
            let (i, j) = beh.compute_i_j()?.as_pair().expect("pair");
            let (ci, cj) = (theta.cos().abs().powi(n as i32), theta.sin().abs().powi(n as i32));
            let on_curve = abs_root(i, n).powi(2) + abs_root(j, n).powi(2);
            dev = dev
                .max((i.abs() - ci).abs())
                .max((j.abs() - cj).abs())
                .max((on_curve - 1.0).abs());
            let (bi, bj) = quantum_boundary_point(n, theta, -theta);
            dev = dev.max((bi - ci).abs()).max((bj - cj).abs());
        }
    }
    Ok(within("8 quantum region", dev, 1e-9))
}

fn sdp_suite() -> Result<Check> {
    let mut passed = true;
    let mut details = Vec::new();
    for n in [2usize, 3] {
        let t = commands::sdp(n, 1.0, ScenarioKind::TwoToTwo)?;
        passed &= t.all_passed();
        details.push(format!("n={n}: I* = {}", t.rows[0][1]));
    }
    Ok(Check::new("9 SDP", passed, details.join("; ")))
}

fn lemma1_suite(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=8);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random::<f64>() * 10.0).collect())
            .collect();
        if !lemma1_check(&rows)?.holds() {
            failures += 1;
        }
    }
    Ok(Check::new(
        "10a Lemma 1 on 1000 instances",
        failures == 0,
        format!("{failures} failures"),
    ))
}

fn sampling_suite(seed: u64) -> Result<Check> {
    let mut margin = f64::NEG_INFINITY;
    for n in [2usize, 3] {
        let pair = ScenarioSpec::two_to_two(n)?;
        let single = ScenarioSpec::single_measurement(n)?;
        for s in 0..SAMPLES as u64 {
            let support = 1 + (s % 4) as usize;
            let beh = sample_random_nlocal(n, &pair, support, seed.wrapping_add(s))?.to_behavior()?;
            margin = margin.max(evaluate_theorem1(&beh.compute_i_j()?, n)?.margin);
            let beh = sample_random_nlocal(n, &single, support, seed.wrapping_add(s))?.to_behavior()?;
            margin = margin.max(evaluate_theorem2(&beh.compute_i_vector()?, n)?.margin);
        }
    }
    Ok(Check::new(
        "10b sampled n-local strategies respect theorems 1 and 2",
        margin <= 1e-9,
        format!("largest margin {margin:.3e} over {} behaviors", 4 * SAMPLES),
    ))
}

fn enumeration_suite() -> Result<Check> {
    let spec = ScenarioSpec::two_to_two(2)?;
    let (mut best_local, mut best_root) = (0.0f64, 0.0f64);
    for beh in enumerate_deterministic_nlocal(2, &spec)? {
        let ij = beh.compute_i_j()?;
        best_local = best_local.max(evaluate_local_bound(&ij)?.lhs);
        best_root = best_root.max(evaluate_theorem1(&ij, 2)?.lhs);
    }
    Ok(Check::new(
        "10c deterministic enumeration at n = 2",
        best_local == 1.0 && best_root == 1.0,
        format!("max |I|+|J| = {best_local}, max |I|^(1/2)+|J|^(1/2) = {best_root}"),
    ))
}

fn identities_suite() -> Result<Check> {
    let mut dev = 0.0f64;
    for n in [2usize, 3] {
        let dim = 1usize << n;
        let mut total = Operator::zeros(dim);
        for r in 0..dim {
            total = &total + &build_state(&StateKind::GenBell { n, label: r })?.projector();
        }
        dev = dev.max(total.max_abs_diff(&Operator::identity(dim)));

        let pairs = StateVector::kron_all(
            (0..n)
                .map(|_| build_state(&StateKind::PhiPlus))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let perm: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
        let blocked = pairs.permute_qubits(&perm)?;
        let mut swapped = vec![starlocal::tensor::C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            let psi = build_state(&StateKind::GenBell { n, label: r })?;
            for (slot, amp) in swapped.iter_mut().zip(psi.kron(&psi)?.amplitudes()) {
                *slot += amp / (dim as f64).sqrt();
            }
        }
        dev = dev.max(worst(
            blocked.amplitudes().iter().zip(&swapped).map(|(a, b)| (a - b).norm()),
        ));

        let rho = blocked.projector();
        let parent = ghz_parent_measurement(n)?;
        let id = Operator::identity(dim);
        let traced: Vec<usize> = (n..2 * n).collect();
        for l in 0..parent.stabilizers.len() {
            let (m0, m1) = parent.coarse_grained(l);
            for m in [m0, m1] {
                let steered = (&rho * &id.kron(&m)?).partial_trace(&vec![2; 2 * n], &traced)?;
                dev = dev.max(steered.max_abs_diff(&m.scale(1.0 / dim as f64)));
            }
        }
    }
    Ok(within("10d completeness, swap and steering identities", dev, 1e-9))
}

/// Runs every check; the table has one row per criterion.
pub fn run(seed: u64) -> Result<Table> {
    let checks = vec![
        theorem1_saturation()?,
        chsh_violation()?,
        noise_thresholds()?,
        chsh_efficiency()?,
        ghz_violation()?,
        theorem2_saturation()?,
        ghz_efficiency()?,
        quantum_region()?,
        sdp_suite()?,
        lemma1_suite(seed)?,
        sampling_suite(seed)?,
        enumeration_suite()?,
        identities_suite()?,
    ];
    let mut t = Table::new("verify", &["criterion", "passed", "detail"]);
    for c in &checks {
        t.push(vec![json!(c.name), json!(c.passed), json!(c.detail)]);
    }
    t.summarize("seed", seed);
    t.summarize("passed", checks.iter().filter(|c| c.passed).count());
    t.summarize("total", checks.len());
    t.checks = checks;
    Ok(t)
}
