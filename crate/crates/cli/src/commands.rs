//! Sweep commands producing tables with built-in checks.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

use serde_json::{json, Value};
use starlocal::inequalities::{abs_root, GjFamily};
use starlocal::quantum::{
    born_behavior, chsh_assembly, ghz_assembly, phi_plus_network, quantum_boundary_point, werner_network,
    BobMeasurement, MeasurementAssembly,
};
use starlocal::scenario::{ScenarioKind, ScenarioSpec};
use starlocal::sdp::{build_sdp, reduce_operators, solve_sdp, SdpStatus, DEFAULT_MAX_ITER, DEFAULT_TOL};
use starlocal::sweeps::{
    efficiency_point, efficiency_threshold, ghz_efficiency_point, ghz_efficiency_threshold, grid, noise_point,
    noise_threshold, region as region_points, Curve,
};
use starlocal::{Error, Result};

use crate::table::{Check, Table};

fn check_n(n: usize, lo: usize, hi: usize) -> Result<()> {
    if !(lo..=hi).contains(&n) {
        return Err(Error::Domain(format!("n must be in {lo}..={hi}, got {n}")));
    }
    Ok(())
}

fn check_grid(points: usize) -> Result<()> {
    if points < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 points, got {points}")));
    }
    Ok(())
}

pub fn region(n: usize, points: usize) -> Result<Table> {
    check_n(n, 2, 16)?;
    check_grid(points)?;
    let mut t = Table::new("region", &["curve", "param", "I", "J", "nlocal_lhs", "local_lhs"]);
    let pts = region_points(n, points)?;
    let mut worst_quantum = 0.0f64;
    let mut worst_nlocal = 0.0f64;
    for p in &pts {
        let nlocal_lhs = abs_root(p.i, n) + abs_root(p.j, n);
        match p.curve {
            Curve::Quantum => {
                let two_n = |v: f64| abs_root(v, n).powi(2);
                worst_quantum = worst_quantum.max((two_n(p.i) + two_n(p.j) - 1.0).abs());
            }
            Curve::NLocal => worst_nlocal = worst_nlocal.max((nlocal_lhs - 1.0).abs()),
            Curve::Local => {}
        }
        t.push(vec![
            json!(p.curve.name()),
            json!(p.param),
            json!(p.i),
            json!(p.j),
            json!(nlocal_lhs),
            json!(p.i.abs() + p.j.abs()),
        ]);
    }
    let endpoints = [(1.0, 0.0), (0.0, 1.0)].iter().all(|&(ei, ej)| {
        pts.iter()
            .any(|p| p.curve == Curve::NLocal && (p.i - ei).abs() < 1e-12 && (p.j - ej).abs() < 1e-12)
    });
    let (qi, qj) = quantum_boundary_point(n, FRAC_PI_4, -FRAC_PI_4);
    let q_lhs = abs_root(qi, n) + abs_root(qj, n);
    t.summarize("n", n);
    t.summarize("quantum_lhs_at_pi_over_4", q_lhs);
    t.check(Check::new(
        "quantum curve on |I|^{2/n}+|J|^{2/n}=1",
        worst_quantum <= 1e-9,
        format!("max deviation {worst_quantum:.3e}"),
    ));
    t.check(Check::new(
        "n-local curve on |I|^{1/n}+|J|^{1/n}=1",
        worst_nlocal <= 1e-9,
        format!("max deviation {worst_nlocal:.3e}"),
    ));
    t.check(Check::new("n-local endpoints (1,0) and (0,1)", endpoints, ""));
    t.check(Check::close("quantum lhs at theta=pi/4", q_lhs, SQRT_2, 1e-9));
    Ok(t)
}

pub fn noise(n: usize, points: usize) -> Result<Table> {
    check_n(n, 1, 6)?;
    check_grid(points)?;
    let mut t = Table::new("noise", &["V", "I", "J", "lhs", "bound", "violated"]);
    let mut worst = 0.0f64;
    for v in grid(0.0, 1.0, points) {
        let row = noise_point(n, v)?;
        let (i, j) = row.ij().as_pair().expect("two-to-two scenario");
        let r = &row.report;
        worst = worst.max((r.lhs - v.powf(1.0 / n as f64) * SQRT_2).abs());
        t.push(vec![
            json!(v),
            json!(i),
            json!(j),
            json!(r.lhs),
            json!(r.bound),
            json!(r.violated),
        ]);
    }
    let threshold = noise_threshold(n)?;
    let expected = 2f64.powf(-(n as f64) / 2.0);
    t.summarize("n", n);
    t.summarize("threshold", threshold);
    t.summarize("expected_threshold", expected);
    t.check(Check::new(
        "lhs = V^{1/n} sqrt2 on the grid",
        worst <= 1e-9,
        format!("max deviation {worst:.3e}"),
    ));
    t.check(Check::close("visibility threshold", threshold, expected, 1e-6));
    Ok(t)
}

pub fn efficiency(n: usize, points: usize) -> Result<Table> {
    check_n(n, 1, 6)?;
    check_grid(points)?;
    let mut t = Table::new("efficiency", &["eta", "I", "J", "lhs", "bound", "violated"]);
    let mut worst = 0.0f64;
    for eta in grid(0.0, 1.0, points) {
        let row = efficiency_point(n, eta)?;
        let (i, j) = row.ij().as_pair().expect("two-to-two scenario");
        let r = &row.report;
        let closed = eta * eta * SQRT_2 + (1.0 - eta).powi(2);
        worst = worst.max((r.lhs - closed).abs());
        t.push(vec![
            json!(eta),
            json!(i),
            json!(j),
            json!(r.lhs),
            json!(r.bound),
            json!(r.violated),
        ]);
    }
    let threshold = efficiency_threshold(n)?;
    let expected = 2.0 / (1.0 + SQRT_2);
    t.summarize("n", n);
    t.summarize("threshold", threshold);
    t.summarize("expected_threshold", expected);
    t.check(Check::new(
        "lhs = eta^2 sqrt2 + (1-eta)^2 on the grid",
        worst <= 1e-9,
        format!("max deviation {worst:.3e}"),
    ));
    t.check(Check::close("efficiency threshold", threshold, expected, 1e-4));
    Ok(t)
}

pub fn ghz(n: usize, points: usize) -> Result<Table> {
    check_n(n, 2, 4)?;
    check_grid(points)?;
    let family = GjFamily::new(n)?;
    let mut columns = vec!["eta".to_string()];
    columns.extend((0..family.len()).map(|j| format!("I_{}", family.label(j))));
    columns.extend(["lhs", "bound", "violated"].map(String::from));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new("ghz", &column_refs);
    let scale = 2f64.powi(n as i32 - 2);
    let mut worst = 0.0f64;
    for eta in grid(0.0, 1.0, points) {
        let row = ghz_efficiency_point(n, eta)?;
        let r = &row.report;
        worst = worst.max((r.lhs - scale * eta * SQRT_2).abs());
        let mut cells = vec![json!(eta)];
        cells.extend(row.ij().values().into_iter().map(Value::from));
        cells.extend([json!(r.lhs), json!(r.bound), json!(r.violated)]);
        t.push(cells);
    }
    let ideal = ghz_efficiency_point(n, 1.0)?;
    let want_ij = 2f64.powf(-(n as f64) / 2.0);
    let worst_ij = ideal
        .ij()
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max((v - want_ij).abs()));
    let threshold = ghz_efficiency_threshold(n)?;
    t.summarize("n", n);
    t.summarize("lhs", ideal.report.lhs);
    t.summarize("bound", ideal.report.bound);
    t.summarize("violated", ideal.report.violated);
    t.summarize("threshold", threshold);
    t.check(Check::new(
        "every I_j = 2^{-n/2} at eta = 1",
        worst_ij <= 1e-9,
        format!("max deviation {worst_ij:.3e}"),
    ));
    t.check(Check::close("lhs at eta = 1", ideal.report.lhs, scale * SQRT_2, 1e-9));
    t.check(Check::new("violation at eta = 1", ideal.report.violated, ""));
    t.check(Check::new(
        "lhs = 2^{n-2} eta sqrt2 on the grid",
        worst <= 1e-9,
        format!("max deviation {worst:.3e}"),
    ));
    t.check(Check::close("efficiency threshold", threshold, FRAC_1_SQRT_2, 1e-6));
    Ok(t)
}

pub fn sdp(n: usize, alpha: f64, scenario: ScenarioKind) -> Result<Table> {
    check_n(n, 2, 4)?;
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let (states, assembly) = match scenario {
        ScenarioKind::TwoToTwo => (werner_network(&vec![1.0; n])?, chsh_assembly(n)?),
        ScenarioKind::SingleMeasurement => (phi_plus_network(&vec![1.0; n])?, ghz_assembly(n)?),
    };
    let reduced = reduce_operators(&states, assembly.alice_povms())?;
    let problem = build_sdp(&reduced, alpha, scenario)?;
    let sol = solve_sdp(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let s_alpha = if alpha > 0.0 {
        abs_root(sol.optimum, n) * (1.0 + alpha.powf(-1.0 / n as f64))
    } else {
        f64::NAN
    };
    let status = match sol.status {
        SdpStatus::Converged => "converged",
        SdpStatus::MaxIterations => "max_iterations",
    };
    let mut t = Table::new(
        "sdp",
        &[
            "alpha",
            "I",
            "J",
            "s_alpha",
            "completeness_residual",
            "constraint_residual",
            "min_eigenvalue",
            "iterations",
            "status",
        ],
    );
    t.push(vec![
        json!(alpha),
        json!(sol.optimum),
        json!(sol.secondary),
        if s_alpha.is_nan() { Value::Null } else { json!(s_alpha) },
        json!(sol.completeness_residual),
        json!(sol.constraint_residual),
        json!(sol.min_eigenvalue),
        json!(sol.iterations),
        json!(status),
    ]);
    t.summarize("n", n);
    t.summarize(
        "scenario",
        match scenario {
            ScenarioKind::TwoToTwo => "two_to_two",
            ScenarioKind::SingleMeasurement => "single_measurement",
        },
    );
    t.check(Check::new(
        "solver converged",
        sol.status == SdpStatus::Converged,
        format!("{} iterations", sol.iterations),
    ));
    let feasible = sol.completeness_residual <= 1e-5 && sol.constraint_residual <= 1e-5 && sol.min_eigenvalue >= -1e-5;
    t.check(Check::new(
        "feasibility residuals <= 1e-5",
        feasible,
        format!(
            "completeness {:.2e}, constraint {:.2e}, min eigenvalue {:.2e}",
            sol.completeness_residual, sol.constraint_residual, sol.min_eigenvalue
        ),
    ));
    if alpha == 1.0 {
        let want = 2f64.powf(-(n as f64) / 2.0);
        t.check(Check::close("optimum I*", sol.optimum, want, 1e-4));
        if scenario == ScenarioKind::TwoToTwo {
            t.check(Check::close("S_alpha", s_alpha, SQRT_2, 1e-3));
            let recovered = MeasurementAssembly::new(
                ScenarioSpec::two_to_two(n)?,
                assembly.alice_povms().to_vec(),
                BobMeasurement::Joint { povms: sol.povms()? },
            )?;
            let diff = born_behavior(&states, &recovered)?.max_abs_diff(&born_behavior(&states, &assembly)?);
            t.check(Check::new(
                "recovered statistics match parity measurements",
                diff <= 1e-3,
                format!("max deviation {diff:.3e}"),
            ));
        }
    }
    if scenario == ScenarioKind::TwoToTwo {
        let region = abs_root(sol.optimum, n).powi(2) + abs_root(sol.secondary, n).powi(2);
        t.check(Check::new(
            "inside |I|^{2/n}+|J|^{2/n} <= 1",
            region <= 1.0 + 1e-4,
            format!("value {region:.9}"),
        ));
    }
    Ok(t)
}
