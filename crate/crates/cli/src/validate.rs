//! Fast oracle and invariant checks, one PASS/FAIL line each.

use num_rational::Ratio;

use ghzsim_core::catalog::{build_error_channels, build_scheme, RateSet, Scheme, SchemeId};
use ghzsim_core::markov::*;
use ghzsim_core::solver::{solve_block, solve_steady_state, trace_distance, SolverConfig, SolverMethod};
use ghzsim_core::Result;

use crate::output::{Cell, Table};

type Check = Result<(bool, String)>;

fn lattice_table() -> Check {
    let expected = [Ratio::from_integer(3), Ratio::new(9, 2), Ratio::new(47, 8), Ratio::new(115, 16)];
    let mut got = Vec::new();
    for (n, want) in (2..=5).zip(expected) {
        let d = lattice_denominator(n)?;
        if d != want {
            return Ok((false, format!("n={n}: {d} != {want}")));
        }
        got.push(format!("n={n}: {d}"));
    }
    Ok((true, got.join(", ")))
}

fn clock_formula() -> Check {
    let rates = RateSet { kappa_u: 1.0, kappa_t: 1.0, kappa_d: 1e3, kappa_st: 1e6, ..Default::default() };
    let agg = clock_aggregates(&ctmc_stationary(&build_ancilla_clock_ctmc(3, &rates, ClockVariant::ThreeLevel)?)?, 3);
    let f = principal_populations_formula(&rates);
    let err = [(agg.principal.g, f.g), (agg.principal.e, f.e), (agg.principal.m, f.m)]
        .iter()
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    Ok((err <= 4e-2, format!("n=3 relative error {err:.2e} (tol 4e-2)")))
}

fn recursions_vs_solve() -> Check {
    let rates = RateSet { kappa_r: 1.0, kappa_d: 1e-3, kappa_c: 1.3e-3, kappa_u: 2e-6, kappa_t: 2e-6, kappa_p: 1e-9, ..Default::default() };
    let mut worst = 0.0f64;
    for n in 3..=5 {
        let solved = ctmc_stationary(&build_reduced_state_cond_chain(n, &rates)?)?;
        let exact = llp_exact(n, &rates)?;
        worst = exact.stationary.iter().zip(&solved.stationary).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    Ok((worst <= 1e-9, format!("n=3..5 max difference {worst:.2e} (tol 1e-9)")))
}

fn sequential_product() -> Check {
    let rates = RateSet { kappa_u: 0.7, kappa_st: 3.0, kappa_c: 2.0, kappa_p: 0.05, ..Default::default() };
    let mut worst = 0.0f64;
    for n in 2..=6 {
        let (m, closed) = build_qutrit_sequential_chain(n, &rates)?;
        worst = worst.max((ctmc_stationary(&m)?.mass(&["GHZ"]) - closed).abs());
    }
    Ok((worst <= 1e-10, format!("n=2..6 max difference {worst:.2e} (tol 1e-10)")))
}

fn generators() -> Check {
    let rates = RateSet { kappa_u: 1.0, kappa_d: 10.0, kappa_t: 1.0, kappa_st: 100.0, kappa_r: 100.0, kappa_c: 30.0, kappa_p: 0.02, ..Default::default() };
    let chains = [
        build_ancilla_clock_ctmc(4, &rates, ClockVariant::ThreeLevel)?,
        build_ancilla_clock_ctmc(3, &rates, ClockVariant::FourLevelJumpCond)?,
        build_reduced_state_cond_chain(4, &rates)?,
        build_qutrit_aggregate_chain(4, &rates)?,
        build_qutrit_wave_chain_full(4, &rates)?,
    ];
    let worst = chains.iter().map(|c| c.column_sum_error() / c.max_rate()).fold(0.0, f64::max);
    let negative = chains.iter().any(|c| c.edges().iter().any(|e| e.2 < 0.0));
    Ok((worst <= 1e-12 && !negative, format!("{} chains, max relative column sum {worst:.1e}", chains.len())))
}

fn frontiers(seed: u64) -> Check {
    for n in 2..=5 {
        let rep = verify_frontier_convergence(n, 200, seed)?;
        if !rep.passed() {
            return Ok((false, format!("n={n}: {rep:?}")));
        }
    }
    Ok((true, "n=2..5, 200 trajectories each".into()))
}

fn block_vs_full() -> Check {
    let rates = RateSet { kappa_u: 1.0, kappa_st: 100.0, kappa_c: 30.0, kappa_p: 0.02, ..Default::default() };
    let spec = build_scheme(SchemeId::plain(Scheme::QutritWave), 3, &rates, None)?;
    let errors = build_error_channels(&spec.layout, &rates, Scheme::QutritWave.default_error_model())?;
    let cfg = SolverConfig::default();
    let full = solve_steady_state(&spec, &errors, &cfg.clone().with_method(SolverMethod::DenseNullSpace))?;
    let block = solve_block(&spec, &errors, &cfg)?;
    let td = trace_distance(&full.rho, &block.rho)?;
    Ok((td <= 1e-8, format!("qutrit wave n=3 trace distance {td:.2e} (tol 1e-8)")))
}

/// Runs every check, prints one line each and returns the table with the
/// number of failures.
pub fn run(seed: u64) -> (Table, usize) {
    let checks: [(&str, Box<dyn Fn() -> Check>); 7] = [
        ("lattice denominators", Box::new(lattice_table)),
        ("clock formula vs chain", Box::new(clock_formula)),
        ("recursions vs chain solve", Box::new(recursions_vs_solve)),
        ("sequential chain vs product", Box::new(sequential_product)),
        ("generator column sums", Box::new(generators)),
        ("frontier absorption", Box::new(move || frontiers(seed))),
        ("block vs full solve", Box::new(block_vs_full)),
    ];
    let mut t = Table::new(["check", "status", "detail"]);
    let mut failed = 0;
    for (name, check) in checks {
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        let status = if ok { "PASS" } else { "FAIL" };
        println!("{status} {name}: {detail}");
        failed += !ok as usize;
        t.push(vec![Cell::from(name), status.into(), detail.into()]);
    }
    (t, failed)
}
