use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ghzsim_core::catalog::{build_error_channels, build_scheme, ErrorModel, RateName, RateSet, Scheme, SchemeId};
use ghzsim_core::markov::*;
use ghzsim_core::solver::{solve_steady_state, KernelPath};
use ghzsim_core::tuner::{evaluate, grid_search, predicted_error, Objective};
use ghzsim_core::Execution;

use crate::config::{Chain, ConfigError, ExperimentConfig};
use crate::output::{Cache, Cell, Table};

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub pool: rayon::ThreadPool,
    pub cache: Cache,
    pub hash: String,
}

/// Points evaluated and how many of them failed.
#[derive(Debug, Default, PartialEq)]
pub struct Summary {
    pub points: usize,
    pub failures: usize,
}

pub type CmdResult = Result<Summary, Box<dyn std::error::Error>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub fidelity: Option<f64>,
    pub error: Option<f64>,
    pub residual: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub method: String,
    pub predicted_error: Option<f64>,
    pub markov_error: Option<f64>,
    pub status: String,
}

impl PointResult {
    fn ok(&self) -> bool {
        self.status == "ok"
    }
}

const METRICS: [&str; 8] = ["fidelity", "error", "residual", "min_eigenvalue", "method", "predicted_error", "markov_error", "status"];

/// With qubit flips and no flip rates given, `kappa_p` is split evenly.
fn effective_rates(cfg: &ExperimentConfig, scheme: Scheme, rates: RateSet) -> RateSet {
    if cfg.error_model(scheme) == ErrorModel::QubitFlips && cfg.rates.kappa_x == 0.0 && cfg.rates.kappa_z == 0.0 {
        rates.with_equal_flips()
    } else {
        rates
    }
}

fn solve_point(cfg: &ExperimentConfig, scheme: Scheme, n: usize, rates: &RateSet) -> PointResult {
    let solver = cfg.solver();
    let solved = (|| {
        let spec = build_scheme(SchemeId { kind: scheme, analysis_companions: cfg.analysis_companions }, n, rates, None)?;
        let errors = build_error_channels(&spec.layout, rates, cfg.error_model(scheme))?;
        solve_steady_state(&spec, &errors, &solver)
    })();
    let predicted_error = predicted_error(scheme, n, rates).ok().map(|p| p.value);
    let markov_error = evaluate(scheme, n, rates, Objective::MarkovEstimate, &solver).ok();
    match solved {
        Ok(rep) => PointResult {
            fidelity: Some(rep.ghz_fidelity),
            error: Some(rep.error()),
            residual: Some(rep.residual),
            min_eigenvalue: Some(rep.min_eigenvalue),
            method: format!(
                "{}_{}",
                if rep.diagnostics.blocked { "block" } else { "full" },
                match rep.diagnostics.path {
                    KernelPath::Dense => "dense",
                    KernelPath::Sparse => "sparse",
                }
            ),
            predicted_error,
            markov_error,
            status: "ok".into(),
        },
        Err(e) => PointResult {
            fidelity: None,
            error: None,
            residual: None,
            min_eigenvalue: None,
            method: String::new(),
            predicted_error,
            markov_error,
            status: e.to_string(),
        },
    }
}

fn point_key(verb: &str, n: usize, rates: &RateSet) -> String {
    let values: Vec<String> = RateName::FIELDS.iter().map(|&r| format!("{:.17e}", rates.get(r))).collect();
    format!("{verb}|n={n}|{}", values.join(","))
}

fn solve_points(ctx: &Context, verb: &str, scheme: Scheme, points: &[(usize, RateSet)]) -> Vec<PointResult> {
    ctx.pool.install(|| {
        points
            .par_iter()
            .map(|(n, rates)| {
                let key = point_key(verb, *n, rates);
                if let Some(hit) = ctx.cache.get::<PointResult>(&key) {
                    return hit;
                }
                let r = solve_point(&ctx.cfg, scheme, *n, rates);
                if r.ok() {
                    ctx.cache.put(&key, &r);
                }
                r
            })
            .collect()
    })
}

fn point_table(scheme: Scheme, points: &[(usize, RateSet)], results: &[PointResult]) -> Table {
    let mut columns = vec!["scheme".to_string(), "n".into()];
    columns.extend(RateName::FIELDS.iter().map(|r| r.as_str().to_string()));
    columns.extend(METRICS.iter().map(|m| m.to_string()));
    let mut t = Table::new(columns);
    for ((n, rates), r) in points.iter().zip(results) {
        let mut row: Vec<Cell> = vec![scheme.as_str().into(), (*n).into()];
        row.extend(RateName::FIELDS.iter().map(|&f| Cell::Num(rates.get(f))));
        row.extend([
            Cell::opt(r.fidelity),
            Cell::opt(r.error),
            Cell::opt(r.residual),
            Cell::opt(r.min_eigenvalue),
            r.method.as_str().into(),
            Cell::opt(r.predicted_error),
            Cell::opt(r.markov_error),
            r.status.as_str().into(),
        ]);
        t.push(row);
    }
    t
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.6e}"))
}

pub fn steady(ctx: &Context) -> CmdResult {
    let scheme = ctx.cfg.require_scheme()?;
    let rates = effective_rates(&ctx.cfg, scheme, ctx.cfg.rates);
    let points: Vec<(usize, RateSet)> = ctx.cfg.sizes().into_iter().map(|n| (n, rates)).collect();
    let results = solve_points(ctx, "steady", scheme, &points);
    for ((n, _), r) in points.iter().zip(&results) {
        println!(
            "{scheme} n={n}: fidelity {} error {} residual {} predicted {} markov {} [{}]",
            fmt_opt(r.fidelity),
            fmt_opt(r.error),
            fmt_opt(r.residual),
            fmt_opt(r.predicted_error),
            fmt_opt(r.markov_error),
            r.status
        );
    }
    point_table(scheme, &points, &results).write(&ctx.out, "steady", &ctx.hash)?;
    Ok(Summary { points: points.len(), failures: results.iter().filter(|r| !r.ok()).count() })
}

pub fn sweep(ctx: &Context) -> CmdResult {
    let scheme = ctx.cfg.require_scheme()?;
    if ctx.cfg.sweep.is_empty() {
        return Err(ConfigError("sweep: at least one [[sweep]] axis is required".into()).into());
    }
    let axes: Vec<(RateName, Vec<f64>)> = ctx.cfg.sweep.iter().map(|a| Ok((a.rate, a.values()?))).collect::<ghzsim_core::Result<_>>()?;
    let mut grid: Vec<RateSet> = vec![ctx.cfg.rates];
    for (rate, values) in &axes {
        grid = grid.iter().flat_map(|r| values.iter().map(|&v| r.with(*rate, v))).collect();
    }
    let points: Vec<(usize, RateSet)> = ctx
        .cfg
        .sizes()
        .into_iter()
        .flat_map(|n| grid.iter().map(move |&r| (n, effective_rates(&ctx.cfg, scheme, r))))
        .collect();
    let results = solve_points(ctx, "sweep", scheme, &points);
    point_table(scheme, &points, &results).write(&ctx.out, "sweep", &ctx.hash)?;
    let failures = results.iter().filter(|r| !r.ok()).count();
    println!("{scheme} sweep: {} points, {failures} failed", points.len());
    Ok(Summary { points: points.len(), failures })
}

pub fn tune(ctx: &Context) -> CmdResult {
    let scheme = ctx.cfg.require_scheme()?;
    if ctx.cfg.sweep.is_empty() {
        return Err(ConfigError("sweep: tune needs at least one [[sweep]] axis".into()).into());
    }
    let objective = ctx.cfg.tune.objective;
    let axis_names: Vec<String> = ctx.cfg.sweep.iter().map(|a| a.rate.to_string()).collect();
    let mut surface = Table::new(["n".to_string()].into_iter().chain(axis_names.clone()).chain(["error".into(), "status".into()]));
    let mut best = Table::new(["n".to_string()].into_iter().chain(axis_names).chain(["error".into(), "failures".into(), "status".into()]));
    let mut summary = Summary::default();
    for n in ctx.cfg.sizes() {
        let solver = ctx.cfg.solver();
        let result = ctx.pool.install(|| grid_search(scheme, n, &ctx.cfg.rates, &ctx.cfg.sweep, objective, &solver, Execution::Parallel));
        match result {
            Ok(r) => {
                for p in &r.surface {
                    let mut row: Vec<Cell> = vec![n.into()];
                    row.extend(p.values.iter().map(|&v| Cell::Num(v)));
                    row.extend([Cell::opt(p.error), p.status.as_str().into()]);
                    surface.push(row);
                }
                let mut row: Vec<Cell> = vec![n.into()];
                row.extend(r.best_values.iter().map(|&v| Cell::Num(v)));
                row.extend([Cell::Num(r.error), r.failures.into(), "ok".into()]);
                best.push(row);
                let at: Vec<String> = ctx.cfg.sweep.iter().zip(&r.best_values).map(|(a, v)| format!("{} = {v:.6e}", a.rate)).collect();
                println!("{scheme} n={n} {}: best {} error {:.6e}", objective.as_str(), at.join(", "), r.error);
                summary.points += r.surface.len();
                summary.failures += r.failures;
            }
            Err(e) => {
                let mut row: Vec<Cell> = vec![n.into()];
                row.extend(ctx.cfg.sweep.iter().map(|_| Cell::Empty));
                row.extend([Cell::Empty, Cell::Empty, e.to_string().into()]);
                best.push(row);
                println!("{scheme} n={n}: {e}");
                summary.points += 1;
                summary.failures += 1;
            }
        }
    }
    surface.write(&ctx.out, "tune_surface", &ctx.hash)?;
    best.write(&ctx.out, "tune", &ctx.hash)?;
    Ok(summary)
}

/// `a/b` as `w+r/b` when `a > b`.
pub fn mixed_fraction(num: i128, den: i128) -> String {
    let (w, r) = (num / den, num % den);
    match (w, r) {
        (_, 0) => w.to_string(),
        (0, _) => format!("{r}/{den}"),
        _ => format!("{w}+{r}/{den}"),
    }
}

struct MarkovRow {
    quantity: &'static str,
    value: f64,
    reference: Option<f64>,
    exact: String,
    ok: bool,
}

impl MarkovRow {
    fn value(quantity: &'static str, value: f64, reference: Option<f64>) -> Self {
        MarkovRow { quantity, value, reference, exact: String::new(), ok: value.is_finite() }
    }
}

fn chain_name(c: Chain) -> &'static str {
    match c {
        Chain::Clock => "clock",
        Chain::StateCond => "state_cond",
        Chain::QutritAggregate => "qutrit_aggregate",
        Chain::QutritSequential => "qutrit_sequential",
        Chain::QutritWave => "qutrit_wave",
        Chain::Lattice => "lattice",
        Chain::Frontier => "frontier",
    }
}

fn markov_rows(cfg: &ExperimentConfig, chain: Chain, n: usize) -> ghzsim_core::Result<Vec<MarkovRow>> {
    let r = &cfg.rates;
    let rows = match chain {
        Chain::Clock => {
            let report = ctmc_stationary(&build_ancilla_clock_ctmc(n, r, cfg.markov.clock_variant)?)?;
            let agg = clock_aggregates(&report, n);
            let formula = principal_populations_formula(r);
            let (e1, e2) = clock_epsilons(r);
            vec![
                MarkovRow::value("clock_p_all_g", agg.principal.g, Some(formula.g)),
                MarkovRow::value("clock_p_all_e", agg.principal.e, Some(formula.e)),
                MarkovRow::value("clock_p_all_m", agg.principal.m, Some(formula.m)),
                MarkovRow::value("clock_off_principal", agg.off_principal, Some(off_principal_bound(n, e1, e2))),
            ]
        }
        Chain::StateCond => {
            let exact = state_cond_ghz_population(&llp_exact(n, r)?);
            vec![
                MarkovRow::value("state_cond_ghz_solve", state_cond_ghz_markov(n, r)?, Some(exact)),
                MarkovRow::value("state_cond_ghz_leading_order", llp_leading_order(n, r), Some(exact)),
            ]
        }
        Chain::QutritAggregate => {
            let report = ctmc_stationary(&build_qutrit_aggregate_chain(n, r)?)?;
            vec![MarkovRow::value("qutrit_aggregate_all_qubit", report.mass(&[&aggregate_label(0, n)]), None)]
        }
        Chain::QutritSequential => {
            let (model, closed) = build_qutrit_sequential_chain(n, r)?;
            let p = ctmc_stationary(&model)?.mass(&["GHZ"]);
            vec![
                MarkovRow::value("qutrit_sequential_ghz", p, Some(closed)),
                MarkovRow::value("qutrit_sequential_first_order", sequential_first_order(n, r), Some(closed)),
            ]
        }
        Chain::QutritWave => {
            let p = ctmc_stationary(&build_qutrit_wave_chain_full(n, r)?)?.mass(&[&wave_ghz_label(n)]);
            vec![MarkovRow::value("qutrit_wave_ghz", p, Some(ghz_estimate_method2(n, r)?))]
        }
        Chain::Lattice => {
            let d = lattice_denominator(n)?;
            let (num, den) = (*d.numer(), *d.denom());
            let mut row = MarkovRow::value("lattice_denominator", num as f64 / den as f64, None);
            row.exact = format!("{num}/{den}");
            println!("n={n} lattice crossing rate: kappa_st / ({}) = kappa_st / ({num}/{den})", mixed_fraction(num, den));
            vec![row]
        }
        Chain::Frontier => {
            let rep = verify_frontier_convergence(n, cfg.markov.frontier_trials, cfg.seed)?;
            let mut row = MarkovRow::value("frontier_max_steps", rep.max_steps as f64, None);
            row.exact = format!("{}/{} absorbed, {} increases", rep.absorbed, rep.trials, rep.increases);
            row.ok = rep.passed();
            vec![row]
        }
    };
    Ok(rows)
}

pub fn markov(ctx: &Context) -> CmdResult {
    let mut t = Table::new(["n", "quantity", "value", "reference", "rel_diff", "exact", "status"]);
    let mut summary = Summary::default();
    let mut chains = ctx.cfg.markov.chains.clone();
    chains.sort();
    chains.dedup();
    for n in ctx.cfg.sizes() {
        for &chain in &chains {
            match markov_rows(&ctx.cfg, chain, n) {
                Ok(rows) => {
                    for row in rows {
                        let rel = row.reference.map(|r| (row.value - r).abs() / r.abs());
                        let status = if row.ok { "ok" } else { "failed" };
                        if chain != Chain::Lattice {
                            println!(
                                "n={n} {}: {:.10e}{}{} [{status}]",
                                row.quantity,
                                row.value,
                                row.reference.map_or_else(String::new, |r| format!(" vs {r:.10e}")),
                                if row.exact.is_empty() { String::new() } else { format!(" ({})", row.exact) }
                            );
                        }
                        summary.points += 1;
                        summary.failures += !row.ok as usize;
                        t.push(vec![
                            n.into(),
                            row.quantity.into(),
                            Cell::Num(row.value),
                            Cell::opt(row.reference),
                            Cell::opt(rel),
                            row.exact.into(),
                            status.into(),
                        ]);
                    }
                }
                Err(e) => {
                    println!("n={n} {}: {e}", chain_name(chain));
                    summary.points += 1;
                    summary.failures += 1;
                    t.push(vec![n.into(), chain_name(chain).into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]);
                }
            }
        }
    }
    t.write(&ctx.out, "markov", &ctx.hash)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_fractions() {
        assert_eq!(mixed_fraction(47, 8), "5+7/8");
        assert_eq!(mixed_fraction(9, 2), "4+1/2");
        assert_eq!(mixed_fraction(3, 1), "3");
        assert_eq!(mixed_fraction(3, 4), "3/4");
    }

    #[test]
    fn point_keys_separate_sizes_and_rates() {
        let r = RateSet { kappa_u: 1.0, ..Default::default() };
        assert_ne!(point_key("sweep", 2, &r), point_key("sweep", 3, &r));
        assert_ne!(point_key("sweep", 2, &r), point_key("sweep", 2, &r.with(RateName::KappaU, 1.0 + 1e-15)));
    }
}
