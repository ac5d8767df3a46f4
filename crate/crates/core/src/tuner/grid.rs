use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::{build_error_channels, build_scheme, RateName, RateSet, Scheme, SchemeId};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::markov::{build_qutrit_wave_chain_full, ctmc_stationary, state_cond_ghz_markov, wave_ghz_label};
use crate::solver::{solve_steady_state, SolverConfig};

pub const MAX_GRID_POINTS: usize = 10_000;
pub const DEFAULT_POINTS_PER_DECADE: f64 = 13.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `1 - fidelity` of the full Lindblad steady state.
    FullSolve,
    /// `1 - p(GHZ)` of the scheme's classical chain.
    MarkovEstimate,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::FullSolve => "full_solve",
            Objective::MarkovEstimate => "markov_estimate",
        }
    }
}

/// Log-spaced values of one rate between `lo` and `hi` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogAxis {
    pub rate: RateName,
    pub lo: f64,
    pub hi: f64,
    /// Defaults to 13 per decade, endpoints included.
    #[serde(default)]
    pub points: Option<usize>,
}

impl LogAxis {
    pub fn new(rate: RateName, lo: f64, hi: f64) -> Self {
        LogAxis { rate, lo, hi, points: None }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = Some(points);
        self
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(Error::Rates(format!("{} axis needs 0 < lo <= hi, got [{}, {}]", self.rate, self.lo, self.hi)));
        }
        let decades = (self.hi / self.lo).log10();
        let count = self.points.unwrap_or_else(|| (decades * DEFAULT_POINTS_PER_DECADE).round() as usize + 1);
        if count == 0 {
            return Err(Error::Rates(format!("{} axis has no points", self.rate)));
        }
        if count == 1 {
            return Ok(vec![self.lo]);
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        Ok((0..count)
            .map(|i| match i {
                0 => self.lo,
                i if i == count - 1 => self.hi,
                i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    /// One value per axis.
    pub values: Vec<f64>,
    pub error: Option<f64>,
    /// `ok`, or the failure message.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub scheme: Scheme,
    pub n: usize,
    pub objective: Objective,
    pub axes: Vec<RateName>,
    pub best: RateSet,
    pub best_values: Vec<f64>,
    pub error: f64,
    pub surface: Vec<GridPoint>,
    pub failures: usize,
}

impl TuneResult {
    /// Columns: one per axis, then `error`, `objective`, `status`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = self.axes.iter().map(|a| a.to_string()).collect();
        header.extend(["error", "objective", "status"].map(String::from));
        out.write_record(&header)?;
        for p in &self.surface {
            let mut row: Vec<String> = p.values.iter().map(|v| format!("{v:.16e}")).collect();
            row.push(p.error.map_or_else(String::new, |e| format!("{e:.16e}")));
            row.push(self.objective.as_str().into());
            row.push(p.status.clone());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// For a single axis: the argmin is interior and the only local minimum.
    pub fn single_interior_valley(&self) -> bool {
        if self.axes.len() != 1 || self.failures > 0 {
            return false;
        }
        let e: Vec<f64> = self.surface.iter().filter_map(|p| p.error).collect();
        let minima = (1..e.len().saturating_sub(1)).filter(|&i| e[i] < e[i - 1] && e[i] <= e[i + 1]).count();
        let at_edge = e.first() <= e.get(1) || e.last() <= e.get(e.len().wrapping_sub(2));
        minima == 1 && !at_edge
    }
}

/// Error of one rate set under `objective`.
pub fn evaluate(scheme: Scheme, n: usize, rates: &RateSet, objective: Objective, solver: &SolverConfig) -> Result<f64> {
    match objective {
        Objective::FullSolve => {
            let spec = build_scheme(SchemeId::plain(scheme), n, rates, None)?;
            let errors = build_error_channels(&spec.layout, rates, scheme.default_error_model())?;
            Ok(solve_steady_state(&spec, &errors, solver)?.error())
        }
        Objective::MarkovEstimate => match scheme {
            Scheme::QutritWave => {
                let report = ctmc_stationary(&build_qutrit_wave_chain_full(n, rates)?)?;
                Ok(1.0 - report.mass(&[&wave_ghz_label(n)]))
            }
            Scheme::StateCond => Ok(1.0 - state_cond_ghz_markov(n, rates)?),
            other => Err(Error::Unsupported(format!("no classical chain for {other}"))),
        },
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Evaluates every point of the product grid and keeps the smallest error;
/// ties go to the lexicographically smallest rate tuple.
pub fn grid_search(
    scheme: Scheme,
    n: usize,
    fixed: &RateSet,
    axes: &[LogAxis],
    objective: Objective,
    solver: &SolverConfig,
    exec: Execution,
) -> Result<TuneResult> {
    if axes.is_empty() {
        return Err(Error::Rates("grid search needs at least one free rate".into()));
    }
    let values = axes.iter().map(LogAxis::values).collect::<Result<Vec<_>>>()?;
    let total = values.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.len())).filter(|&t| t <= MAX_GRID_POINTS);
    let Some(total) = total else {
        return Err(Error::TooLarge { size: values.iter().map(Vec::len).product(), cap: MAX_GRID_POINTS });
    };
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; axes.len()];
            for (k, vals) in values.iter().enumerate().rev() {
                p[k] = vals[idx % vals.len()];
                idx /= vals.len();
            }
            p
        })
        .collect();
    let rates_at = |p: &[f64]| {
        let mut r = *fixed;
        for (axis, &v) in axes.iter().zip(p) {
            r.set(axis.rate, v);
        }
        r
    };
    let results = exec.map(&points, |p| evaluate(scheme, n, &rates_at(p), objective, solver));
    let mut surface = Vec::with_capacity(total);
    let mut failures = 0;
    for (p, r) in points.into_iter().zip(results) {
        let (error, status) = match r {
            Ok(e) if e.is_finite() => (Some(e), "ok".to_string()),
            Ok(e) => (None, format!("non-finite error {e}")),
            Err(e) => (None, e.to_string()),
        };
        failures += error.is_none() as usize;
        surface.push(GridPoint { values: p, error, status });
    }
    let best = surface
        .iter()
        .filter_map(|p| p.error.map(|e| (e, p)))
        .min_by(|(ea, a), (eb, b)| ea.total_cmp(eb).then_with(|| lexicographic(&a.values, &b.values)))
        .map(|(e, p)| (e, p.values.clone()));
    let Some((error, best_values)) = best else {
        return Err(Error::NoConvergence { iterations: total, best_residual: f64::NAN });
    };
    Ok(TuneResult {
        scheme,
        n,
        objective,
        axes: axes.iter().map(|a| a.rate).collect(),
        best: rates_at(&best_values),
        error: error.clamp(0.0, 1.0),
        best_values,
        surface,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(kp: f64) -> RateSet {
        RateSet { kappa_st: 1e4 * kp, kappa_c: 1e4 * kp, kappa_p: kp, ..Default::default() }
    }

    #[test]
    fn axis_values() {
        let v = LogAxis::new(RateName::KappaU, 1.0, 100.0).values().unwrap();
        assert_eq!(v.len(), 27);
        assert_eq!((v[0], v[26]), (1.0, 100.0));
        assert!((v[13] - 10.0).abs() < 1e-12);
        assert!(LogAxis::new(RateName::KappaU, 0.0, 1.0).values().is_err());
        assert_eq!(LogAxis::new(RateName::KappaU, 2.0, 2.0).values().unwrap(), vec![2.0]);
    }

    #[test]
    fn markov_objective_finds_wave_optimum() {
        let axes = [LogAxis::new(RateName::KappaU, 10.0, 1000.0)];
        let r = grid_search(Scheme::QutritWave, 3, &wave(1.0), &axes, Objective::MarkovEstimate, &SolverConfig::default(), Execution::default())
            .unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.single_interior_valley());
        let ku = r.best.kappa_u;
        assert!(ku > 50.0 && ku < 200.0, "{ku}");
        // common rescaling keeps the optimal ratio
        let axes10 = [LogAxis::new(RateName::KappaU, 100.0, 10000.0)];
        let s = grid_search(Scheme::QutritWave, 3, &wave(10.0), &axes10, Objective::MarkovEstimate, &SolverConfig::default(), Execution::Sequential)
            .unwrap();
        assert!((s.best.kappa_u / 10.0 - ku).abs() < 1e-9 * ku);
    }

    #[test]
    fn failures_are_counted() {
        let axes = [LogAxis::new(RateName::KappaU, 1.0, 10.0).with_points(3)];
        let err = grid_search(Scheme::LtvOnly, 3, &wave(1.0), &axes, Objective::MarkovEstimate, &SolverConfig::default(), Execution::Sequential);
        assert!(err.is_err());
        let big = [LogAxis::new(RateName::KappaU, 1.0, 10.0).with_points(101), LogAxis::new(RateName::KappaC, 1.0, 10.0).with_points(100)];
        assert!(matches!(
            grid_search(Scheme::QutritWave, 3, &wave(1.0), &big, Objective::MarkovEstimate, &SolverConfig::default(), Execution::Sequential),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn csv_columns() {
        let axes = [LogAxis::new(RateName::KappaU, 10.0, 100.0).with_points(2)];
        let r = grid_search(Scheme::QutritWave, 2, &wave(1.0), &axes, Objective::MarkovEstimate, &SolverConfig::default(), Execution::Sequential)
            .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("kappa_u,error,objective,status"));
        assert!(lines.next().unwrap().starts_with("1.0000000000000000e1,"));
    }
}
