//! Optimal-rate formulas, predicted errors and grid search over rates.

mod grid;

use serde::{Deserialize, Serialize};

pub use grid::{evaluate, grid_search, GridPoint, LogAxis, Objective, TuneResult, DEFAULT_POINTS_PER_DECADE, MAX_GRID_POINTS};

use crate::catalog::{RateSet, Scheme};
use crate::error::{Error, Result};
use crate::markov::llp_corrections;

/// Dimensionless rate ratios of a rate set. The clock ratios are absent
/// when the set has no decay rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningRatios {
    /// `kappa_u / kappa_st`.
    pub eps: f64,
    /// `kappa_p / kappa_u`.
    pub eps_p: f64,
    /// `max(kappa_t, kappa_u) / kappa_d`.
    pub eps1: Option<f64>,
    /// `kappa_d / kappa_st`.
    pub eps2: Option<f64>,
    /// `kappa_c / kappa_st`.
    pub gamma: f64,
}

impl TuningRatios {
    pub fn from_rates(r: &RateSet) -> Result<Self> {
        use crate::catalog::RateName::*;
        r.require_positive(&[KappaU, KappaSt, KappaC, KappaP])?;
        let clock = r.kappa_d > 0.0;
        Ok(TuningRatios {
            eps: r.kappa_u / r.kappa_st,
            eps_p: r.kappa_p / r.kappa_u,
            eps1: clock.then(|| r.kappa_t.max(r.kappa_u) / r.kappa_d),
            eps2: clock.then(|| r.kappa_d / r.kappa_st),
            gamma: r.kappa_c / r.kappa_st,
        })
    }

    /// Rates with these ratios and the given `kappa_st`; clock ratios set
    /// `kappa_t = kappa_u`.
    pub fn to_rates(&self, kappa_st: f64) -> RateSet {
        let kappa_u = self.eps * kappa_st;
        let kappa_d = self.eps2.map_or(0.0, |e| e * kappa_st);
        RateSet {
            kappa_st,
            kappa_u,
            kappa_t: if self.eps1.is_some() { kappa_u } else { 0.0 },
            kappa_d,
            kappa_c: self.gamma * kappa_st,
            kappa_p: self.eps_p * kappa_u,
            ..Default::default()
        }
    }

    /// Inverse rates `1/kappa_p, 1/kappa_u, 1/kappa_d, 1/kappa_st`, slowest
    /// first; `None` for the clock entry without a decay rate.
    pub fn timescales(&self, kappa_st: f64) -> [Option<f64>; 4] {
        let u = self.eps * kappa_st;
        [Some(1.0 / (self.eps_p * u)), Some(1.0 / u), self.eps2.map(|e| 1.0 / (e * kappa_st)), Some(1.0 / kappa_st)]
    }
}

/// Which first-order estimate of the qutrit wave a tuning optimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveEstimate {
    /// Waves in sequence: balances `n eps_p` against `(2n-1) eps`.
    MethodA,
    /// Overlapping waves: balances `n eps_p` against `n eps`.
    MethodB,
}

/// Rates for the qutrit wave with `kappa_st = kappa_c`, and the predicted
/// error at that tuning.
pub fn optimal_rates_qutrit_wave(n: usize, kappa_c: f64, kappa_p: f64, estimate: WaveEstimate) -> Result<(RateSet, f64)> {
    if !(kappa_c > kappa_p && kappa_p > 0.0) || !kappa_c.is_finite() {
        return Err(Error::Rates(format!("need kappa_c > kappa_p > 0, got {kappa_c}, {kappa_p}")));
    }
    if n == 0 {
        return Err(Error::UnsupportedSize { n, reason: "needs n >= 1".into() });
    }
    let nf = n as f64;
    let ratio = kappa_p / kappa_c;
    let (eps, error) = match estimate {
        WaveEstimate::MethodA => ((nf * ratio / (2.0 * nf - 1.0)).sqrt(), 2.0 * (nf * (2.0 * nf - 1.0) * ratio).sqrt()),
        WaveEstimate::MethodB => (ratio.sqrt(), 2.0 * nf * ratio.sqrt()),
    };
    let rates = RateSet { kappa_st: kappa_c, kappa_c, kappa_u: eps * kappa_c, kappa_p, ..Default::default() };
    Ok((rates, error))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedError {
    /// First-order error clamped to `[0, 1]`.
    pub value: f64,
    /// Correction terms summed above 0.5, where the expansion is not
    /// trustworthy.
    pub regime_violated: bool,
}

/// Threshold on the summed first-order corrections.
pub const REGIME_LIMIT: f64 = 0.5;

/// First-order steady-state error of a scheme: the overlapping-wave
/// estimate for the qutrit wave, the output-signal expansion for
/// state conditioning.
pub fn predicted_error(scheme: Scheme, n: usize, rates: &RateSet) -> Result<PredictedError> {
    let terms: Vec<f64> = match scheme {
        Scheme::QutritWave => {
            let r = TuningRatios::from_rates(rates)?;
            let nf = n as f64;
            vec![nf * r.eps_p, nf * r.eps]
        }
        Scheme::StateCond | Scheme::StateCondTripartite => {
            use crate::catalog::RateName::*;
            rates.require_positive(&[KappaU, KappaT, KappaD, KappaC, KappaR])?;
            if n < 2 {
                return Err(Error::UnsupportedSize { n, reason: "needs n >= 2".into() });
            }
            llp_corrections(n, rates).to_vec()
        }
        other => return Err(Error::Unsupported(format!("no error estimate for {other}"))),
    };
    let sum: f64 = terms.iter().sum();
    Ok(PredictedError { value: sum.clamp(0.0, 1.0), regime_violated: !(sum <= REGIME_LIMIT) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{optimal_rates_state_cond, state_cond_scaling_error};

    #[test]
    fn method_b_values() {
        let (r, err) = optimal_rates_qutrit_wave(5, 1e4, 1.0, WaveEstimate::MethodB).unwrap();
        assert!((r.kappa_u / r.kappa_c - 0.01).abs() < 1e-15);
        assert_eq!(r.kappa_st, r.kappa_c);
        assert!((err - 0.1).abs() < 1e-14);
        let p = predicted_error(Scheme::QutritWave, 5, &r).unwrap();
        assert!((p.value - 0.1).abs() < 1e-14 && !p.regime_violated);
    }

    #[test]
    fn method_a_single_site_matches_b() {
        let (a, _) = optimal_rates_qutrit_wave(1, 1e4, 1.0, WaveEstimate::MethodA).unwrap();
        let (b, _) = optimal_rates_qutrit_wave(1, 1e4, 1.0, WaveEstimate::MethodB).unwrap();
        assert!((a.kappa_u - b.kappa_u).abs() < 1e-12);
        assert!(optimal_rates_qutrit_wave(3, 1.0, 2.0, WaveEstimate::MethodA).is_err());
    }

    #[test]
    fn method_b_never_worse() {
        for n in 2..20 {
            let (_, a) = optimal_rates_qutrit_wave(n, 1e4, 1.0, WaveEstimate::MethodA).unwrap();
            let (_, b) = optimal_rates_qutrit_wave(n, 1e4, 1.0, WaveEstimate::MethodB).unwrap();
            assert!(b <= a, "n={n}");
        }
    }

    #[test]
    fn state_cond_optimum_reproduces_scaling() {
        // At the optimum the four corrections sum to a fixed multiple of the
        // scaling law; the ratio does not depend on the rates.
        let ratio = |kr: f64| {
            let r = optimal_rates_state_cond(4, kr, 1.0).unwrap();
            predicted_error(Scheme::StateCond, 4, &r).unwrap().value / state_cond_scaling_error(4, kr, 1.0)
        };
        assert!((ratio(1e6) - ratio(1e9)).abs() < 1e-9);
    }

    #[test]
    fn regime_guard() {
        let r = RateSet { kappa_u: 1.0, kappa_st: 2.0, kappa_c: 2.0, kappa_p: 1.0, ..Default::default() };
        let p = predicted_error(Scheme::QutritWave, 3, &r).unwrap();
        assert!(p.regime_violated);
        assert_eq!(p.value, 1.0);
        assert!(predicted_error(Scheme::LtvOnly, 3, &r).is_err());
    }

    #[test]
    fn ratios_round_trip() {
        let r = RateSet { kappa_u: 3.0, kappa_t: 3.0, kappa_d: 30.0, kappa_st: 300.0, kappa_c: 150.0, kappa_p: 0.03, ..Default::default() };
        let t = TuningRatios::from_rates(&r).unwrap();
        let back = t.to_rates(300.0);
        for (a, b) in [(back.kappa_u, 3.0), (back.kappa_d, 30.0), (back.kappa_c, 150.0), (back.kappa_p, 0.03)] {
            assert!((a - b).abs() <= 1e-12 * b);
        }
        assert!(t.timescales(300.0).windows(2).all(|w| w[0] > w[1]));
    }
}
