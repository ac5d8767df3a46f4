//! Reduced output-signal chain of the state-conditioning scheme.
//!
//! States: `R1..Rn` (k data qubits reset since the last clock tick),
//! `G0..G{n-2}` (all reset, counting correlator detections), `GHZ` and `E`
//! (an error since the last reset), each in the clock sectors `e` (ancillas
//! in `e`) and `mg` (ancillas in `m` or `g`).
//!
//! Transitions, `s` ranging over both sectors:
//! - clock: `X^e -> X^mg` at `n kappa_d`, `X^mg -> X^e` at `n kappa_up`,
//!   where `kappa_up` is the effective up rate;
//! - errors: `X^s -> E^s` at `n kappa_p` for `X != E`;
//! - resets, sector `e` only: `Rk^e -> R(k+1)^e` at `(n-k) kappa_r`, and
//!   every non-`R` state to `R1^e` at `n kappa_r`;
//! - correlator detections: `Rk^s -> E^s` at `(n-1) kappa_c` for `k < n`;
//!   `Rn^s -> G1^s` at `kappa_c` and `-> G0^s` at `(n-2) kappa_c`;
//!   `Gk^s -> G(k+1)^s` at `kappa_c`, the last `G` feeding `GHZ`.
//!
//! Detections that leave the grouping unchanged (the remaining `(n-2)
//! kappa_c` on `Gk`, all `n-1` bonds on `GHZ` and `E`, the reset of an
//! already reset qubit in `Rn`) are self-loops and carry no entry.

use super::ctmc::{ctmc_stationary, ChainReport, CtmcBuilder, CtmcModel};
use crate::catalog::RateSet;
use crate::error::{Error, Result};

const SECTORS: [&str; 2] = ["e", "mg"];

fn label(group: &str, sector: &str) -> String {
    format!("{group}^{sector}")
}

/// Group names in chain order: `R1..Rn, G0..G{n-2}, GHZ, E`.
pub fn state_cond_groups(n: usize) -> Vec<String> {
    let mut g: Vec<String> = (1..=n).map(|k| format!("R{k}")).collect();
    g.extend((0..=n - 2).map(|k| format!("G{k}")));
    g.push("GHZ".into());
    g.push("E".into());
    g
}

fn check(n: usize, rates: &RateSet) -> Result<()> {
    if n < 3 {
        return Err(Error::UnsupportedSize { n, reason: "the reduced chain needs n >= 3".into() });
    }
    use crate::catalog::RateName::*;
    rates.require_positive(&[KappaU, KappaD, KappaT, KappaR, KappaC])
}

pub fn build_reduced_state_cond_chain(n: usize, rates: &RateSet) -> Result<CtmcModel> {
    check(n, rates)?;
    let groups = state_cond_groups(n);
    let labels: Vec<String> = SECTORS.iter().flat_map(|s| groups.iter().map(move |g| label(g, s))).collect();
    let mut b = CtmcBuilder::new(labels)?;
    let nf = n as f64;
    let up = rates.effective_up();
    let (kc, kr, kp) = (rates.kappa_c, rates.kappa_r, rates.kappa_p);
    for g in &groups {
        b.add_by_label(&label(g, "e"), &label(g, "mg"), nf * rates.kappa_d)?;
        b.add_by_label(&label(g, "mg"), &label(g, "e"), nf * up)?;
        if !g.starts_with('R') {
            b.add_by_label(&label(g, "e"), "R1^e", nf * kr)?;
        }
    }
    for k in 1..n {
        b.add_by_label(&format!("R{k}^e"), &format!("R{}^e", k + 1), (n - k) as f64 * kr)?;
    }
    for s in SECTORS {
        for g in groups.iter().filter(|g| g.as_str() != "E") {
            b.add_by_label(&label(g, s), &label("E", s), nf * kp)?;
        }
        for k in 1..n {
            b.add_by_label(&label(&format!("R{k}"), s), &label("E", s), (nf - 1.0) * kc)?;
        }
        let rn = label(&format!("R{n}"), s);
        b.add_by_label(&rn, &label("G1", s), kc)?;
        b.add_by_label(&rn, &label("G0", s), (nf - 2.0) * kc)?;
        for k in 0..=n - 2 {
            let next = if k == n - 2 { "GHZ".to_string() } else { format!("G{}", k + 1) };
            b.add_by_label(&label(&format!("G{k}"), s), &label(&next, s), kc)?;
        }
    }
    b.build()
}

/// Stationary populations of the reduced chain from its explicit
/// recursions, in the state order of [`build_reduced_state_cond_chain`].
pub fn llp_exact(n: usize, rates: &RateSet) -> Result<ChainReport> {
    check(n, rates)?;
    let nf = n as f64;
    let up = rates.effective_up();
    let (kd, kc, kr, kp) = (rates.kappa_d, rates.kappa_c, rates.kappa_r, rates.kappa_p);
    let p_e = up / (up + kd);
    let c = (nf - 1.0) / nf * kc;

    // R states: ratio to Rn^e of the backward product of reset rates.
    let a0 = nf * kp + (nf - 1.0) * kc + nf * kd * (kp + c) / (kp + c + up);
    let mut q = vec![1.0];
    for j in 1..=n {
        let prev = q[j - 1];
        q.push(prev * (a0 + (j - 1) as f64 * kr) / (j as f64 * kr));
    }
    let rn_e = p_e / q.iter().sum::<f64>();
    let r_e: Vec<f64> = (1..=n).map(|k| q[n - k] * rn_e).collect();
    let mg_ratio = kd / (kp + up + c);
    let r_mg: Vec<f64> = r_e.iter().map(|x| mg_ratio * x).collect();

    // G states: each fed by its predecessor through one detection.
    let b0 = nf * kp + kc + nf * kr;
    let tick = nf * kd / (b0 + nf * kd);
    let b1 = nf * kp + nf * up * b0 / (b0 + nf * kd) + kc;
    let mut g_e = Vec::with_capacity(n - 1);
    let mut g_mg = Vec::with_capacity(n - 1);
    for k in 0..=n - 2 {
        let (in_mg, in_e) = match k {
            0 => ((nf - 2.0) * r_mg[n - 1], (nf - 2.0) * r_e[n - 1]),
            1 => (g_mg[0] + r_mg[n - 1], g_e[0] + r_e[n - 1]),
            _ => (g_mg[k - 1], g_e[k - 1]),
        };
        let mg = (kc * in_mg + tick * kc * in_e) / b1;
        let e = ((nf * up / b1) * kc * in_mg + (1.0 + tick * nf * up / b1) * kc * in_e) / (b0 + nf * kd);
        g_mg.push(mg);
        g_e.push(e);
    }
    let (last_e, last_mg) = (g_e[n - 2], g_mg[n - 2]);
    let ghz_mg = (kc * last_mg + kd / (kd + kr + kp) * kc * last_e) / (nf * kp + nf * up * (kr + kp) / (kr + kp + kd));
    let ghz_e = (kc * last_e + nf * up * ghz_mg) / (nf * (kp + kd + kr));

    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let e_e = p_e - sum(&r_e) - sum(&g_e) - ghz_e;
    let e_mg = (1.0 - p_e) - sum(&r_mg) - sum(&g_mg) - ghz_mg;

    let mut stationary = Vec::with_capacity(4 * n + 2);
    for (r, g, ghz, e) in [(&r_e, &g_e, ghz_e, e_e), (&r_mg, &g_mg, ghz_mg, e_mg)] {
        stationary.extend_from_slice(r);
        stationary.extend_from_slice(g);
        stationary.push(ghz);
        stationary.push(e);
    }
    let model = build_reduced_state_cond_chain(n, rates)?;
    let residual = model.residual(&stationary);
    Ok(ChainReport { states: model.states, stationary, residual })
}

/// `p(GHZ^e) + p(GHZ^mg)`.
pub fn state_cond_ghz_population(report: &ChainReport) -> f64 {
    report.mass(&["GHZ^e", "GHZ^mg"])
}

/// Linear solve of the reduced chain, summed over both GHZ states.
pub fn state_cond_ghz_markov(n: usize, rates: &RateSet) -> Result<f64> {
    Ok(state_cond_ghz_population(&ctmc_stationary(&build_reduced_state_cond_chain(n, rates)?)?))
}

/// The four first-order loss terms, in the order error, wrong correlation,
/// clock, reset.
pub fn llp_corrections(n: usize, rates: &RateSet) -> [f64; 4] {
    let nf = n as f64;
    let up = rates.effective_up();
    [
        rates.kappa_p / up,
        nf * (nf - 1.0) * up / rates.kappa_c,
        up / rates.kappa_d,
        nf * nf.ln() * (rates.kappa_c + rates.kappa_d) / rates.kappa_r,
    ]
}

/// First-order GHZ population of the state-conditioning scheme.
pub fn llp_leading_order(n: usize, rates: &RateSet) -> f64 {
    1.0 - llp_corrections(n, rates).iter().sum::<f64>()
}

/// Rates minimizing the first-order loss of the state-conditioning scheme at
/// given reset and error rates. Ancilla rates follow the effective up rate
/// with `kappa_u = kappa_t`; `kappa_st = kappa_r`; the error budget is split
/// evenly between bit and phase flips.
pub fn optimal_rates_state_cond(n: usize, kappa_r: f64, kappa_p: f64) -> Result<RateSet> {
    if n < 2 {
        return Err(Error::UnsupportedSize { n, reason: "needs n >= 2".into() });
    }
    if !(kappa_r > kappa_p && kappa_p > 0.0) {
        return Err(Error::Rates(format!("need kappa_r > kappa_p > 0, got {kappa_r}, {kappa_p}")));
    }
    let nf = n as f64;
    let ln = nf.ln();
    let ratio = kappa_r / kappa_p;
    let up = kappa_p * ratio.cbrt() / (nf.powf(2.0 / 3.0) * ln.cbrt());
    let kd = kappa_p * ratio.powf(2.0 / 3.0) / (nf.powf(5.0 / 6.0) * ln.powf(2.0 / 3.0));
    let kc = kappa_p * ratio.powf(2.0 / 3.0) * nf.powf(1.0 / 6.0) / ln.powf(2.0 / 3.0);
    Ok(RateSet {
        kappa_u: 2.0 * up,
        kappa_t: 2.0 * up,
        kappa_d: kd,
        kappa_c: kc,
        kappa_r,
        kappa_st: kappa_r,
        kappa_p,
        ..Default::default()
    }
    .with_equal_flips())
}

/// `(n^{7/2} ln n kappa_p / kappa_r)^{1/3}`.
pub fn state_cond_scaling_error(n: usize, kappa_r: f64, kappa_p: f64) -> f64 {
    let nf = n as f64;
    (nf.powf(3.5) * nf.ln() * kappa_p / kappa_r).cbrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyncCorrection {
    /// First-order GHZ population with the finite synchronization time.
    pub estimate: f64,
    /// Effective up rate of a clock whose ancillas synchronize at the finite
    /// rate `eta2 * kappa_st`.
    pub kappa_hat_u: f64,
}

/// Leading-order estimate with the reset time `n ln n / kappa_r` extended
/// by the synchronization delay `(n-1)/(eta2 kappa_st)`.
pub fn imperfect_sync_correction(n: usize, rates: &RateSet, eta2: f64) -> SyncCorrection {
    let nf = n as f64;
    let sync = eta2 * rates.kappa_st;
    let mut terms = llp_corrections(n, rates);
    terms[3] = (rates.kappa_c + rates.kappa_d) * (nf * nf.ln() / rates.kappa_r + (nf - 1.0) / sync);
    let (ku, kt) = (rates.kappa_u, rates.kappa_t);
    let lag = ((nf - 1.0) * ku + nf * kt) / sync;
    let kappa_hat_u = nf * ku * kt / (nf * ku * (1.0 + lag) + nf * kt);
    SyncCorrection { estimate: 1.0 - terms.iter().sum::<f64>(), kappa_hat_u }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RateSet {
        RateSet { kappa_u: 2e-4, kappa_t: 2e-4, kappa_d: 1e-2, kappa_c: 1e-2, kappa_r: 1.0, kappa_p: 1e-6, ..Default::default() }
    }

    #[test]
    fn state_count_and_conservation() {
        let m = build_reduced_state_cond_chain(3, &sample()).unwrap();
        assert_eq!(m.n_states(), 14);
        assert!(m.irreducible);
        assert!(m.column_sum_error() < 1e-12);
        assert_eq!(m.rate("R3^e", "G0^e"), 1e-2);
        assert_eq!(m.rate("R1^mg", "R2^mg"), 0.0);
        assert!(build_reduced_state_cond_chain(2, &sample()).is_err());
    }

    #[test]
    fn recursions_match_linear_solve() {
        for n in [3, 4, 6] {
            let r = sample();
            let exact = llp_exact(n, &r).unwrap();
            let solved = ctmc_stationary(&build_reduced_state_cond_chain(n, &r).unwrap()).unwrap();
            for (a, b) in exact.stationary.iter().zip(&solved.stationary) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
            assert!(exact.residual < 1e-12);
        }
    }

    #[test]
    fn leading_order_example() {
        let v = llp_leading_order(3, &sample());
        let expected = 1.0 - 0.01 - 0.06 - 0.01 - 3.0 * 3f64.ln() * 0.02;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.854).abs() < 1e-3);
    }

    #[test]
    fn optimal_rate_values() {
        let r = optimal_rates_state_cond(3, 1e6, 1.0).unwrap();
        let up = r.effective_up();
        assert!((up - 100.0 / (3f64.powf(2.0 / 3.0) * 3f64.ln().cbrt())).abs() < 1e-9);
        assert!((up - 46.6).abs() < 0.05);
        assert!(up < r.kappa_d && r.kappa_d < r.kappa_r);
        assert!((r.kappa_x + r.kappa_z - r.kappa_p).abs() < 1e-15);
    }

    #[test]
    fn sync_correction_limits() {
        let r = RateSet { kappa_st: f64::INFINITY, ..sample() };
        let s = imperfect_sync_correction(3, &r, 1.0);
        assert!((s.estimate - llp_leading_order(3, &r)).abs() < 1e-15);
        assert!((s.kappa_hat_u - r.effective_up()).abs() < 1e-18);
        let finite = imperfect_sync_correction(3, &RateSet { kappa_st: 1.0, ..sample() }, 1.0);
        assert!(finite.kappa_hat_u <= sample().effective_up());
        let extra = 2.0 * (1e-2 + 1e-2) / 1.0;
        assert!((llp_leading_order(3, &sample()) - finite.estimate - extra).abs() < 1e-14);
    }
}
