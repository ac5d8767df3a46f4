//! Chains of the qutrit wave scheme and the lattice crossing rate.

use num_rational::Ratio;

use super::ctmc::{CtmcBuilder, CtmcModel};
use crate::catalog::RateSet;
use crate::error::{Error, Result};

/// Largest chain length for the exact lattice arithmetic.
pub const LATTICE_MAX_N: usize = 32;

fn need(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::UnsupportedSize { n, reason: format!("{what} needs n >= {min}") });
    }
    Ok(())
}

/// Label of an aggregated configuration: `l` for the qubit sublevels, `2`
/// for the third level, site 0 first.
pub fn aggregate_label(mask: usize, n: usize) -> String {
    (0..n).map(|k| if mask >> (n - 1 - k) & 1 == 1 { '2' } else { 'l' }).collect()
}

/// Chain on `{l, 2}^n`: site 0 is raised at `kappa_u`, the last site
/// relaxes at `kappa_st`, and a raised site hands its excitation to the
/// next site at `kappa_st`. The hand-over also fires when the next site is
/// already raised, which then stays raised.
pub fn build_qutrit_aggregate_chain(n: usize, rates: &RateSet) -> Result<CtmcModel> {
    need(n, 1, "the aggregate chain")?;
    if n > 20 {
        return Err(Error::StateCap { states: 1 << n.min(63) });
    }
    let bit = |k: usize| 1usize << (n - 1 - k);
    let count = 1usize << n;
    let mut b = CtmcBuilder::new((0..count).map(|m| aggregate_label(m, n)).collect())?;
    for m in 0..count {
        if m & bit(0) == 0 {
            b.add(m, m | bit(0), rates.kappa_u)?;
        }
        if m & bit(n - 1) != 0 {
            b.add(m, m & !bit(n - 1), rates.kappa_st)?;
        }
        for k in 1..n {
            if m & bit(k - 1) != 0 {
                b.add(m, (m & !bit(k - 1)) | bit(k), rates.kappa_st)?;
            }
        }
    }
    b.build()
}

/// Chain of one wave at a time: `U`, resets `R1..Rn`, correlator steps
/// `G1..G(n-1)` (the last one labeled `GHZ`), and `E`. Returns the model
/// with the product formula for the GHZ population. Without errors `E` is
/// unreachable and left out.
pub fn build_qutrit_sequential_chain(n: usize, rates: &RateSet) -> Result<(CtmcModel, f64)> {
    need(n, 2, "the sequential chain")?;
    use crate::catalog::RateName::*;
    rates.require_positive(&[KappaU, KappaSt, KappaC])?;
    let g_label = |k: usize| if k == n - 1 { "GHZ".to_string() } else { format!("G{k}") };
    let mut labels = vec!["U".to_string()];
    labels.extend((1..=n).map(|k| format!("R{k}")));
    labels.extend((1..n).map(g_label));
    let loss = n as f64 * rates.kappa_p;
    if loss > 0.0 {
        labels.push("E".into());
    }
    let mut b = CtmcBuilder::new(labels.clone())?;
    let (ku, kst, kc) = (rates.kappa_u, rates.kappa_st, rates.kappa_c);
    b.add_by_label("U", "R1", kst)?;
    for k in 1..n {
        b.add_by_label(&format!("R{k}"), &format!("R{}", k + 1), kst)?;
    }
    b.add_by_label(&format!("R{n}"), &g_label(1), kc)?;
    for k in 1..n - 1 {
        b.add_by_label(&g_label(k), &g_label(k + 1), kc)?;
    }
    for l in &labels {
        if l != "E" && loss > 0.0 {
            b.add_by_label(l, "E", loss)?;
        }
        if l != "U" {
            b.add_by_label(l, "U", ku)?;
        }
    }
    let closed = (kst / (loss + ku + kst)).powi(n as i32) * (kc / (loss + ku + kc)).powi(n as i32 - 1) * ku / (loss + ku);
    Ok((b.build()?, closed))
}

/// `1 - n eps_p - n eps - (n-1) eps / gamma` with `eps = kappa_u /
/// kappa_st`, `eps_p = kappa_p / kappa_u`, `gamma = kappa_c / kappa_st`.
pub fn sequential_first_order(n: usize, rates: &RateSet) -> f64 {
    let nf = n as f64;
    let eps = rates.kappa_u / rates.kappa_st;
    let eps_p = rates.kappa_p / rates.kappa_u;
    let gamma = rates.kappa_c / rates.kappa_st;
    1.0 - nf * eps_p - nf * eps - (nf - 1.0) * eps / gamma
}

fn binomial(m: u32, r: u32) -> i128 {
    (0..r).fold(1i128, |acc, i| acc * (m - i) as i128 / (i + 1) as i128)
}

fn check_lattice(n: usize) -> Result<()> {
    need(n, 2, "the lattice")?;
    if n > LATTICE_MAX_N {
        return Err(Error::UnsupportedSize { n, reason: format!("exact lattice arithmetic stops at n = {LATTICE_MAX_N}") });
    }
    Ok(())
}

/// `n + 1 + sum_{j=1}^{n-2} C(2j-1, j-1) / 2^{2j-1}`, the expected crossing
/// time of the lattice in units of `1/kappa_st`.
pub fn lattice_denominator(n: usize) -> Result<Ratio<i128>> {
    check_lattice(n)?;
    let mut d = Ratio::from_integer(n as i128 + 1);
    for j in 1..=(n as u32).saturating_sub(2) {
        d += Ratio::new(binomial(2 * j - 1, j - 1), 1i128 << (2 * j - 1));
    }
    Ok(d)
}

/// Rate at which a wave crosses the reset/correlator lattice.
pub fn lattice_crossing_rate(n: usize, kappa_st: f64) -> Result<f64> {
    let d = lattice_denominator(n)?;
    Ok(kappa_st * (*d.denom() as f64) / (*d.numer() as f64))
}

/// Populations of the lattice nodes relative to the entry node, for equal
/// reset and correlator rates. Node `(j, k)` has `k + 1` sites reset and
/// `j` correlators done; `rows[k][j]`, `0 <= j <= k <= n-1`, with the GHZ
/// corner `(n-1, n-1)` left out.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePopulations {
    pub n: usize,
    pub rows: Vec<Vec<Ratio<i128>>>,
}

impl LatticePopulations {
    pub fn get(&self, j: usize, k: usize) -> Ratio<i128> {
        self.rows[k][j]
    }

    /// Flux into the GHZ corner equals the flux into the lattice.
    pub fn flux_balanced(&self) -> bool {
        self.get(self.n - 2, self.n - 1) == self.get(0, 0)
    }

    /// Relative mass of the waiting state plus every non-GHZ node.
    pub fn total_with_launch(&self) -> Ratio<i128> {
        self.rows.iter().flatten().fold(Ratio::from_integer(1), |a, &b| a + b)
    }
}

pub fn lattice_populations(n: usize) -> Result<LatticePopulations> {
    check_lattice(n)?;
    let mut rows: Vec<Vec<Ratio<i128>>> = Vec::with_capacity(n);
    for k in 0..n - 1 {
        rows.push((0..=k).map(|j| Ratio::new(binomial((j + k) as u32, j as u32), 1i128 << (j + k))).collect());
    }
    // last row: every site reset, only correlator steps remain
    let mut last = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let from_left = if j == 0 { Ratio::from_integer(0) } else { last[j - 1] };
        last.push(from_left + rows[n - 2][j]);
    }
    rows.push(last);
    Ok(LatticePopulations { n, rows })
}

/// `1 / ((1 + n eps_p)(1 + eps_w + n eps_p eps_w))` with `eps_w = kappa_u /
/// kappa_cross` and `eps_p = kappa_p / kappa_u`.
pub fn ghz_estimate_method2(n: usize, rates: &RateSet) -> Result<f64> {
    let cross = lattice_crossing_rate(n, rates.kappa_st)?;
    let nf = n as f64;
    let eps_p = rates.kappa_p / rates.kappa_u;
    let eps_w = rates.kappa_u / cross;
    Ok(1.0 / ((1.0 + nf * eps_p) * (1.0 + eps_w + nf * eps_p * eps_w)))
}

pub fn wave_node_label(reset: usize, correlated: usize) -> String {
    format!("{reset}+,{correlated}L")
}

/// Label of the GHZ corner of the full wave chain.
pub fn wave_ghz_label(n: usize) -> String {
    wave_node_label(n, n - 1)
}

/// Full wave chain: `U`, nodes `(r, c)` with `1 <= r <= n` sites reset and
/// `c < r` correlators done, and `E` when errors are present.
pub fn build_qutrit_wave_chain_full(n: usize, rates: &RateSet) -> Result<CtmcModel> {
    need(n, 2, "the wave chain")?;
    use crate::catalog::RateName::*;
    rates.require_positive(&[KappaU, KappaSt, KappaC])?;
    let mut labels = vec!["U".to_string()];
    for r in 1..=n {
        labels.extend((0..r).map(|c| wave_node_label(r, c)));
    }
    let loss = n as f64 * rates.kappa_p;
    if loss > 0.0 {
        labels.push("E".into());
    }
    let mut b = CtmcBuilder::new(labels.clone())?;
    b.add_by_label("U", &wave_node_label(1, 0), rates.kappa_st)?;
    for r in 1..=n {
        for c in 0..r {
            let here = wave_node_label(r, c);
            if r < n {
                b.add_by_label(&here, &wave_node_label(r + 1, c), rates.kappa_st)?;
            }
            if c + 1 < r {
                b.add_by_label(&here, &wave_node_label(r, c + 1), rates.kappa_c)?;
            }
        }
    }
    for l in &labels {
        if l != "E" && loss > 0.0 {
            b.add_by_label(l, "E", loss)?;
        }
        if l != "U" {
            b.add_by_label(l, "U", rates.kappa_u)?;
        }
    }
    b.build()
}
