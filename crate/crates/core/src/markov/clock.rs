//! Classical chain of the correlated ancilla clock and its frontier
//! dynamics.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ctmc::{ChainReport, CtmcBuilder, CtmcModel};
use crate::catalog::RateSet;
use crate::error::{Error, Result};

/// Largest accepted configuration count (`3^12`).
pub const CLOCK_STATE_CAP: usize = 531_441;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockVariant {
    /// Levels `g, e, m`.
    ThreeLevel,
    /// Levels `g, f, e, m` of the jump-conditioning ancillas.
    FourLevelJumpCond,
}

impl ClockVariant {
    pub fn alphabet(self) -> &'static [char] {
        match self {
            ClockVariant::ThreeLevel => &['g', 'e', 'm'],
            ClockVariant::FourLevelJumpCond => &['g', 'f', 'e', 'm'],
        }
    }

    fn symbol(self, c: char) -> Option<u8> {
        self.alphabet().iter().position(|&a| a == c).map(|i| i as u8)
    }

    fn level(self, i: u8) -> char {
        self.alphabet()[i as usize]
    }
}

/// One configuration of the ancilla register, site 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AncillaConfig {
    pub variant: ClockVariant,
    levels: Vec<u8>,
}

impl AncillaConfig {
    pub fn parse(variant: ClockVariant, word: &str) -> Result<Self> {
        let levels = word
            .chars()
            .map(|c| variant.symbol(c).ok_or_else(|| Error::Unsupported(format!("level {c:?} not in {:?}", variant.alphabet()))))
            .collect::<Result<Vec<_>>>()?;
        Ok(AncillaConfig { variant, levels })
    }

    fn from_index(variant: ClockVariant, n: usize, mut index: usize) -> Self {
        let d = variant.alphabet().len();
        let mut levels = vec![0u8; n];
        for slot in levels.iter_mut().rev() {
            *slot = (index % d) as u8;
            index /= d;
        }
        AncillaConfig { variant, levels }
    }

    fn index(&self) -> usize {
        let d = self.variant.alphabet().len();
        self.levels.iter().fold(0, |acc, &l| acc * d + l as usize)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn word(&self) -> String {
        self.levels.iter().map(|&l| self.variant.level(l)).collect()
    }

    pub fn char_at(&self, site: usize) -> char {
        self.variant.level(self.levels[site])
    }
}

/// Number of adjacent unequal pairs. For the four-level variant a pair of
/// `f` and `e` is not counted.
pub fn frontier_count(config: &AncillaConfig) -> usize {
    config
        .levels
        .windows(2)
        .filter(|w| {
            let (a, b) = (config.variant.level(w[0]), config.variant.level(w[1]));
            a != b && !(config.variant == ClockVariant::FourLevelJumpCond && matches!((a, b), ('f', 'e') | ('e', 'f')))
        })
        .count()
}

fn neighbors(n: usize, j: usize) -> impl Iterator<Item = usize> {
    [j.checked_sub(1), (j + 1 < n).then_some(j + 1)].into_iter().flatten()
}

/// Moves out of `config`: `(site, new level, rate)`, spontaneous and
/// stimulated channels listed separately.
fn moves(config: &AncillaConfig, rates: &RateSet, spontaneous: bool) -> Vec<(usize, u8, f64)> {
    let n = config.len();
    let mut out = Vec::new();
    for j in 0..n {
        let here = config.char_at(j);
        let (target, sp_rate, attractors): (char, f64, &[char]) = match (config.variant, here) {
            (ClockVariant::ThreeLevel, 'g') => ('e', rates.kappa_u, &['e']),
            (ClockVariant::ThreeLevel, 'e') => ('m', rates.kappa_d, &['m']),
            (ClockVariant::ThreeLevel, _) => ('g', rates.kappa_t, &['g']),
            (ClockVariant::FourLevelJumpCond, 'g') => ('f', rates.kappa_u, &['f', 'e']),
            (ClockVariant::FourLevelJumpCond, 'f') => ('e', rates.kappa_f, &[]),
            (ClockVariant::FourLevelJumpCond, 'e') => ('m', rates.kappa_d, &['m']),
            (ClockVariant::FourLevelJumpCond, _) => ('g', rates.kappa_t, &['g']),
        };
        let t = config.variant.symbol(target).expect("target in alphabet");
        if spontaneous {
            out.push((j, t, sp_rate));
        }
        for k in neighbors(n, j) {
            if attractors.contains(&config.char_at(k)) {
                out.push((j, t, rates.kappa_st));
            }
        }
    }
    out
}

fn state_count(n: usize, variant: ClockVariant) -> Option<usize> {
    variant.alphabet().len().checked_pow(n as u32)
}

/// Exact generator over every configuration of `n` clock ancillas.
pub fn build_ancilla_clock_ctmc(n: usize, rates: &RateSet, variant: ClockVariant) -> Result<CtmcModel> {
    rates.validate()?;
    if n == 0 {
        return Err(Error::UnsupportedSize { n, reason: "at least one ancilla".into() });
    }
    let count = state_count(n, variant).filter(|&c| c <= CLOCK_STATE_CAP).ok_or(Error::StateCap {
        states: state_count(n, variant).unwrap_or(usize::MAX),
    })?;
    let configs: Vec<AncillaConfig> = (0..count).map(|i| AncillaConfig::from_index(variant, n, i)).collect();
    let mut b = CtmcBuilder::new(configs.iter().map(AncillaConfig::word).collect())?;
    for (i, c) in configs.iter().enumerate() {
        for (site, level, rate) in moves(c, rates, true) {
            let mut next = c.clone();
            next.levels[site] = level;
            b.add(i, next.index(), rate)?;
        }
    }
    b.build()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalPopulations {
    pub g: f64,
    pub e: f64,
    pub m: f64,
}

/// Populations of the three synchronized configurations when neighbor
/// stimulation is infinitely fast: each is proportional to the dwell time
/// of its level.
pub fn principal_populations_formula(rates: &RateSet) -> PrincipalPopulations {
    let (wg, we, wm) = (1.0 / rates.kappa_u, 1.0 / rates.kappa_d, 1.0 / rates.kappa_t);
    let total = wg + we + wm;
    PrincipalPopulations { g: wg / total, e: we / total, m: wm / total }
}

/// Populations of `gg..g`, `ee..e`, `mm..m` read off a clock chain report,
/// with the remaining mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClockAggregates {
    pub principal: PrincipalPopulations,
    pub off_principal: f64,
}

pub fn clock_aggregates(report: &ChainReport, n: usize) -> ClockAggregates {
    let pick = |c: char| report.population(&c.to_string().repeat(n)).unwrap_or(0.0);
    let principal = PrincipalPopulations { g: pick('g'), e: pick('e'), m: pick('m') };
    ClockAggregates { principal, off_principal: 1.0 - principal.g - principal.e - principal.m }
}

/// `(max(kappa_t, kappa_u) / kappa_d, kappa_d / kappa_st)`.
pub fn clock_epsilons(rates: &RateSet) -> (f64, f64) {
    (rates.kappa_t.max(rates.kappa_u) / rates.kappa_d, rates.kappa_d / rates.kappa_st)
}

/// Upper bound on the stationary mass outside the synchronized
/// configurations.
pub fn off_principal_bound(n: usize, eps1: f64, eps2: f64) -> f64 {
    let n = n as f64;
    0.75 * (n - 1.0) * (1.5 * n + 1.0) * eps1 * eps2
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierReport {
    pub n: usize,
    pub trials: usize,
    pub absorbed: usize,
    /// Trials in which a jump increased the frontier count.
    pub increases: usize,
    pub max_steps: usize,
    pub step_cap: usize,
}

impl FrontierReport {
    pub fn passed(&self) -> bool {
        self.absorbed == self.trials && self.increases == 0
    }
}

/// Follows one stimulated-only jump trajectory of the three-level clock.
/// All stimulated channels share one rate, so the next jump is uniform over
/// the enabled channels. Returns `(steps, absorbed, increased)`.
pub fn run_frontier_trajectory(start: &AncillaConfig, step_cap: usize, rng: &mut impl Rng) -> (usize, bool, bool) {
    let unit = RateSet { kappa_st: 1.0, ..Default::default() };
    let mut config = start.clone();
    let mut frontiers = frontier_count(&config);
    let mut increased = false;
    let mut steps = 0;
    while frontiers > 0 && steps < step_cap {
        let options = moves(&config, &unit, false);
        let Some(&(site, level, _)) = options.choose(rng) else { break };
        config.levels[site] = level;
        let next = frontier_count(&config);
        increased |= next > frontiers;
        frontiers = next;
        steps += 1;
    }
    (steps, frontiers == 0, increased)
}

/// Stimulated-only trajectories of the three-level clock from uniformly
/// random starts.
pub fn verify_frontier_convergence(n: usize, trials: usize, seed: u64) -> Result<FrontierReport> {
    let count = state_count(n, ClockVariant::ThreeLevel).filter(|&c| c <= CLOCK_STATE_CAP && n > 0);
    let Some(count) = count else {
        return Err(Error::UnsupportedSize { n, reason: "between 1 and 12 ancillas".into() });
    };
    let step_cap = 10 * n * count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FrontierReport { n, trials, absorbed: 0, increases: 0, max_steps: 0, step_cap };
    for _ in 0..trials {
        let start = AncillaConfig::from_index(ClockVariant::ThreeLevel, n, rng.random_range(0..count));
        let (steps, absorbed, increased) = run_frontier_trajectory(&start, step_cap, &mut rng);
        report.absorbed += absorbed as usize;
        report.increases += increased as usize;
        report.max_steps = report.max_steps.max(steps);
    }
    Ok(report)
}
