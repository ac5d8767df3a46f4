//! Reservoir schemes and error models as labeled collapse-operator lists.

mod noise;
mod rates;
mod schemes;

use std::collections::BTreeMap;
use std::fmt;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use noise::{build_error_channels, ErrorModel};
pub use rates::{RateMap, RateName, RateSet};
pub use schemes::{
    build_ideal_clock, build_jump_cond_bipartite, build_jump_cond_prelim, build_ltv, build_qutrit_wave, build_scheme,
    build_state_cond_tripartite, build_state_conditioning, build_wave_bipartite, build_wave_tri_jump,
    build_wave_tri_qubit_ancilla,
};

use crate::error::{Error, Result};
use crate::tensor::{
    assemble_lindbladian, BlockAudit, BlockBasis, LabeledCollapseOp, LindbladianHandle, Role, Signal, SubsystemLayout, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    LtvOnly,
    IdealClock,
    StateCond,
    StateCondTripartite,
    JumpCondPrelim,
    JumpCondBipartite,
    WaveTriJump,
    WaveTriQubitAncilla,
    WaveBipartite,
    QutritWave,
}

impl Scheme {
    pub const ALL: [Scheme; 10] = [
        Scheme::LtvOnly,
        Scheme::IdealClock,
        Scheme::StateCond,
        Scheme::StateCondTripartite,
        Scheme::JumpCondPrelim,
        Scheme::JumpCondBipartite,
        Scheme::WaveTriJump,
        Scheme::WaveTriQubitAncilla,
        Scheme::WaveBipartite,
        Scheme::QutritWave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::LtvOnly => "ltv_only",
            Scheme::IdealClock => "ideal_clock",
            Scheme::StateCond => "state_cond",
            Scheme::StateCondTripartite => "state_cond_tripartite",
            Scheme::JumpCondPrelim => "jump_cond_prelim",
            Scheme::JumpCondBipartite => "jump_cond_bipartite",
            Scheme::WaveTriJump => "wave_tri_jump",
            Scheme::WaveTriQubitAncilla => "wave_tri_qubit_ancilla",
            Scheme::WaveBipartite => "wave_bipartite",
            Scheme::QutritWave => "qutrit_wave",
        }
    }

    /// Data sites are qutrits rather than qubits.
    pub fn qutrit_data(self) -> bool {
        self == Scheme::QutritWave
    }

    /// Error model used for this scheme's data sites by default.
    pub fn default_error_model(self) -> ErrorModel {
        if self.qutrit_data() {
            ErrorModel::QutritDepolarizing
        } else {
            ErrorModel::QubitFlips
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeId {
    pub kind: Scheme,
    /// Add the idle partners of resets and bond correlators so each detection
    /// signal has a rate independent of the state.
    #[serde(default)]
    pub analysis_companions: bool,
}

impl SchemeId {
    pub fn plain(kind: Scheme) -> Self {
        SchemeId { kind, analysis_companions: false }
    }

    pub fn with_companions(kind: Scheme) -> Self {
        SchemeId { kind, analysis_companions: true }
    }
}

/// Where ancillas sit relative to the data chain; fixes the neighbor graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AncillaPlacement {
    None,
    /// Ancilla `j` next to data `j`.
    PerData,
    /// Ancilla `j` between data `j` and `j + 1`.
    PerBond,
    /// One register coupled to everything.
    Register,
}

#[derive(Clone, Debug)]
pub struct ReservoirSpec {
    pub layout: SubsystemLayout,
    pub collapse_ops: Vec<LabeledCollapseOp>,
    pub scheme: SchemeId,
    pub rates: RateSet,
    pub placement: AncillaPlacement,
    pub warnings: Vec<String>,
    /// Deliberately violates quasi-locality.
    pub nonlocal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalityReport {
    pub violations: Vec<String>,
    pub flagged_nonlocal: bool,
}

impl LocalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() || self.flagged_nonlocal
    }
}

impl ReservoirSpec {
    pub fn n_data(&self) -> usize {
        self.layout.n_data()
    }

    pub fn op_count(&self) -> usize {
        self.collapse_ops.len()
    }

    pub fn op(&self, name: &str) -> Option<&LabeledCollapseOp> {
        self.collapse_ops.iter().find(|o| o.name == name)
    }

    /// Generator of the reservoir plus the given perturbations.
    pub fn lindbladian(&self, errors: &[LabeledCollapseOp]) -> Result<LindbladianHandle> {
        let mut all = self.collapse_ops.clone();
        all.extend_from_slice(errors);
        assemble_lindbladian(None, &all, &self.layout)
    }

    /// Block structure with ancillas (and qutrit level `2`) treated as classical.
    pub fn classical_blocks(&self) -> BlockBasis {
        BlockBasis::for_layout(&self.layout)
    }

    /// Checks that no operator creates a coherence between classical sectors.
    pub fn ancilla_coherence_audit(&self, errors: &[LabeledCollapseOp]) -> Result<BlockAudit> {
        let h = self.lindbladian(errors)?;
        Ok(self.classical_blocks().audit(&h))
    }

    pub fn adjacent(&self, s: usize, t: usize) -> bool {
        let n = self.n_data();
        let (lo, hi) = (s.min(t), s.max(t));
        if hi < n {
            return hi == lo + 1;
        }
        if lo >= n {
            return self.placement != AncillaPlacement::Register && hi == lo + 1;
        }
        // lo is data, hi is an ancilla
        let j = hi - n;
        match self.placement {
            AncillaPlacement::None => false,
            AncillaPlacement::PerData => j == lo,
            AncillaPlacement::PerBond => j == lo || j + 1 == lo,
            AncillaPlacement::Register => true,
        }
    }

    /// At most 3 sites per operator, connected in the neighbor graph.
    pub fn quasi_locality_audit(&self) -> LocalityReport {
        let mut violations = Vec::new();
        for o in &self.collapse_ops {
            let sites = &o.op.sites;
            if sites.len() > 3 {
                violations.push(format!("{} acts on {} sites", o.name, sites.len()));
                continue;
            }
            let mut reached = vec![sites[0]];
            let mut grew = true;
            while grew {
                grew = false;
                for &s in sites {
                    if !reached.contains(&s) && reached.iter().any(|&r| self.adjacent(r, s)) {
                        reached.push(s);
                        grew = true;
                    }
                }
            }
            if reached.len() != sites.len() || (self.placement == AncillaPlacement::Register && sites.len() > 1 && self.touches_ancilla(sites)) {
                violations.push(format!("{} couples non-neighboring sites {:?}", o.name, sites));
            }
        }
        LocalityReport { violations, flagged_nonlocal: self.nonlocal }
    }

    fn touches_ancilla(&self, sites: &[usize]) -> bool {
        sites.iter().any(|&s| self.layout.site(s).role == Role::Ancilla)
    }

    /// Largest change of the ancilla-reduced generator output across random
    /// data states: `max |Tr_D L(rho_D (x) sigma_A) - Tr_D L(rho_D' (x) sigma_A)|`
    /// relative to the output scale. Zero when ancillas ignore the data.
    pub fn data_independence_audit(&self, errors: &[LabeledCollapseOp], samples: usize, seed: u64) -> Result<f64> {
        let h = self.lindbladian(errors)?;
        let d_data: usize = (0..self.n_data()).map(|s| self.layout.site_dim(s)).product();
        let d_anc = self.layout.dim() / d_data;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let sigma: Vec<f64> = {
                let w: Vec<f64> = (0..d_anc).map(|_| rng.random::<f64>()).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            };
            let mut reference: Option<Mat<C64>> = None;
            for _ in 0..2 {
                let rho_d = random_density(d_data, &mut rng);
                let full = Mat::from_fn(self.layout.dim(), self.layout.dim(), |x, y| {
                    let (dx, ax) = (x / d_anc, x % d_anc);
                    let (dy, ay) = (y / d_anc, y % d_anc);
                    if ax == ay {
                        rho_d[(dx, dy)] * sigma[ax]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let out = h.apply(full.as_ref())?;
                let reduced = Mat::from_fn(d_anc, d_anc, |a, b| (0..d_data).map(|d| out[(d * d_anc + a, d * d_anc + b)]).sum());
                match &reference {
                    None => reference = Some(reduced),
                    Some(r) => {
                        let scale = h.rate_scale().max(1.0);
                        let diff = (r - &reduced).norm_max() / scale;
                        worst = worst.max(diff);
                    }
                }
            }
        }
        Ok(worst)
    }

    /// For each group of reset or bond-correlator operators sharing a signal
    /// and support, checks that `S = sum L^+ L` is a multiple of a projector,
    /// `S^2 = kappa S`. Returns `(group name, kappa, relative deviation)`.
    pub fn companion_completeness(&self) -> Vec<(String, f64, f64)> {
        let mut groups: BTreeMap<(Signal, Vec<usize>), Vec<&LabeledCollapseOp>> = BTreeMap::new();
        for o in &self.collapse_ops {
            if matches!(o.signal, Signal::Reset(_) | Signal::Ltv(_)) {
                groups.entry((o.signal, o.op.sites.clone())).or_default().push(o);
            }
        }
        let mut out = Vec::new();
        for ((signal, sites), ops) in groups {
            if ops.len() < 2 {
                continue;
            }
            let mut s: Option<Mat<C64>> = None;
            for o in &ops {
                let m = o.op.scaled_matrix();
                let p = m.adjoint() * &m;
                s = Some(match s {
                    None => p,
                    Some(a) => a + p,
                });
            }
            let s = s.expect("non-empty group");
            let s2 = &s * &s;
            let tr = |m: &Mat<C64>| (0..m.nrows()).map(|i| m[(i, i)].re).sum::<f64>();
            let kappa = tr(&s2) / tr(&s);
            let dev = (&s2 - &s * kappa).norm_l2() / (kappa * kappa).max(f64::MIN_POSITIVE);
            out.push((format!("{signal:?} on {sites:?}"), kappa, dev));
        }
        out
    }

    /// Copy with the levels of `site` reordered: new level `i` is old level `perm[i]`.
    /// Every operator is conjugated accordingly, so the physics is unchanged.
    pub fn permute_levels(&self, site: usize, perm: &[usize]) -> Result<Self> {
        let layout = self.layout.with_permuted_levels(site, perm)?;
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..perm.len()).collect::<Vec<_>>() {
            return Err(Error::Layout(format!("{perm:?} is not a permutation")));
        }
        let mut out = self.clone();
        out.layout = layout;
        for o in &mut out.collapse_ops {
            let Some(p) = o.op.sites.iter().position(|&s| s == site) else { continue };
            let dims: Vec<usize> = o.op.sites.iter().map(|&s| self.layout.site_dim(s)).collect();
            let old_index = |new: usize| {
                let mut digits = vec![0; dims.len()];
                let mut rem = new;
                for q in (0..dims.len()).rev() {
                    digits[q] = rem % dims[q];
                    rem /= dims[q];
                }
                digits[p] = perm[digits[p]];
                digits.iter().zip(&dims).fold(0, |acc, (d, n)| acc * n + d)
            };
            let m = &o.op.matrix;
            o.op.matrix = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(old_index(i), old_index(j))]);
        }
        Ok(out)
    }
}

/// Random full-rank density matrix `A A^+ / tr`.
pub(crate) fn random_density(d: usize, rng: &mut impl Rng) -> Mat<C64> {
    let a = Mat::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let rho = &a * a.adjoint();
    let tr: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
    rho * (1.0 / tr)
}

#[cfg(test)]
mod tests;
