//! Collapse-operator sets of every reservoir.
//!
//! Indices are 0-based in code and 1-based in operator names, so `N_2,r`
//! resets data site 1. Data sites come first in the layout, ancilla `j`
//! sits at site `n + j`.

use faer::Mat;

use super::{AncillaPlacement, RateMap, RateName, RateSet, ReservoirSpec, Scheme, SchemeId};
use crate::error::{Error, Result};
use crate::tensor::{ket_bra, kets, kron, LabeledCollapseOp, LocalOperator, Signal, SubsystemLayout, C64};

type Vector = Vec<C64>;

const QUBIT: [&str; 2] = ["0", "1"];
const QUTRIT: [&str; 3] = ["0", "1", "2"];
const GEM: [&str; 3] = ["g", "e", "m"];
const GFEM: [&str; 4] = ["g", "f", "e", "m"];
const GE: [&str; 2] = ["g", "e"];

struct Builder<'a> {
    n: usize,
    layout: SubsystemLayout,
    rates: RateSet,
    map: Option<&'a RateMap>,
    companions: bool,
    ops: Vec<LabeledCollapseOp>,
}

impl<'a> Builder<'a> {
    fn new(n: usize, layout: SubsystemLayout, rates: &RateSet, map: Option<&'a RateMap>, companions: bool) -> Self {
        Builder { n, layout, rates: *rates, map, companions, ops: Vec::new() }
    }

    fn rate(&self, name: RateName, k: usize) -> f64 {
        match self.map {
            Some(m) => m.at(&self.rates, k).get(name),
            None => self.rates.get(name),
        }
    }

    fn anc(&self, j: usize) -> usize {
        self.n + j
    }

    fn dim(&self, site: usize) -> usize {
        self.layout.site_dim(site)
    }

    fn lvl(&self, site: usize, label: &str) -> Vector {
        let l = self.layout.level(site, label).expect("builder uses known labels");
        kets::basis(self.dim(site), l)
    }

    fn plus(&self, site: usize) -> Vector {
        kets::plus(self.dim(site))
    }

    fn minus(&self, site: usize) -> Vector {
        kets::minus(self.dim(site))
    }

    fn push(&mut self, name: String, signal: Signal, sites: Vec<usize>, matrix: Mat<C64>, rate: f64) {
        let op = LocalOperator::new(sites, matrix, rate.sqrt());
        self.ops.push(LabeledCollapseOp::new(name, signal, op));
    }

    /// `|11><10| + |00><01|` on two data sites.
    fn ltv(&self, k: usize) -> Mat<C64> {
        let (a, b) = (self.dim(k), self.dim(k + 1));
        let v = |s, l| kets::basis(if s == 0 { a } else { b }, l);
        ket_bra(&[v(0, 1), v(1, 1)], &[v(0, 1), v(1, 0)]) + ket_bra(&[v(0, 0), v(1, 0)], &[v(0, 0), v(1, 1)])
    }

    /// `|00><00| + |11><11|`, the idle partner of `ltv`.
    fn ltv_idle(&self, k: usize) -> Mat<C64> {
        let (a, b) = (self.dim(k), self.dim(k + 1));
        let v = |s, l| kets::basis(if s == 0 { a } else { b }, l);
        ket_bra(&[v(0, 0), v(1, 0)], &[v(0, 0), v(1, 0)]) + ket_bra(&[v(0, 1), v(1, 1)], &[v(0, 1), v(1, 1)])
    }

    fn add_ltv(&mut self) {
        for k in 0..self.n - 1 {
            let kc = self.rate(RateName::KappaC, k);
            let m = self.ltv(k);
            self.push(format!("L_{}", k + 1), Signal::Ltv(k), vec![k, k + 1], m, kc);
            if self.companions {
                let m = self.ltv_idle(k);
                self.push(format!("L_{},i", k + 1), Signal::Ltv(k), vec![k, k + 1], m, kc);
            }
        }
    }

    /// Conditioned bond correlator `cond (x) L_k` on `(ancilla, k, k+1)`,
    /// plus its idle partner when companions are on.
    fn add_conditioned_ltv(&mut self, name: &str, anc: usize, k: usize, cond: &Mat<C64>) {
        let kc = self.rate(RateName::KappaC, k);
        let m = kron(cond.as_ref(), self.ltv(k).as_ref());
        self.push(format!("{name}_{}", k + 1), Signal::Ltv(k), vec![anc, k, k + 1], m, kc);
        if self.companions {
            let m = kron(cond.as_ref(), self.ltv_idle(k).as_ref());
            self.push(format!("{name}_{},i", k + 1), Signal::Ltv(k), vec![anc, k, k + 1], m, kc);
        }
    }

    /// `|x,+><y,-|` on `(anc..., data)` for the reset of data site `k`; the
    /// `|x,+><y,+|` partner is added when companions are on.
    fn add_conditioned_reset(&mut self, name: &str, sites: Vec<usize>, ket: Vec<Vector>, bra: Vec<Vector>, rate: f64) {
        let data = *sites.last().expect("reset acts on a data site");
        let mut k = ket.clone();
        k.push(self.plus(data));
        let mut b = bra.clone();
        b.push(self.minus(data));
        self.push(name.to_string(), Signal::Reset(data), sites.clone(), ket_bra(&k, &b), rate);
        if self.companions {
            let mut b = bra;
            b.push(self.plus(data));
            self.push(format!("{name},i"), Signal::Reset(data), sites, ket_bra(&k, &b), rate);
        }
    }

    /// Spontaneous cycle `g -> e -> m -> g` (or via `f` for four levels) as one operator.
    fn add_spontaneous(&mut self, j: usize, first_up: &str) {
        let a = self.anc(j);
        let (ku, kd, kt) =
            (self.rate(RateName::KappaU, j), self.rate(RateName::KappaD, j), self.rate(RateName::KappaT, j));
        let m = ket_bra(&[self.lvl(a, first_up)], &[self.lvl(a, "g")]) * ku.sqrt()
            + ket_bra(&[self.lvl(a, "m")], &[self.lvl(a, "e")]) * kd.sqrt()
            + ket_bra(&[self.lvl(a, "g")], &[self.lvl(a, "m")]) * kt.sqrt();
        self.push(format!("M_{},sp", j + 1), Signal::Clock, vec![a], m, 1.0);
    }

    /// Sum of `|x y><u v|` terms on two ancillas, given as label quadruples.
    fn pair_terms(&self, a: usize, b: usize, terms: &[(&str, &str, &str, &str)]) -> Mat<C64> {
        let mut acc = Mat::<C64>::zeros(self.dim(a) * self.dim(b), self.dim(a) * self.dim(b));
        for &(x, y, u, v) in terms {
            acc += ket_bra(&[self.lvl(a, x), self.lvl(b, y)], &[self.lvl(a, u), self.lvl(b, v)]);
        }
        acc
    }

    /// Three-level clock on ancillas `0..m`: spontaneous cycle plus
    /// stimulated pulls from either neighbor, boundary members dropping one.
    fn add_three_level_clock(&mut self, m: usize) {
        for j in 0..m {
            self.add_spontaneous(j, "e");
        }
        for j in 0..m.saturating_sub(1) {
            let (a, b) = (self.anc(j), self.anc(j + 1));
            let kst = self.rate(RateName::KappaSt, j);
            let plus = self.pair_terms(a, b, &[("e", "e", "g", "e"), ("m", "m", "e", "m"), ("g", "g", "m", "g")]);
            self.push(format!("M_{},st+", j + 1), Signal::Clock, vec![a, b], plus, kst);
        }
        for j in 1..m {
            let (a, b) = (self.anc(j - 1), self.anc(j));
            let kst = self.rate(RateName::KappaSt, j);
            let minus = self.pair_terms(a, b, &[("e", "e", "e", "g"), ("m", "m", "m", "e"), ("g", "g", "g", "m")]);
            self.push(format!("M_{},st-", j + 1), Signal::Clock, vec![a, b], minus, kst);
        }
    }

    fn finish(self, kind: Scheme, placement: AncillaPlacement, companions: bool, warnings: Vec<String>) -> ReservoirSpec {
        ReservoirSpec {
            layout: self.layout,
            collapse_ops: self.ops,
            scheme: SchemeId { kind, analysis_companions: companions },
            rates: self.rates,
            placement,
            warnings,
            nonlocal: placement == AncillaPlacement::Register,
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::UnsupportedSize { n, reason: "need at least 2 data sites".into() });
    }
    Ok(())
}

fn check_rates(rates: &RateSet, map: Option<&RateMap>, names: &[RateName]) -> Result<()> {
    rates.require_positive(names)?;
    if let Some(m) = map {
        for r in m.overrides.values() {
            r.require_positive(names)?;
        }
    }
    Ok(())
}

/// Builds any scheme, with optional per-index rate overrides.
pub fn build_scheme(id: SchemeId, n: usize, rates: &RateSet, map: Option<&RateMap>) -> Result<ReservoirSpec> {
    check_n(n)?;
    let c = id.analysis_companions;
    match id.kind {
        Scheme::LtvOnly => ltv(n, rates, map, c),
        Scheme::IdealClock => ideal_clock(n, rates, map, c),
        Scheme::StateCond => state_cond(n, rates, map, c),
        Scheme::StateCondTripartite => state_cond_tripartite(n, rates, map, c),
        Scheme::JumpCondPrelim => jump_cond_prelim(n, rates, map, c),
        Scheme::JumpCondBipartite => jump_cond_bipartite(n, rates, map, c),
        Scheme::WaveTriJump => wave_tri_jump(n, rates, map, c),
        Scheme::WaveTriQubitAncilla => wave_tri_qubit_ancilla(n, rates, map, c),
        Scheme::WaveBipartite => wave_bipartite(n, rates, map, c),
        Scheme::QutritWave => qutrit_wave(n, rates, map, c),
    }
}

pub fn build_ltv(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::LtvOnly), n, rates, None)
}

pub fn build_ideal_clock(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::IdealClock), n, rates, None)
}

pub fn build_state_conditioning(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::StateCond), n, rates, None)
}

pub fn build_state_cond_tripartite(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::StateCondTripartite), n, rates, None)
}

pub fn build_jump_cond_prelim(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::JumpCondPrelim), n, rates, None)
}

pub fn build_jump_cond_bipartite(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::JumpCondBipartite), n, rates, None)
}

pub fn build_wave_tri_jump(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::WaveTriJump), n, rates, None)
}

pub fn build_wave_tri_qubit_ancilla(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::WaveTriQubitAncilla), n, rates, None)
}

pub fn build_wave_bipartite(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::WaveBipartite), n, rates, None)
}

pub fn build_qutrit_wave(n: usize, rates: &RateSet) -> Result<ReservoirSpec> {
    build_scheme(SchemeId::plain(Scheme::QutritWave), n, rates, None)
}

fn ltv(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    check_rates(rates, map, &[RateName::KappaC])?;
    let layout = SubsystemLayout::chain(&QUBIT, n, &[], 0)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    b.add_ltv();
    Ok(b.finish(Scheme::LtvOnly, AncillaPlacement::None, c, Vec::new()))
}

/// The synchronized clock is a single two-level register standing for
/// `|gg..g>` and `|ee..e>`; every reset couples to it.
fn ideal_clock(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    check_rates(rates, map, &[RateName::KappaD, RateName::KappaR, RateName::KappaC])?;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GE, 1)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    let reg = b.anc(0);
    let mut warnings = vec!["ideal clock couples one register to every data site (not quasi-local)".to_string()];
    if rates.kappa_u == 0.0 {
        warnings.push("kappa_u = 0: the clock never fires and the steady state is not unique".to_string());
    }
    let (e, g) = (b.lvl(reg, "e"), b.lvl(reg, "g"));
    b.push("M_1".into(), Signal::Clock, vec![reg], ket_bra(std::slice::from_ref(&e), std::slice::from_ref(&g)), rates.kappa_u);
    b.push("M_2".into(), Signal::Clock, vec![reg], ket_bra(&[g], std::slice::from_ref(&e)), rates.kappa_d);
    for k in 0..n {
        let kr = b.rate(RateName::KappaR, k);
        b.add_conditioned_reset(&format!("N_{}", k + 1), vec![reg, k], vec![e.clone()], vec![e.clone()], kr);
    }
    b.add_ltv();
    Ok(b.finish(Scheme::IdealClock, AncillaPlacement::Register, c, warnings))
}

fn state_cond(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaD, KappaT, KappaSt, KappaR, KappaC])?;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GEM, n)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    b.add_three_level_clock(n);
    for k in 0..n {
        let a = b.anc(k);
        let e = b.lvl(a, "e");
        let kr = b.rate(KappaR, k);
        b.add_conditioned_reset(&format!("N_{}", k + 1), vec![a, k], vec![e.clone()], vec![e], kr);
    }
    b.add_ltv();
    Ok(b.finish(Scheme::StateCond, AncillaPlacement::PerData, c, Vec::new()))
}

/// Ancilla `j` sits on bond `(j, j+1)`; bond correlators run only while it is
/// in `g` or `m`, resets only while its neighbors are in `e`.
fn state_cond_tripartite(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaD, KappaT, KappaSt, KappaR, KappaC])?;
    let m = n - 1;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GEM, m)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    b.add_three_level_clock(m);
    for k in 0..n {
        let kr = b.rate(KappaR, k);
        let name = format!("Nt_{}", k + 1);
        if k == 0 || k == n - 1 {
            let a = b.anc(k.min(m - 1));
            let e = b.lvl(a, "e");
            b.add_conditioned_reset(&name, vec![a, k], vec![e.clone()], vec![e], kr);
        } else {
            let (a0, a1) = (b.anc(k - 1), b.anc(k));
            let ee = vec![b.lvl(a0, "e"), b.lvl(a1, "e")];
            b.add_conditioned_reset(&name, vec![a0, a1, k], ee.clone(), ee, kr);
        }
    }
    for k in 0..n - 1 {
        let a = b.anc(k);
        let cond = ket_bra(&[b.lvl(a, "g")], &[b.lvl(a, "g")]) + ket_bra(&[b.lvl(a, "m")], &[b.lvl(a, "m")]);
        b.add_conditioned_ltv("Lt", a, k, &cond);
    }
    Ok(b.finish(Scheme::StateCondTripartite, AncillaPlacement::PerBond, c, Vec::new()))
}

fn jump_cond_prelim(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaD, KappaC])?;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GE, n)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    for k in 0..n {
        let a = b.anc(k);
        let (g, e) = (b.lvl(a, "g"), b.lvl(a, "e"));
        let kd = b.rate(KappaD, k);
        b.push(format!("M_{}", k + 1), Signal::Clock, vec![a], ket_bra(std::slice::from_ref(&g), std::slice::from_ref(&e)), kd);
        let ku = b.rate(KappaU, k);
        let (p, mi) = (b.plus(k), b.minus(k));
        let n1 = ket_bra(&[e.clone(), p.clone()], &[g.clone(), p.clone()]);
        let n2 = ket_bra(&[e, p], &[g, mi]);
        b.push(format!("N_{},1", k + 1), Signal::Reset(k), vec![a, k], n1, ku);
        b.push(format!("N_{},2", k + 1), Signal::Reset(k), vec![a, k], n2, ku);
    }
    b.add_ltv();
    let warnings = vec!["resets are not synchronized across sites; not expected to stabilize GHZ".to_string()];
    Ok(b.finish(Scheme::JumpCondPrelim, AncillaPlacement::PerData, c, warnings))
}

fn jump_cond_bipartite(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaD, KappaT, KappaSt, KappaF, KappaC])?;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GFEM, n)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    for k in 0..n {
        b.add_spontaneous(k, "f");
    }
    for k in 0..n {
        let a = b.anc(k);
        let (e, f) = (b.lvl(a, "e"), b.lvl(a, "f"));
        let kf = b.rate(KappaF, k);
        let (p, mi) = (b.plus(k), b.minus(k));
        b.push(format!("N_{},r", k + 1), Signal::Reset(k), vec![a, k], ket_bra(&[e.clone(), p.clone()], &[f.clone(), mi]), kf);
        b.push(format!("N_{},i", k + 1), Signal::Reset(k), vec![a, k], ket_bra(&[e, p.clone()], &[f, p]), kf);
    }
    for j in 0..n - 1 {
        let (a, bb) = (b.anc(j), b.anc(j + 1));
        let kst = b.rate(KappaSt, j);
        let st1 = b.pair_terms(a, bb, &[("f", "f", "g", "f"), ("m", "m", "e", "m"), ("g", "g", "m", "g")]);
        let st2 = b.pair_terms(a, bb, &[("f", "e", "g", "e")]);
        b.push(format!("M_{},st1+", j + 1), Signal::Clock, vec![a, bb], st1, kst);
        b.push(format!("M_{},st2+", j + 1), Signal::Clock, vec![a, bb], st2, kst);
    }
    for j in 1..n {
        let (a, bb) = (b.anc(j - 1), b.anc(j));
        let kst = b.rate(KappaSt, j);
        let st1 = b.pair_terms(a, bb, &[("f", "f", "f", "g"), ("m", "m", "m", "e"), ("g", "g", "g", "m")]);
        let st2 = b.pair_terms(a, bb, &[("e", "f", "e", "g")]);
        b.push(format!("M_{},st1-", j + 1), Signal::Clock, vec![a, bb], st1, kst);
        b.push(format!("M_{},st2-", j + 1), Signal::Clock, vec![a, bb], st2, kst);
    }
    b.add_ltv();
    Ok(b.finish(Scheme::JumpCondBipartite, AncillaPlacement::PerData, c, Vec::new()))
}

/// Four-level ancilla automaton on bonds: ancilla 1 resets data 1 and 2,
/// ancilla `j > 1` resets data `j + 1` and every ancilla then gates `L_j`.
fn wave_tri_jump(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaSt, KappaC])?;
    let m = n - 1;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GFEM, m)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    let a0 = b.anc(0);
    let ku = b.rate(KappaU, 0);
    let (e, g) = (b.lvl(a0, "e"), b.lvl(a0, "g"));
    let (p0, m0, p1, m1) = (b.plus(0), b.minus(0), b.plus(1), b.minus(1));
    for (tag, s0, s1) in [("r12", &m0, &m1), ("r1", &m0, &p1), ("r2", &p0, &m1), ("i", &p0, &p1)] {
        let mat = ket_bra(&[e.clone(), p0.clone(), p1.clone()], &[g.clone(), s0.clone(), s1.clone()]);
        b.push(format!("N_1,{tag}"), Signal::Reset(0), vec![a0, 0, 1], mat, ku);
    }
    for j in 1..m {
        let a = b.anc(j);
        let d = j + 1;
        let kst = b.rate(KappaSt, j);
        let (e, f, p, mi) = (b.lvl(a, "e"), b.lvl(a, "f"), b.plus(d), b.minus(d));
        b.push(format!("N_{},r", j + 1), Signal::Reset(d), vec![a, d], ket_bra(&[e.clone(), p.clone()], &[f.clone(), mi]), kst);
        b.push(format!("N_{},i", j + 1), Signal::Reset(d), vec![a, d], ket_bra(&[e, p.clone()], &[f, p]), kst);
    }
    for j in 0..m.saturating_sub(1) {
        let (a, bb) = (b.anc(j), b.anc(j + 1));
        let kst = b.rate(KappaSt, j);
        let mat = b.pair_terms(a, bb, &[("g", "f", "m", "g")]);
        b.push(format!("M_{}", j + 1), Signal::Clock, vec![a, bb], mat, kst);
    }
    for j in 0..m {
        let a = b.anc(j);
        let to = if j + 1 < m { "m" } else { "g" };
        let cond = ket_bra(&[b.lvl(a, to)], &[b.lvl(a, "e")]);
        let kc = b.rate(KappaC, j);
        let r = kron(cond.as_ref(), b.ltv(j).as_ref());
        let i = kron(cond.as_ref(), b.ltv_idle(j).as_ref());
        b.push(format!("Lt_{},r", j + 1), Signal::Ltv(j), vec![a, j, j + 1], r, kc);
        b.push(format!("Lt_{},i", j + 1), Signal::Ltv(j), vec![a, j, j + 1], i, kc);
    }
    Ok(b.finish(Scheme::WaveTriJump, AncillaPlacement::PerBond, c, Vec::new()))
}

/// Qubit ancillas on bonds. The last data site is reset by ancilla `n-1`
/// returning to `g`, which closes the wave.
fn wave_tri_qubit_ancilla(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaSt, KappaC])?;
    let m = n - 1;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GE, m)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    let a0 = b.anc(0);
    let (e, g) = (b.lvl(a0, "e"), b.lvl(a0, "g"));
    let ku = b.rate(KappaU, 0);
    let (p, mi) = (b.plus(0), b.minus(0));
    b.push("N_1,r".into(), Signal::Reset(0), vec![a0, 0], ket_bra(&[e.clone(), p.clone()], &[g.clone(), mi]), ku);
    b.push("N_1,i".into(), Signal::Reset(0), vec![a0, 0], ket_bra(&[e.clone(), p.clone()], &[g.clone(), p]), ku);
    for k in 1..n - 1 {
        let (x, y) = (b.anc(k - 1), b.anc(k));
        let kst = b.rate(KappaSt, k);
        let (gx, ex, gy, ey) = (b.lvl(x, "g"), b.lvl(x, "e"), b.lvl(y, "g"), b.lvl(y, "e"));
        let (p, mi) = (b.plus(k), b.minus(k));
        let r = ket_bra(&[gx.clone(), ey.clone(), p.clone()], &[ex.clone(), gy.clone(), mi]);
        let i = ket_bra(&[gx.clone(), ey.clone(), p.clone()], &[ex.clone(), gy, p]);
        let v = ket_bra(&[gx, ey.clone()], &[ex, ey]);
        b.push(format!("N_{},r", k + 1), Signal::Reset(k), vec![x, y, k], r, kst);
        b.push(format!("N_{},i", k + 1), Signal::Reset(k), vec![x, y, k], i, kst);
        b.push(format!("N_{},v", k + 1), Signal::Reset(k), vec![x, y], v, kst);
    }
    let last = n - 1;
    let x = b.anc(m - 1);
    let kst = b.rate(KappaSt, last);
    let (gx, ex, p, mi) = (b.lvl(x, "g"), b.lvl(x, "e"), b.plus(last), b.minus(last));
    b.push(format!("N_{},r", n), Signal::Reset(last), vec![x, last], ket_bra(&[gx.clone(), p.clone()], &[ex.clone(), mi]), kst);
    b.push(format!("N_{},i", n), Signal::Reset(last), vec![x, last], ket_bra(&[gx, p.clone()], &[ex, p]), kst);
    for k in 0..n - 1 {
        let a = b.anc(k);
        let cond = ket_bra(&[b.lvl(a, "g")], &[b.lvl(a, "g")]);
        b.add_conditioned_ltv("Lt", a, k, &cond);
    }
    Ok(b.finish(Scheme::WaveTriQubitAncilla, AncillaPlacement::PerBond, c, Vec::new()))
}

fn wave_bipartite(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaSt, KappaC])?;
    let layout = SubsystemLayout::chain(&QUBIT, n, &GEM, n)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    let mut warnings = Vec::new();
    if !(rates.kappa_st >= 10.0 * rates.kappa_c && rates.kappa_c >= 10.0 * rates.kappa_u) {
        warnings.push("rates violate kappa_st >> kappa_c >> kappa_u (factor 10 each)".to_string());
    }
    let a0 = b.anc(0);
    let mat = ket_bra(&[b.lvl(a0, "e")], &[b.lvl(a0, "g")]);
    let ku = b.rate(KappaU, 0);
    b.push("M_1".into(), Signal::Restart, vec![a0], mat, ku);
    for k in 1..n {
        let (x, y) = (b.anc(k - 1), b.anc(k));
        let kst = b.rate(KappaSt, k);
        for (tag, from) in [("r", "g"), ("i", "m"), ("v", "e")] {
            let mat = b.pair_terms(x, y, &[("g", "e", "m", from)]);
            b.push(format!("M_{},{tag}", k + 1), Signal::Clock, vec![x, y], mat, kst);
        }
    }
    for k in 0..n {
        let a = b.anc(k);
        let kst = b.rate(KappaSt, k);
        let (mm, e, p, mi) = (b.lvl(a, "m"), b.lvl(a, "e"), b.plus(k), b.minus(k));
        b.push(format!("N_{},r", k + 1), Signal::Reset(k), vec![a, k], ket_bra(&[mm.clone(), p.clone()], &[e.clone(), mi]), kst);
        b.push(format!("N_{},i", k + 1), Signal::Reset(k), vec![a, k], ket_bra(&[mm, p.clone()], &[e, p]), kst);
    }
    b.add_ltv();
    Ok(b.finish(Scheme::WaveBipartite, AncillaPlacement::PerData, c, warnings))
}

/// Data qutrits; level `2` carries the wave and switches off the bond
/// correlators touching it.
fn qutrit_wave(n: usize, rates: &RateSet, map: Option<&RateMap>, c: bool) -> Result<ReservoirSpec> {
    use RateName::*;
    check_rates(rates, map, &[KappaU, KappaSt, KappaC])?;
    let layout = SubsystemLayout::chain(&QUTRIT, n, &[], 0)?;
    let mut b = Builder::new(n, layout, rates, map, c);
    let two = |b: &Builder, s| b.lvl(s, "2");
    let ku = b.rate(KappaU, 0);
    b.push("M_0,r".into(), Signal::Restart, vec![0], ket_bra(&[two(&b, 0)], &[b.minus(0)]), ku);
    b.push("M_0,i".into(), Signal::Restart, vec![0], ket_bra(&[two(&b, 0)], &[b.plus(0)]), ku);
    for k in 0..n - 1 {
        let kst = b.rate(KappaSt, k);
        let ket = [b.plus(k), two(&b, k + 1)];
        for (tag, from) in [("r", b.minus(k + 1)), ("i", b.plus(k + 1)), ("v", two(&b, k + 1))] {
            let mat = ket_bra(&ket, &[two(&b, k), from]);
            b.push(format!("N_{},{tag}", k + 1), Signal::Reset(k), vec![k, k + 1], mat, kst);
        }
    }
    let last = n - 1;
    let kst = b.rate(KappaSt, last);
    b.push(format!("N_{n}"), Signal::Reset(last), vec![last], ket_bra(&[b.plus(last)], &[two(&b, last)]), kst);
    b.add_ltv();
    Ok(b.finish(Scheme::QutritWave, AncillaPlacement::None, c, Vec::new()))
}
