use super::*;
use crate::tensor::{embed, kets, kron};
use faer::Mat;

fn rates() -> RateSet {
    RateSet {
        kappa_u: 1.0,
        kappa_d: 10.0,
        kappa_t: 1.0,
        kappa_st: 1000.0,
        kappa_r: 1000.0,
        kappa_c: 30.0,
        kappa_f: 500.0,
        kappa_x: 0.01,
        kappa_z: 0.01,
        kappa_p: 0.02,
    }
}

fn x_pair() -> Mat<C64> {
    let x = Mat::from_fn(2, 2, |i, j| C64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
    kron(x.as_ref(), x.as_ref())
}

#[test]
fn ltv_counts_and_rank() {
    assert_eq!(build_ltv(4, &rates()).unwrap().op_count(), 3);
    let two = build_ltv(2, &rates()).unwrap();
    assert_eq!(two.op_count(), 1);
    let m = &two.collapse_ops[0].op.matrix;
    let sv = m.singular_values().unwrap();
    assert_eq!(sv.iter().filter(|s| **s > 1e-12).count(), 2);
    assert!(build_ltv(1, &rates()).is_err());
}

#[test]
fn ltv_annihilates_ghz() {
    let spec = build_ltv(3, &rates()).unwrap();
    let mut ghz = Mat::<C64>::zeros(8, 1);
    ghz[(0, 0)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ghz[(7, 0)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for o in &spec.collapse_ops {
        let e = embed(&o.op, &spec.layout).unwrap();
        let out = e.matrix.as_ref() * ghz.as_ref();
        assert!(out.norm_max() < 1e-15, "{}", o.name);
    }
}

#[test]
fn ideal_clock_count_and_warning() {
    let spec = build_ideal_clock(3, &rates()).unwrap();
    assert_eq!(spec.op_count(), 2 + 3 + 2);
    assert!(spec.nonlocal);
    let stalled = build_ideal_clock(3, &RateSet { kappa_u: 0.0, ..rates() }).unwrap();
    assert!(stalled.warnings.iter().any(|w| w.contains("kappa_u = 0")));
}

#[test]
fn state_cond_count_and_dimension() {
    let spec = build_state_conditioning(3, &rates()).unwrap();
    assert_eq!(spec.op_count(), 12);
    assert_eq!(spec.layout.dim(), 216);
    assert!(build_state_conditioning(3, &RateSet { kappa_st: 0.0, ..rates() }).is_err());
}

#[test]
fn tripartite_layout_and_switch_off() {
    let n = 3;
    let spec = build_state_cond_tripartite(n, &rates()).unwrap();
    assert_eq!(spec.layout.n_ancilla(), 2);
    // clock on m ancillas: m spontaneous, (m-1) each direction; n resets; n-1 gated correlators
    let m = n - 1;
    assert_eq!(spec.op_count(), m + 2 * (m - 1) + n + (n - 1));
    for k in 0..n - 1 {
        let o = spec.op(&format!("Lt_{}", k + 1)).unwrap();
        let a = spec.layout.level(o.op.sites[0], "e").unwrap();
        let probe = kron(Mat::from_fn(3, 1, |i, _| C64::new(if i == a { 1.0 } else { 0.0 }, 0.0)).as_ref(), Mat::<C64>::identity(4, 4).as_ref());
        assert!((&o.op.matrix * &probe).norm_max() < 1e-15);
    }
}

#[test]
fn jump_cond_counts() {
    assert_eq!(build_jump_cond_prelim(2, &rates()).unwrap().op_count(), 7);
    let n = 3;
    let spec = build_jump_cond_bipartite(n, &rates()).unwrap();
    assert_eq!(spec.layout.site_dim(n), 4);
    assert_eq!(spec.op_count(), n + 2 * n + 2 * (n - 1) + 2 * (n - 1) + (n - 1));
    assert!(build_jump_cond_bipartite(3, &RateSet { kappa_f: 0.0, ..rates() }).is_err());
}

#[test]
fn wave_tri_jump_count_and_parity() {
    let n = 3;
    let spec = build_wave_tri_jump(n, &rates()).unwrap();
    assert_eq!(spec.op_count(), 4 + 2 * (n - 2) + (n - 2) + 2 * (n - 1));
    let xx = x_pair();
    for o in spec.collapse_ops.iter().filter(|o| o.name.starts_with("Lt_")) {
        // data factor of cond (x) D: recover D from the block of the nonzero ancilla element
        let m = &o.op.matrix;
        let (r0, c0) = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .find(|&(r, c)| (0..4).any(|i| (0..4).any(|j| m[(r * 4 + i, c * 4 + j)].norm() > 0.0)))
            .unwrap();
        let d = Mat::from_fn(4, 4, |i, j| m[(r0 * 4 + i, c0 * 4 + j)]);
        assert!((&xx * &d - &d * &xx).norm_max() < 1e-15, "{}", o.name);
    }
}

#[test]
fn wave_tri_qubit_ancilla_gating() {
    let spec = build_wave_tri_qubit_ancilla(3, &rates()).unwrap();
    assert_eq!(spec.layout.site_dim(3), 2);
    let e = Mat::from_fn(2, 1, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
    let probe = kron(e.as_ref(), Mat::<C64>::identity(4, 4).as_ref());
    for o in spec.collapse_ops.iter().filter(|o| o.name.starts_with("Lt_")) {
        assert!((&o.op.matrix * &probe).norm_max() < 1e-15);
    }
}

#[test]
fn wave_bipartite_count_and_warning() {
    let n = 3;
    let spec = build_wave_bipartite(n, &rates()).unwrap();
    assert_eq!(spec.op_count(), 1 + 3 * (n - 1) + 2 * n + (n - 1));
    assert!(spec.warnings.is_empty());
    let bad = build_wave_bipartite(n, &RateSet { kappa_c: 1000.0, ..rates() }).unwrap();
    assert_eq!(bad.warnings.len(), 1);
}

#[test]
fn qutrit_wave_count_and_dimension() {
    assert_eq!(build_qutrit_wave(3, &rates()).unwrap().op_count(), 11);
    assert_eq!(build_qutrit_wave(5, &rates()).unwrap().layout.dim(), 243);
}

#[test]
fn qutrit_wave_keeps_level_two_incoherent() {
    let spec = build_qutrit_wave(2, &rates()).unwrap();
    let basis = spec.classical_blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let full = random_density(9, &mut rng);
    let rho = Mat::from_fn(9, 9, |i, j| if basis.unknown(i, j).is_some() { full[(i, j)] } else { C64::new(0.0, 0.0) });
    let out = spec.lindbladian(&[]).unwrap().apply(rho.as_ref()).unwrap();
    for i in 0..9 {
        for j in 0..9 {
            if basis.unknown(i, j).is_none() {
                assert!(out[(i, j)].norm() < 1e-12);
            }
        }
    }
}

#[test]
fn companions_double_reset_and_correlator_channels() {
    let plain = build_scheme(SchemeId::plain(Scheme::StateCond), 3, &rates(), None).unwrap();
    let full = build_scheme(SchemeId::with_companions(Scheme::StateCond), 3, &rates(), None).unwrap();
    assert_eq!(full.op_count(), plain.op_count() + 3 + 2);
    assert!(plain.companion_completeness().is_empty());
    let groups = full.companion_completeness();
    assert_eq!(groups.len(), 5);
    for (name, kappa, dev) in groups {
        assert!(dev < 1e-12, "{name}: {dev}");
        assert!((kappa - 1000.0).abs() < 1e-9 || (kappa - 30.0).abs() < 1e-12, "{kappa}");
    }
}

#[test]
fn rate_map_overrides_one_site() {
    let mut map = RateMap::default();
    map.overrides.insert(1, RateSet { kappa_c: 7.0, ..rates() });
    let spec = build_scheme(SchemeId::plain(Scheme::LtvOnly), 3, &rates(), Some(&map)).unwrap();
    assert!((spec.collapse_ops[0].op.rate() - 30.0).abs() < 1e-12);
    assert!((spec.collapse_ops[1].op.rate() - 7.0).abs() < 1e-12);
}

#[test]
fn permuting_levels_twice_restores_operators() {
    let spec = build_state_conditioning(2, &rates()).unwrap();
    let once = spec.permute_levels(2, &[2, 0, 1]).unwrap();
    let back = once.permute_levels(2, &[1, 2, 0]).unwrap();
    assert_eq!(back.layout, spec.layout);
    for (a, b) in spec.collapse_ops.iter().zip(&back.collapse_ops) {
        assert_eq!(a.op.matrix, b.op.matrix);
    }
    assert!(spec.permute_levels(2, &[0, 0, 1]).is_err());
}

#[test]
fn plus_is_padded_for_qutrits() {
    let p = kets::plus(3);
    assert_eq!(p[2], C64::new(0.0, 0.0));
}

#[test]
fn tri_jump_nominal_wave_has_3n_minus_4_steps() {
    for n in 3..=4 {
        let spec = build_wave_tri_jump(n, &rates()).unwrap();
        let l = &spec.layout;
        let g = l.level(n, "g").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![C64::new(0.0, 0.0); l.dim()];
        for bits in 0..1usize << n {
            let mut digits: Vec<usize> = (0..n).map(|k| bits >> (n - 1 - k) & 1).collect();
            digits.extend(std::iter::repeat_n(g, n - 1));
            v[l.index_of(&digits)] = C64::new(h.powi(n as i32) * if bits.count_ones() % 2 == 1 { -1.0 } else { 1.0 }, 0.0);
        }
        let mut names = vec!["N_1,r12".to_string()];
        for j in 1..n - 1 {
            names.extend([format!("Lt_{j},r"), format!("M_{j}"), format!("N_{},r", j + 1)]);
        }
        names.push(format!("Lt_{},r", n - 1));
        assert_eq!(names.len(), 3 * n - 4);
        for name in &names {
            let m = embed(&spec.op(name).unwrap().op, l).unwrap().matrix;
            let mut w = vec![C64::new(0.0, 0.0); l.dim()];
            for j in 0..l.dim() {
                for (i, &x) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
                    w[i] += x * v[j];
                }
            }
            let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm > 1e-9, "n={n}: {name} does not fire");
            v = w.into_iter().map(|c| c / norm).collect();
        }
        // ancillas are back in g and the data carry a GHZ state
        let ghz = [vec![0; n], vec![1; n]].map(|mut d| {
            d.extend(std::iter::repeat_n(g, n - 1));
            l.index_of(&d)
        });
        let overlap = (v[ghz[0]] + v[ghz[1]]).norm_sqr() / 2.0;
        assert!((overlap - 1.0).abs() < 1e-12, "n={n}: overlap {overlap}");
    }
}
