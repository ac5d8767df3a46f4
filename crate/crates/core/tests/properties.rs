use faer::Mat;
use proptest::prelude::*;

use ghzsim_core::catalog::{build_error_channels, build_scheme, RateSet, Scheme, SchemeId};
use ghzsim_core::markov::*;
use ghzsim_core::tensor::{embed, kron, LocalOperator, Role, Site, SubsystemLayout, C64};

fn layout(dims: &[usize]) -> SubsystemLayout {
    let labels = ["0", "1", "2"];
    SubsystemLayout::new(dims.iter().map(|&d| Site::new(Role::Data, &labels[..d])).collect()).unwrap()
}

fn dense(d: usize, vals: &[(f64, f64)]) -> Mat<C64> {
    Mat::from_fn(d, d, |i, j| {
        let (re, im) = vals[(i * d + j) % vals.len()];
        C64::new(re, im)
    })
}

fn kron_oracle(dims: &[usize], first: usize, local: &Mat<C64>) -> Mat<C64> {
    let width = if local.nrows() == dims[first] { 1 } else { 2 };
    let mut acc = Mat::<C64>::identity(1, 1);
    let mut s = 0;
    while s < dims.len() {
        let factor = if s == first {
            s += width;
            local.clone()
        } else {
            s += 1;
            Mat::<C64>::identity(dims[s - 1], dims[s - 1])
        };
        acc = kron(acc.as_ref(), factor.as_ref());
    }
    acc
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn rates_strategy() -> impl Strategy<Value = RateSet> {
    (0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0, 0.0f64..1.0).prop_map(
        |(ku, kd, kt, kst, kr, kc, kp)| RateSet {
            kappa_u: ku,
            kappa_d: kd,
            kappa_t: kt,
            kappa_st: kst,
            kappa_r: kr,
            kappa_c: kc,
            kappa_f: kd,
            kappa_p: kp,
            ..Default::default()
        },
    )
}

fn check_generator(m: &CtmcModel) {
    assert!(m.column_sum_error() <= 1e-12 * m.max_rate().max(1.0));
    for (_, _, r) in m.edges() {
        assert!(r >= 0.0);
    }
}

fn check_distribution(r: &ChainReport) {
    assert!(r.stationary.iter().all(|&p| p >= -1e-12));
    assert!((r.stationary.iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn embedding_matches_kronecker(
        dims in prop::collection::vec(2usize..=3, 2..=4).prop_filter("dim <= 64", |d| d.iter().product::<usize>() <= 64),
        pick in 0usize..8,
        pair in any::<bool>(),
        vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 81),
    ) {
        let n = dims.len();
        let pair = pair && n > 1;
        let first = pick % if pair { n - 1 } else { n };
        let sites: Vec<usize> = if pair { vec![first, first + 1] } else { vec![first] };
        let local_dim: usize = sites.iter().map(|&s| dims[s]).product();
        let m = dense(local_dim, &vals);
        let got = embed(&LocalOperator::new(sites, m.clone(), 1.0), &layout(&dims)).unwrap().to_dense();
        let want = kron_oracle(&dims, first, &m);
        prop_assert!((got - want).norm_max() < 1e-14);
    }

    #[test]
    fn embedding_is_multiplicative(
        vals_a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
        vals_b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
        site in 0usize..3,
    ) {
        let l = layout(&[3, 2, 3]);
        let d = l.site_dim(site);
        let (a, b) = (dense(d, &vals_a), dense(d, &vals_b));
        let ab = &a * &b;
        let e = |m: Mat<C64>| embed(&LocalOperator::new(vec![site], m, 1.0), &l).unwrap().to_dense();
        let lhs = e(ab);
        let rhs = e(a) * e(b);
        prop_assert!((lhs - rhs).norm_max() < 1e-13);
    }

    #[test]
    fn clock_generators_conserve_probability(rates in rates_strategy(), n in 1usize..=4, four in any::<bool>()) {
        let variant = if four { ClockVariant::FourLevelJumpCond } else { ClockVariant::ThreeLevel };
        let m = build_ancilla_clock_ctmc(n, &rates, variant).unwrap();
        check_generator(&m);
        prop_assert!(m.irreducible);
        let r = ctmc_stationary(&m).unwrap();
        check_distribution(&r);
        prop_assert!(r.residual <= 1e-10 * m.max_rate().max(1.0));
    }

    #[test]
    fn principal_populations_sum_to_one(rates in rates_strategy()) {
        let p = principal_populations_formula(&rates);
        prop_assert!((p.g + p.e + p.m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frontiers_never_increase(n in 2usize..=6, seed in any::<u64>()) {
        let r = verify_frontier_convergence(n, 20, seed).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn recursions_match_reduced_chain(rates in rates_strategy(), n in 3usize..=6) {
        let chain = build_reduced_state_cond_chain(n, &rates).unwrap();
        check_generator(&chain);
        let solved = ctmc_stationary(&chain).unwrap();
        check_distribution(&solved);
        let exact = llp_exact(n, &rates).unwrap();
        for (a, b) in exact.stationary.iter().zip(&solved.stationary) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
    }

    #[test]
    fn sequential_chain_matches_product(rates in rates_strategy(), n in 2usize..=6) {
        let (m, closed) = build_qutrit_sequential_chain(n, &rates).unwrap();
        check_generator(&m);
        let r = ctmc_stationary(&m).unwrap();
        prop_assert!((r.population("GHZ").unwrap() - closed).abs() < 1e-10);
    }

    #[test]
    fn wave_chains_conserve_probability(rates in rates_strategy(), n in 2usize..=5) {
        for m in [build_qutrit_wave_chain_full(n, &rates).unwrap(), build_qutrit_aggregate_chain(n, &rates).unwrap()] {
            check_generator(&m);
            check_distribution(&ctmc_stationary(&m).unwrap());
        }
    }

    #[test]
    fn effective_up_is_harmonic(ku in 0.01f64..100.0, kt in 0.01f64..100.0) {
        let r = RateSet { kappa_u: ku, kappa_t: kt, ..Default::default() };
        let h = ku * kt / (ku + kt);
        prop_assert!((effective_up_rate(&r) - h).abs() <= 1e-14 * h);
        let synced = RateSet { kappa_st: 10.0, ..r };
        prop_assert!(imperfect_sync_correction(3, &synced, 1.0).kappa_hat_u <= effective_up_rate(&r));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn lindbladian_preserves_trace_and_hermiticity(
        scheme_idx in 0usize..Scheme::ALL.len(),
        vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
        rates in rates_strategy(),
    ) {
        let scheme = Scheme::ALL[scheme_idx];
        let rates = rates.with_equal_flips();
        let spec = build_scheme(SchemeId::plain(scheme), 2, &rates, None).unwrap();
        let errors = build_error_channels(&spec.layout, &rates, scheme.default_error_model()).unwrap();
        let h = spec.lindbladian(&errors).unwrap();
        let d = spec.layout.dim();
        let x = dense(d, &vals);
        let rho = &x + x.adjoint();
        let out = h.apply(rho.as_ref()).unwrap();
        let scale = out.norm_l2().max(1.0);
        let herm = (&out - out.adjoint()).norm_l2();
        let tr: C64 = (0..d).map(|i| out[(i, i)]).sum();
        prop_assert!(herm <= 1e-12 * scale, "{}: {}", scheme, herm);
        prop_assert!(tr.norm() <= 1e-12 * scale, "{}: {}", scheme, tr.norm());
    }
}
