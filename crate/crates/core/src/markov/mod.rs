//! Classical Markov chains obtained from the reservoirs: the ancilla clock,
//! the reduced output-signal chain of the state-conditioning scheme, the
//! qutrit wave chains and the lattice crossing rate.
//!
//! Generators never store self-loops; see [`state_cond`] for how detections
//! that leave a grouping unchanged are dropped.

mod clock;
mod ctmc;
mod qutrit;
pub mod state_cond;

pub use clock::{
    build_ancilla_clock_ctmc, clock_aggregates, clock_epsilons, frontier_count, off_principal_bound,
    principal_populations_formula, run_frontier_trajectory, verify_frontier_convergence, AncillaConfig, ClockAggregates,
    ClockVariant, FrontierReport, PrincipalPopulations, CLOCK_STATE_CAP,
};
pub use ctmc::{ctmc_stationary, ChainReport, CtmcBuilder, CtmcModel, RateMatrix};
pub use qutrit::{
    aggregate_label, build_qutrit_aggregate_chain, build_qutrit_sequential_chain, build_qutrit_wave_chain_full,
    ghz_estimate_method2, lattice_crossing_rate, lattice_denominator, lattice_populations, sequential_first_order,
    wave_ghz_label, wave_node_label, LatticePopulations, LATTICE_MAX_N,
};
pub use state_cond::{
    build_reduced_state_cond_chain, imperfect_sync_correction, llp_corrections, llp_exact, llp_leading_order,
    optimal_rates_state_cond, state_cond_ghz_markov, state_cond_ghz_population, state_cond_groups,
    state_cond_scaling_error, SyncCorrection,
};

use crate::catalog::RateSet;

/// `(1/kappa_u + 1/kappa_t)^-1`.
pub fn effective_up_rate(rates: &RateSet) -> f64 {
    rates.effective_up()
}
