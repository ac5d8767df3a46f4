//! Steady states of assembled reservoirs.

mod density;
mod dump;
mod evolve;
mod kernel;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use density::{ghz_fidelity, trace_distance, DensityOperator};
pub use dump::{read_dump, write_dump, DumpHeader};
pub use evolve::{time_evolve, Trajectory, MAX_STEP_RATE_PRODUCT};
pub use kernel::DEGENERACY_GAP;

use crate::catalog::ReservoirSpec;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::tensor::{BlockBasis, LabeledCollapseOp, LindbladianHandle, SubsystemLayout, DEFAULT_SUPEROP_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// SVD of the explicit full superoperator.
    DenseNullSpace,
    /// Shifted inverse iteration with a sparse LU on the full superoperator.
    SparseIterative,
    /// Restrict to the classical sectors, then dense or sparse by size.
    AncillaBlock,
    /// Blocks when the audit passes, then dense or sparse by size.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Residual bound, relative to `max(1, largest rate)`.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Largest dense matrix (entries) the null-space path may build; above it
    /// the sparse path is used.
    pub dimension_cap: usize,
    /// Largest number of unknowns for an explicit sparse superoperator.
    pub superop_cap: usize,
    /// Random seeds besides the maximally mixed state for the sparse path.
    pub extra_seeds: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::Auto,
            residual_tol: 1e-9,
            max_iterations: 50,
            dimension_cap: 4_000_000,
            superop_cap: DEFAULT_SUPEROP_CAP,
            extra_seeds: 2,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::Rates(format!("residual_tol = {} must be > 0", self.residual_tol)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Rates("max_iterations must be > 0".into()));
        }
        Ok(())
    }

    pub fn with_method(mut self, method: SolverMethod) -> Self {
        self.method = method;
        self
    }
}

/// Which linear-algebra path actually ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelPath {
    Dense,
    Sparse,
}

#[derive(Clone, Debug)]
pub struct SolverDiagnostics {
    pub method: SolverMethod,
    pub path: KernelPath,
    pub blocked: bool,
    pub n_blocks: usize,
    pub unknowns: usize,
    pub iterations: usize,
    pub smallest_singular_values: Option<(f64, f64)>,
    pub wall_time: Duration,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub rho: DensityOperator,
    pub ghz_fidelity: f64,
    /// `||L(rho)||_F`.
    pub residual: f64,
    /// Residual bound that was enforced.
    pub residual_bound: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub diagnostics: SolverDiagnostics,
}

impl SteadyStateReport {
    pub fn error(&self) -> f64 {
        1.0 - self.ghz_fidelity
    }
}

/// Unique steady state of the reservoir plus perturbations.
pub fn solve_steady_state(spec: &ReservoirSpec, errors: &[LabeledCollapseOp], config: &SolverConfig) -> Result<SteadyStateReport> {
    let handle = spec.lindbladian(errors)?;
    solve_handle(&handle, &spec.layout, &spec.classical_blocks(), config)
}

/// Steady state restricted to the classical sectors; fails if an operator
/// creates a coherence between sectors.
pub fn solve_block(spec: &ReservoirSpec, errors: &[LabeledCollapseOp], config: &SolverConfig) -> Result<SteadyStateReport> {
    let handle = spec.lindbladian(errors)?;
    let cfg = SolverConfig { method: SolverMethod::AncillaBlock, ..config.clone() };
    solve_handle(&handle, &spec.layout, &spec.classical_blocks(), &cfg)
}

/// Steady state of an assembled generator, with `blocks` the candidate
/// sector structure for the block path.
pub fn solve_handle(
    handle: &LindbladianHandle,
    layout: &SubsystemLayout,
    blocks: &BlockBasis,
    config: &SolverConfig,
) -> Result<SteadyStateReport> {
    config.validate()?;
    let start = Instant::now();
    let mut warnings: Vec<String> = handle.warnings().to_vec();
    let d = handle.dim();
    let trivial = || BlockBasis::trivial(d);
    let (basis, blocked) = match config.method {
        SolverMethod::DenseNullSpace | SolverMethod::SparseIterative => (trivial(), false),
        SolverMethod::AncillaBlock => {
            blocks.audit(handle).into_result()?;
            (blocks.clone(), true)
        }
        SolverMethod::Auto => {
            let audit = blocks.audit(handle);
            if audit.passed() && blocks.n_blocks() > 1 {
                (blocks.clone(), true)
            } else {
                if let Some(v) = audit.violation {
                    warnings.push(format!("block audit failed, solving in full: {v}"));
                }
                (trivial(), false)
            }
        }
    };
    let n = basis.n_unknowns();
    if n > config.superop_cap {
        return Err(Error::TooLarge { size: n, cap: config.superop_cap });
    }
    let path = match config.method {
        SolverMethod::DenseNullSpace => KernelPath::Dense,
        SolverMethod::SparseIterative => KernelPath::Sparse,
        _ if n.saturating_mul(n) <= config.dimension_cap => KernelPath::Dense,
        _ => KernelPath::Sparse,
    };
    if path == KernelPath::Dense && n.saturating_mul(n) > config.dimension_cap {
        return Err(Error::TooLarge { size: n.saturating_mul(n), cap: config.dimension_cap });
    }

    let a = handle.restricted_superoperator(&basis, Execution::default())?;
    let residual_bound = config.residual_tol * handle.rate_scale().max(1.0);
    let sol = match path {
        KernelPath::Dense => kernel::dense_kernel(&a, &basis)?,
        KernelPath::Sparse => kernel::sparse_kernel(&a, &basis, residual_bound, config.max_iterations, config.extra_seeds, config.seed)?,
    };
    let rho = DensityOperator::from_unknowns(&basis, &sol.vector);
    let residual = handle.apply(rho.to_dense().as_ref())?.norm_l2();
    if residual > residual_bound || !residual.is_finite() {
        return Err(Error::NoConvergence { iterations: sol.iterations, best_residual: residual });
    }
    let report = SteadyStateReport {
        ghz_fidelity: ghz_fidelity(layout, &rho),
        residual,
        residual_bound,
        min_eigenvalue: rho.min_eigenvalue()?,
        trace_error: (rho.trace() - crate::tensor::C64::new(1.0, 0.0)).norm(),
        hermiticity_error: rho.hermiticity_error(),
        diagnostics: SolverDiagnostics {
            method: config.method,
            path,
            blocked,
            n_blocks: basis.n_blocks(),
            unknowns: n,
            iterations: sol.iterations,
            smallest_singular_values: sol.smallest_singular_values,
            wall_time: start.elapsed(),
            warnings,
        },
        rho,
    };
    Ok(report)
}
