use faer::{Mat, MatRef};

use super::density::{ghz_fidelity, DensityOperator};
use crate::catalog::ReservoirSpec;
use crate::error::{Error, Result};
use crate::tensor::{LabeledCollapseOp, LindbladianHandle, SubsystemLayout, C64};

/// Largest accepted `dt * max_rate` for the RK4 integrator.
pub const MAX_STEP_RATE_PRODUCT: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    /// Fidelity at steps `0..=steps`.
    pub fidelities: Vec<f64>,
    /// Real part of the trace at steps `0..=steps`.
    pub traces: Vec<f64>,
    pub final_state: Mat<C64>,
}

/// Classical RK4 on `d rho/dt = L(rho)`.
pub fn time_evolve(
    spec: &ReservoirSpec,
    errors: &[LabeledCollapseOp],
    rho0: MatRef<'_, C64>,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    let handle = spec.lindbladian(errors)?;
    time_evolve_handle(&handle, &spec.layout, rho0, dt, steps)
}

pub fn time_evolve_handle(
    handle: &LindbladianHandle,
    layout: &SubsystemLayout,
    rho0: MatRef<'_, C64>,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    let product = dt * handle.rate_scale();
    if !(dt > 0.0) || product > MAX_STEP_RATE_PRODUCT {
        return Err(Error::StepSize(product));
    }
    let fid = |m: &Mat<C64>| ghz_fidelity(layout, &DensityOperator::Dense(m.clone()));
    let tr = |m: &Mat<C64>| (0..m.nrows()).map(|i| m[(i, i)].re).sum::<f64>();
    let mut rho = rho0.to_owned();
    let mut fidelities = vec![fid(&rho)];
    let mut traces = vec![tr(&rho)];
    let h = dt;
    let half = dt / 2.0;
    for _ in 0..steps {
        let k1 = handle.apply(rho.as_ref())?;
        let k2 = handle.apply((&rho + &k1 * half).as_ref())?;
        let k3 = handle.apply((&rho + &k2 * half).as_ref())?;
        let k4 = handle.apply((&rho + &k3 * h).as_ref())?;
        let incr = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        rho += incr;
        fidelities.push(fid(&rho));
        traces.push(tr(&rho));
    }
    Ok(Trajectory { dt, fidelities, traces, final_state: rho })
}
