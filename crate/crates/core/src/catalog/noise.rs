use serde::{Deserialize, Serialize};

use super::RateSet;
use crate::error::{Error, Result};
use crate::tensor::{ket_bra, kets, LabeledCollapseOp, LocalOperator, Role, Signal, SubsystemLayout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// `sqrt(kappa_x) sigma_x` and `sqrt(kappa_z) sigma_z` on each data site
    /// (acting on levels 0 and 1).
    QubitFlips,
    /// All six `|a><b|` transfers on each data qutrit at `kappa_p`.
    QutritDepolarizing,
}

/// Perturbation channels on every data site of `layout`. Ancillas are noiseless.
pub fn build_error_channels(layout: &SubsystemLayout, rates: &RateSet, model: ErrorModel) -> Result<Vec<LabeledCollapseOp>> {
    rates.validate()?;
    let mut out = Vec::new();
    let data = (0..layout.n_sites()).filter(|&s| layout.site(s).role == Role::Data);
    for k in data {
        let q = layout.site_dim(k);
        let v = |l| kets::basis(q, l);
        match model {
            ErrorModel::QubitFlips => {
                let x = ket_bra(&[v(0)], &[v(1)]) + ket_bra(&[v(1)], &[v(0)]);
                let z = ket_bra(&[v(0)], &[v(0)]) - ket_bra(&[v(1)], &[v(1)]);
                let ops = [(1, x, rates.kappa_x), (2, z, rates.kappa_z)];
                for (s, m, rate) in ops {
                    if rate > 0.0 {
                        let op = LocalOperator::new(vec![k], m, rate.sqrt());
                        out.push(LabeledCollapseOp::new(format!("E_{},{s}", k + 1), Signal::Error(k), op));
                    }
                }
            }
            ErrorModel::QutritDepolarizing => {
                if q != 3 {
                    return Err(Error::DimensionMismatch { expected: 3, got: q });
                }
                if rates.kappa_p == 0.0 {
                    continue;
                }
                let pairs = [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)];
                for (s, (to, from)) in pairs.into_iter().enumerate() {
                    let op = LocalOperator::new(vec![k], ket_bra(&[v(to)], &[v(from)]), rates.kappa_p.sqrt());
                    out.push(LabeledCollapseOp::new(format!("P_{},{}", k + 1, s + 1), Signal::Error(k), op));
                }
            }
        }
    }
    Ok(out)
}
