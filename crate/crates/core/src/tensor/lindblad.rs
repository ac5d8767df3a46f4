use faer::{Mat, MatRef};

use super::embed::{embed, embed_matrix, LabeledCollapseOp, LocalOperator, Signal};
use super::superop::BlockBasis;
use super::{SparseOp, SubsystemLayout, C64};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Default cap on the number of rows of a materialized superoperator.
pub const DEFAULT_SUPEROP_CAP: usize = 4_000_000;

#[derive(Clone, Debug)]
pub(crate) struct EmbeddedJump {
    pub matrix: SparseOp,
    pub signal: Signal,
    pub name: String,
}

/// Assembled generator `rho -> -i[H, rho] + sum_k (L rho L^+ - {L^+ L, rho}/2)`.
///
/// Stored as the drift `G = -iH - K/2` with `K = sum_k L_k^+ L_k`, so that the
/// generator reads `G rho + rho G^+ + sum_k L_k rho L_k^+`.
#[derive(Clone, Debug)]
pub struct LindbladianHandle {
    dim: usize,
    hamiltonian: Option<SparseOp>,
    jumps: Vec<EmbeddedJump>,
    anticommutator: SparseOp,
    drift: SparseOp,
    warnings: Vec<String>,
}

pub fn assemble_lindbladian(
    hamiltonian: Option<&[LocalOperator]>,
    collapse: &[LabeledCollapseOp],
    layout: &SubsystemLayout,
) -> Result<LindbladianHandle> {
    let d = layout.dim();
    let zero = || SparseOp::try_new_from_triplets(d, d, &[]).expect("empty matrix");

    let mut h_full: Option<SparseOp> = None;
    for h in hamiltonian.unwrap_or(&[]) {
        let e = embed(h, layout)?.matrix;
        h_full = Some(match h_full {
            None => e,
            Some(acc) => &acc + &e,
        });
    }

    let mut jumps = Vec::with_capacity(collapse.len());
    let mut k = zero();
    for c in collapse {
        let e = embed(&c.op, layout)?.matrix;
        // K through the local product: embedding is multiplicative.
        let m = c.op.matrix.as_ref();
        let local = m.adjoint() * m;
        let scaled = Mat::from_fn(local.nrows(), local.ncols(), |i, j| local[(i, j)] * c.op.rate());
        k = &k + &embed_matrix(&c.op.sites, scaled.as_ref(), layout)?;
        jumps.push(EmbeddedJump {
            matrix: e,
            signal: c.signal,
            name: c.name.clone(),
        });
    }

    let mut warnings = Vec::new();
    let h_empty = h_full.as_ref().is_none_or(|h| h.compute_nnz() == 0);
    if collapse.is_empty() && h_empty {
        warnings.push("empty generator: every state is stationary".to_string());
    }

    let half = C64::new(-0.5, 0.0);
    let mut drift = zero();
    drift = &drift + &scale(&k, half);
    if let Some(h) = &h_full {
        drift = &drift + &scale(h, C64::new(0.0, -1.0));
    }

    Ok(LindbladianHandle {
        dim: d,
        hamiltonian: h_full,
        jumps,
        anticommutator: k,
        drift,
        warnings,
    })
}

fn scale(m: &SparseOp, s: C64) -> SparseOp {
    let mut out = m.clone();
    for v in out.val_mut() {
        *v *= s;
    }
    out
}

/// `L(rho)` without materializing the superoperator.
pub fn apply_lindbladian(handle: &LindbladianHandle, rho: MatRef<'_, C64>) -> Result<Mat<C64>> {
    handle.apply(rho)
}

impl LindbladianHandle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_jumps(&self) -> usize {
        self.jumps.len()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn anticommutator(&self) -> &SparseOp {
        &self.anticommutator
    }

    pub fn hamiltonian(&self) -> Option<&SparseOp> {
        self.hamiltonian.as_ref()
    }

    pub fn drift(&self) -> &SparseOp {
        &self.drift
    }

    pub fn jump_matrices(&self) -> impl Iterator<Item = (&SparseOp, Signal, &str)> {
        self.jumps.iter().map(|j| (&j.matrix, j.signal, j.name.as_str()))
    }

    /// Largest rate appearing in the generator, taken as the largest diagonal
    /// entry of `K`. Sets the time scale for integrators and tolerances.
    pub fn rate_scale(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.dim {
            for (i, v) in self.anticommutator.row_idx_of_col(j).zip(self.anticommutator.val_of_col(j)) {
                if i == j {
                    best = best.max(v.re.abs());
                }
            }
        }
        best
    }

    pub fn apply(&self, rho: MatRef<'_, C64>) -> Result<Mat<C64>> {
        self.apply_with(rho, Execution::default())
    }

    pub fn apply_with(&self, rho: MatRef<'_, C64>, exec: Execution) -> Result<Mat<C64>> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rho.nrows() });
        }
        // G rho + rho G^+ = G rho + (G rho^+)^+
        let g_rho = self.drift.as_ref() * rho;
        let g_rho_h = self.drift.as_ref() * rho.adjoint();
        let mut out = g_rho + g_rho_h.adjoint();
        let parts = exec.map(&self.jumps, |j| {
            // L rho L^+ = (L (L rho)^+)^+
            let x = j.matrix.as_ref() * rho;
            let y = j.matrix.as_ref() * x.adjoint();
            y.adjoint().to_owned()
        });
        for p in parts {
            out += p;
        }
        Ok(out)
    }

    /// Explicit sparse superoperator on row-major `vec(rho)` (index `i*D + j`).
    pub fn superoperator(&self, cap: usize) -> Result<SparseOp> {
        let n = self.dim * self.dim;
        if n > cap {
            return Err(Error::TooLarge { size: n, cap });
        }
        self.restricted_superoperator(&BlockBasis::trivial(self.dim), Execution::default())
    }

    /// Superoperator restricted to the block-diagonal unknowns of `basis`.
    ///
    /// Valid only when every jump maps blocks to blocks and the drift is
    /// block diagonal; see [`BlockBasis::audit`].
    pub fn restricted_superoperator(&self, basis: &BlockBasis, exec: Execution) -> Result<SparseOp> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: basis.dim() });
        }
        let n = basis.n_unknowns();
        let mut chunks = exec.map(&self.jumps, |j| sandwich_triplets(&j.matrix, basis));
        chunks.push(drift_triplets(&self.drift, basis));
        let triplets: Vec<_> = chunks.into_iter().flatten().collect();
        SparseOp::try_new_from_triplets(n, n, &triplets).map_err(|e| Error::Linalg(format!("{e:?}")))
    }
}

type Trip = faer::sparse::Triplet<usize, usize, C64>;

/// Entries of `rho -> L rho L^+`: column `(i,j)` feeds row `(a,b)` with
/// `L[a,i] conj(L[b,j])`.
fn sandwich_triplets(l: &SparseOp, basis: &BlockBasis) -> Vec<Trip> {
    let mut out = Vec::new();
    for block in basis.blocks() {
        for &i in block {
            let col_i: Vec<(usize, C64)> = l.row_idx_of_col(i).zip(l.val_of_col(i).iter().copied()).collect();
            if col_i.is_empty() {
                continue;
            }
            for &j in block {
                let Some(col) = basis.unknown(i, j) else { continue };
                for (b, lb) in l.row_idx_of_col(j).zip(l.val_of_col(j)) {
                    let lbc = lb.conj();
                    for &(a, la) in &col_i {
                        if let Some(row) = basis.unknown(a, b) {
                            out.push(Trip::new(row, col, la * lbc));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Entries of `rho -> G rho + rho G^+`.
fn drift_triplets(g: &SparseOp, basis: &BlockBasis) -> Vec<Trip> {
    let mut out = Vec::new();
    for block in basis.blocks() {
        for &i in block {
            for &j in block {
                let Some(col) = basis.unknown(i, j) else { continue };
                // (G rho)[a, j] += G[a, i] rho[i, j]
                for (a, v) in g.row_idx_of_col(i).zip(g.val_of_col(i)) {
                    if let Some(row) = basis.unknown(a, j) {
                        out.push(Trip::new(row, col, *v));
                    }
                }
                // (rho G^+)[i, b] += rho[i, j] conj(G[b, j])
                for (b, v) in g.row_idx_of_col(j).zip(g.val_of_col(j)) {
                    if let Some(row) = basis.unknown(i, b) {
                        out.push(Trip::new(row, col, v.conj()));
                    }
                }
            }
        }
    }
    out
}
