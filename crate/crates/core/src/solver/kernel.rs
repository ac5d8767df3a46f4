//! Null vector of a (restricted) Lindblad superoperator.

use faer::sparse::Triplet;
use faer::Mat;
use faer::linalg::solvers::Solve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{BlockBasis, SparseOp, C64};

/// Gap factor between the two smallest singular values below which the
/// kernel is declared degenerate.
pub const DEGENERACY_GAP: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct KernelSolution {
    /// Unknown vector normalized to unit trace.
    pub vector: Vec<C64>,
    pub iterations: usize,
    /// Two smallest singular values (dense path only).
    pub smallest_singular_values: Option<(f64, f64)>,
}

fn trace(x: &[C64], diag: &[usize]) -> C64 {
    diag.iter().map(|&i| x[i]).sum()
}

fn normalize(x: &mut [C64], diag: &[usize]) -> Result<()> {
    let t = trace(x, diag);
    if t.norm() < 1e-300 || !t.re.is_finite() {
        return Err(Error::Linalg("null vector has zero trace".into()));
    }
    let inv = t.inv();
    for v in x.iter_mut() {
        *v *= inv;
    }
    Ok(())
}

/// SVD of the dense matrix; the right singular vector of the smallest
/// singular value spans the kernel.
pub fn dense_kernel(a: &SparseOp, basis: &BlockBasis) -> Result<KernelSolution> {
    let n = a.nrows();
    let dense = a.to_dense();
    let svd = dense.svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    // singular values come sorted in decreasing order
    let s_max = s[0].re;
    let s_min = s[n - 1].re;
    let s_next = if n > 1 { s[n - 2].re } else { f64::INFINITY };
    let floor = f64::EPSILON * s_max;
    let threshold = DEGENERACY_GAP * s_min.max(floor);
    if s_next < threshold {
        let kernel_dim = (0..n).filter(|&i| s[i].re < threshold).count();
        return Err(Error::KernelDegenerate { kernel_dim });
    }
    let v = svd.V();
    let mut x: Vec<C64> = (0..n).map(|i| v[(i, n - 1)]).collect();
    let diag: Vec<usize> = basis.diagonal_unknowns().collect();
    normalize(&mut x, &diag)?;
    Ok(KernelSolution { vector: x, iterations: 1, smallest_singular_values: Some((s_min, s_next)) })
}

/// Shifted inverse iteration with one sparse LU, from the maximally mixed
/// state and `extra_seeds` random diagonal states. Distinct limits mean a
/// degenerate kernel.
pub fn sparse_kernel(
    a: &SparseOp,
    basis: &BlockBasis,
    tol: f64,
    max_iterations: usize,
    extra_seeds: usize,
    seed: u64,
) -> Result<KernelSolution> {
    let n = a.nrows();
    let diag: Vec<usize> = basis.diagonal_unknowns().collect();
    let scale = diagonal_scale(a).max(1.0);
    let shift = 1e-10 * scale;
    let mut trips = Vec::with_capacity(a.compute_nnz() + n);
    for j in 0..n {
        for (i, v) in a.row_idx_of_col(j).zip(a.val_of_col(j)) {
            trips.push(Triplet::new(i, j, *v));
        }
        trips.push(Triplet::new(j, j, C64::new(-shift, 0.0)));
    }
    let shifted = SparseOp::try_new_from_triplets(n, n, &trips).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let lu = shifted.sp_lu().map_err(|e| Error::Linalg(format!("{e:?}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = diag.len();
    let mut seeds = vec![vec![1.0 / d as f64; d]];
    for _ in 0..extra_seeds {
        let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        seeds.push(w.into_iter().map(|x| x / s).collect());
    }

    let mut limits: Vec<Vec<C64>> = Vec::new();
    let mut total_iterations = 0;
    for weights in seeds {
        let mut x = Mat::<C64>::zeros(n, 1);
        for (&i, w) in diag.iter().zip(&weights) {
            x[(i, 0)] = C64::new(*w, 0.0);
        }
        let mut best = f64::INFINITY;
        let mut converged = false;
        for _ in 0..max_iterations {
            total_iterations += 1;
            x = lu.solve(&x);
            let mut col: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
            normalize(&mut col, &diag)?;
            for (i, v) in col.iter().enumerate() {
                x[(i, 0)] = *v;
            }
            let r = (a.as_ref() * x.as_ref()).norm_l2();
            best = best.min(r);
            if r <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { iterations: total_iterations, best_residual: best });
        }
        limits.push((0..n).map(|i| x[(i, 0)]).collect());
    }

    let reference = &limits[0];
    let mut distinct = 1;
    for other in &limits[1..] {
        let diff = reference.iter().zip(other).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        if diff > 1e-6 {
            distinct += 1;
        }
    }
    if distinct > 1 {
        return Err(Error::KernelDegenerate { kernel_dim: distinct });
    }
    Ok(KernelSolution { vector: limits.swap_remove(0), iterations: total_iterations, smallest_singular_values: None })
}

fn diagonal_scale(a: &SparseOp) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for (i, v) in a.row_idx_of_col(j).zip(a.val_of_col(j)) {
            if i == j {
                best = best.max(v.norm());
            }
        }
    }
    best
}
