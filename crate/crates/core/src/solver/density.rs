use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::tensor::{BlockBasis, SubsystemLayout, C64};

/// Steady-state density operator, full or block diagonal.
#[derive(Clone, Debug)]
pub enum DensityOperator {
    Dense(Mat<C64>),
    Blocks { basis: BlockBasis, blocks: Vec<Mat<C64>> },
}

impl DensityOperator {
    /// Rebuilds the operator from the unknown vector of `basis`.
    pub fn from_unknowns(basis: &BlockBasis, x: &[C64]) -> Self {
        if basis.n_blocks() == 1 {
            let d = basis.dim();
            let members = &basis.blocks()[0];
            let mut m = Mat::<C64>::zeros(d, d);
            for (p, &i) in members.iter().enumerate() {
                for (q, &j) in members.iter().enumerate() {
                    m[(i, j)] = x[p * d + q];
                }
            }
            return DensityOperator::Dense(m);
        }
        let blocks = basis
            .blocks()
            .iter()
            .enumerate()
            .map(|(b, members)| {
                let d = members.len();
                let off = basis.offset(b);
                Mat::from_fn(d, d, |p, q| x[off + p * d + q])
            })
            .collect();
        DensityOperator::Blocks { basis: basis.clone(), blocks }
    }

    pub fn dim(&self) -> usize {
        match self {
            DensityOperator::Dense(m) => m.nrows(),
            DensityOperator::Blocks { basis, .. } => basis.dim(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match self {
            DensityOperator::Dense(m) => m[(i, j)],
            DensityOperator::Blocks { basis, blocks } => {
                let b = basis.block_of(i);
                if basis.block_of(j) != b {
                    return C64::new(0.0, 0.0);
                }
                let pos = |x: usize| basis.blocks()[b].iter().position(|&y| y == x).expect("member");
                blocks[b][(pos(i), pos(j))]
            }
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match self {
            DensityOperator::Dense(m) => m.clone(),
            DensityOperator::Blocks { basis, blocks } => {
                let d = basis.dim();
                let mut m = Mat::<C64>::zeros(d, d);
                for (members, blk) in basis.blocks().iter().zip(blocks) {
                    for (p, &i) in members.iter().enumerate() {
                        for (q, &j) in members.iter().enumerate() {
                            m[(i, j)] = blk[(p, q)];
                        }
                    }
                }
                m
            }
        }
    }

    fn parts(&self) -> Vec<&Mat<C64>> {
        match self {
            DensityOperator::Dense(m) => vec![m],
            DensityOperator::Blocks { blocks, .. } => blocks.iter().collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.parts().iter().flat_map(|m| (0..m.nrows()).map(move |i| m[(i, i)])).sum()
    }

    /// `max |rho - rho^+|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        self.parts()
            .iter()
            .map(|m| {
                let mut worst = 0.0f64;
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for m in self.parts() {
            let h = Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
            let ev = h.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
            best = ev.iter().copied().fold(best, f64::min);
        }
        Ok(best)
    }

    /// Population of every basis state.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entry(i, i).re).collect()
    }
}

/// `<GHZ+| Tr_anc(rho) |GHZ+>` with GHZ on data levels 0 and 1.
pub fn ghz_fidelity(layout: &SubsystemLayout, rho: &DensityOperator) -> f64 {
    let n = layout.n_data();
    let d_anc: usize = (n..layout.n_sites()).map(|s| layout.site_dim(s)).product();
    let ones: usize = (0..n).map(|s| layout.stride(s)).sum();
    (0..d_anc)
        .map(|a| 0.5 * (rho.entry(a, a).re + rho.entry(ones + a, ones + a).re + 2.0 * rho.entry(a, ones + a).re))
        .sum()
}

/// Trace norm of the difference divided by 2.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    let diff = a.to_dense() - b.to_dense();
    let h = Mat::from_fn(diff.nrows(), diff.ncols(), |i, j| (diff[(i, j)] + diff[(j, i)].conj()) * 0.5);
    let ev = h.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_state_has_half_fidelity() {
        let l = SubsystemLayout::chain(&["0", "1"], 3, &[], 0).unwrap();
        let mut m = Mat::<C64>::zeros(8, 8);
        m[(0, 0)] = C64::new(1.0, 0.0);
        assert!((ghz_fidelity(&l, &DensityOperator::Dense(m)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ghz_with_ancilla_has_unit_fidelity() {
        let l = SubsystemLayout::chain(&["0", "1"], 2, &["g", "e"], 1).unwrap();
        // (|00> + |11>)/sqrt2 (x) |e>
        let idx = [l.index_of(&[0, 0, 1]), l.index_of(&[1, 1, 1])];
        let mut m = Mat::<C64>::zeros(8, 8);
        for &i in &idx {
            for &j in &idx {
                m[(i, j)] = C64::new(0.5, 0.0);
            }
        }
        assert!((ghz_fidelity(&l, &DensityOperator::Dense(m)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_and_dense_views_agree() {
        let l = SubsystemLayout::chain(&["0", "1", "2"], 2, &[], 0).unwrap();
        let basis = BlockBasis::for_layout(&l);
        let x: Vec<C64> = (0..basis.n_unknowns()).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let rho = DensityOperator::from_unknowns(&basis, &x);
        let dense = rho.to_dense();
        for i in 0..9 {
            for j in 0..9 {
                assert_eq!(rho.entry(i, j), dense[(i, j)]);
            }
        }
        assert_eq!(trace_distance(&rho, &DensityOperator::Dense(dense)).unwrap(), 0.0);
    }
}
