use std::collections::BTreeMap;

use super::{LindbladianHandle, SparseOp, SubsystemLayout};
use crate::error::{Error, Result};

/// Partition of the basis into blocks; the unknowns of a block-restricted
/// problem are the matrix elements `rho[i, j]` with `i`, `j` in one block.
///
/// Unknown id: `offset[b] + pos(i) * d_b + pos(j)`. With a single block
/// holding every index in order this is the row-major `i * D + j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockBasis {
    block_of: Vec<usize>,
    pos: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    n_unknowns: usize,
}

/// Outcome of checking that a generator leaves the block structure invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockAudit {
    pub n_blocks: usize,
    pub n_unknowns: usize,
    /// First violation found, if any.
    pub violation: Option<String>,
}

impl BlockAudit {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    pub fn into_result(self) -> Result<Self> {
        match &self.violation {
            Some(v) => Err(Error::AuditFailed(v.clone())),
            None => Ok(self),
        }
    }
}

impl BlockBasis {
    pub fn trivial(dim: usize) -> Self {
        Self::from_blocks(dim, vec![(0..dim).collect()])
    }

    fn from_blocks(dim: usize, blocks: Vec<Vec<usize>>) -> Self {
        let mut block_of = vec![0; dim];
        let mut pos = vec![0; dim];
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for (b, members) in blocks.iter().enumerate() {
            offsets.push(acc);
            acc += members.len() * members.len();
            for (p, &x) in members.iter().enumerate() {
                block_of[x] = b;
                pos[x] = p;
            }
        }
        BlockBasis { block_of, pos, blocks, offsets, n_unknowns: acc }
    }

    /// Groups basis states by the tuple of per-site sector ids.
    /// `sectors[s][level]` is the sector of `level` on site `s`.
    pub fn from_sectors(layout: &SubsystemLayout, sectors: &[Vec<usize>]) -> Result<Self> {
        if sectors.len() != layout.n_sites() {
            return Err(Error::DimensionMismatch { expected: layout.n_sites(), got: sectors.len() });
        }
        for (s, sec) in sectors.iter().enumerate() {
            if sec.len() != layout.site_dim(s) {
                return Err(Error::DimensionMismatch { expected: layout.site_dim(s), got: sec.len() });
            }
        }
        let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for x in 0..layout.dim() {
            let key: Vec<usize> = (0..layout.n_sites()).map(|s| sectors[s][layout.digit(x, s)]).collect();
            groups.entry(key).or_default().push(x);
        }
        Ok(Self::from_blocks(layout.dim(), groups.into_values().collect()))
    }

    /// Blocks from the layout's default sectors.
    pub fn for_layout(layout: &SubsystemLayout) -> Self {
        Self::from_sectors(layout, &layout.default_sectors()).expect("default sectors match the layout")
    }

    pub fn dim(&self) -> usize {
        self.block_of.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_unknowns
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    /// Unknown id of `rho[i, j]`, or `None` when `i` and `j` sit in different blocks.
    pub fn unknown(&self, i: usize, j: usize) -> Option<usize> {
        let b = self.block_of[i];
        if self.block_of[j] != b {
            return None;
        }
        Some(self.offsets[b] + self.pos[i] * self.blocks[b].len() + self.pos[j])
    }

    /// Ids of the diagonal unknowns, used for the trace functional.
    pub fn diagonal_unknowns(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).map(|i| self.unknown(i, i).expect("diagonal is always inside a block"))
    }

    /// Checks that every jump sends each block into a single block and that
    /// the drift (and Hamiltonian) never couples two blocks.
    pub fn audit(&self, handle: &LindbladianHandle) -> BlockAudit {
        let mut violation = None;
        for (m, _, name) in handle.jump_matrices() {
            if let Some(v) = self.jump_violation(m) {
                violation = Some(format!("{name}: {v}"));
                break;
            }
        }
        if violation.is_none() {
            if let Some(v) = self.off_block(handle.drift()) {
                violation = Some(format!("drift: {v}"));
            }
        }
        BlockAudit { n_blocks: self.n_blocks(), n_unknowns: self.n_unknowns, violation }
    }

    fn jump_violation(&self, m: &SparseOp) -> Option<String> {
        let mut target: Vec<Option<usize>> = vec![None; self.n_blocks()];
        for x in 0..self.dim() {
            let from = self.block_of[x];
            for y in m.row_idx_of_col(x) {
                let to = self.block_of[y];
                match target[from] {
                    None => target[from] = Some(to),
                    Some(t) if t != to => {
                        return Some(format!("block {from} is sent to blocks {t} and {to}"));
                    }
                    _ => {}
                }
            }
        }
        None
    }

    fn off_block(&self, m: &SparseOp) -> Option<String> {
        for x in 0..self.dim() {
            for (y, v) in m.row_idx_of_col(x).zip(m.val_of_col(x)) {
                if self.block_of[y] != self.block_of[x] && v.norm() > 0.0 {
                    return Some(format!("couples basis states {x} and {y}"));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_basis_is_row_major() {
        let b = BlockBasis::trivial(5);
        assert_eq!(b.n_unknowns(), 25);
        assert_eq!(b.unknown(2, 3), Some(13));
        assert_eq!(b.diagonal_unknowns().collect::<Vec<_>>(), vec![0, 6, 12, 18, 24]);
    }

    #[test]
    fn sector_blocks_count_unknowns() {
        // qutrit data, n=3: |2> splits off on each site
        let l = SubsystemLayout::chain(&["0", "1", "2"], 3, &[], 0).unwrap();
        let b = BlockBasis::for_layout(&l);
        assert_eq!(b.n_blocks(), 8);
        assert_eq!(b.n_unknowns(), 125);
        assert_eq!(b.unknown(0, 2), None);
    }
}
