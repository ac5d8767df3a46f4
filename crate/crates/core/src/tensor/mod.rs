//! Multipartite Hilbert-space plumbing: layouts, operator embedding and the
//! Lindblad generator.

mod embed;
mod layout;
mod lindblad;
mod superop;

pub use embed::{embed, ket_bra, ket_bras, kets, kron, EmbeddedOperator, LabeledCollapseOp, LocalOperator, Signal};
pub use layout::{Role, Site, SubsystemLayout};
pub use lindblad::{apply_lindbladian, assemble_lindbladian, LindbladianHandle, DEFAULT_SUPEROP_CAP};
pub use superop::{BlockBasis, BlockAudit};

pub type C64 = faer::c64;
pub type SparseOp = faer::sparse::SparseColMat<usize, C64>;

/// Conjugate transpose of a sparse matrix.
pub fn adjoint(m: &SparseOp) -> SparseOp {
    m.adjoint().to_col_major().expect("allocation")
}
