use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::{SparseOp, SubsystemLayout, C64};
use crate::error::{Error, Result};

/// Operator acting on 1 to 3 sites; identity elsewhere.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    /// Target sites; the first one is the most significant factor of `matrix`.
    pub sites: Vec<usize>,
    pub matrix: Mat<C64>,
    /// Real prefactor, usually the square root of a rate.
    pub amplitude: f64,
}

impl LocalOperator {
    pub fn new(sites: Vec<usize>, matrix: Mat<C64>, amplitude: f64) -> Self {
        LocalOperator { sites, matrix, amplitude }
    }

    /// `amplitude^2`, the rate carried by the operator.
    pub fn rate(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    pub fn scaled_matrix(&self) -> Mat<C64> {
        let a = C64::new(self.amplitude, 0.0);
        Mat::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| self.matrix[(i, j)] * a)
    }

    pub fn validate(&self, layout: &SubsystemLayout) -> Result<()> {
        if self.sites.is_empty() || self.sites.len() > 3 {
            return Err(Error::Layout(format!(
                "local operators act on 1 to 3 sites, got {}",
                self.sites.len()
            )));
        }
        for (i, &s) in self.sites.iter().enumerate() {
            layout.check_site(s)?;
            if self.sites[..i].contains(&s) {
                return Err(Error::Layout(format!("site {s} repeated")));
            }
        }
        let expected: usize = self.sites.iter().map(|&s| layout.site_dim(s)).product();
        if self.matrix.nrows() != expected || self.matrix.ncols() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.matrix.nrows().max(self.matrix.ncols()),
            });
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Rates(format!("amplitude {} must be finite and >= 0", self.amplitude)));
        }
        Ok(())
    }
}

/// Detection signal a collapse operator is associated with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    /// `{k L}`: the bond correlator between data sites `k` and `k+1`.
    Ltv(usize),
    /// `{k +}`: a reset of data site `k`.
    Reset(usize),
    /// `{U}`: restart of a wave.
    Restart,
    /// `{k E}`: a perturbation on data site `k`.
    Error(usize),
    /// Ancilla-only clock transitions.
    Clock,
}

#[derive(Clone, Debug)]
pub struct LabeledCollapseOp {
    pub op: LocalOperator,
    pub signal: Signal,
    /// Human readable channel name, e.g. `N_2,r`.
    pub name: String,
}

impl LabeledCollapseOp {
    pub fn new(name: impl Into<String>, signal: Signal, op: LocalOperator) -> Self {
        LabeledCollapseOp { op, signal, name: name.into() }
    }
}

/// Full-space sparse matrix of a local operator.
#[derive(Clone, Debug)]
pub struct EmbeddedOperator {
    pub matrix: SparseOp,
}

impl EmbeddedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.compute_nnz()
    }

    pub fn to_dense(&self) -> Mat<C64> {
        self.matrix.to_dense()
    }
}

/// Embeds `op` into the full space by index arithmetic: the untouched sites
/// keep their digits and the target digits are rewritten in place.
pub fn embed(op: &LocalOperator, layout: &SubsystemLayout) -> Result<EmbeddedOperator> {
    op.validate(layout)?;
    let m = op.scaled_matrix();
    Ok(EmbeddedOperator { matrix: embed_matrix(&op.sites, m.as_ref(), layout)? })
}

pub(crate) fn embed_matrix(sites: &[usize], m: faer::MatRef<'_, C64>, layout: &SubsystemLayout) -> Result<SparseOp> {
    let d = layout.dim();
    let local_dim = m.nrows();
    // offset[l]: contribution of local index l to the full index
    let mut offset = vec![0usize; local_dim];
    for (l, off) in offset.iter_mut().enumerate() {
        let mut rem = l;
        for &s in sites.iter().rev() {
            let ds = layout.site_dim(s);
            *off += (rem % ds) * layout.stride(s);
            rem /= ds;
        }
    }
    // nonzeros of each local column, computed once
    let cols: Vec<Vec<(usize, C64)>> = (0..local_dim)
        .map(|l| {
            (0..local_dim)
                .filter_map(|lp| {
                    let v = m[(lp, l)];
                    (v != C64::new(0.0, 0.0)).then_some((lp, v))
                })
                .collect()
        })
        .collect();
    let mut triplets = Vec::with_capacity(d * cols.iter().map(Vec::len).max().unwrap_or(0));
    for x in 0..d {
        let mut l = 0;
        for &s in sites {
            l = l * layout.site_dim(s) + layout.digit(x, s);
        }
        let base = x - offset[l];
        for &(lp, v) in &cols[l] {
            triplets.push(Triplet::new(base + offset[lp], x, v));
        }
    }
    SparseColMat::try_new_from_triplets(d, d, &triplets).map_err(|e| Error::Linalg(format!("{e:?}")))
}

/// Single-site state vectors used to write operators as sums of ket-bras.
pub mod kets {
    use super::C64;

    pub fn basis(dim: usize, level: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[level] = C64::new(1.0, 0.0);
        v
    }

    /// `(|0> + |1>)/sqrt 2` padded to `dim` levels.
    pub fn plus(dim: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[1] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v
    }

    /// `(|0> - |1>)/sqrt 2` padded to `dim` levels.
    pub fn minus(dim: usize) -> Vec<C64> {
        let mut v = plus(dim);
        v[1] = -v[1];
        v
    }
}

/// `|k_0 k_1 ...><b_0 b_1 ...|` as a dense matrix on the product space.
pub fn ket_bra(kets: &[Vec<C64>], bras: &[Vec<C64>]) -> Mat<C64> {
    assert_eq!(kets.len(), bras.len());
    let ket = kron_vectors(kets);
    let bra = kron_vectors(bras);
    Mat::from_fn(ket.len(), bra.len(), |i, j| ket[i] * bra[j].conj())
}

/// Sum of `ket_bra` terms with unit weights.
pub fn ket_bras(terms: &[(Vec<Vec<C64>>, Vec<Vec<C64>>)]) -> Mat<C64> {
    let mut acc: Option<Mat<C64>> = None;
    for (k, b) in terms {
        let m = ket_bra(k, b);
        acc = Some(match acc {
            None => m,
            Some(a) => a + m,
        });
    }
    acc.expect("at least one term")
}

fn kron_vectors(vs: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for v in vs {
        out = out.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    }
    out
}

/// Kronecker product of dense matrices.
pub fn kron(a: faer::MatRef<'_, C64>, b: faer::MatRef<'_, C64>) -> Mat<C64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}
