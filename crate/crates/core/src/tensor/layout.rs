use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Data,
    Ancilla,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    pub role: Role,
    pub labels: Vec<String>,
}

impl Site {
    pub fn new(role: Role, labels: &[&str]) -> Self {
        Site {
            role,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

/// Ordered chain of subsystems: data sites first, ancillas after.
///
/// Basis index convention: site 0 is the most significant digit, so the
/// index of `|x_0 x_1 ... x_{N-1}>` is `sum_s x_s * stride_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    sites: Vec<Site>,
    strides: Vec<usize>,
    total: usize,
}

impl SubsystemLayout {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        let n_data = sites.iter().filter(|s| s.role == Role::Data).count();
        if n_data < 2 {
            return Err(Error::Layout(format!("need at least 2 data sites, got {n_data}")));
        }
        if let Some(pos) = sites.iter().position(|s| s.role == Role::Ancilla) {
            if sites[pos..].iter().any(|s| s.role == Role::Data) {
                return Err(Error::Layout("data sites must precede ancilla sites".into()));
            }
        }
        for (i, s) in sites.iter().enumerate() {
            if s.dim() < 2 {
                return Err(Error::Layout(format!("site {i} has dimension {} < 2", s.dim())));
            }
            let mut seen = s.labels.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != s.labels.len() {
                return Err(Error::Layout(format!("site {i} has duplicate level labels")));
            }
        }
        let mut strides = vec![1; sites.len()];
        for i in (0..sites.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sites[i + 1].dim();
        }
        let total = sites.iter().map(Site::dim).product();
        Ok(SubsystemLayout { sites, strides, total })
    }

    /// `n` identical data sites followed by `m` identical ancillas.
    pub fn chain(data_labels: &[&str], n: usize, ancilla_labels: &[&str], m: usize) -> Result<Self> {
        let mut sites = vec![Site::new(Role::Data, data_labels); n];
        sites.extend(std::iter::repeat_n(Site::new(Role::Ancilla, ancilla_labels), m));
        Self::new(sites)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &Site {
        &self.sites[i]
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn n_data(&self) -> usize {
        self.sites.iter().filter(|s| s.role == Role::Data).count()
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_sites() - self.n_data()
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    pub fn site_dim(&self, site: usize) -> usize {
        self.sites[site].dim()
    }

    /// Level of `site` in basis state `index`.
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.sites[site].dim()
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.n_sites()).map(|s| self.digit(index, s)).collect()
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn level(&self, site: usize, label: &str) -> Option<usize> {
        self.sites[site].labels.iter().position(|l| l == label)
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            Err(Error::SiteOutOfRange { site, n_sites: self.n_sites() })
        } else {
            Ok(())
        }
    }

    /// Default sector partition used by the block solver: every ancilla level
    /// is its own sector, qubit data sites form one sector, and on data sites
    /// with more levels `{0,1}` is one sector and each higher level another.
    pub fn default_sectors(&self) -> Vec<Vec<usize>> {
        self.sites
            .iter()
            .map(|s| match s.role {
                Role::Ancilla => (0..s.dim()).collect(),
                Role::Data => (0..s.dim()).map(|l| l.saturating_sub(1)).collect(),
            })
            .collect()
    }

    /// A copy with the levels of `site` reordered: new level `i` is old level `perm[i]`.
    pub fn with_permuted_levels(&self, site: usize, perm: &[usize]) -> Result<Self> {
        self.check_site(site)?;
        let mut sites = self.sites.clone();
        let old = &self.sites[site].labels;
        if perm.len() != old.len() {
            return Err(Error::DimensionMismatch { expected: old.len(), got: perm.len() });
        }
        sites[site].labels = perm.iter().map(|&p| old[p].clone()).collect();
        Self::new(sites)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_and_digits_round_trip() {
        let l = SubsystemLayout::chain(&["0", "1"], 2, &["g", "e", "m"], 2).unwrap();
        assert_eq!(l.dim(), 36);
        for x in 0..l.dim() {
            assert_eq!(l.index_of(&l.digits(x)), x);
        }
        assert_eq!(l.stride(3), 1);
        assert_eq!(l.stride(0), 18);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(SubsystemLayout::chain(&["0", "1"], 1, &[], 0).is_err());
        assert!(SubsystemLayout::chain(&["0", "0"], 2, &[], 0).is_err());
        let bad = vec![
            Site::new(Role::Data, &["0", "1"]),
            Site::new(Role::Ancilla, &["g", "e"]),
            Site::new(Role::Data, &["0", "1"]),
        ];
        assert!(SubsystemLayout::new(bad).is_err());
    }

    #[test]
    fn sectors_split_qutrit_data() {
        let l = SubsystemLayout::chain(&["0", "1", "2"], 2, &["g", "e"], 1).unwrap();
        let s = l.default_sectors();
        assert_eq!(s[0], vec![0, 0, 1]);
        assert_eq!(s[2], vec![0, 1]);
    }
}
