use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

pub type RateMatrix = SparseColMat<usize, f64>;

/// Continuous-time Markov chain over labeled states. Column `j` of the
/// generator holds the rates out of state `j`; columns sum to zero.
#[derive(Clone, Debug)]
pub struct CtmcModel {
    pub states: Vec<String>,
    pub generator: RateMatrix,
    pub irreducible: bool,
}

/// Accumulates off-diagonal rates; the diagonal is always derived from them.
#[derive(Clone, Debug)]
pub struct CtmcBuilder {
    states: Vec<String>,
    index: HashMap<String, usize>,
    rates: BTreeMap<(usize, usize), f64>,
}

impl CtmcBuilder {
    pub fn new(states: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Unsupported(format!("duplicate state label {s}")));
            }
        }
        Ok(CtmcBuilder { states, index, rates: BTreeMap::new() })
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Adds `rate` to the transition `from -> to`. Self-transitions and zero
    /// rates are dropped.
    pub fn add(&mut self, from: usize, to: usize, rate: f64) -> Result<()> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::Rates(format!("transition rate {rate} must be finite and >= 0")));
        }
        if from == to || rate == 0.0 {
            return Ok(());
        }
        *self.rates.entry((from, to)).or_insert(0.0) += rate;
        Ok(())
    }

    pub fn add_by_label(&mut self, from: &str, to: &str, rate: f64) -> Result<()> {
        let f = self.index(from).ok_or_else(|| Error::Unsupported(format!("unknown state {from}")))?;
        let t = self.index(to).ok_or_else(|| Error::Unsupported(format!("unknown state {to}")))?;
        self.add(f, t, rate)
    }

    pub fn build(self) -> Result<CtmcModel> {
        let n = self.states.len();
        let mut out_rate = vec![0.0; n];
        let mut trips = Vec::with_capacity(self.rates.len() + n);
        let mut adjacency = vec![Vec::new(); n];
        for (&(from, to), &r) in &self.rates {
            trips.push(Triplet::new(to, from, r));
            out_rate[from] += r;
            adjacency[from].push(to);
        }
        for (j, r) in out_rate.iter().enumerate() {
            trips.push(Triplet::new(j, j, -r));
        }
        let generator = RateMatrix::try_new_from_triplets(n, n, &trips).map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let irreducible = strongly_connected(&adjacency);
        Ok(CtmcModel { states: self.states, generator, irreducible })
    }
}

fn reachable(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count
}

fn strongly_connected(adj: &[Vec<usize>]) -> bool {
    if adj.is_empty() {
        return false;
    }
    let mut rev = vec![Vec::new(); adj.len()];
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            rev[w].push(v);
        }
    }
    reachable(adj) == adj.len() && reachable(&rev) == adj.len()
}

impl CtmcModel {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// `(from, to, rate)` for every off-diagonal entry, column by column.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let g = &self.generator;
        let mut out = Vec::new();
        for j in 0..g.ncols() {
            for (i, &v) in g.row_idx_of_col(j).zip(g.val_of_col(j)) {
                if i != j && v != 0.0 {
                    out.push((j, i, v));
                }
            }
        }
        out
    }

    /// Rate of the transition `from -> to`, zero if absent.
    pub fn rate(&self, from: &str, to: &str) -> f64 {
        let (Some(f), Some(t)) = (self.index(from), self.index(to)) else { return 0.0 };
        self.edges().into_iter().find(|e| e.0 == f && e.1 == t).map_or(0.0, |e| e.2)
    }

    /// Largest `|column sum|` of the generator.
    pub fn column_sum_error(&self) -> f64 {
        let g = &self.generator;
        (0..g.ncols()).map(|j| g.val_of_col(j).iter().sum::<f64>().abs()).fold(0.0, f64::max)
    }

    pub fn max_rate(&self) -> f64 {
        let g = &self.generator;
        (0..g.ncols()).flat_map(|j| g.val_of_col(j).iter().map(|v| v.abs())).fold(0.0, f64::max)
    }

    /// `||A p||_inf`.
    pub fn residual(&self, p: &[f64]) -> f64 {
        let g = &self.generator;
        let mut out = vec![0.0; g.nrows()];
        for j in 0..g.ncols() {
            for (i, &v) in g.row_idx_of_col(j).zip(g.val_of_col(j)) {
                out[i] += v * p[j];
            }
        }
        out.into_iter().map(f64::abs).fold(0.0, f64::max)
    }

    /// Plain-text edge list, one `from<TAB>to<TAB>rate` line per transition.
    pub fn write_edge_list(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "from\tto\trate")?;
        for (f, t, r) in self.edges() {
            writeln!(w, "{}\t{}\t{:.17e}", self.states[f], self.states[t], r)?;
        }
        Ok(())
    }
}

/// Stationary distribution of a chain with its residual.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub states: Vec<String>,
    pub stationary: Vec<f64>,
    /// `||A p||_inf` of the returned vector.
    pub residual: f64,
}

impl ChainReport {
    pub fn population(&self, label: &str) -> Option<f64> {
        self.states.iter().position(|s| s == label).map(|i| self.stationary[i])
    }

    /// Summed population of the listed states; unknown labels count as zero.
    pub fn mass(&self, labels: &[&str]) -> f64 {
        labels.iter().filter_map(|l| self.population(l)).sum()
    }

    pub fn mass_where(&self, mut keep: impl FnMut(&str) -> bool) -> f64 {
        self.states.iter().zip(&self.stationary).filter(|(s, _)| keep(s)).map(|(_, p)| p).sum()
    }
}

/// Unique stationary vector: one balance row is replaced by the
/// normalization row and the system is solved by sparse LU, followed by two
/// refinement steps.
pub fn ctmc_stationary(model: &CtmcModel) -> Result<ChainReport> {
    if !model.irreducible {
        return Err(Error::Reducible);
    }
    let n = model.n_states();
    let g = &model.generator;
    let mut trips = Vec::with_capacity(g.compute_nnz() + n);
    for j in 0..n {
        for (i, &v) in g.row_idx_of_col(j).zip(g.val_of_col(j)) {
            if i != 0 {
                trips.push(Triplet::new(i, j, v));
            }
        }
        trips.push(Triplet::new(0, j, 1.0));
    }
    let system = RateMatrix::try_new_from_triplets(n, n, &trips).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let lu = system.sp_lu().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let mut rhs = Mat::<f64>::zeros(n, 1);
    rhs[(0, 0)] = 1.0;
    let mut x = lu.solve(&rhs);
    for _ in 0..2 {
        let r = &rhs - system.as_ref() * x.as_ref();
        x += lu.solve(&r);
    }
    let stationary: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if stationary.iter().any(|v| !v.is_finite()) {
        return Err(Error::Linalg("stationary solve produced non-finite values".into()));
    }
    let residual = model.residual(&stationary);
    Ok(ChainReport { states: model.states.clone(), stationary, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> CtmcModel {
        let mut c = CtmcBuilder::new(vec!["0".into(), "1".into()]).unwrap();
        c.add(0, 1, a).unwrap();
        c.add(1, 0, b).unwrap();
        c.build().unwrap()
    }

    #[test]
    fn birth_death_pair() {
        let r = ctmc_stationary(&two_state(2.0, 3.0)).unwrap();
        assert!((r.stationary[0] - 0.6).abs() < 1e-15);
        assert!((r.stationary[1] - 0.4).abs() < 1e-15);
        assert!(r.residual < 1e-14);
    }

    #[test]
    fn diagonal_is_derived() {
        let m = two_state(2.0, 3.0);
        assert!(m.column_sum_error() < 1e-15);
        assert_eq!(m.rate("0", "1"), 2.0);
        assert_eq!(m.edges().len(), 2);
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let m = two_state(2.0, 0.0);
        assert!(!m.irreducible);
        assert!(matches!(ctmc_stationary(&m), Err(Error::Reducible)));
    }

    #[test]
    fn self_loops_and_bad_rates() {
        let mut c = CtmcBuilder::new(vec!["a".into(), "b".into()]).unwrap();
        c.add(0, 0, 5.0).unwrap();
        assert!(c.add(0, 1, -1.0).is_err());
        assert!(c.add_by_label("a", "zz", 1.0).is_err());
        assert!(CtmcBuilder::new(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn edge_list_format() {
        let mut buf = Vec::new();
        two_state(2.0, 3.0).write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "from\tto\trate");
        assert!(lines[1].starts_with("0\t1\t2.0"));
        assert_eq!(lines.len(), 3);
    }
}
