//! Sparse GF(2) parity-check matrices and ensembles of them.
//!
//! A [`ParityCheckMatrix`] keeps both adjacency directions of its Tanner
//! graph in compressed form. Edges are numbered in row-major order; each
//! column additionally records the edge ids of its entries so message
//! passing can walk the graph in either direction without searching.

mod alist;
mod peg;

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use alist::{load_alist, save_alist, to_alist_string};
pub use peg::peg_construct;

use crate::error::{Error, Result};

/// Target column degrees for code construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeProfile {
    /// Every variable node gets the same degree.
    Regular(usize),
    /// Explicit degree per variable node.
    PerColumn(Vec<usize>),
}

impl Default for DegreeProfile {
    fn default() -> Self {
        DegreeProfile::Regular(3)
    }
}

impl DegreeProfile {
    /// Resolves the profile to one degree per column, validating it against
    /// the matrix shape.
    pub fn column_degrees(&self, n: usize, m: usize) -> Result<Vec<usize>> {
        if m == 0 || m >= n {
            return Err(Error::Construction(format!(
                "shape {m}x{n} must satisfy 0 < m < n"
            )));
        }
        let degrees = match self {
            DegreeProfile::Regular(d) => vec![*d; n],
            DegreeProfile::PerColumn(ds) => {
                if ds.len() != n {
                    return Err(Error::Construction(format!(
                        "profile lists {} column degrees for n = {n}",
                        ds.len()
                    )));
                }
                ds.clone()
            }
        };
        for (i, &d) in degrees.iter().enumerate() {
            if d < 2 {
                return Err(Error::Construction(format!(
                    "column {i} has degree {d}; degrees must be at least 2"
                )));
            }
            if d > m {
                return Err(Error::Construction(format!(
                    "column {i} has degree {d} which exceeds m = {m}"
                )));
            }
        }
        Ok(degrees)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    m: usize,
    row_ptr: Vec<usize>,
    row_vars: Vec<u32>,
    col_ptr: Vec<usize>,
    col_checks: Vec<u32>,
    /// For each column slot, the row-major edge id of that entry.
    col_edges: Vec<u32>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from `(check, variable)` pairs.
    ///
    /// Rejects out-of-range indices, repeated edges, shapes other than
    /// `0 < m < n`, and empty columns.
    pub fn from_edges<I>(n: usize, m: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if m == 0 || m >= n {
            return Err(Error::Contract(format!(
                "shape {m}x{n} must satisfy 0 < m < n"
            )));
        }
        if n > u32::MAX as usize {
            return Err(Error::Contract(format!("n = {n} too large")));
        }
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (c, v) in edges {
            if c >= m || v >= n {
                return Err(Error::Contract(format!(
                    "edge ({c}, {v}) outside {m}x{n} matrix"
                )));
            }
            rows[c].push(v as u32);
        }
        Self::from_rows(n, rows)
    }

    fn from_rows(n: usize, mut rows: Vec<Vec<u32>>) -> Result<Self> {
        let m = rows.len();
        let mut row_ptr = Vec::with_capacity(m + 1);
        row_ptr.push(0);
        let mut col_deg = vec![0usize; n];
        for (c, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Contract(format!(
                    "parallel edge between check {c} and variable {}",
                    w[0]
                )));
            }
            for &v in row.iter() {
                col_deg[v as usize] += 1;
            }
            row_ptr.push(row_ptr[c] + row.len());
        }
        if let Some(i) = col_deg.iter().position(|&d| d == 0) {
            return Err(Error::Contract(format!("column {i} has no entries")));
        }
        let row_vars: Vec<u32> = rows.into_iter().flatten().collect();
        let edge_count = row_vars.len();

        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for i in 0..n {
            col_ptr.push(col_ptr[i] + col_deg[i]);
        }
        let mut fill = col_ptr[..n].to_vec();
        let mut col_checks = vec![0u32; edge_count];
        let mut col_edges = vec![0u32; edge_count];
        // Rows are visited in increasing order, so each column list ends up sorted.
        for c in 0..m {
            for e in row_ptr[c]..row_ptr[c + 1] {
                let v = row_vars[e] as usize;
                col_checks[fill[v]] = c as u32;
                col_edges[fill[v]] = e as u32;
                fill[v] += 1;
            }
        }
        Ok(ParityCheckMatrix {
            n,
            m,
            row_ptr,
            row_vars,
            col_ptr,
            col_checks,
            col_edges,
        })
    }

    /// Number of variable nodes (columns).
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of check nodes (rows).
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.row_vars.len()
    }

    /// Sorted variable indices of check `j`.
    #[inline]
    pub fn row(&self, j: usize) -> &[u32] {
        &self.row_vars[self.row_ptr[j]..self.row_ptr[j + 1]]
    }

    /// Row-major edge id range of check `j`.
    #[inline]
    pub fn row_edges(&self, j: usize) -> std::ops::Range<usize> {
        self.row_ptr[j]..self.row_ptr[j + 1]
    }

    /// Sorted check indices of variable `i`.
    #[inline]
    pub fn col(&self, i: usize) -> &[u32] {
        &self.col_checks[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    /// Row-major edge ids of variable `i`, aligned with [`col`](Self::col).
    #[inline]
    pub fn col_edges(&self, i: usize) -> &[u32] {
        &self.col_edges[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    /// Variable index of every edge, in row-major edge order.
    #[inline]
    pub fn edge_vars(&self) -> &[u32] {
        &self.row_vars
    }

    pub fn row_degree(&self, j: usize) -> usize {
        self.row_ptr[j + 1] - self.row_ptr[j]
    }

    pub fn col_degree(&self, i: usize) -> usize {
        self.col_ptr[i + 1] - self.col_ptr[i]
    }

    pub fn max_row_degree(&self) -> usize {
        (0..self.m).map(|j| self.row_degree(j)).max().unwrap_or(0)
    }

    pub fn max_col_degree(&self) -> usize {
        (0..self.n).map(|i| self.col_degree(i)).max().unwrap_or(0)
    }

    /// Iterates `(check, variable)` pairs in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m).flat_map(move |j| self.row(j).iter().map(move |&v| (j, v as usize)))
    }

    pub fn contains(&self, check: usize, var: usize) -> bool {
        self.row(check).binary_search(&(var as u32)).is_ok()
    }

    /// Fraction of the block not consumed by parity constraints, `1 - m/n`.
    pub fn code_rate(&self) -> f64 {
        code_rate(self.m, self.n)
    }

    /// Verifies that the row and column views describe one edge set.
    pub fn check_consistency(&self) -> Result<()> {
        let mut seen = 0usize;
        for i in 0..self.n {
            let checks = self.col(i);
            if checks.is_empty() {
                return Err(Error::Contract(format!("column {i} is empty")));
            }
            if checks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Contract(format!("column {i} not strictly sorted")));
            }
            for (&c, &e) in checks.iter().zip(self.col_edges(i)) {
                let e = e as usize;
                if !self.row_edges(c as usize).contains(&e) || self.row_vars[e] as usize != i {
                    return Err(Error::Contract(format!(
                        "column {i} entry for check {c} does not match row storage"
                    )));
                }
                seen += 1;
            }
        }
        for j in 0..self.m {
            if self.row(j).windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Contract(format!("row {j} not strictly sorted")));
            }
        }
        if seen != self.edge_count() {
            return Err(Error::Contract(format!(
                "column views hold {seen} edges, rows hold {}",
                self.edge_count()
            )));
        }
        Ok(())
    }

    /// Length of the shortest cycle in the Tanner graph, or `None` if the
    /// graph is a forest.
    ///
    /// Runs a BFS from every variable node, so cost is `O(n * edges)`.
    pub fn girth(&self) -> Option<usize> {
        self.girth_from(0..self.n)
    }

    /// Shortest cycle through any of the given variable nodes. Sampling a
    /// subset of starts gives an upper bound on the girth.
    pub fn girth_from<I: IntoIterator<Item = usize>>(&self, starts: I) -> Option<usize> {
        // Nodes 0..n are variables, n..n+m checks.
        let total = self.n + self.m;
        let mut dist = vec![u32::MAX; total];
        let mut parent = vec![u32::MAX; total];
        let mut touched = Vec::new();
        let mut queue = VecDeque::new();
        let mut best: Option<usize> = None;
        for s in starts {
            for &t in &touched {
                dist[t] = u32::MAX;
                parent[t] = u32::MAX;
            }
            touched.clear();
            queue.clear();
            dist[s] = 0;
            touched.push(s);
            queue.push_back(s);
            'bfs: while let Some(x) = queue.pop_front() {
                let dx = dist[x] as usize;
                if let Some(b) = best {
                    if 2 * dx + 1 >= b {
                        break;
                    }
                }
                let neighbours: Box<dyn Iterator<Item = usize>> = if x < self.n {
                    Box::new(self.col(x).iter().map(|&c| self.n + c as usize))
                } else {
                    Box::new(self.row(x - self.n).iter().map(|&v| v as usize))
                };
                for y in neighbours {
                    if dist[y] == u32::MAX {
                        dist[y] = dist[x] + 1;
                        parent[y] = x as u32;
                        touched.push(y);
                        queue.push_back(y);
                    } else if parent[x] as usize != y {
                        let len = dx + dist[y] as usize + 1;
                        if best.is_none_or(|b| len < b) {
                            best = Some(len);
                        }
                        break 'bfs;
                    }
                }
            }
        }
        best
    }
}

/// `R = 1 - m/n`.
pub fn code_rate(m: usize, n: usize) -> f64 {
    1.0 - m as f64 / n as f64
}

/// `u` parity-check matrices sharing the same variable set and shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixEnsemble {
    matrices: Vec<ParityCheckMatrix>,
}

impl MatrixEnsemble {
    pub fn new(matrices: Vec<ParityCheckMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Contract("an ensemble needs at least one matrix".into()))?;
        let (n, m) = (first.n(), first.m());
        for (l, h) in matrices.iter().enumerate() {
            if h.n() != n || h.m() != m {
                return Err(Error::Contract(format!(
                    "matrix {l} is {}x{}, expected {m}x{n}",
                    h.m(),
                    h.n()
                )));
            }
        }
        for a in 0..matrices.len() {
            for b in a + 1..matrices.len() {
                if matrices[a] == matrices[b] {
                    return Err(Error::Construction(format!(
                        "matrices {a} and {b} have identical edge sets"
                    )));
                }
            }
        }
        Ok(MatrixEnsemble { matrices })
    }

    /// Number of matrices, `u`.
    pub fn u(&self) -> usize {
        self.matrices.len()
    }

    pub fn n(&self) -> usize {
        self.matrices[0].n()
    }

    pub fn m(&self) -> usize {
        self.matrices[0].m()
    }

    pub fn matrices(&self) -> &[ParityCheckMatrix] {
        &self.matrices
    }

    pub fn get(&self, l: usize) -> &ParityCheckMatrix {
        &self.matrices[l]
    }

    /// The first `u` members as a new ensemble.
    pub fn prefix(&self, u: usize) -> Result<Self> {
        if u == 0 || u > self.u() {
            return Err(Error::Contract(format!(
                "cannot take {u} of {} matrices",
                self.u()
            )));
        }
        Ok(MatrixEnsemble {
            matrices: self.matrices[..u].to_vec(),
        })
    }

    /// SHA-256 over the alist encodings of all members, in order.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for h in &self.matrices {
            hasher.update(to_alist_string(h).as_bytes());
        }
        hasher.finalize().into()
    }
}

/// Builds `u` PEG matrices with seeds `base_seed..base_seed + u`.
pub fn build_ensemble(
    n: usize,
    m: usize,
    profile: &DegreeProfile,
    u: usize,
    base_seed: u64,
) -> Result<MatrixEnsemble> {
    if u == 0 {
        return Err(Error::Contract("ensemble size u must be at least 1".into()));
    }
    let matrices = (0..u as u64)
        .into_par_iter()
        .map(|l| peg_construct(n, m, profile, base_seed.wrapping_add(l)))
        .collect::<Result<Vec<_>>>()?;
    MatrixEnsemble::new(matrices)
}

/// Distinct edges that appear in both matrices.
pub fn shared_edges(a: &ParityCheckMatrix, b: &ParityCheckMatrix) -> usize {
    let set: BTreeSet<(usize, usize)> = a.edges().collect();
    b.edges().filter(|e| set.contains(e)).count()
}
