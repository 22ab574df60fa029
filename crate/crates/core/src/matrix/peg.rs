//! Progressive edge growth.
//!
//! Variable nodes are processed in order of non-decreasing target degree.
//! Each new edge of a variable goes to a check node that is as far as
//! possible from it in the current graph: either one the BFS never reaches,
//! or one first reached at the level where the BFS covers every check.
//! Among those candidates the lowest current check degree wins, and exact
//! ties are broken uniformly at random from the seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DegreeProfile, ParityCheckMatrix};
use crate::error::{Error, Result};

struct Growth {
    /// Fixed-stride variable adjacency: `var_checks[v * stride..][..var_len[v]]`.
    var_checks: Vec<u32>,
    var_len: Vec<u32>,
    stride: usize,
    /// Fixed-stride check adjacency, re-laid out when a check outgrows it.
    check_vars: Vec<u32>,
    check_stride: usize,
    buckets: DegreeBuckets,
    check_mark: Vec<u32>,
    var_mark: Vec<u32>,
    epoch: u32,
    frontier: Vec<u32>,
    next: Vec<u32>,
}

/// Candidates for the next edge of a variable.
enum Farthest {
    /// Every check not carrying the current BFS mark.
    Unreached,
    /// The checks first reached at the level that completed the cover,
    /// left in `Growth::next`.
    Level,
}

impl Growth {
    fn new(n: usize, m: usize, degrees: &[usize]) -> Self {
        let stride = degrees.iter().copied().max().unwrap_or(0);
        let check_stride = degrees.iter().sum::<usize>().div_ceil(m) + 2;
        Growth {
            var_checks: vec![0; n * stride],
            var_len: vec![0; n],
            stride,
            check_vars: vec![0; m * check_stride],
            check_stride,
            buckets: DegreeBuckets::new(m),
            check_mark: vec![0; m],
            var_mark: vec![0; n],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    #[inline]
    fn checks_of(&self, v: usize) -> &[u32] {
        &self.var_checks[v * self.stride..v * self.stride + self.var_len[v] as usize]
    }

    fn connect(&mut self, v: usize, c: usize) {
        self.var_checks[v * self.stride + self.var_len[v] as usize] = c as u32;
        self.var_len[v] += 1;
        let d = self.buckets.degree[c] as usize;
        if d == self.check_stride {
            self.widen_checks();
        }
        self.check_vars[c * self.check_stride + d] = v as u32;
        self.buckets.increment(c);
    }

    fn widen_checks(&mut self) {
        let (old, new) = (self.check_stride, self.check_stride * 2);
        let mut wide = vec![0u32; self.buckets.degree.len() * new];
        for (c, &d) in self.buckets.degree.iter().enumerate() {
            wide[c * new..c * new + d as usize]
                .copy_from_slice(&self.check_vars[c * old..c * old + d as usize]);
        }
        self.check_vars = wide;
        self.check_stride = new;
    }

    #[inline]
    fn vars_of(&self, c: usize) -> &[u32] {
        let lo = c * self.check_stride;
        &self.check_vars[lo..lo + self.buckets.degree[c] as usize]
    }

    /// Runs the BFS from `v` and reports where its next edge may go.
    fn farthest_checks(&mut self, v: usize) -> Farthest {
        let m = self.buckets.degree.len();
        self.epoch += 1;
        let epoch = self.epoch;
        self.var_mark[v] = epoch;
        self.frontier.clear();
        let (lo, len) = (v * self.stride, self.var_len[v] as usize);
        for &c in &self.var_checks[lo..lo + len] {
            self.check_mark[c as usize] = epoch;
            self.frontier.push(c);
        }
        if self.frontier.is_empty() {
            return Farthest::Unreached;
        }
        let mut reached = self.frontier.len();
        loop {
            self.next.clear();
            let missing = m - reached;
            for &c in &self.frontier {
                let lo = c as usize * self.check_stride;
                for &w in &self.check_vars[lo..lo + self.buckets.degree[c as usize] as usize] {
                    let w = w as usize;
                    if self.var_mark[w] == epoch {
                        continue;
                    }
                    self.var_mark[w] = epoch;
                    let lo = w * self.stride;
                    for &c2 in &self.var_checks[lo..lo + self.var_len[w] as usize] {
                        if self.check_mark[c2 as usize] != epoch {
                            self.check_mark[c2 as usize] = epoch;
                            self.next.push(c2);
                        }
                    }
                    if self.next.len() == missing {
                        // Cover complete; the rest of the level adds nothing.
                        return Farthest::Level;
                    }
                }
            }
            if self.next.is_empty() {
                return Farthest::Unreached;
            }
            reached += self.next.len();
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }
}

/// Check nodes grouped by current degree, with O(1) moves between groups.
struct DegreeBuckets {
    buckets: Vec<Vec<u32>>,
    degree: Vec<u32>,
    slot: Vec<u32>,
}

impl DegreeBuckets {
    fn new(m: usize) -> Self {
        DegreeBuckets {
            buckets: vec![(0..m as u32).collect()],
            degree: vec![0; m],
            slot: (0..m as u32).collect(),
        }
    }

    fn increment(&mut self, c: usize) {
        let d = self.degree[c] as usize;
        let pos = self.slot[c] as usize;
        let bucket = &mut self.buckets[d];
        bucket.swap_remove(pos);
        if let Some(&moved) = bucket.get(pos) {
            self.slot[moved as usize] = pos as u32;
        }
        if self.buckets.len() == d + 1 {
            self.buckets.push(Vec::new());
        }
        self.slot[c] = self.buckets[d + 1].len() as u32;
        self.buckets[d + 1].push(c as u32);
        self.degree[c] += 1;
    }

    /// Uniform choice among the lowest-degree checks without `mark == epoch`.
    fn pick_unmarked(&self, mark: &[u32], epoch: u32, rng: &mut ChaCha8Rng) -> Option<usize> {
        const PROBES: usize = 16;
        for bucket in self.buckets.iter().filter(|b| !b.is_empty()) {
            // Rejection sampling is uniform over the unmarked members; fall
            // back to a scan when the bucket is mostly marked.
            for _ in 0..PROBES {
                let c = bucket[rng.gen_range(0..bucket.len())] as usize;
                if mark[c] != epoch {
                    return Some(c);
                }
            }
            let free: Vec<u32> = bucket.iter().copied().filter(|&c| mark[c as usize] != epoch).collect();
            if !free.is_empty() {
                return Some(free[rng.gen_range(0..free.len())] as usize);
            }
        }
        None
    }
}

/// Constructs an `m x n` parity-check matrix by progressive edge growth.
///
/// The result has exactly the requested column degrees and no repeated
/// edges, and depends only on the arguments.
pub fn peg_construct(
    n: usize,
    m: usize,
    profile: &DegreeProfile,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    let degrees = profile.column_degrees(n, m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| degrees[i]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Growth::new(n, m, &degrees);
    for &v in &order {
        for _ in 0..degrees[v] {
            let c = match g.farthest_checks(v) {
                Farthest::Level => pick_least_loaded(&g.next, &g.buckets.degree, &mut rng),
                Farthest::Unreached => g
                    .buckets
                    .pick_unmarked(&g.check_mark, g.epoch, &mut rng)
                    .ok_or_else(|| Error::Construction(format!("no free check for variable {v}")))?,
            };
            debug_assert!(!g.checks_of(v).contains(&(c as u32)));
            g.connect(v, c);
        }
    }

    let edges = (0..m).flat_map(|c| g.vars_of(c).iter().map(move |&v| (c, v as usize)));
    ParityCheckMatrix::from_edges(n, m, edges)
}

/// Minimum-degree candidate, uniform among ties (reservoir sampling).
fn pick_least_loaded(candidates: &[u32], degree: &[u32], rng: &mut ChaCha8Rng) -> usize {
    debug_assert!(!candidates.is_empty());
    let mut best = u32::MAX;
    let mut chosen = 0usize;
    let mut ties = 0u32;
    for &c in candidates {
        let d = degree[c as usize];
        if d < best {
            best = d;
            chosen = c as usize;
            ties = 1;
        } else if d == best {
            ties += 1;
            if rng.gen_range(0..ties) == 0 {
                chosen = c as usize;
            }
        }
    }
    chosen
}
