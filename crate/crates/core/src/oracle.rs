//! Ground truth by brute force.
//!
//! Expected influence is computed exactly by enumerating every realization of
//! the stochastic edges (those with `0 < p < 1`). Edges with `p = 1` are
//! always present and edges with `p = 0` never are, so they add nothing to the
//! enumeration size.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};

/// Largest number of stochastic edges the enumerators accept.
pub const MAX_STOCHASTIC_EDGES: usize = 22;
/// Largest number of candidate seed sets [`exact_opt`] scores.
pub const MAX_OPT_SUBSETS: u128 = 100_000;
/// Cap on `subsets * realizations` for [`exact_opt`].
pub const MAX_OPT_WORK: u128 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactInfluence {
    pub value: f64,
    /// `2^s` for `s` stochastic edges.
    pub realizations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactOpt {
    pub value: f64,
    /// Lexicographically smallest maximizer.
    pub argmax: Vec<NodeId>,
    pub realizations: u64,
}

const ALWAYS: i32 = -1;
const NEVER: i32 = -2;

/// Per-edge presence rule plus the probability of each realization.
struct Realizations {
    /// `ALWAYS`, `NEVER`, or the edge's bit in the realization index.
    class: Vec<i32>,
    stochastic: usize,
    lo_bits: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Realizations {
    fn new(g: &WeightedDigraph) -> Result<Self> {
        let mut class = Vec::with_capacity(g.m());
        let mut probs = Vec::new();
        for e in g.edges() {
            class.push(if e.p >= 1.0 {
                ALWAYS
            } else if e.p <= 0.0 {
                NEVER
            } else {
                probs.push(e.p);
                (probs.len() - 1) as i32
            });
        }
        if probs.len() > MAX_STOCHASTIC_EDGES {
            return Err(Error::Capacity {
                what: "stochastic edge count",
                actual: probs.len() as u128,
                limit: MAX_STOCHASTIC_EDGES as u128,
            });
        }
        let lo_bits = probs.len() / 2;
        let lo = product_table(&probs[..lo_bits]);
        let hi = product_table(&probs[lo_bits..]);
        Ok(Realizations {
            class,
            stochastic: probs.len(),
            lo_bits,
            lo,
            hi,
        })
    }

    fn count(&self) -> u64 {
        1u64 << self.stochastic
    }

    #[inline]
    fn prob(&self, r: u64) -> f64 {
        let mask = (1u64 << self.lo_bits) - 1;
        self.lo[(r & mask) as usize] * self.hi[(r >> self.lo_bits) as usize]
    }

    #[inline]
    fn present(&self, edge: u32, r: u64) -> bool {
        match self.class[edge as usize] {
            ALWAYS => true,
            NEVER => false,
            bit => r >> bit & 1 == 1,
        }
    }
}

/// `table[mask]` = probability that exactly the edges in `mask` are present.
fn product_table(probs: &[f64]) -> Vec<f64> {
    let mut table = vec![1.0f64];
    for &p in probs {
        let mut next = Vec::with_capacity(table.len() * 2);
        next.extend(table.iter().map(|t| t * (1.0 - p)));
        next.extend(table.iter().map(|t| t * p));
        table = next;
    }
    table
}

/// BFS scratch reused across realizations.
struct Reach {
    mark: Vec<u64>,
    stamp: u64,
    queue: VecDeque<NodeId>,
}

impl Reach {
    fn new(n: usize) -> Self {
        Reach {
            mark: vec![0; n],
            stamp: 0,
            queue: VecDeque::new(),
        }
    }

    /// Visits everything reachable from `seeds` in realization `r`, calling
    /// `visit` once per vertex. Returns the number reached.
    fn run(
        &mut self,
        g: &WeightedDigraph,
        real: &Realizations,
        r: u64,
        seeds: &[NodeId],
        mut visit: impl FnMut(NodeId),
    ) -> usize {
        self.stamp += 1;
        let stamp = self.stamp;
        self.queue.clear();
        let mut count = 0;
        for &s in seeds {
            if self.mark[s.index()] != stamp {
                self.mark[s.index()] = stamp;
                self.queue.push_back(s);
            }
        }
        while let Some(v) = self.queue.pop_front() {
            count += 1;
            visit(v);
            for l in g.out_links(v) {
                if self.mark[l.node.index()] != stamp && real.present(l.edge, r) {
                    self.mark[l.node.index()] = stamp;
                    self.queue.push_back(l.node);
                }
            }
        }
        count
    }
}

/// Exact `E[I(S)]`: the probability-weighted reach of `seeds` summed over all
/// realizations, in realization-index order.
pub fn exact_influence(g: &WeightedDigraph, seeds: &[NodeId]) -> Result<ExactInfluence> {
    seeds.iter().try_for_each(|&s| g.check_node(s))?;
    let real = Realizations::new(g)?;
    let mut reach = Reach::new(g.n());
    let mut value = 0.0;
    for r in 0..real.count() {
        let reached = reach.run(g, &real, r, seeds, |_| {});
        value += real.prob(r) * reached as f64;
    }
    Ok(ExactInfluence {
        value,
        realizations: real.count(),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `k`-subsets of `0..n` in lexicographic order, flattened.
fn combinations(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut idx: Vec<u32> = (0..k as u32).collect();
    loop {
        out.extend_from_slice(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if (idx[i] as usize) < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact `OPT = max_{|S| = k} E[I(S)]` by scoring every `k`-subset in every
/// realization. Reach sets are computed once per vertex per realization and
/// shared by all subsets. `k > n` is treated as `k = n`.
pub fn exact_opt(g: &WeightedDigraph, k: usize) -> Result<ExactOpt> {
    if k < 1 {
        return Err(Error::domain("k must be at least 1"));
    }
    let n = g.n();
    if n == 0 {
        return Err(Error::domain("graph has no vertices"));
    }
    let k = k.min(n);
    let subsets = binomial(n, k);
    if subsets > MAX_OPT_SUBSETS {
        return Err(Error::Capacity {
            what: "candidate seed sets",
            actual: subsets,
            limit: MAX_OPT_SUBSETS,
        });
    }
    let real = Realizations::new(g)?;
    let work = subsets * real.count() as u128;
    if work > MAX_OPT_WORK {
        return Err(Error::Capacity {
            what: "subset-realization pairs",
            actual: work,
            limit: MAX_OPT_WORK,
        });
    }

    let combos = combinations(n, k);
    let words = n.div_ceil(64);
    let mut reach_bits = vec![0u64; n * words];
    let mut acc = vec![0u64; words];
    let mut value = vec![0.0f64; subsets as usize];
    let mut reach = Reach::new(n);

    for r in 0..real.count() {
        for v in 0..n {
            let row = &mut reach_bits[v * words..(v + 1) * words];
            row.iter_mut().for_each(|w| *w = 0);
            reach.run(g, &real, r, &[NodeId(v as u32)], |u| {
                row[u.index() / 64] |= 1 << (u.index() % 64);
            });
        }
        let p = real.prob(r);
        for (i, subset) in combos.chunks_exact(k).enumerate() {
            acc.iter_mut().for_each(|w| *w = 0);
            for &v in subset {
                let row = &reach_bits[v as usize * words..(v as usize + 1) * words];
                acc.iter_mut().zip(row).for_each(|(a, b)| *a |= b);
            }
            let covered: u32 = acc.iter().map(|w| w.count_ones()).sum();
            value[i] += p * covered as f64;
        }
    }

    // values of tied sets can differ in the last bits
    let tol = 1e-12 * n as f64;
    let mut best = 0;
    for i in 1..value.len() {
        if value[i] > value[best] + tol {
            best = i;
        }
    }
    Ok(ExactOpt {
        value: value[best],
        argmax: combos[best * k..(best + 1) * k]
            .iter()
            .map(|&v| NodeId(v))
            .collect(),
        realizations: real.count(),
    })
}

/// Monte-Carlo sample size from the two-sided multiplicative Chernoff bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffPlan {
    pub lambda: f64,
    pub confidence: f64,
    pub trials: u64,
}

/// `2 exp(-N lambda^2 / 4)`: the union of the lower and upper tail bounds at
/// relative error `lambda`, taking the mean as 1.
pub fn chernoff_failure_bound(lambda: f64, trials: u64) -> f64 {
    2.0 * (-(trials as f64) * lambda * lambda / 4.0).exp()
}

/// Smallest `N` with `2 exp(-N lambda^2 / 4) <= 1 - confidence`.
pub fn chernoff_trials(lambda: f64, confidence: f64) -> Result<ChernoffPlan> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(format!("lambda {lambda} outside (0, 1)")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let target = 1.0 - confidence;
    let closed = (4.0 * (2.0 / target).ln() / (lambda * lambda)).ceil().max(1.0) as u64;
    let mut trials = closed;
    while trials > 1 && chernoff_failure_bound(lambda, trials - 1) <= target {
        trials -= 1;
    }
    while chernoff_failure_bound(lambda, trials) > target {
        trials += 1;
    }
    Ok(ChernoffPlan {
        lambda,
        confidence,
        trials,
    })
}
