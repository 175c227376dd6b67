//! Single-realization cascades by coin-flipping DFS.
//!
//! The edges of a realization are not drawn up front. Each edge's coin is
//! decided the first time the traversal examines it; an edge is examined once,
//! when its tail is expanded. Every examined edge costs one step, whether or
//! not it is traversed, so the step count of a cascade equals the summed
//! (direction-appropriate) degree of the vertices it reaches.

use crate::error::{Error, Result};
use crate::graph::{Direction, Link, NodeId, WeightedDigraph};
use crate::rng::RngStream;

/// One realized influenced set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeOutcome {
    /// Influenced vertices in discovery order, seeds first.
    pub influenced: Vec<NodeId>,
    /// Edge coins flipped.
    pub steps: u64,
}

impl CascadeOutcome {
    pub fn len(&self) -> usize {
        self.influenced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.influenced.is_empty()
    }

    pub fn sorted(&self) -> Vec<NodeId> {
        let mut v = self.influenced.clone();
        v.sort_unstable();
        v
    }
}

/// Reusable traversal scratch space: an epoch-stamped visited array and an
/// explicit stack. Reusing one `Simulator` keeps per-cascade cost proportional
/// to the cascade, not to `n`.
#[derive(Clone, Debug)]
pub struct Simulator {
    mark: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
}

impl Simulator {
    pub fn new(n: usize) -> Self {
        Simulator {
            mark: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    fn next_epoch(&mut self) {
        if self.epoch == u32::MAX {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    /// Runs one cascade from `seeds`, appending influenced vertices to `out`
    /// and returning the number of edges examined. `coin` decides each examined
    /// edge whose head is not yet influenced; edges into already influenced
    /// vertices still count as a step but need no coin.
    ///
    /// Seeds must be valid ids of `g`; duplicates are ignored.
    pub fn run<F>(
        &mut self,
        g: &WeightedDigraph,
        seeds: &[NodeId],
        dir: Direction,
        mut coin: F,
        out: &mut Vec<NodeId>,
    ) -> u64
    where
        F: FnMut(&Link) -> bool,
    {
        if self.mark.len() < g.n() {
            self.mark.resize(g.n(), 0);
        }
        self.next_epoch();
        let epoch = self.epoch;
        self.stack.clear();
        for &s in seeds {
            let slot = &mut self.mark[s.index()];
            if *slot != epoch {
                *slot = epoch;
                out.push(s);
                self.stack.push(s.0);
            }
        }
        let mut steps = 0u64;
        while let Some(v) = self.stack.pop() {
            let links = g.links(NodeId(v), dir);
            steps += links.len() as u64;
            for link in links {
                let w = link.node.index();
                if self.mark[w] != epoch && coin(link) {
                    self.mark[w] = epoch;
                    out.push(link.node);
                    self.stack.push(link.node.0);
                }
            }
        }
        steps
    }
}

fn check_seeds(g: &WeightedDigraph, seeds: &[NodeId]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::domain("seed set must be nonempty"));
    }
    seeds.iter().try_for_each(|&s| g.check_node(s))
}

/// Realizes `C_g(seeds)` for one `g` drawn from the graph's distribution
/// (or from its transpose).
pub fn simulate(
    g: &WeightedDigraph,
    seeds: &[NodeId],
    dir: Direction,
    rng: &mut RngStream,
) -> Result<CascadeOutcome> {
    simulate_with(g, seeds, dir, |link| rng.coin(link.p))
}

/// [`simulate`] with caller-supplied coins, e.g. a fixed realization keyed by
/// `Link::edge`.
pub fn simulate_with<F>(
    g: &WeightedDigraph,
    seeds: &[NodeId],
    dir: Direction,
    coin: F,
) -> Result<CascadeOutcome>
where
    F: FnMut(&Link) -> bool,
{
    check_seeds(g, seeds)?;
    let mut influenced = Vec::new();
    let steps = Simulator::new(g.n()).run(g, seeds, dir, coin, &mut influenced);
    Ok(CascadeOutcome { influenced, steps })
}

/// Monte-Carlo estimate of the expected influence of a seed set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub trials: u64,
    pub steps_total: u64,
}

pub fn estimate_influence_mc(
    g: &WeightedDigraph,
    seeds: &[NodeId],
    num_trials: u64,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    check_seeds(g, seeds)?;
    if num_trials == 0 {
        return Err(Error::domain("num_trials must be at least 1"));
    }
    let mut sim = Simulator::new(g.n());
    let mut buf = Vec::new();
    let mut total = 0u64;
    let mut steps_total = 0u64;
    for _ in 0..num_trials {
        buf.clear();
        steps_total += sim.run(g, seeds, Direction::Forward, |l| rng.coin(l.p), &mut buf);
        total += buf.len() as u64;
    }
    Ok(McEstimate {
        mean: total as f64 / num_trials as f64,
        trials: num_trials,
        steps_total,
    })
}
