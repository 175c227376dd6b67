//! Reverse-reachable hypergraph sketch.
//!
//! Each hyperedge is the set of vertices reached by a transpose cascade from a
//! uniformly random root, so a vertex set `S` meets a random hyperedge with
//! probability `E[I(S)] / n`. The sketch keeps its hyperedges as one flat,
//! per-edge sorted member array plus per-vertex incidence lists.
//!
//! Construction runs under a step budget `R`. Picking a root costs one step and
//! each examined edge coin costs one more. The budget is checked only between
//! hyperedges, so the last one may overshoot `R` by at most its own cost.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::cascade::Simulator;
use crate::error::{Error, Result};
use crate::graph::{Direction, NodeId, WeightedDigraph};
use crate::rng::{tag, RngStream};

/// Total step allowance for sketch construction. Always at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StepBudget(u64);

impl StepBudget {
    pub fn new(steps: u64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::domain("step budget must be at least 1"));
        }
        Ok(StepBudget(steps))
    }

    /// Rounds a real-valued budget up, saturating at `u64::MAX`.
    pub fn from_real(steps: f64) -> Result<Self> {
        if steps.is_nan() {
            return Err(Error::domain("step budget is NaN"));
        }
        let r = steps.ceil();
        let r = if r >= u64::MAX as f64 { u64::MAX } else { r.max(1.0) as u64 };
        Self::new(r)
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RRSketch {
    n: usize,
    members: Vec<NodeId>,
    offsets: Vec<usize>,
    roots: Vec<NodeId>,
    // CSR over hyperedge ids per vertex; covers the first `indexed` edges
    inc_offsets: Vec<usize>,
    inc: Vec<u32>,
    indexed: usize,
    steps_used: u64,
    budget: u64,
    last_cost: u64,
}

impl RRSketch {
    fn with_nodes(n: usize) -> Self {
        RRSketch {
            n,
            members: Vec::new(),
            offsets: vec![0],
            roots: Vec::new(),
            inc_offsets: vec![0; n + 1],
            inc: Vec::new(),
            indexed: 0,
            steps_used: 0,
            budget: 0,
            last_cost: 0,
        }
    }

    /// Builds a sketch from explicit hyperedges. Members are sorted and
    /// deduplicated; the first listed member is recorded as the root.
    pub fn from_sets<I, S>(n: usize, sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = u32>,
    {
        if n == 0 {
            return Err(Error::domain("sketch needs at least one vertex"));
        }
        let mut sk = Self::with_nodes(n);
        for set in sets {
            let mut members: Vec<NodeId> = set.into_iter().map(NodeId).collect();
            let Some(&root) = members.first() else {
                return Err(Error::domain("hyperedges must be nonempty"));
            };
            if let Some(bad) = members.iter().find(|v| v.index() >= n) {
                return Err(Error::Bounds {
                    node: bad.0 as u64,
                    n,
                });
            }
            members.sort_unstable();
            members.dedup();
            sk.push(root, &mut members);
        }
        sk.reindex();
        Ok(sk)
    }

    /// Appends one hyperedge; `set` must be duplicate-free.
    fn push(&mut self, root: NodeId, set: &mut [NodeId]) {
        set.sort_unstable();
        assert!(self.roots.len() < u32::MAX as usize, "hyperedge count exceeds u32 id space");
        self.members.extend_from_slice(set);
        self.offsets.push(self.members.len());
        self.roots.push(root);
    }

    /// Node count of the source graph.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of hyperedges, `m(H)`.
    pub fn num_edges(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Sum of hyperedge sizes, equal to the sum of vertex degrees.
    pub fn total_size(&self) -> usize {
        self.members.len()
    }

    pub fn edge(&self, i: usize) -> &[NodeId] {
        &self.members[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[NodeId]> + '_ {
        self.offsets.windows(2).map(|w| &self.members[w[0]..w[1]])
    }

    pub fn root(&self, i: usize) -> NodeId {
        self.roots[i]
    }

    /// Rebuilds the incidence index by counting sort over the members.
    fn reindex(&mut self) {
        if self.indexed == self.roots.len() {
            return;
        }
        let n = self.n;
        let mut offsets = vec![0usize; n + 1];
        for v in &self.members {
            offsets[v.index() + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        self.inc = Vec::new();
        let mut inc = vec![0u32; self.members.len()];
        let mut cursor = offsets.clone();
        for (e, w) in self.offsets.windows(2).enumerate() {
            for v in &self.members[w[0]..w[1]] {
                let c = &mut cursor[v.index()];
                inc[*c] = e as u32;
                *c += 1;
            }
        }
        self.inc_offsets = offsets;
        self.inc = inc;
        self.indexed = self.roots.len();
    }

    /// Ids of the hyperedges containing `v`, ascending.
    pub fn incidence(&self, v: NodeId) -> &[u32] {
        debug_assert_eq!(self.indexed, self.roots.len());
        &self.inc[self.inc_offsets[v.index()]..self.inc_offsets[v.index() + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.inc_offsets[v.index() + 1] - self.inc_offsets[v.index()]
    }

    pub fn steps_used(&self) -> u64 {
        self.steps_used
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Step cost of the most recently sampled hyperedge.
    pub fn last_cost(&self) -> u64 {
        self.last_cost
    }

    fn check_set(&self, set: &[NodeId]) -> Result<()> {
        match set.iter().find(|v| v.index() >= self.n) {
            Some(v) => Err(Error::Bounds {
                node: v.0 as u64,
                n: self.n,
            }),
            None => Ok(()),
        }
    }

    /// `deg_H(S)`: hyperedges that meet `set` (not the incidence sum).
    pub fn coverage(&self, set: &[NodeId]) -> Result<usize> {
        self.check_set(set)?;
        let mut hit = vec![0u64; self.num_edges().div_ceil(64)];
        let mut count = 0;
        for v in set {
            for &e in self.incidence(*v) {
                let (w, b) = (e as usize / 64, e % 64);
                if hit[w] & (1 << b) == 0 {
                    hit[w] |= 1 << b;
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// `n * deg_H(S) / m(H)`, the sketch estimate of `E[I(S)]`.
    pub fn estimate_set_influence(&self, set: &[NodeId]) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::State("sketch has no hyperedges".into()));
        }
        let covered = self.coverage(set)?;
        Ok(self.n as f64 * covered as f64 / self.num_edges() as f64)
    }

    /// Draws a vertex with probability proportional to its degree by picking a
    /// uniform position in the flat member array.
    pub fn sample_degree_proportional(&self, rng: &mut RngStream) -> Result<NodeId> {
        if self.members.is_empty() {
            return Err(Error::State("sketch has no hyperedges".into()));
        }
        Ok(self.members[rng.below(self.members.len())])
    }

    /// Vertex of maximum degree (smallest id among ties) and that degree.
    pub fn max_degree(&self) -> (NodeId, usize) {
        let mut best = (NodeId(0), 0usize);
        for v in 0..self.n {
            let d = self.inc_offsets[v + 1] - self.inc_offsets[v];
            if d > best.1 {
                best = (NodeId(v as u32), d);
            }
        }
        best
    }

    /// Moves all hyperedges of `other` (same `n`) after this sketch's own.
    pub fn append(&mut self, other: RRSketch) -> Result<()> {
        if other.n != self.n {
            return Err(Error::domain("cannot merge sketches over different node counts"));
        }
        let base = self.members.len();
        self.members.extend_from_slice(&other.members);
        self.offsets.extend(other.offsets[1..].iter().map(|o| o + base));
        self.roots.extend_from_slice(&other.roots);
        self.reindex();
        self.steps_used += other.steps_used;
        Ok(())
    }

    /// Debug dump: a `rrsketch n=<n> m=<m(H)> steps=<steps>` header, then one
    /// line of space-separated sorted ids per hyperedge.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "rrsketch n={} m={} steps={}",
            self.n,
            self.num_edges(),
            self.steps_used
        )?;
        for e in self.edges() {
            let mut first = true;
            for v in e {
                if !first {
                    w.write_all(b" ")?;
                }
                write!(w, "{v}")?;
                first = false;
            }
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses [`write_dump`](Self::write_dump) output. Roots are not part of
    /// the dump; each hyperedge's smallest member stands in for its root.
    pub fn read_dump<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: "missing header".into(),
            })??;
        let mut n = None;
        let mut m = None;
        let mut steps = None;
        let mut parts = header.split(' ');
        if parts.next() != Some("rrsketch") {
            return Err(Error::Parse {
                line: 1,
                msg: "header must start with `rrsketch`".into(),
            });
        }
        for part in parts {
            let (key, val) = part.split_once('=').ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("bad header field {part:?}"),
            })?;
            let val: u64 = val.parse().map_err(|e| Error::Parse {
                line: 1,
                msg: format!("bad header value {part:?}: {e}"),
            })?;
            match key {
                "n" => n = Some(val as usize),
                "m" => m = Some(val as usize),
                "steps" => steps = Some(val),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("unknown header field {key:?}"),
                    })
                }
            }
        }
        let (Some(n), Some(m), Some(steps)) = (n, m, steps) else {
            return Err(Error::Parse {
                line: 1,
                msg: "header needs n, m and steps".into(),
            });
        };
        let mut sets = Vec::with_capacity(m);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let set = line
                .split(' ')
                .map(|t| {
                    t.parse::<u32>().map_err(|e| Error::Parse {
                        line: i + 2,
                        msg: format!("bad node id {t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            sets.push(set);
        }
        if sets.len() != m {
            return Err(Error::Parse {
                line: sets.len() + 1,
                msg: format!("header declares {m} hyperedges, found {}", sets.len()),
            });
        }
        let mut sk = Self::from_sets(n, sets)?;
        sk.steps_used = steps;
        Ok(sk)
    }
}

/// A power-of-two step threshold crossed during construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    /// The threshold is `2^index`.
    pub index: u32,
    /// Steps used when the crossing hyperedge completed.
    pub steps: u64,
}

impl Checkpoint {
    pub fn threshold(&self) -> u64 {
        1u64 << self.index
    }
}

/// First checkpoint exponent; thresholds are `2^1, 2^2, ...`.
pub const FIRST_CHECKPOINT: u32 = 1;

/// Observer for [`build_hypergraph_with`].
pub trait BuildHooks {
    /// Called once per threshold, right after the first hyperedge that brings
    /// the step total to or past `2^index`. Several thresholds crossed by one
    /// hyperedge are reported in increasing order.
    fn on_checkpoint(&mut self, _cp: Checkpoint, _sketch: &RRSketch) {}

    /// Polled between hyperedges; returning true ends construction early.
    fn should_stop(&mut self, _steps: u64) -> bool {
        false
    }
}


/// Incremental sketch construction over a fixed graph.
pub struct SketchBuilder<'g> {
    g: &'g WeightedDigraph,
    sim: Simulator,
    buf: Vec<NodeId>,
    sketch: RRSketch,
    next_checkpoint: u32,
}

impl<'g> SketchBuilder<'g> {
    pub fn new(g: &'g WeightedDigraph, budget: StepBudget) -> Result<Self> {
        if g.n() == 0 {
            return Err(Error::domain("cannot sketch a graph with no vertices"));
        }
        let mut sketch = RRSketch::with_nodes(g.n());
        sketch.budget = budget.get();
        Ok(SketchBuilder {
            g,
            sim: Simulator::new(g.n()),
            buf: Vec::new(),
            sketch,
            next_checkpoint: FIRST_CHECKPOINT,
        })
    }

    /// Samples one RR-set and returns its cost in steps.
    pub fn add_rr_set(&mut self, rng: &mut RngStream) -> u64 {
        let root = NodeId(rng.below(self.g.n()) as u32);
        self.buf.clear();
        let flips = self.sim.run(
            self.g,
            &[root],
            Direction::Transpose,
            |l| rng.coin(l.p),
            &mut self.buf,
        );
        let cost = 1 + flips;
        self.sketch.push(root, &mut self.buf);
        self.sketch.steps_used += cost;
        self.sketch.last_cost = cost;
        cost
    }

    /// Checkpoints newly reached by the current step total.
    pub fn crossed_checkpoints(&mut self) -> Vec<Checkpoint> {
        let steps = self.sketch.steps_used;
        let mut out = Vec::new();
        while self.next_checkpoint < 64 && (1u64 << self.next_checkpoint) <= steps {
            out.push(Checkpoint {
                index: self.next_checkpoint,
                steps,
            });
            self.next_checkpoint += 1;
        }
        out
    }

    pub fn steps(&self) -> u64 {
        self.sketch.steps_used
    }

    pub fn budget_reached(&self) -> bool {
        self.sketch.steps_used >= self.sketch.budget
    }

    /// The sketch so far, with its incidence index brought up to date.
    pub fn sketch(&mut self) -> &RRSketch {
        self.sketch.reindex();
        &self.sketch
    }

    pub fn finish(mut self) -> RRSketch {
        self.sketch.reindex();
        self.sketch
    }
}

/// Samples RR-sets until the step total reaches the budget. At least one set
/// is always produced.
pub fn build_hypergraph(
    g: &WeightedDigraph,
    budget: StepBudget,
    rng: &mut RngStream,
) -> Result<RRSketch> {
    let mut b = SketchBuilder::new(g, budget)?;
    loop {
        b.add_rr_set(rng);
        if b.budget_reached() {
            break;
        }
    }
    Ok(b.finish())
}

/// [`build_hypergraph`] with checkpoint callbacks and an early-stop poll.
pub fn build_hypergraph_with<H: BuildHooks + ?Sized>(
    g: &WeightedDigraph,
    budget: StepBudget,
    rng: &mut RngStream,
    hooks: &mut H,
) -> Result<RRSketch> {
    let mut b = SketchBuilder::new(g, budget)?;
    loop {
        b.add_rr_set(rng);
        for cp in b.crossed_checkpoints() {
            hooks.on_checkpoint(cp, b.sketch());
        }
        if b.budget_reached() || hooks.should_stop(b.steps()) {
            break;
        }
    }
    Ok(b.finish())
}

/// Multi-threaded construction. Worker `w` draws from stream
/// `(SKETCH_WORKER, w)` and stops once a shared step counter reaches the
/// budget; results are concatenated in worker order. Budget enforcement is
/// approximate (each worker may overshoot by one RR-set) and the output is
/// reproducible only for a fixed worker count.
pub fn build_hypergraph_parallel(
    g: &WeightedDigraph,
    budget: StepBudget,
    seed: u64,
    workers: usize,
) -> Result<RRSketch> {
    let workers = workers.max(1);
    let shared = AtomicU64::new(0);
    let parts: Vec<Result<RRSketch>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let shared = &shared;
                scope.spawn(move || {
                    let mut rng = RngStream::tagged(seed, tag::SKETCH_WORKER, w as u32);
                    let mut b = SketchBuilder::new(g, budget)?;
                    loop {
                        let cost = b.add_rr_set(&mut rng);
                        if shared.fetch_add(cost, Ordering::Relaxed) + cost >= budget.get() {
                            break;
                        }
                    }
                    Ok(b.finish())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sketch worker panicked"))
            .collect()
    });
    let mut parts = parts.into_iter();
    let mut sketch = parts.next().expect("at least one worker")?;
    for part in parts {
        sketch.append(part?)?;
    }
    sketch.budget = budget.get();
    Ok(sketch)
}
