//! The maximizers.
//!
//! * [`maximize`] builds a sketch under `R = ceil(l * 144 (m+n) eps^-3 ln n)`
//!   steps and runs greedy coverage on it. With several repetitions it keeps the
//!   sketch that finished with the most hyperedges.
//! * [`maximize_sublinear`] uses `R = ceil(beta * 144 C (m+n) ln n)` with
//!   `C = 48 * 6^3` and mixes greedy picks with one vertex drawn in proportion to
//!   its sketch degree.
//! * [`maximize_anytime`] runs the sublinear algorithm at `beta = 1`, solving
//!   from the partial sketch at every power-of-two step count, and returns the
//!   latest solution when told to stop.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};
use crate::rng::{tag, RngStream};
use crate::select::{build_seed_set, SeedSet};
use crate::sketch::{
    build_hypergraph, build_hypergraph_parallel, build_hypergraph_with, BuildHooks, Checkpoint,
    RRSketch, StepBudget,
};

/// `C = 48 * 6^3`.
pub const SUBLINEAR_C: u64 = 48 * 6 * 6 * 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximizeParams {
    /// Precision, in `(0, 1)`.
    pub epsilon: f64,
    pub k: usize,
    pub seed: u64,
    /// Independent sketch builds; the one with most hyperedges is used.
    pub repetitions: u32,
    /// Budget multiplier `l`.
    pub ell: u32,
    /// Sketch workers per repetition. 1 is the deterministic reference path.
    pub workers: usize,
}

impl MaximizeParams {
    pub fn new(epsilon: f64, k: usize, seed: u64) -> Self {
        MaximizeParams {
            epsilon,
            k,
            seed,
            repetitions: 1,
            ell: 1,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::domain(format!(
                "epsilon {} outside (0, 1)",
                self.epsilon
            )));
        }
        if self.k < 1 {
            return Err(Error::domain("k must be at least 1"));
        }
        if self.repetitions < 1 || self.ell < 1 {
            return Err(Error::domain("repetitions and ell must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SublinearParams {
    /// Approximation parameter, in `(0, 1]`.
    pub beta: f64,
    pub k: usize,
    pub seed: u64,
}

impl SublinearParams {
    pub fn new(beta: f64, k: usize, seed: u64) -> Self {
        SublinearParams { beta, k, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::domain(format!("beta {} outside (0, 1]", self.beta)));
        }
        if self.k < 1 {
            return Err(Error::domain("k must be at least 1"));
        }
        Ok(())
    }
}

/// Which rule produced the returned set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Greedy,
    DegreeSample,
    Union,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Greedy => "greedy",
            Branch::DegreeSample => "degree-sample",
            Branch::Union => "union",
        }
    }
}

/// Summary of one sketch build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SketchStats {
    pub hyperedges: usize,
    pub steps_used: u64,
    pub budget: u64,
    /// Cost of the hyperedge that ended construction.
    pub last_cost: u64,
    pub max_degree: usize,
}

impl SketchStats {
    fn of(sk: &RRSketch) -> Self {
        SketchStats {
            hyperedges: sk.num_edges(),
            steps_used: sk.steps_used(),
            budget: sk.budget(),
            last_cost: sk.last_cost(),
            max_degree: sk.max_degree().1,
        }
    }

    /// `steps_used <= budget + last_cost`, i.e. only the final hyperedge ran
    /// past the budget.
    pub fn within_budget(&self) -> bool {
        self.steps_used <= self.budget + self.last_cost
            && self.steps_used.saturating_sub(self.last_cost) < self.budget.max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub seed_set: SeedSet,
    pub branch: Branch,
    /// One entry per sketch built; empty when the answer was trivial.
    pub sketches: Vec<SketchStats>,
    /// Index into `sketches` of the sketch the answer came from.
    pub chosen: Option<usize>,
}

impl Solution {
    pub fn seeds(&self) -> &[NodeId] {
        &self.seed_set.seeds
    }

    /// `m(H)` of the sketch used, 0 for trivial answers.
    pub fn hyperedges(&self) -> usize {
        self.chosen.map_or(0, |i| self.sketches[i].hyperedges)
    }

    /// Simulation steps over all sketch builds.
    pub fn steps(&self) -> u64 {
        self.sketches.iter().map(|s| s.steps_used).sum()
    }

    fn everything(n: usize) -> Self {
        Solution {
            seed_set: all_vertices(n),
            branch: Branch::Greedy,
            sketches: Vec::new(),
            chosen: None,
        }
    }
}

fn all_vertices(n: usize) -> SeedSet {
    SeedSet {
        seeds: (0..n as u32).map(NodeId).collect(),
        covered_edges: 0,
        estimate: n as f64,
        clamped_from: None,
    }
}

fn trivial(g: &WeightedDigraph, k: usize) -> Result<bool> {
    if g.n() == 0 {
        return Err(Error::domain("graph has no vertices"));
    }
    Ok(g.n() < 2 || k >= g.n())
}

fn size_term(g: &WeightedDigraph) -> f64 {
    (g.m() + g.n()) as f64 * (g.n() as f64).ln()
}

/// `ceil(ell * 144 (m+n) eps^-3 ln n)`.
pub fn maximize_budget(g: &WeightedDigraph, epsilon: f64, ell: u32) -> Result<StepBudget> {
    StepBudget::from_real(ell as f64 * 144.0 * size_term(g) / epsilon.powi(3))
}

/// `ceil(beta * 144 C (m+n) ln n)`.
pub fn sublinear_budget(g: &WeightedDigraph, beta: f64) -> Result<StepBudget> {
    StepBudget::from_real(beta * 144.0 * SUBLINEAR_C as f64 * size_term(g))
}

/// `2 C ln n`: above this maximum sketch degree the `k = 1` case trusts greedy.
pub fn degree_threshold(n: usize) -> f64 {
    2.0 * SUBLINEAR_C as f64 * (n as f64).ln()
}

/// Greedy seed selection on a budgeted sketch, with best-of-`repetitions`
/// amplification.
pub fn maximize(g: &WeightedDigraph, params: &MaximizeParams) -> Result<Solution> {
    params.validate()?;
    if trivial(g, params.k)? {
        return Ok(Solution::everything(g.n()));
    }
    let budget = maximize_budget(g, params.epsilon, params.ell)?;
    let mut best: Option<(usize, RRSketch)> = None;
    let mut sketches = Vec::with_capacity(params.repetitions as usize);
    for rep in 0..params.repetitions {
        let sk = if params.workers > 1 {
            let seed = RngStream::tagged(params.seed, tag::SKETCH, rep).next_seed();
            build_hypergraph_parallel(g, budget, seed, params.workers)?
        } else {
            build_hypergraph(g, budget, &mut RngStream::tagged(params.seed, tag::SKETCH, rep))?
        };
        sketches.push(SketchStats::of(&sk));
        if best
            .as_ref()
            .is_none_or(|(_, b)| sk.num_edges() > b.num_edges())
        {
            best = Some((rep as usize, sk));
        }
    }
    let (chosen, sk) = best.expect("at least one repetition");
    Ok(Solution {
        seed_set: build_seed_set(&sk, params.k)?,
        branch: Branch::Greedy,
        sketches,
        chosen: Some(chosen),
    })
}

/// Seed choice from an existing sketch, following the sublinear rules. Draws
/// the degree-proportional vertex `v` first, then
///
/// * `k > 1`: the first `k - 1` greedy picks plus `v`; if `v` is already among
///   them, the `k`-th greedy pick takes its place;
/// * `k = 1`: the greedy pick when the maximum degree exceeds `2 C ln n`,
///   otherwise `v`.
pub fn solve_sublinear(sk: &RRSketch, k: usize, rng: &mut RngStream) -> Result<(SeedSet, Branch)> {
    let v = sk.sample_degree_proportional(rng)?;
    if k > 1 {
        let greedy = build_seed_set(sk, k)?;
        let keep = (k - 1).min(greedy.len());
        let mut seeds = greedy.seeds[..keep].to_vec();
        if seeds.contains(&v) {
            seeds = greedy.seeds.clone();
        } else {
            seeds.push(v);
        }
        let covered = sk.coverage(&seeds)?;
        let set = SeedSet {
            seeds,
            covered_edges: covered,
            estimate: sk.n() as f64 * covered as f64 / sk.num_edges() as f64,
            clamped_from: greedy.clamped_from,
        };
        Ok((set, Branch::Union))
    } else {
        let greedy = build_seed_set(sk, 1)?;
        if sk.max_degree().1 as f64 > degree_threshold(sk.n()) {
            Ok((greedy, Branch::Greedy))
        } else {
            let covered = sk.degree(v);
            let set = SeedSet {
                seeds: vec![v],
                covered_edges: covered,
                estimate: sk.n() as f64 * covered as f64 / sk.num_edges() as f64,
                clamped_from: None,
            };
            Ok((set, Branch::DegreeSample))
        }
    }
}

/// Budget-`beta` seed selection.
pub fn maximize_sublinear(g: &WeightedDigraph, params: &SublinearParams) -> Result<Solution> {
    params.validate()?;
    if trivial(g, params.k)? {
        return Ok(Solution::everything(g.n()));
    }
    let budget = sublinear_budget(g, params.beta)?;
    let sk = build_hypergraph(g, budget, &mut RngStream::tagged(params.seed, tag::SKETCH, 0))?;
    let (seed_set, branch) = solve_sublinear(
        &sk,
        params.k,
        &mut RngStream::tagged(params.seed, tag::DEGREE_DRAW, 0),
    )?;
    Ok(Solution {
        seed_set,
        branch,
        sketches: vec![SketchStats::of(&sk)],
        chosen: Some(0),
    })
}

/// External termination request, polled between hyperedges.
pub trait StopSignal {
    fn should_stop(&self, steps: u64) -> bool;
}

impl StopSignal for AtomicBool {
    fn should_stop(&self, _steps: u64) -> bool {
        self.load(Ordering::Relaxed)
    }
}

/// Stops once the step total reaches the limit.
#[derive(Clone, Copy, Debug)]
pub struct StepLimit(pub u64);

impl StopSignal for StepLimit {
    fn should_stop(&self, steps: u64) -> bool {
        steps >= self.0
    }
}

impl<F: Fn(u64) -> bool> StopSignal for F {
    fn should_stop(&self, steps: u64) -> bool {
        self(steps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnytimeSolution {
    pub seed_set: SeedSet,
    pub branch: Branch,
    /// Sketch steps when this solution was computed.
    pub steps_at_snapshot: u64,
    /// Checkpoint exponent: computed right after the step total first reached
    /// `2^snapshot_index`. 0 when no checkpoint had been reached.
    pub snapshot_index: u32,
    pub hyperedges: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnytimeRun {
    /// What the algorithm returns.
    pub solution: AnytimeSolution,
    /// Every checkpoint solution, in order.
    pub snapshots: Vec<AnytimeSolution>,
    /// True when the full `beta = 1` budget was used without a stop.
    pub completed: bool,
    pub steps: u64,
    pub budget: u64,
}

struct AnytimeHooks<'a, S: ?Sized> {
    k: usize,
    seed: u64,
    stop: &'a S,
    snapshots: Vec<AnytimeSolution>,
    err: Option<Error>,
}

impl<S: StopSignal + ?Sized> BuildHooks for AnytimeHooks<'_, S> {
    fn on_checkpoint(&mut self, cp: Checkpoint, sk: &RRSketch) {
        if self.err.is_some() {
            return;
        }
        let mut rng = RngStream::tagged(self.seed, tag::ANYTIME_DRAW, cp.index);
        match solve_sublinear(sk, self.k, &mut rng) {
            Ok((seed_set, branch)) => self.snapshots.push(AnytimeSolution {
                seed_set,
                branch,
                steps_at_snapshot: cp.steps,
                snapshot_index: cp.index,
                hyperedges: sk.num_edges(),
            }),
            Err(e) => self.err = Some(e),
        }
    }

    fn should_stop(&mut self, steps: u64) -> bool {
        self.err.is_some() || self.stop.should_stop(steps)
    }
}

fn floor_log2(x: u64) -> u32 {
    63 - x.max(1).leading_zeros()
}

/// Anytime variant of [`maximize_sublinear`] at `beta = 1`.
///
/// If the budget runs out before `stop` fires, the returned solution is the
/// one [`maximize_sublinear`] would give for the same seed. Otherwise it is the
/// latest checkpoint solution, or one computed from the partial sketch if no
/// checkpoint was reached.
pub fn maximize_anytime<S: StopSignal + ?Sized>(
    g: &WeightedDigraph,
    k: usize,
    seed: u64,
    stop: &S,
) -> Result<AnytimeRun> {
    if k < 1 {
        return Err(Error::domain("k must be at least 1"));
    }
    if trivial(g, k)? {
        let solution = AnytimeSolution {
            seed_set: all_vertices(g.n()),
            branch: Branch::Greedy,
            steps_at_snapshot: 0,
            snapshot_index: 0,
            hyperedges: 0,
        };
        return Ok(AnytimeRun {
            solution,
            snapshots: Vec::new(),
            completed: true,
            steps: 0,
            budget: 0,
        });
    }
    let budget = sublinear_budget(g, 1.0)?;
    let mut hooks = AnytimeHooks {
        k,
        seed,
        stop,
        snapshots: Vec::new(),
        err: None,
    };
    let sk = build_hypergraph_with(
        g,
        budget,
        &mut RngStream::tagged(seed, tag::SKETCH, 0),
        &mut hooks,
    )?;
    if let Some(e) = hooks.err {
        return Err(e);
    }
    let completed = sk.steps_used() >= budget.get();
    let solution = if completed {
        let (seed_set, branch) =
            solve_sublinear(&sk, k, &mut RngStream::tagged(seed, tag::DEGREE_DRAW, 0))?;
        AnytimeSolution {
            seed_set,
            branch,
            steps_at_snapshot: sk.steps_used(),
            snapshot_index: floor_log2(sk.steps_used()),
            hyperedges: sk.num_edges(),
        }
    } else if let Some(last) = hooks.snapshots.last() {
        last.clone()
    } else {
        let (seed_set, branch) =
            solve_sublinear(&sk, k, &mut RngStream::tagged(seed, tag::ANYTIME_DRAW, 0))?;
        AnytimeSolution {
            seed_set,
            branch,
            steps_at_snapshot: sk.steps_used(),
            snapshot_index: 0,
            hyperedges: sk.num_edges(),
        }
    };
    Ok(AnytimeRun {
        solution,
        snapshots: hooks.snapshots,
        completed,
        steps: sk.steps_used(),
        budget: budget.get(),
    })
}
