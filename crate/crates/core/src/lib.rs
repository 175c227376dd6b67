//! Influence maximization under the independent cascade model.
//!
//! The core estimator samples reverse-reachable sets: the vertices that reach
//! a uniformly random root in one realization of the transpose graph. A seed
//! set's expected influence is `n` times the probability that it meets such a
//! set, so greedy maximum coverage over many sampled sets approximates the
//! best `k` seeds.
//!
//! * [`graph`]: weighted digraph with forward and transpose adjacency.
//! * [`cascade`]: one-realization cascades and Monte-Carlo estimates.
//! * [`sketch`]: budgeted reverse-reachable hypergraph construction.
//! * [`select`]: linear-time greedy coverage with degree buckets.
//! * [`algo`]: the full, sublinear and anytime maximizers.
//! * [`oracle`]: exact influence by realization enumeration.
//! * [`bench`]: instance generators and the benchmark harness.
//!
//! Logarithms are natural throughout.
//!
//! ```
//! use maxinf::{maximize, MaximizeParams, WeightedDigraph};
//!
//! let g = WeightedDigraph::from_edges(4, [(0, 1, 0.5), (1, 2, 0.5), (3, 1, 0.9)])?;
//! let sol = maximize(&g, &MaximizeParams::new(0.2, 2, 42))?;
//! assert_eq!(sol.seeds().len(), 2);
//! # Ok::<(), maxinf::Error>(())
//! ```

pub mod algo;
pub mod bench;
pub mod cascade;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod rng;
pub mod select;
pub mod sketch;

pub use algo::{
    maximize, maximize_anytime, maximize_sublinear, AnytimeRun, AnytimeSolution, Branch,
    MaximizeParams, Solution, StepLimit, StopSignal, SublinearParams,
};
pub use bench::{gen_lower_bound, gen_random, run_bench, LowerBoundInstance, ProbDist};
pub use cascade::{estimate_influence_mc, simulate, CascadeOutcome, McEstimate};
pub use error::{Error, Result};
pub use graph::{Direction, NodeId, WeightedDigraph};
pub use oracle::{chernoff_trials, exact_influence, exact_opt, ChernoffPlan, ExactInfluence};
pub use rng::RngStream;
pub use select::{build_seed_set, naive_greedy, SeedSet};
pub use sketch::{build_hypergraph, RRSketch, StepBudget};
