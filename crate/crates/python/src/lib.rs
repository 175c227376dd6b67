//! Python bindings for `maxinf`.
//!
//! ```python
//! import maxinf_py as mi
//! g = mi.Graph(6, [(0, i, 1.0) for i in range(1, 6)])
//! sol = mi.maximize(g, k=1, epsilon=0.5, seed=7)
//! assert sol.seeds == [0]
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter};

use pyo3::exceptions::{PyIndexError, PyOSError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use maxinf::algo::{self, AnytimeRun};
use maxinf::bench::{self, ProbDist};
use maxinf::rng::tag;
use maxinf::sketch::{self, StepBudget};
use maxinf::{Direction, Error, MaximizeParams, NodeId, RngStream, SublinearParams, WeightedDigraph};

/// Seed used when none is passed.
const DEFAULT_SEED: u64 = 20_240_607;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Bounds { .. } => PyIndexError::new_err(e.to_string()),
        Error::Capacity { .. } => PyOverflowError::new_err(e.to_string()),
        Error::State(_) => PyRuntimeError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().copied().map(NodeId).collect()
}

fn raw(v: &[NodeId]) -> Vec<u32> {
    v.iter().map(|n| n.0).collect()
}

/// Directed graph with an activation probability on every edge.
#[pyclass(frozen)]
struct Graph {
    inner: WeightedDigraph,
}

#[pymethods]
impl Graph {
    #[new]
    #[pyo3(signature = (n, edges=Vec::new()))]
    fn new(n: usize, edges: Vec<(u32, u32, f64)>) -> PyResult<Self> {
        let inner = WeightedDigraph::from_edges(n, edges).map_err(py_err)?;
        Ok(Graph { inner })
    }

    /// Reads a tab-separated edge list.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| py_err(e.into()))?;
        let inner = WeightedDigraph::load_edge_list(BufReader::new(file)).map_err(py_err)?;
        Ok(Graph { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let file = File::create(path).map_err(|e| py_err(e.into()))?;
        self.inner.write_edge_list(BufWriter::new(file)).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn edges(&self) -> Vec<(u32, u32, f64)> {
        self.inner
            .edges()
            .iter()
            .map(|e| (e.source.0, e.target.0, e.p))
            .collect()
    }

    /// Out-neighbors of `v` as `(target, p)` pairs.
    fn neighbors(&self, v: u32) -> PyResult<Vec<(u32, f64)>> {
        let links = self.inner.neighbors(NodeId(v)).map_err(py_err)?;
        Ok(links.iter().map(|l| (l.node.0, l.p)).collect())
    }

    /// In-neighbors of `v` as `(source, p)` pairs.
    fn transpose_neighbors(&self, v: u32) -> PyResult<Vec<(u32, f64)>> {
        let links = self.inner.transpose_neighbors(NodeId(v)).map_err(py_err)?;
        Ok(links.iter().map(|l| (l.node.0, l.p)).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Reverse-reachable hypergraph sketch.
#[pyclass(frozen)]
struct Sketch {
    inner: maxinf::RRSketch,
}

#[pymethods]
impl Sketch {
    /// Samples RR-sets until `budget` steps are used.
    #[staticmethod]
    #[pyo3(signature = (graph, budget, seed=DEFAULT_SEED))]
    fn build(py: Python<'_>, graph: &Graph, budget: u64, seed: u64) -> PyResult<Self> {
        let budget = StepBudget::new(budget).map_err(py_err)?;
        let inner = py
            .detach(|| {
                sketch::build_hypergraph(&graph.inner, budget, &mut RngStream::tagged(seed, tag::SKETCH, 0))
            })
            .map_err(py_err)?;
        Ok(Sketch { inner })
    }

    /// Builds a sketch from explicit hyperedges over `n` vertices.
    #[staticmethod]
    fn from_sets(n: usize, sets: Vec<Vec<u32>>) -> PyResult<Self> {
        let inner = maxinf::RRSketch::from_sets(n, sets).map_err(py_err)?;
        Ok(Sketch { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn steps_used(&self) -> u64 {
        self.inner.steps_used()
    }

    fn edge(&self, i: usize) -> PyResult<Vec<u32>> {
        if i >= self.inner.num_edges() {
            return Err(PyIndexError::new_err(format!("hyperedge {i} out of range")));
        }
        Ok(raw(self.inner.edge(i)))
    }

    fn degree(&self, v: u32) -> PyResult<usize> {
        if v as usize >= self.inner.n() {
            return Err(PyIndexError::new_err(format!("node {v} out of range")));
        }
        Ok(self.inner.degree(NodeId(v)))
    }

    /// Hyperedges meeting `seeds`.
    fn coverage(&self, seeds: Vec<u32>) -> PyResult<usize> {
        self.inner.coverage(&ids(&seeds)).map_err(py_err)
    }

    /// `n * coverage / num_edges`.
    fn estimate(&self, seeds: Vec<u32>) -> PyResult<f64> {
        self.inner.estimate_set_influence(&ids(&seeds)).map_err(py_err)
    }

    /// Greedy maximum-coverage seeds.
    fn seed_set(&self, k: usize) -> PyResult<Vec<u32>> {
        let s = maxinf::build_seed_set(&self.inner, k).map_err(py_err)?;
        Ok(raw(&s.seeds))
    }

    fn __len__(&self) -> usize {
        self.inner.num_edges()
    }

    fn __repr__(&self) -> String {
        format!(
            "Sketch(n={}, num_edges={}, steps_used={})",
            self.inner.n(),
            self.inner.num_edges(),
            self.inner.steps_used()
        )
    }
}

/// Result of a maximization run.
#[pyclass(frozen, get_all)]
struct Solution {
    seeds: Vec<u32>,
    /// Sketch estimate of the expected influence.
    estimate: f64,
    hyperedges: usize,
    steps: u64,
    branch: String,
    /// Anytime runs only: whether the full budget was used.
    completed: bool,
    /// Anytime runs only: checkpoint exponent of the returned solution.
    snapshot_index: u32,
}

#[pymethods]
impl Solution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(seeds={:?}, estimate={}, hyperedges={}, steps={}, branch={:?})",
            self.seeds, self.estimate, self.hyperedges, self.steps, self.branch
        )
    }
}

impl From<algo::Solution> for Solution {
    fn from(s: algo::Solution) -> Self {
        Solution {
            seeds: raw(s.seeds()),
            estimate: s.seed_set.estimate,
            hyperedges: s.hyperedges(),
            steps: s.steps(),
            branch: s.branch.as_str().to_string(),
            completed: true,
            snapshot_index: 0,
        }
    }
}

impl From<AnytimeRun> for Solution {
    fn from(r: AnytimeRun) -> Self {
        Solution {
            seeds: raw(&r.solution.seed_set.seeds),
            estimate: r.solution.seed_set.estimate,
            hyperedges: r.solution.hyperedges,
            steps: r.steps,
            branch: r.solution.branch.as_str().to_string(),
            completed: r.completed,
            snapshot_index: r.solution.snapshot_index,
        }
    }
}

#[pyfunction]
#[pyo3(signature = (graph, k, epsilon, seed=DEFAULT_SEED, repetitions=1))]
fn maximize(py: Python<'_>, graph: &Graph, k: usize, epsilon: f64, seed: u64, repetitions: u32) -> PyResult<Solution> {
    let params = MaximizeParams {
        repetitions,
        ..MaximizeParams::new(epsilon, k, seed)
    };
    let sol = py.detach(|| maxinf::maximize(&graph.inner, &params)).map_err(py_err)?;
    Ok(sol.into())
}

#[pyfunction]
#[pyo3(signature = (graph, k, beta, seed=DEFAULT_SEED))]
fn maximize_sublinear(py: Python<'_>, graph: &Graph, k: usize, beta: f64, seed: u64) -> PyResult<Solution> {
    let params = SublinearParams::new(beta, k, seed);
    let sol = py
        .detach(|| maxinf::maximize_sublinear(&graph.inner, &params))
        .map_err(py_err)?;
    Ok(sol.into())
}

/// Anytime run at `beta = 1`, stopped after `max_steps` if given.
#[pyfunction]
#[pyo3(signature = (graph, k, seed=DEFAULT_SEED, max_steps=None))]
fn maximize_anytime(py: Python<'_>, graph: &Graph, k: usize, seed: u64, max_steps: Option<u64>) -> PyResult<Solution> {
    let stop = |steps: u64| max_steps.is_some_and(|m| steps >= m);
    let run = py
        .detach(|| maxinf::maximize_anytime(&graph.inner, k, seed, &stop))
        .map_err(py_err)?;
    Ok(run.into())
}

/// Vertices reached by one cascade, in discovery order.
#[pyfunction]
#[pyo3(signature = (graph, seeds, seed=DEFAULT_SEED))]
fn simulate(graph: &Graph, seeds: Vec<u32>, seed: u64) -> PyResult<Vec<u32>> {
    let mut rng = RngStream::tagged(seed, tag::ESTIMATE, 0);
    let out = maxinf::simulate(&graph.inner, &ids(&seeds), Direction::Forward, &mut rng).map_err(py_err)?;
    Ok(raw(&out.influenced))
}

/// Monte-Carlo mean of the cascade size over `trials` runs.
#[pyfunction]
#[pyo3(signature = (graph, seeds, trials, seed=DEFAULT_SEED))]
fn estimate_influence(py: Python<'_>, graph: &Graph, seeds: Vec<u32>, trials: u64, seed: u64) -> PyResult<f64> {
    let seeds = ids(&seeds);
    let mut rng = RngStream::tagged(seed, tag::ESTIMATE, 0);
    let est = py
        .detach(|| maxinf::estimate_influence_mc(&graph.inner, &seeds, trials, &mut rng))
        .map_err(py_err)?;
    Ok(est.mean)
}

#[pyfunction]
fn exact_influence(graph: &Graph, seeds: Vec<u32>) -> PyResult<f64> {
    let ex = maxinf::exact_influence(&graph.inner, &ids(&seeds)).map_err(py_err)?;
    Ok(ex.value)
}

/// Best expected influence over seed sets of size `k`, with a maximizer.
#[pyfunction]
fn exact_opt(py: Python<'_>, graph: &Graph, k: usize) -> PyResult<(f64, Vec<u32>)> {
    let o = py.detach(|| maxinf::exact_opt(&graph.inner, k)).map_err(py_err)?;
    Ok((o.value, raw(&o.argmax)))
}

/// Monte-Carlo trials for relative accuracy `lam` at the given confidence.
#[pyfunction]
fn chernoff_trials(lam: f64, confidence: f64) -> PyResult<u64> {
    Ok(maxinf::chernoff_trials(lam, confidence).map_err(py_err)?.trials)
}

#[pyfunction]
#[pyo3(signature = (n, t, k, overlay_degree=None))]
fn gen_lower_bound(n: usize, t: usize, k: usize, overlay_degree: Option<usize>) -> PyResult<Graph> {
    let inner = bench::gen_lower_bound(n, t, k, overlay_degree).map_err(py_err)?;
    Ok(Graph { inner })
}

/// Random graph; pass either `p` or `p_range=(lo, hi)`.
#[pyfunction]
#[pyo3(signature = (n, m, p=None, p_range=None, allow_parallel=false, seed=DEFAULT_SEED))]
fn gen_random(
    n: usize,
    m: usize,
    p: Option<f64>,
    p_range: Option<(f64, f64)>,
    allow_parallel: bool,
    seed: u64,
) -> PyResult<Graph> {
    let dist = match (p, p_range) {
        (Some(p), None) => ProbDist::Fixed(p),
        (None, Some((lo, hi))) => ProbDist::Uniform { lo, hi },
        _ => return Err(PyValueError::new_err("pass exactly one of p and p_range")),
    };
    let inner = bench::gen_random(n, m, dist, allow_parallel, seed).map_err(py_err)?;
    Ok(Graph { inner })
}

#[pymodule]
pub fn maxinf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Sketch>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(maximize, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_sublinear, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_anytime, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_influence, m)?)?;
    m.add_function(wrap_pyfunction!(exact_influence, m)?)?;
    m.add_function(wrap_pyfunction!(exact_opt, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_trials, m)?)?;
    m.add_function(wrap_pyfunction!(gen_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    Ok(())
}
