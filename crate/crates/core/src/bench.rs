//! Instance generators and the benchmark harness.
//!
//! The lower-bound family puts `k` directed `p = 1` cycles of length `2T` on
//! ids `[0, 2kT)` and leaves the remaining vertices isolated. Every cycle
//! vertex has influence exactly `2T`, so a seed set's influence can be scored
//! in closed form at any size.
//!
//! Reports carry one row per trial plus one aggregate per
//! (instance, algorithm, k). In CSV form aggregates are prefixed `#agg` and
//! skipped configurations `#skip`.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use rand::seq::index;
use serde::Serialize;

use crate::algo::{maximize, maximize_sublinear, MaximizeParams, SublinearParams};
use crate::cascade::estimate_influence_mc;
use crate::error::{Error, Result};
use crate::graph::{NodeId, WeightedDigraph};
use crate::oracle::{exact_influence, exact_opt};
use crate::rng::{tag, RngStream};

/// Edge weight of the optional regular overlay on lower-bound instances.
pub const OVERLAY_WEIGHT: f64 = 1e-12;

/// CSV header of per-trial rows.
pub const CSV_HEADER: [&str; 10] = [
    "instance", "algo", "k", "param", "seed", "achieved", "opt", "ratio", "steps", "ms",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundInstance {
    pub n: usize,
    /// Half the component size; the targeted approximation is `1/T`.
    pub t: usize,
    pub k: usize,
    /// Out-degree of the optional circulant overlay.
    pub overlay_degree: Option<usize>,
}

impl LowerBoundInstance {
    pub fn new(n: usize, t: usize, k: usize) -> Result<Self> {
        if t < 1 || k < 1 {
            return Err(Error::domain("T and k must be at least 1"));
        }
        let big = 2 * k * t;
        if big > n {
            return Err(Error::domain(format!(
                "lower-bound family needs 2kT <= n, got 2*{k}*{t} = {big} > {n}"
            )));
        }
        Ok(LowerBoundInstance {
            n,
            t,
            k,
            overlay_degree: None,
        })
    }

    pub fn with_overlay(mut self, degree: usize) -> Result<Self> {
        if degree >= self.n {
            return Err(Error::domain(format!(
                "overlay degree {degree} must be below n = {}",
                self.n
            )));
        }
        self.overlay_degree = Some(degree);
        Ok(self)
    }

    fn component_size(&self) -> usize {
        2 * self.t
    }

    /// Cycle index of `v`, or `None` for singletons.
    pub fn component_of(&self, v: NodeId) -> Option<usize> {
        let c = v.index() / self.component_size();
        (c < self.k).then_some(c)
    }

    pub fn graph(&self) -> WeightedDigraph {
        let size = self.component_size();
        let mut edges = Vec::with_capacity(self.k * size + self.n * self.overlay_degree.unwrap_or(0));
        for c in 0..self.k {
            let base = c * size;
            for i in 0..size {
                edges.push(((base + i) as u32, (base + (i + 1) % size) as u32, 1.0));
            }
        }
        if let Some(d) = self.overlay_degree {
            for v in 0..self.n {
                for j in 1..=d {
                    edges.push((v as u32, ((v + j) % self.n) as u32, OVERLAY_WEIGHT));
                }
            }
        }
        WeightedDigraph::from_edges(self.n, edges).expect("generated edges are valid")
    }

    /// Closed-form influence ignoring the overlay: `2T` per distinct cycle hit
    /// plus one per singleton.
    pub fn influence(&self, seeds: &[NodeId]) -> f64 {
        let mut hit = vec![false; self.k];
        let mut singles = std::collections::HashSet::new();
        for &v in seeds {
            match self.component_of(v) {
                Some(c) => hit[c] = true,
                None => {
                    singles.insert(v);
                }
            }
        }
        let cycles = hit.iter().filter(|&&h| h).count();
        (cycles * self.component_size() + singles.len()) as f64
    }

    /// Best influence of `budget` seeds: whole cycles first, then singletons.
    pub fn opt(&self, budget: usize) -> f64 {
        let cycles = budget.min(self.k);
        let singles = (budget - cycles).min(self.n - 2 * self.k * self.t);
        (cycles * self.component_size() + singles) as f64
    }
}

/// The lower-bound graph for `(n, T, k)`, optionally with a `d`-regular
/// overlay of weight [`OVERLAY_WEIGHT`].
pub fn gen_lower_bound(
    n: usize,
    t: usize,
    k: usize,
    overlay_degree: Option<usize>,
) -> Result<WeightedDigraph> {
    let mut inst = LowerBoundInstance::new(n, t, k)?;
    if let Some(d) = overlay_degree {
        inst = inst.with_overlay(d)?;
    }
    Ok(inst.graph())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbDist {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
}

impl ProbDist {
    fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        match *self {
            ProbDist::Fixed(p) if ok(p) => Ok(()),
            ProbDist::Uniform { lo, hi } if ok(lo) && ok(hi) && lo <= hi => Ok(()),
            other => Err(Error::domain(format!("invalid probability distribution {other:?}"))),
        }
    }

    fn draw(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ProbDist::Fixed(p) => p,
            ProbDist::Uniform { lo, hi } => lo + (hi - lo) * rng.unit(),
        }
    }
}

/// `m` directed edges between distinct endpoints. Without parallel edges the
/// pairs are sampled uniformly without replacement from all `n(n-1)` ordered
/// pairs; with them, each edge is an independent uniform pair.
pub fn gen_random(
    n: usize,
    m: usize,
    dist: ProbDist,
    allow_parallel: bool,
    seed: u64,
) -> Result<WeightedDigraph> {
    dist.validate()?;
    let pairs = n.saturating_mul(n.saturating_sub(1));
    if m > 0 && pairs == 0 {
        return Err(Error::domain(format!("cannot place {m} edges on {n} vertices")));
    }
    if !allow_parallel && m > pairs {
        return Err(Error::domain(format!(
            "{m} edges requested but only {pairs} ordered pairs exist"
        )));
    }
    let mut rng = RngStream::tagged(seed, tag::GENERATE, 0);
    let to_edge = |i: usize| {
        let u = i / (n - 1);
        let r = i % (n - 1);
        let v = if r < u { r } else { r + 1 };
        (u as u32, v as u32)
    };
    let picks: Vec<usize> = if allow_parallel {
        (0..m).map(|_| rng.below(pairs)).collect()
    } else {
        index::sample(&mut rng, pairs, m).into_vec()
    };
    let edges: Vec<(u32, u32, f64)> = picks
        .into_iter()
        .map(|i| {
            let (u, v) = to_edge(i);
            (u, v, dist.draw(&mut rng))
        })
        .collect();
    WeightedDigraph::from_edges(n, edges)
}

/// How a benchmark instance's seed sets are scored.
#[derive(Clone, Debug)]
pub enum Scorer {
    /// Exact enumeration; `OPT` by exhaustive search.
    Oracle,
    /// Closed form from component membership.
    LowerBound(LowerBoundInstance),
}

#[derive(Clone, Debug)]
pub struct BenchInstance {
    pub id: String,
    pub graph: WeightedDigraph,
    pub scorer: Scorer,
}

impl BenchInstance {
    pub fn oracle(id: impl Into<String>, graph: WeightedDigraph) -> Self {
        BenchInstance {
            id: id.into(),
            graph,
            scorer: Scorer::Oracle,
        }
    }

    pub fn lower_bound(id: impl Into<String>, inst: LowerBoundInstance) -> Self {
        BenchInstance {
            id: id.into(),
            graph: inst.graph(),
            scorer: Scorer::LowerBound(inst),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlgoSpec {
    Maximize { epsilon: f64, repetitions: u32 },
    Sublinear { beta: f64 },
    /// Greedy over Monte-Carlo influence estimates, `trials` cascades each.
    McGreedy { trials: u64 },
}

impl AlgoSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgoSpec::Maximize { .. } => "maximize",
            AlgoSpec::Sublinear { .. } => "sublinear",
            AlgoSpec::McGreedy { .. } => "mc-greedy",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            AlgoSpec::Maximize { epsilon, .. } => epsilon,
            AlgoSpec::Sublinear { beta } => beta,
            AlgoSpec::McGreedy { trials } => trials as f64,
        }
    }

    /// Ratio a run must reach to count as a success: `1 - 1/e - eps` for the
    /// full algorithm, `min(1/4, beta)` for the sublinear one, `1 - 1/e` for
    /// the Monte-Carlo baseline.
    pub fn threshold(&self) -> f64 {
        let greedy = 1.0 - (-1.0f64).exp();
        match *self {
            AlgoSpec::Maximize { epsilon, .. } => greedy - epsilon,
            AlgoSpec::Sublinear { beta } => beta.min(0.25),
            AlgoSpec::McGreedy { .. } => greedy,
        }
    }

    /// Runs once, returning seeds and simulation steps.
    pub fn run(&self, g: &WeightedDigraph, k: usize, seed: u64) -> Result<(Vec<NodeId>, u64)> {
        match *self {
            AlgoSpec::Maximize {
                epsilon,
                repetitions,
            } => {
                let mut p = MaximizeParams::new(epsilon, k, seed);
                p.repetitions = repetitions;
                let sol = maximize(g, &p)?;
                Ok((sol.seed_set.seeds.clone(), sol.steps()))
            }
            AlgoSpec::Sublinear { beta } => {
                let sol = maximize_sublinear(g, &SublinearParams::new(beta, k, seed))?;
                Ok((sol.seed_set.seeds.clone(), sol.steps()))
            }
            AlgoSpec::McGreedy { trials } => mc_greedy(g, k, trials, seed),
        }
    }
}

/// Classic greedy hill climbing on Monte-Carlo estimates. Candidates within a
/// round share one random stream.
pub fn mc_greedy(
    g: &WeightedDigraph,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<(Vec<NodeId>, u64)> {
    if k < 1 {
        return Err(Error::domain("k must be at least 1"));
    }
    let k = k.min(g.n());
    let mut chosen: Vec<NodeId> = Vec::with_capacity(k);
    let mut steps = 0;
    for round in 0..k {
        let mut best: Option<(NodeId, f64)> = None;
        for v in g.nodes() {
            if chosen.contains(&v) {
                continue;
            }
            let mut set = chosen.clone();
            set.push(v);
            let mut rng = RngStream::tagged(seed, tag::ESTIMATE, round as u32);
            let est = estimate_influence_mc(g, &set, trials, &mut rng)?;
            steps += est.steps_total;
            if best.is_none_or(|(_, b)| est.mean > b) {
                best = Some((v, est.mean));
            }
        }
        chosen.push(best.expect("candidates remain while round < n").0);
    }
    Ok((chosen, steps))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub algo: String,
    pub k: usize,
    pub param: f64,
    pub seed: u64,
    pub achieved: f64,
    pub opt: f64,
    pub ratio: f64,
    pub steps: u64,
    pub ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub instance: String,
    pub algo: String,
    pub k: usize,
    pub param: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub threshold: f64,
    pub mean_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkipRow {
    pub instance: String,
    pub algo: String,
    pub k: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<AggregateRow>,
    pub skipped: Vec<SkipRow>,
}

/// Minimum success rate for an aggregate to be flagged PASS.
pub const PASS_RATE: f64 = 0.6;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub ks: Vec<usize>,
    pub trials: u32,
    /// Trial `i` runs with seed `seed + i`.
    pub seed: u64,
    /// Write `ms = 0` so reports are byte-for-byte reproducible.
    pub deterministic: bool,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .flexible(true)
            .has_headers(false)
            .from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.rows {
            out.serialize(r)?;
        }
        for a in &self.aggregates {
            out.write_record([
                "#agg".to_string(),
                a.instance.clone(),
                a.algo.clone(),
                a.k.to_string(),
                a.param.to_string(),
                a.trials.to_string(),
                a.successes.to_string(),
                a.success_rate.to_string(),
                a.threshold.to_string(),
                a.mean_ratio.to_string(),
                if a.pass { "PASS" } else { "FAIL" }.to_string(),
            ])?;
        }
        for s in &self.skipped {
            out.write_record([
                "#skip".to_string(),
                s.instance.clone(),
                s.algo.clone(),
                s.k.to_string(),
                s.reason.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// One JSON object per line: trial rows with the CSV fields, then
    /// aggregates and skips tagged by a leading `"kind"` field.
    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Tagged<'a, T: Serialize> {
            kind: &'static str,
            #[serde(flatten)]
            body: &'a T,
        }
        for r in &self.rows {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        for a in &self.aggregates {
            serde_json::to_writer(&mut w, &Tagged { kind: "agg", body: a })?;
            w.write_all(b"\n")?;
        }
        for s in &self.skipped {
            serde_json::to_writer(&mut w, &Tagged { kind: "skip", body: s })?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }
}

fn score(
    inst: &BenchInstance,
    seeds: &[NodeId],
    cache: &mut HashMap<Vec<NodeId>, f64>,
) -> Result<f64> {
    match &inst.scorer {
        Scorer::LowerBound(lb) => Ok(lb.influence(seeds)),
        Scorer::Oracle => {
            let mut key = seeds.to_vec();
            key.sort_unstable();
            key.dedup();
            if let Some(&v) = cache.get(&key) {
                return Ok(v);
            }
            let v = exact_influence(&inst.graph, &key)?.value;
            cache.insert(key, v);
            Ok(v)
        }
    }
}

/// Runs every algorithm `trials` times per instance and `k`, scoring each
/// returned set exactly.
pub fn run_bench(corpus: &[BenchInstance], algos: &[AlgoSpec], cfg: &BenchConfig) -> BenchReport {
    let mut report = BenchReport::default();
    for inst in corpus {
        let mut cache = HashMap::new();
        for &k in &cfg.ks {
            let opt = match &inst.scorer {
                Scorer::LowerBound(lb) => Ok(lb.opt(k)),
                Scorer::Oracle => exact_opt(&inst.graph, k).map(|o| o.value),
            };
            let opt = match opt {
                Ok(v) => v,
                Err(e) => {
                    for a in algos {
                        report.skipped.push(SkipRow {
                            instance: inst.id.clone(),
                            algo: a.name().into(),
                            k,
                            reason: e.to_string(),
                        });
                    }
                    continue;
                }
            };
            for algo in algos {
                let mut rows = Vec::with_capacity(cfg.trials as usize);
                let mut failure = None;
                for trial in 0..cfg.trials {
                    let seed = cfg.seed.wrapping_add(trial as u64);
                    let start = Instant::now();
                    let outcome = algo
                        .run(&inst.graph, k, seed)
                        .and_then(|(seeds, steps)| Ok((score(inst, &seeds, &mut cache)?, steps)));
                    let ms = if cfg.deterministic {
                        0
                    } else {
                        start.elapsed().as_millis() as u64
                    };
                    match outcome {
                        Ok((achieved, steps)) => rows.push(BenchRow {
                            instance: inst.id.clone(),
                            algo: algo.name().into(),
                            k,
                            param: algo.param(),
                            seed,
                            achieved,
                            opt,
                            ratio: if opt > 0.0 { (achieved / opt).min(1.0) } else { 1.0 },
                            steps,
                            ms,
                        }),
                        Err(e) => {
                            failure = Some(e.to_string());
                            break;
                        }
                    }
                }
                if let Some(reason) = failure {
                    report.skipped.push(SkipRow {
                        instance: inst.id.clone(),
                        algo: algo.name().into(),
                        k,
                        reason,
                    });
                    continue;
                }
                let threshold = algo.threshold();
                let successes = rows.iter().filter(|r| r.ratio >= threshold - 1e-12).count();
                let trials = rows.len();
                let success_rate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
                report.aggregates.push(AggregateRow {
                    instance: inst.id.clone(),
                    algo: algo.name().into(),
                    k,
                    param: algo.param(),
                    trials,
                    successes,
                    success_rate,
                    threshold,
                    mean_ratio: rows.iter().map(|r| r.ratio).sum::<f64>() / trials.max(1) as f64,
                    pass: trials > 0 && success_rate >= PASS_RATE,
                });
                report.rows.extend(rows);
            }
        }
    }
    report
}

/// `P[X >= successes]` for `X ~ Binomial(trials, p)`.
pub fn binomial_upper_tail(trials: u64, successes: u64, p: f64) -> f64 {
    if successes == 0 {
        return 1.0;
    }
    if successes > trials {
        return 0.0;
    }
    let ln_choose = |n: u64, k: u64| -> f64 {
        (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
    };
    (successes..=trials)
        .map(|x| {
            (ln_choose(trials, x) + x as f64 * p.ln() + (trials - x) as f64 * (1.0 - p).ln()).exp()
        })
        .sum::<f64>()
        .min(1.0)
}

/// One-sided exact binomial test of `H0: rate <= p0`; true when `H0` is
/// rejected at level `alpha`.
pub fn rate_exceeds(trials: u64, successes: u64, p0: f64, alpha: f64) -> bool {
    binomial_upper_tail(trials, successes, p0) <= alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_opt;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn lower_bound_examples() {
        let g = gen_lower_bound(8, 2, 1, None).unwrap();
        assert_eq!(g.m(), 4);
        let ex = exact_influence(&g, &ids(&[0])).unwrap();
        assert_eq!(ex.value, 4.0);
        for v in 4..8 {
            assert_eq!(g.out_degree(NodeId(v)) + g.in_degree(NodeId(v)), 0);
        }

        let inst = LowerBoundInstance::new(8, 2, 2).unwrap();
        assert_eq!(inst.opt(2), 8.0);
        assert_eq!(exact_opt(&inst.graph(), 2).unwrap().value, 8.0);

        match gen_lower_bound(8, 2, 3, None) {
            Err(Error::Domain(msg)) => assert!(msg.contains("2kT <= n"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lower_bound_closed_form_matches_oracle() {
        let inst = LowerBoundInstance::new(11, 2, 2).unwrap();
        let g = inst.graph();
        for v in 0..11u32 {
            let exact = exact_influence(&g, &ids(&[v])).unwrap().value;
            assert_eq!(exact, inst.influence(&ids(&[v])));
            assert_eq!(exact, if v < 8 { 4.0 } else { 1.0 });
        }
        for k in 1..=4 {
            assert_eq!(exact_opt(&g, k).unwrap().value, inst.opt(k));
        }
        assert_eq!(inst.influence(&ids(&[0, 1, 9, 9])), 5.0);
    }

    #[test]
    fn overlay_barely_moves_influence() {
        let plain = LowerBoundInstance::new(10, 2, 1).unwrap();
        let over = plain.with_overlay(2).unwrap();
        assert_eq!(over.graph().m(), 4 + 20);
        // 20 overlay edges are stochastic: at the enumeration limit
        let gp = plain.graph();
        let go = over.graph();
        for v in [0u32, 5] {
            let a = exact_influence(&gp, &ids(&[v])).unwrap().value;
            let b = exact_influence(&go, &ids(&[v])).unwrap().value;
            assert!((a - b).abs() <= 1e-6 * 10.0, "{a} vs {b}");
        }
        assert!(plain.with_overlay(10).is_err());
    }

    #[test]
    fn random_graphs() {
        assert_eq!(gen_random(5, 0, ProbDist::Fixed(0.5), false, 1).unwrap().m(), 0);
        let g = gen_random(5, 20, ProbDist::Fixed(0.5), false, 1).unwrap();
        let mut pairs: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.source.0, e.target.0)).collect();
        pairs.sort_unstable();
        let all: Vec<(u32, u32)> = (0..5).flat_map(|u| (0..5).filter(move |&v| v != u).map(move |v| (u, v))).collect();
        assert_eq!(pairs, all);
        assert!(gen_random(5, 21, ProbDist::Fixed(0.5), false, 1).is_err());
        assert_eq!(gen_random(5, 40, ProbDist::Fixed(0.5), true, 1).unwrap().m(), 40);
        assert!(gen_random(1, 1, ProbDist::Fixed(0.5), true, 1).is_err());

        let d = ProbDist::Uniform { lo: 0.2, hi: 0.4 };
        let a = gen_random(30, 80, d, false, 7).unwrap();
        let b = gen_random(30, 80, d, false, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.edges().iter().all(|e| (0.2..=0.4).contains(&e.p) && e.source != e.target));
        assert_ne!(a, gen_random(30, 80, d, false, 8).unwrap());
        assert!(gen_random(3, 1, ProbDist::Uniform { lo: 0.5, hi: 0.2 }, false, 1).is_err());
    }

    #[test]
    fn star_bench_passes() {
        let star = WeightedDigraph::from_edges(6, (1..6).map(|i| (0, i, 1.0))).unwrap();
        let corpus = [BenchInstance::oracle("star", star)];
        let algos = [AlgoSpec::Maximize { epsilon: 0.5, repetitions: 1 }];
        let cfg = BenchConfig { ks: vec![1], trials: 100, seed: 0, deterministic: true };
        let report = run_bench(&corpus, &algos, &cfg);
        assert_eq!(report.rows.len(), 100);
        assert!(report.rows.iter().all(|r| r.opt == 6.0 && r.ms == 0));
        let agg = &report.aggregates[0];
        assert!(agg.pass && agg.success_rate >= 0.6, "{agg:?}");
    }

    #[test]
    fn empty_corpus_gives_empty_report() {
        let cfg = BenchConfig { ks: vec![1], trials: 3, seed: 0, deterministic: true };
        let report = run_bench(&[], &[AlgoSpec::Sublinear { beta: 0.5 }], &cfg);
        assert_eq!(report, BenchReport::default());
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "instance,algo,k,param,seed,achieved,opt,ratio,steps,ms\n");
    }

    #[test]
    fn capacity_skips_are_reported() {
        let g = gen_random(30, 40, ProbDist::Fixed(0.5), false, 3).unwrap();
        let corpus = [BenchInstance::oracle("big", g)];
        let cfg = BenchConfig { ks: vec![1], trials: 2, seed: 0, deterministic: true };
        let report = run_bench(&corpus, &[AlgoSpec::McGreedy { trials: 10 }], &cfg);
        assert!(report.rows.is_empty());
        assert_eq!(report.skipped.len(), 1);
        assert!(report.skipped[0].reason.contains("stochastic"));
    }

    #[test]
    fn reports_are_reproducible() {
        let corpus = [
            BenchInstance::lower_bound("lb", LowerBoundInstance::new(12, 2, 2).unwrap()),
            BenchInstance::oracle("rnd", gen_random(6, 8, ProbDist::Fixed(0.4), false, 2).unwrap()),
        ];
        let algos = [
            AlgoSpec::Maximize { epsilon: 0.7, repetitions: 1 },
            AlgoSpec::McGreedy { trials: 50 },
        ];
        let cfg = BenchConfig { ks: vec![1, 2], trials: 3, seed: 11, deterministic: true };
        let render = || {
            let r = run_bench(&corpus, &algos, &cfg);
            let mut csv = Vec::new();
            r.write_csv(&mut csv).unwrap();
            let mut json = Vec::new();
            r.write_json(&mut json).unwrap();
            (csv, json)
        };
        let (c1, j1) = render();
        let (c2, j2) = render();
        assert_eq!(c1, c2);
        assert_eq!(j1, j2);
        let text = String::from_utf8(c1).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("instance,")).count(), 1);
        assert_eq!(text.lines().filter(|l| l.starts_with("#agg")).count(), 8);
        let first_json = String::from_utf8(j1).unwrap();
        let line = first_json.lines().next().unwrap();
        assert!(line.starts_with("{\"instance\":\"lb\",\"algo\":\"maximize\",\"k\":1,"), "{line}");
    }

    #[test]
    fn mc_greedy_finds_hub() {
        let star = WeightedDigraph::from_edges(6, (1..6).map(|i| (0, i, 0.9))).unwrap();
        let (seeds, steps) = mc_greedy(&star, 2, 200, 1).unwrap();
        assert_eq!(seeds[0], NodeId(0));
        assert_eq!(seeds.len(), 2);
        assert!(steps > 0);
    }

    #[test]
    fn binomial_tail() {
        assert!((binomial_upper_tail(2, 1, 0.5) - 0.75).abs() < 1e-12);
        assert!((binomial_upper_tail(10, 10, 0.5) - 0.5f64.powi(10)).abs() < 1e-15);
        assert_eq!(binomial_upper_tail(10, 0, 0.3), 1.0);
        assert!(rate_exceeds(100, 75, 0.6, 0.05));
        assert!(!rate_exceeds(100, 62, 0.6, 0.05));
    }
}
