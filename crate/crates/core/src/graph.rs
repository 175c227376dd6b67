//! Weighted directed graph with forward and transpose adjacency.
//!
//! Both directions are stored as flat CSR arrays built once at construction.
//! Each adjacency record carries the id of the edge it came from, so the two
//! views can be matched up and per-edge coins can be shared between them.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 0-based vertex id.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One directed edge as given at construction time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub p: f64,
}

/// Adjacency record. `node` is the far endpoint in the direction being
/// traversed, `edge` the index of the originating [`Edge`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub node: NodeId,
    pub p: f64,
    pub edge: u32,
}

/// Traversal direction for cascades.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Transpose,
}

#[derive(Clone, Debug)]
struct Csr {
    offsets: Vec<usize>,
    links: Vec<Link>,
}

impl Csr {
    fn build(n: usize, edges: &[Edge], key: impl Fn(&Edge) -> (NodeId, NodeId)) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for e in edges {
            offsets[key(e).0.index() + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut links = vec![
            Link {
                node: NodeId(0),
                p: 0.0,
                edge: 0,
            };
            edges.len()
        ];
        // stable: edge-id order within each list
        for (id, e) in edges.iter().enumerate() {
            let (from, to) = key(e);
            let slot = &mut fill[from.index()];
            links[*slot] = Link {
                node: to,
                p: e.p,
                edge: id as u32,
            };
            *slot += 1;
        }
        Csr { offsets, links }
    }

    #[inline]
    fn row(&self, v: usize) -> &[Link] {
        &self.links[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Directed graph whose edges carry independent activation probabilities.
///
/// Immutable once built. Self-loops and parallel edges are kept; every edge
/// record is its own coin.
#[derive(Clone, Debug)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<Edge>,
    out: Csr,
    inc: Csr,
}

impl PartialEq for WeightedDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl WeightedDigraph {
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::domain(format!("node count {n} exceeds u32 id space")));
        }
        let mut list = Vec::new();
        for (u, v, p) in edges {
            for w in [u, v] {
                if w as usize >= n {
                    return Err(Error::Bounds { node: w as u64, n });
                }
            }
            check_probability(p)?;
            list.push(Edge {
                source: NodeId(u),
                target: NodeId(v),
                p,
            });
        }
        if list.len() > u32::MAX as usize {
            return Err(Error::domain("edge count exceeds u32 id space"));
        }
        Ok(Self::from_checked(n, list))
    }

    fn from_checked(n: usize, edges: Vec<Edge>) -> Self {
        let out = Csr::build(n, &edges, |e| (e.source, e.target));
        let inc = Csr::build(n, &edges, |e| (e.target, e.source));
        WeightedDigraph { n, edges, out, inc }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_checked(n, Vec::new())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n as u32).map(NodeId)
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v.index() < self.n {
            Ok(())
        } else {
            Err(Error::Bounds {
                node: v.0 as u64,
                n: self.n,
            })
        }
    }

    /// Out-links of `v`. Panics if `v` is out of range.
    #[inline]
    pub fn out_links(&self, v: NodeId) -> &[Link] {
        self.out.row(v.index())
    }

    /// In-links of `v` (each link's `node` is the edge source). Panics if `v`
    /// is out of range.
    #[inline]
    pub fn in_links(&self, v: NodeId) -> &[Link] {
        self.inc.row(v.index())
    }

    #[inline]
    pub fn links(&self, v: NodeId, dir: Direction) -> &[Link] {
        match dir {
            Direction::Forward => self.out_links(v),
            Direction::Transpose => self.in_links(v),
        }
    }

    /// Bounds-checked in-links of `v`, in stored order.
    pub fn transpose_neighbors(&self, v: NodeId) -> Result<&[Link]> {
        self.check_node(v)?;
        Ok(self.in_links(v))
    }

    /// Bounds-checked out-links of `v`, in stored order.
    pub fn neighbors(&self, v: NodeId) -> Result<&[Link]> {
        self.check_node(v)?;
        Ok(self.out_links(v))
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_links(v).len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_links(v).len()
    }

    /// The graph with every edge reversed, edge ids preserved.
    pub fn transposed(&self) -> WeightedDigraph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                source: e.target,
                target: e.source,
                p: e.p,
            })
            .collect();
        Self::from_checked(self.n, edges)
    }

    /// Reads the tab-separated edge-list format.
    ///
    /// Records are `u<TAB>v<TAB>p`. Lines starting with `#` and blank lines are
    /// skipped. An optional leading `nodes<TAB>N` record fixes the node count;
    /// without it the count is one more than the largest id seen.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut seen_record = false;
        let mut max_id: Option<u32> = None;
        let mut edges = Vec::new();

        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.first() == Some(&"nodes") {
                if seen_record {
                    return Err(parse_err(lineno, "`nodes` header must precede all edges"));
                }
                if fields.len() != 2 {
                    return Err(parse_err(lineno, "expected `nodes<TAB>N`"));
                }
                let count = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad node count: {e}")))?;
                declared = Some(count);
                seen_record = true;
                continue;
            }
            seen_record = true;
            if fields.len() != 3 {
                return Err(parse_err(
                    lineno,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            let u = parse_id(fields[0], lineno)?;
            let v = parse_id(fields[1], lineno)?;
            let p = fields[2]
                .parse::<f64>()
                .map_err(|e| parse_err(lineno, format!("bad probability {:?}: {e}", fields[2])))?;
            check_probability(p).map_err(|e| match e {
                Error::Domain(msg) => Error::Domain(format!("line {lineno}: {msg}")),
                other => other,
            })?;
            if let Some(count) = declared {
                for w in [u, v] {
                    if w as usize >= count {
                        return Err(parse_err(
                            lineno,
                            format!("node id {w} exceeds declared node count {count}"),
                        ));
                    }
                }
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push(Edge {
                source: NodeId(u),
                target: NodeId(v),
                p,
            });
        }

        let n = declared.unwrap_or_else(|| max_id.map_or(0, |m| m as usize + 1));
        if edges.len() > u32::MAX as usize {
            return Err(Error::domain("edge count exceeds u32 id space"));
        }
        Ok(Self::from_checked(n, edges))
    }

    /// Writes the edge-list format, always including the `nodes` header so
    /// trailing isolated vertices survive a round trip.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nodes\t{}", self.n)?;
        for e in &self.edges {
            writeln!(w, "{}\t{}\t{}", e.source, e.target, e.p)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("edge probability {p} outside [0, 1]")))
    }
}

fn parse_id(s: &str, line: usize) -> Result<u32> {
    s.parse::<u32>()
        .map_err(|e| parse_err(line, format!("bad node id {s:?}: {e}")))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(s: &str) -> Result<WeightedDigraph> {
        WeightedDigraph::load_edge_list(s.as_bytes())
    }

    fn pairs(links: &[Link]) -> Vec<(u32, f64)> {
        links.iter().map(|l| (l.node.0, l.p)).collect()
    }

    #[test]
    fn single_edge() {
        let g = load("0\t1\t1.0\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
        assert_eq!(
            g.edges()[0],
            Edge {
                source: NodeId(0),
                target: NodeId(1),
                p: 1.0
            }
        );
    }

    #[test]
    fn header_only() {
        let g = load("nodes\t3\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 0));
    }

    #[test]
    fn comments_and_crlf() {
        let g = load("# a comment\r\nnodes\t4\r\n0\t3\t0.25\r\n# trailing\n").unwrap();
        assert_eq!((g.n(), g.m()), (4, 1));
        assert_eq!(g.edges()[0].p, 0.25);
    }

    #[test]
    fn probability_out_of_range() {
        assert!(matches!(load("0\t1\t1.5"), Err(Error::Domain(_))));
        assert!(matches!(load("0\t1\t-0.1"), Err(Error::Domain(_))));
        assert!(matches!(load("0\t1\tNaN"), Err(Error::Domain(_))));
    }

    #[test]
    fn malformed_lines_report_line_number() {
        match load("0\t1\t0.5\n0 1 0.5\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load("a\t1\t0.5"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load("0\t1\tx"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            load("0\t1\t0.5\nnodes\t4"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            load("nodes\t2\n0\t2\t0.5"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn transpose_neighbors_examples() {
        let g = load("0\t1\t0.5").unwrap();
        assert_eq!(pairs(g.transpose_neighbors(NodeId(1)).unwrap()), vec![(0, 0.5)]);
        assert!(g.transpose_neighbors(NodeId(0)).unwrap().is_empty());
        assert!(matches!(
            g.transpose_neighbors(NodeId(2)),
            Err(Error::Bounds { node: 2, n: 2 })
        ));

        let g = load("0\t1\t0.3\n2\t1\t0.7").unwrap();
        assert_eq!(
            pairs(g.transpose_neighbors(NodeId(1)).unwrap()),
            vec![(0, 0.3), (2, 0.7)]
        );
    }

    #[test]
    fn parallel_edges_and_self_loops_kept() {
        let g = WeightedDigraph::from_edges(2, [(0, 1, 0.5), (0, 1, 0.5), (1, 1, 0.2)]).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(g.out_degree(NodeId(0)), 2);
        assert_eq!(g.in_degree(NodeId(1)), 3);
    }

    fn arb_graph() -> impl Strategy<Value = WeightedDigraph> {
        (1usize..12).prop_flat_map(|n| {
            let nn = n as u32;
            proptest::collection::vec((0..nn, 0..nn, 0.0f64..=1.0), 0..40)
                .prop_map(move |es| WeightedDigraph::from_edges(n, es).unwrap())
        })
    }

    proptest! {
        #[test]
        fn write_then_load_round_trips(g in arb_graph()) {
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf).unwrap();
            let back = WeightedDigraph::load_edge_list(buf.as_slice()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn degree_sums_equal_m(g in arb_graph()) {
            let outs: usize = g.nodes().map(|v| g.out_degree(v)).sum();
            let ins: usize = g.nodes().map(|v| g.in_degree(v)).sum();
            prop_assert_eq!(outs, g.m());
            prop_assert_eq!(ins, g.m());
        }

        #[test]
        fn transpose_view_matches_explicit_transpose(g in arb_graph()) {
            let t = g.transposed();
            for v in g.nodes() {
                prop_assert_eq!(g.transpose_neighbors(v).unwrap(), t.neighbors(v).unwrap());
                prop_assert_eq!(g.out_links(v), t.in_links(v));
            }
        }
    }
}
