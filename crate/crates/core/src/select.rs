//! Greedy maximum coverage over a sketch.
//!
//! [`build_seed_set`] keeps vertices in a doubly linked list of degree groups
//! (descending, nonempty), each group a doubly linked list of vertices. Picking
//! a seed kills its live hyperedges and moves every other member down one
//! group per killed edge, so a full run touches each incidence a constant
//! number of times.
//!
//! Ties go to the smallest id. A vertex only ever moves into a group whose key
//! is below the current maximum, so once a group reaches the top it can only
//! shrink. Each group is therefore sorted by id at most once, the first time it
//! is the top group with members out of order, and picks after that read its
//! head.
//!
//! [`naive_greedy`] recomputes every residual degree each round and serves as
//! the reference implementation.

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::sketch::RRSketch;

const NIL: u32 = u32::MAX;

/// Ordered greedy picks and their sketch coverage.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSet {
    pub seeds: Vec<NodeId>,
    /// Hyperedges met by `seeds`.
    pub covered_edges: usize,
    /// `n * covered_edges / m(H)`.
    pub estimate: f64,
    /// Requested `k` when it exceeded `n` and was clamped.
    pub clamped_from: Option<usize>,
}

impl SeedSet {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.seeds.contains(&v)
    }
}

/// Elementary operations performed by one greedy run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GreedyStats {
    pub work: u64,
}

#[derive(Clone, Copy, Debug)]
struct Group {
    key: usize,
    head: u32,
    tail: u32,
    /// Neighbouring group with larger key.
    up: u32,
    /// Neighbouring group with smaller key.
    down: u32,
    sorted: bool,
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    group: u32,
    prev: u32,
    next: u32,
}

/// Vertices bucketed by residual degree.
#[derive(Debug)]
pub struct DegreeBuckets {
    groups: Vec<Group>,
    free: Vec<u32>,
    top: u32,
    slots: Vec<Slot>,
    work: u64,
}

impl DegreeBuckets {
    /// Groups vertices by `degrees` with a counting sort; within each group
    /// vertices start in id order.
    pub fn new(degrees: &[usize]) -> Self {
        let n = degrees.len();
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut count = vec![0u32; max + 1];
        for &d in degrees {
            count[d] += 1;
        }
        let mut b = DegreeBuckets {
            groups: Vec::new(),
            free: Vec::new(),
            top: NIL,
            slots: vec![
                Slot {
                    group: NIL,
                    prev: NIL,
                    next: NIL
                };
                n
            ],
            work: (n + max + 1) as u64,
        };
        let mut group_of_key = vec![NIL; max + 1];
        let mut last = NIL;
        for key in (0..=max).rev() {
            if count[key] == 0 {
                continue;
            }
            let g = b.alloc(key);
            b.groups[g as usize].up = last;
            if last == NIL {
                b.top = g;
            } else {
                b.groups[last as usize].down = g;
            }
            group_of_key[key] = g;
            last = g;
        }
        for (v, &d) in degrees.iter().enumerate() {
            b.push_back(group_of_key[d], v as u32);
        }
        b
    }

    fn alloc(&mut self, key: usize) -> u32 {
        let g = Group {
            key,
            head: NIL,
            tail: NIL,
            up: NIL,
            down: NIL,
            sorted: true,
        };
        match self.free.pop() {
            Some(i) => {
                self.groups[i as usize] = g;
                i
            }
            None => {
                self.groups.push(g);
                (self.groups.len() - 1) as u32
            }
        }
    }

    fn push_back(&mut self, g: u32, v: u32) {
        let grp = &mut self.groups[g as usize];
        let tail = grp.tail;
        if tail != NIL && tail > v {
            grp.sorted = false;
        }
        grp.tail = v;
        if tail == NIL {
            grp.head = v;
        }
        self.slots[v as usize] = Slot {
            group: g,
            prev: tail,
            next: NIL,
        };
        if tail != NIL {
            self.slots[tail as usize].next = v;
        }
        self.work += 1;
    }

    /// Unlinks `v`; frees its group if that leaves it empty. Returns the
    /// groups that were above and below `v`'s group.
    fn unlink(&mut self, v: u32) -> (u32, u32) {
        let Slot { group: g, prev, next } = self.slots[v as usize];
        debug_assert_ne!(g, NIL, "vertex {v} not bucketed");
        if prev != NIL {
            self.slots[prev as usize].next = next;
        } else {
            self.groups[g as usize].head = next;
        }
        if next != NIL {
            self.slots[next as usize].prev = prev;
        } else {
            self.groups[g as usize].tail = prev;
        }
        self.slots[v as usize].group = NIL;
        self.work += 1;
        let Group { up, down, head, .. } = self.groups[g as usize];
        if head == NIL {
            if up != NIL {
                self.groups[up as usize].down = down;
            } else {
                self.top = down;
            }
            if down != NIL {
                self.groups[down as usize].up = up;
            }
            self.free.push(g);
            (up, down)
        } else {
            (g, down)
        }
    }

    pub fn remove(&mut self, v: NodeId) {
        self.unlink(v.0);
    }

    pub fn key_of(&self, v: NodeId) -> Option<usize> {
        let g = self.slots[v.index()].group;
        (g != NIL).then(|| self.groups[g as usize].key)
    }

    /// Moves `v` from its group to the group keyed one lower.
    pub fn decrement(&mut self, v: NodeId) {
        self.decrease(v, 1);
    }

    /// Lowers `v`'s key by `by`, walking down past at most `by - 1` groups.
    pub fn decrease(&mut self, v: NodeId, by: usize) {
        if by == 0 {
            return;
        }
        let g = self.slots[v.index()].group;
        let key = self.groups[g as usize].key;
        debug_assert!(key >= by);
        let target_key = key - by;
        let (mut above, mut below) = self.unlink(v.0);
        while below != NIL && self.groups[below as usize].key > target_key {
            above = below;
            below = self.groups[below as usize].down;
            self.work += 1;
        }
        let target = if below != NIL && self.groups[below as usize].key == target_key {
            below
        } else {
            let ng = self.alloc(target_key);
            self.groups[ng as usize].up = above;
            self.groups[ng as usize].down = below;
            if above != NIL {
                self.groups[above as usize].down = ng;
            } else {
                self.top = ng;
            }
            if below != NIL {
                self.groups[below as usize].up = ng;
            }
            ng
        };
        self.push_back(target, v.0);
    }

    fn sort_group(&mut self, g: u32) {
        let mut members = Vec::new();
        let mut cur = self.groups[g as usize].head;
        while cur != NIL {
            members.push(cur);
            cur = self.slots[cur as usize].next;
        }
        members.sort_unstable();
        let len = members.len() as u64;
        self.work += len * (64 - len.leading_zeros() as u64).max(1);
        for (i, &v) in members.iter().enumerate() {
            self.slots[v as usize].prev = if i == 0 { NIL } else { members[i - 1] };
            self.slots[v as usize].next = members.get(i + 1).copied().unwrap_or(NIL);
        }
        let grp = &mut self.groups[g as usize];
        grp.head = members[0];
        grp.tail = *members.last().unwrap();
        grp.sorted = true;
    }

    /// Smallest-id vertex of the largest key, with that key.
    pub fn peek_max(&mut self) -> Option<(NodeId, usize)> {
        if self.top == NIL {
            return None;
        }
        let g = self.top;
        if !self.groups[g as usize].sorted {
            self.sort_group(g);
        }
        let grp = &self.groups[g as usize];
        Some((NodeId(grp.head), grp.key))
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    /// Walks groups top-down, checking link and ordering invariants.
    #[cfg(test)]
    fn validate(&self, expect: &[Option<usize>]) {
        let mut seen = vec![false; self.slots.len()];
        let mut g = self.top;
        let mut prev_key = usize::MAX;
        let mut up = NIL;
        while g != NIL {
            let grp = self.groups[g as usize];
            assert!(grp.key < prev_key, "groups not strictly descending");
            assert_eq!(grp.up, up);
            assert_ne!(grp.head, NIL, "empty group linked");
            let mut v = grp.head;
            let mut last = NIL;
            while v != NIL {
                assert_eq!(self.slots[v as usize].group, g);
                assert_eq!(self.slots[v as usize].prev, last);
                assert_eq!(Some(grp.key), expect[v as usize]);
                if grp.sorted && last != NIL {
                    assert!(last < v);
                }
                seen[v as usize] = true;
                last = v;
                v = self.slots[v as usize].next;
            }
            assert_eq!(grp.tail, last);
            prev_key = grp.key;
            up = g;
            g = grp.down;
        }
        for (v, e) in expect.iter().enumerate() {
            assert_eq!(seen[v], e.is_some(), "vertex {v} membership");
        }
    }
}

fn effective_k(sk: &RRSketch, k: usize) -> Result<(usize, Option<usize>)> {
    if k < 1 {
        return Err(Error::domain("k must be at least 1"));
    }
    if sk.is_empty() {
        return Err(Error::State("sketch has no hyperedges".into()));
    }
    Ok(if k > sk.n() { (sk.n(), Some(k)) } else { (k, None) })
}

fn finish(sk: &RRSketch, seeds: Vec<NodeId>, covered: usize, clamped_from: Option<usize>) -> SeedSet {
    SeedSet {
        seeds,
        covered_edges: covered,
        estimate: sk.n() as f64 * covered as f64 / sk.num_edges() as f64,
        clamped_from,
    }
}

fn fill_smallest(chosen: &mut [bool], seeds: &mut Vec<NodeId>, k: usize) -> u64 {
    let mut work = 0;
    for (v, taken) in chosen.iter_mut().enumerate() {
        if seeds.len() == k {
            break;
        }
        work += 1;
        if !*taken {
            *taken = true;
            seeds.push(NodeId(v as u32));
        }
    }
    work
}

/// Greedy max coverage: `k` rounds of taking the vertex meeting the most live
/// hyperedges (smallest id on ties) and killing those hyperedges. If every
/// residual degree reaches zero early, the remaining slots go to the smallest
/// unchosen ids. `k > n` is clamped to `n`.
pub fn build_seed_set(sk: &RRSketch, k: usize) -> Result<SeedSet> {
    build_seed_set_with_stats(sk, k).map(|(s, _)| s)
}

pub fn build_seed_set_with_stats(sk: &RRSketch, k: usize) -> Result<(SeedSet, GreedyStats)> {
    let (k, clamped_from) = effective_k(sk, k)?;
    let n = sk.n();
    let degrees: Vec<usize> = (0..n as u32).map(|v| sk.degree(NodeId(v))).collect();
    let mut buckets = DegreeBuckets::new(&degrees);
    let mut alive = vec![true; sk.num_edges()];
    let mut chosen = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    let mut covered = 0usize;
    let mut extra = 0u64;
    // per-pick decrements are batched per vertex
    let mut pending = vec![0usize; n];
    let mut touched: Vec<NodeId> = Vec::new();

    while seeds.len() < k {
        let Some((v, deg)) = buckets.peek_max() else { break };
        if deg == 0 {
            break;
        }
        buckets.remove(v);
        chosen[v.index()] = true;
        seeds.push(v);
        if seeds.len() == k {
            // residual degree is exactly the number of newly covered edges
            covered += deg;
            break;
        }
        for &e in sk.incidence(v) {
            extra += 1;
            if !std::mem::replace(&mut alive[e as usize], false) {
                continue;
            }
            covered += 1;
            for &u in sk.edge(e as usize) {
                extra += 1;
                if u != v {
                    let c = &mut pending[u.index()];
                    if *c == 0 {
                        touched.push(u);
                    }
                    *c += 1;
                }
            }
        }
        for u in touched.drain(..) {
            buckets.decrease(u, std::mem::take(&mut pending[u.index()]));
        }
    }
    extra += fill_smallest(&mut chosen, &mut seeds, k);
    let stats = GreedyStats {
        work: buckets.work() + extra,
    };
    Ok((finish(sk, seeds, covered, clamped_from), stats))
}

/// Reference greedy that rescans every vertex each round. Same contract and
/// tie-breaking as [`build_seed_set`].
pub fn naive_greedy(sk: &RRSketch, k: usize) -> Result<SeedSet> {
    let (k, clamped_from) = effective_k(sk, k)?;
    let n = sk.n();
    let mut alive = vec![true; sk.num_edges()];
    let mut chosen = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    let mut covered = 0usize;

    while seeds.len() < k {
        let mut residual = vec![0usize; n];
        for (i, e) in sk.edges().enumerate() {
            if alive[i] {
                for v in e {
                    residual[v.index()] += 1;
                }
            }
        }
        let mut best: Option<(usize, usize)> = None;
        for v in 0..n {
            if !chosen[v] && residual[v] > best.map_or(0, |b| b.1) {
                best = Some((v, residual[v]));
            }
        }
        let Some((v, _)) = best else { break };
        chosen[v] = true;
        seeds.push(NodeId(v as u32));
        for (i, e) in sk.edges().enumerate() {
            if alive[i] && e.contains(&NodeId(v as u32)) {
                alive[i] = false;
                covered += 1;
            }
        }
    }
    fill_smallest(&mut chosen, &mut seeds, k);
    Ok(finish(sk, seeds, covered, clamped_from))
}
