//! Bounded uniform sampling of a fully dynamic edge stream.
//!
//! The sampler keeps at most `budget` edges and stays uniform under deletions
//! by pairing future insertions against the compensation counters `c_bad`
//! (deleted edges that were in the sample) and `c_good` (deleted edges that
//! were not).

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stream::{Edge, Side, VertexId};

/// Per-side adjacency with sorted, duplicate-free neighbor lists. A vertex
/// whose last edge is removed drops out of the map entirely.
#[derive(Debug, Default, Clone)]
pub(crate) struct Adjacency {
    left: HashMap<u32, Vec<u32>>,
    right: HashMap<u32, Vec<u32>>,
}

impl Adjacency {
    pub(crate) fn add_edge(&mut self, edge: Edge) {
        insert_sorted(self.left.entry(edge.left).or_default(), edge.right);
        insert_sorted(self.right.entry(edge.right).or_default(), edge.left);
    }

    pub(crate) fn remove_edge(&mut self, edge: Edge) {
        remove_entry(&mut self.left, edge.left, edge.right);
        remove_entry(&mut self.right, edge.right, edge.left);
    }

    /// Sorted neighbor ordinals of `v` (ordinals live on the opposite side).
    pub(crate) fn neighbors(&self, v: VertexId) -> &[u32] {
        let map = match v.side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        map.get(&v.ordinal).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }
}

pub(crate) fn insert_sorted(list: &mut Vec<u32>, value: u32) {
    if let Err(pos) = list.binary_search(&value) {
        list.insert(pos, value);
    }
}

fn remove_entry(map: &mut HashMap<u32, Vec<u32>>, key: u32, value: u32) {
    if let Some(list) = map.get_mut(&key) {
        if let Ok(pos) = list.binary_search(&value) {
            list.remove(pos);
        }
        if list.is_empty() {
            map.remove(&key);
        }
    }
}

/// Flat indexable registry of the stored edges, for O(1) uniform eviction.
#[derive(Debug, Default, Clone)]
pub(crate) struct EdgeRegistry {
    edges: Vec<Edge>,
    positions: HashMap<Edge, usize>,
}

impl EdgeRegistry {
    pub(crate) fn len(&self) -> usize {
        self.edges.len()
    }

    pub(crate) fn contains(&self, edge: &Edge) -> bool {
        self.positions.contains_key(edge)
    }

    pub(crate) fn push(&mut self, edge: Edge) {
        self.positions.insert(edge, self.edges.len());
        self.edges.push(edge);
    }

    pub(crate) fn swap_remove(&mut self, idx: usize) -> Edge {
        let removed = self.edges.swap_remove(idx);
        self.positions.remove(&removed);
        if let Some(moved) = self.edges.get(idx) {
            self.positions.insert(*moved, idx);
        }
        removed
    }

    pub(crate) fn remove_edge(&mut self, edge: &Edge) -> bool {
        match self.positions.get(edge) {
            Some(&idx) => {
                self.swap_remove(idx);
                true
            }
            None => false,
        }
    }

    pub(crate) fn edges(&self) -> &[Edge] {
        &self.edges
    }
}

/// The bounded sample S: adjacency over both vertex spaces plus the edge
/// registry. Symmetric by construction; `len() <= budget` at all times.
#[derive(Debug, Default, Clone)]
pub struct SampleGraph {
    pub(crate) adj: Adjacency,
    pub(crate) registry: EdgeRegistry,
}

impl SampleGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of stored edges |S|.
    pub fn len(&self) -> usize {
        self.registry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registry.len() == 0
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.registry.contains(edge)
    }

    /// Stored edges in registry order.
    pub fn edges(&self) -> &[Edge] {
        self.registry.edges()
    }

    pub(crate) fn apply_store(&mut self, edge: Edge) {
        self.adj.add_edge(edge);
    }

    pub(crate) fn apply_unstore(&mut self, edge: Edge) {
        self.adj.remove_edge(edge);
    }
}

/// Random Pairing bookkeeping: live-edge count, compensation counters, the
/// memory budget, and the seeded draw source.
///
/// One stream of draws is shared by insertion decisions and eviction choices
/// in event order, so a fixed seed fixes the whole trajectory.
#[derive(Debug, Clone)]
pub struct PairingState {
    pub live_edges: u64,
    pub c_bad: u64,
    pub c_good: u64,
    pub budget: usize,
    rng: ChaCha8Rng,
}

impl PairingState {
    pub fn new(budget: usize, seed: u64) -> Self {
        PairingState {
            live_edges: 0,
            c_bad: 0,
            c_good: 0,
            budget,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Sampling decision for an insertion. Mutates the registry; adjacency
    /// catch-up is the caller's job (immediate for the sequential path,
    /// deferred to version deltas for the mini-batch path).
    pub(crate) fn decide_insert(
        &mut self,
        registry: &mut EdgeRegistry,
        edge: Edge,
    ) -> InsertOutcome {
        self.live_edges += 1;
        if self.c_bad + self.c_good == 0 {
            if registry.len() < self.budget {
                registry.push(edge);
                InsertOutcome::Added
            } else if self.rng.random::<f64>() < self.budget as f64 / self.live_edges as f64 {
                let idx = self.rng.random_range(0..registry.len());
                let evicted = registry.swap_remove(idx);
                registry.push(edge);
                InsertOutcome::ReplacedExisting(evicted)
            } else {
                InsertOutcome::Skipped
            }
        } else if self.rng.random::<f64>() < self.c_bad as f64 / (self.c_bad + self.c_good) as f64 {
            registry.push(edge);
            self.c_bad -= 1;
            InsertOutcome::Added
        } else {
            self.c_good -= 1;
            InsertOutcome::Skipped
        }
    }

    /// Sampling decision for a deletion of a live edge.
    pub(crate) fn decide_delete(
        &mut self,
        registry: &mut EdgeRegistry,
        edge: Edge,
    ) -> DeleteOutcome {
        self.live_edges -= 1;
        if registry.remove_edge(&edge) {
            self.c_bad += 1;
            DeleteOutcome::RemovedFromSample
        } else {
            self.c_good += 1;
            DeleteOutcome::NotInSample
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Added,
    ReplacedExisting(Edge),
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeleteOutcome {
    RemovedFromSample,
    NotInSample,
}

/// Processes an edge insertion against the sample (Random Pairing).
/// The edge must be absent from the live graph (caller-validated).
pub fn insert_to_sample(
    state: &mut PairingState,
    graph: &mut SampleGraph,
    edge: Edge,
) -> InsertOutcome {
    let outcome = state.decide_insert(&mut graph.registry, edge);
    match outcome {
        InsertOutcome::Added => graph.apply_store(edge),
        InsertOutcome::ReplacedExisting(evicted) => {
            graph.apply_unstore(evicted);
            graph.apply_store(edge);
        }
        InsertOutcome::Skipped => {}
    }
    outcome
}

/// Processes an edge deletion against the sample (Random Pairing).
/// The edge must be present in the live graph (caller-validated).
pub fn delete_from_sample(
    state: &mut PairingState,
    graph: &mut SampleGraph,
    edge: Edge,
) -> DeleteOutcome {
    let outcome = state.decide_delete(&mut graph.registry, edge);
    if outcome == DeleteOutcome::RemovedFromSample {
        graph.apply_unstore(edge);
    }
    outcome
}

/// Exact current neighbor set of `v` in the sample, sorted by ordinal.
/// Unknown vertices yield the empty set.
pub fn neighbors_in_sample(graph: &SampleGraph, v: VertexId) -> Vec<VertexId> {
    let opposite = match v.side {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    };
    graph
        .adj
        .neighbors(v)
        .iter()
        .map(|&ordinal| VertexId { side: opposite, ordinal })
        .collect()
}

/// Sorted intersection of two sorted, duplicate-free sets. Switches from a
/// linear merge to galloping binary search when the sizes are lopsided.
pub fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let mut cost = 0u64;
    intersect_visit(a, b, &mut cost, |x| out.push(x));
    out
}

const GALLOP_RATIO: usize = 16;

/// Visits each common element once; `cost` tallies element comparisons
/// (the workload metric reported per worker).
pub(crate) fn intersect_visit<F: FnMut(u32)>(a: &[u32], b: &[u32], cost: &mut u64, mut visit: F) {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if small.is_empty() {
        return;
    }
    if large.len() >= small.len().saturating_mul(GALLOP_RATIO) {
        let mut rest = large;
        for &x in small {
            let pos = rest.partition_point(|&y| y < x);
            *cost += (usize::BITS - rest.len().leading_zeros()) as u64 + 1;
            rest = &rest[pos..];
            if rest.first() == Some(&x) {
                visit(x);
                rest = &rest[1..];
            }
        }
    } else {
        let (mut i, mut j) = (0, 0);
        while i < small.len() && j < large.len() {
            *cost += 1;
            match small[i].cmp(&large[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    visit(small[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
    }
}

/// Counts intersection members other than `excluded`.
pub(crate) fn intersect_count_excluding(
    a: &[u32],
    b: &[u32],
    excluded: u32,
    cost: &mut u64,
) -> u64 {
    let mut count = 0u64;
    intersect_visit(a, b, cost, |x| {
        if x != excluded {
            count += 1;
        }
    });
    count
}

/// Checkpoint image of (S, PairingState) with a CSV dump/load round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSnapshot {
    pub live_edges: u64,
    pub c_bad: u64,
    pub c_good: u64,
    pub budget: usize,
    pub edges: Vec<Edge>,
}

impl SampleSnapshot {
    pub fn capture(state: &PairingState, graph: &SampleGraph) -> Self {
        SampleSnapshot {
            live_edges: state.live_edges,
            c_bad: state.c_bad,
            c_good: state.c_good,
            budget: state.budget,
            edges: graph.edges().to_vec(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("live_edges,c_bad,c_good,budget\n");
        out.push_str(&format!(
            "{},{},{},{}\n",
            self.live_edges, self.c_bad, self.c_good, self.budget
        ));
        out.push_str("left,right\n");
        for edge in &self.edges {
            out.push_str(&format!("{},{}\n", edge.left, edge.right));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::Config(format!("malformed snapshot line: {line:?}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(""))?;
        if header != "live_edges,c_bad,c_good,budget" {
            return Err(bad(header));
        }
        let state_line = lines.next().ok_or_else(|| bad(""))?;
        let fields: Vec<&str> = state_line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad(state_line));
        }
        let live_edges = fields[0].parse().map_err(|_| bad(state_line))?;
        let c_bad = fields[1].parse().map_err(|_| bad(state_line))?;
        let c_good = fields[2].parse().map_err(|_| bad(state_line))?;
        let budget = fields[3].parse().map_err(|_| bad(state_line))?;
        let edge_header = lines.next().ok_or_else(|| bad(""))?;
        if edge_header != "left,right" {
            return Err(bad(edge_header));
        }
        let mut edges = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 {
                return Err(bad(line));
            }
            edges.push(Edge::new(
                fields[0].parse().map_err(|_| bad(line))?,
                fields[1].parse().map_err(|_| bad(line))?,
            ));
        }
        Ok(SampleSnapshot { live_edges, c_bad, c_good, budget, edges })
    }

    /// Rebuilds a live (state, graph) pair; the draw source restarts from
    /// `seed`, so this is for checkpoint comparison, not resumption of the
    /// original random trajectory.
    pub fn restore(&self, seed: u64) -> (PairingState, SampleGraph) {
        let mut state = PairingState::new(self.budget, seed);
        state.live_edges = self.live_edges;
        state.c_bad = self.c_bad;
        state.c_good = self.c_good;
        let mut graph = SampleGraph::new();
        for &edge in &self.edges {
            graph.registry.push(edge);
            graph.apply_store(edge);
        }
        (state, graph)
    }
}
