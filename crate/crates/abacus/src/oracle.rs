//! Exact reference counts: ground-truth butterfly totals, the butterfly
//! overlap census, and the closed-form variance of the sampled estimator.

use std::borrow::Cow;
use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::estimator::{count_butterflies_with_sample, SampleRead};
use crate::sample::{intersect, Adjacency};
use crate::stream::{Edge, EdgeEvent, Sign, VertexId};

/// The full live graph, no sampling. Doubles as a `SampleRead` source so the
/// per-edge counting kernel can run against it unchanged.
#[derive(Debug, Default, Clone)]
pub struct ExactGraph {
    adj: Adjacency,
    present: HashSet<Edge>,
}

impl ExactGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replays a full stream; fails on any validity violation.
    pub fn from_events(events: &[EdgeEvent]) -> Result<Self> {
        let mut graph = Self::new();
        for event in events {
            graph.apply(event)?;
        }
        Ok(graph)
    }

    pub fn apply(&mut self, event: &EdgeEvent) -> Result<()> {
        match event.sign {
            Sign::Insert => {
                if !self.present.insert(event.edge) {
                    return Err(Error::StreamInvariantViolation {
                        index: event.index,
                        reason: "insert of an edge that is already present".into(),
                    });
                }
                self.adj.add_edge(event.edge);
            }
            Sign::Delete => {
                if !self.present.remove(&event.edge) {
                    return Err(Error::StreamInvariantViolation {
                        index: event.index,
                        reason: "delete of an edge that is not present".into(),
                    });
                }
                self.adj.remove_edge(event.edge);
            }
        }
        Ok(())
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.present.contains(edge)
    }

    pub fn live_edges(&self) -> usize {
        self.present.len()
    }

    fn right_vertices(&self) -> BTreeSet<u32> {
        self.present.iter().map(|e| e.right).collect()
    }

    fn left_vertices(&self) -> BTreeSet<u32> {
        self.present.iter().map(|e| e.left).collect()
    }
}

impl SampleRead for ExactGraph {
    fn neighbors(&self, v: VertexId) -> Cow<'_, [u32]> {
        Cow::Borrowed(self.adj.neighbors(v))
    }

    fn degree(&self, v: VertexId) -> usize {
        self.adj.degree(v)
    }
}

/// Exact butterfly count by wedge accumulation: every left vertex
/// contributes one wedge per pair of its right neighbors, and a right pair
/// with w wedges closes C(w,2) butterflies.
pub fn exact_butterfly_count(graph: &ExactGraph) -> u64 {
    let mut wedges: HashMap<(u32, u32), u64> = HashMap::new();
    for &l in &graph.left_vertices() {
        let neighbors = graph.adj.neighbors(VertexId::left(l));
        for (i, &r1) in neighbors.iter().enumerate() {
            for &r2 in &neighbors[i + 1..] {
                *wedges.entry((r1, r2)).or_insert(0) += 1;
            }
        }
    }
    wedges.values().map(|&w| w * (w - 1) / 2).sum()
}

/// Ground-truth count trajectory of a stream, maintained incrementally: one
/// per-edge count per event against the full graph instead of a from-scratch
/// recount. `offsets` are 1-based event counts to snapshot.
#[derive(Debug, Clone)]
pub struct ExactStreamCount {
    pub final_count: u64,
    pub checkpoints: Vec<(usize, u64)>,
    pub graph: ExactGraph,
}

pub fn exact_count_stream(events: &[EdgeEvent], offsets: &[usize]) -> Result<ExactStreamCount> {
    let mut offsets: Vec<usize> = offsets.to_vec();
    offsets.sort_unstable();
    offsets.dedup();
    let mut next_offset = 0usize;
    let mut checkpoints = Vec::with_capacity(offsets.len());
    let mut graph = ExactGraph::new();
    let mut count = 0i64;
    for (done, event) in events.iter().enumerate() {
        // Insertions are counted before the edge lands; deletions after it
        // landed but with the arriving edge masked out of the neighbor sets.
        // Both give the number of butterflies containing the edge.
        match event.sign {
            Sign::Insert => {
                count += count_butterflies_with_sample(event.edge, &graph) as i64;
                graph.apply(event)?;
            }
            Sign::Delete => {
                count -= count_butterflies_with_sample(event.edge, &graph) as i64;
                graph.apply(event)?;
            }
        }
        debug_assert!(count >= 0);
        if next_offset < offsets.len() && offsets[next_offset] == done + 1 {
            checkpoints.push((done + 1, count as u64));
            next_offset += 1;
        }
    }
    Ok(ExactStreamCount { final_count: count as u64, checkpoints, graph })
}

/// A butterfly, canonically keyed: l1 < l2, r1 < r2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Butterfly {
    pub l1: u32,
    pub l2: u32,
    pub r1: u32,
    pub r2: u32,
}

/// Enumeration cap for the overlap census.
pub const CENSUS_LIMIT: u64 = 20_000;

/// Butterfly pair overlap tallies: `y1` pairs share no edge, `y2` share
/// exactly one, `y3` share exactly two. Distinct butterflies never share
/// three; y1 + y2 + y3 = C(butterflies, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapCensus {
    pub butterflies: u64,
    pub y1: u64,
    pub y2: u64,
    pub y3: u64,
}

/// Enumerates every butterfly and classifies all pairs by shared edges.
/// Two butterflies with vertex overlaps (a, b) on the left and right share
/// a*b edges. Fails with `CensusOverflow` past [`CENSUS_LIMIT`] butterflies.
pub fn overlap_census(graph: &ExactGraph) -> Result<OverlapCensus> {
    let rights: Vec<u32> = graph.right_vertices().into_iter().collect();
    let mut butterflies: Vec<Butterfly> = Vec::new();
    for (i, &r1) in rights.iter().enumerate() {
        let n1 = graph.adj.neighbors(VertexId::right(r1));
        for &r2 in &rights[i + 1..] {
            let common = intersect(n1, graph.adj.neighbors(VertexId::right(r2)));
            for (a, &l1) in common.iter().enumerate() {
                for &l2 in &common[a + 1..] {
                    butterflies.push(Butterfly { l1, l2, r1, r2 });
                    if butterflies.len() as u64 > CENSUS_LIMIT {
                        return Err(Error::CensusOverflow(exact_butterfly_count(graph)));
                    }
                }
            }
        }
    }

    let (mut y1, mut y2, mut y3) = (0u64, 0u64, 0u64);
    for (i, a) in butterflies.iter().enumerate() {
        for b in &butterflies[i + 1..] {
            let left = overlap2([a.l1, a.l2], [b.l1, b.l2]);
            let right = overlap2([a.r1, a.r2], [b.r1, b.r2]);
            match left * right {
                0 => y1 += 1,
                1 => y2 += 1,
                2 => y3 += 1,
                _ => unreachable!("distinct butterflies share at most two edges"),
            }
        }
    }
    Ok(OverlapCensus { butterflies: butterflies.len() as u64, y1, y2, y3 })
}

fn overlap2(a: [u32; 2], b: [u32; 2]) -> u64 {
    a.iter().filter(|x| b.contains(x)).count() as u64
}

/// Closed-form second-moment quantities of the estimator at budget k over a
/// graph with E live edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub variance: f64,
    /// Overlap-agnostic upper bound: assumes every butterfly pair shares
    /// two edges. Matches `variance` exactly on K_{2,3}.
    pub bound: f64,
}

/// Exact estimator variance from the overlap census:
///   gamma*B - B^2 + 2*gamma^2*(y1*r8 + y2*r7 + y3*r6)
/// with gamma = prod_{i<4}(E-i)/(k-i) and r_m = prod_{i<m}(k-i)/(E-i)
/// (r_m = 0 when k < m). Zero whenever the budget covers the whole graph.
pub fn variance_closed_form(
    live_edges: u64,
    budget: usize,
    census: &OverlapCensus,
) -> Result<VarianceReport> {
    let b = census.butterflies as f64;
    if census.butterflies == 0 {
        return Ok(VarianceReport { variance: 0.0, bound: 0.0 });
    }
    let e = live_edges;
    let k = budget as u64;
    if k >= e {
        return Ok(VarianceReport { variance: 0.0, bound: 0.0 });
    }
    if k < 4 {
        return Err(Error::Config(format!(
            "variance undefined for budget {k} below 4"
        )));
    }
    let gamma: f64 = (0..4).map(|i| (e - i) as f64 / (k - i) as f64).product();
    let r = |m: u64| -> f64 {
        if k < m {
            0.0
        } else {
            (0..m).map(|i| (k - i) as f64 / (e - i) as f64).product()
        }
    };
    let cross = census.y1 as f64 * r(8) + census.y2 as f64 * r(7) + census.y3 as f64 * r(6);
    let variance = gamma * b - b * b + 2.0 * gamma * gamma * cross;
    let pairs = b * (b - 1.0) / 2.0;
    let bound = gamma * b + 2.0 * gamma * gamma * pairs * r(6) - b * b;
    Ok(VarianceReport { variance, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{generate_dynamic_stream, random_insert_stream, validate_stream};

    fn complete_bipartite(ls: u32, rs: u32) -> Vec<EdgeEvent> {
        (0..ls)
            .flat_map(|l| (0..rs).map(move |r| (l, r)))
            .enumerate()
            .map(|(i, (l, r))| EdgeEvent {
                edge: Edge::new(l, r),
                sign: Sign::Insert,
                index: i as u64 + 1,
            })
            .collect()
    }

    #[test]
    fn complete_bipartite_counts() {
        // K_{a,b} has C(a,2)*C(b,2) butterflies.
        for (a, b, expected) in [(2, 2, 1), (2, 3, 3), (3, 3, 9), (4, 5, 60)] {
            let graph = ExactGraph::from_events(&complete_bipartite(a, b)).unwrap();
            assert_eq!(exact_butterfly_count(&graph), expected, "K_{{{a},{b}}}");
        }
    }

    #[test]
    fn empty_and_wedge_free_graphs_count_zero() {
        let graph = ExactGraph::new();
        assert_eq!(exact_butterfly_count(&graph), 0);
        // A path l0-r0-l1 has a wedge but no butterfly.
        let events = vec![
            EdgeEvent { edge: Edge::new(0, 0), sign: Sign::Insert, index: 1 },
            EdgeEvent { edge: Edge::new(1, 0), sign: Sign::Insert, index: 2 },
        ];
        let graph = ExactGraph::from_events(&events).unwrap();
        assert_eq!(exact_butterfly_count(&graph), 0);
    }

    #[test]
    fn incremental_count_matches_recount_at_checkpoints() {
        let base = random_insert_stream(15, 15, 120, 3).unwrap();
        let events = generate_dynamic_stream(&base, 0.4, 8).unwrap();
        validate_stream(&events).unwrap();
        let offsets: Vec<usize> = (1..=events.len()).step_by(17).collect();
        let result = exact_count_stream(&events, &offsets).unwrap();
        for &(offset, count) in &result.checkpoints {
            let graph = ExactGraph::from_events(&events[..offset]).unwrap();
            assert_eq!(count, exact_butterfly_count(&graph), "offset {offset}");
        }
        assert_eq!(result.final_count, exact_butterfly_count(&result.graph));
    }

    #[test]
    fn census_identity_holds() {
        let base = random_insert_stream(12, 12, 70, 9).unwrap();
        let graph = ExactGraph::from_events(&base).unwrap();
        let census = overlap_census(&graph).unwrap();
        assert_eq!(census.butterflies, exact_butterfly_count(&graph));
        let b = census.butterflies;
        assert_eq!(census.y1 + census.y2 + census.y3, b * (b - 1) / 2);
    }

    #[test]
    fn k23_census_pairs_all_share_two_edges() {
        let graph = ExactGraph::from_events(&complete_bipartite(2, 3)).unwrap();
        let census = overlap_census(&graph).unwrap();
        assert_eq!(census, OverlapCensus { butterflies: 3, y1: 0, y2: 0, y3: 3 });
    }

    #[test]
    fn census_overflow_guard() {
        // K_{20,20}: C(20,2)^2 = 36100 butterflies.
        let graph = ExactGraph::from_events(&complete_bipartite(20, 20)).unwrap();
        assert!(matches!(overlap_census(&graph), Err(Error::CensusOverflow(36100))));
    }

    #[test]
    fn k23_full_budget_variance_is_zero() {
        let graph = ExactGraph::from_events(&complete_bipartite(2, 3)).unwrap();
        let census = overlap_census(&graph).unwrap();
        let report = variance_closed_form(6, 6, &census).unwrap();
        assert_eq!(report.variance, 0.0);
        assert_eq!(report.bound, 0.0);
    }

    #[test]
    fn variance_is_nonnegative_and_below_bound() {
        let base = random_insert_stream(12, 12, 80, 21).unwrap();
        let graph = ExactGraph::from_events(&base).unwrap();
        let census = overlap_census(&graph).unwrap();
        assert!(census.butterflies > 0);
        for budget in [8, 20, 40, 60] {
            let report = variance_closed_form(80, budget, &census).unwrap();
            assert!(report.variance >= 0.0, "budget {budget}: {report:?}");
            assert!(
                report.variance <= report.bound * (1.0 + 1e-12),
                "budget {budget}: {report:?}"
            );
        }
    }

    #[test]
    fn tiny_budget_variance_is_config_error() {
        let graph = ExactGraph::from_events(&complete_bipartite(2, 2)).unwrap();
        let census = overlap_census(&graph).unwrap();
        assert!(matches!(variance_closed_form(4, 3, &census), Err(Error::Config(_))));
    }
}
