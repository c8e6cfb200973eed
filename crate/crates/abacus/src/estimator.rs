//! Sequential estimation loop: per-edge butterfly discovery against the
//! sample via cheapest-side set intersections, and unbiased count updates
//! using the reciprocal of the discovery probability.

use std::borrow::Cow;
use std::io::Write;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, Zero};

use crate::error::{Error, Result};
use crate::sample::{
    delete_from_sample, insert_to_sample, intersect_count_excluding, PairingState, SampleGraph,
};
use crate::stream::{Edge, EdgeEvent, Sign, VertexId};

/// Inputs to the discovery probability: the pairing state as it stands
/// before the sample update for the current event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbabilityInputs {
    pub live_edges: u64,
    pub c_bad: u64,
    pub c_good: u64,
    pub budget: u64,
}

impl ProbabilityInputs {
    pub fn from_state(state: &PairingState) -> Self {
        ProbabilityInputs {
            live_edges: state.live_edges,
            c_bad: state.c_bad,
            c_good: state.c_good,
            budget: state.budget as u64,
        }
    }

    /// T: live edges plus pending compensations.
    pub fn total(&self) -> u64 {
        self.live_edges + self.c_bad + self.c_good
    }

    /// y = min(k, T): the nominal sample size.
    pub fn sample_size(&self) -> u64 {
        self.budget.min(self.total())
    }
}

/// Probability that the three non-arriving edges of a butterfly all reside
/// in the sample: (y/T)((y-1)/(T-1))((y-2)/(T-2)). Equals 1 at full sample
/// (y = T). Undefined for T < 3.
pub fn discovery_probability(inp: &ProbabilityInputs) -> Result<f64> {
    let t = inp.total();
    if t < 3 {
        return Err(Error::DegenerateStream);
    }
    let y = inp.sample_size();
    if y < 3 {
        return Ok(0.0);
    }
    Ok(prob_products(y, t).map(|(num, den)| num as f64 / den as f64).unwrap())
}

fn prob_products(y: u64, t: u64) -> Option<(u128, u128)> {
    if y < 3 {
        return None;
    }
    let num = y as u128 * (y - 1) as u128 * (y - 2) as u128;
    let den = t as u128 * (t - 1) as u128 * (t - 2) as u128;
    Some((num, den))
}

/// A per-butterfly count adjustment: the signed reciprocal of the discovery
/// probability, optionally carried exactly for audit-mode runs.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementValue {
    pub value: f64,
    pub exact: Option<BigRational>,
}

impl IncrementValue {
    pub(crate) fn zero(audit: bool) -> Self {
        IncrementValue {
            value: 0.0,
            exact: audit.then(BigRational::zero),
        }
    }
}

/// +1/p for insertions, -1/p for deletions.
pub fn increment(sign: Sign, inp: &ProbabilityInputs, audit: bool) -> Result<IncrementValue> {
    let t = inp.total();
    if t < 3 {
        return Err(Error::DegenerateStream);
    }
    let (num, den) =
        prob_products(inp.sample_size(), t).ok_or(Error::DegenerateStream)?;
    // Reciprocal: T(T-1)(T-2) / y(y-1)(y-2), signed.
    let value = sign.signum() * (den as f64 / num as f64);
    let exact = audit.then(|| {
        let ratio = BigRational::new(BigInt::from(den), BigInt::from(num));
        match sign {
            Sign::Insert => ratio,
            Sign::Delete => -ratio,
        }
    });
    Ok(IncrementValue { value, exact })
}

/// Read access to a sample state: either the live sample or a versioned
/// overlay view of it.
pub trait SampleRead {
    /// Sorted neighbor ordinals of `v` (on the opposite side).
    fn neighbors(&self, v: VertexId) -> Cow<'_, [u32]>;

    fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }
}

impl SampleRead for SampleGraph {
    fn neighbors(&self, v: VertexId) -> Cow<'_, [u32]> {
        Cow::Borrowed(self.adj.neighbors(v))
    }

    fn degree(&self, v: VertexId) -> usize {
        self.adj.degree(v)
    }
}

/// Which endpoint's side hosts the fourth-vertex exploration.
///
/// `ExploreViaV` means the loop runs over u's sample neighbors (v's side was
/// chosen because u's neighborhood has the smaller cumulative degree);
/// `ExploreViaU` is the mirror image. Ties go to `ExploreViaU`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideChoice {
    ExploreViaU,
    ExploreViaV,
}

pub fn choose_side<G: SampleRead>(edge: Edge, graph: &G) -> SideChoice {
    let u = edge.left_vertex();
    let v = edge.right_vertex();
    let sum_u: usize = graph
        .neighbors(u)
        .iter()
        .map(|&w| graph.degree(VertexId::right(w)))
        .sum();
    let sum_v: usize = graph
        .neighbors(v)
        .iter()
        .map(|&x| graph.degree(VertexId::left(x)))
        .sum();
    if sum_u < sum_v {
        SideChoice::ExploreViaV
    } else {
        SideChoice::ExploreViaU
    }
}

/// Exact number of butterflies whose three non-arriving edges all lie in the
/// sample. The arriving edge (and, for deletions, its stored copy) is masked
/// out of the neighbor sets, so each butterfly uses exactly three sample
/// edges distinct from the arriving one. Both side choices agree.
pub fn count_butterflies_with_sample<G: SampleRead>(edge: Edge, graph: &G) -> u64 {
    let mut cost = 0u64;
    count_butterflies_instrumented(edge, graph, &mut cost)
}

pub(crate) fn count_butterflies_instrumented<G: SampleRead>(
    edge: Edge,
    graph: &G,
    cost: &mut u64,
) -> u64 {
    let u = edge.left_vertex();
    let v = edge.right_vertex();
    let mut found = 0u64;
    match choose_side(edge, graph) {
        SideChoice::ExploreViaV => {
            // w ranges over u's sample neighbors (right side), x over the
            // common left neighbors of w and v.
            let nv = graph.neighbors(v);
            for &w in graph.neighbors(u).iter() {
                if w == edge.right {
                    continue;
                }
                let nw = graph.neighbors(VertexId::right(w));
                found += intersect_count_excluding(&nw, &nv, edge.left, cost);
            }
        }
        SideChoice::ExploreViaU => {
            let nu = graph.neighbors(u);
            for &x in graph.neighbors(v).iter() {
                if x == edge.left {
                    continue;
                }
                let nx = graph.neighbors(VertexId::left(x));
                found += intersect_count_excluding(&nx, &nu, edge.right, cost);
            }
        }
    }
    found
}

/// One audit row of the running estimate.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub index: u64,
    pub sign: Sign,
    pub found: u64,
    pub increment: f64,
    pub estimate: f64,
}

/// The running butterfly estimate: double precision always, exact rational
/// alongside in audit mode.
#[derive(Debug, Clone)]
pub struct EstimateLedger {
    pub estimate: f64,
    exact: Option<BigRational>,
    pub events_processed: u64,
    trace: Option<Vec<TraceRow>>,
}

impl EstimateLedger {
    pub fn new(audit: bool, traced: bool) -> Self {
        EstimateLedger {
            estimate: 0.0,
            exact: audit.then(BigRational::zero),
            events_processed: 0,
            trace: traced.then(Vec::new),
        }
    }

    pub fn is_audit(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact rational estimate, present in audit mode.
    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn trace(&self) -> Option<&[TraceRow]> {
        self.trace.as_deref()
    }

    pub(crate) fn record(&mut self, index: u64, sign: Sign, found: u64, inc: &IncrementValue) {
        self.estimate += found as f64 * inc.value;
        if let (Some(exact), Some(inc_exact)) = (self.exact.as_mut(), inc.exact.as_ref()) {
            if found > 0 {
                *exact += BigRational::from_integer(BigInt::from(found)) * inc_exact;
            }
        }
        self.events_processed += 1;
        let estimate = self.estimate;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRow { index, sign, found, increment: inc.value, estimate });
        }
    }

    /// Writes the trace as CSV `index,sign,found,increment,estimate`.
    pub fn write_trace_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "index,sign,found,increment,estimate")?;
        for row in self.trace.as_deref().unwrap_or(&[]) {
            let sign = match row.sign {
                Sign::Insert => "+1",
                Sign::Delete => "-1",
            };
            writeln!(
                writer,
                "{},{},{},{},{}",
                row.index, sign, row.found, row.increment, row.estimate
            )?;
        }
        Ok(())
    }
}

/// Processes one stream element: count update first (against the pre-update
/// sample and pairing state), then the sample update.
///
/// The event must already have passed stream validity.
pub fn process_event(
    event: &EdgeEvent,
    state: &mut PairingState,
    graph: &mut SampleGraph,
    ledger: &mut EstimateLedger,
) -> Result<()> {
    let inputs = ProbabilityInputs::from_state(state);
    let found = count_butterflies_with_sample(event.edge, graph);
    let inc = if found > 0 {
        increment(event.sign, &inputs, ledger.is_audit())?
    } else {
        IncrementValue::zero(ledger.is_audit())
    };
    ledger.record(event.index, event.sign, found, &inc);
    match event.sign {
        Sign::Insert => {
            insert_to_sample(state, graph, event.edge);
        }
        Sign::Delete => {
            delete_from_sample(state, graph, event.edge);
        }
    }
    Ok(())
}

/// Options for a sequential run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Carry an exact rational estimate alongside the double.
    pub audit: bool,
    /// Keep a per-event trace.
    pub trace: bool,
    /// Event offsets (1-based counts) at which to snapshot the estimate.
    pub checkpoints: Vec<usize>,
}

/// Estimate snapshot at a stream offset.
#[derive(Debug, Clone)]
pub struct EstimateCheckpoint {
    pub offset: usize,
    pub estimate: f64,
    pub exact: Option<BigRational>,
    pub elapsed: Duration,
}

/// Outcome of a sequential run.
#[derive(Debug)]
pub struct AbacusRun {
    pub ledger: EstimateLedger,
    pub state: PairingState,
    pub graph: SampleGraph,
    pub checkpoints: Vec<EstimateCheckpoint>,
    pub peak_sample_edges: usize,
    pub elapsed: Duration,
}

/// Folds the estimation loop over a full stream. Deterministic per seed.
pub fn run_abacus(events: &[EdgeEvent], budget: usize, seed: u64) -> Result<AbacusRun> {
    run_abacus_with(events, budget, seed, &RunOptions::default())
}

pub fn run_abacus_with(
    events: &[EdgeEvent],
    budget: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<AbacusRun> {
    if budget < 2 {
        return Err(Error::Config(format!("budget must be >= 2, got {budget}")));
    }
    crate::stream::validate_stream(events)?;

    let mut state = PairingState::new(budget, seed);
    let mut graph = SampleGraph::new();
    let mut ledger = EstimateLedger::new(options.audit, options.trace);
    let mut offsets = options.checkpoints.clone();
    offsets.sort_unstable();
    offsets.dedup();
    let mut next_offset = 0usize;
    let mut checkpoints = Vec::with_capacity(offsets.len());
    let mut peak = 0usize;

    let start = Instant::now();
    for (done, event) in events.iter().enumerate() {
        process_event(event, &mut state, &mut graph, &mut ledger)?;
        peak = peak.max(graph.len());
        if next_offset < offsets.len() && offsets[next_offset] == done + 1 {
            checkpoints.push(EstimateCheckpoint {
                offset: done + 1,
                estimate: ledger.estimate,
                exact: ledger.exact().cloned(),
                elapsed: start.elapsed(),
            });
            next_offset += 1;
        }
    }
    let elapsed = start.elapsed();
    Ok(AbacusRun { ledger, state, graph, checkpoints, peak_sample_edges: peak, elapsed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::insert_to_sample;
    use crate::stream::{generate_dynamic_stream, random_insert_stream};
    use num::ToPrimitive;

    fn inputs(live: u64, c_bad: u64, c_good: u64, budget: u64) -> ProbabilityInputs {
        ProbabilityInputs { live_edges: live, c_bad, c_good, budget }
    }

    #[test]
    fn probability_hand_evaluations() {
        let p = discovery_probability(&inputs(10, 0, 0, 5)).unwrap();
        assert!((p - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(discovery_probability(&inputs(4, 0, 0, 4)).unwrap(), 1.0);
        // Compensation counters enter T: |E|=8, c_b=1, c_g=1, k=10 -> y=T=10.
        assert_eq!(discovery_probability(&inputs(8, 1, 1, 10)).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_below_three_edges() {
        assert!(matches!(
            discovery_probability(&inputs(2, 0, 0, 5)),
            Err(Error::DegenerateStream)
        ));
    }

    #[test]
    fn increment_is_signed_reciprocal() {
        let plus = increment(Sign::Insert, &inputs(10, 0, 0, 5), true).unwrap();
        assert_eq!(plus.value, 12.0);
        assert_eq!(plus.exact.unwrap().to_f64().unwrap(), 12.0);
        let minus = increment(Sign::Delete, &inputs(10, 0, 0, 5), false).unwrap();
        assert_eq!(minus.value, -12.0);
        let full = increment(Sign::Insert, &inputs(4, 0, 0, 4), false).unwrap();
        assert_eq!(full.value, 1.0);
    }

    fn sample_with(edges: &[(u32, u32)], budget: usize) -> SampleGraph {
        let mut state = PairingState::new(budget, 0);
        let mut graph = SampleGraph::new();
        for &(l, r) in edges {
            insert_to_sample(&mut state, &mut graph, Edge::new(l, r));
        }
        graph
    }

    // Sample state mirroring the worked running example: the arriving edge
    // is (u=l0, v=r0); u has one stored neighbor r2 with degree 2, v has
    // stored neighbors l1, l2 with cumulative degree 5.
    fn running_example() -> (Edge, SampleGraph) {
        let graph = sample_with(
            &[(0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 3)],
            10,
        );
        (Edge::new(0, 0), graph)
    }

    #[test]
    fn side_choice_prefers_smaller_cumulative_degree() {
        let (edge, graph) = running_example();
        assert_eq!(choose_side(edge, &graph), SideChoice::ExploreViaV);
    }

    #[test]
    fn side_choice_tie_goes_to_u() {
        let graph = sample_with(&[(0, 1), (1, 0)], 10);
        assert_eq!(choose_side(Edge::new(0, 0), &graph), SideChoice::ExploreViaU);
        let empty = SampleGraph::new();
        assert_eq!(choose_side(Edge::new(0, 0), &empty), SideChoice::ExploreViaU);
    }

    #[test]
    fn running_example_finds_one_butterfly() {
        let (edge, graph) = running_example();
        assert_eq!(count_butterflies_with_sample(edge, &graph), 1);
    }

    #[test]
    fn empty_sample_finds_nothing() {
        let graph = SampleGraph::new();
        assert_eq!(count_butterflies_with_sample(Edge::new(0, 0), &graph), 0);
    }

    #[test]
    fn k23_missing_edge_closes_two_butterflies() {
        // K_{2,3} minus (l0,r0); the arriving edge completes 2 butterflies.
        let graph = sample_with(&[(0, 1), (0, 2), (1, 0), (1, 1), (1, 2)], 10);
        assert_eq!(count_butterflies_with_sample(Edge::new(0, 0), &graph), 2);
    }

    #[test]
    fn first_event_leaves_estimate_untouched() {
        let events = random_insert_stream(5, 5, 1, 0).unwrap();
        let run = run_abacus(&events, 4, 0).unwrap();
        assert_eq!(run.ledger.estimate, 0.0);
        assert_eq!(run.graph.len(), 1);
    }

    fn k22_stream() -> Vec<EdgeEvent> {
        [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .enumerate()
            .map(|(i, &(l, r))| EdgeEvent {
                edge: Edge::new(l, r),
                sign: Sign::Insert,
                index: i as u64 + 1,
            })
            .collect()
    }

    #[test]
    fn k22_counts_one_butterfly_exactly() {
        let run = run_abacus(&k22_stream(), 8, 0).unwrap();
        assert_eq!(run.ledger.estimate, 1.0);
    }

    #[test]
    fn deleting_a_k22_edge_returns_to_zero() {
        let mut events = k22_stream();
        events.push(EdgeEvent { edge: Edge::new(1, 1), sign: Sign::Delete, index: 5 });
        let run = run_abacus(&events, 8, 0).unwrap();
        assert_eq!(run.ledger.estimate, 0.0);
    }

    #[test]
    fn k23_counts_three_butterflies_exactly() {
        let events: Vec<EdgeEvent> = (0..2)
            .flat_map(|l| (0..3).map(move |r| (l, r)))
            .enumerate()
            .map(|(i, (l, r))| EdgeEvent {
                edge: Edge::new(l, r),
                sign: Sign::Insert,
                index: i as u64 + 1,
            })
            .collect();
        let run = run_abacus(&events, 6, 0).unwrap();
        assert_eq!(run.ledger.estimate, 3.0);
    }

    #[test]
    fn determinism_per_seed() {
        let base = random_insert_stream(20, 20, 150, 4).unwrap();
        let events = generate_dynamic_stream(&base, 0.3, 5).unwrap();
        let a = run_abacus(&events, 30, 11).unwrap();
        let b = run_abacus(&events, 30, 11).unwrap();
        assert_eq!(a.ledger.estimate, b.ledger.estimate);
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.state.c_bad, b.state.c_bad);
        assert_eq!(a.state.c_good, b.state.c_good);
    }

    #[test]
    fn budget_below_two_is_config_error() {
        let events = random_insert_stream(5, 5, 5, 0).unwrap();
        assert!(matches!(run_abacus(&events, 1, 0), Err(Error::Config(_))));
    }
}
