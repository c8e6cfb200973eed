//! Mini-batch parallel estimation.
//!
//! The stream is cut into batches of `batch_size` events. For each batch a
//! single sequential pass applies all sampling decisions, producing a
//! consolidated sample plus per-event deltas; each event is then counted in
//! parallel against the sample version it would have observed sequentially.
//! The aggregation folds per-event contributions in ascending event order,
//! so the estimate trajectory is bit-identical to the sequential run under
//! the same seed regardless of batch size or worker count.

use std::borrow::Cow;
use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::estimator::{
    count_butterflies_instrumented, increment, EstimateCheckpoint, EstimateLedger, IncrementValue,
    ProbabilityInputs, SampleRead,
};
use crate::sample::{insert_sorted, DeleteOutcome, InsertOutcome, PairingState, SampleGraph};
use crate::stream::{Edge, EdgeEvent, Side, Sign, VertexId};

/// Pairing state as it stood before one batch event: everything the
/// increment needs besides the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingTriplet {
    pub live_edges: u64,
    pub c_bad: u64,
    pub c_good: u64,
}

impl PairingTriplet {
    pub fn probability_inputs(&self, budget: usize) -> ProbabilityInputs {
        ProbabilityInputs {
            live_edges: self.live_edges,
            c_bad: self.c_bad,
            c_good: self.c_good,
            budget: budget as u64,
        }
    }
}

/// One sample mutation recorded during the consolidation pass. `tag` is the
/// 0-based position within the batch of the event that caused it.
#[derive(Debug, Clone, Copy)]
struct DeltaEntry {
    tag: u32,
    add: bool,
    other: u32,
}

/// The sample after a whole batch, together with enough per-event deltas to
/// reconstruct the version any batch event observed. Versions are overlay
/// views of the consolidated adjacency, not copies: memory is the sample
/// plus O(batch) delta entries.
#[derive(Debug)]
pub struct VersionedSample {
    consolidated: SampleGraph,
    deltas_left: HashMap<u32, Vec<DeltaEntry>>,
    deltas_right: HashMap<u32, Vec<DeltaEntry>>,
    triplets: Vec<PairingTriplet>,
    budget: usize,
    delta_entries: usize,
    peak_edges: usize,
}

impl VersionedSample {
    /// Pre-event pairing state of batch event `i`.
    pub fn triplet(&self, i: usize) -> PairingTriplet {
        self.triplets[i]
    }

    pub fn versions(&self) -> usize {
        self.triplets.len()
    }

    /// Total recorded delta entries; bounded by 4 per batch event (an
    /// insert-with-eviction touches two edges, two entries each).
    pub fn delta_entries(&self) -> usize {
        self.delta_entries
    }

    /// Largest |S| reached while the batch was applied.
    pub fn peak_edges(&self) -> usize {
        self.peak_edges
    }

    /// Read view of the sample as it stood before batch event `i`.
    /// `i = versions()` views the consolidated (post-batch) sample.
    pub fn view(&self, i: usize) -> SampleView<'_> {
        debug_assert!(i <= self.triplets.len());
        SampleView { sample: self, version: i as u32 }
    }

    /// Hands the consolidated sample back to the caller for the next batch.
    pub fn into_graph(self) -> SampleGraph {
        self.consolidated
    }

    fn record(&mut self, tag: u32, edge: Edge, add: bool) {
        self.deltas_left
            .entry(edge.left)
            .or_default()
            .push(DeltaEntry { tag, add, other: edge.right });
        self.deltas_right
            .entry(edge.right)
            .or_default()
            .push(DeltaEntry { tag, add, other: edge.left });
        self.delta_entries += 2;
        if add {
            self.consolidated.apply_store(edge);
        } else {
            self.consolidated.apply_unstore(edge);
        }
    }
}

/// Applies one batch of sampling decisions sequentially, recording the
/// pre-event triplet and the sample deltas for every event. Consumes the
/// incoming sample; `into_graph` returns it in post-batch form.
///
/// Draws from `state` exactly as the sequential path would, so the random
/// trajectory is independent of batching.
pub fn build_versions(
    state: &mut PairingState,
    graph: SampleGraph,
    batch: &[EdgeEvent],
) -> VersionedSample {
    let mut versions = VersionedSample {
        consolidated: graph,
        deltas_left: HashMap::new(),
        deltas_right: HashMap::new(),
        triplets: Vec::with_capacity(batch.len()),
        budget: state.budget,
        delta_entries: 0,
        peak_edges: 0,
    };
    versions.peak_edges = versions.consolidated.len();
    for (tag, event) in batch.iter().enumerate() {
        versions.triplets.push(PairingTriplet {
            live_edges: state.live_edges,
            c_bad: state.c_bad,
            c_good: state.c_good,
        });
        let tag = tag as u32;
        match event.sign {
            Sign::Insert => {
                match state.decide_insert(&mut versions.consolidated.registry, event.edge) {
                    InsertOutcome::Added => versions.record(tag, event.edge, true),
                    InsertOutcome::ReplacedExisting(evicted) => {
                        versions.record(tag, evicted, false);
                        versions.record(tag, event.edge, true);
                    }
                    InsertOutcome::Skipped => {}
                }
            }
            Sign::Delete => {
                if state.decide_delete(&mut versions.consolidated.registry, event.edge)
                    == DeleteOutcome::RemovedFromSample
                {
                    versions.record(tag, event.edge, false);
                }
            }
        }
        versions.peak_edges = versions.peak_edges.max(versions.consolidated.len());
    }
    versions
}

/// Overlay view of one sample version. Neighbor queries start from the
/// consolidated adjacency and undo every delta tagged at or after the
/// version: the first such entry per (vertex, neighbor) pair fixes the
/// pre-state (an add means the edge was still absent, a removal means it
/// was still present).
#[derive(Debug, Clone, Copy)]
pub struct SampleView<'a> {
    sample: &'a VersionedSample,
    version: u32,
}

impl SampleRead for SampleView<'_> {
    fn neighbors(&self, v: VertexId) -> Cow<'_, [u32]> {
        let base = self.sample.consolidated.adj.neighbors(v);
        let deltas = match v.side {
            Side::Left => &self.sample.deltas_left,
            Side::Right => &self.sample.deltas_right,
        };
        let Some(entries) = deltas.get(&v.ordinal) else {
            return Cow::Borrowed(base);
        };
        // Entries are appended in tag order; skip to the first undone one.
        let start = entries.partition_point(|e| e.tag < self.version);
        if start == entries.len() {
            return Cow::Borrowed(base);
        }
        let mut decided: HashMap<u32, bool> = HashMap::new();
        for e in &entries[start..] {
            decided.entry(e.other).or_insert(!e.add);
        }
        let mut out = base.to_vec();
        for (&other, &present) in &decided {
            if present {
                insert_sorted(&mut out, other);
            } else if let Ok(pos) = out.binary_search(&other) {
                out.remove(pos);
            }
        }
        Cow::Owned(out)
    }
}

/// Per-batch counting output: discovered butterflies per event (batch
/// order) and comparison tallies per worker.
#[derive(Debug, Clone)]
pub struct BatchCounts {
    pub found: Vec<u64>,
    pub worker_costs: Vec<u64>,
}

/// Counts every batch event against its own sample version, splitting the
/// batch into `workers` contiguous chunks of ceil(M/workers) events.
pub fn parallel_count(
    versions: &VersionedSample,
    batch: &[EdgeEvent],
    workers: usize,
) -> BatchCounts {
    assert_eq!(versions.versions(), batch.len());
    let workers = workers.max(1);
    if workers == 1 || batch.len() <= 1 {
        let mut cost = 0u64;
        let found = batch
            .iter()
            .enumerate()
            .map(|(i, e)| count_butterflies_instrumented(e.edge, &versions.view(i), &mut cost))
            .collect();
        return BatchCounts { found, worker_costs: vec![cost] };
    }

    let chunk_size = batch.len().div_ceil(workers);
    let mut found = vec![0u64; batch.len()];
    let mut worker_costs = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (chunk_idx, (events, out)) in batch
            .chunks(chunk_size)
            .zip(found.chunks_mut(chunk_size))
            .enumerate()
        {
            let base = chunk_idx * chunk_size;
            handles.push(scope.spawn(move || {
                let mut cost = 0u64;
                for (j, event) in events.iter().enumerate() {
                    out[j] = count_butterflies_instrumented(
                        event.edge,
                        &versions.view(base + j),
                        &mut cost,
                    );
                }
                cost
            }));
        }
        for handle in handles {
            worker_costs.push(handle.join().expect("counting worker panicked"));
        }
    });
    // Idle workers (last chunks empty) still report a zero tally.
    worker_costs.resize(workers, 0);
    BatchCounts { found, worker_costs }
}

pub(crate) fn fold_event(
    ledger: &mut EstimateLedger,
    event: &EdgeEvent,
    found: u64,
    inputs: &ProbabilityInputs,
) -> Result<()> {
    let inc = if found > 0 {
        increment(event.sign, inputs, ledger.is_audit())?
    } else {
        IncrementValue::zero(ledger.is_audit())
    };
    ledger.record(event.index, event.sign, found, &inc);
    Ok(())
}

/// Folds one batch of per-event counts into the ledger, in ascending event
/// order. The floating-point operation sequence matches the sequential loop
/// exactly.
pub fn aggregate(
    batch: &[EdgeEvent],
    counts: &BatchCounts,
    versions: &VersionedSample,
    ledger: &mut EstimateLedger,
) -> Result<()> {
    for (i, event) in batch.iter().enumerate() {
        let inputs = versions.triplet(i).probability_inputs(versions.budget);
        fold_event(ledger, event, counts.found[i], &inputs)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct ParallelRunOptions {
    pub audit: bool,
    pub trace: bool,
    /// Global event offsets (1-based counts) at which to snapshot.
    pub checkpoints: Vec<usize>,
}

#[derive(Debug)]
pub struct ParabacusRun {
    pub ledger: EstimateLedger,
    pub state: PairingState,
    pub graph: SampleGraph,
    pub checkpoints: Vec<EstimateCheckpoint>,
    /// Running estimate after each completed batch.
    pub batch_estimates: Vec<f64>,
    /// Comparison tallies per worker slot, summed over batches.
    pub worker_costs: Vec<u64>,
    pub peak_sample_edges: usize,
    pub elapsed: Duration,
}

/// Runs the mini-batch estimator over a full stream. For any batch size and
/// worker count this produces the same estimate as the sequential run with
/// the same budget and seed.
pub fn run_parabacus(
    events: &[EdgeEvent],
    budget: usize,
    seed: u64,
    batch_size: usize,
    workers: usize,
) -> Result<ParabacusRun> {
    run_parabacus_with(events, budget, seed, batch_size, workers, &ParallelRunOptions::default())
}

pub fn run_parabacus_with(
    events: &[EdgeEvent],
    budget: usize,
    seed: u64,
    batch_size: usize,
    workers: usize,
    options: &ParallelRunOptions,
) -> Result<ParabacusRun> {
    if budget < 2 {
        return Err(Error::Config(format!("budget must be >= 2, got {budget}")));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if workers == 0 {
        return Err(Error::Config("worker count must be positive".into()));
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
    let mut batch_estimates = Vec::new();
    let mut worker_costs = vec![0u64; workers];
    let mut peak = 0usize;
    let mut done = 0usize;

    let start = Instant::now();
    for batch in events.chunks(batch_size) {
        let versions = build_versions(&mut state, graph, batch);
        let counts = parallel_count(&versions, batch, workers);
        for (slot, cost) in counts.worker_costs.iter().enumerate() {
            worker_costs[slot] += cost;
        }
        for (i, event) in batch.iter().enumerate() {
            let inputs = versions.triplet(i).probability_inputs(versions.budget);
            fold_event(&mut ledger, event, counts.found[i], &inputs)?;
            done += 1;
            if next_offset < offsets.len() && offsets[next_offset] == done {
                checkpoints.push(EstimateCheckpoint {
                    offset: done,
                    estimate: ledger.estimate,
                    exact: ledger.exact().cloned(),
                    elapsed: start.elapsed(),
                });
                next_offset += 1;
            }
        }
        peak = peak.max(versions.peak_edges());
        batch_estimates.push(ledger.estimate);
        graph = versions.into_graph();
    }
    let elapsed = start.elapsed();
    Ok(ParabacusRun {
        ledger,
        state,
        graph,
        checkpoints,
        batch_estimates,
        worker_costs,
        peak_sample_edges: peak,
        elapsed,
    })
}

/// Writes per-worker comparison tallies as CSV `worker,comparisons`.
pub fn write_load_report<W: Write>(costs: &[u64], mut writer: W) -> Result<()> {
    writeln!(writer, "worker,comparisons")?;
    for (worker, cost) in costs.iter().enumerate() {
        writeln!(writer, "{worker},{cost}")?;
    }
    Ok(())
}
