//! Randomized invariants: the counting kernels against brute-force
//! enumeration, stream synthesis validity, census identities, and the
//! sequential/mini-batch equivalence.

use std::collections::HashSet;

use proptest::prelude::*;

use abacus::estimator::{count_butterflies_with_sample, run_abacus};
use abacus::oracle::{exact_butterfly_count, overlap_census, ExactGraph};
use abacus::parallel::run_parabacus;
use abacus::sample::{insert_to_sample, intersect, PairingState, SampleGraph};
use abacus::stream::{
    generate_dynamic_stream, random_insert_stream, validate_stream, Edge, EdgeEvent, Sign,
};

fn distinct_edges(max_ordinal: u32, max_len: usize) -> impl Strategy<Value = Vec<Edge>> {
    prop::collection::hash_set((0..max_ordinal, 0..max_ordinal), 0..max_len)
        .prop_map(|set| set.into_iter().map(|(l, r)| Edge::new(l, r)).collect())
}

fn insert_events(edges: &[Edge]) -> Vec<EdgeEvent> {
    edges
        .iter()
        .enumerate()
        .map(|(i, &edge)| EdgeEvent { edge, sign: Sign::Insert, index: i as u64 + 1 })
        .collect()
}

fn full_sample(edges: &[Edge]) -> SampleGraph {
    let mut state = PairingState::new(edges.len().max(4), 0);
    let mut graph = SampleGraph::new();
    for &edge in edges {
        insert_to_sample(&mut state, &mut graph, edge);
    }
    graph
}

/// Brute force: butterflies in `edges` that contain `pivot`, excluding the
/// pivot itself from the other three slots.
fn naive_closed_by(pivot: Edge, edges: &HashSet<Edge>) -> u64 {
    let mut count = 0;
    for w in edges.iter().map(|e| e.right).collect::<HashSet<_>>() {
        if w == pivot.right {
            continue;
        }
        for x in edges.iter().map(|e| e.left).collect::<HashSet<_>>() {
            if x == pivot.left {
                continue;
            }
            if edges.contains(&Edge::new(pivot.left, w))
                && edges.contains(&Edge::new(x, w))
                && edges.contains(&Edge::new(x, pivot.right))
            {
                count += 1;
            }
        }
    }
    count
}

/// Brute force: total butterflies by quadruple enumeration.
fn naive_total(edges: &HashSet<Edge>) -> u64 {
    let lefts: Vec<u32> = {
        let mut v: Vec<u32> = edges.iter().map(|e| e.left).collect::<HashSet<_>>().into_iter().collect();
        v.sort_unstable();
        v
    };
    let rights: Vec<u32> = {
        let mut v: Vec<u32> = edges.iter().map(|e| e.right).collect::<HashSet<_>>().into_iter().collect();
        v.sort_unstable();
        v
    };
    let mut count = 0;
    for (i, &l1) in lefts.iter().enumerate() {
        for &l2 in &lefts[i + 1..] {
            for (j, &r1) in rights.iter().enumerate() {
                for &r2 in &rights[j + 1..] {
                    if [(l1, r1), (l1, r2), (l2, r1), (l2, r2)]
                        .iter()
                        .all(|&(l, r)| edges.contains(&Edge::new(l, r)))
                    {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

proptest! {
    #[test]
    fn intersect_matches_naive(a in prop::collection::btree_set(0u32..200, 0..40),
                               b in prop::collection::btree_set(0u32..200, 0..40)) {
        let av: Vec<u32> = a.iter().copied().collect();
        let bv: Vec<u32> = b.iter().copied().collect();
        let expected: Vec<u32> = a.intersection(&b).copied().collect();
        prop_assert_eq!(intersect(&av, &bv), expected);
    }

    #[test]
    fn per_edge_count_matches_enumeration(edges in distinct_edges(8, 50),
                                          pivot_l in 0u32..8, pivot_r in 0u32..8) {
        // Covers both arrival cases: the pivot may or may not be stored.
        let pivot = Edge::new(pivot_l, pivot_r);
        let graph = full_sample(&edges);
        let set: HashSet<Edge> = edges.iter().copied().collect();
        prop_assert_eq!(
            count_butterflies_with_sample(pivot, &graph),
            naive_closed_by(pivot, &set)
        );
    }

    #[test]
    fn exact_count_matches_enumeration(edges in distinct_edges(8, 40)) {
        let graph = ExactGraph::from_events(&insert_events(&edges)).unwrap();
        let set: HashSet<Edge> = edges.iter().copied().collect();
        prop_assert_eq!(exact_butterfly_count(&graph), naive_total(&set));
    }

    #[test]
    fn generated_streams_are_valid(n in 1usize..120, alpha in 0.0f64..=1.0, seed in 0u64..500) {
        let base = random_insert_stream(20, 20, n.min(400), seed).unwrap();
        let events = generate_dynamic_stream(&base, alpha, seed).unwrap();
        prop_assert!(validate_stream(&events).is_ok());
        let deletes = events.iter().filter(|e| e.sign == Sign::Delete).count();
        prop_assert_eq!(deletes, (alpha * base.len() as f64).floor() as usize);
    }

    #[test]
    fn census_pair_identity(edges in distinct_edges(7, 30)) {
        let graph = ExactGraph::from_events(&insert_events(&edges)).unwrap();
        if let Ok(census) = overlap_census(&graph) {
            prop_assert_eq!(census.butterflies, exact_butterfly_count(&graph));
            let b = census.butterflies;
            prop_assert_eq!(census.y1 + census.y2 + census.y3, b * b.saturating_sub(1) / 2);
        }
    }

    #[test]
    fn minibatch_equals_sequential(seed in 0u64..200, alpha in 0.0f64..0.5,
                                   budget in 8usize..60,
                                   batch in 1usize..70, workers in 1usize..6) {
        let base = random_insert_stream(15, 15, 120, seed).unwrap();
        let events = generate_dynamic_stream(&base, alpha, seed + 1).unwrap();
        let sequential = run_abacus(&events, budget, seed).unwrap();
        let parallel = run_parabacus(&events, budget, seed, batch, workers).unwrap();
        prop_assert_eq!(
            parallel.ledger.estimate.to_bits(),
            sequential.ledger.estimate.to_bits()
        );
        prop_assert_eq!(parallel.graph.edges(), sequential.graph.edges());
        prop_assert_eq!(parallel.state.live_edges, sequential.state.live_edges);
        prop_assert_eq!(parallel.state.c_bad, sequential.state.c_bad);
        prop_assert_eq!(parallel.state.c_good, sequential.state.c_good);
    }

    #[test]
    fn sample_size_never_exceeds_budget(seed in 0u64..200, budget in 4usize..40) {
        let base = random_insert_stream(12, 12, 100, seed).unwrap();
        let events = generate_dynamic_stream(&base, 0.3, seed).unwrap();
        let run = run_abacus(&events, budget, seed).unwrap();
        prop_assert!(run.peak_sample_edges <= budget);
    }
}
