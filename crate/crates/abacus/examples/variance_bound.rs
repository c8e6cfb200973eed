//! Evaluates the closed-form estimator variance from the butterfly overlap
//! census and checks it empirically: at a full uniform sample of k edges,
//! extrapolating the in-sample butterfly count by gamma has exactly the
//! predicted second moment.

use abacus::oracle::{
    exact_butterfly_count, overlap_census, variance_closed_form, ExactGraph,
};
use abacus::sample::{insert_to_sample, PairingState, SampleGraph};
use abacus::stream::{random_insert_stream, EdgeEvent, Sign};

fn main() -> abacus::Result<()> {
    let events = random_insert_stream(80, 80, 1200, 31)?;
    let graph = ExactGraph::from_events(&events)?;
    let census = overlap_census(&graph)?;
    println!(
        "graph: {} edges, {} butterflies; pair overlaps y1={} y2={} y3={}",
        graph.live_edges(),
        census.butterflies,
        census.y1,
        census.y2,
        census.y3
    );

    let (e, k) = (graph.live_edges() as u64, 150usize);
    let report = variance_closed_form(e, k, &census)?;
    let gamma: f64 = (0..4).map(|i| (e - i) as f64 / (k as f64 - i as f64)).product();
    println!("budget {k}: gamma {gamma:.1}, variance {:.0}, bound {:.0}", report.variance, report.bound);

    // Empirical check over reservoir samples of the edge set.
    let reps = 2000u64;
    let mut estimates = Vec::with_capacity(reps as usize);
    for seed in 0..reps {
        let mut state = PairingState::new(k, seed);
        let mut sample = SampleGraph::new();
        for event in &events {
            insert_to_sample(&mut state, &mut sample, event.edge);
        }
        let in_sample: Vec<EdgeEvent> = sample
            .edges()
            .iter()
            .enumerate()
            .map(|(i, &edge)| EdgeEvent { edge, sign: Sign::Insert, index: i as u64 + 1 })
            .collect();
        let found = exact_butterfly_count(&ExactGraph::from_events(&in_sample)?);
        estimates.push(gamma * found as f64);
    }
    let mean = estimates.iter().sum::<f64>() / reps as f64;
    let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    println!(
        "empirical over {reps} samples: mean {mean:.1} (truth {}), variance {var:.0}",
        census.butterflies
    );
    println!(
        "variance ratio empirical/closed-form: {:.3}; bound holds: {}",
        var / report.variance,
        var <= report.bound
    );

    // Tightness: on the complete 2x3 graph with the budget covering all six
    // edges, bound and variance are exactly zero.
    let k23 = random_k23()?;
    let k23_census = overlap_census(&k23)?;
    let tight = variance_closed_form(6, 6, &k23_census)?;
    println!("K_2,3 at full budget: variance {}, bound {}", tight.variance, tight.bound);
    Ok(())
}

fn random_k23() -> abacus::Result<ExactGraph> {
    let events: Vec<EdgeEvent> = (0..2u32)
        .flat_map(|l| (0..3u32).map(move |r| (l, r)))
        .enumerate()
        .map(|(i, (l, r))| EdgeEvent {
            edge: abacus::stream::Edge::new(l, r),
            sign: Sign::Insert,
            index: i as u64 + 1,
        })
        .collect();
    ExactGraph::from_events(&events)
}
