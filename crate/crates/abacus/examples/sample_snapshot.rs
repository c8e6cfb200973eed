//! Dumps the sampler state to CSV mid-stream and restores it for
//! comparison against a later point.

use abacus::sample::SampleSnapshot;
use abacus::estimator::run_abacus;
use abacus::stream::{generate_dynamic_stream, random_insert_stream};

fn main() -> abacus::Result<()> {
    let base = random_insert_stream(60, 60, 1500, 2)?;
    let events = generate_dynamic_stream(&base, 0.3, 9)?;

    let halfway = run_abacus(&events[..events.len() / 2], 120, 4)?;
    let snapshot = SampleSnapshot::capture(&halfway.state, &halfway.graph);
    let csv = snapshot.to_csv();
    println!("snapshot at event {}:", events.len() / 2);
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    println!("  ... {} edge rows total", snapshot.edges.len());

    let restored = SampleSnapshot::from_csv(&csv)?;
    assert_eq!(restored, snapshot);
    let (state, graph) = restored.restore(0);
    println!(
        "restored: {} live edges, {} sampled, pending c_bad {} c_good {}",
        state.live_edges,
        graph.len(),
        state.c_bad,
        state.c_good
    );

    let full = run_abacus(&events, 120, 4)?;
    println!(
        "full run for contrast: {} sampled at the end, estimate {:.1}",
        full.graph.len(),
        full.ledger.estimate
    );
    Ok(())
}
