//! The mini-batch estimator reproduces the sequential estimate bit for bit,
//! for any batch size and worker count.

use abacus::estimator::run_abacus;
use abacus::parallel::run_parabacus;
use abacus::stream::{generate_dynamic_stream, random_insert_stream};

fn main() -> abacus::Result<()> {
    let base = random_insert_stream(100, 100, 5000, 8)?;
    let events = generate_dynamic_stream(&base, 0.25, 2)?;
    let (budget, seed) = (500, 77);

    let sequential = run_abacus(&events, budget, seed)?;
    println!(
        "sequential: estimate {:.4} in {:?}",
        sequential.ledger.estimate, sequential.elapsed
    );

    for (batch_size, workers) in [(1, 1), (64, 2), (1000, 4), (events.len(), 8)] {
        let parallel = run_parabacus(&events, budget, seed, batch_size, workers)?;
        assert_eq!(
            parallel.ledger.estimate.to_bits(),
            sequential.ledger.estimate.to_bits(),
            "estimates must be identical"
        );
        assert_eq!(parallel.graph.edges(), sequential.graph.edges());
        println!(
            "M={batch_size:>5} p={workers}: estimate identical, {} batches, {:?}",
            parallel.batch_estimates.len(),
            parallel.elapsed
        );
    }
    println!("all mini-batch configurations reproduce the sequential estimate");
    Ok(())
}
