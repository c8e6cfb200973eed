//! Runs the sequential estimator under a tight memory budget and compares
//! its checkpoint trajectory against the exact count.

use abacus::estimator::{run_abacus_with, RunOptions};
use abacus::oracle::exact_count_stream;
use abacus::stream::{generate_dynamic_stream, random_insert_stream};

fn main() -> abacus::Result<()> {
    let base = random_insert_stream(150, 150, 8000, 21)?;
    let events = generate_dynamic_stream(&base, 0.2, 4)?;
    let offsets: Vec<usize> = (1..=10).map(|i| i * events.len() / 10).collect();

    let exact = exact_count_stream(&events, &offsets)?;
    let budget = 800;
    let opts = RunOptions { checkpoints: offsets, ..Default::default() };
    let run = run_abacus_with(&events, budget, 1, &opts)?;

    println!(
        "{} events, budget {budget} edges (peak sample {}), finished in {:?}",
        events.len(),
        run.peak_sample_edges,
        run.elapsed
    );
    println!("{:>8} {:>12} {:>12} {:>10}", "offset", "estimate", "exact", "rel.err");
    for (cp, &(_, truth)) in run.checkpoints.iter().zip(&exact.checkpoints) {
        let rel = if truth > 0 {
            format!("{:.3}", (cp.estimate - truth as f64).abs() / truth as f64)
        } else {
            "-".into()
        };
        println!("{:>8} {:>12.1} {:>12} {:>10}", cp.offset, cp.estimate, truth, rel);
    }

    // A per-event trace of the last few count updates.
    let traced = run_abacus_with(
        &events[..2000],
        budget,
        1,
        &RunOptions { trace: true, ..Default::default() },
    )?;
    println!("\nlast trace rows (index, sign, found, increment, estimate):");
    for row in traced.ledger.trace().unwrap().iter().rev().take(5).rev() {
        println!(
            "{:>8} {:>7} {:>6} {:>12.3} {:>12.1}",
            row.index,
            format!("{:?}", row.sign),
            row.found,
            row.increment,
            row.estimate
        );
    }
    Ok(())
}
