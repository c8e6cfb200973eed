//! Shows the per-worker comparison tallies of the mini-batch counting phase
//! and the batch-size x worker timing grid.

use abacus::harness::{speedup_report, write_speedup_csv};
use abacus::parallel::{run_parabacus, write_load_report};
use abacus::stream::random_insert_stream;

fn main() -> abacus::Result<()> {
    let events = random_insert_stream(200, 200, 12_000, 13)?;
    let (budget, batch) = (4000, 4000);

    let run = run_parabacus(&events, budget, 1, batch, 4)?;
    println!("estimate {:.1} with 4 workers in {:?}", run.ledger.estimate, run.elapsed);
    let mut csv = Vec::new();
    write_load_report(&run.worker_costs, &mut csv)?;
    print!("{}", String::from_utf8(csv).unwrap());
    let max = *run.worker_costs.iter().max().unwrap() as f64;
    let min = *run.worker_costs.iter().min().unwrap() as f64;
    println!("imbalance max/min: {:.3}", max / min);

    println!("\ntiming grid (median of three runs each):");
    let cells = speedup_report(&events, budget, 1, &[1000, 4000], &[1, 2, 4])?;
    let mut csv = Vec::new();
    write_speedup_csv(&cells, &mut csv)?;
    print!("{}", String::from_utf8(csv).unwrap());
    println!("estimates across the whole grid are identical by construction");
    Ok(())
}
