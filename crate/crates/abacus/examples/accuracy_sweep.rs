//! Budget sweep through the experiment harness: relative error against
//! ground truth as the sample budget grows, averaged over seeds.

use abacus::harness::{run_experiment, ExperimentConfig, Mode};
use abacus::stream::random_insert_stream;

fn main() -> abacus::Result<()> {
    let base = random_insert_stream(150, 150, 10_000, 5)?;
    println!("{:>8} {:>14} {:>10}", "budget", "mean estimate", "mean err");
    for budget in [250usize, 500, 1000, 2000] {
        let mut config = ExperimentConfig::new(Mode::Abacus, budget);
        config.alpha = 0.2; // each seed draws its own deletion placement
        config.seeds = (0..5).collect();
        config.with_exact = true;
        let report = run_experiment(&base, &config)?;
        let n = report.rows.len() as f64;
        let mean_est = report.rows.iter().map(|r| r.estimate).sum::<f64>() / n;
        let mean_err = report
            .rows
            .iter()
            .filter_map(|r| r.relative_error)
            .sum::<f64>()
            / n;
        println!("{budget:>8} {mean_est:>14.1} {mean_err:>9.1}%", mean_err = mean_err * 100.0);
    }
    println!("error shrinks as the budget approaches the live edge count");
    Ok(())
}
