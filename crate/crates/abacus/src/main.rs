use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use abacus::estimator::{run_abacus_with, RunOptions};
use abacus::harness::{run_experiment, ExperimentConfig, Mode};
use abacus::parallel::{run_parabacus, write_load_report};
use abacus::stream::{generate_dynamic_stream, parse_edge_list, read_native, EdgeListFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Tsv,
    Konect,
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Abacus,
    Parabacus,
    Exact,
}

/// Butterfly count estimation over fully dynamic bipartite graph streams.
#[derive(Debug, Parser)]
#[command(name = "abacus", version)]
struct Args {
    /// Input edge-list file.
    #[arg(long)]
    input: PathBuf,

    /// Input format.
    #[arg(long, value_enum, default_value = "tsv")]
    format: FormatArg,

    /// Estimator to run.
    #[arg(long, value_enum, default_value = "abacus")]
    mode: ModeArg,

    /// Sample budget (maximum stored edges).
    #[arg(long, default_value_t = 10_000)]
    budget: usize,

    /// Mini-batch size (parabacus mode).
    #[arg(long, default_value_t = 1024)]
    batch: usize,

    /// Worker count (parabacus mode).
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Deletion fraction; > 0 treats the input as an insertion-only base
    /// stream and synthesizes deletions per seed.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,

    /// Repetition seeds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,

    /// Snapshot the estimate at every 10% of the stream.
    #[arg(long)]
    checkpoints: bool,

    /// Track ground truth alongside and report relative errors.
    #[arg(long)]
    with_exact: bool,

    /// Write a per-event trace (first seed, sequential run).
    #[arg(long)]
    trace: bool,

    /// Write per-worker comparison tallies (first seed, parabacus run).
    #[arg(long)]
    load_report: bool,

    /// Metrics CSV destination; stdout when omitted. Trace and load report
    /// go to sibling files `<out>.trace.csv` and `<out>.load.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn sink(path: Option<&PathBuf>, suffix: &str) -> abacus::Result<Box<dyn Write>> {
    match path {
        Some(base) => {
            let mut name = base.as_os_str().to_owned();
            name.push(suffix);
            Ok(Box::new(File::create(PathBuf::from(name))?))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn run(args: Args) -> abacus::Result<()> {
    let events = match args.format {
        FormatArg::Tsv => parse_edge_list(File::open(&args.input)?, EdgeListFormat::PlainTsv)?.events,
        FormatArg::Konect => parse_edge_list(File::open(&args.input)?, EdgeListFormat::Konect)?.events,
        FormatArg::Native => read_native(File::open(&args.input)?)?,
    };

    let config = ExperimentConfig {
        mode: match args.mode {
            ModeArg::Abacus => Mode::Abacus,
            ModeArg::Parabacus => Mode::Parabacus,
            ModeArg::Exact => Mode::Exact,
        },
        budget: args.budget,
        batch_size: args.batch,
        workers: args.workers,
        alpha: args.alpha,
        seeds: args.seed.clone(),
        checkpoints: args.checkpoints,
        with_exact: args.with_exact,
    };
    let report = run_experiment(&events, &config)?;
    report.write_csv(sink(args.out.as_ref(), "")?)?;

    if args.trace || args.load_report {
        let seed = *args.seed.first().unwrap_or(&0);
        let stream;
        let stream_ref: &[_] = if args.alpha > 0.0 {
            stream = generate_dynamic_stream(&events, args.alpha, seed)?;
            &stream
        } else {
            &events
        };
        if args.trace {
            let opts = RunOptions { trace: true, ..Default::default() };
            let run = run_abacus_with(stream_ref, args.budget, seed, &opts)?;
            run.ledger.write_trace_csv(sink(args.out.as_ref(), ".trace.csv")?)?;
        }
        if args.load_report {
            let run = run_parabacus(stream_ref, args.budget, seed, args.batch, args.workers)?;
            write_load_report(&run.worker_costs, sink(args.out.as_ref(), ".load.csv")?)?;
        }
    }
    Ok(())
}
