use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use psearch_cli::{
    aggregate, aggregate_rows, emit, run_trials, trial_rows, verify_suite, BenchConfig, CliError,
    DriverChoice, Format, ProblemKind, AGGREGATE_HEADER, TRIAL_HEADER,
};
use psearch_core::Fault;

/// Parametric search benchmarks: boxsort against level-synchronous quicksort.
#[derive(Parser)]
#[command(name = "psearch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one record per driver and trial.
    Run(Common),
    /// Print one aggregate row per size and driver.
    Bench(Common),
    /// Run with every invariant check enabled; exit 1 on the first violation.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = ProblemArg::MedianLines)]
    problem: ProblemArg,
    #[arg(long, value_enum, default_value_t = DriverArg::Both)]
    driver: DriverArg,
    /// Instance sizes, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1001")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coefficient numerators and denominators are drawn from 1..=coeff-max.
    #[arg(long, default_value_t = psearch_core::problems::DEFAULT_COEFF_MAX)]
    coeff_max: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check every answer against a brute-force or planted reference.
    #[arg(long)]
    verify: bool,
    /// Sort subproblems smaller than this by all pairs.
    #[arg(long)]
    base_threshold: Option<usize>,
    /// Solve the lines in this file on every trial.
    #[arg(long, value_name = "FILE")]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    MedianLines,
    Planted,
}

#[derive(Clone, Copy, ValueEnum)]
enum DriverArg {
    Boxsort,
    Quicksort,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    UnhalvedRouting,
}

impl Common {
    fn config(self) -> BenchConfig {
        BenchConfig {
            problem: match self.problem {
                ProblemArg::MedianLines => ProblemKind::MedianLines,
                ProblemArg::Planted => ProblemKind::Planted,
            },
            driver: match self.driver {
                DriverArg::Boxsort => DriverChoice::Boxsort,
                DriverArg::Quicksort => DriverChoice::Quicksort,
                DriverArg::Both => DriverChoice::Both,
            },
            ns: self.n,
            trials: self.trials,
            seed: self.seed,
            coeff_max: self.coeff_max,
            format: match self.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Table => Format::Table,
            },
            out: self.out,
            verify: self.verify,
            base_threshold: self.base_threshold,
            instance: self.instance,
            check_invariants: false,
            fault: self.inject_fault.map(|FaultArg::UnhalvedRouting| Fault::UnhalvedRouting),
        }
    }
}

fn all_verified(records: &[psearch_cli::TrialRecord]) -> bool {
    records.iter().all(|r| r.verified != Some(false))
}

fn execute(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Run(args) => {
            let config = args.config();
            let records = run_trials(&config)?;
            emit(&config, &TRIAL_HEADER, &trial_rows(&records), io::stdout().lock())?;
            Ok(all_verified(&records))
        }
        Command::Bench(args) => {
            let config = args.config();
            let records = run_trials(&config)?;
            let rows = aggregate(&records);
            emit(&config, &AGGREGATE_HEADER, &aggregate_rows(&rows), io::stdout().lock())?;
            Ok(all_verified(&records))
        }
        Command::Verify(args) => {
            let config = args.config();
            let report = verify_suite(&config)?;
            match report.first_failure() {
                None => {
                    println!("ok: {} runs, no violations", report.runs);
                    Ok(true)
                }
                Some(first) => {
                    eprintln!(
                        "FAILED: {} violations, {} wrong answers, {} disagreements over {} runs",
                        report.violations.len(),
                        report.wrong_answers.len(),
                        report.disagreements.len(),
                        report.runs
                    );
                    eprintln!("first: {first}");
                    Ok(false)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
