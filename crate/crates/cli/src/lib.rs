//! Trial harness behind the `psearch` binary.
//!
//! A trial draws one instance from a seed derived from `(seed, trial)`, runs
//! the selected drivers on it and records counts and wall-clock time. Trials
//! run in parallel; results are always returned in trial order, so count
//! columns depend on the configuration alone.

use std::fmt::Write as _;
use std::io;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use psearch_core::problems::{gen_mol, mol_brute, parse_lines, planted_make_with, MedianOfLines, PlantedInstance};
use psearch_core::{Driver, DriverConfig, Fault, Problem, Scalar, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    MedianLines,
    Planted,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::MedianLines => "median-lines",
            ProblemKind::Planted => "planted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriverChoice {
    Boxsort,
    Quicksort,
    Both,
}

impl DriverChoice {
    pub fn drivers(self) -> &'static [Driver] {
        match self {
            DriverChoice::Boxsort => &[Driver::Boxsort],
            DriverChoice::Quicksort => &[Driver::Quicksort],
            DriverChoice::Both => &[Driver::Boxsort, Driver::Quicksort],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Table,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] psearch_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad invocations, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub problem: ProblemKind,
    pub driver: DriverChoice,
    /// One size per aggregate group.
    pub ns: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub coeff_max: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub verify: bool,
    pub base_threshold: Option<usize>,
    /// Solve this instance every trial instead of generating one.
    pub instance: Option<PathBuf>,
    /// Run with invariant checking; set by the `verify` command.
    pub check_invariants: bool,
    pub fault: Option<Fault>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            problem: ProblemKind::MedianLines,
            driver: DriverChoice::Both,
            ns: vec![1001],
            trials: 10,
            seed: 0,
            coeff_max: psearch_core::problems::DEFAULT_COEFF_MAX,
            format: Format::Csv,
            out: None,
            verify: false,
            base_threshold: None,
            instance: None,
            check_invariants: false,
            fault: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.trials == 0 {
            return usage("--trials must be at least 1".into());
        }
        if self.coeff_max == 0 {
            return usage("--coeff-max must be at least 1".into());
        }
        if self.base_threshold == Some(0) {
            return usage("--base-threshold must be at least 1".into());
        }
        if self.instance.is_some() {
            if self.problem != ProblemKind::MedianLines {
                return usage("--instance is only supported with --problem median-lines".into());
            }
            return Ok(());
        }
        if self.ns.is_empty() {
            return usage("--n needs at least one size".into());
        }
        for &n in &self.ns {
            match self.problem {
                ProblemKind::MedianLines if n.is_multiple_of(2) => {
                    return usage(format!("--n must be odd for median-lines, got {n}"))
                }
                ProblemKind::Planted if n < 2 => {
                    return usage(format!("--n must be at least 2 for planted, got {n}"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn driver_config(&self) -> DriverConfig {
        DriverConfig {
            base_threshold: self.base_threshold,
            check_invariants: self.check_invariants,
            fault: self.fault,
        }
    }
}

/// SplitMix64 increment: 2⁶⁴ divided by the golden ratio.
const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of instance `trial` under base seed `seed`: the `trial + 1`-th output
/// of a SplitMix64 stream started at `seed`.
pub fn mix(seed: u64, trial: u64) -> u64 {
    splitmix64(seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed the drivers use on an instance, kept apart from the instance's own
/// generator stream.
pub fn driver_seed(instance_seed: u64) -> u64 {
    splitmix64(instance_seed ^ 0xd1b5_4a32_d192_ed03)
}

/// One driver run on one instance.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub problem: ProblemKind,
    pub driver: Driver,
    pub n: usize,
    pub trial: u64,
    /// Instance seed.
    pub seed: u64,
    pub time_ms: f64,
    pub median_requests: u64,
    pub oracle_calls: u64,
    pub free_resolutions: u64,
    pub lambda: Scalar,
    /// `None` when verification was not requested.
    pub verified: Option<bool>,
    pub violations: Vec<Violation>,
}

enum Instance {
    Lines(MedianOfLines),
    Planted(PlantedInstance),
}

impl Instance {
    fn as_problem(&self) -> &dyn Problem {
        match self {
            Instance::Lines(p) => p,
            Instance::Planted(p) => p,
        }
    }

    fn expected(&self) -> Scalar {
        match self {
            Instance::Lines(p) => mol_brute(p),
            Instance::Planted(p) => p.star().clone(),
        }
    }
}

fn load_instance(config: &BenchConfig) -> Result<Option<MedianOfLines>, CliError> {
    let Some(path) = &config.instance else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let lines = parse_lines(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let inst = MedianOfLines::new(lines).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Some(inst))
}

fn run_trial(
    config: &BenchConfig,
    fixed: Option<&MedianOfLines>,
    n: usize,
    trial: u64,
) -> Result<Vec<TrialRecord>, CliError> {
    let seed = mix(config.seed, trial);
    let instance = match (fixed, config.problem) {
        (Some(inst), _) => Instance::Lines(inst.clone()),
        (None, ProblemKind::MedianLines) => Instance::Lines(gen_mol(n, seed, config.coeff_max)?),
        (None, ProblemKind::Planted) => Instance::Planted(planted_make_with(n, seed, config.coeff_max.max(2))?),
    };
    let problem = instance.as_problem();
    let expected = config.verify.then(|| instance.expected());
    let dc = config.driver_config();
    let mut out = Vec::new();
    for &driver in config.driver.drivers() {
        let start = Instant::now();
        let outcome = driver.run(problem, driver_seed(seed), &dc)?;
        let time_ms = start.elapsed().as_secs_f64() * 1e3;
        let st = &outcome.stats;
        out.push(TrialRecord {
            problem: config.problem,
            driver,
            n: problem.item_count(),
            trial,
            seed,
            time_ms,
            median_requests: st.median_requests,
            oracle_calls: st.oracle_calls,
            free_resolutions: st.free_resolutions,
            verified: expected.as_ref().map(|e| e == &outcome.lambda),
            lambda: outcome.lambda,
            violations: outcome.violations,
        });
    }
    Ok(out)
}

/// Runs every `(n, trial)` pair and returns records ordered by size, then
/// trial, then driver.
pub fn run_trials(config: &BenchConfig) -> Result<Vec<TrialRecord>, CliError> {
    config.validate()?;
    let fixed = load_instance(config)?;
    let ns: Vec<usize> = match &fixed {
        Some(inst) => vec![inst.item_count()],
        None => config.ns.clone(),
    };
    let jobs: Vec<(usize, u64)> = ns.iter().flat_map(|&n| (0..config.trials).map(move |t| (n, t))).collect();
    let per_trial: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(n, t)| run_trial(config, fixed.as_ref(), n, t))
        .collect::<Result<_, _>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

#[derive(Clone, Debug)]
pub struct AggregateRow {
    pub problem: ProblemKind,
    pub driver: Driver,
    pub n: usize,
    pub trials: u64,
    pub time_avg_ms: f64,
    pub time_min_ms: f64,
    pub time_max_ms: f64,
    pub avg_median_requests: f64,
    pub avg_oracle_calls: f64,
    pub avg_free_resolutions: f64,
}

/// One row per `(n, driver)`, in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, Driver)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.n, r.driver)) {
            keys.push((r.n, r.driver));
        }
    }
    keys.into_iter()
        .map(|(n, driver)| {
            let group: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n && r.driver == driver).collect();
            let k = group.len() as f64;
            let avg = |f: fn(&TrialRecord) -> u64| group.iter().map(|r| f(r) as f64).sum::<f64>() / k;
            let times = group.iter().map(|r| r.time_ms);
            AggregateRow {
                problem: group[0].problem,
                driver,
                n,
                trials: group.len() as u64,
                time_avg_ms: times.clone().sum::<f64>() / k,
                time_min_ms: times.clone().fold(f64::INFINITY, f64::min),
                time_max_ms: times.fold(0.0, f64::max),
                avg_median_requests: avg(|r| r.median_requests),
                avg_oracle_calls: avg(|r| r.oracle_calls),
                avg_free_resolutions: avg(|r| r.free_resolutions),
            }
        })
        .collect()
}

pub const TRIAL_HEADER: [&str; 12] = [
    "problem",
    "driver",
    "n",
    "trial",
    "seed",
    "time_ms",
    "median_requests",
    "oracle_calls",
    "free_resolutions",
    "lambda_num",
    "lambda_den",
    "verified",
];

pub const AGGREGATE_HEADER: [&str; 10] = [
    "problem",
    "driver",
    "n",
    "trials",
    "time_avg_ms",
    "time_min_ms",
    "time_max_ms",
    "avg_median_requests",
    "avg_oracle_calls",
    "avg_free_resolutions",
];

pub fn trial_rows(records: &[TrialRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.problem.name().into(),
                r.driver.name().into(),
                r.n.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                format!("{:.3}", r.time_ms),
                r.median_requests.to_string(),
                r.oracle_calls.to_string(),
                r.free_resolutions.to_string(),
                r.lambda.numer().to_string(),
                r.lambda.denom().to_string(),
                r.verified.map_or(String::new(), |v| v.to_string()),
            ]
        })
        .collect()
}

pub fn aggregate_rows(rows: &[AggregateRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.problem.name().into(),
                r.driver.name().into(),
                r.n.to_string(),
                r.trials.to_string(),
                format!("{:.3}", r.time_avg_ms),
                format!("{:.3}", r.time_min_ms),
                format!("{:.3}", r.time_max_ms),
                format!("{:.2}", r.avg_median_requests),
                format!("{:.2}", r.avg_oracle_calls),
                format!("{:.2}", r.avg_free_resolutions),
            ]
        })
        .collect()
}

pub fn write_csv<W: io::Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text table; text columns left-aligned, numeric ones right-aligned.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let numeric: Vec<bool> = (0..header.len())
        .map(|c| !rows.is_empty() && rows.iter().all(|r| r[c].is_empty() || r[c].parse::<f64>().is_ok()))
        .collect();
    let mut s = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if numeric[c] {
                    format!("{cell:>w$}", w = widths[c])
                } else {
                    format!("{cell:<w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
    s
}

/// Writes rows in the configured format to `--out` or `out`.
pub fn emit<W: io::Write>(
    config: &BenchConfig,
    header: &[&str],
    rows: &[Vec<String>],
    out: W,
) -> Result<(), CliError> {
    let mut sink: Box<dyn io::Write> = match &config.out {
        Some(path) => Box::new(io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(out),
    };
    match config.format {
        Format::Csv => write_csv(&mut sink, header, rows)?,
        Format::Table => sink.write_all(render_table(header, rows).as_bytes())?,
    }
    sink.flush()?;
    Ok(())
}

/// What the invariant suite found.
#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub runs: usize,
    /// `(n, trial, driver, violation)` in trial order.
    pub violations: Vec<(usize, u64, Driver, Violation)>,
    /// Runs whose λ* differs from the reference answer.
    pub wrong_answers: Vec<(usize, u64, Driver, Scalar)>,
    /// Trials on which the drivers disagree with each other.
    pub disagreements: Vec<(usize, u64)>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.wrong_answers.is_empty() && self.disagreements.is_empty()
    }

    /// First problem found, for the failure message.
    pub fn first_failure(&self) -> Option<String> {
        if let Some((n, t, d, v)) = self.violations.first() {
            return Some(format!("n={n} trial={t} {d}: turn {}: {}: {}", v.turn, v.kind, v.detail));
        }
        if let Some((n, t, d, l)) = self.wrong_answers.first() {
            return Some(format!("n={n} trial={t} {d}: wrong λ* {l}"));
        }
        self.disagreements
            .first()
            .map(|(n, t)| format!("n={n} trial={t}: drivers disagree on λ*"))
    }
}

/// Runs the drivers with invariant checking and verification enabled.
pub fn verify_suite(config: &BenchConfig) -> Result<VerifyReport, CliError> {
    let config = BenchConfig {
        check_invariants: true,
        verify: true,
        ..config.clone()
    };
    let records = run_trials(&config)?;
    let mut report = VerifyReport {
        runs: records.len(),
        ..VerifyReport::default()
    };
    for r in &records {
        for v in &r.violations {
            report.violations.push((r.n, r.trial, r.driver, v.clone()));
        }
        if r.verified == Some(false) {
            report.wrong_answers.push((r.n, r.trial, r.driver, r.lambda.clone()));
        }
    }
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.n == b.n && a.trial == b.trial && a.lambda != b.lambda {
            report.disagreements.push((a.n, a.trial));
        }
    }
    Ok(report)
}
