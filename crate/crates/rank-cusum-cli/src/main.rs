//! Command-line interface for the rank-based change-point tests.
//!
//! Subcommands: `test` runs change tests on a CSV input, `locate` estimates
//! where Kendall's tau changed, `simulate` reruns the Monte Carlo studies,
//! and `quantiles` looks up the Kolmogorov limit distribution.
//!
//! Exit codes: 0 when no selected test rejects, 1 when at least one does,
//! 2 on any error (bad arguments, unreadable input, degenerate data).

mod ingest;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rank_cusum::{
    kendall_change_test, kolmogorov_cdf, kolmogorov_quantile, locate_change, pearson_change_test,
    run_convergence_experiment, run_locator_experiment, run_rejection_table,
    spearman_copula_change_test, Bandwidth, BivariateSeries, Family, KernelKind, LocatorScenario,
    LrvConfig, Model, NegativeFallback, StatisticKind, TestResult, TABLE_JUMPS_RHO2,
};
use report::{ChangePointReport, ConfigEcho, InputSummary, RunReport};

#[derive(Parser)]
#[command(
    name = "rank-cusum",
    version,
    about = "Change-point tests for the rank correlation of a bivariate time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a CSV input for a change in correlation
    Test(TestArgs),
    /// Estimate where Kendall's tau changed
    Locate(LocateArgs),
    /// Rerun the Monte Carlo studies
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Look up the Kolmogorov limit distribution
    Quantiles(QuantilesArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// One file with one column per coordinate
    Paired,
    /// Two price files, joined on date and turned into log returns
    Prices,
}

#[derive(Args)]
struct IngestArgs {
    /// CSV input file
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Input layout
    #[arg(long, value_enum, default_value_t = Mode::Paired)]
    mode: Mode,

    /// Second price file (prices mode)
    #[arg(long, value_name = "FILE")]
    input2: Option<PathBuf>,

    /// Date column; required layout YYYY-MM-DD (prices default: "date";
    /// paired mode: attach timestamps from this column)
    #[arg(long, value_name = "NAME")]
    date_column: Option<String>,

    /// Price column (prices mode; default: "value")
    #[arg(long, value_name = "NAME")]
    value_column: Option<String>,

    /// Column of the first coordinate (paired mode)
    #[arg(long, value_name = "NAME", default_value = "x")]
    x_column: String,

    /// Column of the second coordinate (paired mode)
    #[arg(long, value_name = "NAME", default_value = "y")]
    y_column: String,
}

impl IngestArgs {
    fn load(&self) -> anyhow::Result<ingest::Ingested> {
        match self.mode {
            Mode::Paired => {
                if self.input2.is_some() {
                    bail!("--input2 only applies to --mode prices");
                }
                if self.value_column.is_some() {
                    bail!("--value-column only applies to --mode prices");
                }
                Ok(ingest::read_paired(
                    &self.input,
                    &self.x_column,
                    &self.y_column,
                    self.date_column.as_deref(),
                )?)
            }
            Mode::Prices => {
                let second = self
                    .input2
                    .as_ref()
                    .context("--mode prices requires --input2")?;
                Ok(ingest::read_prices(
                    &self.input,
                    second,
                    self.date_column.as_deref().unwrap_or("date"),
                    self.value_column.as_deref().unwrap_or("value"),
                )?)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatChoice {
    Kendall,
    Pearson,
    Spearman,
    All,
}

impl StatChoice {
    fn label(self) -> &'static str {
        match self {
            StatChoice::Kendall => "kendall",
            StatChoice::Pearson => "pearson",
            StatChoice::Spearman => "spearman",
            StatChoice::All => "all",
        }
    }

    fn kinds(self) -> Vec<StatisticKind> {
        match self {
            StatChoice::Kendall => vec![StatisticKind::Kendall],
            StatChoice::Pearson => vec![StatisticKind::Pearson],
            StatChoice::Spearman => vec![StatisticKind::SpearmanCopula],
            StatChoice::All => vec![
                StatisticKind::Kendall,
                StatisticKind::Pearson,
                StatisticKind::SpearmanCopula,
            ],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelChoice {
    Quartic,
    Bartlett,
}

impl From<KernelChoice> for KernelKind {
    fn from(choice: KernelChoice) -> Self {
        match choice {
            KernelChoice::Quartic => KernelKind::Quartic,
            KernelChoice::Bartlett => KernelKind::Bartlett,
        }
    }
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Bandwidth::Auto);
    }
    match s.parse::<usize>() {
        Ok(b) if b >= 1 => Ok(Bandwidth::Fixed(b)),
        _ => Err("expected 'auto' or a positive integer".to_string()),
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    ingest: IngestArgs,

    /// Statistic(s) to test
    #[arg(long, value_enum, default_value_t = StatChoice::Kendall)]
    statistic: StatChoice,

    /// Kernel for the long-run variance weights
    #[arg(long, value_enum, default_value_t = KernelChoice::Quartic)]
    kernel: KernelChoice,

    /// Lag truncation, or "auto" for floor(2 n^(1/3))
    #[arg(long, default_value = "auto", value_parser = parse_bandwidth)]
    bandwidth: Bandwidth,

    /// Asymptotic significance level
    #[arg(long, default_value_t = 0.05)]
    level: f64,

    /// Skip demeaning the influence values before the variance estimate
    #[arg(long)]
    no_demean: bool,

    /// Fail instead of clamping when the raw variance estimate is negative
    #[arg(long)]
    strict_variance: bool,

    /// Also write the JSON report here, plus one CUSUM path CSV per test
    /// next to it
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LocateArgs {
    #[command(flatten)]
    ingest: IngestArgs,

    /// Also write the JSON report here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Rejection frequencies for independent observations
    Table1(TableArgs),
    /// Rejection frequencies for AR(1) observations (phi = 0.8)
    Table2(TableArgs),
    /// Distance of the null statistic from its limit law
    Convergence(ConvergenceArgs),
    /// Accuracy of the change-point locator
    Locator(LocatorArgs),
}

#[derive(Args)]
struct TableArgs {
    /// Observations per replicate
    #[arg(long, default_value_t = 500)]
    n: usize,

    /// Replicates per scenario
    #[arg(long, default_value_t = 1000)]
    reps: usize,

    /// Asymptotic significance level
    #[arg(long, default_value_t = 0.05)]
    level: f64,

    /// Master seed for the replicate streams
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Directory for the CSV output
    #[arg(long, value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Dependence model: 1 independent, 2 AR(1) with phi = 0.8
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    model: u8,

    /// Replicates per sample size
    #[arg(long, default_value_t = 5000)]
    reps: usize,

    /// Master seed for the replicate streams
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Directory for the CSV output
    #[arg(long, value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LocatorArgs {
    /// Replicates per sample size
    #[arg(long, default_value_t = 200)]
    reps: usize,

    /// Master seed for the replicate streams
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Directory for the CSV output
    #[arg(long, value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("point").required(true).args(["p", "x"])))]
struct QuantilesArgs {
    /// Probability: print the quantile q with K(q) = p
    #[arg(long)]
    p: Option<f64>,

    /// Statistic value: print the p-value 1 - K(x)
    #[arg(long)]
    x: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Test(args) => run_test(&args),
        Command::Locate(args) => run_locate(&args),
        Command::Simulate(which) => run_simulate(&which),
        Command::Quantiles(args) => run_quantiles(&args),
    }
}

/// Applies `RANK_CUSUM_THREADS` to the global worker pool. Unset, empty, or
/// `0` leaves the automatic thread count; results do not depend on the
/// choice either way.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("RANK_CUSUM_THREADS") else {
        return Ok(());
    };
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(());
    }
    let threads: usize = raw
        .parse()
        .with_context(|| format!("RANK_CUSUM_THREADS must be a non-negative integer, got '{raw}'"))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("failed to configure the worker pool")?;
    }
    Ok(())
}

fn run_test(args: &TestArgs) -> anyhow::Result<ExitCode> {
    let ingested = args.ingest.load()?;
    let series = &ingested.series;
    if let Bandwidth::Fixed(b) = args.bandwidth {
        if b * b > series.len() {
            eprintln!(
                "warning: bandwidth {b} exceeds sqrt(n) = {:.1}; the variance estimate may be unstable",
                (series.len() as f64).sqrt()
            );
        }
    }
    let config = LrvConfig {
        kernel: args.kernel.into(),
        bandwidth: args.bandwidth,
        demean: !args.no_demean,
        fallback: if args.strict_variance {
            NegativeFallback::Error
        } else {
            NegativeFallback::ClampToLag0
        },
    };

    let mut tests: Vec<TestResult> = Vec::new();
    for kind in args.statistic.kinds() {
        let result = match kind {
            StatisticKind::Kendall => kendall_change_test(series, &config, args.level)?,
            StatisticKind::Pearson => pearson_change_test(series, &config, args.level)?,
            StatisticKind::SpearmanCopula => {
                spearman_copula_change_test(series, &config, args.level)?
            }
        };
        tests.push(result);
    }

    // The reported location comes from the Kendall process when it ran,
    // otherwise from the first selected test.
    let location_source = tests
        .iter()
        .find(|t| t.statistic_kind == StatisticKind::Kendall)
        .or(tests.first());
    let change_point = location_source.map(|t| ChangePointReport {
        k_hat: t.argmax_k,
        lambda_hat: t.argmax_k as f64 / series.len() as f64,
        date: date_at(series, t.argmax_k),
    });

    let report = RunReport {
        input: input_summary(&ingested),
        config: ConfigEcho {
            statistic: args.statistic.label().to_string(),
            kernel: Some(config.kernel),
            bandwidth: Some(match args.bandwidth {
                Bandwidth::Auto => "auto".to_string(),
                Bandwidth::Fixed(b) => b.to_string(),
            }),
            bandwidth_used: tests.first().map(|t| t.bandwidth_used),
            level: Some(args.level),
            demean: Some(config.demean),
            negative_variance: Some(
                if args.strict_variance { "error" } else { "clamp" }.to_string(),
            ),
        },
        tests,
        change_point,
    };

    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &args.out {
        write_report_files(out, &report, series.timestamps())?;
    }
    let any_reject = report.tests.iter().any(|t| t.reject);
    Ok(ExitCode::from(u8::from(any_reject)))
}

fn run_locate(args: &LocateArgs) -> anyhow::Result<ExitCode> {
    let ingested = args.ingest.load()?;
    let series = &ingested.series;
    let estimate = locate_change(series)?;
    let report = RunReport {
        input: input_summary(&ingested),
        config: ConfigEcho {
            statistic: "kendall".to_string(),
            kernel: None,
            bandwidth: None,
            bandwidth_used: None,
            level: None,
            demean: None,
            negative_variance: None,
        },
        tests: Vec::new(),
        change_point: Some(ChangePointReport {
            k_hat: estimate.k_hat,
            lambda_hat: estimate.lambda_hat,
            date: date_at(series, estimate.k_hat),
        }),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &args.out {
        write_report_files(out, &report, series.timestamps())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn input_summary(ingested: &ingest::Ingested) -> InputSummary {
    let stamps = ingested.series.timestamps();
    InputSummary {
        n: ingested.series.len(),
        source: ingested.source.clone(),
        first_date: stamps.map(|s| s[0].to_string()),
        last_date: stamps.map(|s| s[s.len() - 1].to_string()),
    }
}

fn date_at(series: &BivariateSeries, k: usize) -> Option<String> {
    series.timestamps().map(|s| s[k - 1].to_string())
}

fn write_report_files(
    out: &Path,
    report: &RunReport,
    dates: Option<&[chrono::NaiveDate]>,
) -> anyhow::Result<()> {
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
        }
    }
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(out, json + "\n").with_context(|| format!("cannot write {}", out.display()))?;
    let stem = out
        .file_stem()
        .context("--out needs a file name")?
        .to_string_lossy()
        .into_owned();
    for test in &report.tests {
        let name = format!(
            "{stem}.process.{}.csv",
            report::statistic_slug(test.statistic_kind)
        );
        let path = out.with_file_name(&name);
        report::write_process_csv(&path, test, dates)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// Innovation families of the published simulation studies.
const TABLE_FAMILIES: [Family; 5] = [
    Family::Normal,
    Family::T { df: 20.0 },
    Family::T { df: 5.0 },
    Family::T { df: 3.0 },
    Family::T { df: 1.0 },
];

/// Sample sizes of the null-distribution convergence study.
const CONVERGENCE_SIZES: [usize; 6] = [10, 20, 50, 100, 500, 1000];

/// Sample sizes of the locator accuracy study.
const LOCATOR_SIZES: [usize; 3] = [500, 1000, 2000];

fn run_simulate(which: &SimulateCommand) -> anyhow::Result<ExitCode> {
    match which {
        SimulateCommand::Table1(args) => run_table(Model::One, "table1.csv", args),
        SimulateCommand::Table2(args) => run_table(Model::Two, "table2.csv", args),
        SimulateCommand::Convergence(args) => run_convergence(args),
        SimulateCommand::Locator(args) => run_locator(args),
    }
}

fn ensure_out_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn run_table(model: Model, file_name: &str, args: &TableArgs) -> anyhow::Result<ExitCode> {
    let rows = run_rejection_table(
        model,
        &TABLE_FAMILIES,
        &TABLE_JUMPS_RHO2,
        args.n,
        args.reps,
        args.level,
        args.seed,
    )?;
    let mut stdout = std::io::stdout().lock();
    report::print_rejection_table(&mut stdout, &rows)?;
    ensure_out_dir(&args.out_dir)?;
    let path = args.out_dir.join(file_name);
    report::write_rejection_csv(&path, &rows)?;
    eprintln!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_convergence(args: &ConvergenceArgs) -> anyhow::Result<ExitCode> {
    let model = if args.model == 1 { Model::One } else { Model::Two };
    let results = run_convergence_experiment(model, &CONVERGENCE_SIZES, args.reps, args.seed)?;
    for r in &results {
        println!(
            "n = {:>5}: sup distance to the limit law {:.4} (estimated variance), {:.4} (known variance)",
            r.n, r.sup_dist_estimated, r.sup_dist_known
        );
    }
    ensure_out_dir(&args.out_dir)?;
    let summary = args.out_dir.join(format!("convergence_model{}.csv", args.model));
    report::write_convergence_csv(&summary, &results)?;
    eprintln!("wrote {}", summary.display());
    for r in &results {
        let path = args
            .out_dir
            .join(format!("convergence_model{}_n{}.csv", args.model, r.n));
        report::write_convergence_samples_csv(&path, r)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_locator(args: &LocatorArgs) -> anyhow::Result<ExitCode> {
    let grid: Vec<LocatorScenario> = LOCATOR_SIZES
        .iter()
        .map(|&n| LocatorScenario {
            n,
            lambda_star: 0.5,
            rho_first: 0.4,
            rho_second: -0.4,
            phi: 0.0,
            burn_in: 0,
        })
        .collect();
    let cells = run_locator_experiment(&grid, args.reps, args.seed)?;
    for c in &cells {
        println!(
            "n = {:>5}: |lambda_hat - {}| mean {:.4}, median {:.4}, 90% quantile {:.4}",
            c.n, c.lambda_star, c.mean_abs_error, c.median_abs_error, c.q90_abs_error
        );
    }
    ensure_out_dir(&args.out_dir)?;
    let path = args.out_dir.join("locator.csv");
    report::write_locator_csv(&path, &cells)?;
    eprintln!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_quantiles(args: &QuantilesArgs) -> anyhow::Result<ExitCode> {
    if let Some(p) = args.p {
        let q = kolmogorov_quantile(p)?;
        println!("{q:.10}");
    } else if let Some(x) = args.x {
        println!("{:.10}", 1.0 - kolmogorov_cdf(x));
    }
    Ok(ExitCode::SUCCESS)
}
