//! The JSON run report and the CSV writers for test and simulation output.

use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use rank_cusum::{
    ConvergenceResult, KernelKind, LocatorCell, RejectionTableRow, StatisticKind, TestResult,
};
use serde::{Deserialize, Serialize};

/// Top-level JSON document printed by `test` and `locate`.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// What was analyzed.
    pub input: InputSummary,
    /// The options the run used.
    pub config: ConfigEcho,
    /// One entry per statistic that was tested (empty for `locate`).
    pub tests: Vec<TestResult>,
    /// Estimated change location, when one was computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub change_point: Option<ChangePointReport>,
}

/// Provenance and size of the analyzed series.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    /// Number of observation pairs.
    pub n: usize,
    /// Where the observations came from.
    pub source: String,
    /// First timestamp (ISO date), when the input carried dates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_date: Option<String>,
    /// Last timestamp (ISO date), when the input carried dates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_date: Option<String>,
}

/// Echo of the effective options; fields not used by the subcommand are
/// omitted.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    /// Statistic selection as given on the command line.
    pub statistic: String,
    /// Kernel of the long-run variance estimator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelKind>,
    /// Requested bandwidth: "auto" or a lag count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<String>,
    /// Lag count the estimator actually used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_used: Option<usize>,
    /// Asymptotic significance level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    /// Whether influence values were demeaned before the variance estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demean: Option<bool>,
    /// Reaction to a negative raw variance estimate: "clamp" or "error".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_variance: Option<String>,
}

/// Estimated change location.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePointReport {
    /// Smallest prefix length maximizing the fluctuation process.
    pub k_hat: usize,
    /// `k_hat / n`, the estimated change fraction.
    pub lambda_hat: f64,
    /// Timestamp of observation `k_hat`, when the input carried dates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

/// File-name slug of a statistic, matching its JSON name.
pub fn statistic_slug(kind: StatisticKind) -> &'static str {
    match kind {
        StatisticKind::Kendall => "kendall",
        StatisticKind::Pearson => "pearson",
        StatisticKind::SpearmanCopula => "spearman_copula",
    }
}

/// Writes one CUSUM path as CSV: prefix length, optional date, and the
/// weighted absolute difference from the full-sample estimate.
pub fn write_process_csv(
    path: &Path,
    result: &TestResult,
    dates: Option<&[NaiveDate]>,
) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    if dates.is_some() {
        writer.write_record(["k", "date", "weighted_abs_diff"])?;
    } else {
        writer.write_record(["k", "weighted_abs_diff"])?;
    }
    for (i, value) in result.process.values.iter().enumerate() {
        let k = result.process.k_min + i;
        match dates {
            Some(dates) => writer.write_record([
                k.to_string(),
                dates[k - 1].to_string(),
                value.to_string(),
            ])?,
            None => writer.write_record([k.to_string(), value.to_string()])?,
        }
    }
    writer.flush()?;
    Ok(())
}

/// Writes a rejection-frequency table as CSV, one row per
/// distribution/test pair and one column per jump.
pub fn write_rejection_csv(path: &Path, rows: &[RejectionTableRow]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["distribution".to_string(), "test".to_string()];
    header.extend(rows[0].jump_labels.iter().cloned());
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.distribution.clone(), row.test.clone()];
        record.extend(row.frequencies.iter().map(|f| f.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Prints a rejection-frequency table aligned for reading.
pub fn print_rejection_table(out: &mut impl Write, rows: &[RejectionTableRow]) -> std::io::Result<()> {
    if rows.is_empty() {
        return Ok(());
    }
    writeln!(
        out,
        "rejection frequencies at level {} ({} replicates per scenario)",
        rows[0].level, rows[0].replications
    )?;
    write!(out, "{:<14} {:<16}", "distribution", "test")?;
    for label in &rows[0].jump_labels {
        write!(out, " {label:>6}")?;
    }
    writeln!(out)?;
    for row in rows {
        write!(out, "{:<14} {:<16}", row.distribution, row.test)?;
        for f in &row.frequencies {
            write!(out, " {f:>6.3}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes the per-size summary of a convergence experiment.
pub fn write_convergence_csv(
    path: &Path,
    results: &[ConvergenceResult],
) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["n", "reps", "sup_dist_estimated", "sup_dist_known"])?;
    for r in results {
        writer.write_record([
            r.n.to_string(),
            r.reps.to_string(),
            r.sup_dist_estimated.to_string(),
            r.sup_dist_known.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the sorted null statistics of one convergence cell, for plotting
/// empirical distribution functions against the limit law.
pub fn write_convergence_samples_csv(
    path: &Path,
    result: &ConvergenceResult,
) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["estimated", "known"])?;
    for (e, k) in result.estimated_sorted.iter().zip(&result.known_sorted) {
        writer.write_record([e.to_string(), k.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes locator accuracy cells as CSV.
pub fn write_locator_csv(path: &Path, cells: &[LocatorCell]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "n",
        "lambda_star",
        "rho_first",
        "rho_second",
        "phi",
        "reps",
        "mean_abs_error",
        "median_abs_error",
        "q90_abs_error",
    ])?;
    for c in cells {
        writer.write_record([
            c.n.to_string(),
            c.lambda_star.to_string(),
            c.rho_first.to_string(),
            c.rho_second.to_string(),
            c.phi.to_string(),
            c.reps.to_string(),
            c.mean_abs_error.to_string(),
            c.median_abs_error.to_string(),
            c.q90_abs_error.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
