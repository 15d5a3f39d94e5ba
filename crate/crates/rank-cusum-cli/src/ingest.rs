//! CSV ingestion: paired observation files and joined price files.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use rank_cusum::BivariateSeries;
use thiserror::Error;

/// Failure while reading or interpreting an input file.
#[derive(Debug, Error)]
pub enum IngestError {
    /// The file could not be opened.
    #[error("cannot open {path}: {source}")]
    Io {
        /// Offending file.
        path: String,
        /// Underlying error.
        source: std::io::Error,
    },
    /// Malformed CSV (ragged rows, encoding problems).
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// A requested column is not in the header.
    #[error("column '{name}' not found in {path}")]
    MissingColumn {
        /// Requested column name.
        name: String,
        /// File whose header was searched.
        path: String,
    },
    /// A cell that should hold a number does not.
    #[error("line {line} of {path}: cannot parse '{value}' as a finite number")]
    NonNumeric {
        /// 1-based line in the file.
        line: u64,
        /// Offending file.
        path: String,
        /// Cell content.
        value: String,
    },
    /// A cell that should hold a date does not.
    #[error("line {line} of {path}: cannot parse '{value}' as a date (expected YYYY-MM-DD)")]
    BadDate {
        /// 1-based line in the file.
        line: u64,
        /// Offending file.
        path: String,
        /// Cell content.
        value: String,
    },
    /// The same date appears twice in one price file.
    #[error("{path}: duplicate date {date}")]
    DuplicateDate {
        /// Repeated date.
        date: NaiveDate,
        /// Offending file.
        path: String,
    },
    /// Log returns need strictly positive prices.
    #[error("{path}: price {value} on {date} is not positive")]
    NonPositivePrice {
        /// Date of the offending price.
        date: NaiveDate,
        /// The price itself.
        value: f64,
        /// Offending file.
        path: String,
    },
    /// The two price files share too few dates to form returns.
    #[error("the price files share only {shared} dates; at least 2 are needed to join them")]
    EmptyJoin {
        /// Number of shared dates.
        shared: usize,
    },
    /// Dates in a paired file must be strictly increasing.
    #[error("line {line} of {path}: dates must be strictly increasing")]
    TimestampOrder {
        /// 1-based line of the out-of-order date.
        line: u64,
        /// Offending file.
        path: String,
    },
    /// The file holds no data rows.
    #[error("{path}: no data rows")]
    Empty {
        /// Offending file.
        path: String,
    },
    /// The assembled observations were rejected by the library.
    #[error(transparent)]
    Series(#[from] rank_cusum::Error),
}

/// A loaded series plus a description of where it came from.
#[derive(Debug)]
pub struct Ingested {
    /// The observations, with timestamps when the input carried dates.
    pub series: BivariateSeries,
    /// Human-readable provenance for the report.
    pub source: String,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: display(path),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column_index(
    headers: &csv::StringRecord,
    name: &str,
    path: &Path,
) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| IngestError::MissingColumn {
            name: name.to_string(),
            path: display(path),
        })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn parse_number(field: &str, line: u64, path: &Path) -> Result<f64, IngestError> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::NonNumeric {
            line,
            path: display(path),
            value: field.to_string(),
        }),
    }
}

fn parse_date(field: &str, line: u64, path: &Path) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d").map_err(|_| IngestError::BadDate {
        line,
        path: display(path),
        value: field.to_string(),
    })
}

/// Reads one CSV of paired observations, in file order.
///
/// When `date_column` is given, the column must hold strictly increasing
/// dates, which become the series timestamps.
pub fn read_paired(
    path: &Path,
    x_column: &str,
    y_column: &str,
    date_column: Option<&str>,
) -> Result<Ingested, IngestError> {
    let mut reader = open_reader(path)?;
    let headers = reader.headers()?.clone();
    let xi = column_index(&headers, x_column, path)?;
    let yi = column_index(&headers, y_column, path)?;
    let di = date_column
        .map(|c| column_index(&headers, c, path))
        .transpose()?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dates = Vec::new();
    for result in reader.records() {
        let record = result?;
        let line = record_line(&record);
        xs.push(parse_number(record.get(xi).unwrap_or(""), line, path)?);
        ys.push(parse_number(record.get(yi).unwrap_or(""), line, path)?);
        if let Some(di) = di {
            let date = parse_date(record.get(di).unwrap_or(""), line, path)?;
            if dates.last().is_some_and(|&prev| date <= prev) {
                return Err(IngestError::TimestampOrder {
                    line,
                    path: display(path),
                });
            }
            dates.push(date);
        }
    }
    if xs.is_empty() {
        return Err(IngestError::Empty {
            path: display(path),
        });
    }
    let series = if di.is_some() {
        BivariateSeries::with_timestamps(xs, ys, dates)?
    } else {
        BivariateSeries::new(xs, ys)?
    };
    Ok(Ingested {
        series,
        source: format!(
            "columns '{x_column}' and '{y_column}' of {}",
            display(path)
        ),
    })
}

fn read_price_file(
    path: &Path,
    date_column: &str,
    value_column: &str,
) -> Result<BTreeMap<NaiveDate, f64>, IngestError> {
    let mut reader = open_reader(path)?;
    let headers = reader.headers()?.clone();
    let di = column_index(&headers, date_column, path)?;
    let vi = column_index(&headers, value_column, path)?;
    let mut prices = BTreeMap::new();
    for result in reader.records() {
        let record = result?;
        let line = record_line(&record);
        let date = parse_date(record.get(di).unwrap_or(""), line, path)?;
        let value = parse_number(record.get(vi).unwrap_or(""), line, path)?;
        if value <= 0.0 {
            return Err(IngestError::NonPositivePrice {
                date,
                value,
                path: display(path),
            });
        }
        if prices.insert(date, value).is_some() {
            return Err(IngestError::DuplicateDate {
                date,
                path: display(path),
            });
        }
    }
    if prices.is_empty() {
        return Err(IngestError::Empty {
            path: display(path),
        });
    }
    Ok(prices)
}

/// Reads two price files, inner-joins them on the date column, and turns
/// consecutive joined prices into pairs of log returns.
///
/// Each return carries the timestamp of the later price. Dates present in
/// only one file are dropped by the join, so a return may span more than
/// one calendar step.
pub fn read_prices(
    first: &Path,
    second: &Path,
    date_column: &str,
    value_column: &str,
) -> Result<Ingested, IngestError> {
    let a = read_price_file(first, date_column, value_column)?;
    let b = read_price_file(second, date_column, value_column)?;
    let joined: Vec<(NaiveDate, f64, f64)> = a
        .iter()
        .filter_map(|(date, &pa)| b.get(date).map(|&pb| (*date, pa, pb)))
        .collect();
    if joined.len() < 2 {
        return Err(IngestError::EmptyJoin {
            shared: joined.len(),
        });
    }
    let mut xs = Vec::with_capacity(joined.len() - 1);
    let mut ys = Vec::with_capacity(joined.len() - 1);
    let mut dates = Vec::with_capacity(joined.len() - 1);
    for pair in joined.windows(2) {
        let (_, a0, b0) = pair[0];
        let (date, a1, b1) = pair[1];
        xs.push((a1 / a0).ln());
        ys.push((b1 / b0).ln());
        dates.push(date);
    }
    let series = BivariateSeries::with_timestamps(xs, ys, dates)?;
    Ok(Ingested {
        series,
        source: format!(
            "log returns of {} and {} joined on '{date_column}'",
            display(first),
            display(second)
        ),
    })
}
