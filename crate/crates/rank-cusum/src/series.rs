//! The input container shared by all estimators: aligned pairs `(x_i, y_i)`.

use chrono::NaiveDate;

use crate::error::{invalid, Result};

/// An aligned bivariate sample `((x_1, y_1), ..., (x_n, y_n))`, optionally
/// carrying one strictly increasing date per observation.
///
/// Construction validates that both coordinate vectors have the same nonzero
/// length and contain only finite values; every estimator in this crate can
/// therefore assume clean input. Individual operations impose their own
/// minimum length (for example the rank correlation estimators need `n >= 2`
/// and the change-point tests need `n >= 20`).
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    xs: Vec<f64>,
    ys: Vec<f64>,
    timestamps: Option<Vec<NaiveDate>>,
}

impl BivariateSeries {
    /// Builds a series from two equally long vectors of finite values.
    ///
    /// # Errors
    ///
    /// Returns an invalid-input error when the lengths differ, the vectors
    /// are empty, or any value is non-finite.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid(format!(
                "coordinate vectors must have equal length, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(invalid("series must contain at least one observation"));
        }
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(invalid(format!(
                    "non-finite value at observation {} (x={x}, y={y})",
                    i + 1
                )));
            }
        }
        Ok(Self {
            xs,
            ys,
            timestamps: None,
        })
    }

    /// Builds a series with one date per observation.
    ///
    /// # Errors
    ///
    /// In addition to the checks of [`BivariateSeries::new`], fails when the
    /// date vector has a different length or is not strictly increasing.
    pub fn with_timestamps(
        xs: Vec<f64>,
        ys: Vec<f64>,
        timestamps: Vec<NaiveDate>,
    ) -> Result<Self> {
        let mut series = Self::new(xs, ys)?;
        if timestamps.len() != series.len() {
            return Err(invalid(format!(
                "timestamp vector length {} does not match series length {}",
                timestamps.len(),
                series.len()
            )));
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "timestamps must be strictly increasing, violated at position {} ({} >= {})",
                w + 1,
                timestamps[w],
                timestamps[w + 1]
            )));
        }
        series.timestamps = Some(timestamps);
        Ok(series)
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// True when the series holds no observations (never the case for a
    /// successfully constructed series).
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// First coordinate values.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Second coordinate values.
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Per-observation dates, when present.
    pub fn timestamps(&self) -> Option<&[NaiveDate]> {
        self.timestamps.as_deref()
    }

    /// A copy with the roles of the two coordinates exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            timestamps: self.timestamps.clone(),
        }
    }
}
