//! Sequence transforms shared by every grey model.
//!
//! A [`TimeSeries`] holds strictly positive observations with opaque labels.
//! Fitting works on the accumulated sequence ([`AgoSeries`], the running sum of
//! the observations) and on background values ([`BackgroundSeries`]), convex
//! combinations of adjacent accumulated points.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{GreyError, Result};

/// Smallest series accepted for fitting.
pub const MIN_LEN: usize = 4;

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Ordered, strictly positive observations with their time labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(GreyError::LengthMismatch {
                labels: labels.len(),
                values: values.len(),
            });
        }
        if values.len() < MIN_LEN {
            return Err(GreyError::TooShort {
                len: values.len(),
                min: MIN_LEN,
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(GreyError::NonFinite { index });
            }
            if value <= 0.0 {
                return Err(GreyError::NonPositive { index, value });
            }
        }
        Ok(Self { labels, values })
    }

    /// Series labelled `1, 2, ..., len`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let labels = (1..=values.len()).map(|i| i.to_string()).collect();
        Self::new(labels, values)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous sub-series `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        let end = start + len;
        if end > self.len() {
            return Err(GreyError::ParameterDomain(format!(
                "window [{start}, {end}) exceeds series length {}",
                self.len()
            )));
        }
        Self::new(
            self.labels[start..end].to_vec(),
            self.values[start..end].to_vec(),
        )
    }

    /// The first `len` observations.
    pub fn head(&self, len: usize) -> Result<Self> {
        self.window(0, len)
    }

    /// Labels for `count` steps past the end of the series.
    pub fn future_labels(&self, count: usize) -> Vec<String> {
        continue_labels(&self.labels, count)
    }

    /// Observed labels followed by `horizon` continued labels.
    pub fn extended_labels(&self, horizon: usize) -> Vec<String> {
        let mut labels = self.labels.clone();
        labels.extend(self.future_labels(horizon));
        labels
    }
}

/// Continue a label sequence by `count` steps.
///
/// Integer labels (years, indices) advance by one and ISO `YYYY-MM-DD` dates
/// by one calendar day. Anything else gets a `+k` offset suffix relative to the
/// last label.
pub fn continue_labels(labels: &[String], count: usize) -> Vec<String> {
    let Some(last) = labels.last() else {
        return (1..=count).map(|k| format!("+{k}")).collect();
    };
    let last = last.trim();
    if let Ok(year) = last.parse::<i64>() {
        return (1..=count as i64).map(|k| (year + k).to_string()).collect();
    }
    if let Ok(date) = NaiveDate::parse_from_str(last, DATE_FORMAT) {
        return (1..=count as i64)
            .map(|k| (date + Duration::days(k)).format(DATE_FORMAT).to_string())
            .collect();
    }
    (1..=count).map(|k| format!("{last}+{k}")).collect()
}

/// Running sums of a positive series; strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct AgoSeries {
    values: Vec<f64>,
}

impl AgoSeries {
    /// Wrap an already accumulated sequence, checking it is positive and strictly increasing.
    pub fn from_cumulative(values: Vec<f64>) -> Result<Self> {
        match values.first() {
            None => return Err(GreyError::TooShort { len: 0, min: 1 }),
            Some(&first) if first <= 0.0 => {
                return Err(GreyError::NonPositive {
                    index: 0,
                    value: first,
                })
            }
            _ => {}
        }
        for (i, pair) in values.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(GreyError::NonPositive {
                    index: i + 1,
                    value: pair[1] - pair[0],
                });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn inverse(&self) -> Vec<f64> {
        inverse_ago(&self.values)
    }
}

/// Background values `z(k) = (1-P)·x1(k-1) + P·x1(k)` for `k = 2..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSeries {
    values: Vec<f64>,
    weight: f64,
}

impl BackgroundSeries {
    /// Values in order `z(2), ..., z(m)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn ago(series: &TimeSeries) -> AgoSeries {
    AgoSeries {
        values: accumulate(series.values()),
    }
}

pub(crate) fn accumulate(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |sum, &v| {
            *sum += v;
            Some(*sum)
        })
        .collect()
}

/// First differences of an accumulated sequence; the first element passes through.
pub fn inverse_ago(cumulative: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(cumulative.len());
    if let Some(&first) = cumulative.first() {
        out.push(first);
    }
    out.extend(cumulative.windows(2).map(|w| w[1] - w[0]));
    out
}

pub fn background(ago: &AgoSeries, weight: f64) -> Result<BackgroundSeries> {
    check_weight(weight)?;
    if ago.len() < 2 {
        return Err(GreyError::TooShort {
            len: ago.len(),
            min: 2,
        });
    }
    Ok(BackgroundSeries {
        values: background_values(ago.values(), weight),
        weight,
    })
}

pub(crate) fn check_weight(weight: f64) -> Result<()> {
    if (0.0..=1.0).contains(&weight) {
        Ok(())
    } else {
        Err(GreyError::ParameterDomain(format!(
            "background weight P = {weight} outside [0, 1]"
        )))
    }
}

pub(crate) fn background_values(cumulative: &[f64], weight: f64) -> Vec<f64> {
    cumulative
        .windows(2)
        .map(|w| (1.0 - weight) * w[0] + weight * w[1])
        .collect()
}
