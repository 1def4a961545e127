//! Error measures and precision classes.
//!
//! Relative percentage errors are reported with the sign of
//! `fitted - actual`, matching the published tables. Every aggregate works on
//! absolute values, so the sign convention only affects the per-point column.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{GreyError, Result};

/// Relative percentage error per point, `(fitted - actual) / actual * 100`.
pub fn rpe(actual: &[f64], fitted: &[f64]) -> Result<Vec<f64>> {
    check_lengths(actual, fitted)?;
    actual
        .iter()
        .zip(fitted)
        .enumerate()
        .map(|(i, (&a, &f))| {
            if a == 0.0 {
                Err(GreyError::MetricInput(format!(
                    "actual value at position {i} is zero"
                )))
            } else {
                Ok((f - a) / a * 100.0)
            }
        })
        .collect()
}

/// Mean absolute RPE.
pub fn arpe(rpe: &[f64]) -> Result<f64> {
    if rpe.is_empty() {
        return Err(GreyError::MetricInput("empty RPE list".into()));
    }
    Ok(rpe.iter().map(|e| e.abs()).sum::<f64>() / rpe.len() as f64)
}

/// Sum of `|rpe|` over `span`, divided by `total`.
///
/// This is the share a sub-span contributes to an ARPE taken over `total`
/// points. The published training-span figures for the GDP study are of this
/// form (ten training errors over the fifteen-year evaluation length).
pub fn span_arpe(rpe: &[f64], span: Range<usize>, total: usize) -> Result<f64> {
    if span.end > rpe.len() || span.is_empty() || total == 0 {
        return Err(GreyError::MetricInput(format!(
            "span {span:?} over {} errors with total {total}",
            rpe.len()
        )));
    }
    Ok(rpe[span].iter().map(|e| e.abs()).sum::<f64>() / total as f64)
}

pub fn rmse(actual: &[f64], fitted: &[f64]) -> Result<f64> {
    check_lengths(actual, fitted)?;
    if actual.is_empty() {
        return Err(GreyError::MetricInput("empty series".into()));
    }
    let sq: f64 = actual
        .iter()
        .zip(fitted)
        .map(|(a, f)| (a - f).powi(2))
        .sum();
    Ok((sq / actual.len() as f64).sqrt())
}

/// Posterior error ratio: population standard deviation of the RPE sequence
/// (in percent) over the population standard deviation of the actual series.
///
/// The numerator is relative and the denominator is in data units, so unlike
/// the other measures this ratio scales as `1/λ` when both series are scaled by `λ`.
pub fn posterior_ratio(actual: &[f64], fitted: &[f64]) -> Result<f64> {
    check_lengths(actual, fitted)?;
    if actual.len() < 2 {
        return Err(GreyError::MetricInput(
            "posterior ratio needs at least two points".into(),
        ));
    }
    let errors = rpe(actual, fitted)?;
    let data_sd = population_sd(actual);
    if data_sd == 0.0 {
        return Err(GreyError::ZeroVariance);
    }
    Ok(population_sd(&errors) / data_sd)
}

fn population_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn check_lengths(actual: &[f64], fitted: &[f64]) -> Result<()> {
    if actual.len() != fitted.len() {
        return Err(GreyError::MetricInput(format!(
            "{} actual values but {} fitted values",
            actual.len(),
            fitted.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArpeClass {
    Excellent,
    Good,
    Reasonable,
    Unacceptable,
}

impl fmt::Display for ArpeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ArpeClass::Excellent => "Excellent",
            ArpeClass::Good => "Good",
            ArpeClass::Reasonable => "Reasonable",
            ArpeClass::Unacceptable => "Unacceptable",
        };
        f.write_str(s)
    }
}

/// Bands are closed on the right: a boundary value belongs to the better class.
pub fn classify_arpe(arpe: f64) -> ArpeClass {
    if arpe <= 10.0 {
        ArpeClass::Excellent
    } else if arpe <= 20.0 {
        ArpeClass::Good
    } else if arpe <= 50.0 {
        ArpeClass::Reasonable
    } else {
        ArpeClass::Unacceptable
    }
}

/// Precision rank from the posterior error ratio, 1 (highly accurate) to 4 (disqualified).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PosteriorRank(u8);

impl PosteriorRank {
    pub fn rank(self) -> u8 {
        self.0
    }

    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "Highly accurate",
            2 => "Qualified",
            3 => "Marginal",
            _ => "Disqualified",
        }
    }
}

impl fmt::Display for PosteriorRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.description())
    }
}

pub fn classify_posterior(ratio: f64) -> PosteriorRank {
    let rank = if ratio <= 0.35 {
        1
    } else if ratio <= 0.5 {
        2
    } else if ratio <= 0.65 {
        3
    } else {
        4
    };
    PosteriorRank(rank)
}

/// Summary of a fit against observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rpe: Vec<f64>,
    pub arpe: f64,
    pub rmse: f64,
    /// `None` when the actual values have zero variance.
    pub posterior_ratio: Option<f64>,
    pub arpe_class: ArpeClass,
    pub posterior_class: Option<PosteriorRank>,
}

impl MetricsReport {
    pub fn compute(actual: &[f64], fitted: &[f64]) -> Result<Self> {
        let rpe = rpe(actual, fitted)?;
        let arpe = arpe(&rpe)?;
        let rmse = rmse(actual, fitted)?;
        let posterior_ratio = match posterior_ratio(actual, fitted) {
            Ok(c) => Some(c),
            Err(GreyError::ZeroVariance) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            arpe_class: classify_arpe(arpe),
            posterior_class: posterior_ratio.map(classify_posterior),
            rpe,
            arpe,
            rmse,
            posterior_ratio,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rpe_sign_follows_tables() {
        let e = rpe(&[57.63326], &[61.43522]).unwrap();
        assert!((e[0] - 6.60).abs() < 0.005);
        let e = rpe(&[7816.0], &[9946.0]).unwrap();
        assert!((e[0] - 27.25).abs() < 0.005);
        assert_eq!(rpe(&[3.0], &[3.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn rpe_errors() {
        assert!(rpe(&[1.0, 2.0], &[1.0]).is_err());
        assert!(rpe(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn arpe_is_a_mean() {
        assert_eq!(arpe(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(arpe(&[-2.0, 4.0]).unwrap(), 3.0);
        assert!(arpe(&[]).is_err());
    }

    #[test]
    fn arpe_of_printed_gm_column() {
        // RPE column of the GM(1,1) GDP fit as printed (two decimals).
        let printed = [
            0.00, 6.60, 5.48, 3.07, -8.27, -2.26, 1.86, -0.71, -1.57, 2.08, 6.97, 17.47, 26.02,
            31.74, 37.01,
        ];
        let sum: f64 = printed.iter().map(|e: &f64| e.abs()).sum();
        assert!((sum - 151.11).abs() < 1e-9);
        assert!((arpe(&printed).unwrap() - 10.07).abs() < 0.01);
    }

    #[test]
    fn arpe_of_printed_rolling_column() {
        let printed = [
            0.00, -0.14, 3.59, 3.44, -7.06, -0.75, 3.15, -0.06, -1.78, 0.79, 4.35, 11.09, 16.27,
            21.01, 23.78,
        ];
        assert!((arpe(&printed).unwrap() - 6.48).abs() < 0.01);
    }

    #[test]
    fn span_arpe_divides_by_total() {
        let e = [1.0, -2.0, 3.0, 4.0];
        assert_eq!(span_arpe(&e, 0..2, 4).unwrap(), 0.75);
        assert!(span_arpe(&e, 0..5, 4).is_err());
    }

    #[test]
    fn rmse_hand_values() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0], &[2.0, 2.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn posterior_ratio_cases() {
        assert_eq!(
            posterior_ratio(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap(),
            0.0
        );
        assert_eq!(
            posterior_ratio(&[5.0, 5.0, 5.0], &[4.0, 5.0, 6.0]),
            Err(GreyError::ZeroVariance)
        );
        // errors +100% and 0%: sd 50; data sd 0.5
        let c = posterior_ratio(&[1.0, 2.0], &[2.0, 2.0]).unwrap();
        assert!((c - 100.0).abs() < 1e-12);
    }

    #[test]
    fn arpe_classes() {
        assert_eq!(classify_arpe(7.13), ArpeClass::Excellent);
        assert_eq!(classify_arpe(10.0), ArpeClass::Excellent);
        assert_eq!(classify_arpe(10.07), ArpeClass::Good);
        assert_eq!(classify_arpe(20.0), ArpeClass::Good);
        assert_eq!(classify_arpe(50.0), ArpeClass::Reasonable);
        assert_eq!(classify_arpe(55.0), ArpeClass::Unacceptable);
    }

    #[test]
    fn posterior_ranks() {
        assert_eq!(classify_posterior(0.2).rank(), 1);
        assert_eq!(classify_posterior(0.35).rank(), 1);
        assert_eq!(classify_posterior(0.5).rank(), 2);
        assert_eq!(classify_posterior(0.6).rank(), 3);
        assert_eq!(classify_posterior(0.65).rank(), 3);
        assert_eq!(classify_posterior(0.9).rank(), 4);
    }

    #[test]
    fn report_tolerates_constant_actuals() {
        let r = MetricsReport::compute(&[2.0, 2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(r.arpe, 0.0);
        assert_eq!(r.posterior_ratio, None);
        assert_eq!(r.arpe_class, ArpeClass::Excellent);
    }
}
