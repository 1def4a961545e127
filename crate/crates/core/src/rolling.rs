//! Rolling ONGBM (RONGBM): re-optimize on a sliding window and forecast one
//! step at a time.
//!
//! Each step fits ONGBM on the current window and keeps its one-step forecast.
//! The window then drops its oldest value and appends either that forecast
//! ([`Feedback::Predicted`], a pure out-of-sample forecast) or the observed
//! value for the step ([`Feedback::Actual`], a one-step-ahead backtest).

use serde::{Deserialize, Serialize};

use crate::error::{GreyError, Result};
use crate::models::{FitResult, ModelKind};
use crate::optimize::{fit_ongbm, OngbmConfig};
use crate::series::TimeSeries;

/// What the window is refreshed with after each step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    #[default]
    Predicted,
    Actual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    /// Window length; at least the minimum series length.
    pub window: usize,
    /// Number of one-step forecasts.
    pub horizon: usize,
    pub ongbm: OngbmConfig,
    pub feedback: Feedback,
}

impl RollingConfig {
    pub fn new(window: usize, horizon: usize) -> Self {
        Self {
            window,
            horizon,
            ongbm: OngbmConfig::default(),
            feedback: Feedback::default(),
        }
    }
}

/// One rolling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingStep {
    /// 1-based step number.
    pub step: usize,
    pub window_first: String,
    pub window_last: String,
    /// Label of the forecast point.
    pub label: String,
    #[serde(rename = "P")]
    pub p: f64,
    pub n: f64,
    pub a: f64,
    pub b: f64,
    pub prediction: f64,
    pub correction_fallback: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RollingTrace {
    pub steps: Vec<RollingStep>,
}

impl RollingTrace {
    pub fn predictions(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.prediction).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingOutcome {
    /// First-window in-sample fit followed by the rolling forecasts.
    pub fit: FitResult,
    pub trace: RollingTrace,
}

impl RollingOutcome {
    /// Observed window values followed by the rolling forecasts.
    pub fn composite(&self) -> Vec<f64> {
        let mut out = self.fit.actual.clone();
        out.extend(self.trace.predictions());
        out
    }
}

/// Run the rolling forecast on the first `config.window` values of `series`.
///
/// With [`Feedback::Actual`] the series must also hold the observations for
/// every step but the last.
pub fn rolling_forecast(series: &TimeSeries, config: &RollingConfig) -> Result<RollingOutcome> {
    let RollingConfig {
        window,
        horizon,
        feedback,
        ..
    } = *config;
    config.ongbm.grid.validate()?;
    if horizon == 0 {
        return Err(GreyError::ParameterDomain(
            "rolling horizon must be positive".into(),
        ));
    }
    let first = series.head(window)?;
    if feedback == Feedback::Actual && series.len() < window + horizon - 1 {
        return Err(GreyError::ParameterDomain(format!(
            "actual feedback over {horizon} steps needs {} observations, series has {}",
            window + horizon - 1,
            series.len()
        )));
    }

    let labels = first.extended_labels(horizon);
    let mut values = first.values().to_vec();
    let mut steps = Vec::with_capacity(horizon);
    let mut initial: Option<FitResult> = None;

    for step in 1..=horizon {
        let wrap = |e: GreyError| GreyError::RollingFailure {
            step,
            source: Box::new(e),
        };
        let start = step - 1;
        let current = TimeSeries::new(labels[start..start + window].to_vec(), values.clone())
            .map_err(wrap)?;
        let fit = fit_ongbm(&current, &config.ongbm, 1).map_err(wrap)?;
        let prediction = fit.forecast()[0];
        steps.push(RollingStep {
            step,
            window_first: labels[start].clone(),
            window_last: labels[start + window - 1].clone(),
            label: labels[start + window].clone(),
            p: fit.params.p,
            n: fit.params.n,
            a: fit.params.a,
            b: fit.params.b,
            prediction,
            correction_fallback: fit.correction_fallback,
        });
        values.remove(0);
        values.push(match feedback {
            Feedback::Predicted => prediction,
            Feedback::Actual => series
                .values()
                .get(window + step - 1)
                .copied()
                .unwrap_or(prediction),
        });
        initial.get_or_insert(fit);
    }

    let mut fit = initial.expect("horizon is positive");
    fit.model = ModelKind::Rongbm;
    fit.labels = labels;
    fit.fitted.truncate(window);
    fit.fitted.extend(steps.iter().map(|s| s.prediction));
    Ok(RollingOutcome {
        fit,
        trace: RollingTrace { steps },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::optimize::GridSpec;

    fn coarse(window: usize, horizon: usize) -> RollingConfig {
        RollingConfig {
            ongbm: OngbmConfig {
                grid: GridSpec::with_step(0.05),
                correct_initial: true,
            },
            ..RollingConfig::new(window, horizon)
        }
    }

    #[test]
    fn first_step_matches_plain_ongbm() {
        let gdp = datasets::vietnam_gdp();
        let config = coarse(10, 3);
        let out = rolling_forecast(&gdp, &config).unwrap();
        let direct = fit_ongbm(&gdp.head(10).unwrap(), &config.ongbm, 1).unwrap();
        assert_eq!(out.trace.steps[0].prediction, direct.forecast()[0]);
        assert_eq!(out.fit.in_sample(), direct.in_sample());
        assert_eq!(out.fit.fitted.len(), 13);
        assert_eq!(out.fit.labels[12], "2016");
        assert_eq!(out.fit.model, ModelKind::Rongbm);
        let composite = out.composite();
        assert_eq!(&composite[..10], gdp.head(10).unwrap().values());
        assert_eq!(composite[10..], out.fit.fitted[10..]);
    }

    #[test]
    fn windows_slide_by_one() {
        let gdp = datasets::vietnam_gdp();
        let out = rolling_forecast(&gdp, &coarse(10, 3)).unwrap();
        let s = &out.trace.steps;
        assert_eq!(
            (s[0].window_first.as_str(), s[0].label.as_str()),
            ("2004", "2014")
        );
        assert_eq!(
            (s[2].window_first.as_str(), s[2].window_last.as_str()),
            ("2006", "2015")
        );
    }

    #[test]
    fn actual_feedback_needs_observations() {
        let covid = datasets::covid_global();
        let config = RollingConfig {
            feedback: Feedback::Actual,
            ..coarse(12, 3)
        };
        assert!(matches!(
            rolling_forecast(&covid, &config),
            Err(GreyError::ParameterDomain(_))
        ));
        // the last step never needs an observation
        let config = RollingConfig {
            feedback: Feedback::Actual,
            ..coarse(11, 2)
        };
        assert!(rolling_forecast(&covid, &config).is_ok());
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let covid = datasets::covid_global();
        assert!(rolling_forecast(&covid, &coarse(12, 0)).is_err());
    }

    #[test]
    fn short_window_is_rejected() {
        let covid = datasets::covid_global();
        assert!(matches!(
            rolling_forecast(&covid, &coarse(3, 1)),
            Err(GreyError::TooShort { .. })
        ));
    }
}
