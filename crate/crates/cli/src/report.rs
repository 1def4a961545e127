//! Report assembly and JSON/CSV emission.
//!
//! Values (observations, forecasts, RMSE) are written with five decimals and
//! percentages with two. Observed values are written exactly so a CSV report
//! can be read back as input. Coefficients keep full precision.

use std::io::Write;

use greyfc_core::{FitResult, MetricsReport, RollingOutcome};
use serde::Serialize;

use crate::failure::Failure;
use crate::input::Source;
use crate::run::{Model, RunConfig};

pub const VALUE_DP: i32 = 5;
pub const PERCENT_DP: i32 = 2;

pub fn round_dp(x: f64, dp: i32) -> f64 {
    let scale = 10f64.powi(dp);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub model: Model,
    pub source: String,
    pub params: Params,
    pub points: Vec<Point>,
    /// Over every point that has an observation.
    pub metrics: Metrics,
    /// Over the training span (the first window for rolling runs).
    pub training_metrics: Metrics,
    pub trace: Vec<TraceStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub init: f64,
    pub anchor: usize,
    pub train: usize,
    pub horizon: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
    pub correction: bool,
    pub correction_fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection_arpe: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub label: String,
    pub actual: Option<f64>,
    pub fitted: f64,
    pub rpe: Option<f64>,
    #[serde(rename = "P")]
    pub p: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub points: usize,
    pub arpe: f64,
    pub rmse: f64,
    pub posterior_ratio: Option<f64>,
    pub arpe_class: String,
    pub posterior_rank: Option<u8>,
    pub posterior_class: Option<String>,
}

impl From<&MetricsReport> for Metrics {
    fn from(m: &MetricsReport) -> Self {
        Self {
            points: m.rpe.len(),
            arpe: round_dp(m.arpe, PERCENT_DP),
            rmse: round_dp(m.rmse, VALUE_DP),
            posterior_ratio: m.posterior_ratio.map(|c| round_dp(c, VALUE_DP)),
            arpe_class: m.arpe_class.to_string(),
            posterior_rank: m.posterior_class.map(|r| r.rank()),
            posterior_class: m.posterior_class.map(|r| r.description().to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub window: String,
    pub label: String,
    #[serde(rename = "P")]
    pub p: f64,
    pub n: f64,
    pub a: f64,
    pub b: f64,
    pub prediction: f64,
    pub correction_fallback: bool,
}

impl Report {
    pub fn from_fit(config: &RunConfig, source: &Source, fit: &FitResult) -> Result<Self, Failure> {
        let pairs = vec![(fit.params.p, fit.params.n); fit.fitted.len()];
        Self::assemble(config, source, fit, &pairs, Vec::new())
    }

    pub fn from_rolling(
        config: &RunConfig,
        source: &Source,
        outcome: &RollingOutcome,
    ) -> Result<Self, Failure> {
        let fit = &outcome.fit;
        // in-sample rows carry the first window's pair, forecast rows their own step's
        let mut pairs = vec![(fit.params.p, fit.params.n); fit.actual.len()];
        pairs.extend(outcome.trace.steps.iter().map(|s| (s.p, s.n)));
        let trace = outcome
            .trace
            .steps
            .iter()
            .map(|s| TraceStep {
                step: s.step,
                window: format!("{}..{}", s.window_first, s.window_last),
                label: s.label.clone(),
                p: s.p,
                n: s.n,
                a: s.a,
                b: s.b,
                prediction: round_dp(s.prediction, VALUE_DP),
                correction_fallback: s.correction_fallback,
            })
            .collect();
        let mut report = Self::assemble(config, source, fit, &pairs, trace)?;
        report.params.feedback = Some(format!("{:?}", config.feedback).to_lowercase());
        Ok(report)
    }

    fn assemble(
        config: &RunConfig,
        source: &Source,
        fit: &FitResult,
        pairs: &[(f64, f64)],
        trace: Vec<TraceStep>,
    ) -> Result<Self, Failure> {
        let observed = source.series.values();
        let evaluation = fit.evaluate(observed)?;
        let points = fit
            .labels
            .iter()
            .zip(&fit.fitted)
            .zip(pairs)
            .enumerate()
            .map(|(i, ((label, &fitted), &(p, n)))| {
                let actual = observed.get(i).copied();
                Point {
                    label: label.clone(),
                    actual,
                    fitted: round_dp(fitted, VALUE_DP),
                    rpe: actual.map(|a| round_dp((fitted - a) / a * 100.0, PERCENT_DP)),
                    p,
                    n,
                }
            })
            .collect();
        let params = &fit.params;
        Ok(Self {
            model: config.model,
            source: source.name.clone(),
            params: Params {
                a: params.a,
                b: params.b,
                n: params.n,
                p: params.p,
                init: round_dp(params.init, VALUE_DP),
                anchor: params.anchor,
                train: fit.actual.len(),
                horizon: fit.horizon(),
                feedback: None,
                correction: matches!(config.model, Model::Ongbm | Model::Rongbm)
                    && config.correction.resolve(source.correct_initial),
                correction_fallback: fit.correction_fallback,
                selection_arpe: fit.selection_arpe.map(|a| round_dp(a, PERCENT_DP)),
            },
            points,
            metrics: Metrics::from(&evaluation),
            training_metrics: Metrics::from(&fit.metrics),
            trace,
            generated_at: None,
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), Failure> {
        serde_json::to_writer_pretty(&mut out, self)
            .map_err(|e| Failure::config(format!("cannot write report: {e}")))?;
        writeln!(out).map_err(|e| Failure::config(format!("cannot write report: {e}")))
    }

    /// Columns `label, actual, fitted, rpe, P, n`; forecast rows leave
    /// `actual` and `rpe` empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), Failure> {
        let fail = |e: csv::Error| Failure::config(format!("cannot write report: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "actual", "fitted", "rpe", "P", "n"])
            .map_err(fail)?;
        for pt in &self.points {
            w.write_record([
                pt.label.clone(),
                pt.actual.map(|a| a.to_string()).unwrap_or_default(),
                format!("{:.*}", VALUE_DP as usize, pt.fitted),
                pt.rpe
                    .map(|e| format!("{:.*}", PERCENT_DP as usize, e))
                    .unwrap_or_default(),
                pt.p.to_string(),
                pt.n.to_string(),
            ])
            .map_err(fail)?;
        }
        w.flush()
            .map_err(|e| Failure::config(format!("cannot write report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_dp(61.435224, 5), 61.43522);
        assert_eq!(round_dp(-0.004, 2), 0.0);
        assert_eq!(round_dp(6.5978, 2), 6.6);
    }
}
