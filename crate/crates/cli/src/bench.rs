//! Reproduction harness: runs every model on the embedded datasets and
//! compares the results with stored expectations, cell by cell.

use std::collections::BTreeMap;
use std::io::{self, Write};

use greyfc_core::metrics::span_arpe;
use greyfc_core::{
    datasets, fit_gm11, fit_ngbm, fit_ongbm, fit_ongbm_fixed, formula_background, formula_exponent,
    rolling_forecast, AnchorMode, FitResult, GreyError, OngbmConfig, RollingConfig, RollingOutcome,
    TimeSeries,
};
use serde::Deserialize;

use crate::failure::Failure;

pub const EMBEDDED: &str = include_str!("expectations.json");

const GDP_TRAIN: usize = 10;
const GDP_HORIZON: usize = 5;
const COVID_HORIZON: usize = 10;

#[derive(Debug, Deserialize)]
pub struct Expectations {
    pub columns: Vec<Column>,
    #[serde(default)]
    pub parameters: Vec<ParamColumn>,
    #[serde(default)]
    pub scalars: Vec<Scalar>,
}

#[derive(Debug, Deserialize)]
pub struct Column {
    pub name: String,
    pub run: String,
    pub tolerance: f64,
    #[serde(default)]
    pub relative: bool,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Deserialize)]
pub struct Cell {
    pub label: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub relative: Option<bool>,
    pub skip: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct ParamColumn {
    pub name: String,
    pub run: String,
    pub cells: Vec<ParamCell>,
}

#[derive(Debug, Deserialize)]
pub struct ParamCell {
    pub label: String,
    #[serde(rename = "P")]
    pub p: f64,
    pub n: f64,
    pub skip: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct Scalar {
    pub name: String,
    pub run: String,
    pub metric: String,
    pub expected: f64,
    pub tolerance: f64,
}

/// Everything the expectations can refer to for one run.
#[derive(Debug, Clone)]
struct RunOutput {
    labels: Vec<String>,
    fitted: Vec<f64>,
    pairs: Vec<(f64, f64)>,
    scalars: BTreeMap<&'static str, f64>,
}

impl RunOutput {
    fn from_fit(fit: &FitResult, observed: &TimeSeries) -> Result<Self, GreyError> {
        let pairs = vec![(fit.params.p, fit.params.n); fit.fitted.len()];
        Self::build(fit, observed, pairs)
    }

    fn from_rolling(out: &RollingOutcome, observed: &TimeSeries) -> Result<Self, GreyError> {
        let fit = &out.fit;
        let mut pairs = vec![(fit.params.p, fit.params.n); fit.actual.len()];
        pairs.extend(out.trace.steps.iter().map(|s| (s.p, s.n)));
        Self::build(fit, observed, pairs)
    }

    fn build(
        fit: &FitResult,
        observed: &TimeSeries,
        pairs: Vec<(f64, f64)>,
    ) -> Result<Self, GreyError> {
        let evaluation = fit.evaluate(observed.values())?;
        let share = span_arpe(&evaluation.rpe, 0..fit.actual.len(), evaluation.rpe.len())?;
        let scalars = BTreeMap::from([
            ("arpe", evaluation.arpe),
            ("training_share", share),
            ("P", fit.params.p),
            ("n", fit.params.n),
        ]);
        Ok(Self {
            labels: fit.labels.clone(),
            fitted: fit.fitted.clone(),
            pairs,
            scalars,
        })
    }

    fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn compute_runs() -> BTreeMap<&'static str, Result<RunOutput, GreyError>> {
    let gdp = datasets::vietnam_gdp();
    let covid = datasets::covid_global();
    let corrected = OngbmConfig::default();
    let uncorrected = OngbmConfig {
        correct_initial: false,
        ..OngbmConfig::default()
    };

    let gdp_runs = || -> Vec<(&'static str, Result<RunOutput, GreyError>)> {
        let train = gdp.head(GDP_TRAIN).expect("embedded series");
        let fit = |r: Result<FitResult, GreyError>| r.and_then(|f| RunOutput::from_fit(&f, &gdp));
        let formula = (|| {
            let p = formula_background(&train);
            let n = formula_exponent(&train, p)?;
            fit_ongbm_fixed(&train, n, p, GDP_HORIZON, true)
        })();
        let rolling = RollingConfig {
            ongbm: corrected,
            ..RollingConfig::new(GDP_TRAIN, GDP_HORIZON)
        };
        vec![
            ("gdp-gm11", fit(fit_gm11(&train, GDP_HORIZON))),
            (
                "gdp-ngbm",
                fit(fit_ngbm(
                    &train,
                    0.126,
                    0.5,
                    GDP_HORIZON,
                    AnchorMode::First,
                    None,
                )),
            ),
            ("gdp-ongbm", fit(fit_ongbm(&train, &corrected, GDP_HORIZON))),
            ("gdp-formula", fit(formula)),
            (
                "gdp-rongbm",
                rolling_forecast(&gdp, &rolling).and_then(|o| RunOutput::from_rolling(&o, &gdp)),
            ),
        ]
    };
    let covid_runs = || -> Vec<(&'static str, Result<RunOutput, GreyError>)> {
        let fit = |r: Result<FitResult, GreyError>| r.and_then(|f| RunOutput::from_fit(&f, &covid));
        let rolling = RollingConfig {
            ongbm: uncorrected,
            ..RollingConfig::new(covid.len(), COVID_HORIZON)
        };
        vec![
            ("covid-gm11", fit(fit_gm11(&covid, 0))),
            (
                "covid-ngbm",
                fit(fit_ngbm(&covid, 0.41, 0.5, 0, AnchorMode::First, None)),
            ),
            (
                "covid-ongbm",
                fit(fit_ongbm(&covid, &uncorrected, COVID_HORIZON)),
            ),
            (
                "covid-rongbm",
                rolling_forecast(&covid, &rolling)
                    .and_then(|o| RunOutput::from_rolling(&o, &covid)),
            ),
        ]
    };
    let (mut runs, more) = rayon::join(gdp_runs, covid_runs);
    runs.extend(more);
    runs.into_iter().collect()
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub mismatches: Vec<String>,
}

impl Summary {
    fn tally(&mut self, ok: bool, what: impl FnOnce() -> String) -> &'static str {
        if ok {
            self.passed += 1;
            "ok"
        } else {
            self.failed += 1;
            self.mismatches.push(what());
            "MISMATCH"
        }
    }
}

pub fn parse(text: &str) -> Result<Expectations, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::config(format!("invalid expectations: {e}")))
}

pub fn bench<W: Write>(expectations: &Expectations, out: &mut W) -> io::Result<Summary> {
    let runs = compute_runs();
    let mut summary = Summary::default();

    for column in &expectations.columns {
        writeln!(out, "{}", column.name)?;
        let run = match runs.get(column.run.as_str()) {
            Some(Ok(run)) => run,
            other => {
                let why = describe_missing(&column.run, other);
                writeln!(out, "  {why}")?;
                summary.failed += column.cells.len();
                summary.mismatches.push(format!("{}: {why}", column.name));
                continue;
            }
        };
        let (mut hit, mut compared) = (0, 0);
        for cell in &column.cells {
            if let Some(reason) = &cell.skip {
                summary.skipped += 1;
                writeln!(
                    out,
                    "  {:<10}  expected {:>12}  skipped: {reason}",
                    cell.label, cell.value
                )?;
                continue;
            }
            compared += 1;
            let got = run.index(&cell.label).map(|i| run.fitted[i]);
            let tol = cell.tolerance.unwrap_or(column.tolerance);
            let relative = cell.relative.unwrap_or(column.relative);
            let Some(got) = got else {
                summary.tally(false, || {
                    format!("{} {}: no such label", column.name, cell.label)
                });
                writeln!(
                    out,
                    "  {:<10}  expected {:>12}  missing label  MISMATCH",
                    cell.label, cell.value
                )?;
                continue;
            };
            let delta = got - cell.value;
            let err = if relative {
                delta.abs() / cell.value.abs()
            } else {
                delta.abs()
            };
            let ok = err <= tol;
            hit += usize::from(ok);
            let tol_text = if relative {
                format!("{}%", tol * 100.0)
            } else {
                tol.to_string()
            };
            let verdict = summary.tally(ok, || {
                format!(
                    "{} {}: expected {}, got {got:.5} (delta {delta:+.5}, tolerance {tol_text})",
                    column.name, cell.label, cell.value
                )
            });
            writeln!(
                out,
                "  {:<10}  expected {:>12}  got {got:>14.5}  delta {delta:+.5}  tol {tol_text}  {verdict}",
                cell.label, cell.value
            )?;
        }
        writeln!(
            out,
            "{}: {hit}/{compared} cells within tolerance",
            column.name
        )?;
    }

    for column in &expectations.parameters {
        writeln!(out, "{}", column.name)?;
        let run = match runs.get(column.run.as_str()) {
            Some(Ok(run)) => run,
            other => {
                let why = describe_missing(&column.run, other);
                writeln!(out, "  {why}")?;
                summary.failed += column.cells.len();
                summary.mismatches.push(format!("{}: {why}", column.name));
                continue;
            }
        };
        let (mut hit, mut compared) = (0, 0);
        for cell in &column.cells {
            let got = run.index(&cell.label).map(|i| run.pairs[i]);
            let got_text = got.map_or("missing".to_string(), |(p, n)| format!("({p}, {n})"));
            if let Some(reason) = &cell.skip {
                summary.skipped += 1;
                writeln!(
                    out,
                    "  {:<10}  expected ({}, {})  got {got_text}  skipped: {reason}",
                    cell.label, cell.p, cell.n
                )?;
                continue;
            }
            compared += 1;
            let ok = got == Some((cell.p, cell.n));
            hit += usize::from(ok);
            let verdict = summary.tally(ok, || {
                format!(
                    "{} {}: expected ({}, {}), got {got_text}",
                    column.name, cell.label, cell.p, cell.n
                )
            });
            writeln!(
                out,
                "  {:<10}  expected ({}, {})  got {got_text}  {verdict}",
                cell.label, cell.p, cell.n
            )?;
        }
        writeln!(out, "{}: {hit}/{compared} pairs match", column.name)?;
    }

    for scalar in &expectations.scalars {
        let got = match runs.get(scalar.run.as_str()) {
            Some(Ok(run)) => run.scalars.get(scalar.metric.as_str()).copied(),
            _ => None,
        };
        let Some(got) = got else {
            summary.tally(false, || format!("{}: unavailable", scalar.name));
            writeln!(
                out,
                "{}: expected {}, unavailable  MISMATCH",
                scalar.name, scalar.expected
            )?;
            continue;
        };
        let delta = got - scalar.expected;
        let verdict = summary.tally(delta.abs() <= scalar.tolerance, || {
            format!(
                "{}: expected {}, got {got:.7} (tolerance {})",
                scalar.name, scalar.expected, scalar.tolerance
            )
        });
        writeln!(
            out,
            "{}: expected {}, got {} (delta {delta:+.2e}, tolerance {}) {verdict}",
            scalar.name,
            scalar.expected,
            display_scalar(got),
            scalar.tolerance
        )?;
    }

    writeln!(
        out,
        "bench: {}/{} checks within tolerance, {} skipped",
        summary.passed,
        summary.passed + summary.failed,
        summary.skipped
    )?;
    if !summary.mismatches.is_empty() {
        writeln!(out, "mismatches:")?;
        for m in &summary.mismatches {
            writeln!(out, "  {m}")?;
        }
    }
    Ok(summary)
}

fn display_scalar(x: f64) -> String {
    if x.abs() < 1.0 {
        format!("{x:.7}")
    } else {
        format!("{x:.4}")
    }
}

fn describe_missing(name: &str, run: Option<&Result<RunOutput, GreyError>>) -> String {
    match run {
        Some(Err(e)) => format!("run '{name}' failed: {e}"),
        _ => format!("unknown run '{name}'"),
    }
}
