//! GM(1,1) and NGBM(1,1): least-squares estimation and time response.
//!
//! The NGBM(1,1) whitening equation is `dx/dt + a·x = b·x^n` on the
//! accumulated series; `n = 0` recovers GM(1,1). Its discrete time response,
//! anchored at index `anchor` with state `init`, is
//!
//! ```text
//! x̂1(k) = [ (init^(1-n) - b/a)·e^(-a(1-n)(k-anchor)) + b/a ]^(1/(1-n))
//! ```
//!
//! and fitted values come from differencing consecutive `x̂1(k)`.

use serde::{Deserialize, Serialize};

use crate::error::{GreyError, Result};
use crate::metrics::MetricsReport;
use crate::series::{accumulate, background_values, check_weight, TimeSeries};

/// Largest exponent magnitude accepted before `exp` is considered to overflow.
const EXP_LIMIT: f64 = 700.0;
/// Relative determinant threshold for the 2x2 normal equations.
const SINGULAR_TOL: f64 = 1e-12;

/// Where the time response is pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorMode {
    /// Pinned at index 1 to the first observation.
    First,
    /// Pinned at index m to the last accumulated value.
    Last,
}

/// Fitted coefficients plus the structural parameters of a response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreyParams {
    /// Development coefficient.
    pub a: f64,
    /// Grey input.
    pub b: f64,
    /// Bernoulli exponent.
    pub n: f64,
    /// Background weight.
    #[serde(rename = "P")]
    pub p: f64,
    /// Accumulated state at the anchor index.
    pub init: f64,
    /// 1-based index the response is anchored at.
    pub anchor: usize,
}

impl GreyParams {
    /// Accumulated response `x̂1(k)` for 1-based `k`.
    pub fn response(&self, k: i64) -> Result<f64> {
        ngbm_response(self, k)
    }
}

/// Model family a [`FitResult`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gm11,
    Ngbm,
    Ongbm,
    Rongbm,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Gm11 => "GM(1,1)",
            ModelKind::Ngbm => "NGBM(1,1)",
            ModelKind::Ongbm => "ONGBM(1,1)",
            ModelKind::Rongbm => "RONGBM(1,1)",
        })
    }
}

/// Result of fitting a grey model on a training series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub params: GreyParams,
    /// Training labels followed by forecast labels.
    pub labels: Vec<String>,
    /// Observed training values.
    pub actual: Vec<f64>,
    /// Fitted values over the training span followed by the forecasts.
    pub fitted: Vec<f64>,
    /// Metrics over the training span.
    pub metrics: MetricsReport,
    /// Set when the initial-condition correction was requested but infeasible.
    pub correction_fallback: bool,
    /// Objective value of the winning lattice point, for optimized fits.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection_arpe: Option<f64>,
}

impl FitResult {
    pub(crate) fn new(
        model: ModelKind,
        params: GreyParams,
        series: &TimeSeries,
        fitted: Vec<f64>,
    ) -> Result<Self> {
        let horizon = fitted.len() - series.len();
        let metrics = MetricsReport::compute(series.values(), &fitted[..series.len()])?;
        Ok(Self {
            model,
            params,
            labels: series.extended_labels(horizon),
            actual: series.values().to_vec(),
            fitted,
            metrics,
            correction_fallback: false,
            selection_arpe: None,
        })
    }

    pub fn horizon(&self) -> usize {
        self.fitted.len() - self.actual.len()
    }

    pub fn in_sample(&self) -> &[f64] {
        &self.fitted[..self.actual.len()]
    }

    pub fn forecast(&self) -> &[f64] {
        &self.fitted[self.actual.len()..]
    }

    /// Metrics against `observed`, aligned from the first fitted point and
    /// truncated to whichever sequence is shorter.
    pub fn evaluate(&self, observed: &[f64]) -> Result<MetricsReport> {
        let len = observed.len().min(self.fitted.len());
        MetricsReport::compute(&observed[..len], &self.fitted[..len])
    }
}

/// Least-squares `(a, b)` for the grey equation `x0(k) + a·z(k) = b·z(k)^n`, `k = 2..m`.
pub fn estimate_ab(series: &TimeSeries, n: f64, p: f64) -> Result<(f64, f64)> {
    check_weight(p)?;
    check_exponent(n)?;
    let cumulative = accumulate(series.values());
    estimate_from_parts(series.values(), &cumulative, n, p)
}

pub(crate) fn check_exponent(n: f64) -> Result<()> {
    if !n.is_finite() || n == 1.0 {
        return Err(GreyError::ParameterDomain(format!(
            "Bernoulli exponent n = {n} is not allowed"
        )));
    }
    Ok(())
}

/// Closed-form 2x2 normal equations. Rows of the design matrix are `[-z, z^n]`.
pub(crate) fn estimate_from_parts(
    values: &[f64],
    cumulative: &[f64],
    n: f64,
    p: f64,
) -> Result<(f64, f64)> {
    let z = background_values(cumulative, p);
    let (mut szz, mut szn1, mut sz2n, mut szy, mut szny) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (zk, &y) in z.iter().zip(&values[1..]) {
        let zn = if n == 0.0 { 1.0 } else { zk.powf(n) };
        szz += zk * zk;
        szn1 += zk * zn;
        sz2n += zn * zn;
        szy += zk * y;
        szny += zn * y;
    }
    let det = szz * sz2n - szn1 * szn1;
    let fail = |reason: String| GreyError::EstimationFailure { n, p, reason };
    if !det.is_finite() || det.abs() < SINGULAR_TOL * (szz * sz2n).abs() {
        return Err(fail(format!("singular normal matrix (det = {det:e})")));
    }
    let a = (sz2n * -szy + szn1 * szny) / det;
    let b = (szn1 * -szy + szz * szny) / det;
    if !a.is_finite() || !b.is_finite() {
        return Err(fail("non-finite coefficients".into()));
    }
    Ok((a, b))
}

/// Accumulated response `x̂1(k)` of an NGBM(1,1) model.
///
/// Uses the algebraically equivalent form
/// `init^(1-n)·E + b·(1 - E)/a` with `E = e^(-a(1-n)(k-anchor))`, evaluated
/// through `expm1` so that `a → 0` degrades to its linear limit instead of
/// dividing by zero.
pub fn ngbm_response(params: &GreyParams, k: i64) -> Result<f64> {
    check_exponent(params.n)?;
    if params.init <= 0.0 {
        return Err(GreyError::ResponseDomain {
            k: params.anchor as i64,
            bracket: params.init,
        });
    }
    let offset = k - params.anchor as i64;
    if offset == 0 {
        return Ok(params.init);
    }
    let s = 1.0 - params.n;
    let init_pow = (s * params.init.ln()).exp();
    let bracket = response_bracket(params.a, params.b, s, init_pow, offset as f64)
        .ok_or(GreyError::ResponseOverflow { k })?;
    power_response(bracket, s, k)
}

/// `x̂1(k)^(1-n)` given `init_pow = init^(1-n)` and offset `t = k - anchor`.
#[inline]
pub(crate) fn response_bracket(a: f64, b: f64, s: f64, init_pow: f64, t: f64) -> Option<f64> {
    let rate = -a * s * t;
    if rate.abs() > EXP_LIMIT {
        return None;
    }
    let decay = rate.exp();
    // (1 - E)/a, with its a → 0 limit s·t
    let growth = if a == 0.0 { s * t } else { -rate.exp_m1() / a };
    Some(init_pow * decay + b * growth)
}

#[inline]
pub(crate) fn power_response(bracket: f64, s: f64, k: i64) -> Result<f64> {
    if bracket.is_nan() || bracket <= 0.0 {
        return Err(GreyError::ResponseDomain { k, bracket });
    }
    let value = (bracket.ln() / s).exp();
    if !value.is_finite() {
        return Err(GreyError::ResponseOverflow { k });
    }
    Ok(value)
}

/// Fitted plus forecast values (`len + horizon` of them) by differencing the
/// accumulated response. For anchor-last responses the first point is pinned
/// to the first observation.
pub(crate) fn fitted_values(
    params: &GreyParams,
    first_observed: f64,
    len: usize,
    horizon: usize,
) -> Result<Vec<f64>> {
    let total = len + horizon;
    let mut fitted = Vec::with_capacity(total);
    let mut prev = 0.0;
    for k in 1..=total as i64 {
        let cur = ngbm_response(params, k)?;
        fitted.push(if k == 1 { cur } else { cur - prev });
        prev = cur;
    }
    if params.anchor != 1 {
        fitted[0] = first_observed;
    }
    Ok(fitted)
}

/// GM(1,1): `n = 0`, `P = 1/2`, anchored at the first observation.
pub fn fit_gm11(series: &TimeSeries, horizon: usize) -> Result<FitResult> {
    let mut fit = fit_ngbm(series, 0.0, 0.5, horizon, AnchorMode::First, None)?;
    fit.model = ModelKind::Gm11;
    Ok(fit)
}

/// NGBM(1,1) with fixed `(n, P)`.
///
/// `correction` is added to the anchor state: `x0(1)` for [`AnchorMode::First`],
/// `x1(m)` for [`AnchorMode::Last`].
pub fn fit_ngbm(
    series: &TimeSeries,
    n: f64,
    p: f64,
    horizon: usize,
    anchor_mode: AnchorMode,
    correction: Option<f64>,
) -> Result<FitResult> {
    let (a, b) = estimate_ab(series, n, p)?;
    let cumulative = accumulate(series.values());
    let (anchor, base) = match anchor_mode {
        AnchorMode::First => (1, series.values()[0]),
        AnchorMode::Last => (series.len(), cumulative[series.len() - 1]),
    };
    let params = GreyParams {
        a,
        b,
        n,
        p,
        init: base + correction.unwrap_or(0.0),
        anchor,
    };
    let fitted = fitted_values(&params, series.values()[0], series.len(), horizon)?;
    FitResult::new(ModelKind::Ngbm, params, series, fitted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::from_values(values.to_vec()).unwrap()
    }

    #[test]
    fn constant_series_has_no_growth() {
        let s = series(&[5.0; 4]);
        let (a, b) = estimate_ab(&s, 0.0, 0.5).unwrap();
        assert!(a.abs() < 1e-12, "a = {a}");
        assert!((b - 5.0).abs() < 1e-9, "b = {b}");
        let fit = fit_gm11(&s, 2).unwrap();
        for v in &fit.fitted {
            assert!((v - 5.0).abs() < 1e-9);
        }
        assert!(fit.metrics.arpe < 1e-6);
    }

    #[test]
    fn response_at_anchor_is_init() {
        let params = GreyParams {
            a: -0.11,
            b: 28.4,
            n: 0.13,
            p: 0.495,
            init: 1030.5,
            anchor: 10,
        };
        assert_eq!(ngbm_response(&params, 10).unwrap(), 1030.5);
    }

    #[test]
    fn response_degenerates_to_gm11_closed_form() {
        let params = GreyParams {
            a: -0.13,
            b: 51.6,
            n: 0.0,
            p: 0.5,
            init: 45.42785,
            anchor: 1,
        };
        for k in 1..20 {
            let expect = (45.42785 - params.b / params.a) * (-params.a * (k - 1) as f64).exp()
                + params.b / params.a;
            let got = ngbm_response(&params, k).unwrap();
            assert!((got - expect).abs() < 1e-9 * expect.abs());
        }
    }

    #[test]
    fn response_rejects_non_positive_bracket() {
        // decaying model whose bracket crosses zero
        let params = GreyParams {
            a: 0.5,
            b: -10.0,
            n: 0.5,
            p: 0.5,
            init: 4.0,
            anchor: 1,
        };
        assert!(matches!(
            ngbm_response(&params, 10),
            Err(GreyError::ResponseDomain { k: 10, .. })
        ));
    }

    #[test]
    fn response_overflow_is_reported() {
        let params = GreyParams {
            a: -80.0,
            b: 1.0,
            n: 0.0,
            p: 0.5,
            init: 1.0,
            anchor: 1,
        };
        assert!(matches!(
            ngbm_response(&params, 20),
            Err(GreyError::ResponseOverflow { .. })
        ));
    }

    #[test]
    fn exponent_one_is_rejected() {
        let s = series(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            estimate_ab(&s, 1.0, 0.5),
            Err(GreyError::ParameterDomain(_))
        ));
    }

    #[test]
    fn verhulst_exponent_is_accepted() {
        let s = series(&[1.0, 2.0, 3.5, 5.0, 6.0]);
        assert!(estimate_ab(&s, 2.0, 0.5).is_ok());
    }

    #[test]
    fn gm11_on_gdp_training_span() {
        let gdp = datasets::vietnam_gdp();
        let fit = fit_gm11(&gdp.head(10).unwrap(), 5).unwrap();
        assert_eq!(fit.fitted[0], 45.42785);
        assert!((fit.fitted[1] - 61.43522).abs() < 1e-3);
        assert!((fit.fitted[14] - 335.96448).abs() < 1e-3);
        assert_eq!(fit.labels[14], "2018");
    }

    #[test]
    fn covid_ngbm_fixed_exponent() {
        let covid = datasets::covid_global();
        let fit = fit_ngbm(&covid, 0.41, 0.5, 0, AnchorMode::First, None).unwrap();
        assert!((fit.fitted[2] - 9822.0).abs() < 1.0);
    }

    #[test]
    fn anchor_last_pins_first_point() {
        let gdp = datasets::vietnam_gdp().head(10).unwrap();
        let fit = fit_ngbm(&gdp, 0.13, 0.495, 0, AnchorMode::Last, None).unwrap();
        assert_eq!(fit.fitted[0], 45.42785);
        assert_eq!(fit.params.anchor, 10);
        let total: f64 = fit.fitted[1..].iter().sum::<f64>() + fit.params.response(1).unwrap();
        assert!((total - fit.params.init).abs() < 1e-9);
    }
}
