//! ONGBM(1,1): simultaneous selection of the Bernoulli exponent `n` and the
//! background weight `P`, followed by an initial-condition correction.
//!
//! Selection is an exhaustive search over a `(P, n)` lattice minimizing the
//! training ARPE. The winning `(a, b, n)` then re-anchors the time response at
//! the last accumulated point, optionally shifted by the least-squares
//! correction `c` that best matches `x1(k)^(1-n)` over the training span.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GreyError, Result};
use crate::models::{
    check_exponent, estimate_from_parts, fitted_values, power_response, response_bracket,
    AnchorMode, FitResult, GreyParams, ModelKind,
};
use crate::series::{accumulate, background_values, check_weight, TimeSeries};

pub const DEFAULT_STEP: f64 = 0.005;
pub const MIN_STEP: f64 = 0.0005;
pub const MAX_STEP: f64 = 0.05;

const LATTICE_DECIMALS: f64 = 1e10;
const EPS: f64 = 1e-9;

/// Search lattice for `(P, n)`.
///
/// `P` runs over `[p_min, p_max]` inclusive; `n` over `[n_min, n_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub step: f64,
    /// Response whose training ARPE ranks the candidates.
    pub selection: AnchorMode,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            p_min: 0.0,
            p_max: 1.0,
            n_min: -1.0,
            n_max: 1.0,
            step: DEFAULT_STEP,
            selection: AnchorMode::Last,
        }
    }
}

impl GridSpec {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GreyError::ParameterDomain(msg));
        if !(MIN_STEP..=MAX_STEP).contains(&self.step) {
            return bad(format!(
                "grid step {} outside [{MIN_STEP}, {MAX_STEP}]",
                self.step
            ));
        }
        if !(0.0 <= self.p_min && self.p_min <= self.p_max && self.p_max <= 1.0) {
            return bad(format!(
                "P range [{}, {}] not within [0, 1]",
                self.p_min, self.p_max
            ));
        }
        if !(-1.0 <= self.n_min && self.n_min < self.n_max && self.n_max <= 1.0) {
            return bad(format!(
                "n range [{}, {}) not within [-1, 1)",
                self.n_min, self.n_max
            ));
        }
        Ok(())
    }

    pub fn p_values(&self) -> Vec<f64> {
        let count = ((self.p_max - self.p_min) / self.step + EPS).floor() as usize + 1;
        (0..count)
            .map(|i| round_lattice(self.p_min + i as f64 * self.step))
            .collect()
    }

    pub fn n_values(&self) -> Vec<f64> {
        let count = ((self.n_max - self.n_min) / self.step - EPS)
            .ceil()
            .max(0.0) as usize;
        (0..count)
            .map(|j| round_lattice(self.n_min + j as f64 * self.step))
            .filter(|&n| n < self.n_max && n != 1.0)
            .collect()
    }

    /// All `(P, n)` pairs, `P`-major.
    pub fn lattice(&self) -> Vec<(f64, f64)> {
        let ns = self.n_values();
        self.p_values()
            .into_iter()
            .flat_map(|p| ns.iter().map(move |&n| (p, n)))
            .collect()
    }
}

fn round_lattice(x: f64) -> f64 {
    let r = (x * LATTICE_DECIMALS).round() / LATTICE_DECIMALS;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// One evaluated lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(rename = "P")]
    pub p: f64,
    pub n: f64,
    pub a: f64,
    pub b: f64,
    /// Training ARPE of the selection response, percent.
    pub arpe: f64,
}

impl Candidate {
    /// Total order used for selection: lower ARPE, then lower `P`, then lower `n`.
    pub fn precedes(&self, other: &Candidate) -> bool {
        self.arpe
            .total_cmp(&other.arpe)
            .then(self.p.total_cmp(&other.p))
            .then(self.n.total_cmp(&other.n))
            .is_lt()
    }
}

/// The preferred of two optional candidates. Associative and commutative, so
/// any reduction order yields the same winner.
pub fn prefer(x: Option<Candidate>, y: Option<Candidate>) -> Option<Candidate> {
    match (x, y) {
        (Some(x), Some(y)) => Some(if y.precedes(&x) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Precomputed training data shared by every candidate.
#[derive(Debug, Clone)]
pub struct Training<'a> {
    values: &'a [f64],
    cumulative: Vec<f64>,
}

impl<'a> Training<'a> {
    pub fn new(series: &'a TimeSeries) -> Self {
        Self {
            values: series.values(),
            cumulative: accumulate(series.values()),
        }
    }

    /// Estimate `(a, b)` at `(P, n)` and score the selection response.
    /// Returns `None` for infeasible candidates.
    pub fn evaluate(&self, p: f64, n: f64, selection: AnchorMode) -> Option<Candidate> {
        let (a, b) = estimate_from_parts(self.values, &self.cumulative, n, p).ok()?;
        let m = self.values.len();
        let s = 1.0 - n;
        let (anchor, init) = match selection {
            AnchorMode::First => (1usize, self.values[0]),
            AnchorMode::Last => (m, self.cumulative[m - 1]),
        };
        let init_pow = (s * init.ln()).exp();
        let mut prev = 0.0;
        let mut total = 0.0;
        for k in 1..=m {
            let cur = if k == anchor {
                init
            } else {
                let t = k as f64 - anchor as f64;
                let bracket = response_bracket(a, b, s, init_pow, t)?;
                power_response(bracket, s, k as i64).ok()?
            };
            if k > 1 {
                let actual = self.values[k - 1];
                total += ((cur - prev) - actual).abs() / actual;
            }
            prev = cur;
        }
        let arpe = total / m as f64 * 100.0;
        arpe.is_finite().then_some(Candidate { p, n, a, b, arpe })
    }
}

/// Exhaustive lattice search; candidates are scored in parallel.
pub fn grid_search(series: &TimeSeries, grid: &GridSpec) -> Result<Candidate> {
    grid.validate()?;
    let training = Training::new(series);
    grid.lattice()
        .into_par_iter()
        .map(|(p, n)| training.evaluate(p, n, grid.selection))
        .reduce(|| None, prefer)
        .ok_or(GreyError::OptimizationFailure)
}

/// Exponent from the information-overlap formula, averaging `γ(k)` over `k = 2..m-1`.
pub fn formula_exponent(series: &TimeSeries, p: f64) -> Result<f64> {
    check_weight(p)?;
    let x = series.values();
    let m = x.len();
    // z[j] holds the background value at 1-based index j + 2
    let z = background_values(&accumulate(x), p);
    let mut sum = 0.0;
    for k in 2..m {
        let (x_prev, x_k, x_next) = (x[k - 2], x[k - 1], x[k]);
        let (z_k, z_next) = (z[k - 2], z[k - 1]);
        let num = (x_next - x_k) * z_next * z_k * x_k - (x_k - x_prev) * z_next * z_k * x_next;
        let den = x_next * x_next * z_k * x_k - x_k * x_k * z_next * x_next;
        if den == 0.0 {
            return Err(GreyError::FormulaInapplicable(format!(
                "zero denominator in the exponent term at k = {k}"
            )));
        }
        sum += num / den;
    }
    let n = sum / (m - 2) as f64;
    if !n.is_finite() {
        return Err(GreyError::FormulaInapplicable(
            "exponent is not finite".into(),
        ));
    }
    Ok(n)
}

/// Background weight from the empirical `q` formula; always above one half.
pub fn formula_background(series: &TimeSeries) -> f64 {
    let acc = accumulate(series.values());
    let m = acc.len() as f64;
    let ratio_sum: f64 = acc.windows(2).map(|w| w[1] / w[0]).sum();
    let q = ratio_sum.powf(1.0 / (m - 1.0)) + (m - 1.0);
    0.5 + 1.0 / (2.0 * q)
}

/// The pieces of the initial-condition correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTerms {
    /// `E(k) = e^(-a(1-n)(k-m))`, `k = 1..m`.
    pub e: Vec<f64>,
    /// `A(k) = x1(k)^(1-n) - (b/a)(1 - E(k))`.
    pub a_terms: Vec<f64>,
    /// `(x1(m) + c)^(1-n) = ΣA·E / ΣE²`.
    pub corrected_init_pow: f64,
    pub n: f64,
}

impl CorrectionTerms {
    /// The corrected anchor state `x1(m) + c`.
    pub fn corrected_init(&self) -> f64 {
        (self.corrected_init_pow.ln() / (1.0 - self.n)).exp()
    }

    /// The additive correction `c` relative to `last_cumulative = x1(m)`.
    pub fn offset(&self, last_cumulative: f64) -> f64 {
        self.corrected_init() - last_cumulative
    }
}

/// Closed-form least-squares correction of the anchor-last initial condition.
pub fn correct_initial(series: &TimeSeries, a: f64, b: f64, n: f64) -> Result<CorrectionTerms> {
    check_exponent(n)?;
    if a == 0.0 || !a.is_finite() {
        return Err(GreyError::ParameterDomain(format!(
            "development coefficient a = {a} leaves b/a undefined"
        )));
    }
    let acc = accumulate(series.values());
    let m = acc.len();
    let s = 1.0 - n;
    let mut e = Vec::with_capacity(m);
    let mut a_terms = Vec::with_capacity(m);
    for (i, &x1) in acc.iter().enumerate() {
        let t = (i + 1) as f64 - m as f64;
        let ek = (-a * s * t).exp();
        a_terms.push((s * x1.ln()).exp() - b / a * (1.0 - ek));
        e.push(ek);
    }
    let num: f64 = a_terms.iter().zip(&e).map(|(ak, ek)| ak * ek).sum();
    let den: f64 = e.iter().map(|ek| ek * ek).sum();
    let corrected_init_pow = num / den;
    if !corrected_init_pow.is_finite() || corrected_init_pow <= 0.0 {
        return Err(GreyError::CorrectionInfeasible(corrected_init_pow));
    }
    Ok(CorrectionTerms {
        e,
        a_terms,
        corrected_init_pow,
        n,
    })
}

/// `f = Σ (x̂1(k)^(1-n) - x1(k)^(1-n))²` over the training span for an
/// anchor-last response whose anchor state satisfies `init^(1-n) = init_pow`.
pub fn correction_objective(series: &TimeSeries, a: f64, b: f64, n: f64, init_pow: f64) -> f64 {
    let acc = accumulate(series.values());
    let m = acc.len() as f64;
    let s = 1.0 - n;
    acc.iter()
        .enumerate()
        .map(|(i, &x1)| {
            let fitted =
                response_bracket(a, b, s, init_pow, (i + 1) as f64 - m).unwrap_or(f64::INFINITY);
            (fitted - (s * x1.ln()).exp()).powi(2)
        })
        .sum()
}

/// ONGBM configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OngbmConfig {
    pub grid: GridSpec,
    /// Apply the least-squares correction to the anchor state. When off, the
    /// response is anchored at `x1(m)` unchanged.
    pub correct_initial: bool,
}

impl Default for OngbmConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            correct_initial: true,
        }
    }
}

/// Optimized NGBM: lattice selection of `(n, P)`, then an anchor-last response
/// with the corrected initial condition.
pub fn fit_ongbm(series: &TimeSeries, config: &OngbmConfig, horizon: usize) -> Result<FitResult> {
    let choice = grid_search(series, &config.grid)?;
    let mut fit = anchored_fit(
        series,
        choice.n,
        choice.p,
        choice.a,
        choice.b,
        horizon,
        config.correct_initial,
    )?;
    fit.selection_arpe = Some(choice.arpe);
    Ok(fit)
}

/// ONGBM response for a given `(n, P)`, e.g. from the closed-form formulas.
pub fn fit_ongbm_fixed(
    series: &TimeSeries,
    n: f64,
    p: f64,
    horizon: usize,
    correct_initial: bool,
) -> Result<FitResult> {
    check_weight(p)?;
    check_exponent(n)?;
    let training = Training::new(series);
    let (a, b) = estimate_from_parts(training.values, &training.cumulative, n, p)?;
    anchored_fit(series, n, p, a, b, horizon, correct_initial)
}

fn anchored_fit(
    series: &TimeSeries,
    n: f64,
    p: f64,
    a: f64,
    b: f64,
    horizon: usize,
    correct: bool,
) -> Result<FitResult> {
    let m = series.len();
    let last_cumulative = series.values().iter().sum::<f64>();
    let (init, fallback) = if correct {
        match correct_initial(series, a, b, n) {
            Ok(terms) => (terms.corrected_init(), false),
            Err(GreyError::CorrectionInfeasible(_)) | Err(GreyError::ParameterDomain(_)) => {
                (last_cumulative, true)
            }
            Err(e) => return Err(e),
        }
    } else {
        (last_cumulative, false)
    };
    let params = GreyParams {
        a,
        b,
        n,
        p,
        init,
        anchor: m,
    };
    let fitted = fitted_values(&params, series.values()[0], m, horizon)?;
    let mut fit = FitResult::new(ModelKind::Ongbm, params, series, fitted)?;
    fit.correction_fallback = fallback;
    Ok(fit)
}
