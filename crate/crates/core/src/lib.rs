//! Grey-system forecasting for short, positive time series.
//!
//! Models, from simplest to most elaborate:
//!
//! - GM(1,1) ([`fit_gm11`]), the classic first-order grey model;
//! - NGBM(1,1) ([`fit_ngbm`]), its nonlinear Bernoulli generalization with
//!   exponent `n` and background weight `P`;
//! - ONGBM(1,1) ([`fit_ongbm`]), which selects `(P, n)` on a lattice and
//!   corrects the initial condition;
//! - RONGBM(1,1) ([`rolling_forecast`]), ONGBM re-optimized on a sliding window.
//!
//! ```
//! use greyfc_core::{datasets, fit_gm11};
//!
//! let gdp = datasets::vietnam_gdp();
//! let fit = fit_gm11(&gdp.head(10).unwrap(), 5).unwrap();
//! assert_eq!(fit.fitted.len(), 15);
//! ```

pub mod datasets;
pub mod error;
pub mod metrics;
pub mod models;
pub mod optimize;
pub mod rolling;
pub mod series;

pub use error::{ErrorKind, GreyError, Result};
pub use metrics::{ArpeClass, MetricsReport, PosteriorRank};
pub use models::{
    estimate_ab, fit_gm11, fit_ngbm, ngbm_response, AnchorMode, FitResult, GreyParams, ModelKind,
};
pub use optimize::{
    correct_initial, fit_ongbm, fit_ongbm_fixed, formula_background, formula_exponent, grid_search,
    Candidate, CorrectionTerms, GridSpec, OngbmConfig,
};
pub use rolling::{
    rolling_forecast, Feedback, RollingConfig, RollingOutcome, RollingStep, RollingTrace,
};
pub use series::{ago, background, inverse_ago, AgoSeries, BackgroundSeries, TimeSeries};
