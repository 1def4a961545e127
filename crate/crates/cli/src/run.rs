//! Run configuration and model dispatch.

use clap::ValueEnum;
use greyfc_core::series::MIN_LEN;
use greyfc_core::{
    fit_gm11, fit_ngbm, fit_ongbm, fit_ongbm_fixed, rolling_forecast, AnchorMode, Feedback,
    GridSpec, OngbmConfig, RollingConfig,
};
use serde::Serialize;

use crate::failure::Failure;
use crate::input::Source;
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Gm11,
    Ngbm,
    Ongbm,
    Rongbm,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Whether ONGBM applies the initial-condition correction. `auto` follows the
/// dataset's published setting (on for file input).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Correction {
    #[default]
    Auto,
    On,
    Off,
}

impl Correction {
    pub fn resolve(self, source_default: bool) -> bool {
        match self {
            Correction::Auto => source_default,
            Correction::On => true,
            Correction::Off => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub n: Option<f64>,
    pub p: Option<f64>,
    pub grid: GridSpec,
    pub window: Option<usize>,
    pub horizon: Option<usize>,
    /// Training length for single fits; defaults to the dataset's.
    pub train: Option<usize>,
    pub feedback: Feedback,
    pub correction: Correction,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        self.grid.validate()?;
        match self.model {
            Model::Gm11 if self.n.is_some() || self.p.is_some() => Err(Failure::config(
                "gm11 has fixed n = 0 and P = 0.5; use --model ngbm to set them",
            )),
            Model::Ngbm if self.n.is_none() => Err(Failure::config("--model ngbm requires --n")),
            Model::Ongbm if self.n.is_some() != self.p.is_some() => Err(Failure::config(
                "--model ongbm takes both --n and --P, or neither to search the grid",
            )),
            Model::Rongbm if self.window.is_none() => {
                Err(Failure::config("--model rongbm requires --window"))
            }
            Model::Rongbm if self.n.is_some() || self.p.is_some() => Err(Failure::config(
                "--model rongbm selects n and P at every step; drop --n/--P",
            )),
            _ => Ok(()),
        }
    }
}

pub fn run(config: &RunConfig, source: &Source) -> Result<Report, Failure> {
    config.validate()?;
    let series = &source.series;
    let ongbm = OngbmConfig {
        grid: config.grid,
        correct_initial: config.correction.resolve(source.correct_initial),
    };

    if config.model == Model::Rongbm {
        let window = config.window.expect("validated");
        if window < MIN_LEN {
            return Err(Failure::config(format!(
                "window {window} is shorter than the minimum series length {MIN_LEN}"
            )));
        }
        if window > series.len() {
            return Err(Failure::config(format!(
                "window {window} exceeds series length {}",
                series.len()
            )));
        }
        let horizon = match config.horizon {
            Some(h) => h,
            None if series.len() > window => series.len() - window,
            None => {
                return Err(Failure::config(
                    "--horizon is required when the window spans the whole series",
                ))
            }
        };
        let rolling = RollingConfig {
            window,
            horizon,
            ongbm,
            feedback: config.feedback,
        };
        let outcome = rolling_forecast(series, &rolling)?;
        return Report::from_rolling(config, source, &outcome);
    }

    let train = config.train.unwrap_or(source.train_len);
    if train > series.len() {
        return Err(Failure::config(format!(
            "training length {train} exceeds series length {}",
            series.len()
        )));
    }
    let horizon = config.horizon.unwrap_or(series.len() - train);
    let training = series.head(train)?;
    let fit = match config.model {
        Model::Gm11 => fit_gm11(&training, horizon)?,
        Model::Ngbm => fit_ngbm(
            &training,
            config.n.expect("validated"),
            config.p.unwrap_or(0.5),
            horizon,
            AnchorMode::First,
            None,
        )?,
        Model::Ongbm => match (config.n, config.p) {
            (Some(n), Some(p)) => fit_ongbm_fixed(&training, n, p, horizon, ongbm.correct_initial)?,
            _ => fit_ongbm(&training, &ongbm, horizon)?,
        },
        Model::Rongbm => unreachable!(),
    };
    Report::from_fit(config, source, &fit)
}
