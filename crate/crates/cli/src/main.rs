use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greyfc_core::{Feedback, GridSpec, MetricsReport};

mod bench;
mod failure;
mod input;
mod report;
mod run;

use failure::{Failure, EXIT_CONFIG};
use report::Metrics;
use run::{Correction, Format, Model, RunConfig};

const THREADS_VAR: &str = "GREYFC_THREADS";

#[derive(Parser)]
#[command(
    name = "greyfc",
    version,
    about = "Grey-model forecasting for short positive series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit GM(1,1), NGBM(1,1) or ONGBM(1,1) on the training span and forecast
    Fit(RunArgs),
    /// Rolling ONGBM: re-optimize on a sliding window, one step at a time
    Roll(RunArgs),
    /// Reproduce the published tables and report per-cell deltas
    Bench {
        /// Expectations file to compare against instead of the embedded one
        #[arg(long)]
        expectations: Option<PathBuf>,
    },
    /// Error measures and precision classes for a label,actual,fitted file
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Embedded dataset (vietnam-gdp, covid-global)
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    dataset: Option<String>,
    /// CSV file of label,value rows
    #[arg(long)]
    input: Option<PathBuf>,
    /// Bernoulli exponent
    #[arg(long, allow_hyphen_values = true)]
    n: Option<f64>,
    /// Background weight
    #[arg(long = "P")]
    p: Option<f64>,
    /// Lattice step of the (P, n) search
    #[arg(long, default_value_t = greyfc_core::optimize::DEFAULT_STEP)]
    step: f64,
    /// Rolling window length
    #[arg(long)]
    window: Option<usize>,
    /// Forecast steps; defaults to the observations past the training span
    #[arg(long)]
    horizon: Option<usize>,
    /// Training length for single fits; defaults to the dataset's
    #[arg(long)]
    train: Option<usize>,
    #[arg(long, value_enum, default_value_t = FeedbackArg::Predicted)]
    feedback: FeedbackArg,
    /// Initial-condition correction for ONGBM
    #[arg(long, value_enum, default_value_t = Correction::Auto)]
    correction: Correction,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Leave out the generation timestamp
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeedbackArg {
    Predicted,
    Actual,
}

impl RunArgs {
    fn config(&self, default_model: Model) -> RunConfig {
        RunConfig {
            model: self.model.unwrap_or(default_model),
            n: self.n,
            p: self.p,
            grid: GridSpec::with_step(self.step),
            window: self.window,
            horizon: self.horizon,
            train: self.train,
            feedback: match self.feedback {
                FeedbackArg::Predicted => Feedback::Predicted,
                FeedbackArg::Actual => Feedback::Actual,
            },
            correction: self.correction,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("greyfc: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("{THREADS_VAR}='{raw}' is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot size thread pool: {e}")))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Fit(args) => run_model(&args, Model::Ongbm, false),
        Command::Roll(args) => run_model(&args, Model::Rongbm, true),
        Command::Bench { expectations } => {
            let text = match &expectations {
                Some(path) => fs::read_to_string(path)
                    .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?,
                None => bench::EMBEDDED.to_string(),
            };
            let parsed = bench::parse(&text)?;
            let stdout = io::stdout();
            bench::bench(&parsed, &mut stdout.lock())
                .map_err(|e| Failure::config(format!("cannot write bench output: {e}")))?;
            Ok(())
        }
        Command::Metrics { input, output } => {
            let (actual, fitted) = input::load_pairs(&input)?;
            let report = MetricsReport::compute(&actual, &fitted)?;
            let json = serde_json::json!({
                "rpe": report.rpe.iter().map(|e| report::round_dp(*e, report::PERCENT_DP)).collect::<Vec<_>>(),
                "metrics": Metrics::from(&report),
            });
            emit(output.as_deref(), |w| {
                serde_json::to_writer_pretty(&mut *w, &json).map_err(io::Error::from)?;
                writeln!(w)
            })
        }
    }
}

fn run_model(args: &RunArgs, default_model: Model, rolling: bool) -> Result<(), Failure> {
    let config = args.config(default_model);
    if rolling != (config.model == Model::Rongbm) {
        return Err(Failure {
            code: EXIT_CONFIG,
            message: if rolling {
                "roll runs --model rongbm only".into()
            } else {
                "use the roll subcommand for --model rongbm".into()
            },
        });
    }
    let source = match (&args.dataset, &args.input) {
        (Some(name), _) => input::dataset(name)?,
        (None, Some(path)) => input::file(path)?,
        (None, None) => return Err(Failure::config("one of --dataset or --input is required")),
    };
    let mut report = run::run(&config, &source)?;
    if !args.no_timestamp {
        report.generated_at = Some(chrono::Utc::now().to_rfc3339());
    }
    let mut buf = Vec::new();
    match args.format {
        Format::Json => report.write_json(&mut buf)?,
        Format::Csv => report.write_csv(&mut buf)?,
    }
    emit(args.output.as_deref(), |w| w.write_all(&buf))
}

fn emit(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), Failure> {
    let result = match path {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            write(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    };
    result.map_err(|e| {
        let target = path.map_or("stdout".to_string(), |p| p.display().to_string());
        Failure::config(format!("cannot write {target}: {e}"))
    })
}
