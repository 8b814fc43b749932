//! Command-line front end: `simulate`, `estimate`, `variance` and `mc`.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::asymptotics_report;
use crate::dwt::{max_scale, Sample};
use crate::error::{LrdError, Result};
use crate::estimators::{regression_weights, whittle_rate_indicator, EstimatorKind};
use crate::mc::{run_mc, McConfig, Pipeline, ScaleSpec};
use crate::simulate::{simulate_md, SimulationPlan, DEFAULT_TRUNCATION};
use crate::spectral::{FarimaSpec, InnovationLaw};
use crate::wavelet_family::make_family;

#[derive(Debug, Parser)]
#[command(
    name = "wavelet-lrd",
    version,
    about = "Wavelet estimation of the memory parameter d"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Logreg,
    Whittle,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Logreg => EstimatorKind::Logreg,
            EstimatorArg::Whittle => EstimatorKind::Whittle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LawArg {
    Gaussian,
    Uniform,
    CenteredExponential,
    Rademacher,
}

impl From<LawArg> for InnovationLaw {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::Gaussian => InnovationLaw::Gaussian,
            LawArg::Uniform => InnovationLaw::Uniform,
            LawArg::CenteredExponential => InnovationLaw::CenteredExponential,
            LawArg::Rademacher => InnovationLaw::Rademacher,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a FARIMA(0, d, 0) path and write it as a one-column CSV.
    Simulate {
        /// Memory parameter d.
        #[arg(long, allow_hyphen_values = true)]
        d: f64,
        /// Sample length n.
        #[arg(long)]
        n: usize,
        /// Innovation law.
        #[arg(long, value_enum, default_value = "gaussian")]
        innovation: LawArg,
        /// Number of MA(∞) coefficients kept.
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        ma_truncation: usize,
        /// Discarded presample length (defaults to the truncation).
        #[arg(long)]
        burn_in: Option<usize>,
        /// Random seed.
        #[arg(long)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
        /// Plan sidecar path (defaults to <output>.plan.json).
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Estimate d from a sample CSV and print a JSON record.
    Estimate {
        /// Sample CSV: one value per line, optional `x` header.
        #[arg(long)]
        input: PathBuf,
        /// Wavelet order N (vanishing moments).
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, value_enum, default_value = "logreg")]
        estimator: EstimatorArg,
        /// Lower scale L (defaults to ⌈log₂n/(1+2β)⌉ + 1).
        #[arg(long = "L")]
        lower: Option<usize>,
        /// Number of scales above L used by the estimator.
        #[arg(long)]
        ell: Option<usize>,
        /// Upper scale U (alternative to --ell).
        #[arg(long = "U")]
        upper: Option<usize>,
        /// `ols` or a file of regression weights.
        #[arg(long, default_value = "ols")]
        weights: String,
        /// Smoothness exponent used by the default L.
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the limit variances and covariances as JSON.
    Variance {
        #[arg(long, allow_hyphen_values = true)]
        d: f64,
        /// Wavelet order N.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Number of scales above L.
        #[arg(long)]
        ell: usize,
        #[arg(long, value_enum, default_value = "logreg")]
        estimator: EstimatorArg,
        /// `ols` or a file of regression weights.
        #[arg(long, default_value = "ols")]
        weights: String,
        /// Short-memory density at zero, f*(0).
        #[arg(long, default_value_t = 1.0 / (2.0 * std::f64::consts::PI))]
        fstar0: f64,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a JSON config.
    Mc {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| LrdError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Parses weights separated by commas, whitespace or newlines.
fn read_weights(path: &Path) -> Result<Vec<f64>> {
    read_text(path)?
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|_| {
                LrdError::Parse(format!("'{t}' in {} is not a number", path.display()))
            })
        })
        .collect()
}

fn custom_weights(arg: &str) -> Result<Option<Vec<f64>>> {
    if arg == "ols" {
        Ok(None)
    } else {
        read_weights(Path::new(arg)).map(Some)
    }
}

fn emit_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateRecord {
    d_hat: f64,
    estimator: EstimatorKind,
    #[serde(rename = "L")]
    lower: usize,
    #[serde(rename = "U")]
    upper: usize,
    ell: usize,
    n: usize,
    #[serde(rename = "J")]
    max_scale: usize,
    /// √(variance/(n2^{-L})) at d = d_hat; null when d_hat is inadmissible.
    asymptotic_sd: Option<f64>,
    whittle_rate_indicator: f64,
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    d: f64,
    n: usize,
    law: InnovationLaw,
    ma_truncation: usize,
    burn_in: Option<usize>,
    seed: u64,
    output: &Path,
    plan_out: Option<PathBuf>,
) -> Result<()> {
    let farima = FarimaSpec {
        d,
        innovation_law: law,
        ma_truncation,
        seed,
    };
    let mut plan = SimulationPlan::new(farima, n);
    if let Some(b) = burn_in {
        plan.burn_in = b;
    }
    let sample = simulate_md(&plan)?;
    let mut out = BufWriter::new(fs::File::create(output)?);
    sample.write_csv(&mut out)?;
    out.flush()?;
    let sidecar = plan_out.unwrap_or_else(|| {
        let mut s = output.as_os_str().to_owned();
        s.push(".plan.json");
        PathBuf::from(s)
    });
    emit_json(&plan, Some(&sidecar))
}

#[allow(clippy::too_many_arguments)]
fn estimate_cmd(
    input: &Path,
    order: usize,
    kind: EstimatorKind,
    lower: Option<usize>,
    ell: Option<usize>,
    upper: Option<usize>,
    weights: &str,
    beta: f64,
    output: Option<&Path>,
) -> Result<()> {
    let sample = Sample::parse(&read_text(input)?)?;
    let n = sample.len();
    let scales = ScaleSpec {
        lower,
        beta,
        ell,
        upper,
        weights: custom_weights(weights)?,
    };
    let pipeline = Pipeline::new(order, n, kind, &scales)?;
    let d_hat = pipeline.estimate(&sample)?;
    let asymptotic_sd = pipeline
        .estimator
        .asymptotic_variance(&pipeline.spec, d_hat)
        .ok()
        .map(|v| (v / pipeline.effective_size()).sqrt());
    let (l, u) = (pipeline.estimator.lower(), pipeline.estimator.upper());
    let record = EstimateRecord {
        d_hat,
        estimator: kind,
        lower: l,
        upper: u,
        ell: u - l,
        n,
        max_scale: max_scale(n, pipeline.spec.support_len)?,
        asymptotic_sd,
        whittle_rate_indicator: whittle_rate_indicator(n, l),
    };
    emit_json(&record, output)
}

fn variance_cmd(
    d: f64,
    order: usize,
    ell: usize,
    kind: EstimatorKind,
    weights: &str,
    fstar0: f64,
    output: Option<&Path>,
) -> Result<()> {
    let spec = make_family(order)?;
    let w = match (kind, custom_weights(weights)?) {
        (EstimatorKind::Whittle, Some(_)) => {
            return Err(LrdError::InvalidArgument(
                "custom weights apply to the log-regression estimator only".into(),
            ))
        }
        (EstimatorKind::Whittle, None) => None,
        (EstimatorKind::Logreg, Some(w)) => Some(w),
        (EstimatorKind::Logreg, None) => Some(regression_weights(ell, None)?),
    };
    let report = asymptotics_report(&spec, d, fstar0, ell, w.as_deref())?;
    emit_json(&report, output)
}

fn mc_cmd(config: &Path) -> Result<()> {
    let cfg = McConfig::from_json(&read_text(config)?)?;
    let summary = run_mc(&cfg)?;
    emit_json(&summary, None)
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate {
            d,
            n,
            innovation,
            ma_truncation,
            burn_in,
            seed,
            output,
            plan_out,
        } => simulate_cmd(
            d,
            n,
            innovation.into(),
            ma_truncation,
            burn_in,
            seed,
            &output,
            plan_out,
        ),
        Command::Estimate {
            input,
            order,
            estimator,
            lower,
            ell,
            upper,
            weights,
            beta,
            output,
        } => estimate_cmd(
            &input,
            order,
            estimator.into(),
            lower,
            ell,
            upper,
            &weights,
            beta,
            output.as_deref(),
        ),
        Command::Variance {
            d,
            order,
            ell,
            estimator,
            weights,
            fstar0,
            output,
        } => variance_cmd(
            d,
            order,
            ell,
            estimator.into(),
            &weights,
            fstar0,
            output.as_deref(),
        ),
        Command::Mc { config } => mc_cmd(&config),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status: 0 on success, 1 on usage errors, 2 on numerical failures.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}
