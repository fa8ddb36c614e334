//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.
//! Diagnostics go to stderr; data goes to the output file or stdout.
//! Identical arguments and input files produce byte-identical outputs.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::detector::{detect_multiple_from, DetectOptions};
use crate::entropy::entropy_curve_from;
use crate::error::Result;
use crate::fuzzy::ApproximationProfile;
use crate::regularity::{regularity_curve, Measure, TwoSampleMeasure};
use crate::series::{load_csv, DetectorParams};
use crate::sim::{
    fuzziness_sweep, monte_carlo_rmse, sensitivity_grid, snr_sweep, ComparisonResult,
    MethodConfig, ScenarioKind, SimulationScenario,
};

#[derive(Debug, Parser)]
#[command(
    name = "rfcpd",
    about = "Rough-fuzzy changepoint detection for gradual changes in time series",
    version
)]
struct Cli {
    /// Cap the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect and screen changepoints in a CSV time series.
    Detect(DetectArgs),
    /// Run seeded Monte Carlo benchmarks on synthetic scenarios.
    Simulate(SimulateArgs),
    /// Dump the four approximation curves for a candidate changepoint.
    ApproxDump(ApproxDumpArgs),
    /// Dump the ambiguity entropy curve of a CSV time series.
    EntropyDump(EntropyDumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasureName {
    Ks,
    T,
    Hotelling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Two-sample statistic behind the regularity measure.
    #[arg(long, value_enum, default_value = "ks")]
    measure: MeasureName,

    /// Use the Welch (unequal variance) t statistic instead of the pooled one.
    #[arg(long)]
    welch: bool,

    /// Ridge added to the Hotelling covariance (default: 1e-8 tr(Sigma)/p).
    #[arg(long)]
    ridge: Option<f64>,
}

impl MeasureArgs {
    fn build(&self) -> Measure {
        match self.measure {
            MeasureName::Ks => Measure::Ks,
            MeasureName::T => Measure::TTest { welch: self.welch },
            MeasureName::Hotelling => Measure::Hotelling { ridge: self.ridge },
        }
    }
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Regularity half-window delta in samples.
    #[arg(long, default_value_t = 50)]
    delta: usize,

    /// Fuzziness half-width Delta in samples.
    #[arg(long)]
    big_delta: f64,

    /// Roughness half-width w in samples.
    #[arg(long)]
    w: f64,

    /// Entropy base beta (> 1).
    #[arg(long, default_value_t = std::f64::consts::E)]
    beta: f64,

    /// Screening test level alpha in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

impl ParamArgs {
    fn build(&self) -> DetectorParams {
        DetectorParams {
            delta_reg: self.delta,
            big_delta: self.big_delta,
            w: self.w,
            beta: self.beta,
            alpha: self.alpha,
        }
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// CSV input: one observation per row, comma-separated columns.
    #[arg(long)]
    input: PathBuf,

    /// Treat the first row as a header.
    #[arg(long)]
    has_header: bool,

    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,

    #[command(flatten)]
    params: ParamArgs,

    #[command(flatten)]
    measure: MeasureArgs,

    /// Minimum separation between candidates (default: 4w + 2*Delta).
    #[arg(long)]
    min_separation: Option<f64>,

    /// Drop candidates within this margin of either end
    /// (default: max(delta, ceil(Delta + 2w))).
    #[arg(long)]
    edge_margin: Option<usize>,

    /// Override the normalizing rate a_delta (default: sqrt(delta)).
    #[arg(long)]
    a_delta: Option<f64>,

    /// Override the null mean of the regularity curve (default: median).
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario: s1 (discrete), s2 (continuous ramp), s3 (smooth ramp).
    #[arg(long)]
    scenario: String,

    /// Series length T.
    #[arg(long, default_value_t = 1000)]
    t_len: usize,

    /// True changepoint.
    #[arg(long, default_value_t = 666)]
    cp: usize,

    /// Jump size(s); a comma-separated list runs a signal-size sweep.
    #[arg(long, default_value = "2", value_delimiter = ',')]
    jump: Vec<f64>,

    /// Ramp half-width(s) F; a comma-separated list runs a fuzziness sweep.
    #[arg(long, default_value = "150", value_delimiter = ',')]
    fuzziness: Vec<f64>,

    #[arg(long, default_value_t = 200)]
    replicates: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Values used for both axes of a (w, Delta) sensitivity grid;
    /// overrides --w/--big-delta.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    grid: Option<Vec<f64>>,

    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    #[command(flatten)]
    params: ParamArgs,

    #[command(flatten)]
    measure: MeasureArgs,
}

#[derive(Debug, Args)]
struct ApproxDumpArgs {
    /// Candidate changepoint s (may be fractional).
    #[arg(long)]
    s: f64,

    /// Number of time points T to sample.
    #[arg(long)]
    t_len: usize,

    #[arg(long)]
    big_delta: f64,

    #[arg(long)]
    w: f64,

    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntropyDumpArgs {
    #[arg(long)]
    input: PathBuf,

    #[arg(long)]
    has_header: bool,

    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    #[command(flatten)]
    params: ParamArgs,

    #[command(flatten)]
    measure: MeasureArgs,
}

/// Parses `argv` and runs the corresponding pipeline, returning the process
/// exit code.
pub fn run<I, A>(argv: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own message; --help/--version land here too.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };

    if let Some(threads) = cli.threads {
        // Ignore the error if a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Detect(args) => run_detect(args),
        Command::Simulate(args) => run_simulate(args),
        Command::ApproxDump(args) => run_approx_dump(args),
        Command::EntropyDump(args) => run_entropy_dump(args),
    }
}

fn write_output(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| crate::error::Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| crate::error::Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn run_detect(args: DetectArgs) -> Result<()> {
    let series = load_csv(&args.input, args.has_header)?;
    let params = args.params.build().validate(series.len())?;
    let measure = args.measure.build();
    let options = DetectOptions {
        min_separation: args.min_separation,
        edge_margin: args.edge_margin,
        a_delta: args.a_delta,
        mu: args.mu,
    };
    let regularity = regularity_curve(&series, params.delta_reg, &measure)?;
    let spread = {
        let vals = regularity.values();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max - min
    };
    if spread == 0.0 {
        eprintln!(
            "warning: constant regularity curve; the screening test degenerates and accepts nothing"
        );
    }
    let report = detect_multiple_from(&regularity, &params, &options)?;
    let text = match args.format {
        OutputFormat::Json => report.to_json_string()?,
        OutputFormat::Csv => report.to_csv_string(),
    };
    write_output(args.output.as_ref(), &text)
}

fn comparison_csv_header() -> &'static str {
    "scenario,measure,delta,w,big_delta,jump,fuzziness,snr,replicates,rmse_proposed,rmse_base,mse_reduction_pct\n"
}

fn comparison_csv_row(c: &ComparisonResult, config: &MethodConfig) -> String {
    let scn = &c.proposed.scenario;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
        scn.kind.name(),
        config.measure.name(),
        config.params.delta_reg,
        config.params.w,
        config.params.big_delta,
        scn.jump,
        scn.fuzziness,
        c.snr,
        c.proposed.replicates,
        c.proposed.rmse,
        c.base.rmse,
        100.0 * c.mse_reduction()
    )
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let kind = ScenarioKind::parse(&args.scenario)?;
    let template = SimulationScenario {
        kind,
        t_len: args.t_len,
        cp: args.cp,
        jump: args.jump[0],
        fuzziness: args.fuzziness[0],
        seed: args.seed,
    };
    let config = MethodConfig {
        params: args.params.build(),
        measure: args.measure.build(),
    };

    let mut out = String::new();
    if let Some(grid) = &args.grid {
        out.push_str("scenario,measure,delta,w,big_delta,jump,fuzziness,replicates,rmse_proposed,rmse_base\n");
        let cells = sensitivity_grid(grid, grid, &template, &config, args.replicates)?;
        for cell in cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                template.kind.name(),
                config.measure.name(),
                config.params.delta_reg,
                cell.w,
                cell.big_delta,
                template.jump,
                template.fuzziness,
                args.replicates,
                cell.rmse_proposed,
                cell.rmse_base
            ));
        }
    } else if args.jump.len() > 1 {
        out.push_str(comparison_csv_header());
        for c in snr_sweep(&args.jump, &template, &config, args.replicates)? {
            out.push_str(&comparison_csv_row(&c, &config));
        }
    } else if args.fuzziness.len() > 1 {
        out.push_str(comparison_csv_header());
        for c in fuzziness_sweep(&args.fuzziness, &template, &config, args.replicates)? {
            out.push_str(&comparison_csv_row(&c, &config));
        }
    } else {
        out.push_str(comparison_csv_header());
        let c = monte_carlo_rmse(&template, &config, args.replicates)?;
        out.push_str(&comparison_csv_row(&c, &config));
    }
    write_output(args.output.as_ref(), &out)
}

fn run_approx_dump(args: ApproxDumpArgs) -> Result<()> {
    if !(args.big_delta > 0.0) || !(args.w > 0.0) {
        return Err(crate::error::Error::InvalidParams(vec![
            "big-delta and w must be positive".into(),
        ]));
    }
    let profile = ApproximationProfile::new(args.s, args.big_delta, args.w, args.t_len);
    let mut out = String::from("t,lower_gamma,upper_gamma,lower_gamma_c,upper_gamma_c\n");
    for i in 0..profile.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            profile.lower_gamma[i],
            profile.upper_gamma[i],
            profile.lower_gamma_c[i],
            profile.upper_gamma_c[i]
        ));
    }
    write_output(args.output.as_ref(), &out)
}

fn run_entropy_dump(args: EntropyDumpArgs) -> Result<()> {
    let series = load_csv(&args.input, args.has_header)?;
    let params = args.params.build().validate(series.len())?;
    let measure = args.measure.build();
    let regularity = regularity_curve(&series, params.delta_reg, &measure)?;
    let curve = entropy_curve_from(&regularity, &params)?;
    let mut out = String::from("s,entropy\n");
    for (i, v) in curve.values().iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, v));
    }
    write_output(args.output.as_ref(), &out)
}
