use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use gamma_bayes::curves::{default_grid, emit_prior_posterior_curves, log_spaced};
use gamma_bayes::experiment::{
    bias_summaries, kl_paired_tests, run_bias_experiment, run_timing_experiment, timing_summaries,
    ExperimentConfig, ExperimentOutput,
};
use gamma_bayes::io::{self as gio, SummaryRow};
use gamma_bayes::rng::RNG_ALGORITHM;
use gamma_bayes::{
    fit, sample, ConvergenceConfig, Error, FitOptions, GammaParams, Method, Posterior, RatePrior,
    Sample, ShapePriorBl1, ShapePriorBl2,
};

const TIMING_NOTE: &str = "wall_time_seconds covers the fit call only (moment initialisation \
and the shape iteration); sample generation and the data pass that computes sufficient \
statistics are excluded";

#[derive(Parser)]
#[command(
    name = "gammafit",
    version,
    about = "Fit and benchmark Gamma distribution estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one estimator to a CSV of observations and print JSON.
    Fit(FitArgs),
    /// Draw a seeded sample from a Gamma distribution.
    Sample(SampleArgs),
    /// Monte Carlo bias and timing studies.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Log-prior / log-posterior curves of the BL1 shape prior.
    Curves(CurvesArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    Bias(BenchArgs),
    Timing(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mm,
    Ml1,
    Ml2,
    Bl1,
    Bl2,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mm => Method::Mm,
            MethodArg::Ml1 => Method::Ml1,
            MethodArg::Ml2 => Method::Ml2,
            MethodArg::Bl1 => Method::Bl1,
            MethodArg::Bl2 => Method::Bl2,
        }
    }
}

#[derive(Args, Clone)]
struct ConvArgs {
    /// Relative change in the shape below which iterations stop.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 1000)]
    max_iter: usize,
    /// Exit with status 3 when any fit fails to converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Clone)]
struct HyperArgs {
    /// Rate prior shape.
    #[arg(long, default_value_t = 1e-3)]
    d: f64,
    /// Rate prior rate.
    #[arg(long, default_value_t = 1e-3)]
    e: f64,
    /// BL1 shape prior `a` (> 0).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1e-3)]
    b: f64,
    #[arg(long, default_value_t = 1e-3)]
    c: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    w0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    w1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    w2: f64,
}

fn options(conv: &ConvArgs, hyper: &HyperArgs) -> Result<FitOptions, Error> {
    Ok(FitOptions {
        convergence: ConvergenceConfig::new(conv.tol, conv.max_iter)?,
        rate_prior: RatePrior::new(hyper.d, hyper.e)?,
        bl1_prior: ShapePriorBl1::from_a(hyper.a, hyper.b, hyper.c)?,
        bl2_prior: ShapePriorBl2::new(hyper.w0, hyper.w1, hyper.w2)?,
    })
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// CSV file with one positive observation per line.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    conv: ConvArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    shape: f64,
    #[arg(long)]
    scale: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for sample.csv; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 100, 1000])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Vec<MethodArg>,
    /// Log-uniform range of the true shape, `lo,hi`.
    #[arg(long = "shape-range", value_delimiter = ',', num_args = 2, default_values_t = [0.5, 20.0])]
    shape_range: Vec<f64>,
    /// Log-uniform range of the true scale, `lo,hi`.
    #[arg(long = "scale-range", value_delimiter = ',', num_args = 2, default_values_t = [0.1, 50.0])]
    scale_range: Vec<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    conv: ConvArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args)]
struct CurvesArgs {
    /// Observations to condition on; otherwise a sample is drawn.
    #[arg(long, conflicts_with_all = ["shape", "scale"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    shape: f64,
    #[arg(long, default_value_t = 25.0)]
    scale: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "grid-lo")]
    grid_lo: Option<f64>,
    #[arg(long = "grid-hi")]
    grid_hi: Option<f64>,
    #[arg(long = "grid-points", default_value_t = 512)]
    grid_points: usize,
    /// Directory for curves.csv; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    conv: ConvArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

enum Failure {
    Error(Error),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Error(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_)
        | Error::InvalidRow { .. }
        | Error::InsufficientData(_)
        | Error::DegenerateSample(_) => 2,
        Error::Convergence { .. } | Error::IllPosedPosterior(_) | Error::NumericalAnomaly(_) => 3,
        Error::Io(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Sample(a) => run_sample(a),
        Command::Bench(BenchCommand::Bias(a)) => run_bench(a, false),
        Command::Bench(BenchCommand::Timing(a)) => run_bench(a, true),
        Command::Curves(a) => run_curves(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::NotConverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read_input(path: &Path) -> Result<Sample, Error> {
    gio::read_observations(path).map_err(|e| match e {
        Error::InvalidRow { row, message } => Error::InvalidRow {
            row,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

#[derive(Serialize)]
struct FitOutput<'a> {
    method: Method,
    shape: f64,
    scale: f64,
    iterations: usize,
    converged: bool,
    posterior: Option<&'a Posterior>,
    laplace_precision: Option<f64>,
}

fn run_fit(args: FitArgs) -> Result<(), Failure> {
    let opts = options(&args.conv, &args.hyper)?;
    let s = read_input(&args.input)?;
    let method: Method = args.method.into();
    let r = fit(&s, method, &opts)?;
    let out = FitOutput {
        method: r.method,
        shape: r.params.shape(),
        scale: r.params.scale(),
        iterations: r.iterations,
        converged: r.converged,
        posterior: r.posterior.as_ref(),
        laplace_precision: r.laplace_precision,
    };
    let text = serde_json::to_string_pretty(&out).map_err(|e| Error::Io(e.to_string()))?;
    println!("{text}");
    if args.conv.strict && !r.converged {
        return Err(Failure::NotConverged(format!(
            "{method} did not converge in {} iterations",
            r.iterations
        )));
    }
    Ok(())
}

fn run_sample(args: SampleArgs) -> Result<(), Failure> {
    let p = GammaParams::new(args.shape, args.scale)?;
    let s = sample(&p, args.n, args.seed)?;
    match args.out {
        Some(dir) => {
            make_dir(&dir)?;
            let path = dir.join("sample.csv");
            let f = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
            gio::write_observations(io::BufWriter::new(f), &s)?;
        }
        None => gio::write_observations(io::stdout().lock(), &s)?,
    }
    Ok(())
}

fn make_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn run_bench(args: BenchArgs, timing: bool) -> Result<(), Failure> {
    let methods: Vec<Method> = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods.iter().map(|&m| m.into()).collect()
    };
    let cfg = ExperimentConfig {
        sample_sizes: args.sizes.clone(),
        replications: args.reps,
        master_seed: args.seed,
        methods,
        shape_range: (args.shape_range[0], args.shape_range[1]),
        scale_range: (args.scale_range[0], args.scale_range[1]),
        fit: options(&args.conv, &args.hyper)?,
    };
    let output = if timing {
        run_timing_experiment(&cfg)?
    } else {
        run_bias_experiment(&cfg)?
    };
    make_dir(&args.out)?;
    write_bench(&args.out, &cfg, &output, timing)?;
    let failed = output.records.iter().filter(|r| !r.converged).count();
    if args.conv.strict && failed > 0 {
        return Err(Failure::NotConverged(format!(
            "{failed} fits did not converge"
        )));
    }
    Ok(())
}

fn write_bench(
    dir: &Path,
    cfg: &ExperimentConfig,
    output: &ExperimentOutput,
    timing: bool,
) -> Result<(), Error> {
    let comment = timing.then_some(TIMING_NOTE);
    gio::write_records_file(&dir.join("records.csv"), &output.records, comment)?;

    let mut rows: Vec<SummaryRow> = bias_summaries(&output.records)?
        .iter()
        .map(Into::into)
        .collect();
    rows.extend(
        kl_paired_tests(&output.records)?
            .iter()
            .map(SummaryRow::from),
    );
    if timing {
        rows.extend(
            timing_summaries(&output.records)
                .iter()
                .map(SummaryRow::from),
        );
    }
    gio::write_summary_file(&dir.join("summary.csv"), &rows)?;

    let manifest = json!({
        "rng": RNG_ALGORITHM,
        "experiment": if timing { "timing" } else { "bias" },
        "config": cfg,
        "records": output.records.len(),
        "redraws": output.redraws,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))
}

fn run_curves(args: CurvesArgs) -> Result<(), Failure> {
    let opts = options(&args.conv, &args.hyper)?;
    let s = match &args.input {
        Some(path) => read_input(path)?,
        None => sample(
            &GammaParams::new(args.shape, args.scale)?,
            args.n,
            args.seed,
        )?,
    };
    let default = default_grid(&s)?;
    let grid = log_spaced(
        args.grid_lo.unwrap_or(default[0]),
        args.grid_hi.unwrap_or(default[default.len() - 1]),
        args.grid_points,
    )?;
    let curves = emit_prior_posterior_curves(
        &opts.bl1_prior,
        &opts.rate_prior,
        &s,
        &grid,
        &opts.convergence,
    )?;
    match args.out {
        Some(dir) => {
            make_dir(&dir)?;
            let path = dir.join("curves.csv");
            let f = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
            gio::write_curves(io::BufWriter::new(f), &curves.points)?;
        }
        None => {
            let mut out = io::stdout().lock();
            gio::write_curves(&mut out, &curves.points)?;
            out.flush()?;
        }
    }
    eprintln!(
        "BL1 shape {:.6} (posterior grid argmax {:.6}), scale {:.6}",
        curves.fit.params.shape(),
        curves.posterior_argmax(),
        curves.fit.params.scale()
    );
    if args.conv.strict && !curves.fit.converged {
        return Err(Failure::NotConverged("BL1 fit did not converge".into()));
    }
    Ok(())
}
