use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "splinefield", version, about = "Quadratic spline movement primitives and their distance fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a spline to one trajectory, or a union of splines to several.
    Fit(FitArgs),
    /// Distance, gradient and phase at query points.
    Query(QueryArgs),
    /// Sample the distance field on a regular 2-D grid.
    Grid(GridArgs),
    /// Integrate the dynamical system from a start point.
    Rollout(RolloutArgs),
    /// Encoding-error and query-timing benchmarks.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
    /// Compare analytic and nearest-sample gradients along a probe line.
    GradientStudy(GradientStudyArgs),
    /// Stream live rollouts over a local socket.
    Serve(ServeArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Trajectory file (CSV or JSON); repeat for a union model.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    segments: usize,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Force zero velocity at the end of the trajectory.
    #[arg(long)]
    terminal: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated coordinates; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    point: Vec<String>,
    /// CSV file of points with header x1..xD.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    model: PathBuf,
    /// xmin,xmax,ymin,ymax
    #[arg(long, allow_hyphen_values = true)]
    bounds: String,
    /// NXxNY, e.g. 50x50
    #[arg(long, default_value = "50x50")]
    resolution: String,
    /// Two axis indices for a slice of a higher-dimensional field, e.g. 0,2.
    #[arg(long)]
    slice_axes: Option<String>,
    /// Values of the remaining axes, in ascending axis order.
    #[arg(long, allow_hyphen_values = true)]
    slice_fixed: Option<String>,
    #[arg(long, value_enum)]
    format: Option<GridFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RolloutArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated start point.
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Step budget.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Integration step; defaults to a value scaled to the model.
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long, default_value = "euler")]
    integrator: String,
    /// Trace file (.csv or .json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Reconstruction error per method and parameter count.
    Encoding(EncodingArgs),
    /// Single-threaded batch query timing.
    Timing(TimingArgs),
}

#[derive(Args)]
struct EncodingArgs {
    /// Directory of trajectory files (*.csv, *.json).
    #[arg(long, conflicts_with = "synthetic")]
    data_dir: Option<PathBuf>,
    /// Generate this many random curves instead of reading files.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "3,7,12,17,22")]
    params: String,
    /// Comma-separated method names; default is every method.
    #[arg(long)]
    methods: Option<String>,
    /// Report file (.csv or .json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long, default_value = "1,2,5,10,20")]
    segments: String,
    #[arg(long, default_value = "2,3,10")]
    dims: String,
    #[arg(long, default_value_t = 2500)]
    points: usize,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GradientStudyArgs {
    /// Spline model; defaults to a fitted S shape.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Samples in the nearest-sample field.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 200)]
    probes: usize,
    /// Probe line start; defaults to a horizontal line through the middle of the curve.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Tcp,
    Ws,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 7878)]
    port: u16,
    /// State messages per second.
    #[arg(long, default_value_t = 60.0)]
    rate: f64,
    #[arg(long, value_enum, default_value = "tcp")]
    transport: TransportArg,
    /// Directory for per-connection replay scripts.
    #[arg(long)]
    record: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(splinefield::Error),
}

impl From<splinefield::Error> for Failure {
    fn from(e: splinefield::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.into())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var("SPLINEFIELD_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("SPLINEFIELD_THREADS must be a non-negative integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Query(a) => commands::query(a),
        Command::Grid(a) => commands::grid(a),
        Command::Rollout(a) => commands::rollout(a),
        Command::Bench { which } => match which {
            BenchCommand::Encoding(a) => commands::bench_encoding(a),
            BenchCommand::Timing(a) => commands::bench_timing(a),
        },
        Command::GradientStudy(a) => commands::gradient_study(a),
        Command::Serve(a) => commands::serve(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
