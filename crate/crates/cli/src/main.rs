use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use danm::estimator::{default_lambda, estimate, EstimatorConfig, Method};
use danm::metrics::matched_mse;
use danm::model::AmplitudeLaw;
use danm::{CompressionKind, SolveStatus};
use danm_cli::config::SolverSection;
use danm_cli::error::{CliError, CliResult};
use danm_cli::experiments::{run_bench, solver_options, write_csv};
use danm_cli::io::{format_spectrum, read_matrix, write_matrix};
use danm_cli::scenario::{generate, scenario_operator, ScenarioSpec, SourceLayout};
use danm_cli::BenchConfig;

#[derive(Debug, Parser)]
#[command(name = "danm", version, about = "Gridless 2-D line spectrum estimation by decoupled atomic norm minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize an observation matrix (and its ground truth).
    Gen(GenArgs),
    /// Estimate the 2-D frequencies of an observation.
    Estimate(EstimateArgs),
    /// Run the experiment sweeps of a configuration file and write CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Amplitude {
    Unit,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Compress {
    None,
    Bernoulli,
    Gaussian,
    Select,
}

impl From<Compress> for CompressionKind {
    fn from(c: Compress) -> Self {
        match c {
            Compress::None => CompressionKind::Identity,
            Compress::Bernoulli => CompressionKind::Bernoulli,
            Compress::Gaussian => CompressionKind::Gaussian,
            Compress::Select => CompressionKind::RowSelect,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Danm,
    Vanm,
    Mmv,
    Cs,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Danm => Method::Danm,
            MethodArg::Vanm => Method::Vanm,
            MethodArg::Mmv => Method::Mmv,
            MethodArg::Cs => Method::Cs,
        }
    }
}

/// Measurement compression shared by `gen` and `estimate`.
#[derive(Debug, Args)]
struct CompressArgs {
    /// Compression operator applied on both sides.
    #[arg(long, value_enum, default_value = "none")]
    compress: Compress,
    /// Rows kept on the first axis (defaults to N).
    #[arg(long)]
    kx: Option<usize>,
    /// Rows kept on the second axis (defaults to M).
    #[arg(long)]
    ky: Option<usize>,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[arg(long = "n", default_value_t = 16)]
    n: usize,
    #[arg(long = "m", default_value_t = 16)]
    m: usize,
    /// Number of sources.
    #[arg(long = "l", default_value_t = 4)]
    l: usize,
    /// Signal-to-noise ratio in dB; omit for noise-free data.
    #[arg(long)]
    snr: Option<f64>,
    /// Minimum wrap separation of the frequencies on each axis.
    #[arg(long, default_value_t = 0.1)]
    min_sep: f64,
    #[arg(long, value_enum, default_value = "unit")]
    amplitude: Amplitude,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    compress: CompressArgs,
    /// Observation matrix output.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth spectrum output.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Observation matrix file.
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Generate the observation instead: `N=16 M=16 L=4` (SNR, seed etc.
    /// come from the scenario flags).
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    gen: Option<Vec<String>>,
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    min_sep: f64,
    #[arg(long, value_enum, default_value = "unit")]
    amplitude: Amplitude,
    /// Signal size N of a compressed input file.
    #[arg(long = "n", requires = "input")]
    n: Option<usize>,
    /// Signal size M of a compressed input file.
    #[arg(long = "m", requires = "input")]
    m: Option<usize>,
    /// Scenario seed; also selects the compression operator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    compress: CompressArgs,
    #[arg(long, value_enum, default_value = "danm")]
    method: MethodArg,
    /// `ipm` or `admm`.
    #[arg(long, default_value = "ipm")]
    solver: String,
    /// Regularization weight (denoising); overrides --lambda-scale.
    #[arg(long)]
    lambda: Option<f64>,
    /// Multiplier of the default regularization weight.
    #[arg(long, default_value_t = 1.0)]
    lambda_scale: f64,
    /// Noise standard deviation per entry; 0 declares noise-free data.
    /// Estimated from the data when omitted.
    #[arg(long)]
    noise_std: Option<f64>,
    /// Known number of sources.
    #[arg(long)]
    order: Option<usize>,
    /// Pairing threshold.
    #[arg(long, default_value_t = danm::pairing::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Largest N·M accepted by the vectorized method.
    #[arg(long, default_value_t = danm::anm::DEFAULT_VANM_CAP)]
    vanm_cap: usize,
    /// Result file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// CSV output; defaults to the configuration's `output` or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run only this experiment.
    #[arg(long)]
    only: Option<String>,
    /// Report each finished cell on stderr.
    #[arg(long)]
    verbose: bool,
}

fn law(a: Amplitude) -> AmplitudeLaw {
    match a {
        Amplitude::Unit => AmplitudeLaw::UnitModulus,
        Amplitude::Gaussian => AmplitudeLaw::Gaussian,
    }
}

fn scenario_spec(s: &ScenarioArgs, c: &CompressArgs) -> ScenarioSpec {
    ScenarioSpec {
        n: s.n,
        m: s.m,
        layout: SourceLayout::Random { l: s.l, min_sep: s.min_sep },
        amplitude: law(s.amplitude),
        snr_db: s.snr,
        compression: c.compress.into(),
        kx: c.kx.unwrap_or(s.n),
        ky: c.ky.unwrap_or(s.m),
    }
}

fn create(path: &PathBuf) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io { path: path.clone(), source: e })
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let sc = generate(&scenario_spec(&args.scenario, &args.compress), args.scenario.seed)?;
    write_matrix(&args.out, &sc.observation)?;
    if let Some(path) = &args.truth {
        let comments = vec![("noise_std".to_string(), sc.noise_std.to_string())];
        std::fs::write(path, format_spectrum(&sc.truth, &comments)).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
    }
    Ok(())
}

/// Parses `--gen N=16 M=16 L=4` (keys are case-insensitive).
fn parse_gen(pairs: &[String], args: &EstimateArgs) -> CliResult<ScenarioArgs> {
    let mut s = ScenarioArgs {
        n: 16,
        m: 16,
        l: 4,
        snr: args.snr,
        min_sep: args.min_sep,
        amplitude: args.amplitude,
        seed: args.seed,
    };
    for pair in pairs.iter().flat_map(|p| p.split(',')).filter(|p| !p.is_empty()) {
        let (key, value) = pair.split_once('=').ok_or_else(|| CliError::Usage(format!("--gen expects KEY=VALUE, got '{pair}'")))?;
        let v: usize = value.parse().map_err(|_| CliError::Usage(format!("--gen {key}: '{value}' is not a positive integer")))?;
        match key.to_ascii_uppercase().as_str() {
            "N" => s.n = v,
            "M" => s.m = v,
            "L" => s.l = v,
            other => return Err(CliError::Usage(format!("--gen: unknown key '{other}' (expected N, M, L)"))),
        }
    }
    Ok(s)
}

fn cmd_estimate(args: &EstimateArgs) -> CliResult<()> {
    let (observation, operator, truth, known_noise) = match (&args.input, &args.gen) {
        (Some(path), None) => {
            let y = read_matrix(path)?;
            let kind: CompressionKind = args.compress.compress.into();
            let op = if kind == CompressionKind::Identity {
                scenario_operator(kind, y.rows(), y.cols(), y.rows(), y.cols(), args.seed)?
            } else {
                // the file holds K_x x K_y measurements of an N x M signal
                let (Some(n), Some(m)) = (args.n, args.m) else {
                    return Err(CliError::Usage("compressed file input needs --n and --m".into()));
                };
                scenario_operator(kind, n, m, y.rows(), y.cols(), args.seed)?
            };
            (y, op, None, None)
        }
        (None, Some(pairs)) => {
            let s = parse_gen(pairs, args)?;
            let sc = generate(&scenario_spec(&s, &args.compress), s.seed)?;
            (sc.observation, sc.operator, Some(sc.truth), Some(sc.noise_std))
        }
        _ => return Err(CliError::Usage("give exactly one of --input or --gen".into())),
    };
    let (n, m) = operator.input_dims();
    let noise_std = args.noise_std.or(known_noise);
    let lambda = match (args.lambda, noise_std) {
        (Some(l), _) => Some(l),
        (None, Some(s)) if s > 0.0 => Some(args.lambda_scale * default_lambda(s, n, m)),
        _ => None,
    };
    let section = SolverSection { kind: args.solver.clone(), ..SolverSection::default() };
    let cfg = EstimatorConfig {
        method: args.method.into(),
        solver: solver_options(&section)?,
        lambda,
        noise_std,
        model_order: args.order.or(truth.as_ref().filter(|_| noise_std.unwrap_or(0.0) > 0.0).map(|t| t.len())),
        epsilon: args.epsilon,
        vanm_cap: args.vanm_cap,
        ..EstimatorConfig::default()
    };
    let est = estimate(&observation, &operator, &cfg)?;
    let mut comments = vec![
        ("method".to_string(), args.method.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()),
        ("status".to_string(), est.status.as_str().to_string()),
        ("iterations".to_string(), est.iterations.to_string()),
    ];
    if let Some(v) = est.atomic_norm_value {
        comments.push(("atomic_norm".into(), v.to_string()));
    }
    if let Some(l) = est.lambda {
        comments.push(("lambda".into(), l.to_string()));
    }
    let flags = est.flags.describe();
    if !flags.is_empty() {
        comments.push(("flags".into(), flags));
    }
    if let Some(t) = &truth {
        comments.push(("freq_mse".into(), matched_mse(t, &est.spectrum)?.to_string()));
    }
    let text = format_spectrum(&est.spectrum, &comments);
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io { path: path.clone(), source: e })?,
        None => print!("{text}"),
    }
    if est.status != SolveStatus::Optimal {
        return Err(CliError::NotConverged(est.status.as_str().to_string()));
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let cfg = BenchConfig::load(&args.config)?;
    let verbose = args.verbose;
    let rows = run_bench(&cfg, args.only.as_deref(), |line| {
        if verbose {
            eprintln!("{line}");
        }
    })?;
    match args.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => write_csv(create(path)?, &rows),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(&mut lock, &rows)?;
            lock.flush().map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("danm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
