use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use udep_core::harness::{self, default_gamma_grid, ExperimentConfig, MeasureSpec, SweepAxis, DEFAULT_TRIALS};
use udep_core::kernels::KernelSpec;
use udep_core::synth::{generate, Dataset, ModelConfig};
use udep_core::{chsic, hsic, ErrorCategory, MeasureResult, Model, PairSelection};

const DEFAULT_ALPHAS: [f64; 2] = [4.0, 64.0];
const DEFAULT_GAMMA_FIXED: f64 = 10.0;
const DEFAULT_L_FIXED: usize = 100;
const DEFAULT_OUT: &str = "results";

#[derive(Parser)]
#[command(name = "udep", version, about = "Marginal and confounder-conditioned kernel dependence measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over SNR or sample count; writes CSV and SVG.
    Sweep(SweepArgs),
    /// HSIC and C-HSIC of a CSV file with columns x, y, z.
    Measure(MeasureArgs),
    /// Writes one synthetic dataset as x,y,z CSV.
    Generate(GenerateArgs),
    /// Runs the built-in numerical checks.
    SelfTest,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<Model>,
    /// Comma-separated subset of hsic, chsic, chsic-random.
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<MeasureSpec>>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// SNR grid in dB: `start:stop:step` or a comma list. Selects a gamma sweep.
    #[arg(long = "gamma-db", allow_hyphen_values = true)]
    gamma_db: Option<String>,
    /// Sample counts, comma-separated. Selects an L sweep.
    #[arg(long = "L", value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    /// SNR of an L sweep [default: 10].
    #[arg(long = "gamma-db-fixed", allow_negative_numbers = true)]
    gamma_db_fixed: Option<f64>,
    /// Sample count of a gamma sweep [default: 100].
    #[arg(long = "l-fixed")]
    l_fixed: Option<usize>,
    /// [default: 500]
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: results].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// Prune pairs uniformly at random instead of by confounder distance.
    #[arg(long)]
    random_pruning: bool,
    /// Seed for random pruning.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    model: Model,
    #[arg(long = "gamma-db", allow_negative_numbers = true)]
    gamma_db: f64,
    #[arg(long = "L")]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sweep settings as read from a TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<Model>,
    measures: Option<Vec<MeasureSpec>>,
    alpha: Option<Vec<f64>>,
    gamma_db: Option<GammaGrid>,
    #[serde(rename = "L")]
    lengths: Option<Vec<usize>>,
    gamma_db_fixed: Option<f64>,
    l_fixed: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GammaGrid {
    List(Vec<f64>),
    Spec(String),
}

#[derive(Debug)]
enum CliError {
    Core(udep_core::Error),
    Config(String),
    Io(PathBuf, io::Error),
    Failed(String),
}

impl From<udep_core::Error> for CliError {
    fn from(e: udep_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Io => 4,
            },
            CliError::Config(_) => 2,
            CliError::Io(..) => 4,
            CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Failed(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// `start:stop:step` (inclusive, step > 0) or a comma-separated list.
fn parse_gamma_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Config(format!("gamma grid {spec:?}: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad("expected start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + step * i as f64).collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<Vec<_>>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("empty or non-finite"));
    }
    Ok(values)
}

fn read_file_config(path: &Path) -> CliResult<FileConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

fn resolve_sweep(args: SweepArgs) -> CliResult<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    let model = args
        .model
        .or(file.model)
        .ok_or_else(|| CliError::Config("--model is required (mplus or mminus)".into()))?;

    // Axis flags on the command line replace whatever axis the file chose.
    let (gamma, lengths) = if args.gamma_db.is_some() || args.lengths.is_some() {
        (args.gamma_db.map(GammaGrid::Spec), args.lengths)
    } else {
        (file.gamma_db, file.lengths)
    };
    let axis = match (gamma, lengths) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("choose either a gamma sweep or an L sweep, not both".into()))
        }
        (None, Some(lengths)) => SweepAxis::Length {
            gamma_db: args.gamma_db_fixed.or(file.gamma_db_fixed).unwrap_or(DEFAULT_GAMMA_FIXED),
            lengths,
        },
        (grid, None) => SweepAxis::Gamma {
            len: args.l_fixed.or(file.l_fixed).unwrap_or(DEFAULT_L_FIXED),
            gamma_db: match grid {
                Some(GammaGrid::List(v)) => v,
                Some(GammaGrid::Spec(s)) => parse_gamma_grid(&s)?,
                None => default_gamma_grid(),
            },
        },
    };
    let measures = args
        .measures
        .or(file.measures)
        .unwrap_or_else(|| vec![MeasureSpec::Hsic, MeasureSpec::Chsic]);
    let alphas = if measures.iter().any(MeasureSpec::uses_alpha) {
        args.alpha.or(file.alpha).unwrap_or_else(|| DEFAULT_ALPHAS.to_vec())
    } else {
        Vec::new()
    };
    let cfg = ExperimentConfig {
        model,
        measures,
        alphas,
        axis,
        trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
        master_seed: args.seed.or(file.seed).unwrap_or(0),
        output: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn sweep(args: SweepArgs) -> CliResult<()> {
    let cfg = resolve_sweep(args)?;
    let (result, paths) = harness::run(&cfg)?;
    println!("{:<13} {:>6} {:>6} {:>9} {:>12} {:>12}", "measure", "alpha", "L", "gamma_db", "mean", "std");
    for r in &result.rows {
        let alpha = r.alpha.map(|a| a.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:<13} {:>6} {:>6} {:>9} {:>12.4e} {:>12.4e}",
            r.measure.as_str(),
            alpha,
            r.len,
            r.gamma_db,
            r.mean,
            r.std
        );
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn print_measure(r: &MeasureResult) {
    let alpha = r.alpha.map(|a| a.to_string()).unwrap_or_default();
    println!(
        "{},{},{alpha},{},{},{:.16e},{:.16e},{:.16e}",
        r.measure.as_str(),
        r.mode,
        r.pairs,
        r.len,
        r.value,
        r.bandwidth_x,
        r.bandwidth_y
    );
}

fn measure(args: MeasureArgs) -> CliResult<()> {
    let data = Dataset::read_csv(&args.input)?;
    let kx = KernelSpec::from_samples(&data.x)?;
    let ky = KernelSpec::from_samples(&data.y)?;
    let sel = if args.random_pruning {
        PairSelection::by_random(data.len(), args.alpha, args.seed)?
    } else {
        PairSelection::by_confounder(&data.z, args.alpha)?
    };
    println!("measure,mode,alpha,pairs,L,value,bandwidth_x,bandwidth_y");
    print_measure(&hsic(&data.x, &data.y, &kx, &ky)?);
    print_measure(&chsic(&data.x, &data.y, &sel, &kx, &ky)?);
    Ok(())
}

fn generate_cmd(args: GenerateArgs) -> CliResult<()> {
    let cfg = ModelConfig {
        model: args.model,
        gamma_db: args.gamma_db,
        len: args.len,
    };
    let data = generate(&cfg, args.seed)?;
    match args.out {
        Some(path) => data.write_csv(&path)?,
        None => data
            .write_csv_to(io::stdout().lock())
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))?,
    }
    Ok(())
}

fn self_test() -> CliResult<()> {
    let report = harness::self_test()?;
    print!("{report}");
    io::stdout().flush().ok();
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed("self-test failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Measure(a) => measure(a),
        Command::Generate(a) => generate_cmd(a),
        Command::SelfTest => self_test(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("udep: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
