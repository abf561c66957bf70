use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use steinis::experiments::{run_experiment, write_outputs, ExperimentConfig};
use steinis::gram::{assemble_gram, ksd_squared};
use steinis::kernels::{BaseKernel, KernelSpec, Variant};
use steinis::qp::QpSettings;
use steinis::samplers::{read_points_csv, run_chain, ChainConfig, ChainKind};
use steinis::sis::correct_gram;
use steinis::targets::{
    generate_synthetic, load_dataset, DatasetOptions, LogisticPosterior, ScoreModel,
    StandardGaussian,
};
use steinis::{Error, Result, WeightVector};

#[derive(Parser)]
#[command(
    name = "steinis",
    version,
    about = "Stein importance sampling: kernels, weights, and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Langevin chain (or exact draws) and write the points as CSV.
    Sample(SampleArgs),
    /// Compute Stein importance weights for a CSV of samples.
    Correct(CorrectArgs),
    /// KSD of a weighted sample.
    Ksd(KsdArgs),
    /// Run an experiment from a TOML config; writes results.csv and manifest.json.
    Experiment(ExperimentArgs),
    /// Write a synthetic logistic-regression dataset as CSV.
    GenData(GenDataArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetKind {
    Gaussian,
    Logistic,
}

#[derive(Args)]
struct TargetArgs {
    /// Target distribution.
    #[arg(long, value_enum, default_value = "gaussian")]
    target: TargetKind,
    /// Dimension of the standard Gaussian target.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Dataset CSV for the logistic target (features..., label).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Gaussian prior precision for the logistic target.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    no_intercept: bool,
}

impl TargetArgs {
    fn model(&self) -> Result<Box<dyn ScoreModel>> {
        match self.target {
            TargetKind::Gaussian => {
                if self.dim == 0 {
                    return Err(Error::Config("--dim must be >= 1".into()));
                }
                Ok(Box::new(StandardGaussian::new(self.dim)))
            }
            TargetKind::Logistic => {
                let path = self
                    .dataset
                    .as_ref()
                    .ok_or_else(|| Error::Config("--target logistic needs --dataset".into()))?;
                let opts = DatasetOptions {
                    standardize: !self.no_standardize,
                    intercept: !self.no_intercept,
                };
                Ok(Box::new(LogisticPosterior::new(
                    load_dataset(path, opts)?,
                    self.lambda,
                )?))
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseKind {
    Imq,
    Gaussian,
    InverseLog,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Canonical,
    Marginal,
    Subsampled,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "imq")]
    kernel: BaseKind,
    /// Base kernel scale `α`.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// IMQ exponent `β` in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, value_enum, default_value = "canonical")]
    variant: VariantArg,
    /// Gradient subsample size per sample for the subsampled variant.
    #[arg(long)]
    n_k: Option<usize>,
    /// Seed for kernel subsamples.
    #[arg(long, default_value_t = 0)]
    kernel_seed: u64,
}

impl KernelArgs {
    fn spec(&self) -> KernelSpec {
        let base = match self.kernel {
            BaseKind::Imq => BaseKernel::Imq {
                alpha: self.alpha,
                beta: self.beta,
            },
            BaseKind::Gaussian => BaseKernel::Gaussian { alpha: self.alpha },
            BaseKind::InverseLog => BaseKernel::InverseLog { alpha: self.alpha },
        };
        let mut spec = KernelSpec::new(base.id(), base);
        spec.variant = match self.variant {
            VariantArg::Canonical => Variant::Canonical,
            VariantArg::Marginal => Variant::Marginal,
            VariantArg::Subsampled => Variant::SubsampledCanonical,
        };
        spec.n_k = self.n_k;
        spec
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainArg {
    Iid,
    Ula,
    Tula,
    TulaSubsampled,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_enum, default_value = "tula")]
    chain: ChainArg,
    /// Number of points to emit.
    #[arg(short, long, default_value_t = 1000)]
    n: usize,
    /// Step size.
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Taming parameter.
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Gradient subsample size for tula-subsampled.
    #[arg(long)]
    n_s: Option<usize>,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrectArgs {
    /// Samples CSV, one point per row.
    samples: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output JSON file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KsdArgs {
    /// Samples CSV, one point per row.
    samples: PathBuf,
    /// Weights JSON: an array, or an object with a `weights` array. Uniform when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment config.
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, default_value_t = 200)]
    n_data: usize,
    #[arg(long, default_value_t = 5)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_samples(path: &Path) -> Result<Vec<Vec<f64>>> {
    read_points_csv(File::open(path)?)
}

fn read_weights(path: &Path) -> Result<WeightVector> {
    let value: serde_json::Value = serde_json::from_reader(File::open(path)?)?;
    let raw = match value {
        serde_json::Value::Object(mut map) => map
            .remove("weights")
            .ok_or_else(|| Error::Input(format!("{}: no `weights` field", path.display())))?,
        other => other,
    };
    WeightVector::new(serde_json::from_value(raw)?)
}

fn sample(args: SampleArgs) -> Result<()> {
    let model = args.target.model()?;
    let kind = match args.chain {
        ChainArg::Iid => ChainKind::IidGaussian,
        ChainArg::Ula => ChainKind::Ula,
        ChainArg::Tula => ChainKind::Tula,
        ChainArg::TulaSubsampled => ChainKind::TulaSubsampled,
    };
    let config = ChainConfig {
        kind,
        h: args.h,
        gamma: args.gamma,
        n_steps: args.n,
        n_s: args.n_s,
        seed: args.seed,
        x0: None,
        burn_in: args.burn_in,
    };
    let chain = run_chain(&config, model.as_ref())?;
    let mut out = output(args.out.as_deref())?;
    chain.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn correct(args: CorrectArgs) -> Result<()> {
    let model = args.target.model()?;
    let points = read_samples(&args.samples)?;
    let spec = args.kernel.spec();
    let gram = assemble_gram(&spec.prepare(model.as_ref(), &points, args.kernel.kernel_seed)?)?;
    let settings = QpSettings {
        tol: args.tol,
        max_iter: args.max_iter,
        ..QpSettings::default()
    };
    let result = correct_gram(&gram, &settings)?;
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &result)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn ksd(args: KsdArgs) -> Result<()> {
    let model = args.target.model()?;
    let points = read_samples(&args.samples)?;
    let weights = match &args.weights {
        Some(p) => read_weights(p)?,
        None => WeightVector::uniform(points.len()),
    };
    let spec = args.kernel.spec();
    let gram = assemble_gram(&spec.prepare(model.as_ref(), &points, args.kernel.kernel_seed)?)?;
    println!("{:e}", ksd_squared(&gram, &weights)?.sqrt());
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let config = ExperimentConfig::load(&args.config)?;
    let dir = args
        .out
        .or_else(|| config.output.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `output`".into()))?;
    let result = run_experiment(&config)?;
    write_outputs(&result, &config, &dir)?;
    for (seed, message) in &result.failures {
        eprintln!("seed {seed} failed: {message}");
    }
    eprintln!(
        "wrote {} rows to {}",
        result.rows.len(),
        dir.join("results.csv").display()
    );
    if !result.failures.is_empty() && result.rows.is_empty() {
        return Err(Error::Numerical("every seed failed".into()));
    }
    Ok(())
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let data = generate_synthetic(args.n_data, args.dim, args.seed)?;
    let mut out = output(args.out.as_deref())?;
    data.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Correct(a) => correct(a),
        Command::Ksd(a) => ksd(a),
        Command::Experiment(a) => experiment(a),
        Command::GenData(a) => gen_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
