//! The `moiredb` command line.
//!
//! Exit codes: 0 on success, 1 on runtime failures (I/O, corrupt data,
//! failed verification), 2 on invalid arguments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::dataset::{self, cifar, codec, mixing_set, MixingSetParams};
use crate::error::Error;
use crate::moire::{self, ConcentricPatternSpec, MoireImageSpec, ParamRanges};
use crate::pixmix::MixConfig;
use crate::rng::Xoshiro256PlusPlus;

#[derive(Debug, Parser)]
#[command(
    name = "moiredb",
    version,
    about = "Generate Moiré interference-fringe mixing sets and PixMix-augmented datasets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a Moiré mixing set (PNG images plus manifest.json).
    Generate(GenerateArgs),
    /// Augment every record of a CIFAR binary batch with the mixing pipeline.
    Mix(MixArgs),
    /// Render a single Moiré image from explicit pattern parameters.
    Preview(PreviewArgs),
    /// Regenerate every image of a mixing set and compare hashes.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    /// Lower bound of the interval frequency nu (inclusive).
    #[arg(long, default_value_t = moire::DEFAULT_NU_MIN)]
    pub nu_min: f64,
    /// Upper bound of the interval frequency nu (exclusive).
    #[arg(long, default_value_t = moire::DEFAULT_NU_MAX)]
    pub nu_max: f64,
    /// Lower bound of the center coordinates in pixels (inclusive).
    #[arg(long, default_value_t = moire::DEFAULT_CENTER_MIN)]
    pub center_min: f64,
    /// Upper bound of the center coordinates in pixels (exclusive).
    #[arg(long, default_value_t = moire::DEFAULT_CENTER_MAX)]
    pub center_max: f64,
    /// Allowed numbers of superposed patterns, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub qn: Vec<u32>,
    /// Sinusoid amplitude V_M applied to every pattern, in (0, 1].
    #[arg(long, default_value_t = moire::DEFAULT_AMPLITUDE)]
    pub amplitude: f64,
}

impl RangeArgs {
    fn ranges(&self) -> ParamRanges {
        ParamRanges {
            nu_min: self.nu_min,
            nu_max: self.nu_max,
            center_min: self.center_min,
            center_max: self.center_max,
            q_n_choices: self.qn.clone(),
            amplitude: self.amplitude,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; per-image seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of images (the published MoireDB has 14,230).
    #[arg(long, default_value_t = dataset::DEFAULT_COUNT)]
    pub count: usize,
    /// Image side length in pixels (published size: 512).
    #[arg(long, default_value_t = moire::DEFAULT_SIZE)]
    pub size: usize,
    #[command(flatten)]
    pub ranges: RangeArgs,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    /// CIFAR binary batch to augment.
    #[arg(long)]
    pub cifar: PathBuf,
    /// Number of classes in the batch: 10 or 100.
    #[arg(long, value_parser = parse_classes)]
    pub classes: u16,
    /// Mixing set directory produced by `generate`.
    #[arg(long)]
    pub mixing_set: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; record i is augmented from a stream derived from it.
    #[arg(long)]
    pub seed: u64,
    /// Maximum number of mixing steps per image.
    #[arg(long, default_value_t = 5)]
    pub k_max: u32,
    /// Shape of the Beta distributions the mixing coefficients come from.
    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,
    /// Probability that a step's partner comes from the mixing set.
    #[arg(long, default_value_t = 0.5)]
    pub p_mixing_set: f64,
    /// Probability that a step is additive rather than multiplicative.
    #[arg(long, default_value_t = 0.5)]
    pub p_additive: f64,
    /// Floor applied in multiplicative mixing space.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    /// Output PNG path.
    #[arg(long)]
    pub out: PathBuf,
    /// Interval frequency per pattern, comma separated. Patterns without an
    /// explicit value take the one sampled from --seed.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub nu: Vec<f64>,
    /// Center x per pattern, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cx: Vec<f64>,
    /// Center y per pattern, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cy: Vec<f64>,
    /// Number of superposed patterns.
    #[arg(long, default_value_t = 1)]
    pub qn: u32,
    /// Seed for pattern parameters not given explicitly.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Image side length in pixels.
    #[arg(long, default_value_t = moire::DEFAULT_SIZE)]
    pub size: usize,
    /// Sinusoid amplitude V_M, in (0, 1].
    #[arg(long, default_value_t = moire::DEFAULT_AMPLITUDE)]
    pub amplitude: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Mixing set directory.
    pub dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_classes(s: &str) -> Result<u16, String> {
    match s {
        "10" => Ok(10),
        "100" => Ok(100),
        _ => Err(format!("expected 10 or 100, got {s:?}")),
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn with_threads<T>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(f),
    }
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let params = MixingSetParams {
        master_seed: args.seed,
        count: args.count,
        ranges: args.ranges.ranges(),
        width: args.size,
        height: args.size,
    };
    params.validate().map_err(usage)?;
    let manifest = with_threads(args.threads, || {
        Ok(dataset::build_mixing_set(&params, &args.out)?)
    })?;
    println!(
        "manifest: {}",
        args.out.join(mixing_set::MANIFEST_FILE).display()
    );
    println!("images: {}", manifest.count);
    println!(
        "dataset hash: {}",
        dataset::format_hash(manifest.dataset_hash())
    );
    Ok(())
}

pub fn mix(args: &MixArgs) -> Result<(), CliError> {
    let config = MixConfig {
        k_max: args.k_max,
        beta_shape: args.beta,
        p_mixer_from_set: args.p_mixing_set,
        p_additive: args.p_additive,
        epsilon: args.epsilon,
    };
    config.validate().map_err(usage)?;
    with_threads(args.threads, || {
        let records = cifar::read_cifar_batch(&args.cifar, args.classes)?;
        let set = mixing_set::load_mixing_set_resized(&args.mixing_set, cifar::SIDE, cifar::SIDE)?;
        let augmented = dataset::augment_records(&records, &set, args.seed, &config)?;
        let summary = dataset::write_augmented_dataset(&augmented, &args.out, args.seed, &config)?;
        println!(
            "augmented {} records into {}",
            summary.count,
            args.out.display()
        );
        Ok(())
    })
}

/// Builds the spec rendered by `preview`: every pattern draws
/// `(nu, cx, cy)` from the default ranges using `--seed`, then explicit
/// values replace the drawn ones position by position.
pub fn preview_spec(args: &PreviewArgs) -> Result<MoireImageSpec, CliError> {
    if args.qn == 0 {
        return Err(CliError::Usage("--qn must be at least 1".into()));
    }
    for (flag, values) in [("--nu", &args.nu), ("--cx", &args.cx), ("--cy", &args.cy)] {
        if values.len() > args.qn as usize {
            return Err(CliError::Usage(format!(
                "{flag} has {} values but --qn is {}",
                values.len(),
                args.qn
            )));
        }
    }
    let ranges = ParamRanges {
        amplitude: args.amplitude,
        ..Default::default()
    };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(args.seed);
    let patterns = (0..args.qn as usize)
        .map(|i| {
            let nu = rng.uniform(ranges.nu_min, ranges.nu_max);
            let cx = rng.uniform(ranges.center_min, ranges.center_max);
            let cy = rng.uniform(ranges.center_min, ranges.center_max);
            ConcentricPatternSpec::new(
                args.nu.get(i).copied().unwrap_or(nu),
                args.cx.get(i).copied().unwrap_or(cx),
                args.cy.get(i).copied().unwrap_or(cy),
                args.amplitude,
            )
            .map_err(usage)
        })
        .collect::<Result<Vec<_>, _>>()?;
    MoireImageSpec::new(patterns, args.size, args.size, args.seed).map_err(usage)
}

pub fn preview(args: &PreviewArgs) -> Result<(), CliError> {
    let spec = preview_spec(args)?;
    let image = moire::generate_moire(&spec);
    codec::write_gray(&args.out, &image)?;
    for (i, p) in spec.patterns.iter().enumerate() {
        println!(
            "pattern {i}: nu={} center=({}, {}) amplitude={} fringes={}",
            p.nu,
            p.center_x,
            p.center_y,
            p.amplitude,
            moire::fringe_count(p, spec.width, spec.height)
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let (manifest, failures) = with_threads(args.threads, || {
        Ok(mixing_set::verify_mixing_set(&args.dir)?)
    })?;
    if failures.is_empty() {
        println!(
            "verified {} images in {}",
            manifest.count,
            args.dir.display()
        );
        println!(
            "dataset hash: {}",
            dataset::format_hash(manifest.dataset_hash())
        );
        return Ok(());
    }
    for f in &failures {
        eprintln!("entry {}: {}", f.index, f.reason);
    }
    Err(CliError::Runtime(format!(
        "{} of {} images failed verification",
        failures.len(),
        manifest.count
    )))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Mix(a) => mix(a),
        Command::Preview(a) => preview(a),
        Command::Verify(a) => verify(a),
    }
}

pub fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => {
                    eprintln!("error: {msg}\n\nFor more information, try '--help'.")
                }
                CliError::Runtime(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
