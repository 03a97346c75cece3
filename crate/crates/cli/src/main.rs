use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;

use sensor_transfer::augment::PARAM_SPECS;
use sensor_transfer::datasetio::{augment_dataset, load_all_for_features, load_for_features, scan_dataset};
use sensor_transfer::learner::{train, LearnConfig, LearnMode};
use sensor_transfer::profile::{SensorProfile, SCHEMA_VERSION};
use sensor_transfer::rng::{mix_seed, stream};
use sensor_transfer::stylefeat::{
    builtin_test_bank, gram_distance, load_extractor, style_grams, FeatureExtractor, DEFAULT_STYLE_LAYERS,
    STYLEFX1_VERSION,
};
use sensor_transfer::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_EXTRACTOR: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "sensor-transfer", about = "Camera sensor-effect augmentation and sensor transfer")]
struct Cli {
    /// Global random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// STYLEFX1 weight file (default: builtin test bank).
    #[arg(long, global = true)]
    extractor: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a sensor profile from a synthetic and a real image directory.
    Learn(LearnArgs),
    /// Write augmented copies of every image in a directory.
    Augment(AugmentArgs),
    /// Mean style distance between two image directories.
    StyleDistance(StyleDistanceArgs),
    /// Print parameter draws from a profile as CSV.
    Sample(SampleArgs),
    /// Print a profile as a table.
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[arg(long)]
    synthetic: PathBuf,
    #[arg(long)]
    real: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = LearnConfig::default().iterations)]
    iterations: usize,
    #[arg(long, default_value = "distribution")]
    mode: LearnMode,
    #[arg(long, default_value_t = DEFAULT_STYLE_LAYERS)]
    layers: usize,
    /// Loss history CSV (default: `<out>.loss.csv`).
    #[arg(long)]
    loss_csv: Option<PathBuf>,
    #[arg(long, default_value_t = LearnConfig::default().batch_size)]
    batch_size: usize,
    #[arg(long, default_value_t = LearnConfig::default().step_size)]
    step_size: f64,
    #[arg(long, default_value_t = LearnConfig::default().perturbation)]
    perturbation: f64,
}

#[derive(Args, Debug)]
struct AugmentArgs {
    #[arg(long)]
    input: PathBuf,
    /// Profile file, or `builtin:<name>`.
    #[arg(long)]
    profile: String,
    #[arg(long)]
    out: PathBuf,
    /// Augmented copies per image.
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Args, Debug)]
struct StyleDistanceArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = DEFAULT_STYLE_LAYERS)]
    layers: usize,
    /// Number of random pairs.
    #[arg(long, default_value_t = 100)]
    sample: usize,
    /// Pair image i of `a` with image i of `b` instead of independent draws.
    #[arg(long)]
    paired: bool,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    profile: String,
    #[arg(short = 'n', default_value_t = 1)]
    n: usize,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long)]
    profile: String,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, err: impl std::fmt::Display) -> Self {
        Self {
            code,
            message: err.to_string(),
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::new(EXIT_USAGE, e)
}

fn data(e: Error) -> Failure {
    match e {
        Error::InvalidArgument(_) | Error::Validation { .. } => usage(e),
        _ => Failure::new(EXIT_DATA, e),
    }
}

fn weights(e: Error) -> Failure {
    Failure::new(EXIT_EXTRACTOR, e)
}

fn version_line() -> &'static str {
    let s = format!(
        "{} (profile schema {SCHEMA_VERSION}, STYLEFX1 version {STYLEFX1_VERSION})",
        sensor_transfer::VERSION
    );
    Box::leak(s.into_boxed_str())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let matches = match Cli::command().version(version_line()).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let workers = match cli.workers {
        Some(0) => return Err(Failure::new(EXIT_USAGE, "--workers must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let extractor_label = cli
        .extractor
        .as_ref()
        .map_or_else(|| "builtin test bank".to_string(), |p| p.display().to_string());
    eprintln!("config: seed={} workers={workers} extractor={extractor_label}", cli.seed);
    eprintln!("config: {:?}", cli.command);

    match &cli.command {
        Command::Learn(a) => learn(&cli, a),
        Command::Augment(a) => augment(&cli, a, workers),
        Command::StyleDistance(a) => style_distance_cmd(&cli, a),
        Command::Sample(a) => sample(&cli, a),
        Command::Inspect(a) => inspect(a),
    }
}

fn extractor(cli: &Cli) -> Result<FeatureExtractor, Failure> {
    match &cli.extractor {
        Some(path) => load_extractor(path).map_err(weights),
        None => Ok(builtin_test_bank()),
    }
}

fn load_profile(spec: &str) -> Result<SensorProfile, Failure> {
    SensorProfile::load(spec).map_err(usage)
}

fn stdout_line(s: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{s}").map_err(|e| Failure::new(EXIT_DATA, e))
}

fn learn(cli: &Cli, a: &LearnArgs) -> Result<(), Failure> {
    let config = LearnConfig {
        iterations: a.iterations,
        batch_size: a.batch_size,
        step_size: a.step_size,
        perturbation: a.perturbation,
        style_layers: a.layers,
        seed: cli.seed,
        mode: a.mode,
        ..LearnConfig::default()
    };
    config.validate().map_err(usage)?;
    let synthetic = scan_dataset(&a.synthetic).map_err(data)?;
    let real = scan_dataset(&a.real).map_err(data)?;
    let fx = extractor(cli)?;
    log::info!(
        "{} synthetic and {} real images; extractor {}",
        synthetic.len(),
        real.len(),
        fx.id()
    );
    let synthetic_images = load_all_for_features(&synthetic).map_err(data)?;
    let real_images = load_all_for_features(&real).map_err(data)?;
    let outcome = train(&synthetic_images, &real_images, &fx, &config).map_err(|e| match e {
        Error::Format(_) => weights(e),
        other => data(other),
    })?;

    let mut profile = outcome.profile;
    profile.name = a
        .out
        .file_stem()
        .map_or_else(|| "learned".to_string(), |s| s.to_string_lossy().into_owned());
    profile.metadata.source_dataset = a.synthetic.display().to_string();
    profile.metadata.target_dataset = a.real.display().to_string();
    profile.metadata.created_at = humantime::format_rfc3339_seconds(SystemTime::now()).to_string();
    profile.save(&a.out).map_err(data)?;

    let loss_path = a.loss_csv.clone().unwrap_or_else(|| default_loss_path(&a.out));
    write_loss_csv(&loss_path, &outcome.state.history).map_err(data)?;

    stdout_line(&profile.inspect())?;
    stdout_line(&format!(
        "initial loss {:.6e}, final smoothed loss {:.6e}",
        outcome.initial_loss,
        outcome.state.history.last().map_or(f64::NAN, |r| r.smoothed)
    ))?;
    stdout_line(&format!("profile: {}", a.out.display()))?;
    stdout_line(&format!("loss history: {}", loss_path.display()))
}

fn default_loss_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".loss.csv");
    PathBuf::from(s)
}

fn write_loss_csv(path: &Path, history: &[sensor_transfer::learner::LossRecord]) -> sensor_transfer::Result<()> {
    let mut text = String::from("step,raw,smoothed\n");
    for r in history {
        text.push_str(&format!("{},{},{}\n", r.step, r.raw, r.smoothed));
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn augment(cli: &Cli, a: &AugmentArgs, workers: usize) -> Result<(), Failure> {
    let profile = load_profile(&a.profile)?;
    let manifest = scan_dataset(&a.input).map_err(data)?;
    let summary = augment_dataset(&manifest, &profile, &a.out, a.count, cli.seed, workers).map_err(data)?;
    stdout_line(&format!("images written: {}", summary.images_written))?;
    stdout_line(&format!("params log: {}", summary.params_log_path.display()))
}

fn style_distance_cmd(cli: &Cli, a: &StyleDistanceArgs) -> Result<(), Failure> {
    if a.sample == 0 {
        return Err(Failure::new(EXIT_USAGE, "--sample must be at least 1"));
    }
    if a.layers == 0 {
        return Err(Failure::new(EXIT_USAGE, "--layers must be at least 1"));
    }
    let set_a = scan_dataset(&a.a).map_err(data)?;
    let set_b = scan_dataset(&a.b).map_err(data)?;
    let fx = extractor(cli)?;

    let mut rng = stream(mix_seed(&[cli.seed, 0x5d15]));
    let pairs: Vec<(usize, usize)> = (0..a.sample)
        .map(|_| {
            if a.paired {
                let i = rng.random_range(0..set_a.len().min(set_b.len()));
                (i, i)
            } else {
                (rng.random_range(0..set_a.len()), rng.random_range(0..set_b.len()))
            }
        })
        .collect();

    // Each distinct image is loaded and featurized once.
    let grams_for = |set: &sensor_transfer::datasetio::DatasetManifest, idx: Vec<usize>| {
        idx.into_par_iter()
            .map(|i| {
                let img = load_for_features(set, i).map_err(data)?;
                let g = style_grams(&fx, &img, a.layers).map_err(|e| match e {
                    Error::Format(_) => weights(e),
                    other => data(other),
                })?;
                Ok((i, g))
            })
            .collect::<Result<BTreeMap<_, _>, Failure>>()
    };
    let unique = |f: fn(&(usize, usize)) -> usize| {
        let mut v: Vec<usize> = pairs.iter().map(f).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let grams_a = grams_for(&set_a, unique(|p| p.0))?;
    let grams_b = grams_for(&set_b, unique(|p| p.1))?;
    let d: Vec<f64> = pairs.iter().map(|(i, j)| gram_distance(&grams_a[i], &grams_b[j])).collect();

    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let std = if d.len() > 1 {
        (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    stdout_line(&format!("{mean:.6e} ± {std:.6e}"))
}

fn sample(cli: &Cli, a: &SampleArgs) -> Result<(), Failure> {
    let profile = load_profile(&a.profile)?;
    let mut rng = stream(mix_seed(&[cli.seed, 0x5a3b]));
    let mut out = String::new();
    out.push_str(&PARAM_SPECS.iter().map(|s| s.key()).collect::<Vec<_>>().join(","));
    for p in profile.sample(&mut rng, a.n) {
        out.push('\n');
        out.push_str(&p.to_array().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
    }
    stdout_line(&out)
}

fn inspect(a: &InspectArgs) -> Result<(), Failure> {
    let profile = load_profile(&a.profile)?;
    let text = profile.inspect();
    stdout_line(text.trim_end())
}
