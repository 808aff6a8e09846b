//! Thin command-line front end over the `polsar_cnn` library.
//!
//! Six subcommands cover the full workflow: `synth` fabricates a labeled
//! Wishart scene, `extract-features` turns polarimetric data into scaled
//! channel cubes, `train` fits the compact CNN, `classify` produces label
//! and mask rasters, `evaluate` scores predictions against ground truth,
//! and `gradcheck` verifies back-propagation against finite differences.
//!
//! Every flag may also be supplied through `--config <file>` (plain
//! `key = value` lines, keys named after the long flags); explicit flags
//! win. Each run echoes its resolved configuration as `config key = value`
//! lines for reproducibility.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/verification error,
//! 3 training divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;

use polsar_cnn::cnn::gradcheck::{check_config, worst_rel_error};
use polsar_cnn::cnn::train::{train, full_set_mse, TrainConfig};
use polsar_cnn::cnn::{init_weights, Activation, CnnLayerSpec, NetworkConfig};
use polsar_cnn::io::cube::{read_cube, write_cube};
use polsar_cnn::io::model::{load_model, save_model};
use polsar_cnn::io::pnm::{read_labels, write_labels, write_mask};
use polsar_cnn::io::polarimetric::{read_polarimetric, PolarimetricInput};
use polsar_cnn::io::tables::{
    default_palette, read_config_file, read_palette, read_remap_rules, read_samples_csv,
    write_history_csv, write_metrics_csv, write_samples_csv,
};
use polsar_cnn::metrics::{accuracy_stats, confusion_matrix, format_percent};
use polsar_cnn::pipeline::{
    build_dataset, classify_image, cross_site_remap, sample_training_pixels,
    split_train_validation, SamplingSpec,
};
use polsar_cnn::polsar::feature::{
    db_transform, extract_channels, scale_to_unit, scale_with, ChannelSet, Stage,
};
use polsar_cnn::polsar::{
    boxcar_multilook, build_hermitian_image, coherency_from_covariance,
    covariance_from_coherency, trace_raster, Basis,
};
use polsar_cnn::synth::{generate_scene, parse_scene_spec, preset_synth4};
use polsar_cnn::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

/// A terminal failure: message plus the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Diverged { .. } => EXIT_DIVERGED,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "polsar-cnn",
    version,
    about = "Compact-CNN land-cover classification for polarimetric SAR data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert scattering/Hermitian data into a channel cube
    ExtractFeatures(ExtractArgs),
    /// Train the compact CNN on labeled pixels
    Train(TrainArgs),
    /// Classify every pixel of a cube with a trained model
    Classify(ClassifyArgs),
    /// Score a prediction raster against ground truth
    Evaluate(EvaluateArgs),
    /// Generate a synthetic Wishart scene (cube + labels)
    Synth(SynthArgs),
    /// Check analytic gradients against finite differences
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Polarimetric input: POLS1 scattering stack or POLH1 Hermitian image
    #[arg(long)]
    input: Option<PathBuf>,
    /// Channel set: T3, T3_SPAN, or T3_C3
    #[arg(long)]
    channels: Option<String>,
    /// Boxcar multilook window (odd, or 0 to disable)
    #[arg(long)]
    boxcar: Option<usize>,
    /// Clamp for zero intensities before the dB transform
    #[arg(long)]
    db_floor: Option<f64>,
    /// Stop the preprocessing chain early: linear, db, or scaled
    #[arg(long)]
    stage: Option<String>,
    /// Output cube path
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Input cube (must be at the scaled stage)
    #[arg(long)]
    cube: Option<PathBuf>,
    /// Ground-truth label raster (P5 PGM, 0 = unlabeled)
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Training pixels per class
    #[arg(long)]
    per_class: Option<usize>,
    /// Fraction of each class's pixels to sample (0, 1)
    #[arg(long)]
    fraction: Option<f64>,
    /// Accept classes with fewer pixels than requested (warn, take all)
    #[arg(long)]
    clamp_samples: bool,
    /// Patch side length N (odd)
    #[arg(long)]
    window: Option<usize>,
    /// CNN layers, e.g. 20x3x3s2 or 40x3x3s2,40x3x3s2
    #[arg(long)]
    cnn: Option<String>,
    /// Hidden MLP layer sizes, comma-separated
    #[arg(long)]
    mlp: Option<String>,
    /// Number of classes (default: highest label id)
    #[arg(long)]
    classes: Option<usize>,
    /// Training epochs
    #[arg(long)]
    max_iters: Option<usize>,
    /// Initial learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Learning-rate growth factor on MSE decrease
    #[arg(long)]
    lr_up: Option<f64>,
    /// Learning-rate decay factor otherwise
    #[arg(long)]
    lr_down: Option<f64>,
    /// Master seed (drives init, sampling, split, shuffling)
    #[arg(long)]
    seed: Option<u64>,
    /// Validation fraction (0 disables the split)
    #[arg(long)]
    val_split: Option<f64>,
    /// Output model path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-epoch MSE/learning-rate CSV
    #[arg(long)]
    history: Option<PathBuf>,
    /// CSV of the sampled coordinates (for later exclusion)
    #[arg(long)]
    out_samples: Option<PathBuf>,
    /// key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Trained model file
    #[arg(long)]
    model: Option<PathBuf>,
    /// Input cube; db/linear cubes are scaled with the model's stored map
    #[arg(long)]
    cube: Option<PathBuf>,
    /// Prediction raster output (P5 PGM)
    #[arg(long)]
    out_labels: Option<PathBuf>,
    /// Color mask output (P6 PPM)
    #[arg(long)]
    out_mask: Option<PathBuf>,
    /// Palette file: one "r g b" line per class id, starting at 0
    #[arg(long)]
    palette: Option<PathBuf>,
    /// key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Prediction raster
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Ground-truth raster
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Number of classes (default: highest id in either raster)
    #[arg(long)]
    classes: Option<usize>,
    /// Remap rules applied to the truth raster
    #[arg(long)]
    remap: Option<PathBuf>,
    /// Remap rules applied to the prediction raster
    #[arg(long)]
    remap_pred: Option<PathBuf>,
    /// Exclude these sampled coordinates from scoring
    #[arg(long)]
    exclude_train: Option<PathBuf>,
    /// Score training pixels too, even when --exclude-train is given
    #[arg(long)]
    include_train_pixels: bool,
    /// Metrics CSV output
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Named scene preset (synth4)
    #[arg(long)]
    preset: Option<String>,
    /// Scene description file
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Scene seed (overrides the spec file's seed directive)
    #[arg(long)]
    seed: Option<u64>,
    /// Output cube path (T3 channels, dB-transformed and scaled)
    #[arg(long)]
    out_cube: Option<PathBuf>,
    /// Output label raster path
    #[arg(long)]
    out_labels: Option<PathBuf>,
    /// key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Patch side length N (odd)
    #[arg(long)]
    window: Option<usize>,
    /// Number of input channels
    #[arg(long)]
    channels: Option<usize>,
    /// CNN layers, e.g. 20x3x3s2
    #[arg(long)]
    cnn: Option<String>,
    /// Hidden MLP layer sizes, comma-separated
    #[arg(long)]
    mlp: Option<String>,
    /// Number of classes
    #[arg(long)]
    classes: Option<usize>,
    /// Seed for parameters and probe patches
    #[arg(long)]
    seed: Option<u64>,
    /// Random (parameters, patch) points to test
    #[arg(long)]
    points: Option<usize>,
    /// Finite-difference step
    #[arg(long)]
    step: Option<f64>,
    /// Maximum acceptable relative error
    #[arg(long)]
    tol: Option<f64>,
    /// key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Runs a file reader, prefixing any failure with the offending path.
fn read_input<T>(
    path: &Path,
    reader: impl FnOnce(&Path) -> polsar_cnn::Result<T>,
) -> Result<T, Failure> {
    reader(path).map_err(|e| {
        let mut failure = Failure::from(e);
        failure.message = format!("{}: {}", path.display(), failure.message);
        failure
    })
}

/// `key = value` pairs read from `--config`, if any.
struct Settings(Vec<(String, String)>);

impl Settings {
    fn load(path: &Option<PathBuf>) -> Result<Self, Failure> {
        match path {
            Some(p) => Ok(Settings(read_input(p, read_config_file)?)),
            None => Ok(Settings(Vec::new())),
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn parse_as<T: FromStr>(raw: &str, key: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| usage(format!("invalid value {raw:?} for {key}: {e}")))
}

/// Flag value if given, else the config-file value, else None.
fn resolve<T: FromStr>(cli: Option<T>, cfg: &Settings, key: &str) -> Result<Option<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    if cli.is_some() {
        return Ok(cli);
    }
    cfg.get(key).map(|raw| parse_as(raw, key)).transpose()
}

fn resolve_flag(cli: bool, cfg: &Settings, key: &str) -> Result<bool, Failure> {
    if cli {
        return Ok(true);
    }
    Ok(resolve(None, cfg, key)?.unwrap_or(false))
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, Failure> {
    value.ok_or_else(|| usage(format!("missing required option --{key}")))
}

fn parse_stage(s: &str) -> Result<Stage, Failure> {
    match s {
        "linear" => Ok(Stage::Linear),
        "db" => Ok(Stage::Db),
        "scaled" => Ok(Stage::Scaled),
        other => Err(usage(format!(
            "invalid stage {other:?}: expected linear, db, or scaled"
        ))),
    }
}

/// Parses a CNN layer list like `20x3x3s2,20x3x3s2`: neurons, kernel rows,
/// kernel columns, subsampling factor (applied to both axes).
fn parse_cnn_layers(s: &str) -> Result<Vec<CnnLayerSpec>, Failure> {
    let bad = || {
        usage(format!(
            "invalid --cnn value {s:?}: expected layers like 20x3x3s2, comma-separated"
        ))
    };
    s.split(',')
        .map(|layer| {
            let (conv, ss) = layer.split_once('s').ok_or_else(bad)?;
            let dims: Vec<&str> = conv.split('x').collect();
            let [neurons, kx, ky] = dims[..] else {
                return Err(bad());
            };
            Ok(CnnLayerSpec {
                neurons: neurons.parse().map_err(|_| bad())?,
                kernel: (kx.parse().map_err(|_| bad())?, ky.parse().map_err(|_| bad())?),
                subsample: {
                    let f: usize = ss.parse().map_err(|_| bad())?;
                    (f, f)
                },
            })
        })
        .collect()
}

fn parse_mlp_layers(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|n| {
            n.parse()
                .map_err(|_| usage(format!("invalid --mlp value {s:?}: expected sizes like 10")))
        })
        .collect()
}

fn print_config(pairs: &[(&str, String)]) {
    for (key, value) in pairs {
        println!("config {key} = {value}");
    }
}

fn display_path(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    log::set_logger(&STDERR_LOGGER)
        .map(|()| log::set_max_level(log::LevelFilter::Warn))
        .ok();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match cli.command {
        Command::ExtractFeatures(args) => run_extract(args),
        Command::Train(args) => run_train(args),
        Command::Classify(args) => run_classify(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Synth(args) => run_synth(args),
        Command::Gradcheck(args) => run_gradcheck(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Routes library warnings (sample clamping, degenerate splits) to stderr.
struct StderrLogger;

static STDERR_LOGGER: StderrLogger = StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level().to_string().to_lowercase(), record.args());
        }
    }

    fn flush(&self) {}
}

fn run_extract(args: ExtractArgs) -> CliResult {
    let cfg = Settings::load(&args.config)?;
    let input = require(resolve(args.input, &cfg, "input")?, "input")?;
    let channels: ChannelSet = resolve(args.channels, &cfg, "channels")?
        .as_deref()
        .unwrap_or("T3")
        .parse()?;
    let boxcar = resolve(args.boxcar, &cfg, "boxcar")?.unwrap_or(0);
    let db_floor = resolve(args.db_floor, &cfg, "db-floor")?.unwrap_or(1e-15);
    let stage = parse_stage(resolve(args.stage, &cfg, "stage")?.as_deref().unwrap_or("scaled"))?;
    let out = require(resolve(args.out, &cfg, "out")?, "out")?;
    if boxcar > 1 && boxcar % 2 == 0 {
        return Err(usage(format!("--boxcar must be odd or 0, got {boxcar}")));
    }
    print_config(&[
        ("input", display_path(&input)),
        ("channels", channels.to_string()),
        ("boxcar", boxcar.to_string()),
        ("db-floor", db_floor.to_string()),
        ("stage", stage.to_string()),
        ("out", display_path(&out)),
    ]);

    // Whatever arrives — per-look scattering data or a precomputed matrix
    // image in either basis — both T and C are recoverable exactly.
    let (mut t, mut c) = match read_input(&input, read_polarimetric)? {
        PolarimetricInput::Scattering(img) => (
            build_hermitian_image(&img, Basis::Pauli),
            build_hermitian_image(&img, Basis::Lexicographic),
        ),
        PolarimetricInput::Hermitian(img, Basis::Pauli) => {
            let c = img.map(covariance_from_coherency);
            (img, c)
        }
        PolarimetricInput::Hermitian(img, Basis::Lexicographic) => {
            (img.map(coherency_from_covariance), img)
        }
    };
    if boxcar > 1 {
        t = boxcar_multilook(&t, boxcar)?;
        c = boxcar_multilook(&c, boxcar)?;
    }
    let spans = Array2::from_shape_vec((t.height(), t.width()), trace_raster(&t))
        .expect("trace raster matches image dimensions");

    let c_ref = matches!(channels, ChannelSet::T3C3).then_some(&c);
    let span_ref = matches!(channels, ChannelSet::T3Span).then_some(&spans);
    let mut cube = extract_channels(&t, c_ref, span_ref, channels)?;
    if stage >= Stage::Db {
        cube = db_transform(cube, db_floor)?;
    }
    if stage >= Stage::Scaled {
        cube = scale_to_unit(cube)?;
    }
    write_cube(&cube, &out)?;
    println!(
        "wrote {}x{} cube with {} channels at stage {} to {}",
        cube.width(),
        cube.height(),
        cube.num_channels(),
        cube.stage(),
        out.display()
    );
    Ok(())
}

fn run_train(args: TrainArgs) -> CliResult {
    let cfg = Settings::load(&args.config)?;
    let cube_path = require(resolve(args.cube, &cfg, "cube")?, "cube")?;
    let labels_path = require(resolve(args.labels, &cfg, "labels")?, "labels")?;
    let per_class = resolve(args.per_class, &cfg, "per-class")?;
    let fraction = resolve(args.fraction, &cfg, "fraction")?;
    let clamp = resolve_flag(args.clamp_samples, &cfg, "clamp-samples")?;
    let window = require(resolve(args.window, &cfg, "window")?, "window")?;
    let cnn_spec = resolve(args.cnn, &cfg, "cnn")?.unwrap_or_else(|| "20x3x3s2".into());
    let mlp_spec = resolve(args.mlp, &cfg, "mlp")?.unwrap_or_else(|| "10".into());
    let classes = resolve(args.classes, &cfg, "classes")?;
    let max_iters = require(resolve(args.max_iters, &cfg, "max-iters")?, "max-iters")?;
    let lr = resolve(args.lr, &cfg, "lr")?.unwrap_or(0.05);
    let lr_up = resolve(args.lr_up, &cfg, "lr-up")?.unwrap_or(1.05);
    let lr_down = resolve(args.lr_down, &cfg, "lr-down")?.unwrap_or(0.70);
    let seed = resolve(args.seed, &cfg, "seed")?.unwrap_or(42);
    let val_split = resolve(args.val_split, &cfg, "val-split")?.unwrap_or(0.5);
    let out = require(resolve(args.out, &cfg, "out")?, "out")?;
    let history_path = resolve(args.history, &cfg, "history")?;
    let samples_path = resolve(args.out_samples, &cfg, "out-samples")?;

    let sampling = match (per_class, fraction) {
        (Some(n), None) => SamplingSpec::PerClass(n),
        (None, Some(f)) => SamplingSpec::Fraction(f),
        (None, None) => return Err(usage("one of --per-class or --fraction is required")),
        (Some(_), Some(_)) => {
            return Err(usage("--per-class and --fraction are mutually exclusive"))
        }
    };
    if window % 2 == 0 || window == 0 {
        return Err(usage(format!("--window must be odd, got {window}")));
    }
    let cnn_layers = parse_cnn_layers(&cnn_spec)?;
    let mlp_layers = parse_mlp_layers(&mlp_spec)?;

    let cube = read_input(&cube_path, read_cube)?;
    if cube.stage() != Stage::Scaled {
        return Err(Failure::from(Error::WrongStage {
            expected: "scaled (re-run extract-features with --stage scaled)".into(),
            found: cube.stage().to_string(),
        }));
    }
    let labels = read_input(&labels_path, read_labels)?;
    let num_classes = match classes {
        Some(k) => k,
        None => {
            let k = labels.max_class() as usize;
            if k == 0 {
                return Err(Failure::from(Error::EmptyConfusion));
            }
            k
        }
    };
    print_config(&[
        ("cube", display_path(&cube_path)),
        ("labels", display_path(&labels_path)),
        (
            "sampling",
            match sampling {
                SamplingSpec::PerClass(n) => format!("per-class:{n}"),
                SamplingSpec::Fraction(f) => format!("fraction:{f}"),
            },
        ),
        ("clamp-samples", clamp.to_string()),
        ("window", window.to_string()),
        ("cnn", cnn_spec.clone()),
        ("mlp", mlp_spec.clone()),
        ("classes", num_classes.to_string()),
        ("max-iters", max_iters.to_string()),
        ("lr", lr.to_string()),
        ("lr-up", lr_up.to_string()),
        ("lr-down", lr_down.to_string()),
        ("seed", seed.to_string()),
        ("val-split", val_split.to_string()),
        ("out", display_path(&out)),
    ]);

    let samples = sample_training_pixels(&labels, sampling, seed, clamp)?;
    // The master seed drives every stochastic stage through fixed offsets,
    // so one --seed value pins the whole run.
    let (train_set, val_set) = if val_split > 0.0 {
        let (t, v) = split_train_validation(&samples, val_split, seed.wrapping_add(1))?;
        (t, Some(v))
    } else {
        (samples.clone(), None)
    };

    let net_config = NetworkConfig {
        input_channels: cube.num_channels(),
        window,
        cnn_layers,
        mlp_layers,
        num_classes,
        activation: Activation::Tanh,
        seed,
    };
    let mut net = init_weights(&net_config)?;
    net.set_preprocessing(
        cube.channel_names().iter().map(|s| s.to_string()).collect(),
        cube.scaling().expect("scaled cube carries records").to_vec(),
    );

    let dataset = build_dataset(&cube, &train_set, window)?;
    let train_config = TrainConfig {
        max_iterations: max_iters,
        initial_lr: lr,
        lr_up,
        lr_down,
        shuffle_seed: seed.wrapping_add(2),
    };
    let (net, history) = train(net, &dataset, &train_config)?;
    println!(
        "trained on {} pixels ({} classes): train MSE {:.6} -> {:.6} over {} epochs, final lr {:.6}",
        dataset.len(),
        num_classes,
        history.initial_mse,
        history.epochs.last().map_or(history.initial_mse, |e| e.train_mse),
        history.final_epoch,
        history.final_learning_rate,
    );

    if let Some(val) = &val_set {
        let val_data = build_dataset(&cube, val, window)?;
        if !val_data.is_empty() {
            let mse = full_set_mse(&net, &val_data)?;
            let mut correct = 0usize;
            for (patch, class) in &val_data {
                let (scores, _) = net.forward(patch)?;
                if argmax(&scores) == *class {
                    correct += 1;
                }
            }
            println!(
                "validation: {} pixels, MSE {:.6}, accuracy {:.2}%",
                val_data.len(),
                mse,
                100.0 * correct as f64 / val_data.len() as f64
            );
        }
    }

    save_model(&net, &out)?;
    println!("wrote model ({} parameters) to {}", net.param_count(), out.display());
    if let Some(path) = history_path {
        write_history_csv(&history, &path)?;
        println!("wrote history to {}", path.display());
    }
    if let Some(path) = samples_path {
        write_samples_csv(&samples, &path)?;
        println!("wrote {} sampled coordinates to {}", samples.len(), path.display());
    }
    Ok(())
}

/// Index of the largest score; ties break toward the lower class index.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn run_classify(args: ClassifyArgs) -> CliResult {
    let cfg = Settings::load(&args.config)?;
    let model_path = require(resolve(args.model, &cfg, "model")?, "model")?;
    let cube_path = require(resolve(args.cube, &cfg, "cube")?, "cube")?;
    let out_labels = require(resolve(args.out_labels, &cfg, "out-labels")?, "out-labels")?;
    let out_mask = resolve(args.out_mask, &cfg, "out-mask")?;
    let palette_path = resolve(args.palette, &cfg, "palette")?;
    print_config(&[
        ("model", display_path(&model_path)),
        ("cube", display_path(&cube_path)),
        ("out-labels", display_path(&out_labels)),
        (
            "out-mask",
            out_mask.as_deref().map_or("none".into(), display_path),
        ),
    ]);

    let net = read_input(&model_path, load_model)?;
    let mut cube = read_input(&cube_path, read_cube)?;
    // Cross-site inference: map dB (or linear) cubes into [-1, 1] with the
    // *training* site's stored extrema, clamping values outside them.
    if cube.stage() != Stage::Scaled {
        let records = net
            .preprocessing()
            .map(|p| p.scaling.clone())
            .ok_or_else(|| {
                Failure::from(Error::WrongStage {
                    expected: "scaled (model carries no scaling map)".into(),
                    found: cube.stage().to_string(),
                })
            })?;
        if cube.stage() == Stage::Linear {
            cube = db_transform(cube, 1e-15)?;
        }
        cube = scale_with(cube, &records)?;
    }

    let window = net.config().window;
    let (pred, _scores) = classify_image(&net, &cube, window)?;
    write_labels(&pred, &out_labels)?;

    let k = net.config().num_classes;
    let mut histogram = vec![0usize; k + 1];
    for &id in pred.data() {
        histogram[id as usize] += 1;
    }
    println!(
        "classified {}x{} pixels into {} classes -> {}",
        pred.width(),
        pred.height(),
        k,
        out_labels.display()
    );
    for (id, count) in histogram.iter().enumerate().skip(1) {
        println!("class {id}: {count} pixels");
    }

    if let Some(mask_path) = out_mask {
        let palette = match palette_path {
            Some(p) => read_input(&p, read_palette)?,
            None => default_palette(k as u16),
        };
        write_mask(&pred, &palette, &mask_path)?;
        println!("wrote mask to {}", mask_path.display());
    }
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> CliResult {
    let cfg = Settings::load(&args.config)?;
    let pred_path = require(resolve(args.pred, &cfg, "pred")?, "pred")?;
    let truth_path = require(resolve(args.truth, &cfg, "truth")?, "truth")?;
    let classes = resolve(args.classes, &cfg, "classes")?;
    let remap_path = resolve(args.remap, &cfg, "remap")?;
    let remap_pred_path = resolve(args.remap_pred, &cfg, "remap-pred")?;
    let exclude_path = resolve(args.exclude_train, &cfg, "exclude-train")?;
    let include_train = resolve_flag(args.include_train_pixels, &cfg, "include-train-pixels")?;
    let out = require(resolve(args.out, &cfg, "out")?, "out")?;

    let mut pred = read_input(&pred_path, read_labels)?;
    let mut truth = read_input(&truth_path, read_labels)?;
    if let Some(path) = &remap_path {
        truth = cross_site_remap(&truth, &read_input(path, read_remap_rules)?)?;
    }
    if let Some(path) = &remap_pred_path {
        pred = cross_site_remap(&pred, &read_input(path, read_remap_rules)?)?;
    }
    let mut excluded = 0usize;
    if let (Some(path), false) = (&exclude_path, include_train) {
        for sample in read_input(path, read_samples_csv)? {
            if sample.x >= truth.width() || sample.y >= truth.height() {
                return Err(Failure::from(Error::OutOfBounds {
                    x: sample.x,
                    y: sample.y,
                    width: truth.width(),
                    height: truth.height(),
                }));
            }
            if truth.get(sample.x, sample.y) != 0 {
                truth.set(sample.x, sample.y, 0);
                excluded += 1;
            }
        }
    }
    let k = match classes {
        Some(k) => k,
        None => truth.max_class().max(pred.max_class()) as usize,
    };
    print_config(&[
        ("pred", display_path(&pred_path)),
        ("truth", display_path(&truth_path)),
        ("classes", k.to_string()),
        (
            "remap",
            remap_path.as_deref().map_or("none".into(), display_path),
        ),
        (
            "remap-pred",
            remap_pred_path.as_deref().map_or("none".into(), display_path),
        ),
        ("excluded-train-pixels", excluded.to_string()),
        ("out", display_path(&out)),
    ]);

    let cm = confusion_matrix(&pred, &truth, k)?;
    let stats = accuracy_stats(&cm)?;
    print_confusion(&cm, &stats);
    write_metrics_csv(&cm, &stats, &out)?;
    println!("wrote metrics to {}", out.display());
    Ok(())
}

/// Renders the confusion matrix the way the tables in remote-sensing
/// literature are printed: counts, then producer's/user's/overall accuracy
/// percentages at two decimals.
fn print_confusion(
    cm: &polsar_cnn::metrics::ConfusionMatrix,
    stats: &polsar_cnn::metrics::AccuracyStats,
) {
    let k = cm.num_classes();
    let show_rejected = cm.rejected_total() > 0;
    let mut header = vec!["truth \\ pred".to_string()];
    header.extend((0..k).map(|p| cm.class_label(p)));
    if show_rejected {
        header.push("rejected".into());
    }
    header.push("total".into());
    header.push("producer".into());

    let mut rows = vec![header];
    for t in 0..k {
        let mut row = vec![cm.class_label(t)];
        row.extend((0..k).map(|p| cm.count(t, p).to_string()));
        if show_rejected {
            row.push(cm.rejected(t).to_string());
        }
        row.push(cm.row_total(t).to_string());
        row.push(format_percent(stats.producer[t]));
        rows.push(row);
    }
    let mut user_row = vec!["user".to_string()];
    user_row.extend((0..k).map(|p| format_percent(stats.user[p])));
    rows.push(user_row);

    let columns = rows[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| rows.iter().map(|r| r.get(c).map_or(0, String::len)).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:>width$}", width = widths[c]))
            .collect();
        println!("{}", line.join("  "));
    }
    println!(
        "overall accuracy: {} ({}/{} correct, {} rejected)",
        format_percent(Some(stats.overall)),
        stats.correct,
        stats.total,
        stats.rejected
    );
}

fn run_synth(args: SynthArgs) -> CliResult {
    let cfg = Settings::load(&args.config)?;
    let preset = resolve(args.preset, &cfg, "preset")?;
    let spec_path: Option<PathBuf> = resolve(args.spec, &cfg, "spec")?;
    let seed = resolve(args.seed, &cfg, "seed")?;
    let out_cube = require(resolve(args.out_cube, &cfg, "out-cube")?, "out-cube")?;
    let out_labels = require(resolve(args.out_labels, &cfg, "out-labels")?, "out-labels")?;

    let mut scene = match (&preset, &spec_path) {
        (Some(name), None) => match name.as_str() {
            "synth4" => preset_synth4(seed.unwrap_or(7)),
            other => return Err(usage(format!("unknown preset {other:?}: available: synth4"))),
        },
        (None, Some(path)) => read_input(path, |p| {
            parse_scene_spec(&std::fs::read_to_string(p)?)
        })?,
        _ => return Err(usage("exactly one of --preset or --spec is required")),
    };
    if let Some(s) = seed {
        scene.seed = s;
    }
    print_config(&[
        (
            "scene",
            preset.clone().unwrap_or_else(|| display_path(spec_path.as_ref().unwrap())),
        ),
        ("size", format!("{}x{}", scene.width, scene.height)),
        ("looks", scene.looks.to_string()),
        ("seed", scene.seed.to_string()),
        ("out-cube", display_path(&out_cube)),
        ("out-labels", display_path(&out_labels)),
    ]);

    let (image, labels) = generate_scene(&scene)?;
    let cube = scale_to_unit(db_transform(
        extract_channels(&image, None, None, ChannelSet::T3)?,
        1e-15,
    )?)?;
    write_cube(&cube, &out_cube)?;
    write_labels(&labels, &out_labels)?;
    println!(
        "wrote {}x{} scene: {} classes, {} looks -> {} + {}",
        scene.width,
        scene.height,
        scene.num_classes(),
        scene.looks,
        out_cube.display(),
        out_labels.display()
    );
    Ok(())
}

fn run_gradcheck(args: GradcheckArgs) -> CliResult {
    let cfg = Settings::load(&args.config)?;
    let window = require(resolve(args.window, &cfg, "window")?, "window")?;
    let channels = require(resolve(args.channels, &cfg, "channels")?, "channels")?;
    let cnn_spec = resolve(args.cnn, &cfg, "cnn")?.unwrap_or_else(|| "20x3x3s2".into());
    let mlp_spec = resolve(args.mlp, &cfg, "mlp")?.unwrap_or_else(|| "10".into());
    let classes = require(resolve(args.classes, &cfg, "classes")?, "classes")?;
    let seed = resolve(args.seed, &cfg, "seed")?.unwrap_or(42);
    let points = resolve(args.points, &cfg, "points")?.unwrap_or(5);
    let step = resolve(args.step, &cfg, "step")?.unwrap_or(1e-6);
    let tol = resolve(args.tol, &cfg, "tol")?.unwrap_or(1e-6);
    print_config(&[
        ("window", window.to_string()),
        ("channels", channels.to_string()),
        ("cnn", cnn_spec.clone()),
        ("mlp", mlp_spec.clone()),
        ("classes", classes.to_string()),
        ("seed", seed.to_string()),
        ("points", points.to_string()),
        ("step", step.to_string()),
        ("tol", tol.to_string()),
    ]);

    let config = NetworkConfig {
        input_channels: channels,
        window,
        cnn_layers: parse_cnn_layers(&cnn_spec)?,
        mlp_layers: parse_mlp_layers(&mlp_spec)?,
        num_classes: classes,
        activation: Activation::Tanh,
        seed,
    };
    let reports = check_config(&config, points, step)?;
    for (i, report) in reports.iter().enumerate() {
        println!(
            "point {}: {} parameters, relative error {:.3e}",
            i, report.params, report.rel_error
        );
    }
    let worst = worst_rel_error(&reports);
    println!("max relative error: {worst:.3e}");
    if worst < tol {
        println!("gradcheck passed (tolerance {tol:.1e})");
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_DATA,
            message: format!("gradient check failed: {worst:.3e} exceeds tolerance {tol:.1e}"),
        })
    }
}
