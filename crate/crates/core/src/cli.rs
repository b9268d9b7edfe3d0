//! Command-line front end. Every flag can also come from a `key = value`
//! config file; flags win.

use std::collections::HashMap;
use std::error::Error;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::ingest::{self, Recording, SeizureAnnotations};
use crate::persistence::{BettiVector, EntropySummary, PersistenceDiagram};
use crate::pipeline::{self, AnalysisConfig, Field, OutputFormat, SynthSpec};
use crate::signature::{self, Path as SigPath};

/// Environment variable holding the log filter, e.g. `debug`.
pub const LOG_ENV: &str = "SIGTOPO_LOG";

#[derive(Debug, Parser)]
#[command(name = "sigtopo", version, about = "Signature-based simplicial complexes over sliding windows")]
struct Cli {
    /// File of `key = value` lines supplying defaults for any flag
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trajectory of Betti numbers and persistence entropy over sliding windows
    Analyze(AnalyzeArgs),
    /// Flattened truncated signature of selected channels over an interval
    Signature(SignatureArgs),
    /// Complex, filtration and diagram of the window ending at one time, as JSON
    ComplexAt(ComplexAtArgs),
    /// Synthetic block-structured recording as CSV
    Synth(SynthArgs),
    /// One trajectory file per (lambda1, lambda2, window) cell of a grid
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// EDF (.edf) or CSV recording
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Sample rate of CSV input in Hz [default: 1]
    #[arg(long)]
    rate: Option<f64>,
    /// Block-average down to this rate before analysis [default: 1]
    #[arg(long)]
    resample_to: Option<f64>,
    /// Comma-separated channel names (required for EDF)
    #[arg(long, value_delimiter = ',')]
    channels: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Signature truncation degree [default: 3]
    #[arg(long)]
    deg: Option<usize>,
    /// 1 for edges only, 2 to add triangles [default: 2]
    #[arg(long)]
    max_dim: Option<usize>,
    /// Regressions must reach R^2 above this to contribute [default: 0.67]
    #[arg(long)]
    r2_threshold: Option<f64>,
    /// Samples between consecutive window ends [default: 1]
    #[arg(long)]
    stride: Option<usize>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    threads: Option<usize>,
    /// Solver tolerance on the largest coordinate change [default: 1e-7]
    #[arg(long)]
    tol: Option<f64>,
    /// Solver sweep limit [default: 10000]
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Stage-one penalty [default: 1]
    #[arg(long)]
    lambda1: Option<f64>,
    /// Stage-two penalty [default: 1]
    #[arg(long)]
    lambda2: Option<f64>,
    /// Window length in samples of the resampled recording [default: 50]
    #[arg(long)]
    window: Option<usize>,
    /// Trailing window for mean/std bands [default: 120]
    #[arg(long)]
    band_window: Option<usize>,
    /// Trajectory column the bands follow [default: b1]
    #[arg(long)]
    band_field: Option<Field>,
    /// csv or jsonl [default: csv]
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Output file [default: stdout]
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Seizure intervals, one `start,end` pair (seconds) per line
    #[arg(long)]
    annotations: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SignatureArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Interval start in seconds [default: 0]
    #[arg(long)]
    start: Option<f64>,
    /// Interval end in seconds, exclusive [default: end of recording]
    #[arg(long)]
    end: Option<f64>,
    /// Truncation degree [default: 3]
    #[arg(long)]
    deg: Option<usize>,
    /// Standardize every coordinate of the time-augmented path first
    #[arg(long)]
    normalize: bool,
    /// Output file [default: stdout]
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ComplexAtArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// End of the window, in seconds
    #[arg(long)]
    t: Option<f64>,
    /// Stage-one penalty [default: 1]
    #[arg(long)]
    lambda1: Option<f64>,
    /// Stage-two penalty [default: 1]
    #[arg(long)]
    lambda2: Option<f64>,
    /// Window length in samples [default: 50]
    #[arg(long)]
    window: Option<usize>,
    /// Output file [default: stdout]
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Random seed [default: 7]
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated block sizes [default: 3,3]
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    /// Standard deviation of per-channel noise [default: 1e-4]
    #[arg(long)]
    noise: Option<f64>,
    /// Fraction of the next block's driver mixed into each channel [default: 0]
    #[arg(long)]
    cross_mix: Option<f64>,
    /// Length in seconds [default: 600]
    #[arg(long)]
    duration: Option<f64>,
    /// Sample rate in Hz [default: 1]
    #[arg(long)]
    rate: Option<f64>,
    /// Output file [default: stdout]
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated stage-one penalties [default: 1,10000]
    #[arg(long, value_delimiter = ',')]
    lambda1: Option<Vec<f64>>,
    /// Comma-separated stage-two penalties [default: 1,10000]
    #[arg(long, value_delimiter = ',')]
    lambda2: Option<Vec<f64>>,
    /// Comma-separated window lengths [default: 50]
    #[arg(long, value_delimiter = ',')]
    window: Option<Vec<usize>>,
    /// csv or jsonl [default: csv]
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Directory receiving one file per cell
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "input", "rate", "resample-to", "channels", "deg", "max-dim", "r2-threshold", "stride", "threads", "tol",
    "max-iter", "lambda1", "lambda2", "window", "band-window", "band-field", "format", "out", "annotations",
    "start", "end", "normalize", "t", "seed", "blocks", "noise", "cross-mix", "duration", "out-dir",
];

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Box<dyn Error>),
}

impl<E: Error + 'static> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(Box::new(e))
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(msg: impl Display) -> Failure {
    Failure::Runtime(msg.to_string().into())
}

#[derive(Debug, Default)]
struct Config {
    path: String,
    values: HashMap<String, (usize, String)>,
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text)
    }

    fn parse(name: &str, text: &str) -> Result<Self, Failure> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(usage(format!("{name}:{}: expected `key = value`", i + 1)));
            };
            let key = k.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(usage(format!("{name}:{}: unknown key {key:?}", i + 1)));
            }
            values.insert(key, (i + 1, v.trim().to_string()));
        }
        Ok(Self { path: name.to_string(), values })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => {
                v.parse().map(Some).map_err(|e| usage(format!("{}:{line}: {key}: {e}", self.path)))
            }
        }
    }

    fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, Failure>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim().parse().map_err(|e| usage(format!("{}:{line}: {key}: {e}", self.path))))
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// Flag value if present, else the config value.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn pick_list<T: FromStr>(&self, flag: Option<Vec<T>>, key: &str) -> Result<Option<Vec<T>>, Failure>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get_list(key),
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status: 0 on success, 2 for usage errors, 1 for anything else.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze(a) => analyze(a, &cfg),
        Command::Signature(a) => signature_cmd(a, &cfg),
        Command::ComplexAt(a) => complex_at(a, &cfg),
        Command::Synth(a) => synth(a, &cfg),
        Command::Sweep(a) => sweep(a, &cfg),
    }
}

fn load_input(args: InputArgs, cfg: &Config) -> Result<Recording, Failure> {
    let path: PathBuf = cfg.pick(args.input, "input")?.ok_or_else(|| usage("missing --input"))?;
    let rate: f64 = cfg.pick(args.rate, "rate")?.unwrap_or(1.0);
    let target: f64 = cfg.pick(args.resample_to, "resample-to")?.unwrap_or(1.0);
    let channels: Option<Vec<String>> = cfg.pick_list(args.channels, "channels")?;
    let is_edf = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("edf"));
    let io_err = |e: io::Error| runtime(format!("{}: {e}", path.display()));
    let recording = if is_edf {
        let bytes = fs::read(&path).map_err(io_err)?;
        let rec = ingest::parse_edf(&bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        let channels = channels.ok_or_else(|| {
            usage(format!("--channels is required for EDF input; available: {}", rec.channel_names().join(",")))
        })?;
        rec.select_channels(&channels)?
    } else {
        let text = fs::read_to_string(&path).map_err(io_err)?;
        let rec = ingest::parse_csv(&text, rate).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        match channels {
            Some(c) => rec.select_channels(&c)?,
            None => rec,
        }
    };
    log::info!(
        "loaded {} channels x {} samples at {} Hz from {}",
        recording.channel_count(),
        recording.sample_count(),
        recording.rate(),
        path.display()
    );
    if recording.rate() == target {
        Ok(recording)
    } else {
        Ok(ingest::resample_mean(&recording, target)?)
    }
}

fn base_config(model: ModelArgs, cfg: &Config) -> Result<AnalysisConfig, Failure> {
    let d = AnalysisConfig::default();
    let threads = cfg.pick(model.threads, "threads")?;
    Ok(AnalysisConfig {
        deg: cfg.pick(model.deg, "deg")?.unwrap_or(d.deg),
        max_dim: cfg.pick(model.max_dim, "max-dim")?.unwrap_or(d.max_dim),
        r2_threshold: cfg.pick(model.r2_threshold, "r2-threshold")?.unwrap_or(d.r2_threshold),
        stride: cfg.pick(model.stride, "stride")?.unwrap_or(d.stride),
        tol: cfg.pick(model.tol, "tol")?.unwrap_or(d.tol),
        max_iter: cfg.pick(model.max_iter, "max-iter")?.unwrap_or(d.max_iter),
        threads: threads.or(d.threads),
        ..d
    })
}

fn checked(config: AnalysisConfig) -> Result<AnalysisConfig, Failure> {
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<(), Failure> {
    w.flush().map_err(|e| runtime(format!("{}: {e}", path.map_or("stdout".into(), |p| p.display().to_string()))))
}

fn analyze(args: AnalyzeArgs, cfg: &Config) -> Result<(), Failure> {
    let mut config = base_config(args.model, cfg)?;
    let d = AnalysisConfig::default();
    config.lambda1 = cfg.pick(args.lambda1, "lambda1")?.unwrap_or(d.lambda1);
    config.lambda2 = cfg.pick(args.lambda2, "lambda2")?.unwrap_or(d.lambda2);
    config.window = cfg.pick(args.window, "window")?.unwrap_or(d.window);
    let explicit_band = cfg.pick(args.band_window, "band-window")?;
    config.band_window = explicit_band.unwrap_or(d.band_window);
    config.band_field = cfg.pick(args.band_field, "band-field")?.unwrap_or(d.band_field);
    let format = cfg.pick(args.format, "format")?.unwrap_or(OutputFormat::Csv);
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    let ann_path: Option<PathBuf> = cfg.pick(args.annotations, "annotations")?;
    let config = checked(config)?;

    let annotations: Option<SeizureAnnotations> = match &ann_path {
        None => None,
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            Some(ingest::load_annotations(&text).map_err(|e| runtime(format!("{}: {e}", p.display())))?)
        }
    };
    let recording = load_input(args.input, cfg)?;
    let trajectory = pipeline::sliding_analysis(&recording, &config)?;
    let bands = if trajectory.len() >= config.band_window {
        Some(pipeline::rolling_bands(&trajectory, config.band_field, config.band_window)?)
    } else if explicit_band.is_some() {
        return Err(pipeline::PipelineError::BandWindow { h: config.band_window, len: trajectory.len() }.into());
    } else {
        log::warn!(
            "trajectory has {} points, fewer than the default band window {}; bands omitted",
            trajectory.len(),
            config.band_window
        );
        None
    };
    let mut w = open_out(out.as_deref())?;
    pipeline::emit(&trajectory, bands.as_ref(), annotations.as_ref(), format, &mut w)
        .map_err(|e| runtime(format!("{}: {e}", out.as_deref().map_or("stdout".into(), |p| p.display().to_string()))))?;
    finish(w, out.as_deref())
}

#[derive(Serialize)]
struct SignatureDump<'a> {
    channels: &'a [String],
    start: f64,
    end: f64,
    samples: usize,
    dim: usize,
    deg: usize,
    signature: Vec<f64>,
}

fn signature_cmd(args: SignatureArgs, cfg: &Config) -> Result<(), Failure> {
    let deg: usize = cfg.pick(args.deg, "deg")?.unwrap_or(3);
    let start: f64 = cfg.pick(args.start, "start")?.unwrap_or(0.0);
    let end_flag: Option<f64> = cfg.pick(args.end, "end")?;
    let normalize = args.normalize || cfg.get::<bool>("normalize")?.unwrap_or(false);
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    if deg == 0 || deg > signature::MAX_DEGREE {
        return Err(usage(format!("--deg must be in 1..={}", signature::MAX_DEGREE)));
    }
    let recording = load_input(args.input, cfg)?;
    let rate = recording.rate();
    let end = end_flag.unwrap_or(recording.duration());
    if !(start >= 0.0 && start < end) {
        return Err(usage(format!("need 0 <= start < end, got start={start} end={end}")));
    }
    let first = (start * rate).ceil() as usize;
    let last = ((end * rate).ceil() as usize).min(recording.sample_count());
    if last <= first {
        return Err(runtime(format!("no samples in [{start}, {end})")));
    }
    let times: Vec<f64> = (first..last).map(|i| i as f64 / rate).collect();
    let columns: Vec<&[f64]> = recording.samples().iter().map(|row| &row[first..last]).collect();
    let mut path = signature::time_augment(&SigPath::from_columns(times, &columns)?);
    if normalize {
        path = signature::normalize_path(&path);
    }
    let sig = signature::path_signature(&path, deg)?;
    let dump = SignatureDump {
        channels: recording.channel_names(),
        start,
        end,
        samples: last - first,
        dim: sig.dim(),
        deg,
        signature: sig.flatten(),
    };
    let mut w = open_out(out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &dump)?;
    writeln!(w)?;
    finish(w, out.as_deref())
}

#[derive(Serialize)]
struct SimplexDump<'a> {
    vertices: &'a [usize],
    channels: Vec<&'a str>,
    weight: f64,
    birth: f64,
}

#[derive(Serialize)]
struct ComplexDump<'a> {
    t: f64,
    window: [f64; 2],
    channels: &'a [String],
    simplices: Vec<SimplexDump<'a>>,
    edges: usize,
    triangles: usize,
    diagram: &'a PersistenceDiagram,
    betti: BettiVector,
    pe: EntropySummary,
}

fn complex_at(args: ComplexAtArgs, cfg: &Config) -> Result<(), Failure> {
    let mut config = base_config(args.model, cfg)?;
    let d = AnalysisConfig::default();
    config.lambda1 = cfg.pick(args.lambda1, "lambda1")?.unwrap_or(d.lambda1);
    config.lambda2 = cfg.pick(args.lambda2, "lambda2")?.unwrap_or(d.lambda2);
    config.window = cfg.pick(args.window, "window")?.unwrap_or(d.window);
    let t: f64 = cfg.pick(args.t, "t")?.ok_or_else(|| usage("missing --t"))?;
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    let config = checked(config)?;
    let recording = load_input(args.input, cfg)?;
    let rate = recording.rate();
    let end = (t * rate).round();
    if end < 0.0 || (end - t * rate).abs() > 1e-9 * (1.0 + t * rate) {
        return Err(pipeline::PipelineError::NoSuchWindow(t).into());
    }
    let analysis = pipeline::analyze_window(&recording, end as usize, &config)?;
    let names = recording.channel_names();
    let complex = &analysis.build.complex;
    let simplices = analysis
        .summary
        .filtration
        .entries()
        .iter()
        .map(|e| SimplexDump {
            vertices: e.simplex.vertices(),
            channels: e.simplex.vertices().iter().map(|&v| names[v].as_str()).collect(),
            weight: complex.weight(&e.simplex).unwrap_or(0.0),
            birth: e.birth,
        })
        .collect();
    let point = analysis.point();
    let dump = ComplexDump {
        t: analysis.t,
        window: [(end as usize - config.window) as f64 / rate, analysis.t],
        channels: names,
        simplices,
        edges: point.edges,
        triangles: point.triangles,
        diagram: &analysis.summary.diagram,
        betti: analysis.summary.betti,
        pe: analysis.summary.entropy,
    };
    let mut w = open_out(out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &dump)?;
    writeln!(w)?;
    finish(w, out.as_deref())
}

fn synth(args: SynthArgs, cfg: &Config) -> Result<(), Failure> {
    let d = SynthSpec::default();
    let rate: f64 = cfg.pick(args.rate, "rate")?.unwrap_or(d.rate);
    let duration: f64 = cfg.pick(args.duration, "duration")?.unwrap_or(d.samples as f64 / d.rate);
    let spec = SynthSpec {
        blocks: cfg.pick_list(args.blocks, "blocks")?.unwrap_or(d.blocks),
        noise: cfg.pick(args.noise, "noise")?.unwrap_or(d.noise),
        cross_mix: cfg.pick(args.cross_mix, "cross-mix")?.unwrap_or(d.cross_mix),
        samples: (duration * rate).round() as usize,
        rate,
        seed: cfg.pick(args.seed, "seed")?.unwrap_or(d.seed),
    };
    if spec.blocks.is_empty() || spec.blocks.contains(&0) {
        return Err(usage("--blocks needs at least one non-empty block"));
    }
    if !(rate.is_finite() && rate > 0.0) || !(duration.is_finite() && duration > 0.0) || spec.samples == 0 {
        return Err(usage("--rate and --duration must be positive"));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) || !spec.cross_mix.is_finite() {
        return Err(usage("--noise must be >= 0 and --cross-mix finite"));
    }
    let out: Option<PathBuf> = cfg.pick(args.out, "out")?;
    let recording = pipeline::synth_generate(&spec);
    let mut w = open_out(out.as_deref())?;
    ingest::write_csv(&recording, &mut w)
        .map_err(|e| runtime(format!("{}: {e}", out.as_deref().map_or("stdout".into(), |p| p.display().to_string()))))?;
    finish(w, out.as_deref())
}

/// File name of one sweep cell.
pub fn sweep_file_name(lambda1: f64, lambda2: f64, window: usize, format: OutputFormat) -> String {
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::JsonLines => "jsonl",
    };
    format!(
        "l1_{}_l2_{}_L_{window}.{ext}",
        pipeline::format_number(lambda1),
        pipeline::format_number(lambda2)
    )
}

fn sweep(args: SweepArgs, cfg: &Config) -> Result<(), Failure> {
    let base = base_config(args.model, cfg)?;
    let lambda1s: Vec<f64> = cfg.pick_list(args.lambda1, "lambda1")?.unwrap_or_else(|| vec![1.0, 1e4]);
    let lambda2s: Vec<f64> = cfg.pick_list(args.lambda2, "lambda2")?.unwrap_or_else(|| vec![1.0, 1e4]);
    let windows: Vec<usize> = cfg.pick_list(args.window, "window")?.unwrap_or_else(|| vec![50]);
    let format = cfg.pick(args.format, "format")?.unwrap_or(OutputFormat::Csv);
    let out_dir: PathBuf = cfg.pick(args.out_dir, "out-dir")?.ok_or_else(|| usage("missing --out-dir"))?;
    let mut cells = Vec::new();
    for &window in &windows {
        for &lambda1 in &lambda1s {
            for &lambda2 in &lambda2s {
                cells.push(checked(AnalysisConfig { lambda1, lambda2, window, ..base.clone() })?);
            }
        }
    }
    let recording = load_input(args.input, cfg)?;
    fs::create_dir_all(&out_dir).map_err(|e| runtime(format!("{}: {e}", out_dir.display())))?;
    for config in cells {
        let name = sweep_file_name(config.lambda1, config.lambda2, config.window, format);
        log::info!("sweep cell {name}");
        let trajectory = pipeline::sliding_analysis(&recording, &config)?;
        pipeline::emit_to_path(&trajectory, None, None, format, &out_dir.join(&name))?;
    }
    Ok(())
}
