//! Command-line front end: `tod`, `detect`, `simulate` and `validate`.

mod manifest;

pub use manifest::{sha256_hex, InputDigest, RunManifest, MANIFEST_FILE};

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::detector::{detect_jumps, DetectorConfig};
use crate::error::{Error, Result};
use crate::grid::{default_delta, load_returns, Layout, ReturnGrid, DEFAULT_SLOTS_PER_DAY};
use crate::io::{self, JumpReportRecord, TodProfileRecord};
use crate::simulator::{evaluate_indices, simulate_path, SimConfig};
use crate::tod::{cap_tod, tod_profile, DEFAULT_TRUNCATION_EXPONENT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "tod-jumps",
    version,
    about = "Threshold jump detection with a time-of-day volatility correction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the time-of-day volatility profile.
    Tod(TodArgs),
    /// Detect jumps in a return series.
    Detect(DetectArgs),
    /// Simulate a path with known jumps.
    Simulate(SimulateArgs),
    /// Score a detection run against simulated ground truth.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputLayout {
    Returns,
    Prices,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SizeModeArg {
    Det,
    Rand,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Returns file (one value per line) or prices file (`day_id,price`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "returns")]
    pub layout: InputLayout,
    /// Slots per day.
    #[arg(long, default_value_t = DEFAULT_SLOTS_PER_DAY)]
    pub m: usize,
    /// Slot length in years; defaults to 1/(252 m).
    #[arg(long)]
    pub delta: Option<f64>,
}

impl InputArgs {
    fn delta(&self) -> f64 {
        self.delta.unwrap_or_else(|| default_delta(self.m))
    }

    fn load(&self) -> Result<ReturnGrid> {
        let layout = match self.layout {
            InputLayout::Returns => Layout::Returns,
            InputLayout::Prices => Layout::Prices,
        };
        load_returns(&self.input, self.m, layout, self.delta())
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "layout": format!("{:?}", self.layout).to_lowercase(),
            "m": self.m,
            "delta": self.delta(),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct TodArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_EXPONENT)]
    pub exponent: f64,
    /// Also write the profile capped at this value.
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Write only this format; both by default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 6.0)]
    pub raw_mult: f64,
    #[arg(long, default_value_t = 2.0)]
    pub round_mult: f64,
    #[arg(long, default_value_t = 1.5)]
    pub cap: f64,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_EXPONENT)]
    pub exponent: f64,
    #[arg(long, default_value_t = 20)]
    pub max_rounds: usize,
    /// Seed for randomized jump sizes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "det")]
    pub size_mode: SizeModeArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON simulation config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hawkes baseline intensity (events per year).
    #[arg(long)]
    pub hawkes_mu: Option<f64>,
    #[arg(long)]
    pub hawkes_alpha: Option<f64>,
    #[arg(long)]
    pub hawkes_beta: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Output directory of `simulate`.
    #[arg(long)]
    pub sim_dir: PathBuf,
    /// Output directory of `detect` (needs its JSON report).
    #[arg(long)]
    pub detect_dir: PathBuf,
    /// Matching window in slots.
    #[arg(long, default_value_t = 0)]
    pub tolerance: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn wants(format: Option<Format>, f: Format) -> bool {
    format.is_none_or(|x| x == f)
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_DATA
    }
}

/// Runs a parsed command, returning the text to print on stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Tod(args) => cmd_tod(&args),
        Command::Detect(args) => cmd_detect(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Validate(args) => cmd_validate(&args),
    }
}

pub fn cmd_tod(args: &TodArgs) -> Result<String> {
    let grid = args.input.load()?;
    let profile = tod_profile(&grid, args.exponent)?;
    let capped = args.cap.map(|c| cap_tod(&profile, c)).transpose()?;

    prepare_out_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new(
        "tod",
        json!({ "input": args.input.describe(), "exponent": args.exponent, "cap": args.cap }),
        None,
    );
    manifest.add_input(&args.input.input)?;
    let dir = &args.out_dir;
    if wants(args.format, Format::Json) {
        manifest.emit(
            dir,
            "tod.json",
            &io::to_json_pretty(&TodProfileRecord::from(&profile))?,
        )?;
    }
    if wants(args.format, Format::Csv) {
        manifest.emit(dir, "tod.csv", &io::tod_csv(&profile))?;
    }
    manifest.emit(dir, "tod_plot.csv", &io::tod_plot_csv(&profile))?;
    if let Some(capped) = &capped {
        if wants(args.format, Format::Json) {
            manifest.emit(
                dir,
                "tod_capped.json",
                &io::to_json_pretty(&TodProfileRecord::from(capped))?,
            )?;
        }
        if wants(args.format, Format::Csv) {
            manifest.emit(dir, "tod_capped.csv", &io::tod_csv(capped))?;
        }
    }
    manifest.finish(dir)?;

    let mut out = format!(
        "m={} days={} bar_alpha={} returns kept={}\n",
        grid.m(),
        grid.days(),
        profile.bar_alpha,
        profile.num_noi
    );
    let undefined = profile.undefined_slots();
    if !undefined.is_empty() {
        out.push_str(&format!("warning: TOD undefined at slots {undefined:?}\n"));
    }
    Ok(out)
}

pub fn cmd_detect(args: &DetectArgs) -> Result<String> {
    let grid = args.input.load()?;
    let randomized = args.size_mode == SizeModeArg::Rand;
    let config = DetectorConfig {
        raw_multiplier: args.raw_mult,
        round_multiplier: args.round_mult,
        tod_cap: args.cap,
        max_rounds: args.max_rounds,
        truncation_exponent: args.exponent,
        size_seed: randomized.then_some(args.seed),
    };
    let report = detect_jumps(&grid, &config)?;

    prepare_out_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new(
        "detect",
        json!({
            "input": args.input.describe(),
            "detector": config,
            "size_mode": if randomized { "rand" } else { "det" },
        }),
        Some(args.seed),
    );
    manifest.add_input(&args.input.input)?;
    let dir = &args.out_dir;
    if wants(args.format, Format::Json) {
        manifest.emit(
            dir,
            "jumps.json",
            &io::to_json_pretty(&JumpReportRecord::from(&report))?,
        )?;
    }
    if wants(args.format, Format::Csv) {
        manifest.emit(dir, "jumps.csv", &io::jumps_csv(&report, randomized))?;
    }
    manifest.emit(
        dir,
        "detection_plot.csv",
        &io::detection_plot_csv(&grid, &report),
    )?;
    manifest.finish(dir)?;

    let mut out = String::new();
    for round in &report.rounds {
        out.push_str(&format!(
            "round {}: {} new jumps\n",
            round.round,
            round.new_indices.len()
        ));
    }
    out.push_str(&format!("total: {} jumps\n", report.total()));
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    Ok(out)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let mut config = match &args.config {
        Some(path) => serde_json::from_str::<SimConfig>(&io::read_file(path)?)
            .map_err(|e| Error::config("config", e.to_string()))?,
        None => SimConfig::default(),
    };
    if let Some(m) = args.m {
        config.m = m;
        if args.delta.is_none() {
            config.delta = default_delta(m);
        }
    }
    if let Some(days) = args.days {
        config.days = days;
    }
    if let Some(delta) = args.delta {
        config.delta = delta;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(mu) = args.hawkes_mu {
        config.hawkes.mu = mu;
    }
    if let Some(alpha) = args.hawkes_alpha {
        config.hawkes.alpha = alpha;
    }
    if let Some(beta) = args.hawkes_beta {
        config.hawkes.beta = beta;
    }
    let path = simulate_path(&config)?;

    prepare_out_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::to_value(&config)?,
        Some(config.seed),
    );
    if let Some(p) = &args.config {
        manifest.add_input(p)?;
    }
    let dir = &args.out_dir;
    manifest.emit(dir, "returns.txt", &io::returns_text(&path.grid))?;
    manifest.emit(dir, "truth.csv", &io::truth_csv(&path))?;
    manifest.emit(dir, "config.json", &io::to_json_pretty(&config)?)?;
    manifest.finish(dir)?;

    let mut out = format!(
        "simulated {} days x {} slots, {} jump events in {} slots\n",
        config.days,
        config.m,
        path.jump_event_times.len(),
        path.true_jump_indices.len()
    );
    for w in &path.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    Ok(out)
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<String> {
    let config_path = args.sim_dir.join("config.json");
    let truth_path = args.sim_dir.join("truth.csv");
    let report_path = args.detect_dir.join("jumps.json");

    let config: SimConfig = serde_json::from_str(&io::read_file(&config_path)?)
        .map_err(|e| Error::config("config", e.to_string()))?;
    let (truth, true_sizes) = io::parse_truth_csv(&io::read_file(&truth_path)?, &truth_path)?;
    let report: JumpReportRecord = serde_json::from_str(&io::read_file(&report_path)?)?;
    if report.m != config.m || report.days != config.days {
        return Err(Error::Structural(format!(
            "simulation is {}x{} but the report is {}x{}",
            config.m, config.days, report.m, report.days
        )));
    }
    let summary = evaluate_indices(
        &report.zero_based_indices()?,
        &report.sizes_deterministic,
        &truth,
        &true_sizes,
        args.tolerance,
    )?;

    prepare_out_dir(&args.out_dir)?;
    let mut manifest = RunManifest::new("validate", json!({ "tolerance": args.tolerance }), None);
    for p in [&config_path, &truth_path, &report_path] {
        manifest.add_input(p)?;
    }
    manifest.emit(
        &args.out_dir,
        "metrics.json",
        &io::to_json_pretty(&summary)?,
    )?;
    manifest.finish(&args.out_dir)?;

    let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.4}"));
    Ok(format!(
        "tp={} fp={} fn={} precision={} recall={}\n",
        summary.true_positives,
        summary.false_positives,
        summary.false_negatives,
        fmt(summary.precision),
        fmt(summary.recall)
    ))
}
