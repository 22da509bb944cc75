//! Command-line surface: exact predictions, counts simulation, report
//! analysis, bound verification, settings optimization, and delay scans.
//!
//! Exit codes: 0 success, 2 usage or parse problems, 3 infeasible noise
//! model, 4 internal invariant breach.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bellsim_core::{
    chsh_lhv_report, conditioned_lhv_report, delay_scan, fit_noise, ghz_state, mermin_lhv_report,
    probability_table, sample_counts, sample_counts_poisson_total, tsirelson_multistart,
    CountsTable, DelayModel, Error as CoreError, EstimateWithError, InequalityReport,
    MeasurementConfig, MixedState, NoiseModel, ProbabilityTable, ReportMetadata, StreamKey,
    TsirelsonResult,
};

const STANDARD_CONFIGS: [&str; 5] = ["XXX", "XYY", "YXY", "YYX", "YYY"];

/// Published component estimates used by `analyze --paper-fixtures` to
/// regression-test the propagation chain without counts files.
const FIXTURE_P_XX: (f64, f64) = (0.738, 0.012);
const FIXTURE_P_XY: (f64, f64) = (0.072, 0.007);
const FIXTURE_P_YY: (f64, f64) = (0.254, 0.011);
const FIXTURE_MERMIN: (f64, f64) = (3.57, 0.04);

#[derive(Parser)]
#[command(
    name = "bellsim",
    version,
    about = "Three-photon GHZ Bell-test simulator and analysis toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write exact outcome-probability tables of the ideal three-photon state
    Ideal(IdealArgs),
    /// Sample counts for the five standard configurations into JSON files
    Simulate(SimulateArgs),
    /// Analyze counts files (or the published fixtures) into a report
    Analyze(AnalyzeArgs),
    /// Verify the classical bounds by enumeration and the quantum bound by optimization
    Bounds(BoundsArgs),
    /// Optimize analyzer settings for the largest |CHSH| of the entangled pair
    Tsirelson(TsirelsonArgs),
    /// Emit suppressed/unsuppressed component rates across a delay scan as CSV
    DelayScan(DelayScanArgs),
}

#[derive(Args)]
struct IdealArgs {
    /// Comma-separated configuration strings over X, Y, Z (length 3), e.g. XXX,YYY
    #[arg(long, required = true, value_delimiter = ',')]
    configs: Vec<String>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Desired-to-unwanted population ratio (fit together with --visibility)
    #[arg(long)]
    ratio: Option<f64>,
    /// Suppression visibility of the H'H'V' component (fit together with --ratio)
    #[arg(long)]
    visibility: Option<f64>,
    /// Explicit weight of the coherent + component
    #[arg(long)]
    w_plus: Option<f64>,
    /// Explicit weight of the coherent - component
    #[arg(long)]
    w_minus: Option<f64>,
    /// Explicit weight of each of the six unwanted basis states
    #[arg(long)]
    eps: Option<f64>,
    /// Shots per configuration (must be positive)
    #[arg(long)]
    shots: u64,
    /// RNG seed
    #[arg(long, env = "BELLSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Draw each configuration's total from a Poisson distribution
    #[arg(long)]
    poisson_totals: bool,
    /// Output directory for the five counts files and the manifest
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Counts files (five configurations, or four with --mermin-only)
    files: Vec<PathBuf>,
    /// Only evaluate the Mermin combination (YYY not required)
    #[arg(long)]
    mermin_only: bool,
    /// Use the published component estimates instead of counts files
    #[arg(long)]
    paper_fixtures: bool,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Tolerance of the settings optimizer
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Optimizer restarts
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// RNG seed for the optimizer restarts
    #[arg(long, env = "BELLSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TsirelsonArgs {
    /// Optimization tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Restarts of the coordinate-ascent search
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// RNG seed for the restarts
    #[arg(long, env = "BELLSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DelayScanArgs {
    /// First delay position
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    /// Last delay position (inclusive)
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    /// Position step (positive)
    #[arg(long)]
    step: f64,
    /// Peak visibility at zero delay
    #[arg(long)]
    visibility: f64,
    /// Coherence width of the Gaussian envelope, in delay units
    #[arg(long)]
    width: f64,
    /// Population ratio fixing the unwanted-state weight (pure coherence when omitted)
    #[arg(long)]
    ratio: Option<f64>,
    /// Shots per position (0 = analytic rates)
    #[arg(long, default_value_t = 0)]
    shots: u64,
    /// RNG seed for sampled scans
    #[arg(long, env = "BELLSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ideal(args) => cmd_ideal(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Tsirelson(args) => cmd_tsirelson(args),
        Command::DelayScan(args) => cmd_delay_scan(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::InfeasibleModel(_)) => 3,
        Some(CoreError::Internal(_)) => 4,
        _ => 2,
    }
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, contents)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{contents}"),
    }
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut rendered = serde_json::to_string_pretty(value)?;
    rendered.push('\n');
    Ok(rendered)
}

fn cmd_ideal(args: IdealArgs) -> Result<()> {
    let state = MixedState::pure(ghz_state(3)?);
    let mut tables: Vec<ProbabilityTable> = Vec::with_capacity(args.configs.len());
    for label in &args.configs {
        if label.len() != 3 {
            bail!("configuration \"{label}\" must have exactly 3 settings");
        }
        let config = MeasurementConfig::from_label(label)
            .with_context(|| format!("configuration \"{label}\""))?;
        tables.push(probability_table(&state, &config)?);
    }
    write_output(args.out.as_deref(), &to_pretty_json(&tables)?)
}

fn simulate_noise(args: &SimulateArgs) -> Result<NoiseModel> {
    match (args.ratio, args.visibility, args.w_plus, args.w_minus, args.eps) {
        (Some(ratio), Some(visibility), None, None, None) => Ok(fit_noise(ratio, visibility)?),
        (None, None, Some(w_plus), Some(w_minus), Some(eps)) => {
            Ok(NoiseModel::new(w_plus, w_minus, eps)?)
        }
        _ => bail!(
            "specify the noise model either as --ratio with --visibility or as \
             --w-plus, --w-minus and --eps"
        ),
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    config: String,
    path: String,
}

#[derive(Serialize)]
struct Manifest {
    tool_version: String,
    seed: u64,
    shots: u64,
    poisson_totals: bool,
    noise: NoiseModel,
    files: Vec<ManifestEntry>,
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    if args.shots == 0 {
        bail!("--shots must be positive");
    }
    let noise = simulate_noise(&args)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut files = Vec::with_capacity(STANDARD_CONFIGS.len());
    for (lane, label) in STANDARD_CONFIGS.iter().enumerate() {
        let config = MeasurementConfig::from_label(label)?;
        let key = StreamKey::new(args.seed, lane as u64);
        let counts = if args.poisson_totals {
            sample_counts_poisson_total(&noise, &config, args.shots, key)?
        } else {
            sample_counts(&noise, &config, args.shots, key)?
        };
        let file_name = format!("counts_{label}.json");
        fs::write(args.out.join(&file_name), to_pretty_json(&counts)?)
            .with_context(|| format!("writing {file_name}"))?;
        files.push(ManifestEntry { config: label.to_string(), path: file_name });
    }
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed,
        shots: args.shots,
        poisson_totals: args.poisson_totals,
        noise,
        files,
    };
    fs::write(args.out.join("manifest.json"), to_pretty_json(&manifest)?)
        .context("writing manifest.json")?;
    Ok(())
}

fn load_counts(path: &Path) -> Result<CountsTable> {
    let raw = fs::read_to_string(path)
        .with_context(|| format!("{}: cannot read file", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("{}: invalid counts table", path.display()))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let report = if args.paper_fixtures {
        if !args.files.is_empty() {
            bail!("--paper-fixtures does not take counts files");
        }
        InequalityReport::from_components(
            EstimateWithError::new(FIXTURE_P_XX.0, FIXTURE_P_XX.1),
            EstimateWithError::new(FIXTURE_P_XY.0, FIXTURE_P_XY.1),
            EstimateWithError::new(FIXTURE_P_YY.0, FIXTURE_P_YY.1),
            EstimateWithError::new(FIXTURE_MERMIN.0, FIXTURE_MERMIN.1),
            ReportMetadata::current(),
        )
    } else {
        if args.files.is_empty() {
            bail!("no counts files given (or use --paper-fixtures)");
        }
        let tables: Vec<CountsTable> =
            args.files.iter().map(|p| load_counts(p)).collect::<Result<_>>()?;
        let mut metadata = ReportMetadata::current();
        let shots = tables[0].shots();
        if tables.iter().all(|t| t.shots() == shots) {
            metadata = metadata.with_shots(shots);
        }
        if args.mermin_only {
            InequalityReport::mermin_only(&tables, metadata)?
        } else {
            InequalityReport::from_tables(&tables, metadata)?
        }
    };
    write_output(args.out.as_deref(), &to_pretty_json(&report)?)
}

#[derive(Serialize)]
struct BoundsReport {
    chsh_lhv: f64,
    mermin_lhv: f64,
    conditioned_max: f64,
    cirelson: f64,
    chsh_detail: bellsim_core::lhv::ChshLhvReport,
    mermin_detail: bellsim_core::lhv::MerminLhvReport,
    conditioned_detail: bellsim_core::lhv::ConditionedLhvReport,
    tsirelson: TsirelsonResult,
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let chsh_detail = chsh_lhv_report();
    let mermin_detail = mermin_lhv_report();
    let conditioned_detail = conditioned_lhv_report();
    let tsirelson =
        tsirelson_multistart(&bellsim_core::epr_pair(), args.tol, args.restarts, args.seed)?;
    let report = BoundsReport {
        chsh_lhv: chsh_detail.max_abs,
        mermin_lhv: mermin_detail.max_abs,
        conditioned_max: conditioned_detail.max_s_prob_lower,
        cirelson: tsirelson.max_abs,
        chsh_detail,
        mermin_detail,
        conditioned_detail,
        tsirelson,
    };
    write_output(args.out.as_deref(), &to_pretty_json(&report)?)
}

fn cmd_tsirelson(args: TsirelsonArgs) -> Result<()> {
    let result =
        tsirelson_multistart(&bellsim_core::epr_pair(), args.tol, args.restarts, args.seed)?;
    write_output(args.out.as_deref(), &to_pretty_json(&result)?)
}

fn scan_positions(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 {
        bail!("--step must be positive, got {step}");
    }
    if to < from {
        bail!("--to ({to}) is smaller than --from ({from})");
    }
    let mut positions = Vec::new();
    let mut index = 0u64;
    loop {
        let position = from + index as f64 * step;
        if position > to + step * 1e-9 {
            break;
        }
        positions.push(position);
        index += 1;
    }
    Ok(positions)
}

fn cmd_delay_scan(args: DelayScanArgs) -> Result<()> {
    let model = DelayModel::new(args.visibility, args.width)?;
    let populations = match args.ratio {
        Some(ratio) => {
            if ratio.is_nan() || ratio <= 0.0 {
                bail!("--ratio must be positive, got {}", ratio);
            }
            if ratio.is_infinite() {
                1.0
            } else {
                ratio / (ratio + 3.0)
            }
        }
        None => 1.0,
    };
    let eps = (1.0 - populations) / 6.0;
    let noise = NoiseModel::new(populations / 2.0, populations / 2.0, eps)?;
    let positions = scan_positions(args.from, args.to, args.step)?;
    let points = delay_scan(&model, &noise, &positions, args.shots, args.seed)?;
    let mut csv = String::from("delay,rate_hhh_prime,rate_hhv_prime\n");
    for p in &points {
        csv.push_str(&format!("{},{},{}\n", p.delay, p.rate_hhh_prime, p.rate_hhv_prime));
    }
    write_output(args.out.as_deref(), &csv)
}
