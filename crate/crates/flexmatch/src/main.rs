use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use flexmatch::config::{ConfigError, ExperimentConfig, Geometry, Mode};
use flexmatch::core::geom::{EdgeSearch, GeoBipartiteGraph, Parametrization, PointSet, ServiceRanges};
use flexmatch::core::majorize::t_transform_decompose;
use flexmatch::core::matching::{dplus, greedy_interval, hopcroft_karp};
use flexmatch::experiments::{self, bounds_at, single_point};
use flexmatch::output::{write_csv, write_json};
use serde::{Deserialize, Serialize};

const FAMILY_SCHEMA: &str = "\
CSV columns:
  family           fixed-base | fixed-extra | fixed-p
  parametrization  volume | radius
  k                dimension
  alpha            inequality parameter in [0, 1]
  mean             mean matching fraction M(G)/n over trials
  std_dev          sample standard deviation over trials
  std_err          std_dev / sqrt(trials)
  trials           number of trials
  base, extra, p   dual-range parameters at alpha
  mean_range       mean service range of the family";

const MARKOV_SCHEMA: &str = "\
CSV columns:
  sweep            name of the swept parameter series
  value            value of the swept parameter
  mean             mean exact matching fraction (Hopcroft-Karp, k = 1)
  std_dev, std_err, trials
  base, extra, p   dual-range parameters of the row
  formula          limit fraction from the lead-time chain frequencies
  closed_form      closed-form limit where one exists, else empty";

const BOUNDS_SCHEMA: &str = "\
With --config, CSV columns:
  panel            name of the parameter series
  value            value of the swept parameter
  mean             mean exact matching fraction (Hopcroft-Karp, k = 1)
  std_dev, std_err, trials
  base, extra, p   dual-range parameters of the row
  upper            upper bound
  lower            supremum lower bound over the q-grid
With --base/--extra/--p, a JSON object {base, extra, p, upper, lower}.";

const COUNTER_SCHEMA: &str = "\
CSV columns:
  allocation       uniform | concentrated
  k                dimension
  mean             mean matching fraction
  std_dev, std_err, trials
  total_budget     sum of service ranges (equal in both rows)";

const INSTANCE_HELP: &str = "\
Input JSON: {\"supply\": [[x, ...], ...], \"demand\": [[x, ...], ...],
             \"ranges\": [r, ...], \"parametrization\": \"volume\" | \"radius\",
             \"scale\": n (optional, defaults to the number of supply nodes)}";

#[derive(Parser)]
#[command(name = "flexmatch", version, about = "Spatial matching experiments with flexible service ranges")]
struct Cli {
    /// Cap on worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matching fraction against alpha for the one-parameter families.
    #[command(after_help = FAMILY_SCHEMA)]
    Sweep(ExperimentArgs),
    /// Family sweeps at k = 2 under volume and radius parametrizations.
    #[command(name = "radius-vs-volume", after_help = FAMILY_SCHEMA)]
    RadiusVsVolume(ExperimentArgs),
    /// Exact matching against the chain formula.
    #[command(after_help = MARKOV_SCHEMA)]
    Markov(DualArgs),
    /// Upper and lower bounds, alone or against simulation.
    #[command(after_help = BOUNDS_SCHEMA)]
    Bounds(DualArgs),
    /// Uniform against concentrated allocation on a two-cluster instance.
    #[command(after_help = COUNTER_SCHEMA)]
    Counterexample(ExperimentArgs),
    /// Maximum matching of an instance; writes {size, pairs} as JSON.
    #[command(name = "match", after_help = INSTANCE_HELP)]
    Match(InstanceArgs),
    /// Demand nodes left unmatched by some maximum matching; writes
    /// {indices, positions} as JSON (positions only for k = 1).
    #[command(after_help = INSTANCE_HELP)]
    Dplus(InstanceArgs),
    /// T-transform chain from x down to y; writes {steps, x_order, y_order}.
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file.
    #[arg(long, short)]
    out: PathBuf,
    /// Master seed; required unless the config provides one.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Number of supply nodes.
    #[arg(long)]
    n: Option<usize>,
    /// Number of demand nodes.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated alpha grid.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_geometry)]
    parametrization: Option<Geometry>,
}

#[derive(Args)]
struct DualArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    base: Option<f64>,
    #[arg(long)]
    extra: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Chain length for the formula estimate.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Use the one-dimensional greedy matcher instead of Hopcroft-Karp.
    #[arg(long)]
    greedy: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    y: Vec<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

fn parse_geometry(s: &str) -> Result<Geometry, String> {
    match s {
        "volume" => Ok(Geometry::Volume),
        "radius" => Ok(Geometry::Radius),
        _ => Err(format!("expected `volume` or `radius`, got `{s}`")),
    }
}

enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<ConfigError>() {
            Ok(c) => Failure::Config(c.to_string()),
            Err(e) => Failure::Runtime(e),
        }
    }
}

fn note_override<T: std::fmt::Debug + PartialEq>(name: &str, slot: &mut T, flag: Option<T>, from_file: bool) {
    if let Some(v) = flag {
        if from_file && *slot != v {
            log::info!("--{name} overrides the config value {:?} with {:?}", slot, v);
        }
        *slot = v;
    }
}

fn load_config(common: &Common, mode: Mode) -> Result<(ExperimentConfig, bool), Failure> {
    match &common.config {
        Some(path) => {
            let mut cfg = ExperimentConfig::from_path(path)?;
            if cfg.mode != mode {
                return Err(Failure::Config(format!(
                    "invalid configuration: `mode`: {} is a {:?} config, not {:?}",
                    path.display(),
                    cfg.mode,
                    mode
                )));
            }
            note_override("seed", &mut cfg.seed, common.seed, true);
            Ok((cfg, true))
        }
        None => {
            let seed = common
                .seed
                .ok_or_else(|| Failure::Config("invalid configuration: `seed`: pass --seed or --config".into()))?;
            Ok((ExperimentConfig::new(mode, seed), false))
        }
    }
}

fn apply_common(cfg: &mut ExperimentConfig, common: &Common, from_file: bool) {
    note_override("trials", &mut cfg.trials, common.trials, from_file);
    note_override("n", &mut cfg.n, common.n, from_file);
    if common.m.is_some() {
        note_override("m", &mut cfg.m, Some(common.m), from_file);
    }
}

fn experiment(args: &ExperimentArgs, mode: Mode) -> Result<(), Failure> {
    let (mut cfg, file) = load_config(&args.common, mode)?;
    apply_common(&mut cfg, &args.common, file);
    note_override("k", &mut cfg.k, args.k, file);
    note_override("alphas", &mut cfg.alphas, args.alphas.clone(), file);
    note_override("parametrization", &mut cfg.parametrization, args.parametrization, file);
    cfg.validate()?;
    let result = experiments::run(&cfg)?;
    write_csv(&result, &args.common.out)?;
    log::info!("wrote {}", args.common.out.display());
    Ok(())
}

fn dual(args: &DualArgs, mode: Mode) -> Result<(), Failure> {
    let point = match (args.base, args.extra, args.p) {
        (None, None, None) => None,
        (Some(b), Some(e), Some(p)) => Some((b, e, p)),
        _ => {
            return Err(Failure::Config("invalid configuration: `base`: give --base, --extra and --p together".into()))
        }
    };
    if mode == Mode::Bounds && args.common.config.is_none() {
        if let Some((b, e, p)) = point {
            let bounds = bounds_at(b, e, p).map_err(|e| Failure::Config(format!("invalid configuration: {e}")))?;
            write_json(&bounds, &args.common.out)?;
            return Ok(());
        }
    }
    let (mut cfg, file) = load_config(&args.common, mode)?;
    apply_common(&mut cfg, &args.common, file);
    note_override("steps", &mut cfg.steps, args.steps, file);
    if let Some((b, e, p)) = point {
        if file {
            log::info!("--base/--extra/--p replace the configured sweeps");
        }
        cfg.sweeps = Some(vec![single_point("point", b, e, p)]);
    }
    cfg.validate()?;
    let result = experiments::run(&cfg)?;
    write_csv(&result, &args.common.out)?;
    log::info!("wrote {}", args.common.out.display());
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Instance {
    supply: Vec<Vec<f64>>,
    demand: Vec<Vec<f64>>,
    ranges: Vec<f64>,
    #[serde(default)]
    parametrization: Geometry,
    #[serde(default)]
    scale: Option<f64>,
}

fn point_set(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<PointSet, Failure> {
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Failure::Config(format!(
            "invalid configuration: `{what}`: point of dimension {} among points of dimension {dim}",
            bad.len()
        )));
    }
    PointSet::from_flat(dim, rows.concat())
        .map_err(|e| Failure::Config(format!("invalid configuration: `{what}`: {e}")))
}

fn load_instance(path: &Path) -> Result<GeoBipartiteGraph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("invalid configuration: `input`: cannot read {}: {e}", path.display())))?;
    let inst: Instance = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("invalid configuration: `input`: {}: {e}", path.display())))?;
    let dim = inst.supply.first().or(inst.demand.first()).map_or(1, Vec::len);
    let supply = point_set(&inst.supply, dim, "supply")?;
    let demand = point_set(&inst.demand, dim, "demand")?;
    let ranges = ServiceRanges::tight(inst.ranges)
        .map_err(|e| Failure::Config(format!("invalid configuration: `ranges`: {e}")))?;
    let scale = inst.scale.unwrap_or(supply.len().max(1) as f64);
    let param: Parametrization = inst.parametrization.into();
    GeoBipartiteGraph::build_with(supply, ranges, demand, param, scale, EdgeSearch::Auto)
        .map_err(|e| Failure::Config(format!("invalid configuration: `input`: {e}")))
}

#[derive(Serialize)]
struct MatchOutput {
    size: usize,
    pairs: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct DplusOutput {
    indices: Vec<usize>,
    positions: Option<Vec<f64>>,
}

fn run_match(args: &InstanceArgs) -> Result<(), Failure> {
    let g = load_instance(&args.input)?;
    let m = if args.greedy { greedy_interval(&g).context("greedy matching")? } else { hopcroft_karp(&g) };
    write_json(&MatchOutput { size: m.size(), pairs: m.pairs().to_vec() }, &args.out)?;
    Ok(())
}

fn run_dplus(args: &InstanceArgs) -> Result<(), Failure> {
    let g = load_instance(&args.input)?;
    let set = dplus(&g, &hopcroft_karp(&g)).context("alternating reachability")?;
    let positions = (g.dimension() == 1).then(|| set.positions(&g));
    write_json(&DplusOutput { indices: set.indices().to_vec(), positions }, &args.out)?;
    Ok(())
}

#[derive(Serialize)]
struct StepOut {
    i: usize,
    j: usize,
    tau: f64,
}

#[derive(Serialize)]
struct DecomposeOutput {
    steps: Vec<StepOut>,
    x_order: Vec<usize>,
    y_order: Vec<usize>,
}

fn run_decompose(args: &DecomposeArgs) -> Result<(), Failure> {
    let d = t_transform_decompose(&args.x, &args.y)
        .map_err(|e| Failure::Config(format!("invalid configuration: `x`/`y`: {e}")))?;
    let out = DecomposeOutput {
        steps: d.steps.iter().map(|s| StepOut { i: s.i, j: s.j, tau: s.tau }).collect(),
        x_order: d.x_order,
        y_order: d.y_order,
    };
    write_json(&out, &args.out)?;
    Ok(())
}

fn dispatch(cmd: &Command) -> Result<(), Failure> {
    match cmd {
        Command::Sweep(a) => experiment(a, Mode::Sweep),
        Command::RadiusVsVolume(a) => experiment(a, Mode::RadiusVsVolume),
        Command::Counterexample(a) => experiment(a, Mode::Counterexample),
        Command::Markov(a) => dual(a, Mode::Markov),
        Command::Bounds(a) => dual(a, Mode::Bounds),
        Command::Match(a) => run_match(a),
        Command::Dplus(a) => run_dplus(a),
        Command::Decompose(a) => run_decompose(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stdout)
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let run = || dispatch(&cli.command);
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Config("invalid configuration: `threads`: must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Failure::Runtime(e.into())),
        },
        None => run(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
