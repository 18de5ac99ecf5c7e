//! Command-line front end: `gen`, `table`, `sim`, `dse` and `report`.
//!
//! Every flag can also come from a JSON file passed with `--config`; flags
//! win over the file. The output directory falls back to `$SGS_OUT_DIR`, then
//! `./out`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::accel::{roofline_rows, write_roofline_csv, AccelModel, HardwareConfig};
use crate::dse::{sweep, write_dse_csv, CachePolicy, Grid, SweepConfig};
use crate::sched::{InitialCache, Policy, SchedulerConfig, Window};
use crate::sim::{aggregate, generate_trace, read_records, replay, write_records, QueryTrace, TraceMix};
use crate::supernet::{
    common_core, enumerate_subnets, load_picks, load_subgraphs, load_subnets, load_supernet, save_subgraphs,
    save_subnets, SubGraphDescriptor, SubNetDescriptor, SuperNet,
};
use crate::table::{build_candidate_set, build_table, CandidateParams, CandidateSet, LatencyTable};
use crate::{Error, Result};

pub const OUT_DIR_ENV: &str = "SGS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "sgsim", version, about = "SubGraph-stationary SuperNet serving simulator")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Materialize subnet and subgraph descriptor files from picks.
    Gen(GenArgs),
    /// Build the candidate set and latency table.
    Table(TableArgs),
    /// Replay a query trace through the scheduler.
    Sim(SimArgs),
    /// Sweep PB size, bandwidth and throughput.
    Dse(DseArgs),
    /// Emit plot-ready CSVs.
    Report(ReportArgs),
}

#[derive(Debug, Args, Default)]
pub struct GenArgs {
    #[arg(long)]
    pub supernet: Option<PathBuf>,
    #[arg(long)]
    pub picks: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct TableArgs {
    #[arg(long)]
    pub supernet: Option<PathBuf>,
    #[arg(long)]
    pub subnets: Option<PathBuf>,
    #[arg(long)]
    pub hw: Option<PathBuf>,
    #[arg(long)]
    pub max_columns: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SimArgs {
    #[arg(long)]
    pub supernet: Option<PathBuf>,
    #[arg(long)]
    pub subnets: Option<PathBuf>,
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub hw: Option<PathBuf>,
    /// Existing trace.csv; generated when absent.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<usize>,
    /// uniform, accuracy, latency or bursty.
    #[arg(long)]
    pub mix: Option<String>,
    #[arg(long)]
    pub burst: Option<usize>,
    #[arg(long, value_enum)]
    pub policy: Option<Policy>,
    /// Cache window Q; a comma list sweeps it (`1,2,4,8,10`), `inf` never updates.
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<Window>>,
    /// Fixed initial cache index instead of a seeded random one.
    #[arg(long)]
    pub initial_cache: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct DseArgs {
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long)]
    pub supernet: Option<PathBuf>,
    #[arg(long)]
    pub subnets: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<usize>,
    #[arg(long)]
    pub mix: Option<String>,
    #[arg(long)]
    pub burst: Option<usize>,
    #[arg(long, value_enum)]
    pub cache: Option<CachePolicy>,
    #[arg(long, value_enum)]
    pub policy: Option<Policy>,
    #[arg(long)]
    pub max_columns: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(subcommand)]
    pub kind: ReportKind,
}

#[derive(Debug, Subcommand)]
pub enum ReportKind {
    /// Per-layer AI and boundedness with and without a cached subgraph.
    Roofline(RooflineArgs),
    /// Served latency vs accuracy, one row per query.
    Scatter(ScatterArgs),
}

#[derive(Debug, Args, Default)]
pub struct RooflineArgs {
    #[arg(long)]
    pub supernet: Option<PathBuf>,
    #[arg(long)]
    pub subnets: Option<PathBuf>,
    #[arg(long)]
    pub hw: Option<PathBuf>,
    /// Subnet id; defaults to the first.
    #[arg(long)]
    pub subnet: Option<String>,
    /// Subgraph file to take the cached subgraph from; defaults to the common core.
    #[arg(long)]
    pub subgraphs: Option<PathBuf>,
    /// Subgraph id within `--subgraphs`; defaults to the first.
    #[arg(long)]
    pub cached: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ScatterArgs {
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Values from `--config`; keys match the long flag names with `_`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub supernet: Option<PathBuf>,
    pub picks: Option<PathBuf>,
    pub subnets: Option<PathBuf>,
    pub subgraphs: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub hw: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub grid: Option<PathBuf>,
    pub max_columns: Option<usize>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub queries: Option<usize>,
    pub mix: Option<String>,
    pub burst: Option<usize>,
    pub policy: Option<Policy>,
    pub window: Option<Vec<Window>>,
    pub initial_cache: Option<usize>,
    pub cache: Option<CachePolicy>,
    pub subnet: Option<String>,
    pub cached: Option<String>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

fn need<T>(flag: Option<T>, cfg: &Option<T>, name: &str) -> Result<T>
where
    T: Clone,
{
    flag.or_else(|| cfg.clone())
        .ok_or_else(|| Error::config(format!("missing --{}", name.replace('_', "-"))))
}

fn or<T: Clone>(flag: Option<T>, cfg: &Option<T>, default: T) -> T {
    flag.or_else(|| cfg.clone()).unwrap_or(default)
}

fn out_dir(flag: Option<PathBuf>, cfg: &Settings) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn load_hw(path: &Path) -> Result<HardwareConfig> {
    let text = fs::read_to_string(path)?;
    HardwareConfig::from_json(&text).map_err(|e| Error::parse(path, e.to_string()))
}

fn write_summary(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(a, &cfg),
        Command::Table(a) => cmd_table(a, &cfg),
        Command::Sim(a) => cmd_sim(a, &cfg),
        Command::Dse(a) => cmd_dse(a, &cfg),
        Command::Report(ReportArgs {
            kind: ReportKind::Roofline(a),
        }) => cmd_report_roofline(a, &cfg),
        Command::Report(ReportArgs {
            kind: ReportKind::Scatter(a),
        }) => cmd_report_scatter(a, &cfg),
    }
}

/// Writes `subnets.json` and `subgraphs.json` (the common core).
pub fn cmd_gen(a: GenArgs, cfg: &Settings) -> Result<()> {
    let net = load_supernet(&need(a.supernet, &cfg.supernet, "supernet")?)?;
    let picks_path = need(a.picks, &cfg.picks, "picks")?;
    let picks = load_picks(&picks_path)?;
    if picks.supernet != net.name() {
        return Err(Error::parse(
            &picks_path,
            format!("picks are for supernet `{}`, not `{}`", picks.supernet, net.name()),
        ));
    }
    let out = out_dir(a.out, cfg)?;
    let subnets = enumerate_subnets(&net, &picks.picks)?;
    let core = common_core(subnets.iter().map(|s| &s.shape))?.expect("at least one pick");
    let core = SubGraphDescriptor::new(&net, "core", core)?;
    save_subnets(&net, &subnets, &out.join("subnets.json"))?;
    save_subgraphs(&net, std::slice::from_ref(&core), None, &out.join("subgraphs.json"))?;
    println!(
        "{} subnets, {}..{} bytes; common core {} bytes -> {}",
        subnets.len(),
        subnets.iter().map(|s| s.weight_bytes).min().unwrap_or(0),
        subnets.iter().map(|s| s.weight_bytes).max().unwrap_or(0),
        core.weight_bytes,
        out.display()
    );
    Ok(())
}

fn load_net_and_subnets(
    supernet: Option<PathBuf>,
    subnets: Option<PathBuf>,
    cfg: &Settings,
) -> Result<(SuperNet, Vec<SubNetDescriptor>)> {
    let net = load_supernet(&need(supernet, &cfg.supernet, "supernet")?)?;
    let subnets = load_subnets(&net, &need(subnets, &cfg.subnets, "subnets")?)?;
    Ok((net, subnets))
}

/// Writes `candidates.json`, `table.txt` and `table.csv`.
pub fn cmd_table(a: TableArgs, cfg: &Settings) -> Result<()> {
    let (net, subnets) = load_net_and_subnets(a.supernet, a.subnets, cfg)?;
    let hw = load_hw(&need(a.hw, &cfg.hw, "hw")?)?;
    let defaults = CandidateParams::default();
    let params = CandidateParams {
        max_columns: or(a.max_columns, &cfg.max_columns, defaults.max_columns),
        alpha: or(a.alpha, &cfg.alpha, defaults.alpha),
        seed: or(a.seed, &cfg.seed, defaults.seed),
        ..defaults
    };
    let out = out_dir(a.out, cfg)?;
    let set = if hw.pb_bytes == 0 {
        CandidateSet::uncached(&net)
    } else {
        build_candidate_set(&net, &subnets, &hw, &params)?
    };
    let model = AccelModel::new(&net, hw)?;
    let table = build_table(&model, &subnets, &set)?;
    save_subgraphs(&net, set.subgraphs(), Some(set.pb_bytes()), &out.join("candidates.json"))?;
    table.save(&out.join("table.txt"))?;
    table.write_csv(fs::File::create(out.join("table.csv"))?)?;
    let (lo, hi) = set.byte_range();
    println!(
        "|S| = {} columns, {lo}..{hi} bytes (PB {}); {}x{} table, hw {}",
        set.len(),
        set.pb_bytes(),
        table.n_rows(),
        table.n_cols(),
        table.fingerprint()
    );
    Ok(())
}

fn trace_for(
    path: Option<PathBuf>,
    queries: usize,
    mix: &str,
    burst: usize,
    seed: u64,
    subnets: &[SubNetDescriptor],
    table: &LatencyTable,
) -> Result<QueryTrace> {
    match path {
        Some(p) => QueryTrace::load(&p),
        None => generate_trace(subnets, table, queries, TraceMix::parse(mix, burst)?, seed),
    }
}

/// Writes `trace.csv`, then `records.csv` + `summary.json` for one window,
/// or `records_q<Q>.csv` + `summary_q<Q>.json` per window plus
/// `summary.json` holding all of them for a sweep.
pub fn cmd_sim(a: SimArgs, cfg: &Settings) -> Result<()> {
    let (net, subnets) = load_net_and_subnets(a.supernet, a.subnets, cfg)?;
    let hw = load_hw(&need(a.hw, &cfg.hw, "hw")?)?;
    let (cands, pb) = load_subgraphs(&net, &need(a.candidates, &cfg.candidates, "candidates")?)?;
    let set = CandidateSet::new(cands, pb.unwrap_or(hw.pb_bytes))?;
    let table = LatencyTable::load(&need(a.table, &cfg.table, "table")?)?;
    table.check_hardware(&hw)?;
    table.check_layout(&subnets, &set)?;
    let seed = or(a.seed, &cfg.seed, 0);
    let trace = trace_for(
        a.trace.or_else(|| cfg.trace.clone()),
        or(a.queries, &cfg.queries, 1000),
        &or(a.mix, &cfg.mix, "uniform".to_string()),
        or(a.burst, &cfg.burst, 20),
        seed,
        &subnets,
        &table,
    )?;
    let policy = or(a.policy, &cfg.policy, Policy::StrictAccuracy);
    let windows = or(a.window, &cfg.window, vec![Window::Every(10)]);
    if windows.is_empty() {
        return Err(Error::config("empty --window list"));
    }
    let initial = match a.initial_cache.or(cfg.initial_cache) {
        Some(i) => InitialCache::Index(i),
        None => InitialCache::Random(seed),
    };
    let out = out_dir(a.out, cfg)?;
    trace.save(&out.join("trace.csv"))?;
    let model = AccelModel::new(&net, hw)?;
    let mut all = Vec::new();
    for &window in &windows {
        let sc = SchedulerConfig {
            policy,
            window,
            initial,
        };
        let records = replay(&model, &table, &subnets, &set, &trace, sc)?;
        let summary = aggregate(&records)?;
        let report = serde_json::json!({
            "policy": policy,
            "window": window,
            "initial_cache": initial,
            "trace_seed": trace.seed,
            "table_fingerprint": table.fingerprint(),
            "summary": summary,
        });
        let (rec_name, sum_name) = if windows.len() == 1 {
            ("records.csv".to_string(), "summary.json".to_string())
        } else {
            (format!("records_q{window}.csv"), format!("summary_q{window}.json"))
        };
        write_records(&records, fs::File::create(out.join(rec_name))?)?;
        write_summary(&out.join(sum_name), &report)?;
        println!(
            "Q={window}: mean latency {:.6e} s, accuracy {:.4}, violations {:.3}, SLO {:.3}, hit ratio {:.3}",
            summary.mean_latency_s,
            summary.mean_accuracy,
            summary.violation_rate,
            summary.slo_attainment,
            summary.mean_hit_ratio
        );
        all.push(report);
    }
    if windows.len() > 1 {
        write_summary(&out.join("summary.json"), &all)?;
    }
    Ok(())
}

/// Writes `dse.csv`. Without `--trace`, the trace is drawn against the
/// uncached table of the first grid point.
pub fn cmd_dse(a: DseArgs, cfg: &Settings) -> Result<()> {
    let grid_path = need(a.grid, &cfg.grid, "grid")?;
    let grid: Grid = serde_json::from_str(&fs::read_to_string(&grid_path)?)
        .map_err(|e| Error::parse(&grid_path, e.to_string()))?;
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::parse(&grid_path, "empty DSE grid"));
    }
    let (net, subnets) = load_net_and_subnets(a.supernet, a.subnets, cfg)?;
    let seed = or(a.seed, &cfg.seed, 0);
    let first = HardwareConfig::new(points[0].bandwidth, points[0].throughput, 0, grid.energy_per_byte)?;
    let model = AccelModel::new(&net, first)?;
    let base = build_table(&model, &subnets, &CandidateSet::uncached(&net))?;
    let trace = trace_for(
        a.trace.or_else(|| cfg.trace.clone()),
        or(a.queries, &cfg.queries, 1000),
        &or(a.mix, &cfg.mix, "accuracy".to_string()),
        or(a.burst, &cfg.burst, 20),
        seed,
        &subnets,
        &base,
    )?;
    let defaults = CandidateParams::default();
    let config = SweepConfig {
        cache: or(a.cache, &cfg.cache, CachePolicy::StaticUnion),
        scheduler: SchedulerConfig::new(
            or(a.policy, &cfg.policy, Policy::StrictAccuracy),
            cfg.window
                .as_ref()
                .and_then(|w| w.first().copied())
                .unwrap_or(Window::Every(10)),
            seed,
        ),
        candidates: CandidateParams {
            max_columns: or(a.max_columns, &cfg.max_columns, defaults.max_columns),
            alpha: or(a.alpha, &cfg.alpha, defaults.alpha),
            seed,
            ..defaults
        },
        energy_per_byte: grid.energy_per_byte,
    };
    let rows = sweep(&net, &subnets, &points, &trace, &config)?;
    let out = out_dir(a.out, cfg)?;
    write_dse_csv(&rows, fs::File::create(out.join("dse.csv"))?)?;
    println!("{} grid points -> {}", rows.len(), out.join("dse.csv").display());
    Ok(())
}

/// Writes `roofline.csv`.
pub fn cmd_report_roofline(a: RooflineArgs, cfg: &Settings) -> Result<()> {
    let (net, subnets) = load_net_and_subnets(a.supernet, a.subnets, cfg)?;
    let hw = load_hw(&need(a.hw, &cfg.hw, "hw")?)?;
    let subnet = match a.subnet.or_else(|| cfg.subnet.clone()) {
        Some(id) => subnets
            .iter()
            .find(|s| s.id == id)
            .ok_or(Error::UnknownId { kind: "subnet", id })?,
        None => subnets.first().ok_or_else(|| Error::config("no subnets"))?,
    };
    let cached = match a.subgraphs.or_else(|| cfg.subgraphs.clone()) {
        Some(path) => {
            let (gs, _) = load_subgraphs(&net, &path)?;
            match a.cached.or_else(|| cfg.cached.clone()) {
                Some(id) => gs
                    .into_iter()
                    .find(|g| g.id == id)
                    .ok_or(Error::UnknownId { kind: "subgraph", id })?,
                None => gs.into_iter().next().ok_or_else(|| Error::parse(&path, "no subgraphs"))?,
            }
        }
        None => {
            let core = common_core(subnets.iter().map(|s| &s.shape))?.expect("non-empty");
            SubGraphDescriptor::new(&net, "core", core)?
        }
    };
    let model = AccelModel::new(&net, hw)?;
    let rows = roofline_rows(&model, subnet, &cached)?;
    let out = out_dir(a.out, cfg)?;
    write_roofline_csv(&rows, fs::File::create(out.join("roofline.csv"))?)?;
    let flips: Vec<&str> = rows.iter().filter(|r| r.flipped()).map(|r| r.layer.as_str()).collect();
    println!(
        "{} layers of `{}` with `{}` cached; {} flip to compute-bound: {}",
        rows.len(),
        subnet.id,
        cached.id,
        flips.len(),
        flips.join(" ")
    );
    Ok(())
}

pub const SCATTER_HEADER: [&str; 6] = [
    "query",
    "served_latency_s",
    "served_accuracy",
    "latency_target_s",
    "accuracy_target",
    "violated",
];

/// Writes `scatter.csv`, one row per served query.
pub fn cmd_report_scatter(a: ScatterArgs, cfg: &Settings) -> Result<()> {
    let path = need(a.records, &cfg.records, "records")?;
    let records = read_records(fs::File::open(&path)?).map_err(|e| Error::parse(&path, e.to_string()))?;
    let out = out_dir(a.out, cfg)?;
    let mut w = csv::Writer::from_path(out.join("scatter.csv"))?;
    w.write_record(SCATTER_HEADER)?;
    for r in &records {
        w.write_record([
            r.query.to_string(),
            format!("{:?}", r.served_latency_s),
            format!("{:?}", r.served_accuracy),
            format!("{:?}", r.latency_target_s),
            format!("{:?}", r.accuracy_target),
            r.violated.to_string(),
        ])?;
    }
    w.flush()?;
    println!("{} rows -> {}", records.len(), out.join("scatter.csv").display());
    Ok(())
}
