//! Command-line interface.
//!
//! A `--config FILE` of `key = value` lines supplies default flags: each
//! key is the long flag name of the chosen subcommand. Flags given on the
//! command line override the file.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cpi_core::{
    energy_to_power, power_to_energy, DissimilarityWeights, EnergySeries, MeterKind, MissingnessSpec, PowerSeries,
};
use serde_json::json;

use crate::eval::{evaluate, EvalConfig, EvalSeries, Method};
use crate::io::{create, read_series, write_energy, write_power};
use crate::synthetic::{generate, SyntheticConfig};
use crate::tune::{grid_search_weights, WeightGrid};

/// Seed offset for synthetic calibration series, keeping them disjoint from
/// synthetic evaluation series.
const CALIBRATION_SEED_OFFSET: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "cpi",
    version,
    about = "Energy-preserving imputation of smart-meter time series",
    args_override_self = true
)]
pub struct Cli {
    /// File of `key = value` defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for evaluate and tune-weights.
    #[arg(long, global = true, env = "CPI_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an energy CSV to power or a complete power CSV to energy.
    Convert(ConvertArgs),
    /// Remove readings from a complete energy CSV.
    InsertGaps(InsertGapsArgs),
    /// Fill missing readings of an energy CSV.
    Impute(ImputeArgs),
    /// Benchmark imputation methods on complete series.
    Evaluate(EvaluateArgs),
    /// Grid search for the dissimilarity weights.
    TuneWeights(TuneArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Energy,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Meter {
    Consumption,
    Generation,
}

impl From<Meter> for MeterKind {
    fn from(m: Meter) -> Self {
        match m {
            Meter::Consumption => MeterKind::Consumption,
            Meter::Generation => MeterKind::Generation,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Target representation.
    #[arg(long, value_enum)]
    pub to: Kind,
    /// First energy reading, kWh; required when converting to energy.
    #[arg(long)]
    pub base_energy: Option<f64>,
    #[arg(long, value_enum, default_value = "consumption")]
    pub meter_kind: Meter,
}

#[derive(Debug, Args)]
pub struct InsertGapsArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Removed runs as `start_index,start_timestamp,length` rows.
    #[arg(long)]
    pub mask: PathBuf,
    /// Share of readings to remove; values of 1 or more are percent.
    #[arg(long, value_parser = parse_share)]
    pub share: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longest gap in readings; three days by default.
    #[arg(long)]
    pub max_gap_len: Option<usize>,
    #[arg(long, default_value_t = cpi_core::synthesis::DEFAULT_SINGLE_FRACTION)]
    pub single_fraction: f64,
    #[arg(long, value_enum, default_value = "consumption")]
    pub meter_kind: Meter,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    pub input: PathBuf,
    /// Completed energy CSV.
    pub output: PathBuf,
    #[arg(long, default_value = "cpi", value_parser = parse_method)]
    pub method: Method,
    /// Dissimilarity weights `energy,weekday,season`.
    #[arg(long, default_value = "5,1,10", value_parser = parse_weights)]
    pub weights: DissimilarityWeights,
    /// Completed power CSV; `<output stem>_power.csv` by default.
    #[arg(long)]
    pub power_output: Option<PathBuf>,
    /// Per-gap JSON-lines audit; `<output stem>_audit.jsonl` by default.
    #[arg(long)]
    pub audit: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "consumption")]
    pub meter_kind: Meter,
}

#[derive(Debug, Args)]
pub struct SeriesSource {
    /// Complete energy CSVs; each file is one series.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub inputs: Vec<PathBuf>,
    /// Generate this many synthetic one-year quarter-hourly series instead.
    #[arg(long, conflicts_with = "inputs")]
    pub synthetic: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub source: SeriesSource,
    /// Shares of removed readings; values of 1 or more are percent.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,30", value_parser = parse_share)]
    pub shares: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// Comma-separated methods, or `all` for CPI and the three baselines.
    #[arg(long, default_value = "all")]
    pub method: String,
    #[arg(long, default_value = "5,1,10", value_parser = parse_weights)]
    pub weights: DissimilarityWeights,
    #[arg(long)]
    pub max_gap_len: Option<usize>,
    /// Per-cell scores CSV.
    #[arg(long, default_value = "report.csv")]
    pub report: PathBuf,
    /// Per share and method aggregates CSV.
    #[arg(long, default_value = "aggregate.csv")]
    pub aggregate: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub source: SeriesSource,
    #[arg(long, default_value = "10", value_parser = parse_share)]
    pub share: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Energy weight range `lo..hi`, inclusive.
    #[arg(long, default_value = "1..20", value_parser = parse_range)]
    pub energy_range: std::ops::RangeInclusive<u32>,
    #[arg(long, default_value = "0..10", value_parser = parse_range)]
    pub weekday_range: std::ops::RangeInclusive<u32>,
    #[arg(long, default_value = "1..20", value_parser = parse_range)]
    pub season_range: std::ops::RangeInclusive<u32>,
    /// Scores of every grid point as CSV.
    #[arg(long)]
    pub scores: Option<PathBuf>,
}

fn parse_share(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("invalid share {s:?}"))?;
    let share = if v >= 1.0 { v / 100.0 } else { v };
    if share > 0.0 && share < 1.0 {
        Ok(share)
    } else {
        Err(format!("share {s:?} must lie in (0, 100) percent"))
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_weights(s: &str) -> Result<DissimilarityWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("invalid weights {s:?}, expected e.g. 5,1,10"))?;
    match parts[..] {
        [e, w, season] => DissimilarityWeights::new(e, w, season).map_err(|e| e.to_string()),
        _ => Err(format!("expected three weights, got {s:?}")),
    }
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u32>, String> {
    let bad = || format!("invalid range {s:?}, expected lo..hi");
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn parse_methods(s: &str) -> anyhow::Result<Vec<Method>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Method::MAIN.to_vec());
    }
    s.split(',')
        .map(|m| m.trim().parse::<Method>().map_err(anyhow::Error::msg))
        .collect()
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> anyhow::Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key = value", path.display(), i + 1))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_owned()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Inserts config-file flags right after the subcommand name so that later
/// command-line flags take precedence.
pub fn expand_args(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let entries = read_config(&path)?;
    let names = ["convert", "insert-gaps", "impute", "evaluate", "tune-weights"];
    let Some(pos) = args.iter().position(|a| names.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut flags = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "false" => {}
            "true" => flags.push(OsString::from(format!("--{k}"))),
            _ => flags.push(OsString::from(format!("--{k}={v}"))),
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, flags);
    Ok(out)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists, e.g. on a second run in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Convert(a) => convert(a),
        Command::InsertGaps(a) => insert_gaps(a),
        Command::Impute(a) => impute(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::TuneWeights(a) => tune(a),
    }
}

fn read_energy(path: &Path, kind: Meter) -> anyhow::Result<EnergySeries> {
    read_series(path)
        .and_then(|s| s.into_energy(kind.into()))
        .with_context(|| format!("reading {}", path.display()))
}

fn convert(a: ConvertArgs) -> anyhow::Result<()> {
    let out = create(&a.output)?;
    match a.to {
        Kind::Power => {
            let es = read_energy(&a.input, a.meter_kind)?;
            write_power(out, &energy_to_power(&es))?;
        }
        Kind::Energy => {
            let Some(base) = a.base_energy else {
                bail!("--base-energy is required to convert power to energy");
            };
            let ps = read_series(&a.input)
                .and_then(|s| s.into_power())
                .with_context(|| format!("reading {}", a.input.display()))?;
            write_energy(out, &power_to_energy(&ps, base, a.meter_kind.into())?)?;
        }
    }
    Ok(())
}

fn insert_gaps(a: InsertGapsArgs) -> anyhow::Result<()> {
    let es = read_energy(&a.input, a.meter_kind)?;
    let max = match a.max_gap_len {
        Some(m) => m,
        None => 3 * es.resolution().slots_per_day()?,
    };
    let spec = MissingnessSpec::new(a.share, max, a.single_fraction, a.seed)?;
    let (degraded, mask) = cpi_core::insert_missing(&es, &spec)?;
    write_energy(create(&a.output)?, &degraded)?;
    let mut csv = csv::Writer::from_writer(create(&a.mask)?);
    csv.write_record(["start_index", "start_timestamp", "length"])?;
    for &(start, len) in &mask.runs {
        csv.write_record([
            start.to_string(),
            es.timestamp(start).format("%Y-%m-%dT%H:%M:%S").to_string(),
            len.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}{suffix}"))
}

/// Completed readings: present readings are kept, missing ones integrate
/// `power` from the nearest present reading on the left, or on the right
/// for a leading gap.
pub fn fill_energy(es: &EnergySeries, power: &PowerSeries) -> EnergySeries {
    let dt = es.resolution().hours();
    let p = |j: usize| power.get(j).unwrap_or(0.0);
    let mut values = es.values().to_vec();
    let first = values.iter().position(Option::is_some).expect("energy series has a present reading");
    for i in (0..first).rev() {
        values[i] = Some(values[i + 1].unwrap() - p(i) * dt);
    }
    for i in first + 1..values.len() {
        if values[i].is_none() {
            values[i] = Some(values[i - 1].unwrap() + p(i - 1) * dt);
        }
    }
    let kind = es.kind();
    EnergySeries::with_tolerance(es.start(), es.resolution(), values.clone(), kind, es.tolerance())
        .or_else(|_| EnergySeries::new(es.start(), es.resolution(), values, MeterKind::Generation))
        .expect("finite non-empty readings")
}

fn timestamp(ps: &PowerSeries, j: usize) -> String {
    ps.timestamp(j).format("%Y-%m-%dT%H:%M:%S").to_string()
}

fn impute(a: ImputeArgs) -> anyhow::Result<()> {
    let es = read_energy(&a.input, a.meter_kind)?;
    let power_path = a.power_output.unwrap_or_else(|| sibling(&a.output, "_power.csv"));
    let audit_path = a.audit.unwrap_or_else(|| sibling(&a.output, "_audit.jsonl"));
    let mut audit = Vec::new();

    let (energy, power) = match a.method {
        Method::Cpi | Method::CpiUnscaled => {
            let config = cpi_core::CpiConfig {
                scale: a.method == Method::Cpi,
            };
            let out = cpi_core::impute_cpi(&es, &a.weights, config)?;
            for &i in &out.interpolated {
                audit.push(json!({
                    "kind": "interpolated",
                    "reading": i,
                    "timestamp": es.timestamp(i).format("%Y-%m-%dT%H:%M:%S").to_string(),
                }));
            }
            let dt = es.resolution().hours();
            for g in &out.per_gap {
                let span = g.gap.power_span();
                let imputed: f64 = span.clone().map(|j| out.completed_power.get(j).unwrap_or(0.0)).sum::<f64>() * dt;
                let targets: Vec<String> = out
                    .matches
                    .iter()
                    .filter(|m| {
                        let first = out.completed_power.timestamp(*span.start()).date();
                        let last = out.completed_power.timestamp(*span.end()).date();
                        (first..=last).contains(&m.target)
                    })
                    .map(|m| m.target.to_string())
                    .collect();
                audit.push(json!({
                    "kind": "gap",
                    "method": a.method.name(),
                    "first_missing_reading": g.gap.first_missing,
                    "last_missing_reading": g.gap.last_missing,
                    "start": timestamp(&out.completed_power, *span.start()),
                    "end": timestamp(&out.completed_power, *span.end()),
                    "anchored": g.anchored(),
                    "actual_energy": g.gap.actual_energy(),
                    "pasted_energy": g.pasted_energy,
                    "imputed_energy": imputed,
                    "scale_factor": g.scale_factor,
                    "adjustment": format!("{:?}", g.adjustment),
                    "target_days": targets,
                    "matched_days": g.matched_dates.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                }));
            }
            if out.pattern_fallback {
                log::warn!("weekly pattern could not be fitted; multi-day gaps split proportionally");
            }
            (out.completed_energy, out.completed_power)
        }
        method => {
            let power = method.impute(&es, &a.weights)?;
            let dt = es.resolution().hours();
            for g in cpi_core::detect_gaps(&es) {
                let span = g.power_span();
                let imputed: f64 = span.clone().map(|j| power.get(j).unwrap_or(0.0)).sum::<f64>() * dt;
                audit.push(json!({
                    "kind": "gap",
                    "method": method.name(),
                    "first_missing_reading": g.first_missing,
                    "last_missing_reading": g.last_missing,
                    "start": timestamp(&power, *span.start()),
                    "end": timestamp(&power, *span.end()),
                    "anchored": g.is_anchored(),
                    "actual_energy": g.actual_energy(),
                    "imputed_energy": imputed,
                }));
            }
            (fill_energy(&es, &power), power)
        }
    };

    write_energy(create(&a.output)?, &energy)?;
    write_power(create(&power_path)?, &power)?;
    let mut w = create(&audit_path)?;
    for line in &audit {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

fn load_series(source: &SeriesSource, seed_offset: u64) -> anyhow::Result<Vec<EvalSeries>> {
    if let Some(n) = source.synthetic {
        let cfg = SyntheticConfig::quarter_hourly_year();
        return Ok((0..n as u64)
            .map(|i| EvalSeries {
                id: format!("synthetic-{i}"),
                series: generate(&cfg, seed_offset + i),
            })
            .collect());
    }
    if source.inputs.is_empty() {
        bail!("no input series: pass --inputs FILE... or --synthetic N");
    }
    source
        .inputs
        .iter()
        .map(|p| {
            let series = read_energy(p, Meter::Consumption)?;
            if !series.is_complete() {
                bail!("{}: series has missing readings; evaluation needs complete ground truth", p.display());
            }
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(EvalSeries { id, series })
        })
        .collect()
}

fn run_evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    let series = load_series(&a.source, 0)?;
    let mut config = EvalConfig::new(a.shares, a.seeds, parse_methods(&a.method)?);
    config.weights = a.weights;
    config.max_gap_len = a.max_gap_len;
    let report = evaluate(&series, &config);
    report.write_scores(create(&a.report)?)?;
    report.write_aggregates(create(&a.aggregate)?)?;

    let failed = report.scores.iter().filter(|s| s.error.is_some()).count();
    println!("share,method,mape_p,wape_e,runtime_s_mean,trimmed");
    for agg in &report.aggregates {
        println!(
            "{},{},{:.6},{:.6e},{:.4},{}",
            agg.share, agg.method, agg.mape_p, agg.wape_e, agg.runtime_s_mean, agg.trimmed
        );
    }
    if config.methods.contains(&Method::Cpi) {
        for &share in &config.shares {
            for &m in config.methods.iter().filter(|&&m| m != Method::Cpi) {
                if let Some(imp) = report.improvement(share, Method::Cpi, m) {
                    println!("# share {share}: cpi MAPE {:+.2}% relative to {m}", -100.0 * imp);
                }
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} cells failed; see log output");
    }
    Ok(())
}

fn tune(a: TuneArgs) -> anyhow::Result<()> {
    let series = load_series(&a.source, CALIBRATION_SEED_OFFSET)?;
    let grid = WeightGrid {
        energy: a.energy_range,
        weekday: a.weekday_range,
        season: a.season_range,
    };
    let result = grid_search_weights(&series, &grid, a.share, a.seed)?;
    if let Some(path) = &a.scores {
        result.write_scores(create(path)?)?;
    }
    let [e, w, s] = result.best_point;
    println!("{e},{w},{s}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn share_parsing() {
        assert_eq!(parse_share("10").unwrap(), 0.1);
        assert_eq!(parse_share("0.2").unwrap(), 0.2);
        assert_eq!(parse_share("1").unwrap(), 0.01);
        assert!(parse_share("0").is_err());
        assert!(parse_share("100").is_err());
        assert!(parse_share("x").is_err());
    }

    #[test]
    fn weight_and_range_parsing() {
        assert_eq!(parse_weights("5,1,10").unwrap(), DissimilarityWeights::default());
        assert!(parse_weights("5,1").is_err());
        assert!(parse_weights("0,0,0").is_err());
        assert_eq!(parse_range("1..20").unwrap(), 1..=20);
        assert_eq!(parse_range("0..=10").unwrap(), 0..=10);
        assert!(parse_range("5..1").is_err());
    }

    #[test]
    fn config_flags_precede_command_line_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        std::fs::write(&cfg, "# defaults\nweights = 1,2,3\nmethod = linear\n").unwrap();
        let args: Vec<OsString> = ["cpi", "--config", cfg.to_str().unwrap(), "impute", "in.csv", "out.csv", "--method", "cpi"]
            .iter()
            .map(OsString::from)
            .collect();
        let cli = Cli::try_parse_from(expand_args(args).unwrap()).unwrap();
        let Command::Impute(a) = cli.command else { panic!() };
        assert_eq!(a.method, Method::Cpi);
        assert_eq!(a.weights, DissimilarityWeights::new(1.0, 2.0, 3.0).unwrap());
    }

    #[test]
    fn fill_energy_keeps_present_readings() {
        let start = chrono::NaiveDate::from_ymd_opt(2012, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let res = cpi_core::Resolution::from_minutes(60).unwrap();
        let es = EnergySeries::new(start, res, vec![None, Some(1.0), None, Some(5.0)], MeterKind::Consumption).unwrap();
        let ps = PowerSeries::from_complete(start, res, vec![1.0, 3.0, 1.0]).unwrap();
        let filled = fill_energy(&es, &ps);
        assert_eq!(filled.values(), &[Some(0.0), Some(1.0), Some(4.0), Some(5.0)]);
    }
}
