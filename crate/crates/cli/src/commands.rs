use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use shockrec_core::antifragility::read_statements_csv;
use shockrec_core::config::{resolve, Overrides, ResolvedScenario, ScenarioConfig};
use shockrec_core::flow::read_flow_csv;
use shockrec_core::price::write_sweep_summary;
use shockrec_core::{
    company_phi, dominance_table, emd_decompose, hilbert_transform, mean_period, net_flow,
    normalize_flow, sector_phi, shock_recovery_timescales, simulate as run_model, sweep as run_sweep,
    HhtError, PhaseKind, SiftConfig, SweepAxis, RNG_ALGORITHM,
};

use crate::error::CliError;
use crate::output::{now, sha256_hex, OutputDir, RunManifest};

pub struct Global {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub jobs: usize,
    pub preset: Option<String>,
}

fn manifest(command: &str, config_digest: String, seeds: Vec<u64>, started_at: String) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        config_digest,
        seeds,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        started_at,
        finished_at: String::new(),
        outputs: Vec::new(),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))
}

/// Parses `1-1000`, `3,7,9` or a mix such as `1-5,10`.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = |part: &str| CliError::Input(format!("invalid seed spec `{part}` in `{spec}`"));
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
                if b < a {
                    return Err(bad(part));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Input("seed list is empty".into()));
    }
    Ok(seeds)
}

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| CliError::Input(format!("invalid grid value `{p}`"))))
        .collect()
}

fn load_scenario(
    global: &Global,
    flow_file: Option<PathBuf>,
    seeds: Option<&str>,
) -> Result<ResolvedScenario, CliError> {
    let (config, base) = match &global.config {
        Some(path) => ScenarioConfig::load(path)?,
        None if global.preset.is_some() => (ScenarioConfig::default(), PathBuf::from(".")),
        None => return Err(CliError::Input("give --config or --preset".into())),
    };
    let overrides = Overrides { preset: global.preset.clone(), seed: global.seed, flow_file };
    let mut resolved = resolve(&config, &base, &overrides)?;
    if let Some(spec) = seeds {
        if global.seed.is_some() {
            return Err(CliError::Input("--seed and --seeds are mutually exclusive".into()));
        }
        resolved.seeds = parse_seeds(spec)?;
    }
    Ok(resolved)
}

fn digest<T: Serialize>(value: &T) -> Result<String, CliError> {
    let json = serde_json::to_vec(value).map_err(|e| CliError::Input(format!("hashing config: {e}")))?;
    Ok(sha256_hex(&json))
}

pub fn ingest(global: &Global, flow: Option<&Path>, statements: Option<&Path>) -> Result<(), CliError> {
    if flow.is_none() && statements.is_none() {
        return Err(CliError::Input("ingest needs --flow and/or --statements".into()));
    }
    let started = now();
    let mut inputs = Vec::new();
    let flow_bytes = flow.map(read_bytes).transpose()?;
    let statement_bytes = statements.map(read_bytes).transpose()?;
    if let Some(bytes) = &flow_bytes {
        inputs.push(("flow", sha256_hex(bytes)));
    }
    if let Some(bytes) = &statement_bytes {
        inputs.push(("statements", sha256_hex(bytes)));
    }

    let mut out = OutputDir::create(&global.out)?;
    if let (Some(path), Some(bytes)) = (flow, &flow_bytes) {
        let context = |e: shockrec_core::FlowError| CliError::Input(format!("{}: {e}", path.display()));
        let records = read_flow_csv(bytes.as_slice()).map_err(context)?;
        let normalized = normalize_flow(&net_flow(&records).map_err(context)?).map_err(context)?;
        out.write_csv("normalized_flow.csv", |buf| normalized.write_csv(buf))?;
        println!("flow: {} days normalized", normalized.len());
    }
    if let (Some(path), Some(bytes)) = (statements, &statement_bytes) {
        let context = |e: shockrec_core::PhiError| CliError::Input(format!("{}: {e}", path.display()));
        let rows = read_statements_csv(bytes.as_slice()).map_err(context)?;
        let mut companies = Vec::with_capacity(rows.len());
        for (i, (entity, statement)) in rows.iter().enumerate() {
            let phi = company_phi(statement).map_err(|e| {
                CliError::Input(format!("{}: line {} (`{entity}`): {e}", path.display(), i + 2))
            })?;
            companies.push((entity.clone(), phi));
        }
        let sector = sector_phi(&companies.iter().map(|c| c.1).collect::<Vec<_>>()).map_err(context)?;
        out.write_csv("phi.csv", |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["entity", "scope", "phi"])?;
            for (entity, phi) in &companies {
                w.write_record([entity.as_str(), "company", &phi.value.to_string()])?;
            }
            w.write_record(["", "sector", &sector.value.to_string()])?;
            w.flush()?;
            Ok(())
        })?;
        println!("phi: {} companies, sector mean {:.6}", companies.len(), sector.value);
    }
    out.finish(manifest("ingest", digest(&inputs)?, Vec::new(), started))?;
    Ok(())
}

pub fn simulate(global: &Global, flow: Option<PathBuf>, seeds: Option<&str>) -> Result<(), CliError> {
    let started = now();
    let resolved = load_scenario(global, flow, seeds)?;
    let config_digest = digest(&resolved)?;
    let mut out = OutputDir::create(&global.out)?;

    if let Some(flow) = resolved.real_flow() {
        let series = run_model(resolved.initial_price, &flow, &resolved.schedule, &resolved.phi)?;
        out.write_csv("price.csv", |buf| series.write_csv(buf))?;
        println!(
            "real flow, {} days, phi {}: terminal {:.6}, terminal/pre-shock {:.4}",
            flow.len(),
            resolved.phi.value,
            series.terminal(),
            series.terminal_ratio()
        );
        out.finish(manifest("simulate", config_digest, Vec::new(), started))?;
        return Ok(());
    }

    let scenario = resolved.synthetic().expect("flow is either real or synthetic");
    if let [seed] = resolved.seeds[..] {
        let series = scenario.run(seed)?;
        out.write_csv("price.csv", |buf| series.write_csv(buf))?;
        println!(
            "seed {seed}, phi {}: terminal {:.6}, terminal/pre-shock {:.4}",
            scenario.phi,
            series.terminal(),
            series.terminal_ratio()
        );
    } else {
        let point = run_sweep(&scenario, SweepAxis::Phi, &[scenario.phi], &resolved.seeds, global.jobs)?
            .pop()
            .expect("one grid point");
        out.write_csv("ensemble.csv", |buf| point.summary.write_band_csv(buf))?;
        out.write_csv("runs.csv", |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["seed", "trough", "trough_day", "terminal", "terminal_ratio"])?;
            for run in &point.runs {
                let (trough, day) = run.trough();
                w.write_record([
                    run.metadata.seed.unwrap_or_default().to_string(),
                    trough.to_string(),
                    day.to_string(),
                    run.terminal().to_string(),
                    run.terminal_ratio().to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        })?;
        println!(
            "{} seeds, phi {}: median terminal {:.6}, median terminal/pre-shock {:.4}",
            point.summary.seed_count, scenario.phi, point.summary.terminal, point.summary.terminal_ratio
        );
    }
    out.finish(manifest("simulate", config_digest, resolved.seeds.clone(), started))?;
    Ok(())
}

pub fn sweep(global: &Global, axis: SweepAxis, grid: &str, seeds: Option<&str>) -> Result<(), CliError> {
    let started = now();
    let grid = parse_grid(grid)?;
    let resolved = load_scenario(global, None, seeds)?;
    let base = resolved
        .synthetic()
        .ok_or_else(|| CliError::Input("sweeps need a synthetic-flow scenario".into()))?;

    #[derive(Serialize)]
    struct SweepDigest<'a> {
        scenario: &'a ResolvedScenario,
        axis: SweepAxis,
        grid: &'a [f64],
    }
    let config_digest = digest(&SweepDigest { scenario: &resolved, axis, grid: &grid })?;

    let points = run_sweep(&base, axis, &grid, &resolved.seeds, global.jobs)?;
    let mut out = OutputDir::create(&global.out)?;
    out.write_csv("summary.csv", |buf| write_sweep_summary(buf, &points))?;
    for (i, point) in points.iter().enumerate() {
        out.write_csv(&format!("point_{}_median.csv", i + 1), |buf| point.summary.write_band_csv(buf))?;
        println!(
            "{axis:?} = {}: median trough {:.6} on day {}, terminal/pre-shock {:.4}",
            point.grid_value, point.summary.trough, point.summary.trough_day, point.summary.terminal_ratio
        );
    }
    out.finish(manifest("sweep", config_digest, resolved.seeds.clone(), started))?;
    Ok(())
}

struct SeriesFile {
    values: Vec<f64>,
    shock_row: Option<usize>,
}

fn read_series(path: &Path, bytes: &[u8], column: &str) -> Result<SeriesFile, CliError> {
    let err = |line: u64, msg: String| CliError::Input(format!("{}: line {line}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let value_col = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| err(1, format!("no `{column}` column")))?;
    let phase_col = headers.iter().position(|h| h == "phase");
    let mut values = Vec::new();
    let mut shock_row = None;
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        let field = rec.get(value_col).unwrap_or_default();
        let v: f64 = field.parse().map_err(|_| err(line, format!("bad {column} value `{field}`")))?;
        if !v.is_finite() {
            return Err(err(line, format!("non-finite {column} value")));
        }
        if shock_row.is_none() {
            let phase = phase_col.and_then(|c| rec.get(c)).unwrap_or_default();
            if !phase.is_empty() && phase.parse::<PhaseKind>().ok() == Some(PhaseKind::Shock) {
                shock_row = Some(i);
            }
        }
        values.push(v);
    }
    Ok(SeriesFile { values, shock_row })
}

pub fn analyze(global: &Global, series: &Path, column: &str, shock_start: Option<usize>) -> Result<(), CliError> {
    let started = now();
    let bytes = read_bytes(series)?;
    let file = read_series(series, &bytes, column)?;
    if file.values.len() < 8 {
        return Err(CliError::Input(format!(
            "{}: {} rows; at least 8 are required",
            series.display(),
            file.values.len()
        )));
    }
    // A row tagged `shock` holds the price after the first shock step, so the
    // shock begins one row earlier.
    let hint = shock_start.or(file.shock_row.map(|r| r.saturating_sub(1)));

    #[derive(Serialize)]
    struct AnalyzeDigest<'a> {
        input_sha256: String,
        column: &'a str,
        shock_start: Option<usize>,
        sift: SiftConfig,
    }
    let sift = SiftConfig::default();
    let config_digest =
        digest(&AnalyzeDigest { input_sha256: sha256_hex(&bytes), column, shock_start: hint, sift })?;

    let imfs = emd_decompose(&file.values, &sift)?;
    if imfs.is_empty() {
        return Err(CliError::Analysis("no oscillatory IMF: the series is monotonic".into()));
    }
    let table = dominance_table(&file.values, &imfs)?;
    let dominant = &imfs.imfs[table.dominant_index - 1];
    let estimate = shock_recovery_timescales(dominant, hint)?;

    let mut out = OutputDir::create(&global.out)?;
    out.write_csv("imfs.csv", |buf| imfs.write_csv(buf))?;
    out.write_csv("dominance.csv", |buf| table.write_csv(buf))?;
    let mut dominant_period = None;
    for (k, imf) in imfs.imfs.iter().enumerate() {
        match hilbert_transform(imf) {
            Ok(analytic) => {
                out.write_csv(&format!("analytic_imf{}.csv", k + 1), |buf| analytic.write_csv(buf))?;
                if k + 1 == table.dominant_index {
                    dominant_period = mean_period(&analytic).ok();
                }
            }
            Err(HhtError::NotOscillatory) => {}
            Err(e) => return Err(e.into()),
        }
    }
    out.write_csv("timescales.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record([
            "dominant_imf",
            "trough_day",
            "peak_day",
            "shock_days",
            "recovery_days",
            "recovered",
            "shape",
            "dominant_mean_period",
        ])?;
        w.write_record([
            table.dominant_index.to_string(),
            estimate.trough_day.to_string(),
            estimate.peak_day.to_string(),
            estimate.shock_days.to_string(),
            estimate.recovery_days.to_string(),
            estimate.recovered.to_string(),
            estimate.shape.label().to_string(),
            dominant_period.map(|p| p.to_string()).unwrap_or_default(),
        ])?;
        w.flush()?;
        Ok(())
    })?;
    println!("{} IMFs, dominant IMF {}", imfs.len(), table.dominant_index);
    println!(
        "trough day {}, T_S {} days, T_R {} days, shape {}",
        estimate.trough_day,
        estimate.shock_days,
        estimate.recovery_days,
        estimate.shape.label()
    );
    out.finish(manifest("analyze", config_digest, Vec::new(), started))?;
    Ok(())
}
