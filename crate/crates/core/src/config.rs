//! Scenario configuration files and their resolution into a runnable
//! scenario.
//!
//! ```toml
//! preset = "pharma"            # optional base scenario
//! initial_price = 100.0
//! phi = 0.41                   # or: statements = "statements.csv"
//! seeds = [1, 2, 3]
//! shock_start = "2020-03-02"   # or explicit [[phases]]
//!
//! [flow]
//! file = "flow.csv"
//! ```

use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antifragility::{company_phi, read_statements_csv, sector_phi, Antifragility, PhiError};
use crate::flow::{
    covid_regimes, net_flow, normalize_flow, read_flow_csv, read_normalized_csv, FlowError,
    NormalizedFlowSeries, RegimeSpec,
};
use crate::phase::{Phase, PhaseKind, PhaseSchedule, ScheduleError};
use crate::presets::{self, Preset, DEFAULT_POST_DAYS, DEFAULT_PRE_DAYS};
use crate::price::Scenario;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Flow { path: PathBuf, source: FlowError },
    #[error("{path}: {source}")]
    Statements { path: PathBuf, source: PhiError },
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Phase entry as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub kind: PhaseKind,
    pub length_days: Option<usize>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticFlowConfig {
    pub seed: Option<u64>,
    pub regimes: Option<Vec<RegimeSpec>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub synthetic: Option<SyntheticFlowConfig>,
    /// Either a `date,fii_buy,…` records file or a `date,psi[,phase]` file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub initial_price: Option<f64>,
    pub phi: Option<f64>,
    pub statements: Option<PathBuf>,
    pub phases: Option<Vec<PhaseConfig>>,
    /// First shock day: a date for real flow. With it, the shock and the
    /// recovery each last `shock_days` and the rest of the flow is split
    /// into the pre-shock and post-recovery phases.
    pub shock_start: Option<NaiveDate>,
    pub shock_days: Option<usize>,
    pub pre_days: Option<usize>,
    pub post_days: Option<usize>,
    pub flow: Option<FlowConfig>,
    pub seeds: Option<Vec<u64>>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_toml(&text)?, base))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSource {
    Synthetic { regimes: Vec<RegimeSpec> },
    Real { values: Vec<f64>, dates: Option<Vec<NaiveDate>> },
}

/// Fully resolved scenario. Its serialized form is what run manifests hash.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedScenario {
    pub preset: Option<String>,
    pub initial_price: f64,
    pub phi: Antifragility,
    pub schedule: PhaseSchedule,
    pub flow: FlowSource,
    pub seeds: Vec<u64>,
}

impl ResolvedScenario {
    /// The synthetic scenario, `None` for real flow.
    pub fn synthetic(&self) -> Option<Scenario> {
        match &self.flow {
            FlowSource::Synthetic { regimes } => Some(Scenario {
                initial_price: self.initial_price,
                phi: self.phi.value,
                schedule: self.schedule.clone(),
                regimes: regimes.clone(),
            }),
            FlowSource::Real { .. } => None,
        }
    }

    /// The real flow series tagged with the schedule, `None` for synthetic.
    pub fn real_flow(&self) -> Option<NormalizedFlowSeries> {
        match &self.flow {
            FlowSource::Real { values, dates } => Some(NormalizedFlowSeries {
                values: values.clone(),
                origin: crate::flow::FlowOrigin::Real,
                phase_tags: Some(self.schedule.day_tags()),
                dates: dates.clone(),
            }),
            FlowSource::Synthetic { .. } => None,
        }
    }
}

/// Loads a flow file of either supported layout.
pub fn load_flow_file(path: &Path) -> Result<NormalizedFlowSeries, ConfigError> {
    let open = || File::open(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source });
    let header = {
        let mut rdr = csv::Reader::from_reader(open()?);
        rdr.headers()
            .map(|h| h.iter().map(str::trim).map(String::from).collect::<Vec<_>>())
            .unwrap_or_default()
    };
    let wrap = |source| ConfigError::Flow { path: path.to_path_buf(), source };
    if header.iter().any(|h| h == "psi") {
        read_normalized_csv(open()?).map_err(wrap)
    } else {
        let records = read_flow_csv(open()?).map_err(wrap)?;
        normalize_flow(&net_flow(&records).map_err(wrap)?).map_err(wrap)
    }
}

/// Sector φ of every company in a statements file.
pub fn load_statements_phi(path: &Path) -> Result<(Vec<(String, Antifragility)>, Antifragility), ConfigError> {
    let file = File::open(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let wrap = |source| ConfigError::Statements { path: path.to_path_buf(), source };
    let rows = read_statements_csv(file).map_err(wrap)?;
    let companies = rows
        .into_iter()
        .map(|(name, st)| company_phi(&st).map(|phi| (name, phi)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wrap)?;
    let sector = sector_phi(&companies.iter().map(|c| c.1).collect::<Vec<_>>()).map_err(wrap)?;
    Ok((companies, sector))
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub flow_file: Option<PathBuf>,
}

pub fn resolve(
    config: &ScenarioConfig,
    base_dir: &Path,
    overrides: &Overrides,
) -> Result<ResolvedScenario, ConfigError> {
    let preset_name = overrides.preset.clone().or_else(|| config.preset.clone());
    let preset: Option<&Preset> = match &preset_name {
        Some(name) => Some(presets::preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?),
        None => None,
    };
    let path_of = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };

    let phi = match (config.phi, &config.statements, preset) {
        (Some(v), _, _) => Antifragility::company(v),
        (None, Some(path), _) => load_statements_phi(&path_of(path))?.1,
        (None, None, Some(p)) => Antifragility::company(p.phi),
        (None, None, None) => return Err(ConfigError::Invalid("no phi, statements file or preset given".into())),
    };
    if !phi.value.is_finite() {
        return Err(ConfigError::Invalid(format!("phi must be finite, got {}", phi.value)));
    }

    let flow_cfg = config.flow.clone().unwrap_or_default();
    let flow_file = overrides.flow_file.clone().or_else(|| flow_cfg.file.as_ref().map(|p| path_of(p)));
    let real = match flow_file {
        Some(path) => Some(load_flow_file(&path)?),
        None => None,
    };
    if real.is_none() && preset.is_some_and(|p| !p.synthetic) {
        return Err(ConfigError::Invalid(format!(
            "preset `{}` is driven by real fund flow; supply a flow file",
            preset.unwrap().name
        )));
    }

    let lambda_for = |kind: PhaseKind, given: Option<f64>| -> Result<f64, ConfigError> {
        given
            .or_else(|| preset.map(|p| p.lambdas[kind as usize]))
            .ok_or_else(|| ConfigError::Invalid(format!("no lambda for phase {kind}")))
    };
    let shock_days = config.shock_days.or(preset.map(|p| p.shock_days));

    let schedule = if let Some(phases) = &config.phases {
        let dates = real.as_ref().and_then(|r| r.dates.as_ref());
        let mut out = Vec::with_capacity(phases.len());
        for pc in phases {
            let length = match (pc.length_days, pc.start, pc.end) {
                (Some(len), None, None) => len,
                (None, Some(start), Some(end)) => {
                    let dates = dates.ok_or_else(|| {
                        ConfigError::Invalid(format!("phase {} uses dates but the flow has none", pc.kind))
                    })?;
                    dates.iter().filter(|d| **d >= start && **d <= end).count()
                }
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "phase {} needs either length_days or both start and end",
                        pc.kind
                    )))
                }
            };
            out.push(Phase { kind: pc.kind, length, lambda: lambda_for(pc.kind, pc.lambda)? });
        }
        PhaseSchedule::new(out)?
    } else if let Some(start) = config.shock_start {
        let real = real
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("shock_start needs a real flow file".into()))?;
        let dates = real
            .dates
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("shock_start needs a dated flow file".into()))?;
        let pre = dates.iter().filter(|d| **d < start).count();
        let shock = shock_days.ok_or_else(|| ConfigError::Invalid("no shock_days given".into()))?;
        let post = dates.len().checked_sub(pre + 2 * shock).ok_or_else(|| {
            ConfigError::Invalid(format!(
                "flow has {} days after shock_start, fewer than shock plus recovery ({})",
                dates.len() - pre,
                2 * shock
            ))
        })?;
        let lengths = [pre, shock, shock, post];
        PhaseSchedule::new(
            PhaseKind::ALL
                .iter()
                .zip(lengths)
                .map(|(&kind, length)| Ok(Phase { kind, length, lambda: lambda_for(kind, None)? }))
                .collect::<Result<Vec<_>, ConfigError>>()?,
        )?
    } else if real.is_none() {
        let shock = shock_days.ok_or_else(|| ConfigError::Invalid("no phases, shock_days or preset given".into()))?;
        let lengths = [
            config.pre_days.unwrap_or(DEFAULT_PRE_DAYS),
            shock,
            shock,
            config.post_days.unwrap_or(DEFAULT_POST_DAYS),
        ];
        PhaseSchedule::new(
            PhaseKind::ALL
                .iter()
                .zip(lengths)
                .map(|(&kind, length)| Ok(Phase { kind, length, lambda: lambda_for(kind, None)? }))
                .collect::<Result<Vec<_>, ConfigError>>()?,
        )?
    } else {
        return Err(ConfigError::Invalid(
            "real flow needs phase boundaries: give [[phases]] or shock_start".into(),
        ));
    };

    let flow = match real {
        Some(series) => {
            if series.len() != schedule.total_len() {
                return Err(ConfigError::Invalid(format!(
                    "phases cover {} days but the flow file has {}",
                    schedule.total_len(),
                    series.len()
                )));
            }
            FlowSource::Real { values: series.values, dates: series.dates }
        }
        None => FlowSource::Synthetic {
            regimes: flow_cfg
                .synthetic
                .as_ref()
                .and_then(|s| s.regimes.clone())
                .unwrap_or_else(covid_regimes),
        },
    };

    let seeds = match overrides.seed {
        Some(seed) => vec![seed],
        None => config
            .seeds
            .clone()
            .or_else(|| flow_cfg.synthetic.as_ref().and_then(|s| s.seed).map(|s| vec![s]))
            .unwrap_or_else(|| vec![1]),
    };
    if seeds.is_empty() {
        return Err(ConfigError::Invalid("seeds list is empty".into()));
    }

    let initial_price = config.initial_price.unwrap_or(presets::SYNTHETIC_INITIAL_PRICE);
    if !(initial_price > 0.0 && initial_price.is_finite()) {
        return Err(ConfigError::Invalid(format!("initial_price must be positive, got {initial_price}")));
    }

    Ok(ResolvedScenario {
        preset: preset.map(|p| p.name.to_string()),
        initial_price,
        phi,
        schedule,
        flow,
        seeds,
    })
}
