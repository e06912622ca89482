//! Phase-dependent price update driven by normalized fund flow.
//!
//! During the shock the price follows the market-wide outflow alone,
//! `P_{t+1} = P_t (1 + λ Ψ_t)`. In every other phase the flow reaching the
//! stock is scaled by its antifragility, `P_{t+1} = P_t (1 + λ Ψ_t φ)`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antifragility::Antifragility;
use crate::flow::{generate_synthetic_flow, FlowError, NormalizedFlowSeries, RegimeSpec};
use crate::phase::{PhaseKind, PhaseSchedule, ScheduleError};
use crate::stats::{median, quantile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("price update factor {factor} is not positive on day {day}; (lambda, psi, phi) leave the model's valid region")]
    NonPositivePrice { day: usize, factor: f64 },
    #[error("initial price must be positive and finite, got {0}")]
    InvalidInitialPrice(f64),
    #[error("flow has {flow} days but the schedule covers {schedule}")]
    LengthMismatch { flow: usize, schedule: usize },
    #[error("invalid grid value {value}: {reason}")]
    InvalidGridValue { value: f64, reason: String },
    #[error("sweep needs a non-empty grid")]
    EmptyGrid,
    #[error("sweep needs at least one seed")]
    NoSeeds,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// One model step. Returns `NonPositivePrice` (day 0) when `1 + λΨ` or
/// `1 + λΨφ` is not positive.
pub fn step_price(p: f64, psi: f64, lambda: f64, phi: f64, in_shock: bool) -> Result<f64, ModelError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(ModelError::InvalidInitialPrice(p));
    }
    let factor = if in_shock { 1.0 + lambda * psi } else { 1.0 + lambda * psi * phi };
    if factor.is_nan() || factor <= 0.0 {
        return Err(ModelError::NonPositivePrice { day: 0, factor });
    }
    Ok(p * factor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: Option<u64>,
    pub phi: f64,
    pub schedule: String,
}

/// Prices `P_0 … P_n` for an `n`-day flow. `phase_tags[t]` and `psi[t]`
/// describe the step from `P_t` to `P_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub values: Vec<f64>,
    pub phase_tags: Vec<PhaseKind>,
    pub psi: Vec<f64>,
    pub metadata: RunMetadata,
}

impl PriceSeries {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("price series always holds P_0")
    }

    /// Index into `values` of the price at the start of the shock, 0 without
    /// a shock phase.
    pub fn shock_start(&self) -> usize {
        self.phase_tags.iter().position(|k| *k == PhaseKind::Shock).unwrap_or(0)
    }

    pub fn pre_shock_price(&self) -> f64 {
        self.values[self.shock_start()]
    }

    /// Terminal price over the price at shock onset.
    pub fn terminal_ratio(&self) -> f64 {
        self.terminal() / self.pre_shock_price()
    }

    /// Minimum price and the day it occurs (first occurrence).
    pub fn trough(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |(m, d), (i, &v)| if v < m { (v, i) } else { (m, d) })
    }

    /// Writes `day,phase,psi,price`. Day 0 holds the initial price with blank
    /// phase and flow; day `t ≥ 1` holds the price after step `t-1`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        write_price_rows(writer, &self.values, &self.phase_tags, Some(&self.psi))
    }
}

pub(crate) fn write_price_rows<W: Write>(
    writer: W,
    prices: &[f64],
    tags: &[PhaseKind],
    psi: Option<&[f64]>,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["day", "phase", "psi", "price"])?;
    for (day, price) in prices.iter().enumerate() {
        let (phase, flow) = match day.checked_sub(1) {
            Some(step) => (
                tags[step].label().to_string(),
                psi.map(|p| p[step].to_string()).unwrap_or_default(),
            ),
            None => (String::new(), String::new()),
        };
        w.write_record([day.to_string(), phase, flow, price.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Folds [`step_price`] over the flow, using the shock rule on days tagged
/// `Shock` by the schedule and the φ-scaled rule elsewhere.
pub fn simulate(
    p0: f64,
    flow: &NormalizedFlowSeries,
    schedule: &PhaseSchedule,
    phi: &Antifragility,
) -> Result<PriceSeries, ModelError> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(ModelError::InvalidInitialPrice(p0));
    }
    if flow.len() != schedule.total_len() {
        return Err(ModelError::LengthMismatch { flow: flow.len(), schedule: schedule.total_len() });
    }
    let tags = schedule.day_tags();
    let lambdas = schedule.day_lambdas();
    let mut values = Vec::with_capacity(flow.len() + 1);
    values.push(p0);
    let mut price = p0;
    for (day, ((&psi, &lambda), &kind)) in flow.values.iter().zip(&lambdas).zip(&tags).enumerate() {
        price = step_price(price, psi, lambda, phi.value, kind == PhaseKind::Shock).map_err(
            |e| match e {
                ModelError::NonPositivePrice { factor, .. } => {
                    ModelError::NonPositivePrice { day, factor }
                }
                other => other,
            },
        )?;
        values.push(price);
    }
    Ok(PriceSeries {
        values,
        phase_tags: tags,
        psi: flow.values.clone(),
        metadata: RunMetadata { seed: None, phi: phi.value, schedule: schedule.summary() },
    })
}

/// A synthetic-flow scenario: everything except the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub initial_price: f64,
    pub phi: f64,
    pub schedule: PhaseSchedule,
    pub regimes: Vec<RegimeSpec>,
}

impl Scenario {
    pub fn run(&self, seed: u64) -> Result<PriceSeries, ModelError> {
        let flow = generate_synthetic_flow(&self.regimes, &self.schedule, seed)?;
        let mut series =
            simulate(self.initial_price, &flow, &self.schedule, &Antifragility::company(self.phi))?;
        series.metadata.seed = Some(seed);
        Ok(series)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Varies the shock length; the recovery length follows it.
    ShockLength,
    Phi,
}

impl SweepAxis {
    /// The scenario at one grid point.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario, ModelError> {
        let invalid = |reason: &str| ModelError::InvalidGridValue { value, reason: reason.into() };
        match self {
            SweepAxis::ShockLength => {
                if !(value.is_finite() && value >= 0.0 && value.fract() == 0.0) {
                    return Err(invalid("shock length must be a non-negative whole number of days"));
                }
                let days = value as usize;
                let schedule = base
                    .schedule
                    .with_length(PhaseKind::Shock, days)
                    .and_then(|s| s.with_length(PhaseKind::Recovery, days))
                    .map_err(|e| invalid(&e.to_string()))?;
                Ok(Scenario { schedule, ..base.clone() })
            }
            SweepAxis::Phi => {
                if !value.is_finite() {
                    return Err(invalid("phi must be finite"));
                }
                Ok(Scenario { phi: value, ..base.clone() })
            }
        }
    }
}

/// Ensemble statistics at one grid point. Scalar fields are medians over
/// seeds of the per-run quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub seed_count: usize,
    pub trough: f64,
    pub trough_day: usize,
    pub terminal_ratio: f64,
    pub terminal: f64,
    pub median: Vec<f64>,
    pub lower_quartile: Vec<f64>,
    pub upper_quartile: Vec<f64>,
    pub phase_tags: Vec<PhaseKind>,
}

impl EnsembleSummary {
    pub fn from_runs(runs: &[PriceSeries]) -> Self {
        assert!(!runs.is_empty(), "summary of an empty ensemble");
        let len = runs[0].values.len();
        let mut median_series = Vec::with_capacity(len);
        let mut q1 = Vec::with_capacity(len);
        let mut q3 = Vec::with_capacity(len);
        let mut column = Vec::with_capacity(runs.len());
        for day in 0..len {
            column.clear();
            column.extend(runs.iter().map(|r| r.values[day]));
            column.sort_by(f64::total_cmp);
            median_series.push(quantile(&column, 0.5));
            q1.push(quantile(&column, 0.25));
            q3.push(quantile(&column, 0.75));
        }
        let troughs: Vec<(f64, usize)> = runs.iter().map(PriceSeries::trough).collect();
        let trough_days: Vec<f64> = troughs.iter().map(|t| t.1 as f64).collect();
        Self {
            seed_count: runs.len(),
            trough: median(troughs.iter().map(|t| t.0).collect()),
            trough_day: median(trough_days).floor() as usize,
            terminal_ratio: median(runs.iter().map(PriceSeries::terminal_ratio).collect()),
            terminal: median(runs.iter().map(PriceSeries::terminal).collect()),
            median: median_series,
            lower_quartile: q1,
            upper_quartile: q3,
            phase_tags: runs[0].phase_tags.clone(),
        }
    }

    /// Writes `day,phase,price,q1,q3` with the per-day ensemble median as
    /// `price`, laid out like [`PriceSeries::write_csv`].
    pub fn write_band_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["day", "phase", "price", "q1", "q3"])?;
        for day in 0..self.median.len() {
            let phase = day
                .checked_sub(1)
                .map(|s| self.phase_tags[s].label())
                .unwrap_or_default();
            w.write_record([
                day.to_string(),
                phase.to_string(),
                self.median[day].to_string(),
                self.lower_quartile[day].to_string(),
                self.upper_quartile[day].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean daily return `P_{t+1}/P_t − 1` over every run and every step tagged
/// `kind`. `None` when no such step exists.
pub fn mean_phase_return(runs: &[PriceSeries], kind: PhaseKind) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for run in runs {
        for (step, tag) in run.phase_tags.iter().enumerate() {
            if *tag == kind {
                sum += run.values[step + 1] / run.values[step] - 1.0;
                count += 1;
            }
        }
    }
    (count > 0).then(|| sum / count as f64)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub grid_value: f64,
    pub scenario: Scenario,
    pub runs: Vec<PriceSeries>,
    pub summary: EnsembleSummary,
}

/// Runs `base` at every grid value for every seed. Work is spread over `jobs`
/// threads (0 = rayon default); results are ordered by grid index, then seed
/// index, independent of scheduling.
pub fn sweep(
    base: &Scenario,
    axis: SweepAxis,
    grid: &[f64],
    seeds: &[u64],
    jobs: usize,
) -> Result<Vec<SweepPoint>, ModelError> {
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    if seeds.is_empty() {
        return Err(ModelError::NoSeeds);
    }
    let scenarios = grid
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>, _>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ModelError::ThreadPool(e.to_string()))?;
    let runs: Vec<Vec<PriceSeries>> = pool.install(|| {
        use rayon::prelude::*;
        scenarios
            .par_iter()
            .map(|sc| seeds.par_iter().map(|&seed| sc.run(seed)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
    })?;

    Ok(grid
        .iter()
        .zip(scenarios)
        .zip(runs)
        .map(|((&grid_value, scenario), runs)| SweepPoint {
            grid_value,
            summary: EnsembleSummary::from_runs(&runs),
            scenario,
            runs,
        })
        .collect())
}

/// Writes `grid_value,seed_count,trough,trough_day,terminal,terminal_ratio`.
pub fn write_sweep_summary<W: Write>(writer: W, points: &[SweepPoint]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["grid_value", "seed_count", "trough", "trough_day", "terminal", "terminal_ratio"])?;
    for p in points {
        let s = &p.summary;
        w.write_record([
            p.grid_value.to_string(),
            s.seed_count.to_string(),
            s.trough.to_string(),
            s.trough_day.to_string(),
            s.terminal.to_string(),
            s.terminal_ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
