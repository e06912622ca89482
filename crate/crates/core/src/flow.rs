//! Institutional fund flow: daily FII/DII legs, net flow, normalization to
//! `[-1, 1]` and the synthetic per-phase Gaussian generator.

use std::io::{Read, Write};

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase::{PhaseKind, PhaseSchedule};

/// Identifier of the generator behind [`generate_synthetic_flow`], recorded in
/// run manifests.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64+rand_distr::Normal(ziggurat)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("no flow records supplied")]
    EmptyInput,
    #[error("dates must be strictly increasing: {previous} followed by {current}")]
    NonMonotonicDates { previous: NaiveDate, current: NaiveDate },
    #[error("flow leg `{field}` on {date} must be finite and non-negative, got {value}")]
    InvalidLeg { date: NaiveDate, field: &'static str, value: f64 },
    #[error("net flow is zero on every day; normalization is undefined")]
    DegenerateSeries,
    #[error("no regime given for phase {0}")]
    MissingRegime(PhaseKind),
    #[error("schedule has zero total length")]
    ZeroLengthSchedule,
    #[error("regime for phase {phase} has invalid parameters (mean {mean}, sigma {sigma})")]
    InvalidRegime { phase: PhaseKind, mean: f64, sigma: f64 },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

/// One trading day of FII and DII cash purchases and sales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyInstitutionalFlow {
    pub date: NaiveDate,
    pub fii_buy: f64,
    pub fii_sell: f64,
    pub dii_buy: f64,
    pub dii_sell: f64,
}

impl DailyInstitutionalFlow {
    pub fn new(
        date: NaiveDate,
        fii_buy: f64,
        fii_sell: f64,
        dii_buy: f64,
        dii_sell: f64,
    ) -> Result<Self, FlowError> {
        let record = Self { date, fii_buy, fii_sell, dii_buy, dii_sell };
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<(), FlowError> {
        for (field, value) in [
            ("fii_buy", self.fii_buy),
            ("fii_sell", self.fii_sell),
            ("dii_buy", self.dii_buy),
            ("dii_sell", self.dii_sell),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(FlowError::InvalidLeg { date: self.date, field, value });
            }
        }
        Ok(())
    }

    /// Net FII purchase plus net DII purchase for the day.
    pub fn net(&self) -> f64 {
        (self.fii_buy - self.fii_sell) + (self.dii_buy - self.dii_sell)
    }
}

/// Daily net institutional flow ΔD_t with its trading dates.
#[derive(Debug, Clone, PartialEq)]
pub struct NetFlowSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowOrigin {
    Real,
    Synthetic,
}

/// Normalized net fund flow Ψ_t, every value in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFlowSeries {
    pub values: Vec<f64>,
    pub origin: FlowOrigin,
    pub phase_tags: Option<Vec<PhaseKind>>,
    /// Trading dates for real flow; `None` for synthetic flow.
    pub dates: Option<Vec<NaiveDate>>,
}

impl NormalizedFlowSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Attaches per-day phase labels from `schedule`. Lengths must agree.
    pub fn tagged(mut self, schedule: &PhaseSchedule) -> Option<Self> {
        if schedule.total_len() != self.values.len() {
            return None;
        }
        self.phase_tags = Some(schedule.day_tags());
        Some(self)
    }

    /// Writes `date,psi,phase`. Blank date for synthetic flow, blank phase
    /// when untagged.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "psi", "phase"])?;
        for (i, psi) in self.values.iter().enumerate() {
            let date = self
                .dates
                .as_ref()
                .map(|d| d[i].format("%Y-%m-%d").to_string())
                .unwrap_or_default();
            let phase = self
                .phase_tags
                .as_ref()
                .map(|t| t[i].label())
                .unwrap_or_default();
            w.write_record([date.as_str(), &psi.to_string(), phase])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Combines FII and DII legs into ΔD_t, checking that dates strictly increase.
pub fn net_flow(records: &[DailyInstitutionalFlow]) -> Result<NetFlowSeries, FlowError> {
    if records.is_empty() {
        return Err(FlowError::EmptyInput);
    }
    for pair in records.windows(2) {
        if pair[1].date <= pair[0].date {
            return Err(FlowError::NonMonotonicDates {
                previous: pair[0].date,
                current: pair[1].date,
            });
        }
    }
    for r in records {
        r.validate()?;
    }
    Ok(NetFlowSeries {
        dates: records.iter().map(|r| r.date).collect(),
        values: records.iter().map(DailyInstitutionalFlow::net).collect(),
    })
}

/// Ψ_t = ΔD_t / max|ΔD_t| over the full sample.
pub fn normalize_flow(net: &NetFlowSeries) -> Result<NormalizedFlowSeries, FlowError> {
    let scale = net.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(FlowError::DegenerateSeries);
    }
    Ok(NormalizedFlowSeries {
        values: net.values.iter().map(|v| v / scale).collect(),
        origin: FlowOrigin::Real,
        phase_tags: None,
        dates: Some(net.dates.clone()),
    })
}

/// Gaussian regime of Ψ for one market phase; `sigma` is a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub phase: PhaseKind,
    pub mean: f64,
    pub sigma: f64,
}

impl RegimeSpec {
    pub fn new(phase: PhaseKind, mean: f64, sigma: f64) -> Result<Self, FlowError> {
        let spec = Self { phase, mean, sigma };
        spec.distribution()?;
        Ok(spec)
    }

    fn distribution(&self) -> Result<Normal<f64>, FlowError> {
        if !self.mean.is_finite() || !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(FlowError::InvalidRegime {
                phase: self.phase,
                mean: self.mean,
                sigma: self.sigma,
            });
        }
        Normal::new(self.mean, self.sigma).map_err(|_| FlowError::InvalidRegime {
            phase: self.phase,
            mean: self.mean,
            sigma: self.sigma,
        })
    }
}

/// Regimes estimated from the COVID-period Indian flow: N(0, 0.17) in normal
/// periods, N(-0.2, 0.49) in the shock and N(0.06, 0.22) in the recovery.
/// The post-recovery phase reuses the normal-period regime.
pub fn covid_regimes() -> Vec<RegimeSpec> {
    vec![
        RegimeSpec { phase: PhaseKind::PreShockNormal, mean: 0.0, sigma: 0.17 },
        RegimeSpec { phase: PhaseKind::Shock, mean: -0.2, sigma: 0.49 },
        RegimeSpec { phase: PhaseKind::Recovery, mean: 0.06, sigma: 0.22 },
        RegimeSpec { phase: PhaseKind::PostRecovery, mean: 0.0, sigma: 0.17 },
    ]
}

/// Raw (unclamped) Gaussian draws for one regime. Consumes the generator in
/// the same order as [`generate_synthetic_flow`].
pub fn draw_regime<R: rand::Rng + ?Sized>(
    regime: &RegimeSpec,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>, FlowError> {
    let normal = regime.distribution()?;
    Ok((0..count).map(|_| normal.sample(rng)).collect())
}

/// Draws Ψ_st day by day from the regime of each day's phase, clamped to
/// `[-1, 1]`. Identical inputs give bitwise-identical output.
pub fn generate_synthetic_flow(
    regimes: &[RegimeSpec],
    schedule: &PhaseSchedule,
    seed: u64,
) -> Result<NormalizedFlowSeries, FlowError> {
    if schedule.total_len() == 0 {
        return Err(FlowError::ZeroLengthSchedule);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(schedule.total_len());
    for phase in schedule.phases() {
        let regime = regimes
            .iter()
            .find(|r| r.phase == phase.kind)
            .ok_or(FlowError::MissingRegime(phase.kind))?;
        values.extend(
            draw_regime(regime, phase.length, &mut rng)?
                .into_iter()
                .map(|v| v.clamp(-1.0, 1.0)),
        );
    }
    Ok(NormalizedFlowSeries {
        values,
        origin: FlowOrigin::Synthetic,
        phase_tags: Some(schedule.day_tags()),
        dates: None,
    })
}

#[derive(Debug, Deserialize)]
struct FlowRow {
    date: String,
    fii_buy: f64,
    fii_sell: f64,
    dii_buy: f64,
    dii_sell: f64,
}

/// Parses a `date,fii_buy,fii_sell,dii_buy,dii_sell` file. Rows must be in
/// ascending date order without duplicates; errors carry the 1-based line.
pub fn read_flow_csv<R: Read>(reader: R) -> Result<Vec<DailyInstitutionalFlow>, FlowError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| FlowError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let expected = ["date", "fii_buy", "fii_sell", "dii_buy", "dii_sell"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(FlowError::Parse {
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut records: Vec<DailyInstitutionalFlow> = Vec::new();
    for row in rdr.deserialize::<FlowRow>() {
        let row = row.map_err(|e| FlowError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = records.len() as u64 + 2;
        let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d").map_err(|e| {
            FlowError::Parse { line, message: format!("bad date `{}`: {e}", row.date) }
        })?;
        if let Some(prev) = records.last() {
            if date == prev.date {
                return Err(FlowError::Parse { line, message: format!("duplicate date {date}") });
            }
            if date < prev.date {
                return Err(FlowError::Parse {
                    line,
                    message: format!("date {date} is earlier than previous row {}", prev.date),
                });
            }
        }
        let record =
            DailyInstitutionalFlow::new(date, row.fii_buy, row.fii_sell, row.dii_buy, row.dii_sell)
                .map_err(|e| FlowError::Parse { line, message: e.to_string() })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(FlowError::EmptyInput);
    }
    Ok(records)
}

/// Reads a `date,psi[,phase]` file such as the one written by
/// [`NormalizedFlowSeries::write_csv`].
pub fn read_normalized_csv<R: Read>(reader: R) -> Result<NormalizedFlowSeries, FlowError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| FlowError::Parse { line: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let psi_col = col("psi").ok_or(FlowError::Parse {
        line: 1,
        message: "missing `psi` column".into(),
    })?;
    let date_col = col("date");
    let phase_col = col("phase");

    let mut values = Vec::new();
    let mut dates = Vec::new();
    let mut tags = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| FlowError::Parse { line, message: e.to_string() })?;
        let psi: f64 = rec
            .get(psi_col)
            .unwrap_or_default()
            .parse()
            .map_err(|e| FlowError::Parse { line, message: format!("bad psi: {e}") })?;
        if !(-1.0..=1.0).contains(&psi) {
            return Err(FlowError::Parse { line, message: format!("psi {psi} outside [-1, 1]") });
        }
        values.push(psi);
        if let Some(d) = date_col.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()) {
            dates.push(NaiveDate::parse_from_str(d, "%Y-%m-%d").map_err(|e| FlowError::Parse {
                line,
                message: format!("bad date `{d}`: {e}"),
            })?);
        }
        if let Some(p) = phase_col.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()) {
            tags.push(
                p.parse::<PhaseKind>()
                    .map_err(|e| FlowError::Parse { line, message: e.to_string() })?,
            );
        }
    }
    if values.is_empty() {
        return Err(FlowError::EmptyInput);
    }
    let n = values.len();
    Ok(NormalizedFlowSeries {
        values,
        origin: FlowOrigin::Real,
        phase_tags: (tags.len() == n).then_some(tags),
        dates: (dates.len() == n).then_some(dates),
    })
}
