//! Dominant-mode selection and shock/recovery time scales read off the
//! dominant IMF.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hht::ImfSet;
use crate::stats::{pearson, variance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScaleError {
    #[error("source series has zero variance; correlation is undefined")]
    ZeroVarianceSource,
    #[error("decomposition has no IMFs")]
    NoImfs,
    #[error("IMF set covers {imf} samples but the source has {source_len}")]
    LengthMismatch { imf: usize, source_len: usize },
    #[error("series has {len} samples; at least 8 are required")]
    TooShort { len: usize },
    #[error("no trough: the series is monotonic")]
    NoTroughFound,
}

/// Correlation ν with the source and variance σ² of one IMF (1-based index).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    pub index: usize,
    pub nu: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceTable {
    pub rows: Vec<DominanceRow>,
    pub dominant_index: usize,
}

impl DominanceTable {
    /// Picks the row with the largest ν; ties go to the higher index (lower
    /// frequency). Returns `None` for no rows.
    pub fn from_rows(rows: Vec<DominanceRow>) -> Option<Self> {
        let mut best: Option<&DominanceRow> = None;
        for row in &rows {
            if best.is_none_or(|b| row.nu >= b.nu) {
                best = Some(row);
            }
        }
        let dominant_index = best?.index;
        Some(Self { rows, dominant_index })
    }

    /// Writes `imf,nu,sigma2,dominant`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["imf", "nu", "sigma2", "dominant"])?;
        for row in &self.rows {
            w.write_record([
                row.index.to_string(),
                row.nu.to_string(),
                row.sigma2.to_string(),
                (row.index == self.dominant_index).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// ν = Pearson(source, IMF_k) and σ² = population variance of IMF_k for
/// every IMF. A zero IMF gets ν = 0.
pub fn dominance_table(source: &[f64], imfs: &ImfSet) -> Result<DominanceTable, ScaleError> {
    if imfs.source_length != source.len() {
        return Err(ScaleError::LengthMismatch { imf: imfs.source_length, source_len: source.len() });
    }
    if variance(source) == 0.0 {
        return Err(ScaleError::ZeroVarianceSource);
    }
    let rows = imfs
        .imfs
        .iter()
        .enumerate()
        .map(|(k, imf)| DominanceRow {
            index: k + 1,
            nu: pearson(source, imf).unwrap_or(0.0),
            sigma2: variance(imf),
        })
        .collect();
    DominanceTable::from_rows(rows).ok_or(ScaleError::NoImfs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryShape {
    VShape,
    LShape,
}

impl RecoveryShape {
    pub fn label(self) -> &'static str {
        match self {
            RecoveryShape::VShape => "VShape",
            RecoveryShape::LShape => "LShape",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShockRecoveryEstimate {
    pub trough_day: usize,
    /// Index of the reference peak the fall starts from.
    pub peak_day: usize,
    /// Days from the peak to the trough.
    pub shock_days: usize,
    /// Days from the trough until the series first regains the peak level;
    /// without recovery, days from the trough to the end of the series.
    pub recovery_days: usize,
    pub recovered: bool,
    pub shape: RecoveryShape,
}

/// Reads shock and recovery lengths off a single dip.
///
/// The trough is the global minimum at or after `shock_start_hint` (whole
/// series without a hint, first occurrence on ties). The reference peak is
/// the last local maximum before the trough, or day 0 when the fall starts
/// at the beginning. Recovery is the first day after the trough at which the
/// series is back at or above the peak level.
pub fn shock_recovery_timescales(
    dominant: &[f64],
    shock_start_hint: Option<usize>,
) -> Result<ShockRecoveryEstimate, ScaleError> {
    let n = dominant.len();
    if n < 8 {
        return Err(ScaleError::TooShort { len: n });
    }
    let non_increasing = dominant.windows(2).all(|w| w[1] <= w[0]);
    let non_decreasing = dominant.windows(2).all(|w| w[1] >= w[0]);
    if non_increasing || non_decreasing {
        return Err(ScaleError::NoTroughFound);
    }

    let start = shock_start_hint.unwrap_or(0).min(n - 1);
    let trough_day = (start..n)
        .fold(start, |best, i| if dominant[i] < dominant[best] { i } else { best });
    if trough_day == 0 {
        return Err(ScaleError::NoTroughFound);
    }

    let peak_day = (1..trough_day)
        .rev()
        .find(|&i| dominant[i] >= dominant[i - 1] && dominant[i] > dominant[i + 1])
        .unwrap_or(0);
    if dominant[peak_day] <= dominant[trough_day] {
        return Err(ScaleError::NoTroughFound);
    }
    let level = dominant[peak_day];

    let regained = (trough_day + 1..n).find(|&i| dominant[i] >= level);
    let (recovery_days, recovered) = match regained {
        Some(day) => (day - trough_day, true),
        None => (n - 1 - trough_day, false),
    };
    Ok(ShockRecoveryEstimate {
        trough_day,
        peak_day,
        shock_days: trough_day - peak_day,
        recovery_days,
        recovered,
        shape: if recovered { RecoveryShape::VShape } else { RecoveryShape::LShape },
    })
}
