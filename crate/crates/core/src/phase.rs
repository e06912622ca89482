//! Market phases and the per-phase λ schedule.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the four market phases around a crash, in chronological order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    PreShockNormal,
    Shock,
    Recovery,
    PostRecovery,
}

impl PhaseKind {
    pub const ALL: [PhaseKind; 4] = [
        PhaseKind::PreShockNormal,
        PhaseKind::Shock,
        PhaseKind::Recovery,
        PhaseKind::PostRecovery,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PhaseKind::PreShockNormal => "pre_shock_normal",
            PhaseKind::Shock => "shock",
            PhaseKind::Recovery => "recovery",
            PhaseKind::PostRecovery => "post_recovery",
        }
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PhaseKind {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pre_shock_normal" | "pre_shock" | "normal" => Ok(PhaseKind::PreShockNormal),
            "shock" => Ok(PhaseKind::Shock),
            "recovery" => Ok(PhaseKind::Recovery),
            "post_recovery" | "post" => Ok(PhaseKind::PostRecovery),
            other => Err(ScheduleError::UnknownPhase(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("lambda {lambda} for phase {kind} is outside [0, 1]")]
    LambdaOutOfRange { kind: PhaseKind, lambda: f64 },
    #[error("phase {later} listed after {earlier}; phases must follow pre_shock_normal, shock, recovery, post_recovery order")]
    OutOfOrder { earlier: PhaseKind, later: PhaseKind },
    #[error("schedule has zero total length")]
    ZeroLength,
    #[error("unknown phase kind `{0}`")]
    UnknownPhase(String),
}

/// A single phase: its kind, how many trading days it lasts and its λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub kind: PhaseKind,
    pub length: usize,
    pub lambda: f64,
}

/// Ordered phases making up a scenario. Kinds appear at most once and in
/// chronological order; λ is in `[0, 1]`; total length is at least one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Phase>", into = "Vec<Phase>")]
pub struct PhaseSchedule {
    phases: Vec<Phase>,
}

impl PhaseSchedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self, ScheduleError> {
        for phase in &phases {
            if !(0.0..=1.0).contains(&phase.lambda) {
                return Err(ScheduleError::LambdaOutOfRange {
                    kind: phase.kind,
                    lambda: phase.lambda,
                });
            }
        }
        for pair in phases.windows(2) {
            if pair[1].kind <= pair[0].kind {
                return Err(ScheduleError::OutOfOrder {
                    earlier: pair[0].kind,
                    later: pair[1].kind,
                });
            }
        }
        if phases.iter().map(|p| p.length).sum::<usize>() == 0 {
            return Err(ScheduleError::ZeroLength);
        }
        Ok(Self { phases })
    }

    /// All four phases with the given lengths and λ values, in order.
    pub fn four_phase(lengths: [usize; 4], lambdas: [f64; 4]) -> Result<Self, ScheduleError> {
        Self::new(
            PhaseKind::ALL
                .iter()
                .zip(lengths.iter().zip(lambdas.iter()))
                .map(|(&kind, (&length, &lambda))| Phase { kind, length, lambda })
                .collect(),
        )
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn total_len(&self) -> usize {
        self.phases.iter().map(|p| p.length).sum()
    }

    pub fn get(&self, kind: PhaseKind) -> Option<&Phase> {
        self.phases.iter().find(|p| p.kind == kind)
    }

    /// Length of `kind`, zero when the phase is absent.
    pub fn length_of(&self, kind: PhaseKind) -> usize {
        self.get(kind).map_or(0, |p| p.length)
    }

    /// Day index at which `kind` begins, if present with non-zero length.
    pub fn start_of(&self, kind: PhaseKind) -> Option<usize> {
        let mut day = 0;
        for p in &self.phases {
            if p.kind == kind {
                return (p.length > 0).then_some(day);
            }
            day += p.length;
        }
        None
    }

    /// Phase kind for every day of the schedule.
    pub fn day_tags(&self) -> Vec<PhaseKind> {
        self.phases
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.kind, p.length))
            .collect()
    }

    /// λ for every day of the schedule.
    pub fn day_lambdas(&self) -> Vec<f64> {
        self.phases
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.lambda, p.length))
            .collect()
    }

    /// Returns a copy with the length of `kind` replaced. Adds nothing if the
    /// phase is absent.
    pub fn with_length(&self, kind: PhaseKind, length: usize) -> Result<Self, ScheduleError> {
        let phases = self
            .phases
            .iter()
            .map(|p| if p.kind == kind { Phase { length, ..*p } } else { *p })
            .collect();
        Self::new(phases)
    }

    /// Compact description such as `pre_shock_normal:60@0.2|shock:20@0.1`.
    pub fn summary(&self) -> String {
        self.phases
            .iter()
            .map(|p| format!("{}:{}@{}", p.kind, p.length, p.lambda))
            .collect::<Vec<_>>()
            .join("|")
    }
}

impl TryFrom<Vec<Phase>> for PhaseSchedule {
    type Error = ScheduleError;

    fn try_from(phases: Vec<Phase>) -> Result<Self, Self::Error> {
        Self::new(phases)
    }
}

impl From<PhaseSchedule> for Vec<Phase> {
    fn from(s: PhaseSchedule) -> Self {
        s.phases
    }
}
