//! Named scenarios pinning published λ schedules and antifragility values.

use crate::flow::covid_regimes;
use crate::phase::{PhaseSchedule, ScheduleError};
use crate::price::Scenario;

/// Phase lengths for synthetic presets when none are given.
pub const DEFAULT_PRE_DAYS: usize = 60;
pub const DEFAULT_POST_DAYS: usize = 60;
pub const DEFAULT_SHOCK_DAYS: usize = 20;
pub const SYNTHETIC_INITIAL_PRICE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub phi: f64,
    /// λ for pre-shock normal, shock, recovery and post-recovery.
    pub lambdas: [f64; 4],
    pub shock_days: usize,
    /// Whether the preset drives the model with synthetic flow. Real-flow
    /// presets need a user-supplied flow file and phase boundaries.
    pub synthetic: bool,
}

pub const PRESETS: [Preset; 6] = [
    Preset { name: "synthetic-quality", phi: 0.4, lambdas: [0.2, 0.1, 0.7, 0.3], shock_days: 20, synthetic: true },
    Preset { name: "synthetic-stressed", phi: -0.08, lambdas: [0.2, 0.1, 0.7, 0.3], shock_days: 20, synthetic: true },
    Preset { name: "pharma", phi: 0.41, lambdas: [0.6, 0.2, 0.8, 0.6], shock_days: 20, synthetic: false },
    Preset { name: "fmcg", phi: 0.21, lambdas: [0.6, 0.4, 0.9, 0.7], shock_days: 20, synthetic: false },
    Preset { name: "tatamotors", phi: -0.077, lambdas: [0.6, 1.0, 0.8, 0.7], shock_days: 20, synthetic: false },
    Preset { name: "bpcl", phi: -0.052, lambdas: [0.6, 0.8, 0.8, 0.7], shock_days: 20, synthetic: false },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

impl Preset {
    /// Four-phase schedule with the recovery as long as the shock.
    pub fn schedule(&self, pre_days: usize, post_days: usize) -> Result<PhaseSchedule, ScheduleError> {
        PhaseSchedule::four_phase(
            [pre_days, self.shock_days, self.shock_days, post_days],
            self.lambdas,
        )
    }

    /// Synthetic-flow scenario with default phase lengths and p0 = 0.5.
    pub fn synthetic_scenario(&self) -> Result<Scenario, ScheduleError> {
        Ok(Scenario {
            initial_price: SYNTHETIC_INITIAL_PRICE,
            phi: self.phi,
            schedule: self.schedule(DEFAULT_PRE_DAYS, DEFAULT_POST_DAYS)?,
            regimes: covid_regimes(),
        })
    }
}
