//! Stock price shock and recovery driven by institutional fund flow and
//! company antifragility, with EMD/Hilbert-Huang time-scale analysis.
//!
//! The pipeline: [`flow`] turns FII/DII records (or Gaussian regimes) into a
//! normalized flow Ψ, [`antifragility`] turns balance-sheet items into φ,
//! [`price`] evolves the price phase by phase, and [`hht`] plus [`scale`]
//! decompose a price series to classify V- and L-shaped recoveries.

pub mod antifragility;
pub mod config;
pub mod flow;
pub mod hht;
pub mod phase;
pub mod presets;
pub mod price;
pub mod scale;
pub mod stats;

pub use antifragility::{company_phi, sector_phi, Antifragility, FinancialStatement, PhiError, PhiScope};
pub use flow::{
    covid_regimes, generate_synthetic_flow, net_flow, normalize_flow, DailyInstitutionalFlow,
    FlowError, FlowOrigin, NetFlowSeries, NormalizedFlowSeries, RegimeSpec, RNG_ALGORITHM,
};
pub use hht::{emd_decompose, hilbert_transform, mean_period, AnalyticSignal, HhtError, ImfSet, SiftConfig};
pub use phase::{Phase, PhaseKind, PhaseSchedule, ScheduleError};
pub use price::{
    simulate, step_price, sweep, EnsembleSummary, ModelError, PriceSeries, Scenario, SweepAxis,
    SweepPoint,
};
pub use scale::{
    dominance_table, shock_recovery_timescales, DominanceRow, DominanceTable, RecoveryShape,
    ScaleError, ShockRecoveryEstimate,
};
