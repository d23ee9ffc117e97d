//! Gap imputation for cumulative energy meter readings.
//!
//! Energy readings are cumulative kWh counter values at a fixed resolution;
//! power values are the average kW over each interval between two readings.
//! The crate fills gaps by copying power values from the most similar
//! complete day and rescaling them so each gap keeps its measured energy.
//! Linear, historical-average and seasonal-model baselines, artificial gap
//! insertion and error metrics are included for benchmarking.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod cpi;
pub mod days;
pub mod error;
pub mod gaps;
mod lstsq;
pub mod metrics;
pub mod series;
pub mod synthesis;

pub use cpi::{impute_cpi, CpiConfig, DissimilarityWeights, ImputationResult, PreparedCpi};
pub use error::{Error, Result};
pub use gaps::{detect_gaps, Gap};
pub use series::{energy_to_power, power_to_energy, EnergySeries, MeterKind, PowerSeries, Resolution};
pub use synthesis::{insert_missing, MissingMask, MissingnessSpec};
