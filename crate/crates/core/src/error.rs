use alloc::string::String;
use chrono::{NaiveDate, Weekday};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,
    #[error("series has no present value")]
    NoPresentValue,
    #[error("resolution must be a positive duration")]
    InvalidResolution,
    #[error("resolution of {seconds} s does not divide a day into whole slots")]
    ResolutionNotDayAligned { seconds: i64 },
    #[error("consumption reading {value} at index {index} is below earlier reading {previous}")]
    NonMonotonic {
        index: usize,
        previous: f64,
        value: f64,
    },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("power value at index {index} is missing; only complete power series can be integrated")]
    MissingPower { index: usize },
    #[error("need at least {required} complete days to fit the weekly pattern, found {found}")]
    InsufficientCompleteDays { found: usize, required: usize },
    #[error("no complete day falls on {weekday}")]
    MissingWeekday { weekday: Weekday },
    #[error("gap starting at power index {first_missing} is not anchored on both sides")]
    UnanchoredGap { first_missing: usize },
    #[error("no complete day available")]
    NoCompleteDay,
    #[error("no match for day with gaps {date}")]
    MissingMatch { date: NaiveDate },
    #[error("invalid dissimilarity weights: {0}")]
    InvalidWeights(String),
    #[error("invalid season context: {0}")]
    InvalidSeasonContext(String),
    #[error("weekly slot {slot} has no present value")]
    EmptyWeeklySlot { slot: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid missingness spec: {0}")]
    InvalidMissingnessSpec(String),
    #[error("cannot place {budget} missing values: {reason}; try a smaller share or max gap length")]
    InfeasibleMissingness { budget: usize, reason: String },
    #[error("no evaluable points")]
    NoEvaluablePoints,
    #[error("total actual gap energy is zero")]
    ZeroTotalEnergy,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {required} values, got {len}")]
    TooFewValues { len: usize, required: usize },
    #[error("linear system could not be solved")]
    SingularSystem,
}
