//! Calendar-day views over a power series.

use alloc::vec::Vec;
use core::ops::Range;

use chrono::{Datelike, NaiveDate, Timelike};

use crate::error::Result;
use crate::series::PowerSeries;

/// One calendar day of power slots.
#[derive(Debug, Clone, PartialEq)]
pub struct DaySlice {
    pub date: NaiveDate,
    /// Power indices belonging to this day.
    pub range: Range<usize>,
    /// Within-day slot of `range.start`.
    pub first_slot: usize,
    pub missing: usize,
    /// `dt * sum` of the present power values, in kWh.
    pub known_energy: f64,
    /// Whether the series covers every slot of the day.
    pub full: bool,
}

impl DaySlice {
    pub fn is_complete(&self) -> bool {
        self.full && self.missing == 0
    }

    pub fn slot_count(&self) -> usize {
        self.range.len()
    }
}

/// Slot layout of a power series on the daily grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayGrid {
    pub slots_per_day: usize,
    /// Within-day slot of power index 0.
    pub offset: usize,
}

impl DayGrid {
    pub fn of(ps: &PowerSeries) -> Result<Self> {
        let slots_per_day = ps.resolution().slots_per_day()?;
        let secs = ps.start().time().num_seconds_from_midnight() as i64;
        let offset = (secs / ps.resolution().seconds()) as usize;
        Ok(Self {
            slots_per_day,
            offset,
        })
    }

    /// Ordinal of the day that holds power index `j`, counted from the first
    /// day of the series.
    pub fn day_of(&self, j: usize) -> usize {
        (j + self.offset) / self.slots_per_day
    }

    pub fn slot_of(&self, j: usize) -> usize {
        (j + self.offset) % self.slots_per_day
    }
}

/// Splits the power domain into calendar days, keyed by the date of each
/// interval's start. The first and last day may be partial.
pub fn day_partition(ps: &PowerSeries) -> Result<Vec<DaySlice>> {
    let grid = DayGrid::of(ps)?;
    let dt = ps.resolution().hours();
    let first_date = ps.start().date();
    let n = ps.len();
    let mut days = Vec::new();
    let mut start = 0;
    while start < n {
        let day = grid.day_of(start);
        let end = ((day + 1) * grid.slots_per_day - grid.offset).min(n);
        let mut missing = 0;
        let mut sum = 0.0;
        for p in &ps.values()[start..end] {
            match p {
                Some(v) => sum += v,
                None => missing += 1,
            }
        }
        days.push(DaySlice {
            date: first_date + chrono::Days::new(day as u64),
            range: start..end,
            first_slot: grid.slot_of(start),
            missing,
            known_energy: dt * sum,
            full: end - start == grid.slots_per_day,
        });
        start = end;
    }
    Ok(days)
}

/// Properties of a day used for dissimilarity matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayRecord {
    pub date: NaiveDate,
    /// Total energy of the day in kWh; `None` when it cannot be estimated.
    pub energy: Option<f64>,
    /// 1 = Monday .. 7 = Sunday.
    pub weekday: u8,
    /// Day of year, 1-based.
    pub seasonal_position: u16,
    pub is_complete: bool,
    pub estimated: bool,
}

impl DayRecord {
    pub fn complete(date: NaiveDate, energy: f64) -> Self {
        Self {
            date,
            energy: Some(energy),
            weekday: weekday_number(date),
            seasonal_position: date.ordinal() as u16,
            is_complete: true,
            estimated: false,
        }
    }

    pub fn with_gaps(date: NaiveDate, estimate: Option<f64>) -> Self {
        Self {
            date,
            energy: estimate,
            weekday: weekday_number(date),
            seasonal_position: date.ordinal() as u16,
            is_complete: false,
            estimated: estimate.is_some(),
        }
    }
}

pub fn weekday_number(date: NaiveDate) -> u8 {
    date.weekday().number_from_monday() as u8
}
