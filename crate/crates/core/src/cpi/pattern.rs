//! Weekly pattern of daily energy, fitted on complete days.
//!
//! Least squares of the daily total on an intercept, a linear day-index
//! trend and six weekday indicators (Monday is the reference level). The
//! seven weekday offsets are then recentred to zero mean, with the mean
//! folded into the intercept.


use chrono::{NaiveDate, Weekday};

use crate::days::weekday_number;
use crate::error::{Error, Result};
use crate::lstsq::NormalEquations;

pub const MIN_COMPLETE_DAYS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeeklyPattern {
    /// kWh per day, indexed by weekday 1..=7 at position 0..=6. Sums to zero.
    pub offsets: [f64; 7],
    /// kWh per day at `origin`.
    pub intercept: f64,
    /// kWh per day, per day.
    pub slope: f64,
    pub origin: NaiveDate,
}

impl WeeklyPattern {
    /// A pattern with no weekly structure.
    pub fn flat(origin: NaiveDate) -> Self {
        Self {
            offsets: [0.0; 7],
            intercept: 0.0,
            slope: 0.0,
            origin,
        }
    }

    /// Offset for a weekday number (1 = Monday).
    pub fn offset(&self, weekday: u8) -> f64 {
        self.offsets[usize::from(weekday - 1)]
    }

    /// Modelled daily total for `date`.
    pub fn predict(&self, date: NaiveDate) -> f64 {
        let idx = (date - self.origin).num_days() as f64;
        self.intercept + self.slope * idx + self.offset(weekday_number(date))
    }
}

pub fn fit_weekly_pattern(complete_days: &[(NaiveDate, f64)]) -> Result<WeeklyPattern> {
    if complete_days.len() < MIN_COMPLETE_DAYS {
        return Err(Error::InsufficientCompleteDays {
            found: complete_days.len(),
            required: MIN_COMPLETE_DAYS,
        });
    }
    let mut seen = [false; 7];
    for (date, _) in complete_days {
        seen[usize::from(weekday_number(*date) - 1)] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::MissingWeekday {
            weekday: weekday_from_index(missing),
        });
    }

    let origin = complete_days.iter().map(|(d, _)| *d).min().expect("non-empty");
    let mut ne = NormalEquations::new(8);
    let mut row = [0.0; 8];
    for (date, total) in complete_days {
        row.fill(0.0);
        row[0] = 1.0;
        row[1] = (*date - origin).num_days() as f64;
        let w = usize::from(weekday_number(*date));
        if w > 1 {
            row[w] = 1.0;
        }
        ne.push(&row, *total);
    }
    let beta = ne.solve()?;

    let mut offsets = [0.0; 7];
    offsets[1..].copy_from_slice(&beta.as_slice()[2..8]);
    let mean = offsets.iter().sum::<f64>() / 7.0;
    offsets.iter_mut().for_each(|o| *o -= mean);
    Ok(WeeklyPattern {
        offsets,
        intercept: beta[0] + mean,
        slope: beta[1],
        origin,
    })
}

fn weekday_from_index(i: usize) -> Weekday {
    const DAYS: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];
    DAYS[i]
}

/// Pairs of (date, total) for `count` consecutive days from `start`.
#[cfg(test)]
pub(crate) fn consecutive(start: NaiveDate, totals: impl Fn(usize, u8) -> f64, count: usize) -> alloc::vec::Vec<(NaiveDate, f64)> {
    (0..count)
        .map(|i| {
            let d = start + chrono::Days::new(i as u64);
            (d, totals(i, weekday_number(d)))
        })
        .collect()
}
