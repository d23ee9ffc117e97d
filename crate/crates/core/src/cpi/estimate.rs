//! Daily energy estimates for days with gaps.
//!
//! Each anchored gap's energy is first split over the days it touches in
//! proportion to their share of the gap's missing values. The weekly pattern
//! is then added with a correction that keeps the gap total unchanged:
//!
//! ```text
//! c_d = E * f_d + g_d * o_d - f_d * sum_j(g_j * o_j)
//! ```
//!
//! where `f_d` is day `d`'s share of the gap's missing values, `g_d` the
//! fraction of day `d` covered by the gap, and `o_d` the weekday offset.
//! Negative results are clamped to zero and the rest rescaled so the gap
//! total is restored.

use alloc::vec;
use alloc::vec::Vec;

use crate::days::{weekday_number, DayGrid, DaySlice};
use crate::error::{Error, Result};
use crate::gaps::Gap;

use super::pattern::WeeklyPattern;

/// The part of one gap that falls on one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayShare {
    /// 1 = Monday .. 7 = Sunday.
    pub weekday: u8,
    /// Missing values of the gap on this day.
    pub missing: usize,
}

/// Splits one gap's energy over the days it touches.
pub fn allocate_gap_energy(
    gap_energy: f64,
    parts: &[DayShare],
    slots_per_day: usize,
    pattern: &WeeklyPattern,
) -> Vec<f64> {
    let total_missing: usize = parts.iter().map(|p| p.missing).sum();
    if total_missing == 0 {
        return vec![0.0; parts.len()];
    }
    let shares: Vec<f64> = parts
        .iter()
        .map(|p| p.missing as f64 / total_missing as f64)
        .collect();
    let proportional: Vec<f64> = shares.iter().map(|f| gap_energy * f).collect();
    if parts.len() == 1 {
        return proportional;
    }

    let coverage = |p: &DayShare| p.missing as f64 / slots_per_day as f64;
    let weighted_offset: f64 = parts
        .iter()
        .map(|p| coverage(p) * pattern.offset(p.weekday))
        .sum();
    let mut adjusted: Vec<f64> = parts
        .iter()
        .zip(&proportional)
        .zip(&shares)
        .map(|((p, c0), f)| c0 + coverage(p) * pattern.offset(p.weekday) - f * weighted_offset)
        .collect();

    if gap_energy >= 0.0 && adjusted.iter().any(|c| *c < 0.0) {
        adjusted.iter_mut().for_each(|c| *c = c.max(0.0));
        let sum: f64 = adjusted.iter().sum();
        if sum > 0.0 {
            let k = gap_energy / sum;
            adjusted.iter_mut().for_each(|c| *c *= k);
        } else {
            return proportional;
        }
    }
    adjusted
}

/// Estimated total energy for every day touched by an anchored gap.
///
/// Returns one entry per day in `days`: `Some(known + allocated)` for days
/// touched by one of `gaps`, `None` for the rest. Every gap must be anchored.
pub fn estimate_daily_energy(
    days: &[DaySlice],
    gaps: &[Gap],
    grid: DayGrid,
    pattern: &WeeklyPattern,
) -> Result<Vec<Option<f64>>> {
    let mut allocated = vec![0.0; days.len()];
    let mut touched = vec![false; days.len()];
    for gap in gaps {
        let energy = gap.actual_energy().ok_or(Error::UnanchoredGap {
            first_missing: gap.first_missing,
        })?;
        let first_day = grid.day_of(gap.first_missing);
        let last_day = grid.day_of(gap.last_missing);
        let parts: Vec<DayShare> = (first_day..=last_day)
            .map(|d| {
                let range = &days[d].range;
                let lo = range.start.max(gap.first_missing);
                let hi = range.end.min(gap.last_missing + 1);
                DayShare {
                    weekday: weekday_number(days[d].date),
                    missing: hi - lo,
                }
            })
            .collect();
        let alloc = allocate_gap_energy(energy, &parts, grid.slots_per_day, pattern);
        for (d, c) in (first_day..=last_day).zip(alloc) {
            allocated[d] += c;
            touched[d] = true;
        }
    }
    Ok(days
        .iter()
        .enumerate()
        .map(|(d, day)| touched[d].then(|| day.known_energy + allocated[d]))
        .collect())
}
