//! Copy-paste of matched days and per-gap energy scaling.

use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::days::{day_partition, DayGrid};
use crate::error::{Error, Result};
use crate::gaps::Gap;
use crate::series::PowerSeries;

/// A day with gaps and the complete day it is filled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayMatch {
    pub target: NaiveDate,
    pub source: NaiveDate,
}

/// How the pasted values of a gap were adjusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapAdjustment {
    /// Multiplied by actual / pasted energy.
    Scaled,
    /// Pasted energy was zero or of the wrong sign; filled with the uniform
    /// power that matches the actual energy.
    UniformFallback,
    /// Scaling disabled by configuration.
    Unscaled,
    /// Boundary gap without a known energy; pasted as is.
    Unanchored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapOutcome {
    pub gap: Gap,
    /// Source days used for the gap, in target order.
    pub matched_dates: Vec<NaiveDate>,
    /// Energy of the pasted values before any adjustment, kWh.
    pub pasted_energy: f64,
    /// Factor applied to the pasted values, when scaled.
    pub scale_factor: Option<f64>,
    pub adjustment: GapAdjustment,
}

impl GapOutcome {
    pub fn anchored(&self) -> bool {
        self.gap.is_anchored()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PastedPower {
    pub power: PowerSeries,
    pub gaps: Vec<GapOutcome>,
}

/// Fills each missing power value with the value at the same time of day on
/// the matched day, then rescales every anchored gap so that its imputed
/// energy equals its actual energy.
///
/// Every day with missing values needs an entry in `matches`, and every
/// source day must be a complete, full day of `ps`.
pub fn copy_paste_and_scale(
    ps: &PowerSeries,
    gaps: &[Gap],
    matches: &[DayMatch],
    scale: bool,
) -> Result<PastedPower> {
    let days = day_partition(ps)?;
    let grid = DayGrid::of(ps)?;
    let dt = ps.resolution().hours();
    let first_date = match days.first() {
        Some(d) => d.date,
        None => {
            return Ok(PastedPower {
                power: ps.clone(),
                gaps: Vec::new(),
            })
        }
    };
    let day_index = |date: NaiveDate| -> Option<usize> {
        let k = (date - first_date).num_days();
        (k >= 0 && (k as usize) < days.len()).then_some(k as usize)
    };

    let mut source_of: Vec<Option<usize>> = vec![None; days.len()];
    for m in matches {
        let target = day_index(m.target).ok_or(Error::MissingMatch { date: m.target })?;
        let source = day_index(m.source)
            .filter(|&s| days[s].is_complete())
            .ok_or(Error::MissingMatch { date: m.target })?;
        source_of[target] = Some(source);
    }

    let mut values = ps.values().to_vec();
    let original = ps.values();
    for (j, slot) in values.iter_mut().enumerate() {
        if slot.is_some() {
            continue;
        }
        let d = grid.day_of(j);
        let source = source_of[d].ok_or(Error::MissingMatch { date: days[d].date })?;
        let src = days[source].range.start + grid.slot_of(j);
        *slot = original[src];
    }

    let mut outcomes = Vec::with_capacity(gaps.len());
    for gap in gaps {
        let span = gap.power_span();
        let pasted_energy = dt * values[span.clone()].iter().map(|v| v.unwrap_or(0.0)).sum::<f64>();
        let mut matched_dates: Vec<NaiveDate> = Vec::new();
        let gap_days = grid.day_of(gap.first_missing)..=grid.day_of(gap.last_missing);
        for &s in source_of[gap_days].iter().flatten() {
            if matched_dates.last() != Some(&days[s].date) {
                matched_dates.push(days[s].date);
            }
        }

        let (adjustment, scale_factor) = match gap.actual_energy() {
            None => (GapAdjustment::Unanchored, None),
            Some(_) if !scale => (GapAdjustment::Unscaled, None),
            Some(actual) => {
                if pasted_energy == 0.0 && actual == 0.0 {
                    (GapAdjustment::Scaled, None)
                } else if pasted_energy == 0.0 || pasted_energy * actual < 0.0 {
                    let uniform = actual / (gap.len() as f64 * dt);
                    values[span.clone()].iter_mut().for_each(|v| *v = Some(uniform));
                    (GapAdjustment::UniformFallback, None)
                } else {
                    let k = actual / pasted_energy;
                    values[span.clone()]
                        .iter_mut()
                        .for_each(|v| *v = v.map(|x| x * k));
                    (GapAdjustment::Scaled, Some(k))
                }
            }
        };
        outcomes.push(GapOutcome {
            gap: *gap,
            matched_dates,
            pasted_energy,
            scale_factor,
            adjustment,
        });
    }

    Ok(PastedPower {
        power: ps.with_values(values)?,
        gaps: outcomes,
    })
}
