//! Copy-paste imputation for energy time series.
//!
//! The pipeline:
//!
//! 1. isolated missing readings are linearly interpolated;
//! 2. the energy of every anchored gap is allocated to the days it covers,
//!    shaped by a weekly pattern fitted on complete days;
//! 3. every calendar day is described by its daily energy, weekday and
//!    day of year;
//! 4. each day with gaps is matched to the least dissimilar complete day;
//! 5. matched power values are pasted into the gaps and rescaled so every
//!    gap keeps its measured energy.
//!
//! [`PreparedCpi`] holds the result of steps 1 to 3, which do not depend
//! on the dissimilarity weights, so a weight search can reuse it.

mod dissimilarity;
mod estimate;
mod interpolate;
mod paste;
mod pattern;

pub use dissimilarity::{
    combine, dissimilarity, energy_distance, seasonal_distance, select_best_match,
    weekday_distance, DissimilarityWeights, SeasonContext,
};
pub use estimate::{allocate_gap_energy, estimate_daily_energy, DayShare};
pub use interpolate::interpolate_singles;
pub use paste::{copy_paste_and_scale, DayMatch, GapAdjustment, GapOutcome, PastedPower};
pub use pattern::{fit_weekly_pattern, WeeklyPattern, MIN_COMPLETE_DAYS};

use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate};

use crate::days::{day_partition, DayGrid, DayRecord, DaySlice};
use crate::error::{Error, Result};
use crate::gaps::{detect_gaps, Gap};
use crate::series::{energy_to_power, EnergySeries, PowerSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpiConfig {
    /// Rescale pasted values to each gap's actual energy.
    pub scale: bool,
}

impl Default for CpiConfig {
    fn default() -> Self {
        Self { scale: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputationResult {
    pub completed_power: PowerSeries,
    pub completed_energy: EnergySeries,
    /// Gaps remaining after single-value interpolation, with their fill.
    pub per_gap: Vec<GapOutcome>,
    pub matches: Vec<DayMatch>,
    /// Energy indices filled by single-value interpolation.
    pub interpolated: Vec<usize>,
    pub pattern: Option<WeeklyPattern>,
    /// Set when a weekly pattern was needed but could not be fitted, so
    /// multi-day gaps were split proportionally only.
    pub pattern_fallback: bool,
}

/// Weight-independent stages of the pipeline for one series.
#[derive(Debug, Clone)]
pub struct PreparedCpi {
    interpolated: EnergySeries,
    filled: Vec<usize>,
    power: PowerSeries,
    gaps: Vec<Gap>,
    gap_days: Vec<DayRecord>,
    candidates: Vec<DayRecord>,
    context: Option<SeasonContext>,
    pattern: Option<WeeklyPattern>,
    pattern_fallback: bool,
}

impl PreparedCpi {
    pub fn new(es: &EnergySeries) -> Result<Self> {
        let (interpolated, filled) = interpolate_singles(es);
        let power = energy_to_power(&interpolated);
        let gaps = detect_gaps(&interpolated);
        if gaps.is_empty() {
            return Ok(Self {
                interpolated,
                filled,
                power,
                gaps,
                gap_days: Vec::new(),
                candidates: Vec::new(),
                context: None,
                pattern: None,
                pattern_fallback: false,
            });
        }

        let grid = DayGrid::of(&power)?;
        let days = day_partition(&power)?;
        let complete: Vec<(NaiveDate, f64)> = days
            .iter()
            .filter(|d| d.is_complete())
            .map(|d| (d.date, d.known_energy))
            .collect();

        let (anchored, unanchored): (Vec<Gap>, Vec<Gap>) =
            gaps.iter().partition(|g| g.is_anchored());
        let needs_pattern = anchored
            .iter()
            .any(|g| grid.day_of(g.first_missing) != grid.day_of(g.last_missing));
        let (pattern, pattern_fallback) = if needs_pattern {
            match fit_weekly_pattern(&complete) {
                Ok(p) => (Some(p), false),
                Err(Error::InsufficientCompleteDays { .. } | Error::MissingWeekday { .. }) => {
                    (None, true)
                }
                Err(e) => return Err(e),
            }
        } else {
            (None, false)
        };
        let flat = WeeklyPattern::flat(days[0].date);
        let mut estimates =
            estimate_daily_energy(&days, &anchored, grid, pattern.as_ref().unwrap_or(&flat))?;
        for g in &unanchored {
            estimates[grid.day_of(g.first_missing)..=grid.day_of(g.last_missing)].fill(None);
        }

        let records = compile_complete_days(&days, &estimates);
        let (candidates, gap_days): (Vec<DayRecord>, Vec<DayRecord>) = records
            .into_iter()
            .zip(&days)
            .filter(|(r, d)| r.is_complete || d.missing > 0)
            .map(|(r, _)| r)
            .partition(|r| r.is_complete);
        if candidates.is_empty() {
            return Err(Error::NoCompleteDay);
        }
        let cycle = if days.iter().any(|d| d.date.month() == 2 && d.date.day() == 29) {
            366
        } else {
            365
        };
        let context = SeasonContext::spanning(
            cycle,
            candidates
                .iter()
                .chain(&gap_days)
                .filter_map(|r| r.energy),
        )?;

        Ok(Self {
            interpolated,
            filled,
            power,
            gaps,
            gap_days,
            candidates,
            context: Some(context),
            pattern,
            pattern_fallback,
        })
    }

    /// Days that still have missing values after single interpolation.
    pub fn days_with_gaps(&self) -> &[DayRecord] {
        &self.gap_days
    }

    /// Complete full days eligible as copy sources.
    pub fn candidates(&self) -> &[DayRecord] {
        &self.candidates
    }

    pub fn context(&self) -> Option<&SeasonContext> {
        self.context.as_ref()
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn matches(&self, weights: &DissimilarityWeights) -> Result<Vec<DayMatch>> {
        let Some(ctx) = self.context.as_ref() else {
            return Ok(Vec::new());
        };
        self.gap_days
            .iter()
            .map(|day| {
                select_best_match(day, &self.candidates, weights, ctx).map(|m| DayMatch {
                    target: day.date,
                    source: m.date,
                })
            })
            .collect()
    }

    pub fn impute(&self, weights: &DissimilarityWeights, config: CpiConfig) -> Result<ImputationResult> {
        let matches = self.matches(weights)?;
        let pasted = copy_paste_and_scale(&self.power, &self.gaps, &matches, config.scale)?;
        let completed_energy = complete_energy(&self.interpolated, &self.gaps, &pasted.power);
        Ok(ImputationResult {
            completed_power: pasted.power,
            completed_energy,
            per_gap: pasted.gaps,
            matches,
            interpolated: self.filled.clone(),
            pattern: self.pattern,
            pattern_fallback: self.pattern_fallback,
        })
    }
}

/// Runs the full pipeline on one series.
pub fn impute_cpi(
    es: &EnergySeries,
    weights: &DissimilarityWeights,
    config: CpiConfig,
) -> Result<ImputationResult> {
    PreparedCpi::new(es)?.impute(weights, config)
}

/// One record per calendar day. Complete full days carry their measured
/// energy; days with gaps carry their estimate, if any. Partial days without
/// missing values are neither complete nor estimated.
pub fn compile_complete_days(days: &[DaySlice], estimates: &[Option<f64>]) -> Vec<DayRecord> {
    days.iter()
        .zip(estimates)
        .map(|(d, est)| {
            if d.is_complete() {
                DayRecord::complete(d.date, d.known_energy)
            } else if d.missing > 0 {
                DayRecord::with_gaps(d.date, *est)
            } else {
                DayRecord {
                    is_complete: false,
                    ..DayRecord::with_gaps(d.date, None)
                }
            }
        })
        .collect()
}

/// Fills the missing readings of `interpolated` by integrating the completed
/// power from the nearest present reading. Present readings are copied
/// unchanged.
fn complete_energy(interpolated: &EnergySeries, gaps: &[Gap], power: &PowerSeries) -> EnergySeries {
    let dt = power.resolution().hours();
    let p = |j: usize| power.get(j).unwrap_or(0.0);
    let mut values = interpolated.values().to_vec();
    for gap in gaps {
        let readings = gap.missing_readings();
        if gap.anchor_before.is_some() {
            for i in readings {
                values[i] = Some(values[i - 1].unwrap_or(0.0) + p(i - 1) * dt);
            }
        } else {
            for i in readings.rev() {
                values[i] = Some(values[i + 1].unwrap_or(0.0) - p(i) * dt);
            }
        }
    }
    interpolated.with_values_unchecked(values)
}
