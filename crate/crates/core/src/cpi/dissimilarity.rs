//! Dissimilarity between a day with gaps and a complete day.
//!
//! Three normalised distances are combined linearly: daily energy scaled by
//! the range of daily energies, weekday class, and position in the yearly
//! cycle with wrap-around at the year boundary.

use alloc::format;

use crate::days::DayRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissimilarityWeights {
    pub energy: f64,
    pub weekday: f64,
    pub season: f64,
}

impl DissimilarityWeights {
    pub fn new(energy: f64, weekday: f64, season: f64) -> Result<Self> {
        let all = [energy, weekday, season];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and non-negative, got ({energy}, {weekday}, {season})"
            )));
        }
        if all.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidWeights("weights must not all be zero".into()));
        }
        Ok(Self {
            energy,
            weekday,
            season,
        })
    }

    pub fn scaled(self, c: f64) -> Result<Self> {
        Self::new(self.energy * c, self.weekday * c, self.season * c)
    }
}

impl Default for DissimilarityWeights {
    fn default() -> Self {
        Self {
            energy: 5.0,
            weekday: 1.0,
            season: 10.0,
        }
    }
}

/// Normalisation constants for one series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonContext {
    pub cycle_length: u16,
    pub energy_min: f64,
    pub energy_max: f64,
}

impl SeasonContext {
    pub fn new(cycle_length: u16, energy_min: f64, energy_max: f64) -> Result<Self> {
        if cycle_length != 365 && cycle_length != 366 {
            return Err(Error::InvalidSeasonContext(format!(
                "cycle length must be 365 or 366, got {cycle_length}"
            )));
        }
        if !energy_min.is_finite() || !energy_max.is_finite() || energy_max <= energy_min {
            return Err(Error::InvalidSeasonContext(format!(
                "need energy_max > energy_min, got [{energy_min}, {energy_max}]"
            )));
        }
        Ok(Self {
            cycle_length,
            energy_min,
            energy_max,
        })
    }

    /// Context spanning the given daily energies. When they are all equal
    /// every energy distance is zero, so a unit range is used.
    pub fn spanning(cycle_length: u16, energies: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (lo, hi) = energies
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)));
        if !lo.is_finite() {
            return Err(Error::NoCompleteDay);
        }
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Self::new(cycle_length, lo, hi)
    }
}

pub fn energy_distance(a: f64, b: f64, ctx: &SeasonContext) -> f64 {
    (a - b).abs() / (ctx.energy_max - ctx.energy_min)
}

/// 0 for the same weekday, 0.5 for the same class (workday or weekend),
/// 1 otherwise. Weekdays are numbered 1 = Monday .. 7 = Sunday.
pub fn weekday_distance(a: u8, b: u8) -> f64 {
    let weekend = |w: u8| w >= 6;
    if a == b {
        0.0
    } else if weekend(a) == weekend(b) {
        0.5
    } else {
        1.0
    }
}

/// Circular distance between two positions in a cycle of `cycle_length`
/// days, normalised by half the cycle.
pub fn seasonal_distance(a: u16, b: u16, cycle_length: u16) -> f64 {
    let half = f64::from(cycle_length / 2);
    let delta = f64::from(a.abs_diff(b));
    if delta <= half {
        delta / half
    } else {
        (f64::from(cycle_length) - delta) / half
    }
}

/// Weighted dissimilarity. The energy term is dropped when either day has
/// no energy estimate.
pub fn dissimilarity(
    a: &DayRecord,
    b: &DayRecord,
    weights: &DissimilarityWeights,
    ctx: &SeasonContext,
) -> f64 {
    let energy = match (a.energy, b.energy) {
        (Some(x), Some(y)) => energy_distance(x, y, ctx),
        _ => 0.0,
    };
    combine(
        weights,
        energy,
        weekday_distance(a.weekday, b.weekday),
        seasonal_distance(a.seasonal_position, b.seasonal_position, ctx.cycle_length),
    )
}

/// `w_e * d_e + w_w * d_w + w_s * d_s`.
pub fn combine(weights: &DissimilarityWeights, energy: f64, weekday: f64, season: f64) -> f64 {
    weights.energy * energy + weights.weekday * weekday + weights.season * season
}

/// The candidate with the smallest dissimilarity to `day`.
///
/// Candidates from before and after `day` are both eligible. Ties (equal up
/// to relative rounding) go to the candidate closest in calendar days, then
/// to the earlier date.
pub fn select_best_match<'a>(
    day: &DayRecord,
    candidates: &'a [DayRecord],
    weights: &DissimilarityWeights,
    ctx: &SeasonContext,
) -> Result<&'a DayRecord> {
    let mut best: Option<(&DayRecord, f64)> = None;
    for c in candidates {
        let d = dissimilarity(day, c, weights, ctx);
        best = match best {
            None => Some((c, d)),
            Some((b, bd)) => {
                if nearly_equal(d, bd) {
                    let dist_c = (c.date - day.date).num_days().abs();
                    let dist_b = (b.date - day.date).num_days().abs();
                    if (dist_c, c.date) < (dist_b, b.date) {
                        Some((c, d))
                    } else {
                        Some((b, bd))
                    }
                } else if d < bd {
                    Some((c, d))
                } else {
                    Some((b, bd))
                }
            }
        };
    }
    best.map(|(c, _)| c).ok_or(Error::NoCompleteDay)
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}
