//! Energy and power series, and conversion between the two.
//!
//! An [`EnergySeries`] holds cumulative meter readings at equally spaced
//! timestamps. The derived [`PowerSeries`] holds the average power of each
//! interval between two successive readings, so a series with `n` readings
//! yields `n - 1` power values. Power value `j` covers the interval that
//! starts at reading `j` and ends at reading `j + 1`, and carries the
//! timestamp of reading `j`.

use alloc::vec::Vec;

use chrono::{NaiveDateTime, TimeDelta};

use crate::error::{Error, Result};

const SECONDS_PER_DAY: i64 = 86_400;

/// Spacing between two successive readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Resolution(TimeDelta);

impl Resolution {
    pub fn new(step: TimeDelta) -> Result<Self> {
        if step <= TimeDelta::zero() || step.subsec_nanos() != 0 {
            return Err(Error::InvalidResolution);
        }
        Ok(Self(step))
    }

    pub fn from_seconds(seconds: i64) -> Result<Self> {
        TimeDelta::try_seconds(seconds)
            .ok_or(Error::InvalidResolution)
            .and_then(Self::new)
    }

    pub fn from_minutes(minutes: i64) -> Result<Self> {
        Self::from_seconds(minutes.saturating_mul(60))
    }

    pub fn duration(&self) -> TimeDelta {
        self.0
    }

    pub fn seconds(&self) -> i64 {
        self.0.num_seconds()
    }

    /// Length of one step in hours, the unit that turns kWh into kW.
    pub fn hours(&self) -> f64 {
        self.seconds() as f64 / 3600.0
    }

    /// Number of slots in one calendar day.
    ///
    /// Fails when the resolution does not tile a day exactly.
    pub fn slots_per_day(&self) -> Result<usize> {
        let s = self.seconds();
        if SECONDS_PER_DAY % s != 0 {
            return Err(Error::ResolutionNotDayAligned { seconds: s });
        }
        Ok((SECONDS_PER_DAY / s) as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MeterKind {
    /// Readings never decrease (up to a tolerance).
    #[default]
    Consumption,
    /// No monotonicity requirement.
    Generation,
}

/// Cumulative meter readings in kWh; `None` marks a missing reading.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySeries {
    start: NaiveDateTime,
    resolution: Resolution,
    values: Vec<Option<f64>>,
    kind: MeterKind,
    tolerance: f64,
}

impl EnergySeries {
    /// Builds a validated series with zero monotonicity tolerance.
    pub fn new(
        start: NaiveDateTime,
        resolution: Resolution,
        values: Vec<Option<f64>>,
        kind: MeterKind,
    ) -> Result<Self> {
        Self::with_tolerance(start, resolution, values, kind, 0.0)
    }

    /// Builds a validated series. For consumption meters every present
    /// reading must be at least every earlier present reading minus
    /// `tolerance`.
    pub fn with_tolerance(
        start: NaiveDateTime,
        resolution: Resolution,
        values: Vec<Option<f64>>,
        kind: MeterKind,
        tolerance: f64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        check_finite(&values)?;
        if values.iter().all(Option::is_none) {
            return Err(Error::NoPresentValue);
        }
        if kind == MeterKind::Consumption {
            check_monotone(&values, tolerance)?;
        }
        Ok(Self {
            start,
            resolution,
            values,
            kind,
            tolerance,
        })
    }

    /// Same metadata, new readings. Skips the monotonicity check so that
    /// completed series built from imputed power are always representable.
    pub(crate) fn with_values_unchecked(&self, values: Vec<Option<f64>>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    /// Same metadata, new readings, fully revalidated.
    pub fn with_values(&self, values: Vec<Option<f64>>) -> Result<Self> {
        Self::with_tolerance(self.start, self.resolution, values, self.kind, self.tolerance)
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn kind(&self) -> MeterKind {
        self.kind
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Option<f64>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.values.get(index).copied().flatten()
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.start + self.resolution.duration() * index as i32
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Readings as plain numbers, if none are missing.
    pub fn complete_values(&self) -> Option<Vec<f64>> {
        self.values.iter().copied().collect()
    }
}

/// Average power per interval in kW; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    start: NaiveDateTime,
    resolution: Resolution,
    values: Vec<Option<f64>>,
}

impl PowerSeries {
    pub fn new(
        start: NaiveDateTime,
        resolution: Resolution,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self {
            start,
            resolution,
            values,
        })
    }

    pub fn from_complete(
        start: NaiveDateTime,
        resolution: Resolution,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::new(start, resolution, values.into_iter().map(Some).collect())
    }

    pub fn with_values(&self, values: Vec<Option<f64>>) -> Result<Self> {
        Self::new(self.start, self.resolution, values)
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Option<f64>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.values.get(index).copied().flatten()
    }

    /// Start of the interval covered by value `index`.
    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.start + self.resolution.duration() * index as i32
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn complete_values(&self) -> Option<Vec<f64>> {
        self.values.iter().copied().collect()
    }
}

/// Differentiates readings into average power: `p = (e[j+1] - e[j]) / dt`
/// with `dt` in hours. A power value is missing iff either bracketing
/// reading is missing.
pub fn energy_to_power(es: &EnergySeries) -> PowerSeries {
    let dt = es.resolution.hours();
    let values = es
        .values
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some((b - a) / dt),
            _ => None,
        })
        .collect();
    PowerSeries {
        start: es.start,
        resolution: es.resolution,
        values,
    }
}

/// Integrates a complete power series starting from `base_energy`, yielding
/// one more reading than there are power values.
pub fn power_to_energy(ps: &PowerSeries, base_energy: f64, kind: MeterKind) -> Result<EnergySeries> {
    let dt = ps.resolution.hours();
    let mut values = Vec::with_capacity(ps.len() + 1);
    let mut acc = base_energy;
    values.push(Some(acc));
    for (index, p) in ps.values.iter().enumerate() {
        let p = p.ok_or(Error::MissingPower { index })?;
        acc += p * dt;
        values.push(Some(acc));
    }
    EnergySeries::new(ps.start, ps.resolution, values, kind)
}

fn check_finite(values: &[Option<f64>]) -> Result<()> {
    match values
        .iter()
        .position(|v| matches!(v, Some(x) if !x.is_finite()))
    {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_monotone(values: &[Option<f64>], tolerance: f64) -> Result<()> {
    let mut running_max: Option<f64> = None;
    for (index, v) in values.iter().enumerate() {
        let Some(v) = *v else { continue };
        if let Some(previous) = running_max {
            if previous > v + tolerance {
                return Err(Error::NonMonotonic {
                    index,
                    previous,
                    value: v,
                });
            }
            if v > previous {
                running_max = Some(v);
            }
        } else {
            running_max = Some(v);
        }
    }
    Ok(())
}
