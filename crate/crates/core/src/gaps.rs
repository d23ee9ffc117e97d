//! Gap detection.
//!
//! Gaps live in the power domain. A run of `k` missing readings at energy
//! indices `t..t+k-1` makes `k + 1` power values underivable: power values
//! `t-1..=t+k-1` (power value `j` needs readings `j` and `j + 1`). The gap's
//! anchors are the readings `t-1` and `t+k` that bracket the run, and its
//! actual energy is their difference.

use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::series::EnergySeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    /// First missing power index.
    pub first_missing: usize,
    /// Last missing power index (inclusive).
    pub last_missing: usize,
    /// Reading before the missing run, if inside the series.
    pub anchor_before: Option<f64>,
    /// Reading after the missing run, if inside the series.
    pub anchor_after: Option<f64>,
}

impl Gap {
    pub fn power_span(&self) -> RangeInclusive<usize> {
        self.first_missing..=self.last_missing
    }

    /// Number of missing power values.
    pub fn len(&self) -> usize {
        self.last_missing - self.first_missing + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_anchored(&self) -> bool {
        self.anchor_before.is_some() && self.anchor_after.is_some()
    }

    /// Energy consumed during the gap, known only when both anchors exist.
    pub fn actual_energy(&self) -> Option<f64> {
        Some(self.anchor_after? - self.anchor_before?)
    }

    /// Energy indices of the missing readings.
    pub fn missing_readings(&self) -> RangeInclusive<usize> {
        let first = if self.anchor_before.is_some() {
            self.first_missing + 1
        } else {
            self.first_missing
        };
        let last = if self.anchor_after.is_some() {
            self.last_missing
        } else {
            self.last_missing + 1
        };
        first..=last
    }
}

/// Finds every maximal run of missing readings, in order.
///
/// A run at the series start has no `anchor_before`; a run at the end has no
/// `anchor_after`. A series whose only present reading sits between two
/// boundary runs yields two unanchored gaps.
pub fn detect_gaps(es: &EnergySeries) -> Vec<Gap> {
    let values = es.values();
    let n = values.len();
    let mut gaps = Vec::new();
    let mut i = 0;
    while i < n {
        if values[i].is_some() {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && values[i].is_none() {
            i += 1;
        }
        let run_end = i - 1;
        let anchor_before = run_start.checked_sub(1).and_then(|j| values[j]);
        let anchor_after = if i < n { values[i] } else { None };
        // Power span: first value touching a missing reading through the last.
        let first_missing = run_start.saturating_sub(1);
        let last_missing = if i < n { run_end } else { n - 2 };
        if n < 2 || first_missing > last_missing {
            continue;
        }
        gaps.push(Gap {
            first_missing,
            last_missing,
            anchor_before,
            anchor_after,
        });
    }
    gaps
}
