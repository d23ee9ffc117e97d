//! Artificial removal of readings from a complete energy series.
//!
//! A share of the readings is removed in runs: a fixed fraction of the
//! removed readings are isolated singles, the rest form gaps whose lengths
//! are drawn uniformly from `2..=max_gap_len`. Runs never overlap or touch,
//! and the first and last readings are always kept so every gap is anchored.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::{EnergySeries, Resolution};

const RANDOM_ATTEMPTS: usize = 64;

/// Default fraction of removed readings that are isolated singles.
pub const DEFAULT_SINGLE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissingnessSpec {
    pub share: f64,
    pub max_gap_len: usize,
    pub single_fraction: f64,
    pub seed: u64,
}

impl MissingnessSpec {
    pub fn new(share: f64, max_gap_len: usize, single_fraction: f64, seed: u64) -> Result<Self> {
        if !(share > 0.0 && share < 1.0) {
            return Err(Error::InvalidMissingnessSpec(format!("share must be in (0, 1), got {share}")));
        }
        if max_gap_len < 2 {
            return Err(Error::InvalidMissingnessSpec(format!(
                "max gap length must be at least 2, got {max_gap_len}"
            )));
        }
        if !(0.0..=1.0).contains(&single_fraction) {
            return Err(Error::InvalidMissingnessSpec(format!(
                "single fraction must be in [0, 1], got {single_fraction}"
            )));
        }
        Ok(Self {
            share,
            max_gap_len,
            single_fraction,
            seed,
        })
    }

    /// Gaps of up to three days, 5 % singles.
    pub fn with_defaults(share: f64, resolution: Resolution, seed: u64) -> Result<Self> {
        Self::new(share, 3 * resolution.slots_per_day()?, DEFAULT_SINGLE_FRACTION, seed)
    }

    /// Number of readings removed from a series of `n` readings.
    pub fn budget(&self, n: usize) -> usize {
        libm::round(self.share * n as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingMask {
    /// Removed energy indices, ascending.
    pub indices: Vec<usize>,
    /// Removed indices that are isolated, ascending.
    pub singles: Vec<usize>,
    /// `(start, length)` of every removed run, ascending.
    pub runs: Vec<(usize, usize)>,
}

/// Removes readings from a complete series according to `spec`.
/// Deterministic for a fixed seed.
pub fn insert_missing(es: &EnergySeries, spec: &MissingnessSpec) -> Result<(EnergySeries, MissingMask)> {
    if !es.is_complete() {
        return Err(Error::InvalidMissingnessSpec("input series must be complete".into()));
    }
    let n = es.len();
    let budget = spec.budget(n);
    if budget == 0 {
        return Err(Error::InvalidMissingnessSpec(format!(
            "share {} of {n} readings rounds to zero",
            spec.share
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut singles = libm::round(spec.single_fraction * budget as f64) as usize;
    let mut rest = budget - singles;
    let mut lengths = Vec::new();
    while rest >= 2 {
        let mut len = rng.random_range(2..=spec.max_gap_len).min(rest);
        if rest - len == 1 {
            if len > 2 {
                len -= 1;
            } else if len < spec.max_gap_len {
                len += 1;
            }
        }
        lengths.push(len);
        rest -= len;
    }
    singles += rest;
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths.extend(core::iter::repeat_n(1, singles));

    let mut removed = vec![false; n];
    let mut runs = Vec::with_capacity(lengths.len());
    for len in lengths {
        let start = place(&mut rng, &removed, len).ok_or_else(|| Error::InfeasibleMissingness {
            budget,
            reason: format!("no room left for a run of {len} readings"),
        })?;
        removed[start..start + len].iter_mut().for_each(|r| *r = true);
        runs.push((start, len));
    }
    runs.sort_unstable();

    let indices: Vec<usize> = (0..n).filter(|&i| removed[i]).collect();
    let singles = runs.iter().filter(|r| r.1 == 1).map(|r| r.0).collect();
    let values = es
        .values()
        .iter()
        .zip(&removed)
        .map(|(v, &r)| if r { None } else { *v })
        .collect();
    Ok((
        es.with_values_unchecked(values),
        MissingMask {
            indices,
            singles,
            runs,
        },
    ))
}

/// A start for a run of `len` readings that keeps a present reading on both
/// sides. Random probing first, then a uniform draw over all valid starts.
fn place(rng: &mut ChaCha8Rng, removed: &[bool], len: usize) -> Option<usize> {
    let n = removed.len();
    if n < len + 2 {
        return None;
    }
    let last_start = n - 1 - len;
    let fits = |s: usize| !removed[s - 1..=s + len].iter().any(|&r| r);
    for _ in 0..RANDOM_ATTEMPTS {
        let s = rng.random_range(1..=last_start);
        if fits(s) {
            return Some(s);
        }
    }
    // Prefix counts of removed readings make each window check O(1).
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &r in removed {
        prefix.push(prefix.last().unwrap() + usize::from(r));
    }
    let valid: Vec<usize> = (1..=last_start)
        .filter(|&s| prefix[s + len + 1] - prefix[s - 1] == 0)
        .collect();
    if valid.is_empty() {
        None
    } else {
        Some(valid[rng.random_range(0..valid.len())])
    }
}
