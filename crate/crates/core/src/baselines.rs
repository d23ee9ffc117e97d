//! Benchmark imputers operating on power series: linear interpolation,
//! historical weekly average, and an additive trend plus seasonal profile
//! model fitted on the present values.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::days::{weekday_number, DayGrid};
use crate::error::{Error, Result};
use crate::lstsq::NormalEquations;
use crate::series::PowerSeries;

/// Days between two trend knots.
pub const TREND_KNOT_DAYS: usize = 28;
const BACKFIT_ROUNDS: usize = 3;

/// Linear interpolation between the present values bracketing each run of
/// missing values. Runs at either end take the nearest present value.
pub fn impute_linear(ps: &PowerSeries) -> Result<PowerSeries> {
    let values = ps.values();
    let present: Vec<usize> = (0..values.len()).filter(|&j| values[j].is_some()).collect();
    let (&first, &last) = match (present.first(), present.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::NoPresentValue),
    };
    let mut out = values.to_vec();
    let head = values[first];
    out[..first].iter_mut().for_each(|v| *v = head);
    let tail = values[last];
    out[last + 1..].iter_mut().for_each(|v| *v = tail);
    for w in present.windows(2) {
        let (t1, t2) = (w[0], w[1]);
        if t2 == t1 + 1 {
            continue;
        }
        let (p1, p2) = (values[t1].unwrap(), values[t2].unwrap());
        for (t, v) in out.iter_mut().enumerate().take(t2).skip(t1 + 1) {
            let frac = (t - t1) as f64 / (t2 - t1) as f64;
            *v = Some(frac * (p2 - p1) + p1);
        }
    }
    ps.with_values(out)
}

/// Fills each missing value with the mean of all present values at the same
/// position in the week, counted from the first value of the series.
///
/// Fails when a missing value falls on a weekly position that has no
/// present value anywhere in the series.
pub fn impute_hist_avg(ps: &PowerSeries) -> Result<PowerSeries> {
    let week = 7 * ps.resolution().slots_per_day()?;
    let mut sum = vec![0.0; week];
    let mut count = vec![0usize; week];
    for (t, v) in ps.values().iter().enumerate() {
        if let Some(v) = v {
            sum[t % week] += v;
            count[t % week] += 1;
        }
    }
    let out = ps
        .values()
        .iter()
        .enumerate()
        .map(|(t, v)| match v {
            Some(v) => Ok(Some(*v)),
            None => {
                let s = t % week;
                if count[s] == 0 {
                    Err(Error::EmptyWeeklySlot { slot: s })
                } else {
                    Ok(Some(sum[s] / count[s] as f64))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ps.with_values(out)
}

/// Additive decomposition `trend + daily profile + weekly profile`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalModel {
    /// Coefficients for `[1, x, (x - k_1)+, ..]` with `x = index / scale`.
    pub trend: Vec<f64>,
    /// Knot positions on the same scale as `x`.
    pub knots: Vec<f64>,
    scale: f64,
    /// Per within-day slot; sums to zero.
    pub daily: Vec<f64>,
    /// Per weekday, Monday first; sums to zero.
    pub weekly: [f64; 7],
    grid: DayGrid,
    first_weekday: u8,
}

impl SeasonalModel {
    pub fn trend_at(&self, j: usize) -> f64 {
        let x = j as f64 / self.scale;
        let mut y = self.trend[0] + self.trend[1] * x;
        for (k, c) in self.knots.iter().zip(&self.trend[2..]) {
            if x > *k {
                y += c * (x - k);
            }
        }
        y
    }

    fn weekday_of(&self, j: usize) -> usize {
        (usize::from(self.first_weekday - 1) + self.grid.day_of(j)) % 7
    }

    pub fn predict(&self, j: usize) -> f64 {
        self.trend_at(j) + self.daily[self.grid.slot_of(j)] + self.weekly[self.weekday_of(j)]
    }
}

/// Fits [`SeasonalModel`] by backfitting on the present values: the
/// piecewise-linear trend (knots every [`TREND_KNOT_DAYS`] days) by least
/// squares, then the daily profile as per-slot means and the weekly profile
/// as per-weekday means of what the other components leave.
pub fn fit_seasonal_model(ps: &PowerSeries) -> Result<SeasonalModel> {
    let grid = DayGrid::of(ps)?;
    let spd = grid.slots_per_day;
    let n = ps.len();
    let present: Vec<(usize, f64)> = ps
        .values()
        .iter()
        .enumerate()
        .filter_map(|(j, v)| v.map(|v| (j, v)))
        .collect();
    if present.len() < 14 * spd {
        return Err(Error::InsufficientData(format!(
            "seasonal model needs two weeks of present values ({} needed, {} present)",
            14 * spd,
            present.len()
        )));
    }

    let scale = n.max(1) as f64;
    let knot_step = TREND_KNOT_DAYS * spd;
    let knots: Vec<f64> = (1..)
        .map(|k| k * knot_step)
        .take_while(|&k| k < n)
        .map(|k| k as f64 / scale)
        .collect();
    let mut model = SeasonalModel {
        trend: vec![0.0; knots.len() + 2],
        knots,
        scale,
        daily: vec![0.0; spd],
        weekly: [0.0; 7],
        grid,
        first_weekday: weekday_number(ps.start().date()),
    };

    let mut row = vec![0.0; model.trend.len()];
    for _ in 0..BACKFIT_ROUNDS {
        let mut ne = NormalEquations::new(row.len());
        for &(j, y) in &present {
            let x = j as f64 / scale;
            row[0] = 1.0;
            row[1] = x;
            for (r, k) in row[2..].iter_mut().zip(&model.knots) {
                *r = (x - k).max(0.0);
            }
            let seasonal = model.daily[grid.slot_of(j)] + model.weekly[model.weekday_of(j)];
            ne.push(&row, y - seasonal);
        }
        model.trend = ne.solve()?.as_slice().to_vec();

        let mut sum = vec![0.0; spd];
        let mut count = vec![0usize; spd];
        for &(j, y) in &present {
            let s = grid.slot_of(j);
            sum[s] += y - model.trend_at(j) - model.weekly[model.weekday_of(j)];
            count[s] += 1;
        }
        model.daily = centred_means(&sum, &count);

        let mut sum = [0.0; 7];
        let mut count = [0usize; 7];
        for &(j, y) in &present {
            let w = model.weekday_of(j);
            sum[w] += y - model.trend_at(j) - model.daily[grid.slot_of(j)];
            count[w] += 1;
        }
        let weekly = centred_means(&sum, &count);
        model.weekly.copy_from_slice(&weekly);
    }
    Ok(model)
}

fn centred_means(sum: &[f64], count: &[usize]) -> Vec<f64> {
    let mut means: Vec<f64> = sum
        .iter()
        .zip(count)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    let centre = means.iter().sum::<f64>() / means.len() as f64;
    means.iter_mut().for_each(|m| *m -= centre);
    means
}

/// Fills missing values with the fitted [`SeasonalModel`].
pub fn impute_seasonal_model(ps: &PowerSeries) -> Result<PowerSeries> {
    if ps.is_complete() {
        return Ok(ps.clone());
    }
    let model = fit_seasonal_model(ps)?;
    let out = ps
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| Some(v.unwrap_or_else(|| model.predict(j))))
        .collect();
    ps.with_values(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Resolution;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn series(values: Vec<Option<f64>>, minutes: i64) -> PowerSeries {
        let start = NaiveDate::from_ymd_opt(2012, 1, 2).unwrap().and_hms_opt(0, 0, 0).unwrap();
        PowerSeries::new(start, Resolution::from_minutes(minutes).unwrap(), values).unwrap()
    }

    #[test]
    fn linear_by_hand() {
        let ps = series(vec![Some(2.0), None, None, None, Some(6.0)], 60);
        let out = impute_linear(&ps).unwrap();
        assert_eq!(out.values(), &[Some(2.0), Some(3.0), Some(4.0), Some(5.0), Some(6.0)]);
    }

    #[test]
    fn linear_equal_anchors_and_boundaries() {
        let ps = series(vec![None, Some(3.0), None, None, Some(3.0), None], 60);
        let out = impute_linear(&ps).unwrap().complete_values().unwrap();
        assert_eq!(out, vec![3.0; 6]);
    }

    #[test]
    fn linear_needs_a_value() {
        assert_eq!(impute_linear(&series(vec![None, None], 60)), Err(Error::NoPresentValue));
    }

    #[test]
    fn hist_avg_mean_by_slot() {
        // Hourly, so a week is 168 slots. Slot 5 is v and v+2 in weeks one
        // and two and missing in week three.
        let mut values: Vec<Option<f64>> = (0..3 * 168).map(|t| Some((t % 168) as f64)).collect();
        values[5] = Some(10.0);
        values[168 + 5] = Some(12.0);
        values[336 + 5] = None;
        let out = impute_hist_avg(&series(values, 60)).unwrap();
        assert_eq!(out.get(336 + 5), Some(11.0));
    }

    #[test]
    fn hist_avg_repeated_week() {
        let week: Vec<f64> = (0..168).map(|t| (t as f64 * 0.37).sin() + 2.0).collect();
        let mut values: Vec<Option<f64>> = (0..4 * 168).map(|t| Some(week[t % 168])).collect();
        for v in &mut values[200..260] {
            *v = None;
        }
        let out = impute_hist_avg(&series(values, 60)).unwrap();
        for t in 200..260 {
            assert!((out.get(t).unwrap() - week[t % 168]).abs() < 1e-12);
        }
    }

    #[test]
    fn hist_avg_empty_slot() {
        let mut values = vec![Some(1.0); 168];
        values[7] = None;
        assert_eq!(impute_hist_avg(&series(values, 60)), Err(Error::EmptyWeeklySlot { slot: 7 }));
    }

    #[test]
    fn seasonal_constant_series() {
        let mut values = vec![Some(4.0); 21 * 24];
        for v in &mut values[100..130] {
            *v = None;
        }
        let ps = series(values, 60);
        let model = fit_seasonal_model(&ps).unwrap();
        assert!(model.daily.iter().all(|d| d.abs() < 1e-9));
        assert!(model.weekly.iter().all(|w| w.abs() < 1e-9));
        let out = impute_seasonal_model(&ps).unwrap();
        assert!(out.values().iter().all(|v| (v.unwrap() - 4.0).abs() < 1e-9));
    }

    #[test]
    fn seasonal_linear_ramp() {
        let n = 70 * 24;
        let truth = |j: usize| 5.0 + 0.01 * j as f64;
        let mut values: Vec<Option<f64>> = (0..n).map(|j| Some(truth(j))).collect();
        for v in &mut values[300..420] {
            *v = None;
        }
        let ps = series(values, 60);
        let model = fit_seasonal_model(&ps).unwrap();
        for j in [0, 500, 1000, n - 2] {
            assert!((model.trend_at(j + 1) - model.trend_at(j) - 0.01).abs() < 1e-6);
        }
        let out = impute_seasonal_model(&ps).unwrap();
        for j in 300..420 {
            assert!((out.get(j).unwrap() - truth(j)).abs() < 1e-6);
        }
    }

    #[test]
    fn seasonal_daily_sinusoid() {
        // Oracle: the generating function itself. 10 % of values removed in
        // six-hour blocks; imputed values must be within 5 % relative RMS.
        let spd = 96;
        let n = 28 * spd;
        let truth = |j: usize| 10.0 + 5.0 * (2.0 * core::f64::consts::PI * (j % spd) as f64 / spd as f64).sin();
        let mut values: Vec<Option<f64>> = (0..n).map(|j| Some(truth(j))).collect();
        let mut removed = Vec::new();
        for block in 0..11 {
            let start = 37 + block * 241;
            values[start..start + 24].fill(None);
            removed.extend(start..start + 24);
        }
        let out = impute_seasonal_model(&series(values, 15)).unwrap();
        let err: f64 = removed.iter().map(|&j| (out.get(j).unwrap() - truth(j)).powi(2)).sum::<f64>();
        let norm: f64 = removed.iter().map(|&j| truth(j).powi(2)).sum::<f64>();
        assert!((err / norm).sqrt() < 0.05);
    }

    #[test]
    fn seasonal_needs_two_weeks() {
        let ps = series(vec![Some(1.0); 13 * 24], 60);
        assert!(matches!(fit_seasonal_model(&ps), Err(Error::InsufficientData(_))));
    }

    fn masked(values: &[f64], mask: &[bool]) -> Vec<Option<f64>> {
        values.iter().zip(mask).map(|(v, &m)| (!m).then_some(*v)).collect()
    }

    proptest! {
        #[test]
        fn baselines_keep_present_values(
            values in proptest::collection::vec(0.0f64..20.0, 15 * 24..16 * 24),
            seed_mask in proptest::collection::vec(proptest::bool::weighted(0.1), 16 * 24),
        ) {
            let ps = series(masked(&values, &seed_mask[..values.len()]), 60);
            for out in [impute_linear(&ps), impute_hist_avg(&ps), impute_seasonal_model(&ps)] {
                let Ok(out) = out else { continue };
                prop_assert!(out.is_complete());
                for (a, b) in ps.values().iter().zip(out.values()) {
                    if let Some(a) = a {
                        prop_assert_eq!(a.to_bits(), b.unwrap().to_bits());
                    }
                }
            }
        }

        #[test]
        fn linear_stays_between_anchors(
            values in proptest::collection::vec(-5.0f64..20.0, 3..200),
            mask in proptest::collection::vec(any::<bool>(), 200),
        ) {
            let mut m = mask[..values.len()].to_vec();
            m[0] = false;
            let ps = series(masked(&values, &m), 60);
            let out = impute_linear(&ps).unwrap();
            let present: Vec<usize> = (0..values.len()).filter(|&j| !m[j]).collect();
            for w in present.windows(2) {
                let lo = values[w[0]].min(values[w[1]]);
                let hi = values[w[0]].max(values[w[1]]);
                for j in w[0] + 1..w[1] {
                    let v = out.get(j).unwrap();
                    prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
                }
            }
        }

        #[test]
        fn hist_avg_ignores_where_the_gaps_are(
            week_vals in proptest::collection::vec(0.0f64..10.0, 168),
            shift in 1usize..3,
        ) {
            // Same multiset of present values per slot, gap moved to another week.
            let base: Vec<f64> = (0..4 * 168).map(|t| week_vals[t % 168] + (t / 168) as f64).collect();
            let mut a: Vec<Option<f64>> = base.iter().copied().map(Some).collect();
            let mut b = a.clone();
            for t in 10..40 {
                a[t] = None;
                b[t + shift * 168] = None;
                b[t] = Some(base[t + shift * 168]);
            }
            let ia = impute_hist_avg(&series(a, 60)).unwrap();
            let ib = impute_hist_avg(&series(b, 60)).unwrap();
            for t in 10..40 {
                prop_assert!((ia.get(t).unwrap() - ib.get(t + shift * 168).unwrap()).abs() < 1e-9);
            }
        }
    }
}
