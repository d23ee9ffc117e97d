//! Synthetic smart-meter load profiles with daily, weekly and seasonal
//! structure, used as ground truth for benchmarks.

use std::f64::consts::TAU;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Weekday};
use cpi_core::{power_to_energy, EnergySeries, MeterKind, PowerSeries, Resolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub start: NaiveDateTime,
    pub resolution: Resolution,
    /// Number of energy readings.
    pub readings: usize,
    /// Mean load, kW.
    pub base_load: f64,
    /// Relative amplitude of the annual cycle, peaking in mid-January.
    pub seasonal_amplitude: f64,
    /// Relative load on Saturdays and Sundays.
    pub weekend_level: f64,
    /// Standard deviation of the multiplicative per-day level noise.
    pub day_noise: f64,
    /// Standard deviation of the multiplicative per-value noise.
    pub value_noise: f64,
}

impl SyntheticConfig {
    /// One non-leap year of quarter-hourly readings from 2013-01-01.
    pub fn quarter_hourly_year() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2013, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
            resolution: Resolution::from_minutes(15).unwrap(),
            readings: 35_040,
            base_load: 0.5,
            seasonal_amplitude: 0.3,
            weekend_level: 1.1,
            day_noise: 0.08,
            value_noise: 0.15,
        }
    }
}

/// Daily shape with morning and evening peaks; `shift` moves both in hours.
fn daily_shape(hour: f64, shift: f64, morning: f64, evening: f64) -> f64 {
    let bump = |centre: f64, width: f64| {
        let d = (hour - centre - shift).rem_euclid(24.0);
        let d = d.min(24.0 - d);
        (-0.5 * (d / width).powi(2)).exp()
    };
    0.45 + morning * bump(7.5, 1.5) + evening * bump(19.0, 2.5) + 0.3 * bump(13.0, 3.0)
}

/// A complete consumption series. Profile parameters and noise are drawn
/// from `seed`, so each seed gives a different household.
pub fn generate(config: &SyntheticConfig, seed: u64) -> EnergySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let morning = rng.random_range(0.4..1.2);
    let evening = rng.random_range(0.8..1.8);
    let weekend_shift = rng.random_range(1.0..2.5);
    let scale = config.base_load * rng.random_range(0.6..1.6);
    let day_noise = Normal::new(0.0, config.day_noise).unwrap();
    let value_noise = Normal::new(0.0, config.value_noise).unwrap();

    let dt = config.resolution.duration();
    let powers = config.readings.saturating_sub(1);
    let mut values = Vec::with_capacity(powers);
    let mut current_day = None;
    let mut day_level = 1.0;
    for j in 0..powers {
        let ts = config.start + dt * j as i32;
        let date = ts.date();
        if current_day != Some(date) {
            current_day = Some(date);
            day_level = (1.0 + day_noise.sample(&mut rng)).max(0.3);
        }
        let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
        let season = 1.0 + config.seasonal_amplitude * (TAU * (date.ordinal0() as f64 - 14.0) / 365.0).cos();
        let hour = ts.time().signed_duration_since(chrono::NaiveTime::MIN).num_seconds() as f64 / 3600.0;
        let shape = if weekend {
            config.weekend_level * daily_shape(hour, weekend_shift, morning, evening)
        } else {
            daily_shape(hour, 0.0, morning, evening)
        };
        let noise = (1.0 + value_noise.sample(&mut rng)).max(0.05);
        values.push(Some(scale * season * shape * day_level * noise));
    }
    let ps = PowerSeries::new(config.start, config.resolution, values).expect("non-empty power series");
    power_to_energy(&ps, 1000.0 * rng.random::<f64>(), MeterKind::Consumption)
        .expect("complete non-negative power")
}
