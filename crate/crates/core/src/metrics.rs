//! Error measures for imputed power values and gap energies.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gaps::Gap;
use crate::series::PowerSeries;

/// Actual power values below this magnitude (kW) are left out of MAPE.
pub const ZERO_POWER_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mape {
    pub value: f64,
    /// Terms dropped because the actual value was (near) zero.
    pub skipped: usize,
}

/// Mean absolute percentage error over the power indices in `mask`.
pub fn mape_p(actual: &PowerSeries, imputed: &PowerSeries, mask: &[usize]) -> Result<Mape> {
    if actual.len() != imputed.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: imputed.len(),
        });
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for &t in mask {
        let p = actual.get(t).ok_or(Error::MissingPower { index: t })?;
        let p_hat = imputed.get(t).ok_or(Error::MissingPower { index: t })?;
        if p.abs() < ZERO_POWER_THRESHOLD {
            skipped += 1;
            continue;
        }
        sum += ((p_hat - p) / p).abs();
        used += 1;
    }
    if used == 0 {
        return Err(Error::NoEvaluablePoints);
    }
    Ok(Mape {
        value: sum / used as f64,
        skipped,
    })
}

/// Weighted absolute percentage error of imputed gap energies.
pub fn wape_e(actual: &[f64], imputed: &[f64]) -> Result<f64> {
    if actual.len() != imputed.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: imputed.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::NoEvaluablePoints);
    }
    let total: f64 = actual.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroTotalEnergy);
    }
    let abs_err: f64 = actual.iter().zip(imputed).map(|(e, e_hat)| (e_hat - e).abs()).sum();
    Ok(abs_err / total)
}

/// Actual and imputed energy of every anchored gap, in kWh.
pub fn gap_energies(gaps: &[Gap], imputed: &PowerSeries) -> (Vec<f64>, Vec<f64>) {
    let dt = imputed.resolution().hours();
    gaps.iter()
        .filter_map(|g| {
            let actual = g.actual_energy()?;
            let est = dt * g.power_span().map(|j| imputed.get(j).unwrap_or(0.0)).sum::<f64>();
            Some((actual, est))
        })
        .unzip()
}

/// Mean after dropping the two largest and the two smallest values.
pub fn trimmed_mean(values: &[f64]) -> Result<f64> {
    if values.len() < 5 {
        return Err(Error::TooFewValues {
            len: values.len(),
            required: 5,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let kept = &sorted[2..sorted.len() - 2];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}
