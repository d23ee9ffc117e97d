//! Exhaustive integer grid search over dissimilarity weights.

use std::io::Write;
use std::ops::RangeInclusive;

use cpi_core::metrics::mape_p;
use cpi_core::{energy_to_power, insert_missing, CpiConfig, DissimilarityWeights, PreparedCpi, PowerSeries};
use rayon::prelude::*;

use crate::eval::{robust_mean, EvalSeries};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightGrid {
    pub energy: RangeInclusive<u32>,
    pub weekday: RangeInclusive<u32>,
    pub season: RangeInclusive<u32>,
}

impl WeightGrid {
    /// Energy 1..=20, weekday 0..=10, season 1..=20.
    pub fn standard() -> Self {
        Self {
            energy: 1..=20,
            weekday: 0..=10,
            season: 1..=20,
        }
    }

    /// Grid points in lexicographic order, skipping the all-zero triple.
    pub fn points(&self) -> Vec<[u32; 3]> {
        let mut out = Vec::new();
        for e in self.energy.clone() {
            for w in self.weekday.clone() {
                for s in self.season.clone() {
                    if e + w + s > 0 {
                        out.push([e, w, s]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TuneError {
    #[error("empty calibration set")]
    NoSeries,
    #[error("weight grid is empty")]
    EmptyGrid,
    #[error("{id}: {source}")]
    Series { id: String, source: cpi_core::Error },
    #[error("no grid point scored on any calibration series")]
    NothingScored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridScore {
    pub weights: [u32; 3],
    /// Trimmed mean MAPE over the calibration series, plain mean below five.
    pub mape_p: f64,
    /// Series that imputed without error at this grid point.
    pub scored: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best: DissimilarityWeights,
    pub best_point: [u32; 3],
    pub scores: Vec<GridScore>,
}

impl TuneResult {
    pub fn write_scores<W: Write>(&self, writer: W) -> crate::io::Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["w_e", "w_w", "w_s", "mape_p", "series_scored"])?;
        for s in &self.scores {
            csv.write_record([
                s.weights[0].to_string(),
                s.weights[1].to_string(),
                s.weights[2].to_string(),
                s.mape_p.to_string(),
                s.scored.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

struct Calibration {
    prepared: PreparedCpi,
    actual: PowerSeries,
    mask: Vec<usize>,
}

/// Degrades every calibration series once with `share` and `seed`, then
/// scores each grid point by the MAPE of the CPI fill. The lowest score
/// wins; ties go to the smaller weight sum, then to the lexicographically
/// smaller triple.
pub fn grid_search_weights(
    series: &[EvalSeries],
    grid: &WeightGrid,
    share: f64,
    seed: u64,
) -> Result<TuneResult, TuneError> {
    if series.is_empty() {
        return Err(TuneError::NoSeries);
    }
    let points = grid.points();
    if points.is_empty() {
        return Err(TuneError::EmptyGrid);
    }
    let calibration: Vec<Calibration> = series
        .par_iter()
        .map(|s| {
            let wrap = |source| TuneError::Series {
                id: s.id.clone(),
                source,
            };
            let spec = cpi_core::MissingnessSpec::with_defaults(share, s.series.resolution(), seed).map_err(wrap)?;
            let (degraded, _) = insert_missing(&s.series, &spec).map_err(wrap)?;
            let mask = energy_to_power(&degraded)
                .values()
                .iter()
                .enumerate()
                .filter_map(|(j, p)| p.is_none().then_some(j))
                .collect();
            Ok(Calibration {
                prepared: PreparedCpi::new(&degraded).map_err(wrap)?,
                actual: energy_to_power(&s.series),
                mask,
            })
        })
        .collect::<Result<_, _>>()?;

    let scores: Vec<GridScore> = points
        .par_iter()
        .map(|&p| {
            let w = DissimilarityWeights::new(p[0] as f64, p[1] as f64, p[2] as f64)
                .expect("grid points are non-negative and not all zero");
            let values: Vec<f64> = calibration
                .iter()
                .filter_map(|c| {
                    let out = c.prepared.impute(&w, CpiConfig::default()).ok()?;
                    mape_p(&c.actual, &out.completed_power, &c.mask).ok().map(|m| m.value)
                })
                .collect();
            GridScore {
                weights: p,
                mape_p: robust_mean(&values).0,
                scored: values.len(),
            }
        })
        .collect();

    let best = scores
        .iter()
        .filter(|s| s.mape_p.is_finite())
        .min_by(|a, b| {
            a.mape_p
                .total_cmp(&b.mape_p)
                .then_with(|| a.weights.iter().sum::<u32>().cmp(&b.weights.iter().sum::<u32>()))
                .then_with(|| a.weights.cmp(&b.weights))
        })
        .ok_or(TuneError::NothingScored)?;
    let p = best.weights;
    Ok(TuneResult {
        best: DissimilarityWeights::new(p[0] as f64, p[1] as f64, p[2] as f64).expect("validated grid point"),
        best_point: p,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SyntheticConfig};

    fn calibration(count: u64) -> Vec<EvalSeries> {
        let cfg = SyntheticConfig {
            readings: 96 * 42,
            ..SyntheticConfig::quarter_hourly_year()
        };
        (0..count)
            .map(|i| EvalSeries {
                id: format!("c{i}"),
                series: generate(&cfg, 100 + i),
            })
            .collect()
    }

    #[test]
    fn single_point_is_returned() {
        let grid = WeightGrid {
            energy: 7..=7,
            weekday: 2..=2,
            season: 3..=3,
        };
        let r = grid_search_weights(&calibration(1), &grid, 0.1, 0).unwrap();
        assert_eq!(r.best_point, [7, 2, 3]);
        assert_eq!(r.scores.len(), 1);
    }

    #[test]
    fn best_point_minimises_the_score() {
        let grid = WeightGrid {
            energy: 1..=3,
            weekday: 0..=2,
            season: 1..=2,
        };
        let r = grid_search_weights(&calibration(2), &grid, 0.1, 5).unwrap();
        assert_eq!(r.scores.len(), 18);
        let min = r.scores.iter().map(|s| s.mape_p).fold(f64::INFINITY, f64::min);
        let best = r.scores.iter().find(|s| s.weights == r.best_point).unwrap();
        assert_eq!(best.mape_p, min);
    }

    #[test]
    fn ties_prefer_smaller_sum_then_lexicographic() {
        // Weights that only rescale each other select the same days, so
        // (1,1,1) and (2,2,2) tie and the smaller sum wins.
        let grid = WeightGrid {
            energy: 1..=2,
            weekday: 1..=2,
            season: 1..=2,
        };
        let r = grid_search_weights(&calibration(1), &grid, 0.1, 3).unwrap();
        let s111 = r.scores.iter().find(|s| s.weights == [1, 1, 1]).unwrap().mape_p;
        let s222 = r.scores.iter().find(|s| s.weights == [2, 2, 2]).unwrap().mape_p;
        assert_eq!(s111, s222);
        assert_ne!(r.best_point, [2, 2, 2]);
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert!(matches!(
            grid_search_weights(&[], &WeightGrid::standard(), 0.1, 0),
            Err(TuneError::NoSeries)
        ));
        let grid = WeightGrid {
            energy: 0..=0,
            weekday: 0..=0,
            season: 0..=0,
        };
        assert!(matches!(
            grid_search_weights(&calibration(1), &grid, 0.1, 0),
            Err(TuneError::EmptyGrid)
        ));
    }

    #[test]
    fn standard_grid_size() {
        assert_eq!(WeightGrid::standard().points().len(), 20 * 11 * 20);
    }
}
