//! Benchmark harness: degrade complete series, impute with each method and
//! score the result.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use cpi_core::baselines::{impute_hist_avg, impute_linear, impute_seasonal_model};
use cpi_core::metrics::{gap_energies, mape_p, trimmed_mean, wape_e};
use cpi_core::{
    detect_gaps, energy_to_power, impute_cpi, insert_missing, CpiConfig, DissimilarityWeights, EnergySeries,
    MissingnessSpec, PowerSeries,
};
use rayon::prelude::*;

use crate::io::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Cpi,
    CpiUnscaled,
    Linear,
    HistAvg,
    Seasonal,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Cpi,
        Method::CpiUnscaled,
        Method::Linear,
        Method::HistAvg,
        Method::Seasonal,
    ];
    /// CPI and the three baselines.
    pub const MAIN: [Method; 4] = [Method::Cpi, Method::Linear, Method::HistAvg, Method::Seasonal];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cpi => "cpi",
            Method::CpiUnscaled => "cpi-unscaled",
            Method::Linear => "linear",
            Method::HistAvg => "hist-avg",
            Method::Seasonal => "seasonal",
        }
    }

    /// Completed power series for `es`.
    pub fn impute(self, es: &EnergySeries, weights: &DissimilarityWeights) -> cpi_core::Result<PowerSeries> {
        match self {
            Method::Cpi => Ok(impute_cpi(es, weights, CpiConfig { scale: true })?.completed_power),
            Method::CpiUnscaled => Ok(impute_cpi(es, weights, CpiConfig { scale: false })?.completed_power),
            Method::Linear => impute_linear(&energy_to_power(es)),
            Method::HistAvg => impute_hist_avg(&energy_to_power(es)),
            Method::Seasonal => impute_seasonal_model(&energy_to_power(es)),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method {s:?}, expected one of {}", names.join(", "))
            })
    }
}

/// A complete series with a name for reports.
#[derive(Debug, Clone)]
pub struct EvalSeries {
    pub id: String,
    pub series: EnergySeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub shares: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub weights: DissimilarityWeights,
    /// Longest inserted gap in readings; three days when unset.
    pub max_gap_len: Option<usize>,
    pub single_fraction: f64,
}

impl EvalConfig {
    pub fn new(shares: Vec<f64>, seeds: Vec<u64>, methods: Vec<Method>) -> Self {
        Self {
            shares,
            seeds,
            methods,
            weights: DissimilarityWeights::default(),
            max_gap_len: None,
            single_fraction: cpi_core::synthesis::DEFAULT_SINGLE_FRACTION,
        }
    }

    pub fn missingness(&self, es: &EnergySeries, share: f64, seed: u64) -> cpi_core::Result<MissingnessSpec> {
        let max = match self.max_gap_len {
            Some(m) => m,
            None => 3 * es.resolution().slots_per_day()?,
        };
        MissingnessSpec::new(share, max, self.single_fraction, seed)
    }
}

/// Scores of one method on one degraded series. Failed cells carry the
/// error and NaN metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodScore {
    pub series_id: String,
    pub share: f64,
    pub seed: u64,
    pub method: Method,
    pub mape_p: f64,
    pub wape_e: f64,
    pub runtime_s: f64,
    pub skipped_terms: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub share: f64,
    pub method: Method,
    pub mape_p: f64,
    pub wape_e: f64,
    pub runtime_s_mean: f64,
    /// Cells that scored without error.
    pub count: usize,
    /// False when fewer than five cells were available and the plain mean
    /// was used instead of the trimmed mean.
    pub trimmed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub scores: Vec<MethodScore>,
    pub aggregates: Vec<Aggregate>,
}

/// Trimmed mean when at least five values exist, plain mean otherwise.
/// NaN for an empty slice.
pub fn robust_mean(values: &[f64]) -> (f64, bool) {
    match trimmed_mean(values) {
        Ok(m) => (m, true),
        Err(_) if values.is_empty() => (f64::NAN, false),
        Err(_) => (values.iter().sum::<f64>() / values.len() as f64, false),
    }
}

/// Degrades `truth` and scores every method in `methods` on the result.
pub fn score_cell(
    truth: &EvalSeries,
    spec: &MissingnessSpec,
    methods: &[Method],
    weights: &DissimilarityWeights,
) -> Vec<MethodScore> {
    let row = |method: Method| MethodScore {
        series_id: truth.id.clone(),
        share: spec.share,
        seed: spec.seed,
        method,
        mape_p: f64::NAN,
        wape_e: f64::NAN,
        runtime_s: f64::NAN,
        skipped_terms: 0,
        error: None,
    };
    let degraded = match insert_missing(&truth.series, spec) {
        Ok((d, _)) => d,
        Err(e) => {
            return methods
                .iter()
                .map(|&m| MethodScore {
                    error: Some(e.to_string()),
                    ..row(m)
                })
                .collect()
        }
    };
    let actual = energy_to_power(&truth.series);
    let mask: Vec<usize> = energy_to_power(&degraded)
        .values()
        .iter()
        .enumerate()
        .filter_map(|(j, p)| p.is_none().then_some(j))
        .collect();
    let gaps = detect_gaps(&degraded);

    methods
        .iter()
        .map(|&method| {
            let started = Instant::now();
            let imputed = method.impute(&degraded, weights);
            let runtime_s = started.elapsed().as_secs_f64();
            let scored = imputed.and_then(|imputed| {
                let mape = mape_p(&actual, &imputed, &mask)?;
                let (e, e_hat) = gap_energies(&gaps, &imputed);
                Ok((mape, wape_e(&e, &e_hat)?))
            });
            match scored {
                Ok((mape, wape)) => MethodScore {
                    mape_p: mape.value,
                    wape_e: wape,
                    runtime_s,
                    skipped_terms: mape.skipped,
                    ..row(method)
                },
                Err(e) => {
                    log::warn!("{} share {} seed {} {}: {e}", truth.id, spec.share, spec.seed, method);
                    MethodScore {
                        runtime_s,
                        error: Some(e.to_string()),
                        ..row(method)
                    }
                }
            }
        })
        .collect()
}

/// Runs every (series, share, seed) cell, in parallel on the current rayon
/// pool. Row order is series, share, seed, method regardless of scheduling.
pub fn evaluate(series: &[EvalSeries], config: &EvalConfig) -> EvaluationReport {
    let cells: Vec<(&EvalSeries, f64, u64)> = series
        .iter()
        .flat_map(|s| {
            config
                .shares
                .iter()
                .flat_map(move |&share| config.seeds.iter().map(move |&seed| (s, share, seed)))
        })
        .collect();
    let scores: Vec<MethodScore> = cells
        .par_iter()
        .map(|&(s, share, seed)| match config.missingness(&s.series, share, seed) {
            Ok(spec) => score_cell(s, &spec, &config.methods, &config.weights),
            Err(e) => config
                .methods
                .iter()
                .map(|&method| MethodScore {
                    series_id: s.id.clone(),
                    share,
                    seed,
                    method,
                    mape_p: f64::NAN,
                    wape_e: f64::NAN,
                    runtime_s: f64::NAN,
                    skipped_terms: 0,
                    error: Some(e.to_string()),
                })
                .collect(),
        })
        .flatten_iter()
        .collect();
    let aggregates = aggregate(&scores, &config.shares, &config.methods);
    EvaluationReport { scores, aggregates }
}

/// Per (share, method) means; each metric is trimmed independently.
pub fn aggregate(scores: &[MethodScore], shares: &[f64], methods: &[Method]) -> Vec<Aggregate> {
    let mut out = Vec::with_capacity(shares.len() * methods.len());
    for &share in shares {
        for &method in methods {
            let ok: Vec<&MethodScore> = scores
                .iter()
                .filter(|s| s.share == share && s.method == method && s.error.is_none())
                .collect();
            let mape: Vec<f64> = ok.iter().map(|s| s.mape_p).collect();
            let wape: Vec<f64> = ok.iter().map(|s| s.wape_e).collect();
            let (mape_p, trimmed) = robust_mean(&mape);
            let (wape_e, _) = robust_mean(&wape);
            let runtime_s_mean = if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|s| s.runtime_s).sum::<f64>() / ok.len() as f64
            };
            out.push(Aggregate {
                share,
                method,
                mape_p,
                wape_e,
                runtime_s_mean,
                count: ok.len(),
                trimmed,
            });
        }
    }
    out
}

impl EvaluationReport {
    pub fn aggregate(&self, share: f64, method: Method) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.share == share && a.method == method)
    }

    /// `1 - mape(method) / mape(baseline)` at `share`: the relative MAPE
    /// reduction of `method` over `baseline`.
    pub fn improvement(&self, share: f64, method: Method, baseline: Method) -> Option<f64> {
        let m = self.aggregate(share, method)?.mape_p;
        let b = self.aggregate(share, baseline)?.mape_p;
        (b.is_finite() && m.is_finite() && b != 0.0).then(|| 1.0 - m / b)
    }

    pub fn write_scores<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record([
            "series_id",
            "share",
            "seed",
            "method",
            "mape_p",
            "wape_e",
            "runtime_s",
            "skipped_terms",
        ])?;
        for s in &self.scores {
            csv.write_record([
                s.series_id.clone(),
                s.share.to_string(),
                s.seed.to_string(),
                s.method.to_string(),
                s.mape_p.to_string(),
                s.wape_e.to_string(),
                s.runtime_s.to_string(),
                s.skipped_terms.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn write_aggregates<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["share", "method", "mape_p_trimmed", "wape_e_trimmed", "runtime_s_mean"])?;
        for a in &self.aggregates {
            csv.write_record([
                a.share.to_string(),
                a.method.to_string(),
                a.mape_p.to_string(),
                a.wape_e.to_string(),
                a.runtime_s_mean.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SyntheticConfig};

    fn short_series(n: usize, seed: u64) -> EvalSeries {
        let cfg = SyntheticConfig {
            readings: n,
            ..SyntheticConfig::quarter_hourly_year()
        };
        EvalSeries {
            id: format!("s{seed}"),
            series: generate(&cfg, seed),
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("prophet".parse::<Method>().is_err());
    }

    #[test]
    fn single_cell_report_is_flagged_untrimmed() {
        let s = short_series(96 * 28, 1);
        let cfg = EvalConfig::new(vec![0.1], vec![0], vec![Method::Linear]);
        let report = evaluate(&[s], &cfg);
        assert_eq!(report.scores.len(), 1);
        assert_eq!(report.aggregates.len(), 1);
        let a = &report.aggregates[0];
        assert!(!a.trimmed);
        assert_eq!(a.count, 1);
        assert_eq!(a.mape_p, report.scores[0].mape_p);
    }

    #[test]
    fn row_counts_and_determinism() {
        let series: Vec<_> = (0..2).map(|i| short_series(96 * 28, i)).collect();
        let cfg = EvalConfig::new(vec![0.05, 0.1, 0.2], vec![1], Method::MAIN.to_vec());
        let a = evaluate(&series, &cfg);
        let b = evaluate(&series, &cfg);
        assert_eq!(a.scores.len(), 2 * 3 * 4);
        assert_eq!(a.aggregates.len(), 3 * 4);
        for (x, y) in a.scores.iter().zip(&b.scores) {
            assert_eq!((&x.series_id, x.method, x.seed), (&y.series_id, y.method, y.seed));
            assert_eq!(x.mape_p.to_bits(), y.mape_p.to_bits());
            assert_eq!(x.wape_e.to_bits(), y.wape_e.to_bits());
        }
        assert!(a.scores.iter().all(|s| s.error.is_none()));
        for s in a.scores.iter().filter(|s| s.method == Method::Cpi) {
            assert!(s.wape_e <= 1e-9);
        }
    }

    #[test]
    fn failures_are_recorded_per_cell() {
        // Too short for the seasonal model's two weeks of data.
        let s = short_series(96 * 5, 2);
        let cfg = EvalConfig::new(vec![0.05], vec![0], vec![Method::Linear, Method::Seasonal]);
        let report = evaluate(&[s], &cfg);
        assert!(report.scores[0].error.is_none());
        assert!(report.scores[1].error.is_some());
        assert!(report.scores[1].mape_p.is_nan());
    }

    #[test]
    fn robust_mean_switches_at_five() {
        assert_eq!(robust_mean(&[1.0, 2.0, 3.0, 4.0]), (2.5, false));
        assert_eq!(robust_mean(&[1.0, 2.0, 3.0, 4.0, 100.0]), (3.0, true));
        assert!(robust_mean(&[]).0.is_nan());
    }

    #[test]
    fn csv_columns() {
        let s = short_series(96 * 28, 3);
        let cfg = EvalConfig::new(vec![0.1], vec![4], vec![Method::Cpi]);
        let report = evaluate(&[s], &cfg);
        let mut buf = Vec::new();
        report.write_scores(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("series_id,share,seed,method,mape_p,wape_e,runtime_s,skipped_terms\ns3,0.1,4,cpi,"));
        let mut buf = Vec::new();
        report.write_aggregates(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("share,method,mape_p_trimmed,wape_e_trimmed,runtime_s_mean\n0.1,cpi,"));
    }
}
