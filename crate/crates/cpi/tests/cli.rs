use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cpi::io::{parse_series, read_series, write_energy};
use cpi::synthetic::{generate, SyntheticConfig};
use cpi_core::MeterKind;

fn cpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpi"))
        .args(args)
        .env_remove("CPI_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cpi(args);
    assert!(
        out.status.success(),
        "cpi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Four weeks of quarter-hourly readings.
fn complete_series(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let cfg = SyntheticConfig {
        readings: 96 * 28,
        ..SyntheticConfig::quarter_hourly_year()
    };
    let path = dir.join(name);
    write_energy(std::fs::File::create(&path).unwrap(), &generate(&cfg, seed)).unwrap();
    path
}

#[test]
fn convert_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let energy = complete_series(dir.path(), "e.csv", 1);
    let power = dir.path().join("p.csv");
    let back = dir.path().join("e2.csv");
    ok(&["convert", p(&energy), p(&power), "--to", "power"]);
    let original = read_series(&energy).unwrap();
    let base = original.values[0].unwrap().to_string();
    ok(&["convert", p(&power), p(&back), "--to", "energy", "--base-energy", &base]);
    let round = read_series(&back).unwrap();
    assert_eq!(round.start, original.start);
    assert_eq!(round.values.len(), original.values.len());
    for (a, b) in original.values.iter().zip(&round.values) {
        assert!((a.unwrap() - b.unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn power_to_energy_needs_a_base() {
    let dir = tempfile::tempdir().unwrap();
    let energy = complete_series(dir.path(), "e.csv", 1);
    let power = dir.path().join("p.csv");
    ok(&["convert", p(&energy), p(&power), "--to", "power"]);
    let out = cpi(&["convert", p(&power), p(&dir.path().join("x.csv")), "--to", "energy"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("--base-energy"));
}

#[test]
fn insert_gaps_then_impute() {
    let dir = tempfile::tempdir().unwrap();
    let truth = complete_series(dir.path(), "truth.csv", 2);
    let degraded = dir.path().join("degraded.csv");
    let mask = dir.path().join("mask.csv");
    ok(&["insert-gaps", p(&truth), p(&degraded), "--mask", p(&mask), "--share", "10", "--seed", "3"]);

    let d = read_series(&degraded).unwrap();
    let missing = d.values.iter().filter(|v| v.is_none()).count();
    assert_eq!(missing, (0.1f64 * d.values.len() as f64).round() as usize);
    let mask_text = std::fs::read_to_string(&mask).unwrap();
    let removed: usize = mask_text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(removed, missing);
    assert!(mask_text.starts_with("start_index,start_timestamp,length\n"));

    let completed = dir.path().join("completed.csv");
    ok(&["impute", "--method", "cpi", "--weights", "5,1,10", p(&degraded), p(&completed)]);
    let c = read_series(&completed).unwrap();
    assert!(c.values.iter().all(Option::is_some));
    for (a, b) in d.values.iter().zip(&c.values) {
        if a.is_some() {
            assert_eq!(a, b);
        }
    }
    let c = c.into_energy(MeterKind::Consumption).unwrap();
    assert!(c.is_complete());

    let power = read_series(&dir.path().join("completed_power.csv")).unwrap();
    assert_eq!(power.values.len(), d.values.len() - 1);
    let audit = std::fs::read_to_string(dir.path().join("completed_audit.jsonl")).unwrap();
    let mut gaps = 0;
    for line in audit.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["kind"] == "gap" {
            gaps += 1;
            assert_eq!(v["adjustment"], "Scaled");
            let actual = v["actual_energy"].as_f64().unwrap();
            let imputed = v["imputed_energy"].as_f64().unwrap();
            assert!((actual - imputed).abs() <= 1e-9 * actual.max(1.0));
            assert!(!v["matched_days"].as_array().unwrap().is_empty());
        }
    }
    assert!(gaps > 0);
}

#[test]
fn baseline_impute_keeps_present_readings() {
    let dir = tempfile::tempdir().unwrap();
    let truth = complete_series(dir.path(), "truth.csv", 4);
    let degraded = dir.path().join("degraded.csv");
    ok(&["insert-gaps", p(&truth), p(&degraded), "--mask", p(&dir.path().join("m.csv")), "--share", "0.05"]);
    for method in ["linear", "hist-avg", "seasonal", "cpi-unscaled"] {
        let out = dir.path().join(format!("{method}.csv"));
        ok(&["impute", "--method", method, p(&degraded), p(&out)]);
        let d = read_series(&degraded).unwrap();
        let c = read_series(&out).unwrap();
        assert!(c.values.iter().all(Option::is_some), "{method}");
        for (a, b) in d.values.iter().zip(&c.values) {
            if a.is_some() {
                assert_eq!(a, b, "{method}");
            }
        }
    }
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let truth = complete_series(dir.path(), "truth.csv", 5);
    let degraded = dir.path().join("degraded.csv");
    ok(&["insert-gaps", p(&truth), p(&degraded), "--mask", p(&dir.path().join("m.csv")), "--share", "20", "--seed", "9"]);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["impute", p(&degraded), p(&a)]);
    ok(&["impute", p(&degraded), p(&b)]);
    for (x, y) in [("a.csv", "b.csv"), ("a_power.csv", "b_power.csv"), ("a_audit.jsonl", "b_audit.jsonl")] {
        assert_eq!(
            std::fs::read(dir.path().join(x)).unwrap(),
            std::fs::read(dir.path().join(y)).unwrap(),
            "{x}"
        );
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(parse_series(&text).is_ok());
}

#[test]
fn evaluate_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let inputs: Vec<PathBuf> = (0..2).map(|i| complete_series(dir.path(), &format!("s{i}.csv"), 10 + i)).collect();
    let report = dir.path().join("report.csv");
    let aggregate = dir.path().join("aggregate.csv");
    let inputs_arg = format!("{},{}", p(&inputs[0]), p(&inputs[1]));
    let stdout = ok(&[
        "evaluate",
        "--inputs",
        &inputs_arg,
        "--shares",
        "5,10",
        "--method",
        "all",
        "--report",
        p(&report),
        "--aggregate",
        p(&aggregate),
    ]);
    let rows = std::fs::read_to_string(&report).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 2 * 4);
    assert!(rows.starts_with("series_id,share,seed,method,mape_p,wape_e,runtime_s,skipped_terms\n"));
    let agg = std::fs::read_to_string(&aggregate).unwrap();
    assert_eq!(agg.lines().count(), 1 + 2 * 4);
    assert!(stdout.contains("relative to linear"));
}

#[test]
fn tune_weights_prints_the_best_point() {
    let dir = tempfile::tempdir().unwrap();
    let input = complete_series(dir.path(), "cal.csv", 20);
    let scores = dir.path().join("scores.csv");
    let stdout = ok(&[
        "tune-weights",
        "--inputs",
        p(&input),
        "--energy-range",
        "1..2",
        "--weekday-range",
        "0..1",
        "--season-range",
        "1..2",
        "--scores",
        p(&scores),
    ]);
    let line = stdout.trim();
    let w: Vec<u32> = line.split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(w.len(), 3);
    assert_eq!(std::fs::read_to_string(&scores).unwrap().lines().count(), 1 + 8);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let truth = complete_series(dir.path(), "truth.csv", 6);
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, format!("share = 10\nseed = 4\nmask = {}\n", p(&dir.path().join("m.csv")))).unwrap();
    let via_config = dir.path().join("c.csv");
    let explicit = dir.path().join("e.csv");
    ok(&["--config", p(&conf), "insert-gaps", p(&truth), p(&via_config)]);
    ok(&["insert-gaps", p(&truth), p(&explicit), "--mask", p(&dir.path().join("m2.csv")), "--share", "10", "--seed", "4"]);
    assert_eq!(std::fs::read(&via_config).unwrap(), std::fs::read(&explicit).unwrap());

    let overridden = dir.path().join("o.csv");
    ok(&["--config", p(&conf), "insert-gaps", p(&truth), p(&overridden), "--seed", "5"]);
    assert_ne!(std::fs::read(&overridden).unwrap(), std::fs::read(&explicit).unwrap());
}

#[test]
fn errors_are_one_line_and_nonzero() {
    let out = cpi(&["impute", "/nonexistent/in.csv", "/tmp/out.csv"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error:"));

    let out = cpi(&["impute", "--no-such-flag"]);
    assert!(!out.status.success());
}
