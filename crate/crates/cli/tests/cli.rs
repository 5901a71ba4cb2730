use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use excessvol::data_ingest::{load_quadruple, log_returns, ColumnMapping};
use excessvol::simulation::{generate_returns, SyntheticScenario};
use tempfile::TempDir;

fn excessvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_excessvol")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = excessvol(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["--command", "simulate", "--output", path(dir)];
    args.extend_from_slice(extra);
    ok(&args);
    dir.join("quadruple.csv")
}

fn rows(file: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(file)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn weekday_dates(n: usize) -> Vec<String> {
    excessvol::simulation::business_days(n).iter().map(|d| d.to_string()).collect()
}

#[test]
fn simulated_file_loads_cleanly_and_repeats() {
    let tmp = TempDir::new().unwrap();
    let a = simulate(&tmp.path().join("a"), &["--seed", "4"]);
    let b = simulate(&tmp.path().join("b"), &["--seed", "4"]);
    let c = simulate(&tmp.path().join("c"), &["--seed", "5"]);
    let (quad, report) = load_quadruple(&a, &ColumnMapping::default()).unwrap();
    assert_eq!((quad.len(), report.rows_dropped), (600, 0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());

    let (stock, _) = generate_returns(&SyntheticScenario::default_nig(600, 4));
    let spx = quad.spx();
    let total: f64 = stock.iter().sum();
    assert!(((spx[599] / spx[0]).ln() - total).abs() < 1e-10);
    assert_eq!(log_returns(spx).unwrap().len(), stock.len());
}

#[test]
fn normal_variation_with_equal_vols_is_zero() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("equal.csv");
    let mut text = String::from("date,spx_close,vix_close,ust10y_yield,tyvix_close\n");
    for (i, d) in weekday_dates(300).iter().enumerate() {
        let v = 12.0 + (i as f64 * 0.37).sin() * 3.0;
        text.push_str(&format!("{d},{},{v},2.5,{v}\n", 100.0 + i as f64));
    }
    std::fs::write(&file, text).unwrap();
    let out = tmp.path().join("out");
    ok(&["--command", "variation", "--model", "normal", "--input", path(&file), "--output", path(&out), "--window", "60"]);
    let chi = rows(&out.join("chi.csv"));
    let var = rows(&out.join("variation.csv"));
    assert_eq!((chi.len(), var.len()), (300, 241));
    assert!(var.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn fit_writes_one_row_per_window_and_asset() {
    let tmp = TempDir::new().unwrap();
    let data = simulate(&tmp.path().join("sim"), &["--seed", "1"]);
    let out = tmp.path().join("fit");
    ok(&["--command", "fit", "--model", "nig", "--input", path(&data), "--output", path(&out)]);
    let table = rows(&out.join("fits.csv"));
    for asset in ["stock", "bond"] {
        let mine: Vec<_> = table.iter().filter(|r| r[2] == asset).collect();
        assert_eq!(mine.len(), 600 - 252);
        assert!(mine.iter().all(|r| r[8] == "true" && r[10] == "false"), "{asset} has unconverged windows");
    }
    let header = std::fs::read_to_string(out.join("fits.csv")).unwrap();
    assert!(header.starts_with("window,terminal_date,asset,mu,alpha,beta,delta,objective,converged"));
}

#[test]
fn short_input_is_a_clean_fit_error() {
    let tmp = TempDir::new().unwrap();
    let data = simulate(&tmp.path().join("sim"), &["--n-days", "100"]);
    let out = excessvol(&["--command", "fit", "--input", path(&data), "--output", path(&tmp.path().join("fit"))]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("504") && err.contains("100"), "{err}");
    assert!(err.contains("stage"), "{err}");
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let data = simulate(&tmp.path().join("sim"), &["--seed", "2", "--n-days", "200"]);
    let first = tmp.path().join("first");
    ok(&["--command", "variation", "--model", "ncig", "--window", "60", "--input", path(&data), "--output", path(&first)]);
    let second = tmp.path().join("second");
    ok(&["--manifest", path(&first.join("manifest.txt")), "--output", path(&second)]);
    for name in ["chi.csv", "variation.csv", "fits.csv", "manifest.txt"] {
        assert_eq!(std::fs::read(first.join(name)).unwrap(), std::fs::read(second.join(name)).unwrap(), "{name}");
    }
    let manifest = std::fs::read_to_string(first.join("manifest.txt")).unwrap();
    assert!(manifest.contains("input_sha256=") && manifest.contains("version="));
}

#[test]
fn changed_input_is_caught_by_the_manifest() {
    let tmp = TempDir::new().unwrap();
    let data = simulate(&tmp.path().join("sim"), &["--n-days", "130"]);
    let first = tmp.path().join("first");
    ok(&["--command", "variation", "--model", "normal", "--window", "60", "--input", path(&data), "--output", path(&first)]);
    let mut text = std::fs::read_to_string(&data).unwrap();
    text.push('\n');
    std::fs::write(&data, text).unwrap();
    let out = excessvol(&["--manifest", path(&first.join("manifest.txt")), "--output", path(&tmp.path().join("x"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingest"));
}

#[test]
fn bad_flags_fail() {
    let tmp = TempDir::new().unwrap();
    let o = path(tmp.path());
    for args in [
        &["--command", "dance", "--output", o][..],
        &["--command", "fit", "--output", o],
        &["--command", "variation", "--input", "missing.csv", "--output", o],
        &["--command", "simulate", "--window", "10", "--output", o],
        &["--command", "simulate", "--eq20-variant", "loose", "--output", o],
        &["--command", "simulate", "--manifest", "m.txt", "--output", o],
    ] {
        assert!(!excessvol(args).status.success(), "{args:?}");
    }
}

#[test]
fn floor_writes_maxima_and_summary() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("floor");
    ok(&[
        "--command", "floor", "--model", "nig", "--window", "60", "--n-days", "130", "--replications", "100",
        "--stock-law", "nig:0,2,0,1", "--bond-law", "nig:0,3,0,0.5", "--output", path(&out),
    ]);
    let maxima = rows(&out.join("floor.csv"));
    assert_eq!(maxima.len(), 100);
    let mut sorted: Vec<f64> = maxima.iter().map(|r| r[2].parse().unwrap()).collect();
    sorted.sort_by(f64::total_cmp);
    let summary = rows(&out.join("floor_summary.csv"));
    let floor: f64 = summary.iter().find(|r| r[0] == "floor").unwrap()[1].parse().unwrap();
    assert_eq!(floor, sorted[98]);
}
