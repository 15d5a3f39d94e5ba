//! End-to-end tests of the `rank-cusum` binary: exit codes, report JSON,
//! ingestion errors, and determinism of the simulation runners.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Days, NaiveDate};
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rank-cusum"));
    cmd.env_remove("RANK_CUSUM_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to spawn the binary")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout_f64(output: &Output) -> f64 {
    String::from_utf8_lossy(&output.stdout)
        .trim()
        .parse()
        .expect("stdout should be one number")
}

fn report(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout should be a JSON report")
}

/// Deterministic pseudo-noise with no dependence between the coordinates.
fn null_rows(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            (
                ((i * 37 + 11) % 101) as f64 * 0.13,
                ((i * 53 + 29) % 97) as f64 * 0.17,
            )
        })
        .collect()
}

/// Perfectly concordant pairs that switch to perfectly discordant halfway.
fn switch_rows(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let x = (i as f64 * 0.7).sin() * 2.0 + ((i * 37) % 101) as f64 * 0.01;
            let y = if i < n / 2 { x } else { -x };
            (x, y)
        })
        .collect()
}

fn write_paired(path: &Path, rows: &[(f64, f64)], dates: bool) {
    let mut text = if dates {
        String::from("date,x,y\n")
    } else {
        String::from("x,y\n")
    };
    let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    for (i, (x, y)) in rows.iter().enumerate() {
        if dates {
            let d = start.checked_add_days(Days::new(i as u64)).unwrap();
            text.push_str(&format!("{d},{x},{y}\n"));
        } else {
            text.push_str(&format!("{x},{y}\n"));
        }
    }
    fs::write(path, text).unwrap();
}

fn write_prices(path: &Path, prices: &[(NaiveDate, f64)]) {
    let mut text = String::from("date,value\n");
    for (date, value) in prices {
        text.push_str(&format!("{date},{value}\n"));
    }
    fs::write(path, text).unwrap();
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn path_str(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn quantiles_prints_reference_values() {
    let out = run(&["quantiles", "--p", "0.95"]);
    assert_exit(&out, 0);
    assert!((stdout_f64(&out) - 1.3580986393).abs() < 1e-6);

    let out = run(&["quantiles", "--x", "0"]);
    assert_exit(&out, 0);
    assert_eq!(stdout_f64(&out), 1.0);

    let out = run(&["quantiles", "--x", "1.3581"]);
    assert_exit(&out, 0);
    assert!((stdout_f64(&out) - 0.05).abs() < 1e-4);
}

#[test]
fn quantiles_usage_errors_exit_2() {
    assert_exit(&run(&["quantiles"]), 2);
    assert_exit(&run(&["quantiles", "--p", "0.5", "--x", "1.0"]), 2);
    assert_exit(&run(&["quantiles", "--p", "1.5"]), 2);
}

#[test]
fn stable_series_exits_0() {
    let dir = tmp();
    let input = dir.path().join("null.csv");
    write_paired(&input, &null_rows(200), false);
    let out = run(&["test", "--input", path_str(&input)]);
    assert_exit(&out, 0);
    let r = report(&out);
    assert_eq!(r["input"]["n"], 200);
    assert_eq!(r["tests"][0]["statistic_kind"], "kendall");
    assert_eq!(r["tests"][0]["reject"], false);
    assert!(r["tests"][0]["p_value"].as_f64().unwrap() > 0.05);
}

#[test]
fn hard_switch_exits_1_and_is_located() {
    let dir = tmp();
    let input = dir.path().join("switch.csv");
    write_paired(&input, &switch_rows(200), true);
    let out_json = dir.path().join("artifacts/report.json");
    let out = run(&[
        "test",
        "--input",
        path_str(&input),
        "--date-column",
        "date",
        "--statistic",
        "all",
        "--out",
        path_str(&out_json),
    ]);
    assert_exit(&out, 1);

    let r = report(&out);
    for t in r["tests"].as_array().unwrap() {
        assert_eq!(t["reject"], true);
    }
    let k_hat = r["change_point"]["k_hat"].as_u64().unwrap();
    assert!((95..=105).contains(&k_hat), "k_hat = {k_hat}");
    let lambda = r["change_point"]["lambda_hat"].as_f64().unwrap();
    assert!((lambda - 0.5).abs() <= 0.05);
    assert_eq!(r["input"]["first_date"], "2024-01-01");
    assert!(r["change_point"]["date"].is_string());

    // --out writes the same report plus one CUSUM path CSV per test.
    let written: Value = serde_json::from_str(&fs::read_to_string(&out_json).unwrap()).unwrap();
    assert_eq!(written, r);
    for stat in ["kendall", "pearson", "spearman_copula"] {
        let csv_path = dir.path().join(format!("artifacts/report.process.{stat}.csv"));
        let text = fs::read_to_string(&csv_path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,date,weighted_abs_diff");
        assert!(lines.count() >= 199 - 1);
    }
}

#[test]
fn report_json_round_trips() {
    let dir = tmp();
    let input = dir.path().join("null.csv");
    write_paired(&input, &null_rows(60), true);
    let out = run(&[
        "test",
        "--input",
        path_str(&input),
        "--date-column",
        "date",
        "--statistic",
        "all",
    ]);
    assert_exit(&out, 0);
    let first = report(&out);
    let second: Value = serde_json::from_str(&serde_json::to_string(&first).unwrap()).unwrap();
    assert_eq!(first, second);
}

#[test]
fn locate_reports_the_switch() {
    let dir = tmp();
    let input = dir.path().join("switch.csv");
    write_paired(&input, &switch_rows(200), false);
    let out = run(&["locate", "--input", path_str(&input)]);
    assert_exit(&out, 0);
    let r = report(&out);
    assert_eq!(r["tests"].as_array().unwrap().len(), 0);
    let k_hat = r["change_point"]["k_hat"].as_u64().unwrap();
    assert!((95..=105).contains(&k_hat), "k_hat = {k_hat}");
}

#[test]
fn bandwidth_zero_is_a_usage_error() {
    let dir = tmp();
    let input = dir.path().join("null.csv");
    write_paired(&input, &null_rows(50), false);
    let out = run(&["test", "--input", path_str(&input), "--bandwidth", "0"]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("bandwidth"));
}

#[test]
fn oversized_bandwidth_warns() {
    let dir = tmp();
    let input = dir.path().join("null.csv");
    write_paired(&input, &null_rows(200), false);
    let out = run(&["test", "--input", path_str(&input), "--bandwidth", "20"]);
    assert_exit(&out, 0);
    assert!(stderr_of(&out).contains("warning"));
}

fn sample_prices(skip: usize) -> Vec<(NaiveDate, f64)> {
    let start = NaiveDate::from_ymd_opt(2024, 3, 1).unwrap();
    (0..40)
        .filter(|&i| i != skip)
        .map(|i| {
            let date = start.checked_add_days(Days::new(i as u64)).unwrap();
            let level = 100.0 * (0.002 * i as f64 + 0.05 * (0.9 * i as f64).sin()).exp();
            (date, level)
        })
        .collect()
}

fn second_prices(skip: usize) -> Vec<(NaiveDate, f64)> {
    let start = NaiveDate::from_ymd_opt(2024, 3, 1).unwrap();
    (0..40)
        .filter(|&i| i != skip)
        .map(|i| {
            let date = start.checked_add_days(Days::new(i as u64)).unwrap();
            let level = 80.0 * (0.001 * i as f64 + 0.04 * (1.7 * i as f64).cos()).exp();
            (date, level)
        })
        .collect()
}

/// Log returns over the dates shared by both price lists, mirroring the
/// binary's join. Returns (x, y) pairs.
fn joined_returns(a: &[(NaiveDate, f64)], b: &[(NaiveDate, f64)]) -> Vec<(f64, f64)> {
    let bmap: std::collections::BTreeMap<NaiveDate, f64> = b.iter().copied().collect();
    let joined: Vec<(f64, f64)> = a
        .iter()
        .filter_map(|(d, pa)| bmap.get(d).map(|&pb| (*pa, pb)))
        .collect();
    joined
        .windows(2)
        .map(|w| ((w[1].0 / w[0].0).ln(), (w[1].1 / w[0].1).ln()))
        .collect()
}

#[test]
fn prices_mode_matches_paired_ingestion_bit_for_bit() {
    let dir = tmp();
    let a = sample_prices(17);
    let b = second_prices(23);
    let file_a = dir.path().join("a.csv");
    let file_b = dir.path().join("b.csv");
    write_prices(&file_a, &a);
    write_prices(&file_b, &b);

    let paired = dir.path().join("paired.csv");
    write_paired(&paired, &joined_returns(&a, &b), false);

    let from_prices = run(&[
        "test",
        "--mode",
        "prices",
        "--input",
        path_str(&file_a),
        "--input2",
        path_str(&file_b),
        "--statistic",
        "all",
    ]);
    let from_paired = run(&[
        "test",
        "--input",
        path_str(&paired),
        "--statistic",
        "all",
    ]);
    assert_eq!(from_prices.status.code(), from_paired.status.code());

    let rp = report(&from_prices);
    let rq = report(&from_paired);
    assert_eq!(rp["input"]["n"], 37);
    assert_eq!(rq["input"]["n"], 37);
    for i in 0..3 {
        for field in ["t_n", "d_hat", "normalized", "p_value"] {
            let x = rp["tests"][i][field].as_f64().unwrap();
            let y = rq["tests"][i][field].as_f64().unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "field {field} of test {i}");
        }
        assert_eq!(rp["tests"][i]["argmax_k"], rq["tests"][i]["argmax_k"]);
    }
}

#[test]
fn swapping_price_files_preserves_the_statistics() {
    let dir = tmp();
    let file_a = dir.path().join("a.csv");
    let file_b = dir.path().join("b.csv");
    write_prices(&file_a, &sample_prices(17));
    write_prices(&file_b, &second_prices(23));

    let ab = run(&[
        "test",
        "--mode",
        "prices",
        "--input",
        path_str(&file_a),
        "--input2",
        path_str(&file_b),
        "--statistic",
        "all",
    ]);
    let ba = run(&[
        "test",
        "--mode",
        "prices",
        "--input",
        path_str(&file_b),
        "--input2",
        path_str(&file_a),
        "--statistic",
        "all",
    ]);
    let r1 = report(&ab);
    let r2 = report(&ba);
    for i in 0..3 {
        for field in ["t_n", "d_hat", "normalized", "p_value"] {
            let x = r1["tests"][i][field].as_f64().unwrap();
            let y = r2["tests"][i][field].as_f64().unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "field {field} of test {i}");
        }
    }
}

#[test]
fn swapping_paired_columns_preserves_the_statistics() {
    let dir = tmp();
    let input = dir.path().join("ab.csv");
    let mut text = String::from("a,b\n");
    for (x, y) in null_rows(80) {
        text.push_str(&format!("{x},{y}\n"));
    }
    fs::write(&input, text).unwrap();

    let fwd = run(&[
        "test", "--input", path_str(&input),
        "--x-column", "a", "--y-column", "b", "--statistic", "all",
    ]);
    let rev = run(&[
        "test", "--input", path_str(&input),
        "--x-column", "b", "--y-column", "a", "--statistic", "all",
    ]);
    let r1 = report(&fwd);
    let r2 = report(&rev);
    for i in 0..3 {
        for field in ["t_n", "d_hat", "normalized", "p_value"] {
            let x = r1["tests"][i][field].as_f64().unwrap();
            let y = r2["tests"][i][field].as_f64().unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "field {field} of test {i}");
        }
        assert_eq!(r1["tests"][i]["argmax_k"], r2["tests"][i]["argmax_k"]);
    }
}

#[test]
fn ingestion_errors_exit_2_with_messages() {
    let dir = tmp();
    let jan = dir.path().join("jan.csv");
    let feb = dir.path().join("feb.csv");
    fs::write(&jan, "date,value\n2024-01-01,1\n2024-01-02,2\n").unwrap();
    fs::write(&feb, "date,value\n2024-02-01,1\n2024-02-02,2\n").unwrap();
    let out = run(&[
        "test", "--mode", "prices",
        "--input", path_str(&jan), "--input2", path_str(&feb),
    ]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("share"));

    let zero = dir.path().join("zero.csv");
    fs::write(&zero, "date,value\n2024-01-01,1\n2024-01-02,0\n").unwrap();
    let out = run(&[
        "test", "--mode", "prices",
        "--input", path_str(&zero), "--input2", path_str(&jan),
    ]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("not positive"));

    let dup = dir.path().join("dup.csv");
    fs::write(&dup, "date,value\n2024-01-01,1\n2024-01-01,2\n").unwrap();
    let out = run(&[
        "test", "--mode", "prices",
        "--input", path_str(&dup), "--input2", path_str(&jan),
    ]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("duplicate"));

    let paired = dir.path().join("p.csv");
    write_paired(&paired, &null_rows(30), false);
    let out = run(&["test", "--input", path_str(&paired), "--x-column", "zz"]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("'zz'"));

    let bad_date = dir.path().join("bd.csv");
    fs::write(&bad_date, "date,x,y\n01/02/2024,1.0,2.0\n").unwrap();
    let out = run(&[
        "test", "--input", path_str(&bad_date), "--date-column", "date",
    ]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("date"));

    let short = dir.path().join("short.csv");
    write_paired(&short, &null_rows(10), false);
    let out = run(&["test", "--input", path_str(&short)]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("at least 20"));
}

#[test]
fn simulate_table1_is_deterministic() {
    let dir = tmp();
    let d1 = dir.path().join("run1");
    let d2 = dir.path().join("run2");
    let args = |out_dir: &PathBuf| -> Vec<String> {
        [
            "simulate", "table1",
            "--n", "30", "--reps", "5", "--seed", "7",
            "--out-dir", path_str(out_dir),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let first = bin().args(args(&d1)).output().unwrap();
    let second = bin().args(args(&d2)).output().unwrap();
    assert_exit(&first, 0);
    assert_exit(&second, 0);
    assert_eq!(first.stdout, second.stdout);
    let csv1 = fs::read(d1.join("table1.csv")).unwrap();
    let csv2 = fs::read(d2.join("table1.csv")).unwrap();
    assert_eq!(csv1, csv2);

    // Layout: header plus one row per distribution/test pair.
    let text = String::from_utf8(csv1).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "distribution,test,none,-0.2,+0.2,-0.4,+0.4,-0.6,-0.8"
    );
    assert_eq!(lines.count(), 15);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tmp();
    let d1 = dir.path().join("one");
    let d2 = dir.path().join("two");
    let run_with = |threads: &str, out_dir: &PathBuf| {
        bin()
            .env("RANK_CUSUM_THREADS", threads)
            .args([
                "simulate", "table1",
                "--n", "30", "--reps", "4", "--seed", "11",
                "--out-dir", path_str(out_dir),
            ])
            .output()
            .unwrap()
    };
    let one = run_with("1", &d1);
    let two = run_with("2", &d2);
    assert_exit(&one, 0);
    assert_exit(&two, 0);
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(
        fs::read(d1.join("table1.csv")).unwrap(),
        fs::read(d2.join("table1.csv")).unwrap()
    );

    let bad = bin()
        .env("RANK_CUSUM_THREADS", "abc")
        .args(["quantiles", "--p", "0.5"])
        .output()
        .unwrap();
    assert_exit(&bad, 2);
}

#[test]
fn simulate_convergence_writes_summary_and_samples() {
    let dir = tmp();
    let out_dir = dir.path().join("conv");
    let out = run(&[
        "simulate", "convergence",
        "--model", "2", "--reps", "3", "--seed", "5",
        "--out-dir", path_str(&out_dir),
    ]);
    assert_exit(&out, 0);
    let summary = fs::read_to_string(out_dir.join("convergence_model2.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    for n in [10, 20, 50, 100, 500, 1000] {
        let samples =
            fs::read_to_string(out_dir.join(format!("convergence_model2_n{n}.csv"))).unwrap();
        assert_eq!(samples.lines().count(), 4);
    }
}

#[test]
fn simulate_locator_writes_accuracy_cells() {
    let dir = tmp();
    let out_dir = dir.path().join("loc");
    let out = run(&[
        "simulate", "locator",
        "--reps", "2", "--seed", "3",
        "--out-dir", path_str(&out_dir),
    ]);
    assert_exit(&out, 0);
    let text = fs::read_to_string(out_dir.join("locator.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("n,lambda_star,"));
}
