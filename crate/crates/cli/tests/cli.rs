use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rhoci::MethodId;

fn rho_ci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rho-ci"))
        .args(args)
        .env_remove("RHO_CI_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .zip(l.split(','))
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {}", row[key]))
}

fn ci_rows(args: &[&str]) -> HashMap<String, HashMap<String, String>> {
    rows(&stdout(&rho_ci(args)))
        .into_iter()
        .map(|r| (r["method"].clone(), r))
        .collect()
}

fn manifest(path: &Path) -> HashMap<String, String> {
    let mut name = path.file_name().unwrap().to_os_string();
    name.push(".manifest");
    fs::read_to_string(path.with_file_name(name))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn ci_from_summary_matches_known_fisher_z() {
    for (r, lo, hi) in [("0.9755", 0.905, 0.994), ("0.9738", 0.899, 0.993)] {
        let table = ci_rows(&["ci", "--r", r, "--n", "11", "--level", "0.95"]);
        let row = &table["fisher-z"];
        assert!((num(row, "lower") - lo).abs() <= 1e-3, "{row:?}");
        assert!((num(row, "upper") - hi).abs() <= 1e-3, "{row:?}");
    }
}

#[test]
fn ci_from_summary_skips_raw_data_methods() {
    let table = ci_rows(&["ci", "--r", "0.5", "--n", "11", "--inner-m", "1000"]);
    assert_eq!(table.len(), MethodId::ALL.len());
    for m in MethodId::ALL {
        let row = &table[m.name()];
        if m.needs_raw_data() {
            assert_eq!(row["lower"], "NA");
            assert!(row["note"].contains("requires raw data"), "{row:?}");
        } else {
            assert!(row["note"].is_empty(), "{row:?}");
            assert!(num(row, "lower") < 0.5 && 0.5 < num(row, "upper"), "{row:?}");
        }
    }
}

#[test]
fn ci_at_zero_is_symmetric() {
    let table = ci_rows(&["ci", "--r", "0", "--n", "20"]);
    for m in MethodId::ALL.into_iter().filter(|m| m.is_sign_equivariant_in_r()) {
        let row = &table[m.name()];
        assert!((num(row, "lower") + num(row, "upper")).abs() < 1e-6, "{row:?}");
    }
}

#[test]
fn ci_from_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pairs.csv");
    fs::write(
        &data,
        "height,weight\n1.0,2.1\n2.0,2.9\n3.0,4.2\n4.0,3.8\n5.0,6.1\n6.0,5.7\n7.0,7.4\n8.0,8.8\n",
    )
    .unwrap();
    let out = dir.path().join("ci.csv");
    let args = [
        "ci",
        "--data",
        data.to_str().unwrap(),
        "--inner-m",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ];
    stdout(&rho_ci(&args));
    let table = rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(table.len(), MethodId::ALL.len());
    for row in &table {
        assert!(row["note"].is_empty(), "{row:?}");
        let (lo, hi) = (num(row, "lower"), num(row, "upper"));
        assert!(-1.0 <= lo && lo <= hi && hi <= 1.0, "{row:?}");
    }
    let m = manifest(&out);
    assert_eq!(m["command"], "ci");
    assert_eq!(m["seed"], "1");
    assert!(m.contains_key("duration_seconds"));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "1,2\n2,3\n3,x\n").unwrap();
    let out = rho_ci(&["ci", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["ci", "--r", "1.5", "--n", "10"][..],
        &["ci", "--r", "0.5"],
        &["ci", "--r", "0.5", "--n", "10", "--methods", "nonsense"],
        &["simulate", "--rho-grid", "0,1.2", "--out", "/nonexistent/x.csv"],
        &["simulate", "--n-grid", "2,5", "--out", "/nonexistent/x.csv"],
        &["simulate", "--mu", "1,2,3", "--out", "/nonexistent/x.csv"],
        &["density", "--n", "3", "--rho", "0"],
    ] {
        let out = rho_ci(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> (String, HashMap<String, String>) {
    let out = dir.join(name);
    let mut args = vec!["simulate", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    stdout(&rho_ci(&args));
    (fs::read_to_string(&out).unwrap(), manifest(&out))
}

#[test]
fn simulate_t_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let flags = [
        "--dist", "t", "--df", "5", "--mu", "1,2", "--sigma", "1,3", "--rho-grid", "0,0.6",
        "--n-grid", "3,5,10,25", "--reps", "200", "--expensive-reps", "100", "--inner-m", "200",
        "--methods", "fisher-z,hotelling-3,pb,exact",
    ];
    let (a, ma) = simulate(dir.path(), "a.csv", &flags);
    let (b, _) = simulate(dir.path(), "b.csv", &flags);
    assert_eq!(a, b);
    assert!(a.starts_with("dist,n,rho,target,method,coverage,mean_length,failures,reps\n"));
    assert!(!a.contains('\r'));
    let table = rows(&a);
    assert_eq!(table.len(), 2 * 4 * 4);
    for row in &table {
        assert_eq!(row["dist"], "t(5)");
        let method: MethodId = row["method"].parse().unwrap();
        let n: usize = row["n"].parse().unwrap();
        if n < method.min_n() {
            assert_eq!(row["coverage"], "NA");
        } else {
            let c = num(row, "coverage");
            assert!((0.0..=1.0).contains(&c));
            let expected = if method.is_expensive() { "100" } else { "200" };
            assert_eq!(row["reps"], expected);
        }
    }
    assert_eq!(ma["dist"], "t(5)");
    assert_eq!(ma["sigma"], "1,3");
    assert_eq!(ma["n_grid"], "3,5,10,25");
}

#[test]
fn simulate_seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_rho-ci"))
        .args(["simulate", "--reps", "100", "--expensive-reps", "100", "--methods", "fisher-z"])
        .args(["--n-grid", "5", "--rho-grid", "0", "--seed", "3", "--out", out.to_str().unwrap()])
        .env("RHO_CI_SEED", "77")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(manifest(&out)["seed"], "77");
}

#[test]
fn simulate_lognormal_target_column() {
    let dir = tempfile::tempdir().unwrap();
    let flags = [
        "--dist", "lognormal", "--sigma", "0.1,0.1", "--rho-grid", "0,0.6", "--n-grid", "10",
        "--reps", "100", "--methods", "fisher-z",
    ];
    let (text, _) = simulate(dir.path(), "ln.csv", &flags);
    let table = rows(&text);
    let star = |rho: f64| (rho * 0.01f64).exp_m1() / 0.01f64.exp_m1();
    for row in &table {
        let rho = num(row, "rho");
        assert!((num(row, "target") - star(rho)).abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn figure_files_have_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("fig");
    let methods = "fisher-z,hotelling-1,ruben,wn-1,pb";
    stdout(&rho_ci(&[
        "figure", "--n", "5,20", "--reps", "400", "--inner-m", "500", "--methods", methods,
        "--out", prefix.to_str().unwrap(),
    ]));
    let read = |n: usize, kind: &str| {
        let path = dir.path().join(format!("fig_n{n}_{kind}.csv"));
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(manifest(&path)["figure_n"], n.to_string());
        rows(&text)
    };
    let key = |r: &HashMap<String, String>| (r["rho"].clone(), r["method"].clone());
    let short: HashMap<_, _> = read(5, "length").into_iter().map(|r| (key(&r), r)).collect();
    let long = read(20, "length");
    assert_eq!(long.len(), 10 * 5);
    for row in &long {
        assert!(num(row, "mean_length") < num(&short[&key(row)], "mean_length"), "{row:?}");
    }
    let cov = read(20, "coverage");
    assert_eq!(cov.len(), 10 * 5);
    assert!(cov.iter().all(|r| r.contains_key("coverage")));
}

#[test]
fn figure_exact_coverage_near_nominal() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("ex");
    stdout(&rho_ci(&[
        "figure", "--n", "10", "--reps", "2000", "--methods", "exact",
        "--out", prefix.to_str().unwrap(),
    ]));
    let table = rows(&fs::read_to_string(dir.path().join("ex_n10_coverage.csv")).unwrap());
    assert_eq!(table.len(), 10);
    for row in &table {
        let c = num(row, "coverage");
        assert!((0.93..=0.97).contains(&c), "{row:?}");
    }
}

fn density(n: &str, rho: &str, points: &str) -> Vec<(f64, f64)> {
    rows(&stdout(&rho_ci(&["density", "--n", n, "--rho", rho, "--grid-points", points])))
        .iter()
        .map(|r| (num(r, "r"), num(r, "density")))
        .collect()
}

#[test]
fn density_integrates_to_one() {
    for (n, rho) in [("4", "0.3"), ("10", "0"), ("25", "0.6"), ("12", "-0.8")] {
        let curve = density(n, rho, "2001");
        assert_eq!(curve.len(), 2001);
        assert_eq!(curve[0].0, -1.0);
        assert_eq!(curve[2000].0, 1.0);
        let area: f64 = curve.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
        assert!((area - 1.0).abs() < 1e-4, "n={n} rho={rho} area={area}");
    }
}

#[test]
fn density_shape() {
    let curve = density("10", "0", "201");
    for i in 0..curve.len() {
        let j = curve.len() - 1 - i;
        assert_eq!(curve[i].0, -curve[j].0);
        assert!((curve[i].1 - curve[j].1).abs() <= 1e-12 * curve[i].1.max(1.0));
    }
    let curve = density("25", "0.6", "2001");
    let mode = curve.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    assert!((mode - 0.6).abs() < 0.05, "mode {mode}");
}
