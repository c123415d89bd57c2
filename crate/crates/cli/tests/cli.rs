use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clrspline_cli::dataset::{parse_coefficients, parse_table};
use tempfile::TempDir;

fn manifest(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn table1() -> PathBuf {
    manifest("data/shiw_income.csv")
}

fn table2() -> PathBuf {
    manifest("tests/fixtures/shiw_income_clr.csv")
}

fn table3() -> PathBuf {
    manifest("tests/fixtures/shiw_income_coefficients.csv")
}

fn clrspline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clrspline")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, content).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const HEADER: &str = "label,group,1,2,3";

#[test]
fn zero_proportion_asks_for_imputation() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "h.csv", &format!("{HEADER}\nA,N,0.5,0.5,0\n"));
    let out = clrspline(&["clr", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("row 1"), "{err}");
    assert!(err.contains("column 5"), "{err}");
    assert!(err.contains("imputed"), "{err}");
}

#[test]
fn malformed_tables_name_the_line() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (format!("{HEADER}\nA,N,0.2,0.3,0.5\nA,S,0.2,0.3,0.5\n"), "duplicate label"),
        (format!("{HEADER}\nA,N,0.2,x,0.5\n"), "line 2, column 4"),
        (format!("{HEADER}\nA,N,0.2,0.8\n"), "expected 5 columns"),
        ("label,group,one\nA,N,1\n".to_string(), "not a number"),
        (format!("{HEADER}\nA,N,0.2,0.3,0.3\n"), "row 1"),
    ];
    for (i, (content, needle)) in cases.iter().enumerate() {
        let input = write(&dir, &format!("bad{i}.csv"), content);
        let out = clrspline(&["clr", "--input", s(&input)]);
        assert_eq!(out.status.code(), Some(1), "{content}");
        assert!(stderr(&out).contains(needle), "{}", stderr(&out));
    }
}

#[test]
fn uniform_row_has_zero_clr() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "u.csv", &format!("{HEADER}\nU,N,0.25,0.25,0.5\nV,N,0.333333,0.333333,0.333333\n"));
    let out = clrspline(&["clr", "--input", s(&input)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("V,N,0.000000,0.000000,0.000000"), "{text}");
}

#[test]
fn clr_rows_sum_to_zero_after_reparse() {
    let dir = TempDir::new().unwrap();
    let output = dir.path().join("clr.csv");
    let out = clrspline(&["clr", "--input", s(&table1()), "--output", s(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = parse_table(&output).unwrap();
    assert_eq!(table.rows.len(), 20);
    for row in &table.rows {
        // six printed decimals per entry
        assert!(row.values.iter().sum::<f64>().abs() <= 9.0 * 5e-7, "{}", row.label);
    }
}

#[test]
fn curves_round_trip_through_csv() {
    let dir = TempDir::new().unwrap();
    let output = dir.path().join("curves.csv");
    let out = clrspline(&["curves", "--input", s(&table1()), "--output", s(&output), "--grid", "60"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_path(&output).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["label", "group", "x", "clr_value", "density_value"]
    );
    let records: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 20 * 60);
    for rec in &records {
        let clr: f64 = rec[3].parse().unwrap();
        let density: f64 = rec[4].parse().unwrap();
        assert!(density > 0.0);
        assert_eq!(clr.to_string(), &rec[3]);
        assert_eq!(density.to_string(), &rec[4]);
    }
    let first: Vec<&str> = records.iter().map(|r| &r[0]).collect();
    assert_eq!(first[0], "Piemonte");
    assert_eq!(first[first.len() - 1], "Sardegna");
}

#[test]
fn fit_output_round_trips_to_1e_9() {
    let dir = TempDir::new().unwrap();
    let output = dir.path().join("fit.csv");
    let out = clrspline(&["fit", "--input", s(&table2()), "--clr-input", "--output", s(&output)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = parse_coefficients(&output).unwrap();
    let text = fs::read_to_string(&output).unwrap();
    let written = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = written.split(',').collect();
    for (field, value) in fields[2..8].iter().zip(&rows[0].values) {
        let reparsed: f64 = field.parse().unwrap();
        assert!((reparsed - value).abs() <= 1e-9);
    }
    assert!(text.lines().next().unwrap().ends_with("objective,integral,rank,consistent"));
}

#[test]
fn output_is_deterministic() {
    let input = table1();
    let args = ["curves", "--input", s(&input), "--grid", "80"];
    let a = clrspline(&args);
    let b = clrspline(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let f1 = clrspline(&["fit", "--input", s(&table1())]);
    let f2 = clrspline(&["fit", "--input", s(&table1())]);
    assert_eq!(f1.stdout, f2.stdout);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(clrspline(&["fit", "--input", s(&table1())]).status.code(), Some(0));
    assert_eq!(clrspline(&["fit"]).status.code(), Some(1));
    assert_eq!(clrspline(&["fit", "--input", "/nonexistent.csv"]).status.code(), Some(1));
    assert_eq!(clrspline(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(clrspline(&["fit", "--input", s(&table1()), "--order", "3"]).status.code(), Some(1));
    assert_eq!(clrspline(&["--help"]).status.code(), Some(0));
    let empty = write(&dir, "empty.csv", &format!("{HEADER}\n"));
    let out = clrspline(&["clr", "--input", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("usage"), "{}", stderr(&out));
    let out = clrspline(&["fit", "--input", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    let out = clrspline(&[
        "report",
        "--coefficients",
        s(&table3()),
        "--identity-tol",
        "5e-3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_clr_row_gives_uniform_density() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "u.csv",
        "label,group,0,1,2,3,4,5\nU,N,0.1666667,0.1666667,0.1666667,0.1666667,0.1666667,0.1666667\nW,N,0.1,0.2,0.3,0.2,0.1,0.1\n",
    );
    let out = clrspline(&["curves", "--input", s(&input), "--knots", "0,2.5,5", "--grid", "50"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let uniform: Vec<(f64, f64)> = text
        .lines()
        .filter(|l| l.starts_with("U,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect();
    assert_eq!(uniform.len(), 50);
    for (clr, density) in uniform {
        assert!(clr.abs() <= 1e-12);
        assert!((density - 0.2).abs() <= 1e-12);
    }
}

#[test]
fn fit_of_zero_ordinates_is_zero() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "z.csv", "label,group,0,1,2,3,4,5\nZ,N,0,0,0,0,0,0\n");
    let out = clrspline(&["fit", "--input", s(&input), "--clr-input", "--knots", "0,2.5,5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let line = stdout(&out).lines().nth(1).unwrap().to_string();
    let fields: Vec<&str> = line.split(',').collect();
    assert!(fields[2..8].iter().all(|f| *f == "0.000000"), "{line}");
}

#[test]
fn raw_mode_goes_negative() {
    let out = clrspline(&["curves", "--input", s(&table1()), "--mode", "unconstrained_raw", "--grid", "400"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let negative = text
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap() < 0.0)
        .count();
    assert!(negative > 0);
    let out = clrspline(&["curves", "--input", s(&table2()), "--clr-input", "--mode", "unconstrained_raw"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn coefficient_report_flags_the_two_suspect_rows() {
    let out = clrspline(&["report", "--coefficients", s(&table3()), "--identity-tol", "5e-3"]);
    let text = stdout(&out);
    let ok = text.lines().filter(|l| l.ends_with(" ok")).count();
    let failed: Vec<&str> = text
        .lines()
        .filter(|l| l.ends_with(" FAIL"))
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(ok, 18, "{text}");
    assert_eq!(failed, ["Piemonte", "Abruzzo"]);
}

#[test]
fn report_lists_every_row() {
    let out = clrspline(&["report", "--input", s(&table1())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("mode zero_integral_clr  knots 0,30000,70000,110709"));
    assert_eq!(text.lines().filter(|l| l.ends_with("  ok")).count(), 20, "{text}");
}

#[test]
fn json_config_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"alpha": 100, "order": 1, "grid_size": 50}"#);
    let base = clrspline(&["fit", "--input", s(&table1())]);
    let from_file = clrspline(&["fit", "--input", s(&table1()), "--config", s(&cfg)]);
    let flag_wins = clrspline(&["fit", "--input", s(&table1()), "--config", s(&cfg), "--alpha", "1", "--order", "2"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_ne!(base.stdout, from_file.stdout);
    assert_eq!(base.stdout, flag_wins.stdout);
    let bad = write(&dir, "bad.json", r#"{"smoothing": 1}"#);
    let out = clrspline(&["fit", "--input", s(&table1()), "--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("config"), "{}", stderr(&out));
}
