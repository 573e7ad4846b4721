use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dualdiv::io::read_sample;
use dualdiv::sim::preset;
use dualdiv::{fit_dphide, CensoredSample, DphideConfig, PowerDivergence};
use serde_json::Value;

fn dualdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualdiv"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn estimates(o: &Output) -> Vec<f64> {
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    v.as_array()
        .unwrap()
        .iter()
        .map(|f| f["estimate"].as_f64().unwrap())
        .collect()
}

#[test]
fn log_divergence_fit_equals_amle() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "s.csv",
        "z,delta\n0.3,1\n0.9,0\n1.4,1\n2.2,1\n0.1,0\n3.5,1\n",
    );
    let dual = dualdiv(&["fit", "--input", &input, "--gamma", "0", "--escort", "2.5"]);
    let amle = dualdiv(&["fit", "--input", &input, "--amle"]);
    assert!(dual.status.success() && amle.status.success());
    let (a, b) = (estimates(&dual)[0], estimates(&amle)[0]);
    assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
    let v: Value = serde_json::from_slice(&dual.stdout).unwrap();
    assert_eq!(v[0]["estimator"], "dphide");
    assert_eq!(v[0]["escort"], 2.5);
}

#[test]
fn km_of_uncensored_data_is_the_empirical_survival() {
    let dir = tempfile::tempdir().unwrap();
    let z = [0.7, 0.2, 1.9, 0.7, 3.1];
    let mut text = String::from("z,delta\n");
    for v in z {
        text.push_str(&format!("{v},1\n"));
    }
    let input = write(dir.path(), "u.csv", &text);
    let out = dualdiv(&["km", "--input", &input]);
    assert!(out.status.success());
    let body = stdout(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("x,estimate,lower,upper"));
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let ecdf = z.iter().filter(|&&v| v <= f[0]).count() as f64 / z.len() as f64;
        assert!((f[1] - (1.0 - ecdf)).abs() < 1e-12, "{line}");
        assert!(f[2] <= f[1] && f[1] <= f[3]);
    }
}

#[test]
fn simulate_writes_the_full_table() {
    let out = dualdiv(&[
        "simulate",
        "--preset",
        "table1",
        "--seed",
        "42",
        "--replications",
        "20",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = stdout(&out);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "estimator,25,50,75,100,150,200");
    assert_eq!(lines.len(), 10);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert!(fields[1..].iter().all(|v| v.parse::<f64>().unwrap() >= 0.0));
    }
    let json = dualdiv(&[
        "simulate",
        "--preset",
        "table1",
        "--seed",
        "42",
        "--replications",
        "20",
        "--sizes",
        "25",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn dumped_sample_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump.csv");
    let table = dir.path().join("table.csv");
    let out = dualdiv(&[
        "simulate",
        "--preset",
        "table3",
        "--seed",
        "7",
        "--replications",
        "3",
        "--sizes",
        "50",
        "--dump-sample",
        "50:2",
        "--dump-out",
        dump.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let expected = preset("table3")
        .unwrap()
        .with_seed(7)
        .generate_sample(50, 2)
        .unwrap();
    let read: CensoredSample = read_sample(&dump).unwrap();
    assert_eq!(read.len(), expected.len());
    for (a, b) in read.observations().iter().zip(expected.observations()) {
        assert_eq!(a.z.to_bits(), b.z.to_bits());
        assert_eq!(a.delta, b.delta);
    }
    let fit = dualdiv(&["fit", "--input", dump.to_str().unwrap(), "--gamma", "0.5"]);
    let lib = fit_dphide(
        &expected,
        &DphideConfig::new(PowerDivergence::new(0.5).unwrap()),
    )
    .unwrap();
    assert_eq!(estimates(&fit)[0].to_bits(), lib.estimate.to_bits());
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = dualdiv(&["fit", "--input", missing.to_str().unwrap(), "--mle"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.csv"));

    assert_eq!(
        dualdiv(&["simulate", "--preset", "table9", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dualdiv(&["simulate", "--preset", "table1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dualdiv(&["fit", "--input", "x.csv", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    let input = write(dir.path(), "ok.csv", "z,delta\n1,1\n");
    assert_eq!(dualdiv(&["fit", "--input", &input]).status.code(), Some(2));

    let flat = write(dir.path(), "flat.csv", "z,delta\n0.5,1\n5,0\n6,0\n");
    let out = dualdiv(&["fit", "--input", &flat, "--gamma", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains(",false,"));

    let censored = write(dir.path(), "cens.csv", "z,delta\n1,0\n2,0\n");
    assert_eq!(
        dualdiv(&["fit", "--input", &censored, "--mle"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn malformed_input_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "z,delta\n1,1\n2,1\nabc,0\n");
    let out = dualdiv(&["km", "--input", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.csv: line 4"), "{}", stderr(&out));
    let input = write(dir.path(), "delta.csv", "z,delta\n1,1\n2,7\n");
    let out = dualdiv(&["fit", "--input", &input, "--mle"]);
    assert!(stderr(&out).contains("line 3"));
}

#[test]
fn variance_reports_the_default_grid() {
    let out = dualdiv(&["variance", "--c", "1/9", "--gamma", "-1,0.5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let body = stdout(&out);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "gamma,theta,c,S,V,sandwich");
    assert_eq!(lines.len(), 3);
    let f: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert!((f[5] - 1.125).abs() < 1e-6);
}
