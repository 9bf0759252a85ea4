use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nfr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfr")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .display()
        .to_string()
}

fn tmp(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn ingest_thresholds_dense_input() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synth_k4_d05_s1.csv");
    let out = nfr(&["ingest", data.to_str().unwrap(), "--threshold", "0.6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text
        .lines()
        .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()))
        .collect();
    assert_eq!(values.len(), 16);
    assert!(values.iter().all(|&v| v == 0.0 || v >= 0.6));
    assert_eq!(values.iter().filter(|&&v| v > 0.0).count(), 4);
}

#[test]
fn bsr_and_optimize_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("k10-a08-c2.scn");
    let bsr = tmp(&dir, "bsr.csv");
    let out = nfr(&["bsr", "--scenario", &sc, "-o", bsr.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&bsr).unwrap();
    assert!(text.starts_with("i,q_max,p_bs\n"));
    assert_eq!(text.lines().count(), 12);

    let sol = tmp(&dir, "sol.csv");
    let mps = tmp(&dir, "prog.mps");
    let out = nfr(&[
        "optimize",
        "--scenario",
        &sc,
        "--cuts",
        "20",
        "--fairness",
        "tv",
        "--cf",
        "0.3",
        "--mps-out",
        mps.to_str().unwrap(),
        "-o",
        sol.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&sol).unwrap();
    assert!(text.starts_with("i,j,f,r\n"));
    assert!(text.contains("\ni,p_nf,d\n"));
    assert!(std::fs::read_to_string(&mps).unwrap().contains("ENDATA"));
}

#[test]
fn exit_codes() {
    let out = nfr(&["bsr", "--scenario", "/nonexistent/x.scn"]);
    assert_eq!(out.status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let bad = tmp(&dir, "bad.scn");
    std::fs::write(&bad, "K=10\nN=2\n").unwrap();
    let out = nfr(&["bsr", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());

    let out = nfr(&["optimize", "--scenario", &scenario("k10-a08-c2.scn"), "--cut-mode", "bogus"]);
    assert!(!out.status.success());
}

#[test]
fn simulate_reports_distance() {
    let out = nfr(&[
        "simulate",
        "--scenario",
        &scenario("k10-a08-c2.scn"),
        "--sessions",
        "2000",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("tv_distance"));
    assert!(text.contains("session_cost"));
}

#[test]
fn sweep_is_reproducible_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("k10-a08-c2.scn");
    let run = |name: &str| {
        let path = tmp(&dir, name);
        let out = nfr(&[
            "sweep",
            &sc,
            "--b-list",
            "0.3,0.6,0.9",
            "--cf-list",
            "0.05,0.1",
            "--kinds",
            "max,tv",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(&path).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);

    let table = tmp(&dir, "table.txt");
    let curve = tmp(&dir, "curve.csv");
    let out = nfr(&[
        "report",
        tmp(&dir, "a.csv").to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
        "--curve",
        curve.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&table).unwrap();
    assert!(table.lines().any(|l| l.starts_with("NFR")));
    assert!(table.lines().any(|l| l.starts_with("BSR") && l.contains("100%")));
    let curve = std::fs::read_to_string(&curve).unwrap();
    assert!(curve.starts_with("scenario,series,tag,cost_pct,entropy_pct\n"));
    assert!(curve.contains(",diverse,"));
}
