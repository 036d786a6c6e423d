use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn isce2d(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isce2d"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn white_noise_estimate_exits_zero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.cfg", "grid.N1 = 16\ngrid.N2 = 16\nlags.n1 = 2\nlags.n2 = 2\ndata.T1 = 128\ndata.T2 = 128\n");
    let o = isce2d(&["estimate", "--config", &cfg, "--seed", "4"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&d.path().join("report.json"))["converged"], true);
    let first = fs::read_to_string(d.path().join("phi_hat.txt")).unwrap();
    let tok = first.split_whitespace().next().unwrap();
    assert_eq!(tok.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
}

#[test]
fn undamped_quasi_newton_on_a4_exits_nonzero_with_report() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.cfg", "solver.kind = newton\nsolver.hessian = quasi\nsolver.line_search = pure\n");
    let o = isce2d(&["estimate", "--preset", "A4", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(1));
    let r = json(&d.path().join("report.json"));
    assert_eq!(r["converged"], false);
    assert_eq!(r["report"]["iterations"], 100);
}

#[test]
fn continuation_on_a4_exits_zero() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.cfg", "solver.kind = continuation\ncontinuation.dt = 0.5\n");
    let o = isce2d(&["estimate", "--preset", "A4", "--config", &cfg], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(d.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("outer_step,t,inner_iter,grad_norm\n"));
    assert!(trace.lines().count() > 3);
}

#[test]
fn config_errors_name_the_line() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.cfg", "# comment\ngrid.N1 = 30\ngrid.N2 30\n");
    let o = isce2d(&["estimate", "--config", &cfg, "--seed", "1"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn freqest_runs_are_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.cfg", "trials = 10\n");
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    for dir in [&a, &b] {
        let o = isce2d(&["freqest", "--config", &cfg, "--seed", "1"], dir);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["trials.jsonl", "summary.tsv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    assert_eq!(fs::read_to_string(a.join("trials.jsonl")).unwrap().lines().count(), 30);
}

#[test]
fn case_a_reports_the_grid_peaks() {
    let d = tempfile::tempdir().unwrap();
    let o = isce2d(&["freqest", "--preset", "caseA", "--seed", "0"], d.path());
    assert_eq!(o.status.code(), Some(0));
    for line in fs::read_to_string(d.path().join("trials.jsonl")).unwrap().lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        if r["method"] == "RECT" {
            continue;
        }
        let mut th: Vec<[f64; 2]> = serde_json::from_value(r["theta_hat"].clone()).unwrap();
        th.sort_by(|x, y| x[1].total_cmp(&y[1]));
        let want = [[2.3038, 2.3038], [2.3038, 4.3982]];
        for (x, y) in th.iter().zip(&want) {
            assert!((x[0] - y[0]).abs() < 5e-5 && (x[1] - y[1]).abs() < 5e-5, "{r}");
        }
    }
}

#[test]
fn sysid_a1_writes_json_and_spectra() {
    let d = tempfile::tempdir().unwrap();
    let o = isce2d(&["sysid", "--preset", "A1"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&d.path().join("sysid.json"));
    assert_eq!(r["model"], "A1");
    assert_eq!(r["solver"], "newton");
    assert!(d.path().join("phi.txt").exists() && d.path().join("phi_hat.txt").exists());
}

#[test]
fn bench_emits_a_timing_record() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.cfg", "bench.n = 5\nbench.trials = 1\n");
    let o = isce2d(&["bench", "--config", &cfg, "--seed", "1"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(d.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,method,mean_seconds"));
    assert!(csv.contains("5,structured,") && csv.contains("5,dense,"));
}
