//! End-to-end tests of the `filtrun` binary: exact flag spellings, CSV
//! schemas, JSON mirrors, exit codes, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_filtrun"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("filtrun-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn psi_csv_matches_library_values() {
    let dir = scratch("psi");
    let out = dir.join("psi.csv");
    let status = bin()
        .args([
            "psi",
            "--family",
            "log-block",
            "--nblocks",
            "12",
            "--c-grid",
            "0.1:1.0:0.1",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "d,c,lambda_c,psi_d");
    let problem = filtrun::asymptotics::family_log_block(12).unwrap();
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4);
        assert_eq!(cols[0], "4095");
        let c: f64 = cols[1].parse().unwrap();
        let lambda: usize = cols[2].parse().unwrap();
        let psi: f64 = cols[3].parse().unwrap();
        assert_eq!(
            lambda,
            filtrun::asymptotics::lambda_c(problem.nu(), c).unwrap()
        );
        let expect = filtrun::asymptotics::psi_d(problem.nu(), c).unwrap();
        assert!((psi - expect).abs() < 1e-7, "c={c}: {psi} vs {expect}");
        rows += 1;
    }
    assert_eq!(rows, 10);
    // JSON mirror exists and echoes the config
    let mirror = read(&dir.join("psi.json"));
    assert!(mirror.contains("\"command\": \"psi\""));
    assert!(mirror.contains("\"c_grid\": \"0.1:1.0:0.1\""));
}

#[test]
fn sweep_schema_and_determinism() {
    let dir = scratch("sweep");
    let out1 = dir.join("a.csv");
    let out2 = dir.join("b.csv");
    for out in [&out1, &out2] {
        let status = bin()
            .args([
                "sweep",
                "--family",
                "uniform",
                "--d",
                "256",
                "--k-grid",
                "0:2:1",
                "--n",
                "1000",
                "--seed",
                "42",
                "--select",
                "auto-diag",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = read(&out1);
    assert_eq!(
        a,
        read(&out2),
        "same command and seed must be byte-identical"
    );
    assert_eq!(
        a.lines().next().unwrap(),
        "d,k,f_size,p_hat,ci_low,ci_high,upper_bound,lower_bound,n,seed"
    );
    assert_eq!(a.lines().count(), 4);
    assert_eq!(read(&dir.join("a.json")), read(&dir.join("b.json")));
}

#[test]
fn bounds_from_problem_file() {
    let dir = scratch("bounds");
    let problem_path = dir.join("problem.json");
    std::fs::write(
        &problem_path,
        r#"{"mu": [0.7, 0.5, 0.3, 0.2], "sigma": {"diag": [1.0, 1.0, 1.0, 1.0]}, "normalize": true}"#,
    )
    .unwrap();
    let out = dir.join("bounds.csv");
    let status = bin()
        .args(["bounds", "--problem"])
        .arg(&problem_path)
        .args(["--k", "1", "--F", "full", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "kind,budget,value,phi_bar_arg,additive_slack,raw_value,f_size"
    );
    // diagonal problem: the general and diagonal upper-bound rows agree
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let general = rows.iter().find(|r| r[0] == "upper-general").unwrap();
    let diagonal = rows.iter().find(|r| r[0] == "upper-diagonal").unwrap();
    assert_eq!(general[2], diagonal[2]);
    assert!(rows.iter().any(|r| r[0] == "lower-diagonal"));
    assert!(rows.iter().any(|r| r[0] == "lower-correlation"));
}

#[test]
fn simulate_exact_and_randomized() {
    let dir = scratch("simulate");
    let out = dir.join("sim.csv");
    let status = bin()
        .args([
            "simulate", "--family", "uniform", "--d", "128", "--k", "1", "--n", "500", "--seed",
            "9", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "d,k,f_size,attack,p_hat,ci_low,ci_high,misclassified,n,seed"
    );
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "exact");

    let out2 = dir.join("sim-adv.csv");
    let status = bin()
        .args([
            "simulate", "--family", "uniform", "--d", "128", "--k", "0", "--n", "500", "--seed",
            "9", "--attack", "adv-a", "--A", "top:64", "--out",
        ])
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
    let text2 = read(&out2);
    let row: Vec<&str> = text2.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "adv-a(top:64)");
    let p_hat: f64 = row[4].parse().unwrap();
    assert!(p_hat > 0.0 && p_hat < 1.0);
}

#[test]
fn validate_subcommand_exit_code() {
    let output = bin()
        .args(["validate", "--seed", "7", "--suite", "trunc"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("PASS trunc/worked-example"));
    assert!(stdout.lines().last().unwrap().contains("checks passed"));
}

#[test]
fn bad_inputs_exit_2() {
    let dir = scratch("bad");
    // malformed problem file: diagnostic must carry a location
    let path = dir.join("broken.json");
    std::fs::write(
        &path,
        r#"{"mu": [1.0], "sigma": {"diag": "x"}, "normalize": true}"#,
    )
    .unwrap();
    let out = dir.join("out.csv");
    let output = bin()
        .args(["bounds", "--problem"])
        .arg(&path)
        .args(["--k", "0", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("line 1"), "stderr: {stderr}");

    // unknown family
    let output = bin()
        .args([
            "sweep", "--family", "mystery", "--d", "16", "--k-grid", "0:1:1", "--n", "100",
            "--seed", "1", "--out",
        ])
        .arg(dir.join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // clap-level usage error
    let output = bin().args(["sweep", "--nonsense"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    // log-block dimension that is not 2^n - 1
    let output = bin()
        .args([
            "sweep",
            "--family",
            "log-block",
            "--d",
            "4096",
            "--k-grid",
            "0:1:1",
            "--n",
            "100",
            "--seed",
            "1",
            "--out",
        ])
        .arg(dir.join("y.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn dense_problem_file_round_trip() {
    let dir = scratch("dense");
    let problem_path = dir.join("dense.json");
    std::fs::write(
        &problem_path,
        r#"{"mu": [1.0, 1.0], "sigma": {"dense": [[2.0, 1.0], [1.0, 2.0]]}, "normalize": false}"#,
    )
    .unwrap();
    let out = dir.join("bounds.csv");
    let status = bin()
        .args(["bounds", "--problem"])
        .arg(&problem_path)
        .args(["--k", "0", "--F", "full", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    // dense problems report the general forms but no diagonal specializations
    assert!(text.contains("upper-general"));
    assert!(text.contains("lower-correlation"));
    assert!(!text.contains("upper-diagonal"));
    assert!(!text.contains("lower-diagonal"));
}
