use std::fs;
use std::process::{Command, Output};

use corrnoise::scan::Dataset;

fn corrnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrnoise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn scan_to_stdout_csv() {
    let out = corrnoise(&[
        "scan", "--n", "4", "--eta", "0.9", "--temp", "0", "--nbar", "2", "--s-min", "0",
        "--s-max", "0.5", "--s-steps", "3", "--quantity", "classical-analytic,classical-upper",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let data = Dataset::read_csv(text.as_bytes()).unwrap();
    assert_eq!(data.rows.len(), 6);
    assert!(text.starts_with("n,eta,s,T,N,quantity,value_bits"));
    // memoryless point: g(1.8)
    let first = &data.rows[0];
    assert_eq!(first.s, 0.0);
    assert!((first.value_bits - 2.6328006843).abs() < 1e-9);
    assert!(String::from_utf8_lossy(&out.stderr).contains("6/6 points"));
}

#[test]
fn both_scenarios_and_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.json");
    let out = corrnoise(&[
        "scan", "--n", "2", "--eta", "0.8", "--nbar", "1", "--s-min", "0", "--s-max", "0.4",
        "--s-steps", "2", "--quantity", "classical-lower", "--scenario", "both", "--format",
        "json", "--out", path.to_str().unwrap(), "--quiet",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty());
    let rows: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    let names: Vec<&str> = rows.iter().map(|r| r["quantity"].as_str().unwrap()).collect();
    assert_eq!(names, ["classical-lower", "classical-lower", "classical-local", "classical-local"]);
    // at s = 0 the scenarios coincide
    let global = rows[0]["value_bits"].as_f64().unwrap();
    let local = rows[2]["value_bits"].as_f64().unwrap();
    assert!((global - local).abs() < 1e-8);
}

#[test]
fn scan_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scan.toml");
    fs::write(
        &config,
        "n = 2\neta = [0.9]\ntemp = [0.0, 1.0]\nnbar = 1.0\ns = [0.0, 0.5]\nquantity = [\"quantum\"]\n",
    )
    .unwrap();
    let out = corrnoise(&[
        "scan", "--config", config.to_str().unwrap(), "--temp", "0", "--quiet",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = Dataset::read_csv(stdout(&out).as_bytes()).unwrap();
    assert_eq!(data.rows.len(), 2);
    assert!(data.rows.iter().all(|r| r.temp == 0.0 && r.n == 2));
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "scan", "--n", "3", "--eta", "0.7", "--temp", "0.5", "--nbar", "2", "--s-steps", "3",
        "--quantity", "quantum,ent-assisted", "--jobs", "2", "--quiet",
    ];
    assert_eq!(corrnoise(&args).stdout, corrnoise(&args).stdout);
}

#[test]
fn figure_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = corrnoise(&["figure", "5", "--out-dir", dir.path().to_str().unwrap(), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 1);
    let text = fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    let data = Dataset::read_csv(text.as_bytes()).unwrap();
    // seed entropy, numerical and closed form, on 31 values of s
    assert_eq!(data.rows.len(), 62);
    assert_eq!(data.rows[0].value_bits, 0.0);
}

#[test]
fn failures_exit_nonzero() {
    for args in [
        vec!["scan", "--eta", "1.5", "--quiet"],
        vec!["scan", "--quantity", "nonsense", "--quiet"],
        vec!["scan", "--n", "3", "--quantity", "separability", "--quiet"],
        vec!["scan", "--config", "/nonexistent/scan.toml"],
        vec!["figure", "7"],
    ] {
        let out = corrnoise(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}
