use std::path::Path;
use std::process::{Command, Output};

fn netadmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netadmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn spectra_of_triangle() {
    let o = netadmm(&["spectra", "--graph", "complete", "--n", "3", "--csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], &["3", "3", "2", "2"]);
    let a: f64 = row[4].parse().unwrap();
    let tilde: f64 = row[5].parse().unwrap();
    let big: f64 = row[6].parse().unwrap();
    assert!((a - 3.0).abs() < 1e-10);
    assert!((tilde - 3.0).abs() < 1e-10);
    assert!((big - 6.0).abs() < 1e-10);
    assert_eq!(row[7], "true");
}

#[test]
fn certify_triangle() {
    let o = netadmm(&["certify", "--graph", "complete", "--n", "3", "--nu", "1", "--L", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((value(&out, "c_star") - (2f64 / 30.0).sqrt()).abs() < 1e-6);
    assert!((value(&out, "delta_star") - 0.3873).abs() < 1e-4);
    assert!((value(&out, "rho_star") - 0.7208).abs() < 1e-4);
}

#[test]
fn certify_rejects_bad_curvature() {
    let o = netadmm(&["certify", "--graph", "path", "--n", "4", "--nu", "2", "--L", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("k3.toml");
    std::fs::write(
        &path,
        format!(
            "name = \"k3\"\n\n[graph]\nkind = \"complete\"\nn = 3\n\n[objective]\npreset = \"estimation\"\n\n[admm]\nc = 1.0\nT = 60\n{extra}"
        ),
    )
    .unwrap();
    path
}

#[test]
fn run_then_check_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out_dir = dir.path().join("out");
    let o = netadmm(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--check-all",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let trace = out_dir.join("k3.csv");
    assert!(trace.exists());
    assert!(out_dir.join("k3.report.txt").exists());

    let o = netadmm(&["check", "--trace", trace.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("overall: PASS"));

    // a tampered trace fails the replay
    let text = std::fs::read_to_string(&trace).unwrap();
    let tampered = text.replacen("\n1,", "\n1,9", 1);
    std::fs::write(&trace, tampered).unwrap();
    let o = netadmm(&["check", "--trace", trace.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_graph_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.txt"), "3 2\n0 1\n1 x\n").unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "name = \"bad\"\n\n[graph]\nkind = \"file\"\npath = \"g.txt\"\n\n[objective]\npreset = \"estimation\"\n",
    )
    .unwrap();
    let o = netadmm(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unknown_config_key_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bogus = 1\n");
    let o = netadmm(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 13"), "{err}");
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let out = tempfile::tempdir().unwrap();
    for name in ["estimation.toml", "sparse_path.toml"] {
        let cfg = root.join(name);
        let o = netadmm(&["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stdout(&o));
    }
}
