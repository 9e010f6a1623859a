use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("grushin-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&p);
    fs::create_dir_all(&p).unwrap();
    p
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grushin")).arg("--out").arg(out).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn grid_and_manifest() {
    let dir = scratch("grid");
    let o = run(&dir, &["grid"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.join("grid.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert_eq!(csv.lines().filter(|l| l.starts_with("x1,")).count(), 64);
    assert_eq!(csv.lines().filter(|l| l.starts_with("lambda,")).count(), 64);
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("# command:") && manifest.contains("d1=1"));
}

#[test]
fn replay_is_bit_identical() {
    let a = scratch("replay-a");
    let b = scratch("replay-b");
    let o = run(&a, &["field", "--set", "seed=5", "--set", "degree=3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = a.join("manifest.txt");
    let o = run(&b, &["--config", manifest.to_str().unwrap(), "field", "--workers", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(a.join("field.bin")).unwrap(), fs::read(b.join("field.bin")).unwrap());
    assert_eq!(fs::read(a.join("field.csv")).unwrap(), fs::read(b.join("field.csv")).unwrap());
    let hash = |d: &Path| fs::read_to_string(d.join("manifest.txt")).unwrap().lines().find(|l| l.starts_with("# config_hash=")).unwrap().to_string();
    assert_eq!(hash(&a), hash(&b));
}

#[test]
fn riesz_summary_reports_deviation() {
    let dir = scratch("riesz");
    let o = run(&dir, &["riesz", "--set", "j=2", "--set", "degree=2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = fs::read_to_string(dir.join("riesz_summary.csv")).unwrap();
    let dev: f64 = s.lines().find_map(|l| l.strip_prefix("deviation,")).unwrap().parse().unwrap();
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn verify_writes_reports() {
    let dir = scratch("verify");
    let o = run(&dir, &["verify", "--suite", "thresholds"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = fs::read_to_string(dir.join("verify.csv")).unwrap();
    assert!(v.contains("PASS"));
    assert!(dir.join("report_00.csv").exists());
}

#[test]
fn thresholds_table() {
    let dir = scratch("thr");
    let o = run(&dir, &["thresholds", "--set", "variant=restricted", "--set", "resolution=2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = fs::read_to_string(dir.join("thresholds.csv")).unwrap();
    assert!(t.lines().count() >= 9);
}

#[test]
fn errors_exit_with_two() {
    let dir = scratch("err");
    let o = run(&dir, &["verify", "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("core") && stderr(&o).contains("plancherel"));

    let cfg = dir.join("cfg.txt");
    fs::write(&cfg, "d2 = 1\nx1_extent = 8\n").unwrap();
    let o = run(&dir, &["--config", cfg.to_str().unwrap(), "grid"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing config key `d1`"), "{}", stderr(&o));

    let o = run(&dir, &["probe", "--kind", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&dir, &["grid", "--set", "novalue"]);
    assert_eq!(o.status.code(), Some(2));
}
