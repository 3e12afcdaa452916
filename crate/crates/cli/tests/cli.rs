use std::path::Path;
use std::process::{Command, Output};

use mtc_benjamin_cli::Snapshot;

const QUICK: &str = "example = 1
[grid]
p = 32
[stepper]
tau = 0.02
t_final = 0.2
snapshot_stride = 5
[output]
record_timing = false
";

fn mtcb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtcb")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", QUICK);
    let out = dir.path().join("out");
    let o = mtcb(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let csv = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/errors_header.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), golden.trim_end());
    // t = 0, 0.1, 0.2
    assert_eq!(csv.lines().count(), 4);
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((last[0] - 0.2).abs() < 1e-12);
    assert!(last[1] < 1e-3 && last[2] < 1e-3);
    assert_eq!(last[5], 0.0);

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "run");
    assert_eq!(summary["p"], 32);
    assert_eq!(summary["steps"], 10);
    let snaps = summary["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 3);
    let s = Snapshot::load(&out.join(snaps[2]["file"].as_str().unwrap())).unwrap();
    assert_eq!((s.p, s.coeffs.len()), (32, 64));
    assert!((s.t - 0.2).abs() < 1e-12);
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", QUICK);
    let seq = write_config(dir.path(), "s.toml", &format!("{QUICK}exec = \"sequential\"\n"));
    let runs: Vec<_> = [("a", &cfg), ("b", &cfg), ("c", &seq)]
        .iter()
        .map(|(name, c)| {
            let out = dir.path().join(name);
            let o = mtcb(&["run", "--config", c, "--out", out.to_str().unwrap()]);
            assert!(o.status.success(), "{}", stderr(&o));
            out
        })
        .collect();
    for file in ["errors.csv", "summary.json", "snapshots/snap_00002.txt"] {
        let a = std::fs::read(runs[0].join(file)).unwrap();
        assert_eq!(a, std::fs::read(runs[1].join(file)).unwrap(), "{file}");
        assert_eq!(a, std::fs::read(runs[2].join(file)).unwrap(), "{file}");
    }
}

#[test]
fn config_errors_exit_with_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (text, key) in [
        ("example = 1\n[grid]\np = 0\n", "grid.p"),
        ("example = 1\n[stepper]\ntau = 5.0\n", "stepper.tau"),
        ("example = 1\n[grid]\nwidth = 3\n", "width"),
    ] {
        let cfg = write_config(dir.path(), "bad.toml", text);
        let o = mtcb(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains(key), "{}", stderr(&o));
    }
    assert!(!out.exists());
    let o = mtcb(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_output_dir_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", QUICK);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let o = mtcb(&["run", "--config", &cfg, "--out", blocker.join("out").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error"));
    assert_eq!(std::fs::read_to_string(&blocker).unwrap(), "not a directory");
}

#[test]
fn solver_failure_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = QUICK.replace("tau = 0.02", "tau = 0.02\nfp_max_iters = 1");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = mtcb(&["run", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("did not converge"), "{}", stderr(&o));
}

#[test]
fn sweep_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let o = mtcb(&[
        "sweep", "--example", "1", "--n-list", "15,31", "--t-final", "0.1", "--no-timing", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t_or_n,l2_error,linf_error,hamiltonian_drift,fp_iters_max,wall_ms");
    assert!(lines[1].starts_with("15.0,") && lines[2].starts_with("31.0,"));
    assert_eq!(std::fs::read_to_string(out.join("errors.csv")).unwrap(), text);

    let o = mtcb(&["sweep", "--example", "1", "--n-list", "16"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn travelwave_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w");
    let cfg = write_config(
        dir.path(),
        "w.toml",
        &format!("[grid]\np = 128\n[wave]\nc = 0.5\nsigma = 0.5\n[output]\nrecord_timing = false\ndir = \"{}\"\n", out.display()),
    );
    let o = mtcb(&["travelwave", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["residual"].as_f64().unwrap() <= summary["epsilon"].as_f64().unwrap());
    assert_eq!(summary["converged"], true);
    let s = Snapshot::load(&out.join("wave.txt")).unwrap();
    assert_eq!(s.coeffs.len(), 256);

    let o = mtcb(&["travelwave", "--config", &write_config(dir.path(), "r.toml", "example = 1\n")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = mtcb(&["selftest"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 3);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn shipped_configs_parse() {
    for name in ["example1.toml", "wave5.toml", "solitons.toml"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
        mtc_benjamin_cli::read_config(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
