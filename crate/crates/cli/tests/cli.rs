use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CONFIG: &str = r#"
version = 1

[output]
dir = "out"
formats = ["csv", "json"]

[[scenario]]
name = "disk"
n = 2
r0 = 1.0
kappa_g = { kind = "named", name = "euclidean" }
kappa_minus = { kind = "constant", value = -0.5 }
kappa_plus = { kind = "constant", value = 0.5 }
t_grid = [0.05, 0.1, 0.3]

[[scenario]]
name = "ball3"
n = 3
r0 = 1.0
kappa_g = { kind = "constant", value = 0.0 }

[[scenario]]
name = "sphere"
n = 2
r0 = 1.0
s_max = 3.5
kappa_g = { kind = "named", name = "sphere" }

[[scenario]]
name = "zero-time"
n = 2
r0 = 1.0
kappa_g = { kind = "constant", value = 0.0 }
t_grid = [0.0, 0.1]
"#;

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn setup(config: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("scenarios.toml");
    fs::write(&path, config).unwrap();
    (dir, path)
}

/// Everything but the invalid zero-time scenario.
fn good_config_text() -> &'static str {
    &CONFIG[..CONFIG.find("[[scenario]]\nname = \"zero-time\"").unwrap()]
}

fn good_config() -> (TempDir, PathBuf) {
    setup(good_config_text())
}

fn warpspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpspec"))
        .args(args)
        .env("WARPSPEC_WORKERS", "2")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn warp_sphere_stops_at_pi_and_flat_reports_inf() {
    let (dir, cfg) = good_config();
    let out = warpspec(&["warp", s(&cfg), "sphere"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/sphere/warp.csv")).unwrap();
    let meta = read_json(dir.path().join("out/sphere/warp.json"));
    let h = meta["h"].as_f64().unwrap();
    let last_s: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((last_s - std::f64::consts::PI).abs() <= h, "{last_s}");
    assert!((meta["l"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-8);

    assert_eq!(code(&warpspec(&["warp", s(&cfg), "disk"])), 0);
    let meta = read_json(dir.path().join("out/disk/warp.json"));
    assert_eq!(meta["l"], "inf");
    assert_eq!(meta["n"], 2);
}

#[test]
fn missing_scenario_and_bad_config_exit_2() {
    let (_dir, cfg) = good_config();
    assert_eq!(code(&warpspec(&["warp", s(&cfg), "nope"])), 2);
    assert_eq!(code(&warpspec(&["eig", "/nonexistent/file.toml", "disk"])), 2);
    let (_bad, typo) = setup(&CONFIG.replace("r0 = 1.0\ns_max", "r0 = 1.0\nsmax"));
    assert_eq!(code(&warpspec(&["warp", s(&typo), "sphere"])), 2);
    assert_eq!(code(&warpspec(&["--h-override", "-1", "warp", s(&cfg), "disk"])), 2);
}

#[test]
fn eig_values_and_default_p() {
    let (dir, cfg) = good_config();
    assert_eq!(code(&warpspec(&["eig", s(&cfg), "disk"])), 0);
    let summary = read_json(dir.path().join("out/disk/eig.json"));
    assert!((summary["lambda"].as_f64().unwrap() - 5.783186).abs() < 1e-5);
    let default_csv = fs::read(dir.path().join("out/disk/eig.csv")).unwrap();
    let default_json = fs::read(dir.path().join("out/disk/eig.json")).unwrap();

    assert_eq!(code(&warpspec(&["eig", s(&cfg), "disk", "--p", "2"])), 0);
    assert_eq!(fs::read(dir.path().join("out/disk/eig.csv")).unwrap(), default_csv);
    assert_eq!(fs::read(dir.path().join("out/disk/eig.json")).unwrap(), default_json);

    assert_eq!(code(&warpspec(&["eig", s(&cfg), "ball3", "--k", "2"])), 0);
    let summary = read_json(dir.path().join("out/ball3/eig.json"));
    let want = 4.0 * std::f64::consts::PI.powi(2);
    assert!((summary["lambda"].as_f64().unwrap() - want).abs() < 1e-6 * want);
    assert_eq!(summary["node_count"], 1);

    assert_eq!(code(&warpspec(&["eig", s(&cfg), "disk", "--p", "3"])), 0);
    assert_eq!(code(&warpspec(&["eig", s(&cfg), "disk", "--p", "0.5"])), 2);
}

#[test]
fn kernel_cross_check_and_neumann_mass() {
    let (dir, cfg) = good_config();
    let out = warpspec(&["kernel", s(&cfg), "disk", "--method", "cn"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let meta = read_json(dir.path().join("out/disk/kernel_cn_dirichlet.json"));
    assert!(meta["max_rel_discrepancy"].as_f64().unwrap() <= 1e-3);
    assert!(meta["min_value"].as_f64().unwrap() >= -1e-10);

    assert_eq!(code(&warpspec(&["kernel", s(&cfg), "disk", "--method", "cn", "--boundary", "neumann"])), 0);
    let meta = read_json(dir.path().join("out/disk/kernel_cn_neumann.json"));
    for m in meta["masses"].as_array().unwrap() {
        assert!((m.as_f64().unwrap() - 1.0).abs() < 1e-6, "{m}");
    }
    assert_eq!(code(&warpspec(&["kernel", s(&cfg), "disk", "--boundary", "neumann"])), 2);

    assert_eq!(code(&warpspec(&["kernel", s(&cfg), "disk"])), 0);
    let csv = fs::read_to_string(dir.path().join("out/disk/kernel_expansion_dirichlet.csv")).unwrap();
    assert!(csv.starts_with("# warpspec kernel boundary=dirichlet K=30"));
}

#[test]
fn kernel_rejects_zero_time() {
    let (_dir, cfg) = setup(CONFIG);
    assert_eq!(code(&warpspec(&["kernel", s(&cfg), "disk"])), 2);
}

#[test]
fn compare_exit_codes() {
    let (dir, cfg) = good_config();
    let out = warpspec(&["compare", s(&cfg), "disk"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(dir.path().join("out/disk/report.json"));
    assert_eq!(report["scenario"]["name"], "disk");
    assert!(report["verdicts"].as_array().unwrap().iter().all(|v| v["pass"] == true));

    let fixtures = workspace().join("scenarios/fixtures");
    let tmp = TempDir::new().unwrap();
    for name in ["inverted.toml", "empty.toml"] {
        fs::copy(fixtures.join(name), tmp.path().join(name)).unwrap();
    }
    let inverted = tmp.path().join("inverted.toml");
    assert_eq!(code(&warpspec(&["compare", s(&inverted), "--all"])), 2);
    let error = read_json(tmp.path().join("out/inverted-bounds/error.json"));
    assert_eq!(error["input_error"], true);
    assert_eq!(read_json(tmp.path().join("out/summary.json"))["errors"], 1);
    assert_eq!(code(&warpspec(&["compare", s(&tmp.path().join("empty.toml")), "--all"])), 2);

    // the upper model's warping vanishes before r0
    let beyond = good_config_text().replace(
        "kappa_plus = { kind = \"constant\", value = 0.5 }",
        "kappa_plus = { kind = \"constant\", value = 12.0 }",
    );
    let (_d, beyond) = setup(&beyond);
    let out = warpspec(&["compare", s(&beyond), "disk"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("disk"));
}

#[test]
fn shipped_suite_passes_and_output_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let suite = tmp.path().join("suite.toml");
    fs::copy(workspace().join("scenarios/suite.toml"), &suite).unwrap();
    let out = warpspec(&["compare", s(&suite), "--all"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(tmp.path().join("out/summary.json"));
    assert!(summary["total"].as_u64().unwrap() >= 12);
    assert_eq!(summary["passed"], summary["total"]);
    let first = fs::read(tmp.path().join("out/identity-bounds/report.json")).unwrap();
    let first_summary = fs::read(tmp.path().join("out/summary.json")).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_warpspec"))
        .args(["compare", s(&suite), "--all"])
        .env("WARPSPEC_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(tmp.path().join("out/identity-bounds/report.json")).unwrap(), first);
    assert_eq!(fs::read(tmp.path().join("out/summary.json")).unwrap(), first_summary);
}

#[test]
fn invalid_worker_count_is_an_input_error() {
    let (_dir, cfg) = good_config();
    let out = Command::new(env!("CARGO_BIN_EXE_warpspec"))
        .args(["warp", s(&cfg), "disk"])
        .env("WARPSPEC_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
