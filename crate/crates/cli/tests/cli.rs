use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TOY_MISSION: &str = r#"{
  "schema": 1,
  "name": "toy",
  "workspace": {"lower": [0, 0], "upper": [2, 2]},
  "horizon": 10,
  "regions": [{"name": "R", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}],
  "formula": "F[0,10](G[0,2] R)",
  "K": 6,
  "v_b": 1,
  "theta_star": 0.5,
  "lambda": 1
}"#;

fn trajectory_json(points: &[(f64, f64, f64)]) -> String {
    let waypoints: Vec<Value> = points
        .iter()
        .map(|&(t, x, y)| serde_json::json!({"t": t, "p": [x, y]}))
        .collect();
    serde_json::json!({ "waypoints": waypoints }).to_string()
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        let sandbox = Self {
            dir: TempDir::new().unwrap(),
        };
        sandbox.file("toy.json", TOY_MISSION);
        sandbox
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_trstl"))
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn monitor_reports_verdict_through_exit_code() {
    let sb = Sandbox::new();
    let parked = trajectory_json(&[
        (0.0, 0.5, 0.5),
        (1.0, 0.5, 0.5),
        (2.0, 0.5, 0.5),
        (6.0, 0.5, 0.5),
        (8.0, 0.5, 0.5),
        (10.0, 0.5, 0.5),
    ]);
    sb.file("parked.json", &parked);
    let out = sb.run(&["monitor", "toy.json", "parked.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_eq!(report["satisfied"], Value::Bool(true));
    assert_eq!(report["num_segments"], 5);

    let away = trajectory_json(&[(0.0, 1.8, 1.8), (5.0, 1.8, 1.8), (10.0, 1.8, 1.8)]);
    sb.file("away.json", &away);
    let out = sb.run(&["monitor", "toy.json", "away.json"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["satisfied"], Value::Bool(false));

    let full = sb.run(&["monitor", "--full", "toy.json", "parked.json"]);
    let subs = stdout_json(&full)["subformulas"].as_array().unwrap().clone();
    assert!(subs.iter().all(|s| s["segments"].as_array().unwrap().len() == 5));
}

#[test]
fn invalid_input_exits_with_two() {
    let sb = Sandbox::new();
    sb.file("broken.json", "{\"waypoints\": [");
    sb.file("backwards.json", &trajectory_json(&[(1.0, 0.0, 0.0), (0.0, 1.0, 1.0)]));
    sb.file("unknown_atom.json", &TOY_MISSION.replace("G[0,2] R)", "G[0,2] Q)"));
    for args in [
        &["monitor", "toy.json", "broken.json"][..],
        &["monitor", "toy.json", "backwards.json"],
        &["monitor", "toy.json", "missing.json"],
        &["encode", "unknown_atom.json"],
        &["synth", "toy.json", "--solver", "external"],
        &["synth", "toy.json", "--time-limit", "0"],
        &["frobnicate"],
    ] {
        let out = sb.run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty(), "{args:?} printed no diagnostic");
    }
}

#[test]
fn encode_output_is_deterministic() {
    let sb = Sandbox::new();
    let first = sb.run(&["encode", "toy.json", "--out", "a.lp"]);
    let second = sb.run(&["encode", "toy.json", "--out", "b.lp"]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let a = fs::read(sb.path("a.lp")).unwrap();
    assert_eq!(a, fs::read(sb.path("b.lp")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("\\") || text.to_lowercase().contains("maximize"));
    assert!(text.to_lowercase().contains("binar"));

    let counts = stdout_json(&first);
    let larger = stdout_json(&sb.run(&["encode", "toy.json", "--k", "8"]));
    for key in ["num_binary", "num_continuous", "num_constraints"] {
        assert!(larger[key].as_u64().unwrap() > counts[key].as_u64().unwrap(), "{key}");
    }
}

#[test]
fn doubling_k_doubles_single_operator_binaries() {
    let sb = Sandbox::new();
    sb.file("single.json", &TOY_MISSION.replace("F[0,10](G[0,2] R)", "F[0,10] R"));
    let binaries = |k: &str| {
        let out = sb.run(&["encode", "single.json", "--k", k]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        stdout_json(&out)["num_binary"].as_f64().unwrap()
    };
    let ratio = binaries("32") / binaries("16");
    assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn synth_solves_and_verifies_the_toy_mission() {
    let sb = Sandbox::new();
    let out = sb.run(&["synth", "toy.json", "--out", "traj.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout_json(&out);
    assert_eq!(report["status"], "Optimal");
    assert_eq!(report["K"], 6);
    assert_eq!(report["satisfied"], Value::Bool(true));
    assert!(report["theta_monitor"].as_f64().unwrap() >= 0.5 - 1e-6);
    assert!(report.get("seconds").is_none());

    let again = sb.run(&["monitor", "toy.json", "traj.json"]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
}

#[test]
fn threshold_beyond_horizon_is_infeasible() {
    let sb = Sandbox::new();
    sb.file("greedy.json", &TOY_MISSION.replace("\"theta_star\": 0.5", "\"theta_star\": 11"));
    let out = sb.run(&["synth", "greedy.json"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("horizon"));
}

#[test]
fn auto_k_stops_at_first_feasible_count() {
    let sb = Sandbox::new();
    let out = sb.run(&["synth", "toy.json", "--auto-k", "6", "--timing"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout_json(&out);
    let k = report["K"].as_u64().unwrap();
    assert!((3..=6).contains(&k), "K = {k}");
    assert!(report["seconds"].as_f64().is_some());
    let fewer = TOY_MISSION.replace("\"K\": 6", &format!("\"K\": {}", k - 1));
    sb.file("fewer.json", &fewer);
    assert_eq!(code(&sb.run(&["synth", "fewer.json"])), 3, "K = {} is feasible", k - 1);

    sb.file("tight.json", &TOY_MISSION.replace("\"horizon\": 10", "\"horizon\": 1.5"));
    let out = sb.run(&["synth", "tight.json", "--auto-k", "3"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn plot_matches_golden_svg() {
    let sb = Sandbox::new();
    let traj = trajectory_json(&[(0.0, 1.5, 1.5), (3.0, 0.5, 0.5), (7.0, 0.5, 0.5), (10.0, 1.5, 0.5)]);
    sb.file("traj.json", &traj);
    let out = sb.run(&["plot", "toy.json", "traj.json", "--out", "toy.svg"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = fs::read_to_string(sb.path("toy.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let golden = fixture("toy_plot.svg");
    if std::env::var_os("TRSTL_BLESS").is_some() {
        fs::create_dir_all(golden.parent().unwrap()).unwrap();
        fs::write(&golden, &svg).unwrap();
    }
    assert_eq!(svg, fs::read_to_string(&golden).unwrap());

    let bare = sb.run(&["plot", "toy.json", "--out", "bare.svg"]);
    assert_eq!(code(&bare), 0, "{}", stderr(&bare));
    assert_ne!(fs::read_to_string(sb.path("bare.svg")).unwrap(), svg);
}

#[test]
fn plot_clamps_points_outside_the_workspace() {
    let sb = Sandbox::new();
    sb.file("stray.json", &trajectory_json(&[(0.0, 0.5, 0.5), (5.0, 4.0, -3.0), (10.0, 0.5, 0.5)]));
    let out = sb.run(&["plot", "toy.json", "stray.json", "--out", "stray.svg"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(!stderr(&out).is_empty(), "no warning for a point outside the workspace");
    assert!(fs::read_to_string(sb.path("stray.svg")).unwrap().contains("</svg>"));
}
