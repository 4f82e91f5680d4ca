use std::path::Path;
use std::process::{Command, Output};

use iontrap_mbqc::mbqc::{linear_chain_edges, linear_chain_pattern, InputDocument, PatternDocument};
use iontrap_mbqc::scheduler::ScheduleReport;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iontrap-mbqc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn resources_report_has_exact_count() {
    let o = bin(&["resources", "--bits", "640", "--wallclock", "5min"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["op_count"].as_u64(), Some(8_388_608_000));
    assert_eq!(v["schema_version"], 1);
    let t = v["required_op_time_s"].as_f64().unwrap();
    assert!((t - 35.8e-9).abs() < 0.1e-9);
}

#[test]
fn bad_wallclock_is_a_usage_error() {
    let o = bin(&["resources", "--wallclock", "soon"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn schedule_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["schedule", "--rows", "6", "--cols", "6", "--n", "2", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let file = dir.path().join("schedule.json");
    let v = bin(&["verify", "--schedule", path(&file)]);
    assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
    assert!(stdout(&v).contains("\"verified\": true"));

    let mut report: ScheduleReport = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(report.rounds.len(), 6);
    let round = report.rounds.iter_mut().find(|r| !r.pairs.is_empty()).unwrap();
    let removed = round.pairs.remove(0);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, serde_json::to_string(&report).unwrap()).unwrap();
    let v = bin(&["verify", "--schedule", path(&broken)]);
    assert_eq!(v.status.code(), Some(2));
    let out: serde_json::Value = serde_json::from_str(&stdout(&v)).unwrap();
    assert_eq!(out["missing_edges"], serde_json::json!([removed]));
}

#[test]
fn schedule_csv_summary() {
    let o = bin(&["schedule", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "round,pair_count,duration");
    assert_eq!(lines.len(), 7);
}

#[test]
fn unknown_subcommand_prints_usage() {
    let o = bin(&["teleport"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&[]).status.code(), Some(1));
}

#[test]
fn config_validation_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[electron.trap]\ndt = -1e-13\n").unwrap();
    let o = bin(&["electron", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("electron.trap.dt"), "{}", stderr(&o));

    std::fs::write(&cfg, "[lattice]\nsize = 3\n").unwrap();
    let o = bin(&["lattice", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("size"));

    let missing = dir.path().join("absent.toml");
    assert_eq!(bin(&["lattice", "--config", path(&missing)]).status.code(), Some(1));
}

#[test]
fn config_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let defaults = stdout(&bin(&["config"]));
    assert_eq!(stdout(&bin(&["config", "--config", path(&empty)])), defaults);
    let dumped = dir.path().join("dumped.toml");
    std::fs::write(&dumped, &defaults).unwrap();
    assert_eq!(stdout(&bin(&["config", "--config", path(&dumped)])), defaults);
}

#[test]
fn command_can_come_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"resources\"\n[resources]\nbits = 2\n").unwrap();
    let o = bin(&["--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("\"op_count\": 256"));
    std::fs::write(&cfg, "command = \"teleport\"\n").unwrap();
    assert_eq!(bin(&["--config", path(&cfg)]).status.code(), Some(1));
}

#[test]
fn ionize_outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(bin(&["ionize", "--out", path(d.path())]).status.code(), Some(0));
    }
    for name in ["ionize_sweep.csv", "ionize_report.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let csv = std::fs::read_to_string(a.path().join("ionize_sweep.csv")).unwrap();
    assert!(csv.starts_with("I,rate_S,rate_D,ratio\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("ionize_report.json")).unwrap()).unwrap();
    let rate = report["rate_s"].as_f64().unwrap();
    assert!((1e9..=1e10).contains(&rate));
}

#[test]
fn singular_resonance_is_a_physics_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("singular.toml");
    std::fs::write(
        &cfg,
        "[ionize.calibration.s_state]\nk = 1.0\nl = 0.0\nj_channels = { S = 1.0 }\n\
         [ionize.calibration.d_state]\nj_channels = { S = 1.0 }\n",
    )
    .unwrap();
    assert_eq!(bin(&["ionize", "--config", path(&cfg)]).status.code(), Some(2));
}

fn pattern_file(dir: &Path) -> std::path::PathBuf {
    let doc = PatternDocument {
        schema_version: Some(1),
        edges: linear_chain_edges(),
        input: Some(InputDocument { qubits: vec![0], amplitudes: vec![[0.6, 0.0], [0.0, 0.8]] }),
        pattern: linear_chain_pattern([0.3, 1.1, -0.4, 2.0]),
    };
    let file = dir.join("pattern.json");
    std::fs::write(&file, serde_json::to_string(&doc).unwrap()).unwrap();
    file
}

#[test]
fn mbqc_runs_a_pattern_file_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let file = pattern_file(dir.path());
    let run = |seed: &str| bin(&["mbqc", "--pattern", path(&file), "--seed", seed]);
    let a = run("11");
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&run("11")));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 4);
    assert_eq!(v["output_qubits"], serde_json::json!([4]));
    let outcomes: Vec<String> = (0..16).map(|s| stdout(&run(&s.to_string()))).collect();
    assert!(outcomes.iter().any(|o| o != &outcomes[0]), "seed has no effect");
}

#[test]
fn bad_pattern_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    std::fs::write(&file, r#"{"edges": [[0, 1]], "pattern": {"num_qubits": 2, "steps": [], "outputs": [], "extra": 1}}"#)
        .unwrap();
    assert_eq!(bin(&["mbqc", "--pattern", path(&file)]).status.code(), Some(1));
    assert_eq!(bin(&["mbqc"]).status.code(), Some(1));
}

#[test]
fn electron_writes_trace_summary_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.toml");
    std::fs::write(
        &cfg,
        "[electron]\nt_final = 5e-10\nsnapshot_times = [2.5e-10]\n\
         [electron.trap]\nsample_interval = 1e-10\n[electron.trap.grid]\npoints_x = 64\npoints_y = 32\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = bin(&["electron", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = std::fs::read_to_string(out.join("electron_trace.csv")).unwrap();
    assert!(trace.starts_with("t_ns,p_detector_1,p_detector_2,p_total,norm_remaining\n"));
    assert_eq!(trace.lines().count(), 7);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("electron_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["mathieu"]["electron_stable"], false);
    assert_eq!(summary["mathieu"]["ion_stable"], true);
    let snap: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("snapshots/snapshot_000.json")).unwrap()).unwrap();
    assert_eq!(snap["density"].as_array().unwrap().len(), 64 * 32);
}

#[test]
fn lattice_report() {
    let o = bin(&["lattice", "--rows", "4", "--cols", "4", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["layer_count"], 2);
    assert_eq!(v["schema_version"], 1);
    let too_small = bin(&["lattice", "--rows", "1", "--cols", "1", "--n", "3"]);
    assert_eq!(too_small.status.code(), Some(1));
}
