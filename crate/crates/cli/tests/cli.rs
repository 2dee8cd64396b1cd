use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn floorscan(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floorscan")).args(args).current_dir(cwd).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn room_spec(rooms: Value) -> Value {
    json!({
        "rooms": rooms,
        "wall_thickness": 240.0,
        "door_slots": [{"wall": {"room": 0, "side": "bottom"}, "offset": 800.0, "width": 900.0}],
        "window_slots": [{"wall": {"room": 0, "side": "top"}, "offset": 700.0, "width": 1400.0, "pane_count": 3}],
        "seed": 4
    })
}

fn one_room() -> Value {
    room_spec(json!([{"x": 0.0, "y": 0.0, "width": 4000.0, "height": 3000.0}]))
}

/// Writes `spec` and runs `synth`; returns the DXF and truth paths.
fn synth(dir: &Path, name: &str, spec: &Value) -> (PathBuf, PathBuf) {
    let spec_path = dir.join(format!("{name}.json"));
    std::fs::write(&spec_path, spec.to_string()).unwrap();
    let (dxf, truth) = (dir.join(format!("{name}.dxf")), dir.join(format!("{name}-truth.json")));
    let o = floorscan(
        &["synth", "--spec", spec_path.to_str().unwrap(), "--out", dxf.to_str().unwrap(), "--truth", truth.to_str().unwrap()],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    (dxf, truth)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn analyze_then_score() {
    let dir = TempDir::new().unwrap();
    let (dxf, truth) = synth(dir.path(), "room", &one_room());
    let o = floorscan(&[dxf.to_str().unwrap(), "-o", "out.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("out.json"));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["scenes"].as_array().unwrap().len(), 1);
    assert!(doc["scenes"][0]["stats"].get("timing_ms").is_none());

    let o = floorscan(&["score", "--result", "out.json", "--truth", truth.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        assert!(line.contains("f1 1.0000"), "{line}");
    }
}

#[test]
fn stdout_when_no_output_given() {
    let dir = TempDir::new().unwrap();
    let (dxf, _) = synth(dir.path(), "room", &one_room());
    let o = floorscan(&[dxf.to_str().unwrap(), "--timings"], dir.path());
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let t = &doc["scenes"][0]["stats"]["timing_ms"];
    assert!(t["total"].as_f64().unwrap() >= t["cascade"].as_f64().unwrap());
}

#[test]
fn missing_input_is_io_error() {
    let dir = TempDir::new().unwrap();
    let o = floorscan(&["missing.dxf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.dxf"));
}

#[test]
fn malformed_input_reports_line() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.dxf"), "0\nSECTION\n2\nENTITIES\n0\nLINE\n10\nnot-a-number\n0\nENDSEC\n0\nEOF\n").unwrap();
    let o = floorscan(&["bad.dxf"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 8"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_four() {
    let dir = TempDir::new().unwrap();
    let (dxf, _) = synth(dir.path(), "room", &one_room());
    std::fs::write(dir.path().join("bad.cfg"), "# tuned\nlen2 = 80\nno_such_key = 1\n").unwrap();
    let o = floorscan(&[dxf.to_str().unwrap(), "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = floorscan(&[dxf.to_str().unwrap(), "--resolution", "8"], dir.path());
    assert_eq!(o.status.code(), Some(4));

    std::fs::write(dir.path().join("good.cfg"), "len2 = 80\nresolution = 1024\n").unwrap();
    let o = floorscan(&[dxf.to_str().unwrap(), "--config", "good.cfg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn distant_plans_become_separate_scenes() {
    let dir = TempDir::new().unwrap();
    let spec = room_spec(json!([
        {"x": 0.0, "y": 0.0, "width": 4000.0, "height": 3000.0},
        {"x": 24000.0, "y": 0.0, "width": 5000.0, "height": 3500.0}
    ]));
    let (dxf, _) = synth(dir.path(), "multi", &spec);
    let o = floorscan(&[dxf.to_str().unwrap(), "-o", "multi-out.json", "--svg", "svg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = read_json(&dir.path().join("multi-out.json"));
    assert_eq!(doc["scenes"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("svg/multi-0.svg").exists());
    assert!(dir.path().join("svg/multi-1.svg").exists());
}

#[test]
fn batch_writes_per_file_and_isolates_failures() {
    let dir = TempDir::new().unwrap();
    let (a, _) = synth(dir.path(), "a", &one_room());
    let (b, _) = synth(dir.path(), "b", &room_spec(json!([{"x": 0.0, "y": 0.0, "width": 5000.0, "height": 4000.0}])));
    let o = floorscan(
        &[a.to_str().unwrap(), "gone.dxf", b.to_str().unwrap(), "-o", "results", "--jobs", "2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let results = dir.path().join("results");
    assert!(results.join("a.json").exists());
    assert!(results.join("b.json").exists());
    assert!(!results.join("gone.json").exists());
}

#[test]
fn debug_images_are_pgm() {
    let dir = TempDir::new().unwrap();
    let (dxf, _) = synth(dir.path(), "room", &one_room());
    let o = floorscan(&[dxf.to_str().unwrap(), "-o", "o.json", "--dump-debug", "dbg", "--resolution", "256"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for stage in ["raw", "walls", "labels", "mask"] {
        let bytes = std::fs::read(dir.path().join(format!("dbg/room-0-{stage}.pgm"))).unwrap();
        let header = b"P5\n256 256\n255\n";
        assert!(bytes.starts_with(header), "{stage}");
        assert_eq!(bytes.len(), header.len() + 256 * 256);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (dxf, _) = synth(dir.path(), "room", &one_room());
    let d = dxf.to_str().unwrap();
    for run in ["1", "2"] {
        let o = floorscan(&[d, "-o", &format!("run{run}.json"), "--svg", &format!("svg{run}")], dir.path());
        assert!(o.status.success());
    }
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("run1.json"), read("run2.json"));
    assert_eq!(read("svg1/room-0.svg"), read("svg2/room-0.svg"));
}

#[test]
fn overlapping_slots_are_rejected() {
    let dir = TempDir::new().unwrap();
    let mut spec = one_room();
    spec["window_slots"][0] = json!({"wall": {"room": 0, "side": "bottom"}, "offset": 1000.0, "width": 900.0});
    std::fs::write(dir.path().join("s.json"), spec.to_string()).unwrap();
    let o = floorscan(&["synth", "--spec", "s.json", "--out", "p.dxf", "--truth", "t.json"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("overlapping"), "{}", stderr(&o));
}

#[test]
fn empty_plan_succeeds_with_warning() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("empty.dxf"), "0\nSECTION\n2\nENTITIES\n0\nENDSEC\n0\nEOF\n").unwrap();
    let o = floorscan(&["empty.dxf", "-o", "e.json"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
    let doc = read_json(&dir.path().join("e.json"));
    assert_eq!(doc["scenes"][0]["walls"], json!([]));
}
