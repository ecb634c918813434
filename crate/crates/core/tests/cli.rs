use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn segavd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segavd"))
        .args(args)
        .env_remove("SEGAVD_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = segavd(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn read(path: &str) -> Vec<u8> {
    std::fs::read(Path::new(path)).unwrap()
}

fn two_parallel(dir: &TempDir) -> String {
    let path = p(dir, "two.json");
    std::fs::write(
        &path,
        r#"{"dim": 2, "segments": [[[0, 0], [10, 0]], [[0, 2], [10, 2]]]}"#,
    )
    .unwrap();
    path
}

#[test]
fn generation_and_build_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.json"), p(&dir, "b.json"));
    ok(&["gen-random", "--n", "6", "--d", "2", "--seed", "3", "-o", &a]);
    ok(&["gen-random", "--n", "6", "--d", "2", "--seed", "3", "-o", &b]);
    assert_eq!(read(&a), read(&b));

    let (s1, s2) = (p(&dir, "s1.json"), p(&dir, "s2.json"));
    let args = |out: &str| {
        vec![
            "build".to_string(), "-i".into(), a.clone(), "--epsilon".into(), "0.5".into(),
            "--seed".into(), "9".into(), "-o".into(), out.to_string(),
            "--root-samples".into(), "500".into(), "--node-samples".into(), "5".into(),
        ]
    };
    let r1 = ok(&args(&s1).iter().map(String::as_str).collect::<Vec<_>>());
    let r2 = ok(&args(&s2).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(r1, r2);
    assert_eq!(read(&s1), read(&s2));
}

#[test]
fn seed_environment_variable_overrides_the_flag() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.json"), p(&dir, "b.json"));
    ok(&["gen-random", "--n", "4", "--seed", "77", "-o", &a]);
    let o = Command::new(env!("CARGO_BIN_EXE_segavd"))
        .args(["gen-random", "--n", "4", "--seed", "1", "-o", &b])
        .env("SEGAVD_SEED", "77")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(read(&a), read(&b));
}

#[test]
fn query_answers_and_reports_errors_with_exit_codes() {
    let dir = TempDir::new().unwrap();
    let inst = two_parallel(&dir);
    let ds = p(&dir, "ds.json");
    ok(&["build", "-i", &inst, "--epsilon", "0.5", "-o", &ds, "--root-samples", "500", "--node-samples", "5"]);

    let out = ok(&["query", "--ds", &ds, "--point", "5,0.4", "--point", "5,1.7"]);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["segment"], 0);
    assert_eq!(lines[1]["segment"], 1);
    assert!((lines[0]["distance"].as_f64().unwrap() - 0.4).abs() < 1e-9);

    // Wrong dimension is a usage-class error.
    assert_eq!(segavd(&["query", "--ds", &ds, "--point", "1,2,3"]).status.code(), Some(2));
    // Unparseable structure file.
    let junk = p(&dir, "junk.json");
    std::fs::write(&junk, "{not json").unwrap();
    assert_eq!(segavd(&["query", "--ds", &junk, "--point", "1,2"]).status.code(), Some(2));
    // Missing file.
    assert_eq!(segavd(&["query", "--ds", &p(&dir, "nope.json"), "--point", "1,2"]).status.code(), Some(2));
}

#[test]
fn unknown_suite_and_bad_arguments_are_usage_errors() {
    assert_eq!(segavd(&["validate", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(segavd(&["build"]).status.code(), Some(2));
    assert_eq!(segavd(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn validate_reports_json_and_passes() {
    let out = ok(&["validate", "--suite", "lemma8", "--suite", "tensor", "--configs", "5", "--samples", "50", "--volume-samples", "20000"]);
    let reports: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(reports.len(), 2);
    for r in &reports {
        assert_eq!(r["violations"], 0, "{r}");
    }
}

#[test]
fn griddle_generator_writes_points() {
    let dir = TempDir::new().unwrap();
    let (inst, pts) = (p(&dir, "g.json"), p(&dir, "g.txt"));
    let out = ok(&["gen-griddle", "--n", "3", "--epsilon", "1", "-o", &inst, "--points", &pts]);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["failures"], 0);
    assert_eq!(v["odd_points"], 12);
    let lines = String::from_utf8(read(&pts)).unwrap();
    assert_eq!(lines.lines().count(), 4 * 7);
}

#[test]
fn render_two_parallel_stretches_ellipses_along_the_segments() {
    let dir = TempDir::new().unwrap();
    let inst = two_parallel(&dir);
    let ds = p(&dir, "ds.json");
    let svg = p(&dir, "out.svg");
    ok(&["build", "-i", &inst, "--epsilon", "0.5", "-o", &ds, "--root-samples", "500", "--node-samples", "5"]);
    // Level 5 is fine enough that the distance parameter is below the gap.
    ok(&["render", "--ds", &ds, "-o", &svg, "--level", "5"]);
    let text = String::from_utf8(read(&svg)).unwrap();
    assert_eq!(text.matches("<line").count(), 2);

    let attr = |el: &str, name: &str| -> f64 {
        let key = format!(" {name}=\"");
        let start = el.find(&key).unwrap() + key.len();
        el[start..].split('"').next().unwrap().parse().unwrap()
    };
    let rotation = |el: &str| -> f64 {
        let start = el.find("rotate(").unwrap() + 7;
        el[start..].split(' ').next().unwrap().parse().unwrap()
    };
    let mut between = 0;
    for el in text.lines().filter(|l| l.starts_with("<ellipse")) {
        let (cx, cy) = (attr(el, "cx"), attr(el, "cy"));
        if (1.0..9.0).contains(&cx) && (0.5..1.5).contains(&cy) {
            between += 1;
            assert!(attr(el, "rx") > 1.2 * attr(el, "ry"), "{el}");
            assert!(rotation(el).abs() < 10.0, "{el}");
        }
    }
    assert!(between > 0);

    let three = p(&dir, "three.json");
    std::fs::write(&three, r#"{"dim": 3, "segments": [[[0, 0, 0], [1, 0, 0]]]}"#).unwrap();
    let ds3 = p(&dir, "ds3.json");
    ok(&["build", "-i", &three, "--epsilon", "1", "-o", &ds3, "--root-samples", "0", "--node-samples", "0"]);
    assert_eq!(segavd(&["render", "--ds", &ds3, "-o", &svg]).status.code(), Some(2));
}
