use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfi-bound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: `{s}`"))
}

fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn ghz_closed_form_examples() {
    let rows = csv_rows(&run(&["ghz", "--n", "4", "--fidelity", "1"]));
    assert_eq!(rows, vec![vec!["1", "1", "16"]]);
    let rows = csv_rows(&run(&["ghz", "--n", "4", "--fidelity", "0.4"]));
    assert_eq!(num(&rows[0][2]), 0.0);
    let rows = csv_rows(&run(&["ghz", "--n", "4", "--sweep", "0:1:101"]));
    assert_eq!(rows.len(), 101);
}

#[test]
fn ghz_numeric_matches_closed_form() {
    let rows = csv_rows(&run(&["ghz", "--n", "6", "--sweep", "0.55:1:4", "--numeric"]));
    for r in rows {
        let (closed, numeric) = (num(&r[2]), num(&r[4]));
        assert!((closed - numeric).abs() <= 1e-4 * closed.max(1.0), "{r:?}");
    }
}

#[test]
fn dicke_examples() {
    let r = &csv_rows(&run(&["dicke-fidelity", "--n", "6", "--fidelity", "1"]))[0];
    assert!((num(&r[2]) - 24.0).abs() < 1e-3, "{r:?}");
    let r = &csv_rows(&run(&["dicke-fidelity", "--n", "6", "--fidelity", "0.3"]))[0];
    assert_eq!(num(&r[2]), 0.0);
    assert!((num(&r[3]) - 0.3125).abs() < 1e-12);
    let r = &csv_rows(&run(&["dicke-fidelity", "--n", "40", "--fidelity", "0.12"]))[0];
    assert_eq!(num(&r[2]), 0.0);
    assert!((num(&r[3]) - 0.1254).abs() < 1e-4);
}

#[test]
fn squeezing_map_cells() {
    let rows = csv_rows(&run(&[
        "squeezing-map",
        "--n",
        "4",
        "--jz-grid",
        "0:2:3",
        "--jx2-grid",
        "1:2:2",
    ]));
    assert_eq!(rows.len(), 6);
    let cell = |jz: f64, jx2: f64| rows.iter().find(|r| num(&r[0]) == jz && num(&r[1]) == jx2).unwrap();
    // Fully polarized state: QFI equals N.
    let p = cell(2.0, 1.0);
    assert_eq!(p[2], "true");
    assert!((num(&p[4]) - 1.0).abs() < 1e-6, "{p:?}");
    assert_eq!(num(&cell(0.0, 1.0)[3]), 0.0);
    // Outside the physical region: flagged, bound left empty.
    let outside = cell(2.0, 2.0);
    assert_eq!(outside[2], "false");
    assert_eq!(outside[3], "");
}

#[test]
fn boundary_close_to_archetype() {
    let rows = csv_rows(&run(&["boundary", "--n", "4"]));
    assert!(!rows.is_empty());
    let worst = rows.iter().map(|r| num(&r[6])).fold(0.0, f64::max);
    assert!(worst < 0.03, "max rel_diff {worst}");
}

#[test]
fn experiment_table_has_every_record() {
    let path = data_file("table_s1.rec");
    let rows = csv_rows(&run(&["experiment", "--input", path.to_str().unwrap()]));
    assert_eq!(rows.len(), 16);
    let kiesel = rows.iter().find(|r| r[0].starts_with("Kiesel")).unwrap();
    assert!((num(&kiesel[6]) - 0.358).abs() < 0.001, "{kiesel:?}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["dicke-fidelity", "--n", "8", "--sweep", "0.2:1:5", "--seed", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["validate", "--n", "2", "--samples", "6", "--seed", "11"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn worker_count_does_not_change_output() {
    let base = ["squeezing-map", "--n", "3", "--jz-grid", "0:1.5:3", "--jx2-grid", "0.5:1.5:3"];
    let one = run(&[&base[..], &["--jobs", "1"]].concat());
    let two = run(&[&base[..], &["--jobs", "2"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn output_file_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(&["ghz", "--n", "5", "--sweep", "0:1:7", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv_text = std::fs::read_to_string(&path).unwrap();

    let pretty = run(&["ghz", "--n", "5", "--sweep", "0:1:7", "--format", "pretty"]);
    let pretty_text = String::from_utf8(pretty.stdout).unwrap();
    let csv_values: Vec<f64> = csv_text.lines().skip(1).flat_map(|l| l.split(',').map(num)).collect();
    let pretty_values: Vec<f64> = pretty_text.lines().skip(2).flat_map(|l| l.split_whitespace().map(num)).collect();
    assert_eq!(csv_values, pretty_values);

    let jl = run(&["ghz", "--n", "5", "--fidelity", "0.9", "--format", "json-lines"]);
    let v: serde_json::Value = serde_json::from_slice(&jl.stdout).unwrap();
    assert!((v["bound"].as_f64().unwrap() - 25.0 * 0.64).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["ghz", "--n", "4"]).status.code(), Some(2));
    assert_eq!(run(&["ghz", "--n", "4", "--fidelity", "1", "--sweep", "0:1:2"]).status.code(), Some(2));
    assert_eq!(run(&["dicke-fidelity", "--n", "5", "--fidelity", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["ghz", "--n", "4", "--fidelity", "1.2"]).status.code(), Some(3));
    let capped = run(&[
        "squeezing-map",
        "--n",
        "15",
        "--representation",
        "full",
        "--jz-grid",
        "1:1:1",
        "--jx2-grid",
        "1:1:1",
    ]);
    assert_eq!(capped.status.code(), Some(5));
    let missing = run(&["experiment", "--input", "/nonexistent/file.rec"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn malformed_record_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.rec");
    std::fs::write(&path, "{\"name\": \"x\", \"source\": \"s\", \"n\": 4, \"family\": \"GHZ\"}\n").unwrap();
    let out = run(&["experiment", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_suite_passes() {
    let out = run(&["validate", "--n", "3", "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r[4] == "true"));
}
