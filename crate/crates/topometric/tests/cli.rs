use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use topometric::format::{self, write_bundle};
use topometric_core::{NodeDetection, Pose2, Scenario, TopoMap, Trajectory};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topometric"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_spec(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("spec.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn summary_row(csv_path: &Path) -> (f64, f64) {
    let mut r = csv::Reader::from_path(csv_path).unwrap();
    let last = r.records().map(|x| x.unwrap()).last().unwrap();
    assert_eq!(&last[0], "avg");
    (last[1].parse().unwrap(), last[2].parse().unwrap())
}

const ARTIFACTS: [&str; 8] = [
    "truth.txt",
    "estimate_metric.txt",
    "estimate_topometric.txt",
    "report_metric.csv",
    "report_metric.json",
    "report_topometric.csv",
    "report_topometric.json",
    "improvement.json",
];

#[test]
fn run_writes_artifacts_and_topometric_wins() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "kind = loop\nlength = 262\nseed = 2\n");
    let out = dir.path().join("out");
    let o = run(&["run", "--spec", path(&spec), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ARTIFACTS {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let (mt, mr) = summary_row(&out.join("report_metric.csv"));
    let (tt, tr) = summary_row(&out.join("report_topometric.csv"));
    assert!(tt < mt);
    let imp = read_json(&out.join("improvement.json"));
    assert_eq!(imp["translation"].as_f64().unwrap(), mt / tt);
    assert_eq!(imp["rotation"].as_f64().unwrap(), mr / tr);
    let report = read_json(&out.join("report_topometric.json"));
    assert_eq!(report["avg_translation_pct"].as_f64().unwrap(), tt);

    // the bundle written next to the artifacts reproduces the run
    let replay = write_spec(dir.path(), "bundle = out/scenario\n");
    let out2 = dir.path().join("out2");
    assert!(run(&["run", "--spec", path(&replay), "--out", path(&out2)])
        .status
        .success());
    for name in ARTIFACTS {
        assert_eq!(
            fs::read(out.join(name)).unwrap(),
            fs::read(out2.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn perfect_straight_bundle_reports_undefined_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let n = 60;
    let truth = Trajectory::new((0..n).map(|i| Pose2::new(i as f64, 0.0, 0.0)).collect()).unwrap();
    let map = TopoMap::build(&truth, 1.0).unwrap();
    let detections = (0..n)
        .map(|t| NodeDetection::new(t, t, 0.99).unwrap())
        .collect();
    let sc = Scenario {
        motions: truth.motions(),
        ground_truth: truth,
        map,
        detections,
    };
    write_bundle(&dir.path().join("b"), &sc).unwrap();
    let spec = write_spec(dir.path(), "bundle = b\n");
    let out = dir.path().join("out");
    let o = run(&["run", "--spec", path(&spec), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary_row(&out.join("report_metric.csv")), (0.0, 0.0));
    // smoothing a straight line is exact up to rounding
    let (t, r) = summary_row(&out.join("report_topometric.csv"));
    assert!(t < 1e-12 && r < 1e-12, "{t} {r}");
    let imp = read_json(&out.join("improvement.json"));
    assert_eq!(imp["translation"], "undefined");
    assert_eq!(imp["rotation"], "undefined");
}

#[test]
fn sweep_rows_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "kind = loop\nlength = 120\nseed = 4\n");
    let out = dir.path().join("sw");
    let o = run(&[
        "sweep",
        "--spec",
        path(&spec),
        "--param",
        "delta",
        "--values",
        "0.5,0.7,0.9",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[2][0], "0.9");
    let (t, _) = summary_row(&out.join("delta=0.9").join("report_topometric.csv"));
    assert_eq!(rows[2][1].parse::<f64>().unwrap(), t);

    let o = run(&[
        "sweep",
        "--spec",
        path(&spec),
        "--param",
        "colour",
        "--values",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "sweep",
        "--spec",
        path(&spec),
        "--param",
        "delta",
        "--values",
        "",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes_and_error_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");

    let o = run(&[
        "run",
        "--spec",
        path(&dir.path().join("missing.cfg")),
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let rec: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(rec["error"], "io");
    assert_eq!(rec["exit_code"], 4);

    let bad = write_spec(dir.path(), "kind = loop\nlength = 100\ndelta = 3\n");
    let o = run(&["run", "--spec", path(&bad), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let rec: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(rec["error"], "config");

    // a loop too short to close is a scenario error
    let short = write_spec(dir.path(), "kind = loop\nlength = 4\n");
    let o = run(&["run", "--spec", path(&short), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(3));

    fs::create_dir_all(dir.path().join("broken")).unwrap();
    fs::write(
        dir.path().join("broken").join(format::TRUTH_FILE),
        "0 0 0\n",
    )
    .unwrap();
    let spec = write_spec(dir.path(), "bundle = broken\n");
    let o = run(&["run", "--spec", path(&spec), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(3));

    // output path blocked by a regular file
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let ok = write_spec(dir.path(), "kind = loop\nlength = 50\n");
    let o = run(&[
        "run",
        "--spec",
        path(&ok),
        "--out",
        path(&blocker.join("sub")),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn gen_writes_readable_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b");
    let o = run(&[
        "gen",
        "--kind",
        "figure-eight",
        "--length",
        "150",
        "--step",
        "1",
        "--seed",
        "7",
        "--out",
        path(&b),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sc = format::read_bundle(&b).unwrap();
    assert_eq!(sc.ground_truth.len(), 151);
    let o = run(&["gen", "--kind", "spiral", "--out", path(&b)]);
    assert_eq!(o.status.code(), Some(2));
}
