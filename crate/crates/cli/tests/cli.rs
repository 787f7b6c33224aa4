use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use scha_testkit::fixtures;

fn scha(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scha"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.scha.json"), fixtures::FIXTURE_A).unwrap();
    fs::write(dir.path().join("b.scha.json"), fixtures::FIXTURE_B).unwrap();
    fs::write(dir.path().join("bad.json"), fixtures::BAD_LENGTH).unwrap();
    dir
}

#[test]
fn validate_exit_codes() {
    let dir = workspace();
    let ok = scha(&["validate", "b.scha.json"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(text(&ok.stderr), "");

    let warn = scha(&["validate", "a.scha.json"], dir.path());
    assert_eq!(warn.status.code(), Some(0));
    assert_eq!(text(&warn.stderr), "WARNING W_NO_URSATZ $ no note is marked as part of the Ursatz\n");

    let bad = scha(&["validate", "bad.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(text(&bad.stderr).starts_with("ERROR E_LENGTH voices.soprano "));

    fs::write(
        dir.path().join("flat.json"),
        r#"{"voices": {"soprano": {"pitches": ["C5", "D5"], "depths": [0, 0]}}}"#,
    )
    .unwrap();
    let invalid = scha(&["validate", "flat.json"], dir.path());
    assert_eq!(invalid.status.code(), Some(1));
    assert!(text(&invalid.stderr).contains("ERROR V_NO_SURVIVOR sop:0"));

    assert_eq!(scha(&["validate", "missing.json"], dir.path()).status.code(), Some(2));
    assert_eq!(scha(&["validate"], dir.path()).status.code(), Some(2));
}

#[test]
fn clusters_csv_and_json() {
    let dir = workspace();
    let run = scha(&["clusters", "a.scha.json", "--out", "d", "--compose", "0", "3"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", text(&run.stderr));
    let read = |name: &str| fs::read_to_string(dir.path().join("d").join(name)).unwrap();
    let shape = |csv: &str| (csv.lines().count(), csv.lines().next().unwrap().split(',').count());
    assert_eq!(shape(&read("S0.csv")), (5, 4));
    assert_eq!(shape(&read("S1.csv")), (4, 3));
    assert_eq!(shape(&read("S2.csv")), (3, 2));
    assert_eq!(read("S_0_to_3.csv"), "1,0\n1,0\n1,0\n1,0\n0,1\n");

    let json = scha(&["clusters", "b.scha.json", "--out", "j", "--format", "json", "--compose", "0", "2"], dir.path());
    assert_eq!(json.status.code(), Some(0));
    let layers: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("j/layers.json")).unwrap()).unwrap();
    assert_eq!(layers["layers"][0]["rows"], 7);
    assert_eq!(layers["layers"][0]["rowLabels"][1], "alto:0");
    assert!(dir.path().join("j/S_0_to_2.json").is_file());

    let out_of_range = scha(&["clusters", "a.scha.json", "--out", "d", "--compose", "1", "9"], dir.path());
    assert_eq!(out_of_range.status.code(), Some(2));
}

#[test]
fn prolongations_output() {
    let dir = workspace();
    let kirlin = scha(&["prolongations", "a.scha.json"], dir.path());
    assert_eq!(
        text(&kirlin.stdout),
        "sop:1 ( sop:2 ) sop:3\nsop:0 ( sop:1 sop:2 ) sop:3\nsop:0 ( sop:1 sop:2 sop:3 ) sop:4\n"
    );
    let json = scha(&["prolongations", "a.scha.json", "--format", "json"], dir.path());
    let value: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(value["derived"].as_array().unwrap().len(), 6);
}

#[test]
fn graph_flags() {
    let dir = workspace();
    let edgelist = scha(&["graph", "b.scha.json"], dir.path());
    let value: serde_json::Value = serde_json::from_slice(&edgelist.stdout).unwrap();
    assert_eq!(value["nodes"].as_array().unwrap().len(), 7);
    let linear = |v: &serde_json::Value| {
        v["edges"].as_array().unwrap().iter().filter(|e| e["kind"] == "linear").count()
    };
    assert_eq!(linear(&value), 3);

    let narrow = scha(&["graph", "b.scha.json", "--linear-intervals", "-1"], dir.path());
    assert_eq!(narrow.status.code(), Some(0), "{}", text(&narrow.stderr));
    assert_eq!(linear(&serde_json::from_slice(&narrow.stdout).unwrap()), 1);

    let dot = scha(&["graph", "b.scha.json", "--format", "dot", "--window", "1", "--linear-same-voice"], dir.path());
    let dot = text(&dot.stdout);
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("style=dotted"));
    assert_eq!(dot, text(&scha(&["graph", "b.scha.json", "--format", "dot", "--window", "1", "--linear-same-voice"], dir.path()).stdout));
}

#[test]
fn stats_over_a_directory() {
    let dir = workspace();
    fs::create_dir(dir.path().join("corpus")).unwrap();
    fs::copy(dir.path().join("a.scha.json"), dir.path().join("corpus/a.scha.json")).unwrap();
    fs::create_dir(dir.path().join("corpus/nested")).unwrap();
    fs::copy(dir.path().join("b.scha.json"), dir.path().join("corpus/nested/b.scha.json")).unwrap();

    let run = scha(&["stats", "corpus", "--out", "out/stats", "--histograms", "--jobs", "2"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", text(&run.stderr));
    let summary = fs::read_to_string(dir.path().join("out/stats.csv")).unwrap();
    assert!(summary.starts_with("statistic,key,value\nexcerpts,,2\nnotes,,12\n"));
    let treble = fs::read_to_string(dir.path().join("out/stats_intervals_treble_d0.csv")).unwrap();
    assert_eq!(treble, "interval,count\n-2,3\n-1,1\n2,2\n");

    let single = scha(&["stats", "corpus", "--out", "out/single", "--jobs", "1"], dir.path());
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("out/single.csv")).unwrap(), summary);

    fs::copy(dir.path().join("bad.json"), dir.path().join("corpus/bad.scha.json")).unwrap();
    let partial = scha(&["stats", "corpus", "--out", "out/partial"], dir.path());
    assert_eq!(partial.status.code(), Some(1));
    assert!(text(&partial.stderr).contains("E_LENGTH"));
    assert_eq!(fs::read_to_string(dir.path().join("out/partial.csv")).unwrap(), summary);
}

#[test]
fn render_writes_svg() {
    let dir = workspace();
    let run = scha(&["render", "a.scha.json", "--out", "a.svg"], dir.path());
    assert_eq!(run.status.code(), Some(0));
    let svg = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches(r#"class="notehead""#).count(), 5);
    assert_eq!(svg.matches(r#"class="beam""#).count(), 3);
    assert_eq!(svg.matches(r#"class="slur""#).count(), 3);
}

#[test]
fn serve_rejects_missing_root() {
    let dir = workspace();
    let run = scha(&["serve", "--root", "nowhere", "--port", "0"], dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(text(&run.stderr).contains("not a directory"));
}
