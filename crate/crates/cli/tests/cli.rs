use std::path::Path;
use std::process::{Command, Output};

use hashjack_cli::RunManifest;
use hashjack_core::synth::{ActivityConfig, Mixing, PartyGroup, PublicGroup};
use hashjack_core::SynthConfig;

fn hashjack(run_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashjack"))
        .arg("--run-dir")
        .arg(run_dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Small corpus with labels; returns (corpus, labels) paths.
fn corpus(dir: &Path) -> (String, String) {
    let cfg = SynthConfig {
        seed: 5,
        parties: vec![PartyGroup { name: "#afd".into(), partisans: 300, contra: 60 }],
        public_hashtags: vec![PublicGroup { name: "#coronavirusde".into(), pro: 900, contra: 100 }],
        activity: ActivityConfig::default(),
        mixing: Mixing { p_in: 0.98, p_out: 0.02 },
        hijack: [("#afd".to_string(), [("#coronavirusde".to_string(), 0.3)].into())].into(),
        participation: 1.0,
        start: "2020-05-28T00:00:00Z".parse().unwrap(),
        noise_hashtags: vec!["#noise".into()],
        noise_rate: 0.1,
    };
    let config = dir.join("config.json");
    std::fs::write(&config, serde_json::to_vec(&cfg).unwrap()).unwrap();
    let path = |name: &str| dir.join(name).to_str().unwrap().to_string();
    ok(hashjack(
        &dir.join("unused"),
        &["synth", "--config", &path("config.json"), "--out", &path("corpus.jsonl"), "--truth", &path("truth.json"), "--labels", &path("labels.json")],
    ));
    (path("corpus.jsonl"), path("labels.json"))
}

fn completed(run: &Path) -> Vec<(String, String)> {
    let m = RunManifest::load(run).unwrap();
    m.stages
        .iter()
        .map(|(s, r)| (s.name().to_string(), r.completed_at.clone()))
        .collect()
}

#[test]
fn pipeline_is_idempotent_and_invalidates_downstream() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, labels) = corpus(tmp.path());
    let run = tmp.path().join("run");
    let args = ["pipeline", "--input", &input, "--tracked", "#afd,#coronavirusde", "--labels", &labels, "--resolution", "0.3"];
    ok(hashjack(&run, &args));
    let first = completed(&run);
    assert_eq!(first.len(), 8);
    let report = std::fs::read(run.join("report/report.json")).unwrap();

    ok(hashjack(&run, &args));
    assert_eq!(completed(&run), first);
    assert_eq!(std::fs::read(run.join("report/report.json")).unwrap(), report);

    // a new resolution reruns communities and drops everything after it
    ok(hashjack(&run, &["communities", "--resolution", "0.5"]));
    let names: Vec<String> = completed(&run).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["ingest", "build", "communities"]);

    let out = hashjack(&run, &["odds"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_copies_primary_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, labels) = corpus(tmp.path());
    let run = tmp.path().join("run");
    ok(hashjack(&run, &["pipeline", "--input", &input, "--tracked", "#afd,#coronavirusde", "--labels", &labels, "--resolution", "0.3"]));
    // a single artifact lands at the given path
    let out = tmp.path().join("copy/afd_odds.json");
    ok(hashjack(&run, &["odds", "--out", out.to_str().unwrap()]));
    let rows: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let hit = rows
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["party"] == "#afd" && r["target"] == "#coronavirusde")
        .expect("afd row");
    assert!(hit["or"].as_f64().unwrap() > 1.5, "{hit}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    // nothing ingested yet
    assert_eq!(hashjack(&run, &["build"]).status.code(), Some(2));
    let missing = tmp.path().join("missing.jsonl");
    let out = hashjack(&run, &["ingest", "--input", missing.to_str().unwrap(), "--tracked", "#afd"]);
    assert_eq!(out.status.code(), Some(2));

    let (input, _) = corpus(tmp.path());
    ok(hashjack(&run, &["ingest", "--input", &input, "--tracked", "#afd"]));
    ok(hashjack(&run, &["build"]));
    let out = hashjack(&run, &["communities", "--resolution", "-1"]);
    assert_eq!(out.status.code(), Some(2));

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = hashjack(&run, &["synth", "--config", bad.to_str().unwrap(), "--out", "x", "--truth", "y"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn label_report_lists_communities() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, _) = corpus(tmp.path());
    let run = tmp.path().join("run");
    ok(hashjack(&run, &["pipeline", "ingest", "build", "communities", "--input", &input, "--tracked", "#afd", "--resolution", "0.3"]));
    let out = ok(hashjack(&run, &["label", "report", "--network", "#afd", "--top", "3"]));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value.to_string().contains("#afd"));
}

#[test]
fn out_directory_receives_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let (input, _) = corpus(tmp.path());
    let run = tmp.path().join("run");
    ok(hashjack(&run, &["ingest", "--input", &input, "--tracked", "#afd,#coronavirusde"]));
    let out = tmp.path().join("nets");
    ok(hashjack(&run, &["build", "--out", out.to_str().unwrap()]));
    for name in ["registry.json", "afd.json", "coronavirusde.json"] {
        assert!(out.join(name).is_file(), "{name}");
    }
}
