use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sumlife_core::lifelong::ResultMatrix;
use sumlife_core::rdf::SnapshotGraph;
use sumlife_core::report::RunManifest;
use sumlife_core::synthetic::{drift_sequence, eight_class_snapshot};

fn sumlife(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumlife"))
        .args(args)
        .env_remove("SUMLIFE_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = sumlife(args);
    assert!(
        out.status.success(),
        "sumlife {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_snapshot(dir: &Path, g: &SnapshotGraph) -> PathBuf {
    let path = dir.join(format!("{}.nt", g.timestamp()));
    let mut buf = Vec::new();
    g.write_ntriples(&mut buf).unwrap();
    std::fs::write(&path, buf).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn summarize_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let snap = write_snapshot(dir.path(), &eight_class_snapshot(1));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["summarize", "--model", "ac1", "--in", s(&snap), "--out", s(&a)]);
    ok(&["summarize", "--model", "ac1", "--in", s(&snap), "--out", s(&b)]);
    for f in ["eqcs.tsv", "edges.tsv", "stats.json", "summary.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs between reruns");
    }
    let eqcs = std::fs::read_to_string(a.join("eqcs.tsv")).unwrap();
    assert_eq!(eqcs.lines().count(), 500);
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["summary"]["eqc_count"], 8);
    assert_eq!(stats["degree_cap"], serde_json::Value::Null);
    assert_eq!(
        RunManifest::read(&a).unwrap().outputs,
        RunManifest::read(&b).unwrap().outputs
    );
}

#[test]
fn ac2_applies_the_default_degree_cap() {
    let dir = tempfile::tempdir().unwrap();
    let snap = write_snapshot(dir.path(), &eight_class_snapshot(1));
    let out = dir.path().join("ac2");
    ok(&["summarize", "--model", "ac2", "--in", s(&snap), "--out", s(&out)]);
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["degree_cap"], 100);
    let none = dir.path().join("none");
    ok(&[
        "summarize",
        "--model",
        "ac2",
        "--degree-cap",
        "none",
        "--in",
        s(&snap),
        "--out",
        s(&none),
    ]);
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(none.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["degree_cap"], serde_json::Value::Null);
}

#[test]
fn diff_of_identical_snapshots_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let g = eight_class_snapshot(3);
    let a = write_snapshot(dir.path(), &g);
    let b = dir.path().join("copy.nt");
    std::fs::copy(&a, &b).unwrap();
    let out = dir.path().join("d");
    ok(&[
        "diff",
        "--in",
        s(&a),
        "--in",
        s(&b),
        "--timestamp",
        "t1",
        "--timestamp",
        "t2",
        "--out",
        s(&out),
    ]);
    let diff: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("diff.json")).unwrap()).unwrap();
    let d = &diff[0];
    assert_eq!(d["added"], 0);
    assert_eq!(d["deleted"], 0);
    assert_eq!(d["jaccard"], 0.0);
    assert_eq!(d["js_divergence"], 0.0);
    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(series.lines().next().unwrap(), sumlife_core::report::SERIES_COLUMNS);
    assert_eq!(series.lines().count(), 3);
}

#[test]
fn diff_accepts_summary_directories_and_rejects_mixed_models() {
    let dir = tempfile::tempdir().unwrap();
    let seq = drift_sequence(5, 120);
    let snaps: Vec<PathBuf> = seq.iter().map(|g| write_snapshot(dir.path(), g)).collect();
    let s1 = dir.path().join("s1");
    let s2 = dir.path().join("s2");
    ok(&["summarize", "--in", s(&snaps[0]), "--out", s(&s1)]);
    ok(&["summarize", "--in", s(&snaps[1]), "--out", s(&s2)]);
    let from_dirs = dir.path().join("dirs");
    let from_files = dir.path().join("files");
    ok(&["diff", "--in", s(&s1), "--in", s(&s2), "--out", s(&from_dirs)]);
    ok(&[
        "diff",
        "--in",
        s(&snaps[0]),
        "--in",
        s(&snaps[1]),
        "--out",
        s(&from_files),
    ]);
    let read = |d: &Path| -> serde_json::Value {
        serde_json::from_slice(&std::fs::read(d.join("diff.json")).unwrap()).unwrap()
    };
    let (x, y) = (read(&from_dirs), read(&from_files));
    for k in ["added", "deleted", "recurring", "jaccard", "js_divergence"] {
        assert_eq!(x[0][k], y[0][k], "{k}");
    }
    assert_eq!(x[0]["recurring"], 2);
    assert_eq!(x[0]["added"], 6);

    let s3 = dir.path().join("s3");
    ok(&["summarize", "--model", "ac2", "--in", s(&snaps[2]), "--out", s(&s3)]);
    let out = sumlife(&[
        "diff",
        "--in",
        s(&s2),
        "--in",
        s(&s3),
        "--out",
        s(&dir.path().join("mixed")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lifelong_report_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let seq = drift_sequence(2, 150);
    let snaps: Vec<PathBuf> = seq[..2].iter().map(|g| write_snapshot(dir.path(), g)).collect();
    let run = dir.path().join("run");
    ok(&[
        "lifelong",
        "--in",
        s(&snaps[0]),
        "--in",
        s(&snaps[1]),
        "--iterations",
        "30",
        "--set",
        "hidden=64",
        "--out",
        s(&run),
    ]);
    let csv = std::fs::read_to_string(run.join("results.csv")).unwrap();
    let r = ResultMatrix::from_csv(&csv).unwrap();
    assert_eq!(r.tasks(), 2);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(run.join("report.json")).unwrap()).unwrap();
    for k in ["acc", "bwt", "fwt", "omega_base", "omega_new", "omega_all"] {
        assert!(report[k].is_number(), "{k} missing from report");
    }
    assert_eq!(report["forgetting"][0][0], 2);
    let svg = std::fs::read_to_string(run.join("heatmap.svg")).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let tag = format!(r#"data-row="{i}" data-col="{j}""#);
            let pos = svg.find(&tag).expect("cell present");
            let text = &svg[pos..];
            let value = &text[text.find('>').unwrap() + 1..text.find("</text>").unwrap()];
            assert_eq!(value, format!("{:.2}", r.get(i, j)));
        }
    }

    let rep = dir.path().join("rep");
    ok(&["report", "--results", s(&run.join("results.csv")), "--out", s(&rep)]);
    assert_eq!(
        std::fs::read(rep.join("report.json")).unwrap(),
        std::fs::read(run.join("report.json")).unwrap()
    );

    let ev = dir.path().join("ev");
    let ck = run.join("checkpoints/task-002.gslc");
    ok(&["eval", "--checkpoint", s(&ck), "--in", s(&snaps[1]), "--out", s(&ev)]);
    let records: serde_json::Value = serde_json::from_slice(&std::fs::read(ev.join("eval.json")).unwrap()).unwrap();
    let acc = records[0]["accuracy"].as_f64().unwrap();
    assert!(
        (acc - r.get(1, 1)).abs() < 1e-12,
        "eval {acc} vs R[1][1] {}",
        r.get(1, 1)
    );
}

#[test]
fn restart_modes_emit_separate_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let seq = drift_sequence(4, 100);
    let snaps: Vec<PathBuf> = seq[..2].iter().map(|g| write_snapshot(dir.path(), g)).collect();
    let mut manifests = Vec::new();
    for mode in ["warm", "cold"] {
        let out = dir.path().join(mode);
        ok(&[
            "lifelong",
            "--in",
            s(&snaps[0]),
            "--in",
            s(&snaps[1]),
            "--iterations",
            "10",
            "--set",
            "hidden=32",
            "--restart",
            mode,
            "--out",
            s(&out),
        ]);
        manifests.push(RunManifest::read(&out).unwrap());
    }
    assert!(manifests[0].config.contains("restart = warm"));
    assert!(manifests[1].config.contains("restart = cold"));
    assert_eq!(
        manifests[0].outputs["checkpoints/task-001.gslc"],
        manifests[1].outputs["checkpoints/task-001.gslc"]
    );
}

#[test]
fn config_precedence_is_file_then_env_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let snap = write_snapshot(dir.path(), &eight_class_snapshot(1));
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("snapshots = {}\nmodel = ac2\nseed = 5\n", s(&snap))).unwrap();
    let echo = |args: &[&str], env: Option<&str>| -> String {
        let out = dir.path().join(format!("o{}", args.len() + env.map_or(0, |e| e.len())));
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sumlife"));
        cmd.args(["summarize", "--config", s(&cfg), "--out", s(&out)])
            .args(args);
        match env {
            Some(v) => cmd.env("SUMLIFE_SEED", v),
            None => cmd.env_remove("SUMLIFE_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        RunManifest::read(&out).unwrap().config
    };
    let base = echo(&[], None);
    assert!(base.contains("model = ac2") && base.contains("seed = 5"));
    assert!(echo(&[], Some("77")).contains("seed = 77"));
    let both = echo(&["--seed", "9", "--model", "ac1"], Some("77"));
    assert!(both.contains("seed = 9") && both.contains("model = ac1"));

    // The echoed configuration reproduces the run.
    let echoed = dir.path().join("echo.cfg");
    std::fs::write(&echoed, &base).unwrap();
    let again = dir.path().join("again");
    ok(&["summarize", "--config", s(&echoed), "--out", s(&again)]);
    assert_eq!(RunManifest::read(&again).unwrap().config, base);
}

#[test]
fn exit_codes_distinguish_io_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = sumlife(&["summarize", "--in", s(&dir.path().join("nope.nt")), "--out", s(&out)]);
    assert_eq!(missing.status.code(), Some(1));
    let snap = write_snapshot(dir.path(), &eight_class_snapshot(1));
    let unknown = sumlife(&["summarize", "--in", s(&snap), "--set", "colour=blue", "--out", s(&out)]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("colour"));
    let bad_model = sumlife(&["summarize", "--in", s(&snap), "--model", "ac3", "--out", s(&out)]);
    assert_eq!(bad_model.status.code(), Some(2));
    let no_out = sumlife(&["summarize", "--in", s(&snap)]);
    assert_eq!(no_out.status.code(), Some(2));
}
