use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mvzsl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvzsl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(out: Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn small_dataset(dir: &Path) {
    std::fs::write(
        dir.join("synth.json"),
        r#"{"n_aux_classes":6,"n_target_classes":4,"instances_per_class":12,"n_distractors":3}"#,
    )
    .unwrap();
    ok_json(mvzsl(dir, &["synth", "--config", "synth.json", "--seed", "3", "--out", "data"]));
}

#[test]
fn pipeline_subcommands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_dataset(dir);
    let m = "data/manifest.json";

    let p = ok_json(mvzsl(dir, &["project", "--manifest", m, "--out", "proj"]));
    assert_eq!(p["projections"].as_array().unwrap().len(), 2);
    assert!(dir.join("proj/target_A.csv").exists());

    let e = ok_json(mvzsl(dir, &["embed", "--manifest", m, "--out", "emb", "--lambda", "2"]));
    let cfg: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("data/synth_config.json")).unwrap()).unwrap();
    let dims: u64 = ["feature_dim", "attribute_dim", "wordvec_dim"]
        .iter()
        .map(|k| cfg[*k].as_u64().unwrap())
        .sum();
    assert_eq!(e["embedding_dim"].as_u64(), Some(dims));
    assert_eq!(e["eigenvalues"].as_array().unwrap().len() as u64, dims);
    assert!(dir.join("emb/embedded_X.csv").exists());

    let g = ok_json(mvzsl(dir, &["graphs", "--manifest", m, "--out", "g", "--knn", "8", "--khyper", "5"]));
    assert_eq!(g["graphs"].as_array().unwrap().len(), 3 + 6);
    assert_eq!(g["nodes"].as_u64(), Some(48 + 4));

    let r = ok_json(mvzsl(
        dir,
        &["recognize", "--manifest", m, "--out", "rec", "--knn", "8", "--khyper", "5", "--n-shot", "2"],
    ));
    assert_eq!(r["labelled"].as_u64(), Some(8));
    let acc = r["metrics"]["mean_class_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));

    let pred = dir.join("rec/recognize_seed0_predictions.txt");
    let ev = ok_json(mvzsl(
        dir,
        &["eval", "--predictions", pred.to_str().unwrap(), "--truth", "data/target_labels.txt"],
    ));
    // eval scores every instance, including the labelled ones
    assert!(ev["mean_class_accuracy"].as_f64().unwrap() >= 0.0);
}

#[test]
fn annotate_tasks() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_dataset(dir);
    for (task, n) in [("instance", 48), ("class", 4), ("name", 4)] {
        let out = format!("ann_{task}");
        let a = ok_json(mvzsl(
            dir,
            &["annotate", "--manifest", "data/manifest.json", "--task", task, "--out", &out],
        ));
        assert_eq!(a["queries"].as_u64(), Some(n), "{task}");
        let written: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join(out).join("annotation.json")).unwrap()).unwrap();
        assert_eq!(written.as_array().unwrap().len(), n as usize);
    }
}

#[test]
fn ablate_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("exp.json"),
        r#"{
            "seeds": [1, 2],
            "data": {"synthetic": {"n_aux_classes": 6, "n_target_classes": 4, "instances_per_class": 12, "n_distractors": 3}},
            "settings": {"params": {"knn": 8, "k_hyper": 5}},
            "variants": [
                {"name": "nn_a", "views": ["A"], "embed": false, "recognizer": "nn"},
                {"name": "full", "views": ["X", "A", "V"], "embed": true, "recognizer": "tmv_hlp",
                 "graphs": ["two_graph", "hetero_hyper"]}
            ]
        }"#,
    )
    .unwrap();
    let s = ok_json(mvzsl(dir, &["ablate", "--config", "exp.json", "--out", "runs"]));
    assert_eq!(s["runs"].as_u64(), Some(4));
    assert!(dir.join("runs/summary.json").exists());
    assert!(dir.join("runs/full_seed2.json").exists());
}

#[test]
fn failures_are_json_with_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = mvzsl(dir, &["recognize", "--manifest", "missing.json"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "Io");

    small_dataset(dir);
    let out = mvzsl(dir, &["embed", "--manifest", "data/manifest.json", "--eps=-1"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "InvalidArgument");

    let out = mvzsl(dir, &["recognize", "--method", "svm"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "Usage");
}
