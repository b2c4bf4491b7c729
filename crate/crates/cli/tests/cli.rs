//! End-to-end checks of the command-line interface against temp files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tupleworks"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_units(path: &Path, rows: &[(&str, f64)]) {
    let mut body = String::from("id,x1\n");
    for (id, x) in rows {
        body.push_str(&format!("{id},{x}\n"));
    }
    fs::write(path, body).unwrap();
}

#[test]
fn design_blocks_and_assigns_eight_units() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("units.csv");
    write_units(
        &input,
        &[
            ("a", 0.1),
            ("b", 3.0),
            ("c", 0.2),
            ("d", 2.9),
            ("e", 0.3),
            ("f", 3.1),
            ("g", 0.4),
            ("h", 2.8),
        ],
    );
    let out = dir.path().join("out");
    let res = run(&[
        "design",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--method",
        "order",
        "--tuple-size",
        "4",
        "--design",
        "mt",
        "--seed",
        "7",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let partition = fs::read_to_string(out.join("partition.csv")).unwrap();
    // sorted by x: a,c,e,g then h,d,b,f -> low block is 1, high block is 2
    for id in ["a", "c", "e", "g"] {
        assert!(partition.contains(&format!("{id},1")), "{partition}");
    }
    for id in ["b", "d", "f", "h"] {
        assert!(partition.contains(&format!("{id},2")), "{partition}");
    }

    let arms = fs::read_to_string(out.join("arms.csv")).unwrap();
    let mut per_block: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for line in arms.lines().skip(1) {
        let mut parts = line.split(',');
        let id = parts.next().unwrap();
        let arm: usize = parts.next().unwrap().parse().unwrap();
        let block = if ["a", "c", "e", "g"].contains(&id) { 0 } else { 1 };
        per_block[block].push(arm);
    }
    for mut block in per_block {
        block.sort_unstable();
        assert_eq!(block, vec![1, 2, 3, 4]);
    }

    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert!(diag["within_stat"].as_f64().unwrap() >= 0.0);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn design_is_deterministic_in_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("units.csv");
    write_units(
        &input,
        &[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0)],
    );
    let mut outputs = Vec::new();
    for name in ["o1", "o2"] {
        let out = dir.path().join(name);
        let res = run(&[
            "design",
            "--input",
            input.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
            "--method",
            "order",
            "--tuple-size",
            "2",
            "--design",
            "mt",
            "--seed",
            "99",
        ]);
        assert!(res.status.success());
        outputs.push((
            fs::read(out.join("arms.csv")).unwrap(),
            fs::read(out.join("partition.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn design_reports_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("units.csv");
    fs::write(&input, "id,z9\na,1\nb,2\n").unwrap();
    let out = dir.path().join("out");
    let res = run(&[
        "design",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--method",
        "order",
        "--tuple-size",
        "2",
    ]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("z9"), "{err}");
}

fn write_pairs_data(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    // 4 pairs, 2 arms, constant-free outcomes
    let data = dir.join("data.csv");
    let mut body = String::from("id,x1,arm,y\n");
    let ys = [
        (1usize, 0.5),
        (2usize, 1.5),
        (2, 2.0),
        (1, 0.75),
        (1, 0.9),
        (2, 2.2),
        (2, 1.8),
        (1, 0.4),
    ];
    for (i, (arm, y)) in ys.iter().enumerate() {
        body.push_str(&format!("u{i},{},{arm},{y}\n", i / 2));
    }
    fs::write(&data, body).unwrap();
    let part = dir.join("part.csv");
    let mut pbody = String::from("id,block\n");
    for i in 0..8 {
        pbody.push_str(&format!("u{i},{}\n", i / 2 + 1));
    }
    fs::write(&part, pbody).unwrap();
    (data, part)
}

#[test]
fn analyze_reports_test_results() {
    let dir = tempfile::tempdir().unwrap();
    let (data, part) = write_pairs_data(dir.path());
    let out = dir.path().join("out");
    let res = run(&[
        "analyze",
        "--data",
        data.to_str().unwrap(),
        "--partition",
        part.to_str().unwrap(),
        "--contrast",
        "pair:2,1",
        "--variance",
        "adjusted",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let results: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    let entry = &results[0];
    assert_eq!(entry["contrast"], "pair:2,1");
    assert!(entry["p_value"].as_f64().unwrap() <= 1.0);
    assert!(entry["statistic"].as_f64().is_some());
    assert_eq!(entry["alpha"].as_f64().unwrap(), 0.05);
}

#[test]
fn analyze_surfaces_degenerate_variance() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let mut body = String::from("id,x1,arm,y\n");
    for i in 0..8 {
        body.push_str(&format!("u{i},{},{},5.0\n", i / 2, 1 + i % 2));
    }
    fs::write(&data, body).unwrap();
    let part = dir.path().join("part.csv");
    let mut pbody = String::from("id,block\n");
    for i in 0..8 {
        pbody.push_str(&format!("u{i},{}\n", i / 2 + 1));
    }
    fs::write(&part, pbody).unwrap();
    let out = dir.path().join("out");
    let res = run(&[
        "analyze",
        "--data",
        data.to_str().unwrap(),
        "--partition",
        part.to_str().unwrap(),
        "--contrast",
        "pair:2,1",
        "--variance",
        "adjusted",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    // constant outcomes: estimate 0, degenerate variance -> nonzero exit
    assert!(!res.status.success());
    let results: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(results[0]["estimate"][0].as_f64().unwrap(), 0.0);
    assert!(results[0]["error"]
        .as_str()
        .unwrap()
        .contains("degenerate variance"));
}

#[test]
fn analyze_triples_with_two_pairwise_contrasts() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let mut body = String::from("id,x1,arm,y\n");
    // 4 blocks of 3 arms
    let mut i = 0;
    for b in 0..4 {
        for arm in 1..=3 {
            let y = arm as f64 + 0.1 * b as f64 + 0.01 * i as f64;
            body.push_str(&format!("u{i},{b},{arm},{y}\n"));
            i += 1;
        }
    }
    fs::write(&data, body).unwrap();
    let part = dir.path().join("part.csv");
    let mut pbody = String::from("id,block\n");
    for i in 0..12 {
        pbody.push_str(&format!("u{i},{}\n", i / 3 + 1));
    }
    fs::write(&part, pbody).unwrap();
    let out = dir.path().join("out");
    let res = run(&[
        "analyze",
        "--data",
        data.to_str().unwrap(),
        "--partition",
        part.to_str().unwrap(),
        "--contrast",
        "pair:2,1",
        "--contrast",
        "pair:3,1",
        "--variance",
        "adjusted",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let results: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(results.as_array().unwrap().len(), 2);
}

#[test]
fn analyze_routes_two_control_quadruplets() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let mut body = String::from("id,x1,arm,y\n");
    let mut i = 0;
    for b in 0..5 {
        for (arm, y) in [(1, 1.0), (1, 1.2), (2, 2.0), (3, 2.5)] {
            body.push_str(&format!("u{i},{b},{arm},{}\n", y + 0.3 * b as f64 + 0.01 * i as f64));
            i += 1;
        }
    }
    fs::write(&data, body).unwrap();
    let part = dir.path().join("part.csv");
    let mut pbody = String::from("id,block\n");
    for i in 0..20 {
        pbody.push_str(&format!("u{i},{}\n", i / 4 + 1));
    }
    fs::write(&part, pbody).unwrap();
    let out = dir.path().join("out");
    let res = run(&[
        "analyze",
        "--data",
        data.to_str().unwrap(),
        "--partition",
        part.to_str().unwrap(),
        "--variance",
        "quad2c",
        "--arms",
        "3",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let results: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    // three canonical rows: each treatment vs pooled controls, then head-to-head
    assert_eq!(results.as_array().unwrap().len(), 3);
    for entry in results.as_array().unwrap() {
        assert!(entry["error"].is_null(), "{entry}");
    }
}

#[test]
fn simulate_smoke_run_and_unknown_design() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    fs::write(
        &cfg,
        r#"{
            "schema": 1,
            "study": "mse",
            "model": "M1",
            "tau_null": 0.0,
            "tau_alt": 0.2,
            "designs": ["MT", "C"],
            "parameters": ["main:1", "inter:1,2"],
            "n": 32,
            "r": 1,
            "seed": 5
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("report.json").exists());
    assert!(out.join("manifest.json").exists());
    // labels carrying commas stay one CSV field
    let mse = fs::read_to_string(out.join("mse.csv")).unwrap();
    assert!(mse.contains("\"inter:1,2\""), "{mse}");
    let header_cols = mse.lines().next().unwrap().split(',').count();
    assert_eq!(header_cols, 3); // parameter + two designs

    // unknown design id names the valid set
    fs::write(
        &cfg,
        r#"{
            "schema": 1,
            "study": "mse",
            "model": "M1",
            "tau_null": 0.0,
            "tau_alt": 0.2,
            "designs": ["NOPE"],
            "parameters": ["main:1"],
            "n": 32,
            "r": 1,
            "seed": 5
        }"#,
    )
    .unwrap();
    let res = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("NOPE") && err.contains("MT2"), "{err}");
}

#[test]
fn simulate_rejects_unknown_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    fs::write(
        &cfg,
        r#"{
            "schema": 1,
            "study": "mse",
            "model": "M1",
            "tau_null": 0.0,
            "tau_alt": 0.2,
            "designs": ["MT"],
            "parameters": ["main:1"],
            "n": 32,
            "r": 1,
            "seed": 5,
            "surprise": true
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("surprise"), "{err}");
}

#[test]
fn prestratified_design_drops_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("units.csv");
    // x2 is the stratum label; stratum 1 has 5 units, stratum 2 has 4
    let mut body = String::from("id,x1,x2\n");
    for (i, x) in [0.1, 0.2, 0.3, 0.4, 0.5].iter().enumerate() {
        body.push_str(&format!("a{i},{x},1\n"));
    }
    for (i, x) in [1.1, 1.2, 1.3, 1.4].iter().enumerate() {
        body.push_str(&format!("b{i},{x},2\n"));
    }
    fs::write(&input, body).unwrap();
    let out = dir.path().join("out");
    let res = run(&[
        "design",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
        "--method",
        "prestrat",
        "--tuple-size",
        "4",
        "--strata-col",
        "x2",
        "--design",
        "mt",
        "--seed",
        "3",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let diag: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["dropped_ids"], serde_json::json!(["a4"]));
    let partition = fs::read_to_string(out.join("partition.csv")).unwrap();
    assert!(!partition.contains("a4,"));
    let arms = fs::read_to_string(out.join("arms.csv")).unwrap();
    assert_eq!(arms.lines().count(), 9); // header + 8 kept units
}
