//! End-to-end tests of the `atgen` binary: verbs, exit codes, and the
//! stability of serialized output.

mod common;

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use common::*;

fn atgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atgen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).expect("tmp dir");
    dir.join(name)
}

fn write_tmp(name: &str, contents: &str) -> PathBuf {
    let path = tmp(name);
    fs::write(&path, contents).expect("writable tmp");
    path
}

#[test]
fn paths_verb_lists_the_network_attacks() {
    let out = atgen(&[
        "paths",
        "--spec",
        &fixture_path("network.json"),
        "--max-depth",
        "3",
    ]);
    assert!(out.status.success());
    let paths =
        atgen::format::paths_from_value(&serde_json::from_str(&stdout(&out)).unwrap()).unwrap();
    assert!(paper_paths(&paths).is_some());

    // Depth zero finds nothing and still succeeds.
    let out = atgen(&[
        "paths",
        "--spec",
        &fixture_path("network.json"),
        "--max-depth",
        "0",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "[]");
}

#[test]
fn malformed_spec_exits_2() {
    let bad = write_tmp("bad.json", "{ not json");
    let out = atgen(&["paths", "--spec", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_from_attacks_and_goals() {
    let tree_file = tmp("fig1_tree.json");
    let out = atgen(&[
        "generate",
        "--attacks",
        &fixture_path("fig1_attacks.json"),
        "--goals",
        &fixture_path("fig1_goals.json"),
        "--out",
        tree_file.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let tree = atgen::format::tree_from_value(
        &serde_json::from_str(&fs::read_to_string(&tree_file).unwrap()).unwrap(),
    )
    .unwrap();
    assert!(tree.semantically_equal(&fig1_tree()));
    assert_eq!(tree.size(), 8);

    // Byte-identical output on a second run.
    let out2 = atgen(&[
        "generate",
        "--attacks",
        &fixture_path("fig1_attacks.json"),
        "--goals",
        &fixture_path("fig1_goals.json"),
    ]);
    assert_eq!(stdout(&out2), fs::read_to_string(&tree_file).unwrap());
}

#[test]
fn generate_without_common_goal_exits_3() {
    let attacks = write_tmp(
        "no_common_attacks.json",
        r#"[{"leaf": "a"}, {"leaf": "b"}]"#,
    );
    let goals = write_tmp(
        "no_common_goals.json",
        r#"{"goals": ["ga", "gb"], "universe": [{"leaf": "a"}, {"leaf": "b"}],
            "sat": [[0, "ga"], [1, "gb"]]}"#,
    );
    let out = atgen(&[
        "generate",
        "--attacks",
        attacks.to_str().unwrap(),
        "--goals",
        goals.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no common goal"));
}

#[test]
fn network_pipeline_via_paths_file() {
    // Enumerate, keep the three walked-through paths, generate, check.
    let out = atgen(&[
        "paths",
        "--spec",
        &fixture_path("network.json"),
        "--max-depth",
        "3",
    ]);
    assert!(out.status.success());
    let all =
        atgen::format::paths_from_value(&serde_json::from_str(&stdout(&out)).unwrap()).unwrap();
    let picked = paper_paths(&all).expect("paper paths enumerated");
    let paths_file = write_tmp(
        "network_paper_paths.json",
        &atgen::format::to_pretty(&atgen::format::paths_to_value(&picked)),
    );

    let tree_file = tmp("network_tree.json");
    let out = atgen(&[
        "generate",
        "--paths",
        paths_file.to_str().unwrap(),
        "--out",
        tree_file.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = atgen(&[
        "check",
        "--tree",
        tree_file.to_str().unwrap(),
        "--paths",
        paths_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "check failed:\n{}", stdout(&out));
    let report = stdout(&out);
    assert!(report.contains("soundness: PASS"));
    assert!(report.contains("correctly labelled: PASS"));
    assert!(report.contains("optimally labelled: PASS"));

    // Against the full depth-3 enumeration the three-path tree is unsound:
    // the model admits more breach paths than the three walked-through ones.
    let out = atgen(&[
        "check",
        "--tree",
        tree_file.to_str().unwrap(),
        "--spec",
        &fixture_path("network.json"),
        "--max-depth",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("soundness: FAIL"));
}

#[test]
fn check_flags_unsound_trees() {
    // A tree covering only one of the three attacks is unsound and
    // relabelling its root breaks correctness.
    let tree = write_tmp(
        "partial_tree.json",
        r#"{"label": "access", "op": "SAND",
            "children": [{"label": "b"}, {"label": "l"}]}"#,
    );
    let out = atgen(&[
        "check",
        "--tree",
        tree.to_str().unwrap(),
        "--attacks",
        &fixture_path("fig1_attacks.json"),
        "--goals",
        &fixture_path("fig1_goals.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("soundness: FAIL"));

    let tree = write_tmp(
        "mislabelled_tree.json",
        r#"{"label": "w", "op": "SAND", "children": [{"label": "b"}, {"label": "l"}]}"#,
    );
    let out = atgen(&[
        "check",
        "--tree",
        tree.to_str().unwrap(),
        "--attacks",
        &fixture_path("fig1_attacks.json"),
        "--goals",
        &fixture_path("fig1_goals.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("correctly labelled: FAIL"));
}

#[test]
fn factor_verb_goldens() {
    let expr = write_tmp("expr.txt", "a.a.a + b.a.a + a.b.b + b.b.b\n");
    let out = atgen(&["factor", "--expr", expr.to_str().unwrap(), "--commutative"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "(a + b).(a + b).(a + b)");

    let out = atgen(&["factor", "--expr", expr.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "(a + b).(a.a + b.b)");

    let single = write_tmp("single.txt", "a");
    let out = atgen(&["factor", "--expr", single.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "a");

    let bad = write_tmp("bad_expr.txt", "a + +");
    let out = atgen(&["factor", "--expr", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn render_verbs() {
    let tree_file = tmp("render_tree.json");
    let out = atgen(&[
        "generate",
        "--attacks",
        &fixture_path("fig1_attacks.json"),
        "--goals",
        &fixture_path("fig1_goals.json"),
        "--out",
        tree_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = atgen(&[
        "render",
        "--tree",
        tree_file.to_str().unwrap(),
        "--format",
        "dot",
    ]);
    assert!(out.status.success());
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert_eq!(
        dot.lines()
            .filter(|l| l.contains("[label=") && l.contains("shape="))
            .count(),
        8
    );
    assert_eq!(dot.matches("comment=\"arrow\"").count(), 4);

    let out = atgen(&[
        "render",
        "--tree",
        tree_file.to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("access [SAND]"));

    let bad = write_tmp("bad_tree.json", "{}");
    let out = atgen(&["render", "--tree", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_rejects_conflicting_inputs() {
    let out = atgen(&[
        "generate",
        "--spec",
        &fixture_path("network.json"),
        "--attacks",
        &fixture_path("fig1_attacks.json"),
        "--goals",
        &fixture_path("fig1_goals.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = atgen(&["generate", "--attacks", &fixture_path("fig1_attacks.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_from_full_spec_is_sound_for_what_it_finds() {
    // The full depth-3 enumeration contains more breach paths than the
    // walked-through three; the generated tree covers exactly the attacks of
    // the paths it was given.
    let out = atgen(&[
        "paths",
        "--spec",
        &fixture_path("network.json"),
        "--max-depth",
        "3",
    ]);
    let all =
        atgen::format::paths_from_value(&serde_json::from_str(&stdout(&out)).unwrap()).unwrap();

    let tree_file = tmp("network_full_tree.json");
    let out = atgen(&[
        "generate",
        "--spec",
        &fixture_path("network.json"),
        "--max-depth",
        "3",
        "--out",
        tree_file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let tree = atgen::format::tree_from_value(
        &serde_json::from_str(&fs::read_to_string(&tree_file).unwrap()).unwrap(),
    )
    .unwrap();
    let attacks = atgen::kripke::path_attacks(&all).unwrap();
    assert_eq!(tree.semantics(), attacks);

    // The root label is the logged-in-mallory goal here too.
    let located = atgen::kripke::Predicate::new("located", vec!["mallory".into(), "server".into()]);
    match tree.top() {
        atgen::goals::Goal::Delta(d) => {
            assert!(d.removed.is_empty());
            assert_eq!(d.added, [located].into_iter().collect());
        }
        other => panic!("expected a delta root label, got {other}"),
    }
}
