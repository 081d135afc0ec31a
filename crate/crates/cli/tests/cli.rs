use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn obdax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obdax")).args(args).env_remove("OBDAX_MAX_STEPS").output().unwrap()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = obdax(args);
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn answers_cultural_events() {
    let (code, out, _) = run(&["answer", "--kb", p(&fixture("events.dlhr")), "--query", p(&fixture("q1.cq"))]);
    assert_eq!(code, 0);
    assert_eq!(out, "c1\nev1\nex1\n");
}

#[test]
fn check_reports_class_consistency_and_depth() {
    let (code, out, _) = run(&["check", "--kb", p(&fixture("events_cri.dlhr"))]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "class: recursion-safe; consistent; admissible; k=3");
    let (code, out, _) = run(&["check", "--kb", p(&fixture("events.dlhr"))]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "class: non-recursive; consistent");
}

#[test]
fn inconsistent_kb_exits_with_two() {
    let (code, _, err) = run(&["answer", "--kb", p(&fixture("inconsistent.dlhr")), "--query", p(&fixture("q1.cq"))]);
    assert_eq!(code, 2);
    assert!(err.contains("disj(Concert, Exhibition)"), "{err}");
    let (code, out, _) = run(&["check", "--kb", p(&fixture("inconsistent.dlhr"))]);
    assert_eq!(code, 2);
    assert!(out.contains("inconsistent"));
}

#[test]
fn parse_errors_exit_with_one_and_a_location() {
    let bad = scratch("bad.cq", "q(?x) :- Concert(?x\n");
    let (code, out, err) = run(&["answer", "--kb", p(&fixture("events.dlhr")), "--query", p(&bad)]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.starts_with(&format!("{}:1:", p(&bad))), "{err}");
    let (code, _, err) = run(&["check", "--kb", "/nonexistent/kb.dlhr"]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent/kb.dlhr"));
}

#[test]
fn unsupported_fragment_exits_with_three() {
    let kb = scratch("general.dlhr", "r o s sub r.\nsimple s.\nA sub exists s.\nA(a).\nr(a, b).\n");
    let q = scratch("general.cq", "q(?x) :- r(?x,?y).\n");
    let (code, out, _) = run(&["check", "--kb", p(&kb)]);
    assert_eq!(code, 3);
    assert!(out.starts_with("class: general"), "{out}");
    let (code, _, _) = run(&["answer", "--kb", p(&kb), "--query", p(&q)]);
    assert_eq!(code, 3);
    let recursive = scratch("recursive.dlhr", "r o s sub r.\nsimple s.\nr(a, b).\ns(b, c).\n");
    let (code, _, err) = run(&["rewrite", "--kb", p(&recursive), "--query", p(&q)]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn rewrite_prints_the_disjuncts() {
    let (code, out, _) = run(&["rewrite", "--kb", p(&fixture("events.dlhr")), "--query", p(&fixture("q1.cq"))]);
    assert_eq!(code, 0);
    let mut lines: Vec<&str> = out.lines().collect();
    lines.sort();
    assert_eq!(lines, ["q(?x) :- Concert(?x).", "q(?x) :- CulturEvent(?x).", "q(?x) :- Exhibition(?x)."]);
    let (code, out, _) = run(&["rewrite", "--kb", p(&fixture("events_cri.dlhr")), "--query", p(&fixture("q2.cq")), "-k", "2"]);
    assert_eq!(code, 0);
    assert!(out.lines().count() > 1);
    assert!(out.lines().all(|l| l.contains("Concert(?x)")));
}

#[test]
fn step_cap_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_obdax"))
        .args(["rewrite", "--kb", p(&fixture("events_cri.dlhr")), "--query", p(&fixture("q2.cq")), "-k", "3"])
        .env("OBDAX_MAX_STEPS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeded 2 steps"));
}

#[test]
fn cri_answer_in_every_method() {
    let kb = fixture("events_cri.dlhr");
    let q2 = fixture("q2.cq");
    for extra in [&[][..], &["-k", "2"], &["--method", "k-rewrite", "-k", "3"]] {
        let mut args = vec!["answer", "--kb", p(&kb), "--query", p(&q2)];
        args.extend_from_slice(extra);
        let (code, out, err) = run(&args);
        assert_eq!((code, out.as_str()), (0, "c1\n"), "{extra:?}: {err}");
    }
    let (code, _, _) = run(&["answer", "--kb", p(&kb), "--query", p(&q2), "--method", "rewrite"]);
    assert_eq!(code, 3);
}

#[test]
fn json_answers_are_byte_identical_across_runs() {
    let (kb, q2) = (fixture("events_cri.dlhr"), fixture("q2.cq"));
    let args = ["answer", "--kb", p(&kb), "--query", p(&q2), "--json"];
    let first = obdax(&args);
    assert!(first.status.success());
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["answers"], serde_json::json!([["c1"]]));
    assert_eq!(v["exact"], true);
    for _ in 0..3 {
        assert_eq!(obdax(&args).stdout, first.stdout);
    }
}

#[test]
fn listed_moves_apply_to_their_previewed_query() {
    let kb = fixture("events.dlhr");
    let q = scratch("restrain.cq", "q(?x) :- Event(?x), occursIn(?x,?y), City(?y).\n");
    let (code, out, _) = run(&["moves", "--kb", p(&kb), "--query", p(&q), "--direction", "restrain"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(out.contains("CulturEvent ⊑ Event"), "{out}");
    for pair in lines.chunks(2) {
        let id = pair[0].split_whitespace().next().unwrap();
        let (code, applied, err) = run(&["apply", "--kb", p(&kb), "--query", p(&q), "--move", id]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(applied.trim(), pair[1].trim());
    }
    let (code, _, err) = run(&["apply", "--kb", p(&kb), "--query", p(&q), "--move", "0000.v1"]);
    assert_eq!(code, 1);
    assert!(err.contains("no move"));
    let first = lines[0].split_whitespace().next().unwrap().replace(".v1", ".v7");
    let (code, _, err) = run(&["apply", "--kb", p(&kb), "--query", p(&q), "--move", &first]);
    assert_eq!(code, 1);
    assert!(err.contains("another knowledge base version"));
}

#[test]
fn relax_moves_with_data() {
    let kb = fixture("events_cri.dlhr");
    let (code, out, _) = run(&["moves", "--kb", p(&kb), "--query", p(&fixture("q2.cq")), "--direction", "relax", "--data"]);
    assert_eq!(code, 0);
    assert!(out.contains("GD2"), "{out}");
    assert!(out.contains("?z = Austria") || out.contains("= Austria"), "{out}");
}

#[test]
fn navigation_rolls_up_and_drills_down() {
    let kb = fixture("events_cri.dlhr");
    let (code, out, _) = run(&["navigate", "--kb", p(&kb), "--query", p(&fixture("q2.cq")), "--var", "?y", "--direction", "up"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("City -> Country"), "{out}");
    assert!(out.contains("= Austria"));
    let (code, out, _) = run(&["navigate", "--kb", p(&kb), "--query", p(&fixture("q2.cq")), "--var", "y", "--direction", "down"]);
    assert_eq!(code, 0);
    assert!(out.contains("City -> Venue"), "{out}");
    let (code, _, err) = run(&["navigate", "--kb", p(&kb), "--query", p(&fixture("q2.cq")), "--var", "?x", "--direction", "up"]);
    assert_eq!(code, 1);
    assert!(err.contains("?x"));
}
