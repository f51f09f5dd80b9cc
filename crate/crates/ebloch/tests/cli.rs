//! End-to-end runs of the `ebloch` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    ebloch::fixtures::fixture_dir().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebloch")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("ebloch-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn field_info() {
    let o = run(&["field", "info", &fixture("example_field.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("m = 6, w = x^3 + x"), "{text}");
    assert!(text.contains("signature: (0, 2)"));

    let o = run(&["--json", "field", "info", &fixture("q.json")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m"], 2);
    assert_eq!(v["degree"], 1);
}

#[test]
fn bad_input_exits_2() {
    let bad = scratch("bad.json", "{");
    let o = run(&["field", "info", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid input"));

    let o = run(&["--json", "field", "info", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exit_code"], 2);

    assert_eq!(run(&["field", "info", "/nonexistent/field.json"]).status.code(), Some(2));
    assert_eq!(run(&["--precision", "10", "field", "info", &fixture("q.json")]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    std::fs::remove_file(bad).unwrap();
}

#[test]
fn bloch_commands() {
    let alpha = fixture("example_alpha.json");
    let o = run(&["bloch", "verify", &alpha]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("in B̂: yes"));
    assert!(text.contains("image matches stated sum: yes"));

    let o = run(&["--symmetric-range", "bloch", "regulator", &alpha]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("-7.4532295470253470444"), "{}", stdout(&o));
}

#[test]
fn element_outside_bhat_exits_3() {
    let json = format!(
        r#"{{ "field": {:?}, "basis": {{ "free_gens": [[2], [3]], "saturated": true }},
            "terms": [ {{ "coeff": 1, "e": {{ "k": 0, "r": [-2, 0] }}, "f": {{ "k": 0, "r": [-2, 1] }} }} ] }}"#,
        fixture("q.json")
    );
    let path = scratch("quarter.json", &json);
    let o = run(&["bloch", "verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("in B̂: no"), "{}", stdout(&o));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn fiveterm_check() {
    let o = run(&["fiveterm", "check", &fixture("q.json"), "--x", "1/2", "--y", "-3/4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn torsion_commands() {
    let o = run(&["torsion", "table", &fixture("q.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("w_F = 24"), "{}", stdout(&o));

    let o = run(&["torsion", "order", &fixture("q_sqrt2.json"), "--prime", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("certified order 16"));

    let o = run(&["torsion", "order", &fixture("q_beta3_lifted.json"), "--element"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("certified order: 3"));
}

#[test]
fn cycle_invariant() {
    let o = run(&["cycle", "invariant", &fixture("figure_eight.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("edge conditions: hold"));
    assert!(text.contains("2.0298832128193072500"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["bloch", "regulator", "example_alpha.json"],
        vec!["--json", "cycle", "invariant", "figure_eight.json"],
        vec!["torsion", "table", "q_sqrt2.json"],
    ] {
        let mut args: Vec<String> = args.into_iter().map(String::from).collect();
        let last = args.pop().unwrap();
        args.push(fixture(&last));
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (run(&args), run(&args));
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
