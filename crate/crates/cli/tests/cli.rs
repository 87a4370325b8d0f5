use std::io::Write;
use std::process::{Command, Output};

fn epswb(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_epswb"));
    cmd.args(args);
    for var in ["EPSWB_BUDGET", "EPSWB_DEPTH", "EPSWB_BOUND", "EPSWB_EMIT", "EPSWB_SEQUENTIAL"] {
        cmd.env_remove(var);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn spec_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn empty_file_succeeds() {
    let f = spec_file("# nothing to check\n");
    let o = epswb(&["run", f.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 holds, 0 fails, 0 undetermined"));
}

#[test]
fn sets2_demo_reports_the_counterexample() {
    let o = epswb(&["demo", "demo-sets2"], &[]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("(1,∅)"), "{out}");
    assert!(out.lines().any(|l| l.contains("ac") && l.contains("holds")));
}

#[test]
fn passing_demos_exit_zero() {
    for name in ["demo-sets", "demo-eff", "demo-epsilon-rules"] {
        let o = epswb(&["demo", name, "--sequential"], &[]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}

#[test]
fn emitted_records_are_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.jsonl");
    let o = epswb(&["demo", "demo-eff", "--emit", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 8);
    for r in &records {
        for key in ["id", "kind", "verdict", "witness", "certificate", "millis"] {
            assert!(r.get(key).is_some(), "{key} missing in {r}");
        }
        assert_eq!(r["verdict"], "holds");
    }
    let hilbertian = records.iter().find(|r| r["kind"] == "hilbertian").unwrap();
    assert!(hilbertian["witness"].as_str().unwrap().contains("Γ(a1)"));
    assert!(hilbertian["certificate"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn refuted_inequality_fails() {
    let f = spec_file("carrier A = a b\npredicate p on A = a: [n0]\npredicate q on A = b: [n0]\nassert leq p q\nassert leq q q\n");
    let o = epswb(&["run", f.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("line-4    FAILS"), "{out}");
    assert!(out.contains("line-5    holds"), "{out}");
}

#[test]
fn parse_errors_carry_line_and_column() {
    let f = spec_file("carrier A = a0\n\npredicate p on A = a1: all\n");
    let o = epswb(&["run", f.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3, column 20"), "{err}");
}

#[test]
fn missing_file_is_an_input_error() {
    let o = epswb(&["run", "/nonexistent/spec.eps"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn environment_overrides_the_file() {
    // Without the override the term normalizes; one step is not enough.
    let f = spec_file("set budget = 1000\nassert reduces S K K K -> K\n");
    let path = f.path().to_str().unwrap();
    assert_eq!(epswb(&["run", path], &[]).status.code(), Some(0));
    let o = epswb(&["run", path], &[("EPSWB_BUDGET", "1")]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("undetermined"));
    let o = epswb(&["run", path, "--budget", "1000"], &[("EPSWB_BUDGET", "1")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bound_flag_reaches_topos_checks() {
    let f = spec_file("topos arity=1\nassert epsilon-topos\n");
    let o = epswb(&["run", f.path().to_str().unwrap(), "--bound", "2"], &[]);
    assert!(stdout(&o).contains("bound 2"), "{}", stdout(&o));
    let o = epswb(&["run", f.path().to_str().unwrap()], &[("EPSWB_BOUND", "1")]);
    assert!(stdout(&o).contains("bound 1"), "{}", stdout(&o));
}
