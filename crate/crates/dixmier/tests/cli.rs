//! End-to-end checks of the `dixmier` binary and the description format.

use std::path::PathBuf;
use std::process::{Command, Output};

use dixmier::description::SystemDescription;
use dixmier::FIXTURES;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dixmier"))
        .args(args)
        .output()
        .unwrap()
}

fn fixture_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
        .to_str()
        .unwrap()
        .to_owned()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("dixmier-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn every_fixture_validates() {
    for (name, _) in FIXTURES {
        let out = bin(&["validate", &fixture_path(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("valid: YES"));
    }
}

#[test]
fn exit_codes() {
    let bad_json = scratch("bad.json", "{ \"group\": ");
    let out = bin(&["validate", &bad_json]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let bad_field = scratch(
        "bad-field.json",
        r#"{"group": {"kind": "finite", "cyclic": [2]}, "algebra": {"kind": "functions_on_set", "size": 2},
            "action": {"kind": "permutation", "per_generator": [{"generator": 1, "perm": [0, 0]}]}}"#,
    );
    assert_eq!(bin(&["validate", &bad_field]).status.code(), Some(2));

    let missing = bin(&["validate", "/nonexistent/system.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(
        bin(&["norm", &fixture_path("free2"), "c"]).status.code(),
        Some(1)
    );
    assert_eq!(
        bin(&["ideals", &fixture_path("free2")]).status.code(),
        Some(1)
    );
    assert_eq!(
        bin(&["decompose", &fixture_path("z2-swap"), "--format", "csv"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn reports_are_reproducible() {
    let p = fixture_path("free2");
    for args in [
        vec![
            "average-ph",
            p.as_str(),
            "x",
            "--kmax",
            "2",
            "--format",
            "json",
        ],
        vec![
            "average-pcom",
            p.as_str(),
            "x",
            "--N",
            "16",
            "--format",
            "csv",
        ],
        vec!["norm", p.as_str(), "laplace", "--radius", "4"],
    ] {
        let a = bin(&args);
        let b = bin(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
    let s = fixture_path("s3-natural");
    assert_eq!(bin(&["report", &s]).stdout, bin(&["report", &s]).stdout);
}

#[test]
fn csv_trace_columns() {
    let out = bin(&[
        "average-pcom",
        &fixture_path("free2"),
        "x",
        "--N",
        "64",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("step,terms,norm_lower,l1_upper,certified_bound")
    );
    let steps: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(steps, ["1", "4", "16", "64"]);
}

#[test]
fn output_flag_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("dixmier-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("ideals.txt");
    let out = bin(&[
        "ideals",
        &fixture_path("z2-swap"),
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("maximal ideals: 1; maximal invariant ideals of A: 1; bijection: YES"));
}

#[test]
fn ideals_line_for_the_negative_control() {
    let out = bin(&["ideals", &fixture_path("z2-trivial-on-scalars")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(
        "maximal ideals: 2; maximal invariant ideals of A: 1; bijection: NO (hypothesis (DP)/class 𝒫 absent)"
    ));
}

#[test]
fn descriptions_round_trip() {
    for (name, text) in FIXTURES {
        let d = SystemDescription::from_json(text).unwrap();
        let again = SystemDescription::from_json(&d.to_json()).unwrap();
        assert_eq!(d, again, "{name}");
        let (b1, b2) = (d.build().unwrap(), again.build().unwrap());
        assert_eq!(b1.system.group(), b2.system.group());
        assert_eq!(b1.system.algebra(), b2.system.algebra());
        assert_eq!(b1.system.action(), b2.system.action());
        assert_eq!(b1.system.cocycle(), b2.system.cocycle());
        assert!(b1.elements.keys().eq(b2.elements.keys()));
        for (k, x) in &b1.elements {
            assert_eq!(x.distance(&b2.elements[k]), 0.0, "{name}: {k}");
        }
    }
}
