use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn resolve(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resolve")).args(args).output().expect("resolve runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn prints_every_section_to_stdout() {
    let doc = fixture("lps105.doc");
    let out = resolve(&[doc.as_os_str()]);
    assert!(out.status.success());
    let text = stdout(&out);
    for section in ["== centering", "== resolution", "== trace", "== ambiguity"] {
        assert!(text.contains(section), "missing {section}");
    }
    assert!(text.contains("(3)\tR2\tST-3144: sie"));
}

#[test]
fn sentences_limits_the_run() {
    let doc = fixture("lps105.doc");
    let out = resolve(&[doc.as_os_str(), "--sentences".as_ref(), "1".as_ref(), "--trace".as_ref(), "off".as_ref()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(1)\tR1"));
    assert!(!text.contains("(2)\t"));
    assert!(!text.contains("step="));
}

#[test]
fn summary_trace_keeps_only_decisions() {
    let doc = fixture("lps105.doc");
    let out = resolve(&[doc.as_os_str(), "--trace".as_ref(), "summary".as_ref()]);
    let text = stdout(&out);
    let steps: std::collections::BTreeSet<String> = text
        .lines()
        .filter_map(|l| l.strip_prefix("step="))
        .map(|l| l.split_whitespace().next().unwrap().trim_end_matches(char::is_alphabetic).to_string())
        .collect();
    let allowed = ["1", "8", "10", "11", "12", "13", "14", "19"];
    assert!(!steps.is_empty());
    assert!(steps.iter().all(|s| allowed.contains(&s.as_str())), "{steps:?}");
}

#[test]
fn out_writes_text_and_json_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("run");
    let doc = fixture("lps105.doc");
    let out = resolve(&[doc.as_os_str(), "--json".as_ref(), "--out".as_ref(), target.as_os_str()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    for name in ["centering", "resolution", "trace", "ambiguity"] {
        assert!(target.join(format!("{name}.txt")).is_file(), "{name}.txt");
        let json = std::fs::read_to_string(target.join(format!("{name}.json"))).unwrap();
        serde_json::from_str::<serde_json::Value>(&json).unwrap();
    }
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(target.join("centering.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert_eq!(rows[2]["transition"], "RETAIN");
}

#[test]
fn json_to_stdout_is_one_document() {
    let doc = fixture("lps105.doc");
    let out = resolve(&[doc.as_os_str(), "--json".as_ref(), "--trace".as_ref(), "off".as_ref()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["doc"], "lps105");
    assert_eq!(v["ambiguity"]["global"], 1);
    assert_eq!(v["trace"].as_array().unwrap().len(), 0);
}

#[test]
fn missing_document_is_a_load_error() {
    let out = resolve(&["does-not-exist.doc".as_ref()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does-not-exist.doc"));
}

#[test]
fn malformed_token_is_a_load_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("bad.doc");
    std::fs::write(&doc, "#sent 1\nonly\tthree\tfields\n").unwrap();
    let out = resolve(&[doc.as_os_str()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2"));
}

#[test]
fn reading_limit_is_an_engine_error() {
    let doc = fixture("lps105.doc");
    let out = resolve(&[doc.as_os_str(), "--max-readings".as_ref(), "1".as_ref()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceed the limit of 1"));
}

#[test]
fn taxonomy_flag_overrides_the_directive() {
    let doc = fixture("synthetic/d05.doc");
    let tax = fixture("synthetic/synthetic.taxonomy");
    let out = resolve(&[doc.as_os_str(), "--taxonomy".as_ref(), tax.as_os_str(), "--trace".as_ref(), "off".as_ref()]);
    assert!(out.status.success());
    let missing = fixture("synthetic/none.taxonomy");
    let out = resolve(&[doc.as_os_str(), "--taxonomy".as_ref(), missing.as_os_str()]);
    assert_eq!(out.status.code(), Some(1));
}
