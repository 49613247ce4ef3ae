//! End-to-end runs of the `ramlab` binary on the bundled specs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn ramlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramlab")).args(args).env("SOURCE_DATE_EPOCH", "1700000000").output().unwrap()
}

fn spec(name: &str) -> String {
    specs().join(name).display().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn kstar_breaks_report() {
    let out = ramlab(&["breaks", &spec("kstar3_field.toml"), &spec("kstar3_extension.toml")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], "ramlab-report/1");
    let r = &v["result"];
    assert_eq!(r["b"], "2");
    assert_eq!(r["b_log"], "1");
    assert_eq!(r["method"], "roots");
    assert_eq!(r["agreement"], true);
    assert_eq!(r["upper_breaks"], serde_json::json!(["1"]));
}

#[test]
fn tame_extension_has_no_wild_break() {
    let out = ramlab(&["breaks", &spec("q3.toml"), &spec("tame_sqrt3.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["b_log"], "0");
    assert_eq!(r["b"], "1");
}

#[test]
fn malformed_specs_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad_toml = write(dir.path(), "bad.toml", "p = [");
    let unknown_key = write(dir.path(), "key.toml", "p = 3\nprime = 3\n");
    let not_eisenstein = write(dir.path(), "ext.toml", "name = \"z\"\ncoeffs = [3, 0, 1, 1]\n");
    for (f, e) in [
        (bad_toml.as_str(), spec("tame_sqrt3.toml")),
        (unknown_key.as_str(), spec("tame_sqrt3.toml")),
        (&spec("q3.toml"), not_eisenstein.clone()),
        (&spec("q3.toml"), dir.path().join("missing.toml").display().to_string()),
    ] {
        let out = ramlab(&["breaks", f, &e]);
        assert_eq!(out.status.code(), Some(2), "{} {}", f, e);
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn precision_failures_exit_with_code_3() {
    let out = ramlab(&["breaks", &spec("q3.toml"), &spec("tame_sqrt3.toml"), "--precision", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_lemma_is_an_input_error() {
    let out = ramlab(&["verify", "riemann-hypothesis"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown lemma"));
}

#[test]
fn radius_lemma_passes_on_ten_thousand_samples() {
    let out = ramlab(&["verify", "radius-pth-power", "--samples", "10000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["samples"], 10000);
    assert_eq!(v["result"]["failures"], 0);
    assert_eq!(v["manifest"]["seed"], 7);
}

#[test]
fn tame_pullback_lemma_passes() {
    let out = ramlab(&["verify", "tame-pullback"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["failures"], 0);
}

#[test]
fn empty_family_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("empty.csv");
    let out = ramlab(&["table", &spec("empty_family.toml"), "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("label,"));
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("empty.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(side["summary"]["rows"], 0);
}

#[test]
fn kstar_family_has_swan_one() {
    let out = ramlab(&["table", &spec("kstar_family.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["result"]["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r["swan"], "1");
        assert_eq!(r["art"], "2");
        assert_eq!(r["integral"], true);
    }
}

#[test]
fn cyclotomic_family_is_integral() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cyc.csv");
    let out = ramlab(&["table", &spec("cyclotomic_family.toml"), "--format", "csv", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_path(&out_path).unwrap();
    let hdr = rd.headers().unwrap().clone();
    let col = |name: &str| hdr.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 6);
    for r in &rows {
        assert_eq!(&r[col("integral")], "true");
        assert_eq!(&r[col("subquotients_ok")], "true");
        assert_eq!(&r[col("status")], "ok");
    }
    // Q_p(ζ_p): tame, Swan 0; Q_p(ζ_{p²}) has a character with Swan 1
    let swan = |label: &str| rows.iter().filter(|r| &r[0] == label).map(|r| r[col("swan")].to_string()).collect::<Vec<_>>();
    assert_eq!(swan("Q5(zeta5)"), vec!["0"]);
    assert_eq!(swan("Q3(zeta9)"), vec!["0", "1"]);
}

#[test]
fn corpus_family_with_text_entries() {
    let out = ramlab(&["table", &spec("corpus_family.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["summary"]["errors"], 0);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["label"] == "Q3(zeta3) by text" && r["swan"] == "0"));
}

#[test]
fn failing_members_are_marked_and_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // Q_3(3^{1/3}) is not Galois
    let fam = write(
        dir.path(),
        "fam.toml",
        "[[builtin]]\nkind = \"kstar\"\nprimes = [3]\n\n[[extension]]\nlabel = \"cube root\"\np = 3\n[[extension.eisenstein]]\nname = \"z\"\ncoeffs = [-3, 0, 0, 1]\n",
    );
    let out = ramlab(&["table", &fam]);
    assert_ne!(out.status.code(), Some(0));
    let rows = json(&out)["result"]["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["status"], "ok");
    assert!(rows[1]["status"].as_str().unwrap().starts_with("error"));
}

#[test]
fn identical_manifests_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out =
            ramlab(&["table", &spec("cyclotomic_family.toml"), "--format", "json", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(p).unwrap()
    };
    // same --out path so the manifests coincide
    let a = run("t.json");
    let b = run("t.json");
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["manifest"]["timestamp"], 1700000000u64);
    let bytes = std::fs::read(specs().join("cyclotomic_family.toml")).unwrap();
    assert_eq!(v["manifest"]["inputs"][0]["sha256"], ramlab::report::sha256_hex(&bytes));

    let v1 = ramlab(&["verify", "monotonicity", "--seed", "3"]);
    let v2 = ramlab(&["verify", "monotonicity", "--seed", "3"]);
    assert_eq!(v1.stdout, v2.stdout);
}
