use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn omni(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_omni"))
        .args(args)
        .output()
        .expect("spawn omni");
    let stdout = String::from_utf8(out.stdout).expect("utf-8 stdout");
    (out.status.code().expect("exit code"), stdout)
}

fn omni_json(args: &[&str]) -> (i32, Value) {
    let (code, stdout) = omni(args);
    (code, serde_json::from_str(&stdout).expect("report is JSON"))
}

fn example() -> String {
    data("three_users.json").display().to_string()
}

fn exact(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r["exact"].as_str().unwrap().to_owned())
        .collect()
}

#[test]
fn validate_exit_codes() {
    let (code, report) = omni_json(&["validate", &example()]);
    assert_eq!(code, 0);
    assert_eq!(report["results"]["valid"], true);

    let (code, report) = omni_json(&["validate", data("bad_empty.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(report["results"]["violations"][0]["kind"], "normalization");

    let (code, _) = omni(&["validate", "/definitely/not/here.json"]);
    assert_eq!(code, 1);
}

#[test]
fn malformed_and_incomplete_files() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"type\": \"packets\", \"users\": ").unwrap();
    assert_eq!(omni(&["validate", broken.to_str().unwrap()]).0, 1);

    let missing = dir.path().join("missing.json");
    std::fs::write(
        &missing,
        r#"{"type":"entropy","users":["1","2"],"entries":[{"set":["1"],"H":"1"},{"set":["2"],"H":"1"}]}"#,
    )
    .unwrap();
    assert_eq!(omni(&["validate", missing.to_str().unwrap()]).0, 2);

    let dup = dir.path().join("dup.json");
    std::fs::write(&dup, r#"{"type":"packets","users":{"1":["a"],"1":["b"]}}"#).unwrap();
    assert_eq!(omni(&["validate", dup.to_str().unwrap()]).0, 2);
}

#[test]
fn minrate_both_modes() {
    let (code, r) = omni_json(&["minrate", &example()]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["r_co"]["exact"], "7/2");
    assert_eq!(r["results"]["mmi_identity"]["holds"], true);
    let (_, r) = omni_json(&["minrate", &example(), "--mode", "integer"]);
    assert_eq!(r["results"]["r_co"]["exact"], "4");
}

#[test]
fn identical_users_need_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("same.json");
    std::fs::write(&path, r#"{"type":"packets","users":{"x":["a","b"],"y":["a","b"]}}"#).unwrap();
    for mode in ["asymptotic", "integer"] {
        let (_, r) = omni_json(&["minrate", path.to_str().unwrap(), "--mode", mode]);
        assert_eq!(r["results"]["r_co"]["exact"], "0");
    }
}

#[test]
fn core_decisions() {
    let (code, r) = omni_json(&["core", &example(), "--alpha", "16/5"]);
    assert_eq!(code, 3);
    assert_eq!(r["results"]["nonempty"], false);

    let (code, r) = omni_json(&["core", &example(), "--alpha", "7/2", "--rates", "5/2,1/2,1/2"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["member"], true);

    let (code, r) = omni_json(&["core", &example(), "--alpha", "4", "--rates", "3,0,1", "--integer"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["member"], true);

    let (_, r) = omni_json(&["core", &example(), "--alpha", "4", "--rates", "4,0,0"]);
    assert_eq!(r["results"]["member"], false);
    assert_eq!(r["results"]["membership"]["kind"], "lower_bound");

    assert_eq!(omni(&["core", &example(), "--alpha", "4", "--rates", "1,3"]).0, 1);
    assert_eq!(omni(&["core", &example(), "--alpha", "4", "--rates", "5,-1,0"]).0, 1);
}

#[test]
fn allocations() {
    let (code, r) = omni_json(&["allocate", &example(), "--alpha", "4", "--method", "shapley"]);
    assert_eq!(code, 0);
    assert_eq!(exact(&r["results"]["allocations"][0]["rates"]), ["8/3", "2/3", "2/3"]);

    let (_, r) = omni_json(&["allocate", &example(), "--alpha", "4", "--method", "enumerate"]);
    assert_eq!(r["results"]["count"], 3);

    let (_, r) = omni_json(&[
        "allocate", &example(), "--alpha", "4", "--method", "greedy", "--order", "1,2,3",
    ]);
    assert_eq!(exact(&r["results"]["allocations"][0]["rates"]), ["3", "1", "0"]);

    let (code, r) = omni_json(&["allocate", &example(), "--alpha", "3", "--method", "shapley"]);
    assert_eq!(code, 3);
    assert_eq!(r["results"]["r_co"]["exact"], "7/2");

    assert_eq!(
        omni(&["allocate", &example(), "--alpha", "7/2", "--method", "enumerate"]).0,
        4
    );
}

#[test]
fn polyhedron_data() {
    let (code, r) = omni_json(&["polyhedron", &example(), "--alpha", "4"]);
    assert_eq!(code, 0);
    let first = &r["results"]["constraints"][0];
    assert_eq!(first["set"], serde_json::json!(["1"]));
    assert_eq!(first["bound"]["exact"], "3");
    let vertices: Vec<Vec<String>> = r["results"]["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(exact)
        .collect();
    for v in [["3", "0", "1"], ["2", "1", "1"], ["3", "1", "0"]] {
        assert!(vertices.iter().any(|w| w == &v), "missing vertex {v:?}");
    }

    let (_, r) = omni_json(&["polyhedron", &example(), "--alpha", "7/2"]);
    let vertices = r["results"]["vertices"].as_array().unwrap();
    assert_eq!(vertices.len(), 1);
    assert_eq!(exact(&vertices[0]), ["5/2", "1/2", "1/2"]);
}

#[test]
fn csv_rate_table() {
    let (code, out) = omni(&[
        "--format", "csv", "allocate", &example(), "--alpha", "4", "--method", "enumerate",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("method,order,r_1,r_2,r_3,jain_index"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn size_guard() {
    let out = Command::new(env!("CARGO_BIN_EXE_omni"))
        .args(["minrate", &example()])
        .env("OMNI_MAX_USERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn reports_rerun_identically() {
    let (_, first) = omni_json(&["allocate", &example(), "--alpha", "4", "--method", "greedy"]);
    let dir = tempfile::tempdir().unwrap();
    let echoed = dir.path().join("echo.json");
    std::fs::write(&echoed, first["inputs"]["model"].to_string()).unwrap();
    let (_, second) = omni_json(&[
        "allocate", echoed.to_str().unwrap(), "--alpha", "4", "--method", "greedy",
    ]);
    assert_eq!(first["model_digest"], second["model_digest"]);
    assert_eq!(first["results"], second["results"]);
    assert_eq!(first["certificates"], second["certificates"]);
}
