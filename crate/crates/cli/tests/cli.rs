use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn k3cls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3cls"))
        .args(args)
        .env_remove("K3CLS_DATA")
        .output()
        .unwrap()
}

fn k3cls_with_data(args: &[&str], data: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_k3cls"))
        .args(args)
        .env("K3CLS_DATA", data)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn lattice_file(dir: &TempDir, name: &str, gram: &str) -> String {
    write(dir, name, &format!(r#"{{"label": "{name}", "gram": {gram}}}"#))
}

#[test]
fn lattice_info_of_the_rotation_row() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "54", "[[2,0,0],[0,16,8],[0,8,16]]");
    let o = k3cls(&["lattice-info", &p]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("det: 384"));
    assert!(s.contains("signature: (3,0)"));
    assert!(s.contains("even: true"));
}

#[test]
fn lattice_info_of_the_hyperbolic_plane() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "u", "[[0,1],[1,0]]");
    let o = k3cls(&["lattice-info", &p, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["det"], "-1");
    assert_eq!(v["signature"], serde_json::json!(["1", "1"]));
    assert_eq!(v["invariant_factors"], serde_json::json!([]));
}

#[test]
fn malformed_json_exits_with_parse_error() {
    let d = TempDir::new().unwrap();
    let p = write(&d, "bad.json", "{\"gram\": [[2, 0], [0");
    let o = k3cls(&["lattice-info", &p]);
    assert_eq!(o.status.code(), Some(2));
    let o = k3cls(&["lattice-info", "/nonexistent/file.json"]);
    assert_eq!(o.status.code(), Some(2));
    let p = lattice_file(&d, "ragged", "[[2,1],[1]]");
    assert_eq!(k3cls(&["genus", &p]).status.code(), Some(2));
}

#[test]
fn degenerate_gram_has_its_own_message() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "deg", "[[2,2],[2,2]]");
    let o = k3cls(&["lattice-info", &p]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("degenerate"));
}

#[test]
fn aut_with_special_reports_dihedral_type() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "54", "[[2,0,0],[0,16,8],[0,8,16]]");
    let o = k3cls(&["aut", &p, "--special", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["order"], "24");
    assert_eq!(v["special_order"], "12");
    assert_eq!(v["dihedral"], "D6");

    let p = lattice_file(&d, "81", "[[4,0,2],[0,4,2],[2,2,12]]");
    let s = stdout(&k3cls(&["aut", &p, "--special"]));
    assert!(s.contains("special order: 8"));
    assert!(s.contains("SO: D4"));
}

#[test]
fn aut_of_rank_one() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "two", "[[2]]");
    let o = k3cls(&["aut", &p, "--elements"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("order: 2"));
    assert!(s.contains("[[-1]]"));
}

#[test]
fn aut_of_indefinite_is_a_precondition_violation() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "u", "[[0,1],[1,0]]");
    assert_eq!(k3cls(&["aut", &p]).status.code(), Some(3));
}

#[test]
fn genus_strings() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "62", "[[6,0,3],[0,6,3],[3,3,12]]");
    assert_eq!(stdout(&k3cls(&["genus", &p])).trim(), "4^{+1}_7 3^{+2} 9^{+1}");
    let p = lattice_file(&d, "78", "[[8,4,4],[4,8,2],[4,2,8]]");
    assert_eq!(stdout(&k3cls(&["genus", &p])).trim(), "2^{+2}_II 8^{+1}_7 3^{+2}");
    let p = lattice_file(&d, "u", "[[0,1],[1,0]]");
    let o = k3cls(&["genus", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "");
    let p = lattice_file(&d, "odd", "[[1]]");
    assert_eq!(k3cls(&["genus", &p]).status.code(), Some(3));
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn classify_one_row() {
    let o = k3cls(&["classify", "--case", "70", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).lines().next().unwrap(),
        "group_no,label,n,l2,glue,tx_11,tx_12,tx_22"
    );
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 6);
    let labels: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(labels, vec!["70a", "70b", "70c", "70d", "70e", "70f"]);
    assert_eq!(rows[2], vec!["70", "70c", "2", "20", "1", "4", "1", "4"]);
}

#[test]
fn classify_everything() {
    let o = k3cls(&["classify", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&o).len(), 42);
    let o = k3cls(&["classify", "--format", "md"]);
    assert_eq!(stdout(&o).lines().count(), 44);
}

#[test]
fn classify_by_label() {
    let o = k3cls(&["classify", "--case", "81c", "--format", "csv"]);
    assert_eq!(csv_rows(&o), vec![vec!["81", "81c", "4", "40", "2", "4", "0", "4"]]);
}

#[test]
fn classify_unknown_case() {
    assert_eq!(k3cls(&["classify", "--case", "99"]).status.code(), Some(4));
    assert_eq!(k3cls(&["classify", "--case", "54z"]).status.code(), Some(4));
}

#[test]
fn classify_json_uses_string_numbers() {
    let o = k3cls(&["classify", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 42);
    assert_eq!(arr[0]["label"], "54a");
    assert_eq!(arr[0]["l_square"], "2");
    assert_eq!(arr[0]["tx"], serde_json::json!([["16", "8"], ["8", "16"]]));
}

#[test]
fn threads_do_not_change_output() {
    let one = k3cls(&["classify", "--format", "json", "--threads", "1"]);
    let four = k3cls(&["classify", "--format", "json", "--threads", "4"]);
    assert_eq!(one.stdout, four.stdout);
    let one = k3cls(&["verify", "--format", "json", "--threads", "1"]);
    let four = k3cls(&["verify", "--format", "json", "--threads", "4"]);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(k3cls(&["classify", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn classify_external_lattice() {
    let d = TempDir::new().unwrap();
    let p = lattice_file(&d, "54", "[[2,0,0],[0,16,8],[0,8,16]]");
    let o = k3cls(&["classify", "--input", &p, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "6");
}

#[test]
fn verify_passes() {
    let o = k3cls(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("42/42 cases, 11/11 table rows"));
}

fn perturbed_dataset(dir: &TempDir) -> std::path::PathBuf {
    let text = include_str!("../../core/data/reference.json");
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    v["rows"][0]["lattices"][0]["gram"][1][1] = serde_json::json!(18);
    let p = dir.path().join("perturbed.json");
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

#[test]
fn verify_flags_a_perturbed_dataset() {
    let d = TempDir::new().unwrap();
    let p = perturbed_dataset(&d);
    let o = k3cls_with_data(&["verify"], &p);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("No. 54"));
}

#[test]
fn unreadable_dataset_is_a_parse_error() {
    let d = TempDir::new().unwrap();
    let p = d.path().join("broken.json");
    std::fs::write(&p, "[").unwrap();
    assert_eq!(k3cls_with_data(&["verify"], &p).status.code(), Some(2));
}

#[test]
fn verify_with_missing_coinvariant_data_skips() {
    let d = TempDir::new().unwrap();
    let o = k3cls(&["verify", "--with-coinvariants", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("skipped: external data required"));
}

#[test]
fn verify_with_bad_coinvariant_data_fails() {
    let d = TempDir::new().unwrap();
    // positive definite, so rejected
    lattice_file(&d, "54.json", "[[2,0,0],[0,16,8],[0,8,16]]");
    let o = k3cls(&["verify", "--with-coinvariants", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("negative definite"));
}
