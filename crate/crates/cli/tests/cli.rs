use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crnlc::cfrm::generate_nd_family;
use crnlc::{parse_system, write_system};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn crnlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnlc"))
        .args(args)
        .env_remove("CRNLC_SEED")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn strip_comments(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_cf_subsets() {
    let schmitz = fixture("schmitz.net");
    let v = json(&crnlc(&["--json", "analyze", path_str(&schmitz)]));
    assert_eq!(v["tool"], "crnlc");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["result"]["cf_subsets"], 9);
    assert_eq!(v["result"]["nf_nodes"], 3);
    assert_eq!(v["result"]["numbers"]["deficiency"], 0);

    let sparse = fixture("sparse.net");
    let v = json(&crnlc(&["--json", "analyze", path_str(&sparse)]));
    assert_eq!(v["result"]["pl_tik"], true);
    assert_eq!(v["result"]["t_hat_rank"], 9);

    let text = stdout(&crnlc(&["analyze", path_str(&sparse)]));
    assert!(text.contains("PL-TIK: yes"));
}

#[test]
fn analyze_writes_matrix_csv() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.csv");
    let t_hat = dir.path().join("t_hat.csv");
    let cf = fixture("schmitz_cf.net");
    let out = crnlc(&["analyze", path_str(&cf), "--t-csv", path_str(&t), "--t-hat-csv", path_str(&t_hat)]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&t).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "row,M1,M2,M3,2*M1,2*M2,M4,2*M3,M5,M6");
    assert_eq!(std::fs::read_to_string(&t_hat).unwrap().lines().count(), 1 + 6 + 4);

    // NF input has no T matrix.
    let out = crnlc(&["analyze", path_str(&fixture("schmitz.net")), "--t-csv", path_str(&t)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_input_exits_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.net");
    std::fs::write(&bad, "@species A B\n@kinetics powerlaw\n@reaction R1: A -> | k=1 | F: A=1\n").unwrap();
    let out = crnlc(&["analyze", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(crnlc(&["analyze", "/nonexistent.net"]).status.code(), Some(1));
    assert_eq!(crnlc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(crnlc(&["--help"]).status.code(), Some(0));
}

#[test]
fn cf_subsets_lists_nodes() {
    let text = stdout(&crnlc(&["cf-subsets", path_str(&fixture("schmitz.net"))]));
    assert!(text.contains("M1: {R1, R2} {R3} [NF]"));
    assert!(text.contains("N_R = 9, n_r = 6"));
}

#[test]
fn transform_writes_network_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cf.net");
    let out = crnlc(&["transform", path_str(&fixture("schmitz.net")), "-o", path_str(&out_path)]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&out_path).unwrap();
    let expected = std::fs::read_to_string(fixture("schmitz_cf.net")).unwrap();
    assert_eq!(strip_comments(&written), strip_comments(&expected));
    assert_eq!(parse_system(&written).unwrap(), parse_system(&expected).unwrap());

    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cf.net.json")).unwrap()).unwrap();
    assert_eq!(sidecar["result"]["changed"], serde_json::json!(["R3", "R4", "R7"]));
    assert_eq!(sidecar["result"]["target_numbers"]["complexes"], 12);
    assert!(sidecar["result"]["checks"].as_array().unwrap().iter().all(|c| c["holds"] != false));
}

#[test]
fn transform_of_cf_input_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("same.net");
    let src = fixture("schmitz_cf.net");
    assert!(crnlc(&["transform", path_str(&src), "-o", path_str(&out_path)]).status.success());
    assert_eq!(
        strip_comments(&std::fs::read_to_string(&out_path).unwrap()),
        strip_comments(&std::fs::read_to_string(&src).unwrap())
    );
    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("same.net.json")).unwrap()).unwrap();
    assert_eq!(sidecar["result"]["identity"], true);
}

#[test]
fn transform_reports_deficiency_drop() {
    let dir = tempfile::tempdir().unwrap();
    let nd = dir.path().join("nd3.net");
    std::fs::write(&nd, write_system(&generate_nd_family(3).unwrap())).unwrap();
    let v = json(&crnlc(&["--json", "transform", path_str(&nd)]));
    assert_eq!(v["result"]["deficiency_drop"], 2);
    assert_eq!(v["config"]["variant"], "generic");
}

#[test]
fn conjugate_hill_system_and_verify_own_output() {
    let dir = tempfile::tempdir().unwrap();
    let htk = fixture("htk.net");
    for (mode, expected) in [("sparse", 6), ("dense", 10)] {
        let out_path = dir.path().join(format!("{mode}.net"));
        let v = json(&crnlc(&[
            "--json",
            "conjugate",
            path_str(&htk),
            "--mode",
            mode,
            "--eps",
            "0.1",
            "--u",
            "20",
            "-o",
            path_str(&out_path),
        ]));
        assert_eq!(v["result"]["objective"], expected);
        assert!(v["result"]["verification"]["algebraic"].as_f64().unwrap() < 1e-7);
        assert_eq!(v["config"]["epsilon"], 0.1);
        let target = parse_system(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
        assert_eq!(target.network.num_reactions(), expected);

        let c: Vec<String> = v["result"]["c"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
        let c = c.join(",");
        let out = crnlc(&["verify-conjugacy", path_str(&htk), path_str(&out_path), "--c", &c]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn conjugate_schmitz_with_auto_transform() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sparse.net");
    let lp = dir.path().join("model.lp");
    let src = fixture("schmitz.net");
    let v = json(&crnlc(&[
        "--json",
        "conjugate",
        path_str(&src),
        "--auto-transform",
        "-o",
        path_str(&out_path),
        "--lp-export",
        path_str(&lp),
    ]));
    assert_eq!(v["result"]["objective"], 13);
    assert_eq!(v["result"]["transformed"], serde_json::json!(["R3", "R4", "R7"]));
    assert_eq!(v["result"]["c"].as_array().unwrap().len(), 6);
    let model = crnlc_milp::parse_lp(&std::fs::read_to_string(&lp).unwrap()).unwrap();
    assert_eq!(model.num_binaries(), 132);

    // Without the transform the input is rejected as a usage error.
    assert_eq!(crnlc(&["conjugate", path_str(&src)]).status.code(), Some(1));
}

#[test]
fn infeasible_realization_exits_2() {
    let out = crnlc(&["conjugate", path_str(&fixture("ab.net")), "--weakly-reversible"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_prints_csv() {
    let csv = stdout(&crnlc(&["simulate", path_str(&fixture("sparse.net")), "--points", "11"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,M1,M2,M3,M4,M5,M6");
    assert_eq!(lines.len(), 12);
    assert!(lines.iter().all(|l| l.split(',').count() == 7));

    let bad = crnlc(&["simulate", path_str(&fixture("ab.net")), "--x0", "0,1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_rejects_wrong_constants() {
    let a = fixture("schmitz_cf.net");
    let b = fixture("sparse.net");
    let ok = crnlc(&["verify-conjugacy", path_str(&a), path_str(&b), "--c", "2.28,1.14,1.14,1.14,4.56,4.56"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    assert!(text.contains("algebraic residual") && text.contains("trajectory residual"));
    let bad = crnlc(&["verify-conjugacy", path_str(&a), path_str(&b), "--c", "1,1,1,1,1,1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn seed_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_crnlc"))
        .args(["--json", "analyze", path_str(&fixture("ab.net"))])
        .env("CRNLC_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["seed"], 7);
}

#[test]
fn export_lp_round_trips() {
    let text = stdout(&crnlc(&["export-lp", path_str(&fixture("htk.net")), "--eps", "0.1"]));
    let model = crnlc_milp::parse_lp(&text).unwrap();
    assert_eq!(model.num_binaries(), 72);
    assert_eq!(crnlc_milp::export_lp(&model), text);
}
