use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn treeclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeclust"))
        .args(args)
        .env_remove("TREECLUST_SOLVER")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn xor_constraints(dir: &Path) -> PathBuf {
    let p = dir.join("xor.cons");
    fs::write(&p, "ML 0 2\nML 4 6\nCL 0 4\n").unwrap();
    p
}

#[test]
fn solve_feasible_exits_zero() {
    let blobs = data("blobs.csv");
    let o = treeclust(&[
        "solve",
        "--dataset",
        blobs.to_str().unwrap(),
        "--depth",
        "2",
        "--kappa",
        "0.5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("status OPTIMAL"), "{out}");
    assert!(out.contains("ARI 1.0000"), "{out}");
}

#[test]
fn solve_infeasible_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cons = xor_constraints(dir.path());
    let xor = data("xor.csv");
    let args = [
        "solve",
        "--dataset",
        xor.to_str().unwrap(),
        "--k",
        "2",
        "--constraints",
        cons.to_str().unwrap(),
    ];
    let mut stump = args.to_vec();
    stump.extend(["--depth", "1"]);
    assert_eq!(code(&treeclust(&stump)), 2);
    let mut deeper = args.to_vec();
    deeper.extend(["--depth", "2"]);
    assert_eq!(code(&treeclust(&deeper)), 0);
}

#[test]
fn solve_timeout_without_model_exits_three() {
    let iris = data("iris.csv");
    let o = treeclust(&["solve", "--dataset", iris.to_str().unwrap(), "--time-limit", "0.000001"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
}

#[test]
fn config_errors_exit_four() {
    let blobs = data("blobs.csv");
    let b = blobs.to_str().unwrap();
    for args in [
        vec!["solve", "--dataset", b, "--epsilon", "-1"],
        vec!["solve", "--dataset", b, "--depth", "1", "--k", "3"],
        vec!["solve", "--dataset", b, "--kappa", "50"],
        vec!["solve", "--dataset", b, "--mode", "forest"],
        vec!["solve", "--dataset", "/nonexistent.csv"],
        vec!["solve", "--dataset", b, "--label-column", "nope"],
        vec!["solve", "--dataset", b, "--time-limit", "0"],
        vec!["solve", "--bogus-flag"],
    ] {
        assert_eq!(code(&treeclust(&args)), 4, "{args:?}");
    }
}

#[test]
fn solve_writes_json_and_wcnf() {
    let dir = tempfile::tempdir().unwrap();
    let (json, wcnf) = (dir.path().join("r.json"), dir.path().join("f.wcnf"));
    let blobs = data("blobs.csv");
    let o = treeclust(&[
        "solve",
        "--dataset",
        blobs.to_str().unwrap(),
        "--depth",
        "2",
        "--out",
        json.to_str().unwrap(),
        "--emit-wcnf",
        wcnf.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["status"], "OPTIMAL");
    assert_eq!(v["labels"].as_array().unwrap().len(), 18);
    assert!(fs::read_to_string(&wcnf).unwrap().starts_with("p wcnf "));
}

#[test]
fn encode_writes_formula_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let wcnf = dir.path().join("xor.wcnf");
    let xor = data("xor.csv");
    let o = treeclust(&[
        "encode",
        "--dataset",
        xor.to_str().unwrap(),
        "--depth",
        "2",
        "--emit-wcnf",
        wcnf.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&wcnf).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(header[..2], ["p", "wcnf"]);
    let sidecar = dir.path().join("xor.vars.json");
    let vars: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar).unwrap()).unwrap();
    assert!(vars["a"].is_array());
}

#[test]
fn oracle_reports_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let cons = xor_constraints(dir.path());
    let xor = data("xor.csv");
    let args = [
        "oracle",
        "--dataset",
        xor.to_str().unwrap(),
        "--k",
        "2",
        "--constraints",
        cons.to_str().unwrap(),
    ];
    let mut cc = args.to_vec();
    cc.extend(["--mode", "cc"]);
    let o = treeclust(&cc);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("min md"));
    let mut stump = args.to_vec();
    stump.extend(["--depth", "1"]);
    assert_eq!(code(&treeclust(&stump)), 2);
}

#[test]
fn sweep_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = data("blobs.csv");
    let o = treeclust(&[
        "sweep",
        "--dataset",
        blobs.to_str().unwrap(),
        "--depth",
        "2",
        "--kappa",
        "0,0.5",
        "--seeds",
        "3",
        "--jobs",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    for f in ["summary.json", "table.txt", "figure1.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}
