use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::tempdir;

fn fixture(bond: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("h2_sto3g_{bond}.fcidump"))
}

fn qvqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvqe"))
        .args(args)
        .env_remove("QVQE_ORACLE_LIMIT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn exact_energy(args: &[&str]) -> f64 {
    let o = qvqe(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    text.trim()
        .strip_prefix("E_exact = ")
        .and_then(|t| t.strip_suffix(" Ha"))
        .unwrap()
        .parse()
        .unwrap()
}

fn energy_line(o: &Output) -> f64 {
    let text = stdout(o);
    text.trim()
        .strip_prefix("E = ")
        .and_then(|t| t.split(" Ha").next())
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn map_prints_ladder_images() {
    let o = qvqe(&["map", "--mapping", "jw", "--modes", "1", "--op", "a^ 0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("X0") && text.contains("Y0"));
    assert!(text.contains("(0.5,0)") && text.contains("(0,-0.5)"), "{text}");

    let o = qvqe(&["map", "--mapping", "parity", "--modes", "3", "--op", "a 1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("Z0 X1 X2") && text.contains("Y1 X2"), "{text}");
}

#[test]
fn map_exit_codes() {
    let o = qvqe(&["map", "--mapping", "bk", "--modes", "3", "--op", "a 0"]);
    assert_eq!(code(&o), 3);
    let o = qvqe(&["map", "--mapping", "jw", "--modes", "2", "--op", "b 0"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('^') && !err.contains("error: error"), "{err}");
    let o = qvqe(&["map", "--mapping", "wat", "--modes", "2", "--op", "a 0"]);
    assert_eq!(code(&o), 2);
    let o = qvqe(&["map", "--mapping", "jw", "--modes", "2", "--op", "a 5"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn encode_state_examples() {
    let o = qvqe(&["encode-state", "--mapping", "parity", "--occupations", "1010"]);
    assert_eq!(stdout(&o).trim(), "1100");
    let o = qvqe(&["encode-state", "--mapping", "jw", "--occupations", "1010"]);
    assert_eq!(stdout(&o).trim(), "1010");
    let o = qvqe(&["encode-state", "--mapping", "jw", "--occupations", "10x0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exact_is_mapping_invariant_and_sector_bounded() {
    let f = fixture("0.74");
    let f = f.to_str().unwrap();
    let jw = exact_energy(&["exact", "--fcidump", f, "--mapping", "jw"]);
    let bkt = exact_energy(&["exact", "--fcidump", f, "--mapping", "bktree"]);
    assert_eq!(jw, bkt);
    assert!((jw - -1.137283834489).abs() < 1e-9);
    for n in 0..=4 {
        let s = exact_energy(&["exact", "--fcidump", f, "--sector", &n.to_string()]);
        assert!(s >= jw - 1e-10);
    }
}

#[test]
fn exact_on_core_energy_only_file() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("core.fcidump");
    fs::write(
        &path,
        " &FCI NORB=2,NELEC=2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n 0.75 0 0 0 0\n",
    )
    .unwrap();
    let e = exact_energy(&["exact", "--fcidump", path.to_str().unwrap()]);
    assert_eq!(e, 0.75);
}

#[test]
fn oracle_limit_is_configurable() {
    let f = fixture("0.74");
    let o = Command::new(env!("CARGO_BIN_EXE_qvqe"))
        .args(["exact", "--fcidump", f.to_str().unwrap()])
        .env("QVQE_ORACLE_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn missing_fcidump_is_a_parse_error() {
    let o = qvqe(&["exact", "--fcidump", "/nonexistent/h2.fcidump"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn energy_reaches_exact_and_writes_result() {
    let dir = tempdir().unwrap();
    let f = fixture("0.84");
    let f = f.to_str().unwrap();
    let exact = exact_energy(&["exact", "--fcidump", f]);
    let out = dir.path().join("r.json");
    let circuit = dir.path().join("c.txt");
    let o = qvqe(&[
        "energy",
        "--fcidump",
        f,
        "--out",
        out.to_str().unwrap(),
        "--dump-circuit",
        circuit.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let e = energy_line(&o);
    assert!((e - exact).abs() < 1e-6);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((json["energy"].as_f64().unwrap() - e).abs() < 1e-14);
    assert_eq!(json["converged"], true);
    assert_eq!(json["params"].as_array().unwrap().len(), 3);
    assert!(json["trace"].as_array().unwrap().len() > 1);
    assert!(!fs::read_to_string(&circuit).unwrap().is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("config:") && err.contains("ansatz=uccsd"));
}

#[test]
fn seeded_energy_runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let f = fixture("0.74");
    let outs: Vec<Vec<u8>> = ["a.json", "b.json"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let o = qvqe(&[
                "energy",
                "--fcidump",
                f.to_str().unwrap(),
                "--ansatz",
                "sp",
                "--seed",
                "7",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(o.status.success() || code(&o) == 4);
            fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn energy_exit_codes() {
    let f = fixture("0.74");
    let f = f.to_str().unwrap();
    let o = qvqe(&["energy", "--fcidump", f, "--ansatz", "hea", "--layers", "0"]);
    assert_eq!(code(&o), 3);
    let o = qvqe(&["energy", "--fcidump", f, "--ansatz", "sp", "--mapping", "parity"]);
    assert_eq!(code(&o), 3);
    let o = qvqe(&["energy", "--fcidump", f, "--ansatz", "sp", "--optimizer", "gd", "--gradient", "shift"]);
    assert_eq!(code(&o), 3);
    let o = qvqe(&["energy", "--fcidump", f, "--ansatz", "nope"]);
    assert_eq!(code(&o), 2);
    let o = qvqe(&["energy", "--fcidump", f, "--max-iter", "1"]);
    assert_eq!(code(&o), 4);
}

fn write_manifest(dir: &Path) -> PathBuf {
    let points: Vec<String> = ["0.64", "0.74"]
        .iter()
        .map(|b| {
            format!(
                r#"{{"label":"r{b}","parameter":{b},"fcidump":{:?}}}"#,
                fixture(b).display().to_string()
            )
        })
        .collect();
    let json = format!(
        r#"{{"shared":{{"mapping":"jw","ansatz":{{"kind":"uccsd"}},"vqe":{{"optimizer":"nelder-mead","tol":1e-8,"max_iter":2000,"seed":1}}}},"warm_start":false,"points":[{}]}}"#,
        points.join(",")
    );
    let path = dir.join("scan.json");
    fs::write(&path, json).unwrap();
    path
}

#[test]
fn scan_writes_csv_and_refuses_resume_without_checkpoint() {
    let dir = tempdir().unwrap();
    let manifest = write_manifest(dir.path());
    let out = dir.path().join("curve.csv");
    let m = manifest.to_str().unwrap();
    let o = qvqe(&["scan", "--manifest", m, "--out", out.to_str().unwrap(), "--resume"]);
    assert_eq!(code(&o), 3);

    let o = qvqe(&["scan", "--manifest", m, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("curve.ckpt.json").exists());

    fs::write(&manifest, "{not json").unwrap();
    let o = qvqe(&["scan", "--manifest", m, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn every_subcommand_has_help() {
    for sub in ["map", "energy", "exact", "scan", "encode-state"] {
        let o = qvqe(&[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        assert!(stdout(&o).contains("Usage"));
    }
    let o = qvqe(&["energy", "--bogus"]);
    assert_eq!(code(&o), 2);
}
