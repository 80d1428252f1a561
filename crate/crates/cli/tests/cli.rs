use std::path::PathBuf;
use std::process::{Command, Output};

fn secmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secmm")).args(args).output().expect("spawn secmm")
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn smbmm_worked_example() {
    let cfg = config("smbmm_example.json");
    let o = secmm(&["smbmm", "run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["thresholds"]["k"], 76);
    assert_eq!(v["thresholds"]["a_major"], 76);
    assert_eq!(v["thresholds"]["b_major"], 74);
    assert_eq!(v["costs"]["randomness"], "15/4");
    assert_eq!(v["pass"], true);
    assert!(v["wall_ms"].is_null());
}

#[test]
fn ssmm_run_csv() {
    let cfg = config("ssmm_example.json");
    let o = secmm(&["ssmm", "run", "--config", &cfg, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("ssmm,a_major,2,3,2,2,3,1,1,257,25,30,5,true,"), "{row}");
}

#[test]
fn thresholds_worked_example() {
    let o = secmm(&["thresholds", "--m", "2", "--p", "3", "--n", "2", "--xa", "2", "--xb", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["a_major"].as_u64(), v["b_major"].as_u64()), (Some(25), Some(24)));
    let md = stdout(&secmm(&["thresholds", "--m", "2", "--p", "3", "--n", "2", "--xa", "2", "--xb", "3"]));
    assert!(md.contains("| ssmm | 25 | 24 |"), "{md}");
}

#[test]
fn missing_config_is_usage_error() {
    let o = secmm(&["ssmm", "run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"schema\": 1"));
    let o = secmm(&["ssmm", "run", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wrong_protocol_and_bad_args() {
    let cfg = config("smbmm_example.json");
    assert_eq!(secmm(&["ssmm", "run", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(secmm(&["thresholds", "--m", "2"]).status.code(), Some(2));
}

#[test]
fn invalid_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"schema": 1, "protocol": "ssmm", "q": 257, "bogus": 1}"#).unwrap();
    let o = secmm(&["ssmm", "run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn too_many_stragglers_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let text = std::fs::read_to_string(config("ssmm_example.json")).unwrap().replace("\"count\": 5", "\"count\": 6");
    std::fs::write(&path, text).unwrap();
    let o = secmm(&["ssmm", "run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("smbmm_example.json");
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("r{i}.json"));
            let o = secmm(&["smbmm", "run", "--config", &cfg, "--seed", "17", "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let other = stdout(&secmm(&["smbmm", "run", "--config", &cfg, "--seed", "18"]));
    assert_ne!(other.as_bytes(), outs[0].as_slice());
}

#[test]
fn sweep_is_deterministic() {
    let cfg = config("sweep_example.json");
    let a = secmm(&["sweep", "--config", &cfg]);
    let b = secmm(&["sweep", "--config", &cfg]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 17);
}

#[test]
fn compare_tables() {
    let o = secmm(&["compare", "--table", "v", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("2,3,2,2,2,1,69,73,"), "{text}");
    let o = secmm(&["compare", "--table", "iv", "--x", "1", "--format", "csv"]);
    assert!(stdout(&o).contains("2,2,2,7,1,15,14,true"));
}

#[test]
fn audit_config() {
    let cfg = config("smbmm_example.json");
    let o = secmm(&["audit", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["certificates"].as_array().unwrap().len(), 2);
}
