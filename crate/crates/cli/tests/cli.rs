use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn henkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henkin"))
        .args(args)
        .env_remove("HENKIN_SEED")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&d).unwrap();
    d.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const PARITY: &str = "fun f 1\nelem 0 1 2 3 4 5\nmap f 0 0\nmap f 1 1\nmap f 2 0\nmap f 3 1\nmap f 4 0\nmap f 5 1\nusort 0 1\n";

#[test]
fn construct_then_audit() {
    let log = scratch("pure.log");
    let o = henkin(&["construct", "--provider", "pure-set", "--rounds", "3", "--seed", "1", "--out", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("steps 133"));
    let o = henkin(&["audit", "--log", log.to_str().unwrap(), "--mode", "splitting-distinctness"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("audit splitting-distinctness pass"));
    let o = henkin(&["--quiet", "audit", "--log", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stderr.is_empty());
}

#[test]
fn same_seed_same_log() {
    let (a, b) = (scratch("g1.log"), scratch("g2.log"));
    for p in [&a, &b] {
        let o = henkin(&["--quiet", "construct", "--provider", "random-graph", "--rounds", "2", "--seed", "5", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn seed_from_environment() {
    let (a, b) = (scratch("e1.log"), scratch("e2.log"));
    let o = Command::new(env!("CARGO_BIN_EXE_henkin"))
        .args(["--quiet", "construct", "--provider", "pure-set", "--rounds", "2", "--out", a.to_str().unwrap()])
        .env("HENKIN_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    henkin(&["--quiet", "construct", "--provider", "pure-set", "--rounds", "2", "--seed", "9", "--out", b.to_str().unwrap()]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn missing_struct_file_is_usage_error() {
    let o = henkin(&["analyze", "sprk", "--struct", "missing.txt", "--set", "a,b", "--cap", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_provider_and_mode() {
    let o = henkin(&["construct", "--provider", "nope", "--rounds", "1", "--out", scratch("x.log").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let log = scratch("m.log");
    henkin(&["--quiet", "construct", "--provider", "pure-set", "--rounds", "1", "--out", log.to_str().unwrap()]);
    let o = henkin(&["audit", "--log", log.to_str().unwrap(), "--mode", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tampered_log_fails_audit() {
    let log = scratch("t.log");
    henkin(&["--quiet", "construct", "--provider", "pure-set", "--rounds", "2", "--seed", "1", "--out", log.to_str().unwrap()]);
    let text = fs::read_to_string(&log).unwrap();
    let bad = text.replacen("fmac 0,1 ", "fmac 00,01,1 ", 1);
    assert_ne!(bad, text);
    fs::write(&log, bad).unwrap();
    let o = henkin(&["audit", "--log", log.to_str().unwrap(), "--mode", "chain-validity"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn sprk_on_pure_set() {
    let m = scratch("pure4.txt");
    fs::write(&m, "elem a b c d\n").unwrap();
    let o = henkin(&["analyze", "sprk", "--struct", m.to_str().unwrap(), "--set", "a", "--cap", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("rank 3"), "{}", stdout(&o));
}

#[test]
fn en_and_gamma_on_parity() {
    let m = scratch("parity.txt");
    fs::write(&m, PARITY).unwrap();
    let t = scratch("parity.terms");
    fs::write(&t, "fun f 1\nterm 1 (f ?w1)\n").unwrap();
    let o = henkin(&["analyze", "en", "--struct", m.to_str().unwrap(), "--terms", t.to_str().unwrap(), "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = henkin(&["analyze", "gamma", "--terms", t.to_str().unwrap(), "--depth", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("formulas 5\n"));
    let o = henkin(&["analyze", "gamma", "--terms", t.to_str().unwrap(), "--depth", "2", "--search-struct", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not-found"));
}

#[test]
fn fmac_tools() {
    let o = henkin(&["fmac", "liftings", "0,1", "00,01,1"]);
    assert_eq!(stdout(&o), "count 2\n");
    let o = henkin(&["fmac", "validate", "0,10"]);
    assert_eq!(o.status.code(), Some(1));
    let o = henkin(&["fmac", "project", "00,01,1", "011"]);
    assert_eq!(stdout(&o), "01\n");
}

#[test]
fn omit_file_is_recorded() {
    let f = scratch("omit.txt");
    fs::write(&f, "# omit the generic unary type\nunary P 8\n").unwrap();
    let log = scratch("omit.log");
    let o = henkin(&[
        "--quiet", "construct", "--provider", "unary-generic", "--rounds", "2", "--seed", "1",
        "--omit", f.to_str().unwrap(), "--out", log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(fs::read_to_string(&log).unwrap().contains("omit 0 unary P bound 8"));
}
