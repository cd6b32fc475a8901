use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn udep(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udep"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn udep")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn version_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = udep(&["--version"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("udep "));
}

#[test]
fn generate_then_measure() {
    let dir = tempfile::tempdir().unwrap();
    let o = udep(&["generate", "--model", "mminus", "--gamma-db", "10", "--L", "80", "--seed", "5", "--out", "d.csv"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(text.lines().count(), 81);

    let o = udep(&["measure", "--input", "d.csv", "--alpha", "4"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "measure,mode,alpha,pairs,L,value,bandwidth_x,bandwidth_y");
    assert!(lines[1].starts_with("hsic,complete,,3160,80,"));
    assert!(lines[2].starts_with("chsic,confounder,4,160,80,"));

    let o = udep(&["measure", "--input", "d.csv", "--alpha", "4", "--random-pruning", "--seed", "9"], dir.path());
    assert!(stdout(&o).lines().nth(2).unwrap().starts_with("chsic,random,4,160,80,"));
}

#[test]
fn generate_to_stdout_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--model", "mplus", "--gamma-db", "-3", "--L", "10", "--seed", "1"];
    let a = udep(&args, dir.path());
    let b = udep(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("x,y,z\n"));
}

#[test]
fn sweep_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--model", "mplus", "--measures", "hsic,chsic", "--alpha", "2,4", "--L", "30,40",
        "--gamma-db-fixed", "6", "--trials", "4", "--seed", "11", "--out", "a",
    ];
    let o = udep(&args, dir.path());
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(dir.path().join("a/mplus_L.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    assert!(dir.path().join("a/mplus_L.svg").exists());

    let mut again = args.to_vec();
    *again.last_mut().unwrap() = "b";
    assert!(udep(&again, dir.path()).status.success());
    assert_eq!(csv, fs::read_to_string(dir.path().join("b/mplus_L.csv")).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.toml"),
        "model = \"mminus\"\nmeasures = [\"hsic\"]\ngamma_db = \"-2:2:2\"\nl_fixed = 30\ntrials = 3\nseed = 4\nout = \"from_file\"\n",
    )
    .unwrap();
    let o = udep(&["sweep", "--config", "exp.toml", "--trials", "2", "--out", "cli"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(dir.path().join("cli/mminus_gamma.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.starts_with("mminus,hsic,complete,,30,") && r.contains(",2,")));
    assert!(!dir.path().join("from_file").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "x,y,z\n1,2,oops\n3,4,5\n").unwrap();
    fs::write(dir.path().join("flat.csv"), "x,y,z\n1,2,3\n1,4,5\n1,6,7\n").unwrap();
    let cases: [(&[&str], i32); 7] = [
        (&["sweep", "--model", "mplus", "--L", "100", "--gamma-db", "0"], 2),
        (&["sweep", "--model", "mplus", "--L", "10", "--alpha", "20", "--trials", "1"], 2),
        (&["sweep", "--model", "mzero"], 2),
        (&["sweep", "--config", "missing.toml", "--model", "mplus"], 4),
        (&["measure", "--input", "missing.csv", "--alpha", "4"], 4),
        (&["measure", "--input", "bad.csv", "--alpha", "1"], 3),
        (&["measure", "--input", "flat.csv", "--alpha", "1"], 3),
    ];
    for (args, code) in cases {
        let o = udep(args, dir.path());
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn self_test_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = udep(&["self-test"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().count() >= 5);
    assert!(out.lines().all(|l| l.starts_with("[PASS]")));
}
