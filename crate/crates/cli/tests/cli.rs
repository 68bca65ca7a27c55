use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indi-hinf"))
        .args(args)
        .current_dir(cwd)
        .env_remove("INDI_HINF_OUT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// File name to contents, without the metadata file.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "metadata.toml")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn synth_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["synth", "--loop", "guidance", "--controllers", "pd,hinf-structured", "--seed", "3"];
    let a = run(&[&args[..], &["--out", "a"]].concat(), tmp.path());
    let b = run(&[&args[..], &["--out", "b"]].concat(), tmp.path());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    let (sa, sb) = (snapshot(&tmp.path().join("a")), snapshot(&tmp.path().join("b")));
    assert_eq!(sa.len(), 4);
    assert_eq!(sa, sb);
    assert!(tmp.path().join("a/metadata.toml").exists());
}

#[test]
fn missing_weight_file_fails_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--weights", "./nope.toml", "--out", "x"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.toml"));
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn compare_needs_two_controllers() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["compare", "--scenario", "fig7b", "--controllers", "pd", "--out", "x"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn unknown_flag_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["simulate", "--bogus"], tmp.path())), 2);
    assert_eq!(code(&run(&["synth", "--structure", "1"], tmp.path())), 2);
}

#[test]
fn compare_writes_one_row_per_controller() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["compare", "--scenario", "fig7b", "--out", "cmp"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("cmp/fig7b");
    let doc: toml::Table = fs::read_to_string(dir.join("comparison.toml")).unwrap().parse().unwrap();
    let rows = doc["rows"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["controller"].as_str().unwrap()).collect();
    assert_eq!(names, ["pd", "hinf-structured", "hinf-full"]);
    let csv = fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for n in names {
        assert!(dir.join(format!("trace-{n}.csv")).exists());
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("met: yes"));
}

#[test]
fn estimate_leaves_its_log_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["estimate", "--noise", "0.01", "--out", "syn"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let log = tmp.path().join("syn/log.csv");
    let before = fs::read(&log).unwrap();
    let o = run(&["estimate", "--log", log.to_str().unwrap(), "--out", "real"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&log).unwrap(), before);
    let est: toml::Table = fs::read_to_string(tmp.path().join("real/estimate.toml")).unwrap().parse().unwrap();
    assert!(est["tau_m"].as_float().unwrap() > 0.0);
}

#[test]
fn refuses_to_replace_foreign_directory() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("keep")).unwrap();
    fs::write(tmp.path().join("keep/notes.txt"), "mine").unwrap();
    let o = run(&["synth", "--controllers", "pd", "--out", "keep"], tmp.path());
    assert_eq!(code(&o), 2);
    assert_eq!(fs::read_to_string(tmp.path().join("keep/notes.txt")).unwrap(), "mine");
}
