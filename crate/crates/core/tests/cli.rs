use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_handlesplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn validate_accepts_good_fixtures() {
    let files = ["cancel_pair.morse", "codim1_n3.morse", "n2_global_split.morse", "not_joinable.morse"];
    let mut args = vec!["validate".to_string(), "--jobs".into(), "2".into()];
    args.extend(files.iter().map(|f| path(f)));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), files.len());
}

#[test]
fn validate_rejects_bad_index_with_exit_1() {
    let out = run(&["validate", &path("bad_index.morse")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("index"));
}

#[test]
fn profile_prints_dimensions() {
    let out = run(&["profile", "--kind", "interior", "--k", "1", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Ms-Omega 2\nMu-Omega 3\n"), "{text}");
    assert!(text.contains("Ws_Y empty"));
    assert_eq!(code(&run(&["profile", "--kind", "bstable", "--k", "0", "--n", "2"])), 1);
}

#[test]
fn failed_precondition_exits_2() {
    let out = run(&["split", &path("not_joinable.morse"), "--z", "2"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["cancel", &path("n2_global_split.morse"), "--z", "0", "--w", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cancel_removes_the_pair() {
    let out = run(&["cancel", &path("cancel_pair.morse"), "--z", "0", "--w", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains("point "), "{text}");
}

#[test]
fn normal_form_matches_stored_outputs() {
    let dir = std::env::temp_dir().join(format!("handlesplit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (decomp, script) = (dir.join("d"), dir.join("s"));
    let out = run(&[
        "normal-form",
        &path("n2_global_split.morse"),
        "--out-decomp",
        decomp.to_str().unwrap(),
        "--out-script",
        script.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stored = |name: &str| std::fs::read_to_string(fixture(name)).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), stored("n2_global_split.normal.morse"));
    assert_eq!(std::fs::read_to_string(&decomp).unwrap(), stored("n2_global_split.decomp"));
    assert_eq!(std::fs::read_to_string(&script).unwrap(), stored("n2_global_split.script"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn replay_reproduces_normal_form() {
    let out = run(&["replay", &path("n2_global_split.morse"), &path("n2_global_split.script")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let expected = std::fs::read_to_string(fixture("n2_global_split.normal.morse")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn generate_is_deterministic_and_valid() {
    let args = ["generate", "--seed", "9", "--n", "2", "--m", "4", "--max-points", "6"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let file = std::env::temp_dir().join(format!("handlesplit-gen-{}.morse", std::process::id()));
    std::fs::write(&file, &a.stdout).unwrap();
    assert_eq!(code(&run(&["validate", file.to_str().unwrap()])), 0);
    std::fs::remove_file(&file).ok();
}

#[test]
fn rearrange_rejects_malformed_set() {
    let out = run(&["rearrange", &path("cancel_pair.morse"), "--set", "0=abc"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn oracle_reports_both_answers() {
    let out = run(&["oracle", &path("cancel_pair.morse"), "--set", "0=1/4"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("bfs reachable"), "{text}");
    assert!(text.contains("realize ok"), "{text}");
}
