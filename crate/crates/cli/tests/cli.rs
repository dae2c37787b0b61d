use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(rel)
}

fn gdtt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdtt"))
        .args(args)
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn path(rel: &str) -> String {
    corpus(rel).display().to_string()
}

#[test]
fn check_ok() {
    let o = gdtt(&["check", &path("positive/streams.gdtt")]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).starts_with("OK "));
}

#[test]
fn check_several_files_in_parallel() {
    let o = gdtt(&[
        "check",
        "--jobs",
        "4",
        &path("positive/streams.gdtt"),
        &path("positive/clocks.gdtt"),
        &path("equalities/later.eq"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert_eq!(
        text(&o.stdout)
            .lines()
            .filter(|l| l.starts_with("OK "))
            .count(),
        3
    );
}

#[test]
fn type_error_exit_and_format() {
    let o = gdtt(&["check", &path("negative/fix_nat.gdtt")]);
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    let line = err.lines().next().unwrap();
    assert!(line.starts_with("ERROR "), "{line}");
    assert!(line.contains("fix_nat.gdtt:"), "{line}");
    assert!(line.contains("[Ty-Fix]"), "{line}");
}

#[test]
fn worst_exit_code_wins() {
    let o = gdtt(&["check", &path("negative/fix_nat.gdtt"), "no/such/file.gdtt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = gdtt(&["check", "no/such/file.gdtt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("[Io]"));
}

#[test]
fn fuel_exhaustion_exit() {
    let dir = std::env::temp_dir().join(format!("gdtt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("comm.eq");
    std::fs::write(
        &f,
        format!(
            "#include \"{}\"\n#clocks k\n\
             zipWith cNat cNat cNat plus twos ones == zipWith cNat cNat cNat plus ones twos : Str cNat\n",
            path("positive/streams.gdtt")
        ),
    )
    .unwrap();
    let o = gdtt(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
    assert!(text(&o.stderr).contains("FuelExhausted"));
    let o = gdtt(&["check", "--fuel", "2", &path("positive/streams.gdtt")]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn trace_lines() {
    let o = gdtt(&["check", "--trace", &path("equalities/later.eq")]);
    assert_eq!(o.status.code(), Some(0));
    let out = text(&o.stdout);
    assert!(out.lines().any(|l| l.starts_with("RULE TmEq-Force AT ")));
}

#[test]
fn eval_streams() {
    let o = gdtt(&[
        "eval",
        &path("positive/streams.gdtt"),
        "--def",
        "ones",
        "--depth",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert_eq!(text(&o.stdout).trim(), "[1,1,1]");
    let o = gdtt(&[
        "eval",
        &path("positive/streams.gdtt"),
        "--def",
        "sums",
        "--depth",
        "3",
    ]);
    assert_eq!(text(&o.stdout).trim(), "[2,2,2]");
}

#[test]
fn eval_unknown_definition() {
    let o = gdtt(&[
        "eval",
        &path("positive/streams.gdtt"),
        "--def",
        "nope",
        "--depth",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fmt_is_idempotent() {
    let o = gdtt(&["fmt", &path("positive/coinductive.gdtt")]);
    assert_eq!(o.status.code(), Some(0));
    let once = text(&o.stdout);
    let dir = std::env::temp_dir().join(format!("gdtt-fmt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("c.gdtt");
    std::fs::write(&f, &once).unwrap();
    let twice = text(&gdtt(&["fmt", f.to_str().unwrap()]).stdout);
    assert_eq!(once, twice);
    std::fs::remove_dir_all(dir).ok();
}
