use std::process::{Command, Output};

fn heunrad(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heunrad")).current_dir(dir).args(args).output().expect("spawn heunrad")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = heunrad(dir.path(), &["kg", "--samples", "5", "--l", "2", "--n", "-1"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert_eq!(stdout.lines().next(), Some("coordinate,re,im,abs"));
    assert_eq!(stdout.lines().count(), 6);
    let stderr = text(&out.stderr);
    assert!(stderr.contains("parameters: kg regular M=5 a=0.1 omega=0.3 l=2 n=-1 lambda=6"));
    assert!(stderr.contains("max err_estimate:"));
}

#[test]
fn errors_are_one_machine_readable_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = heunrad(dir.path(), &["dirac", "--point", "origin", "--range", "0.1:12"]);
    assert!(!out.status.success());
    let stderr = text(&out.stderr);
    assert_eq!(stderr.lines().count(), 1);
    assert!(stderr.starts_with("ERROR OUT_OF_DOMAIN: "), "{stderr}");
    let out = heunrad(dir.path(), &["kg", "--l", "1", "--n", "3"]);
    assert!(text(&out.stderr).starts_with("ERROR ORDER_EXCEEDS_DEGREE: "));
    let out = heunrad(dir.path(), &["kg", "--no-such-flag"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).starts_with("ERROR USAGE: "));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "# horizon run\nbranch = second\nsamples = 7\nrange = 20:50\n").unwrap();
    let out = heunrad(dir.path(), &["dirac", "--config", "run.conf", "--samples", "3", "--out", "d.csv"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("dirac-horizon second"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().starts_with("2.0000000000000000e1,"));
    let out = heunrad(dir.path(), &["dirac", "--config", "missing.conf"]);
    assert!(text(&out.stderr).starts_with("ERROR IO_ERROR: "));
    std::fs::write(dir.path().join("bad.conf"), "colour = blue\n").unwrap();
    let out = heunrad(dir.path(), &["dirac", "--config", "bad.conf"]);
    assert!(text(&out.stderr).starts_with("ERROR CONFIG_ERROR: "), "{}", text(&out.stderr));
}

#[test]
fn presets_write_both_formats_under_a_stem() {
    let dir = tempfile::tempdir().unwrap();
    let out = heunrad(dir.path(), &["fig2", "--out", "plots/f2.csv", "--samples", "50"]);
    assert!(!out.status.success(), "missing directory must be reported");
    assert!(text(&out.stderr).starts_with("ERROR IO_ERROR: "));
    std::fs::create_dir(dir.path().join("plots")).unwrap();
    let out = heunrad(dir.path(), &["fig2", "--out", "plots/f2.csv", "--samples", "50"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(dir.path().join("plots/f2.csv").exists());
    assert!(dir.path().join("plots/f2.svg").exists());
    let stdout = text(&out.stdout);
    assert!(stdout.contains("parameters: dirac-horizon regular M=5 p=10 a=0.1 k=0.2 lambda=0.7 u=0.1:50 samples=50"));
    assert!(stdout.contains("max err_estimate:"));
}

#[test]
fn svg_format_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = heunrad(dir.path(), &["dirac", "--point", "origin", "--samples", "20", "--format", "svg", "--out", "o.svg"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("o.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn verify_runs_a_selected_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = heunrad(dir.path(), &["verify", "--suite", "7"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("PASS 7 angular suite"));
    assert!(stdout.contains("1 of 1 suites passed"));
}
