//! End-to-end checks of the command-line surface and its exit codes:
//! 0 success, 1 verification failure, 2 config error, 3 runtime error.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_middlegan-lab"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn gradcheck_runs_clean_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gc.cfg");
    write(
        &cfg,
        &format!(
            "[experiment]\nkind = \"gradcheck\"\nseeds = 1\noutput_dir = \"{}\"\n\
             [gradcheck]\narchitectures = 5\n",
            dir.path().join("out").display()
        ),
    );
    let out = bin().args(["gradcheck", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/report.json").exists());
    let report = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    assert!(report.contains("max_rel_error"));
}

#[test]
fn unknown_key_fails_strict_but_passes_no_strict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    write(
        &cfg,
        &format!(
            "[experiment]\nkind = \"gradcheck\"\nseeds = 1\noutput_dir = \"{}\"\n\
             [gradcheck]\narchitectures = 3\nmystery_knob = 9\n",
            dir.path().join("out").display()
        ),
    );
    let strict = bin().args(["gradcheck", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(strict.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&strict.stderr);
    assert!(msg.contains("mystery_knob"), "{msg}");

    let lenient = bin()
        .args(["gradcheck", "--no-strict", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(lenient.status.code(), Some(0), "{}", String::from_utf8_lossy(&lenient.stderr));
}

#[test]
fn unattainable_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    write(
        &cfg,
        &format!(
            "[experiment]\nkind = \"gradcheck\"\nseeds = 1\noutput_dir = \"{}\"\n\
             [gradcheck]\narchitectures = 5\ntolerance = 1e-12\n",
            dir.path().join("out").display()
        ),
    );
    let out = bin().args(["gradcheck", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("verification failed"), "{msg}");
    // report still written for inspection
    assert!(dir.path().join("out/report.json").exists());
}

#[test]
fn subcommand_kind_mismatch_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k.cfg");
    write(
        &cfg,
        "[experiment]\nkind = \"adaptation\"\nseeds = 1\n",
    );
    let out = bin().args(["train", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_override_changes_report_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gc.cfg");
    write(
        &cfg,
        &format!(
            "[experiment]\nkind = \"gradcheck\"\nseeds = 1, 2\noutput_dir = \"{}\"\n\
             [gradcheck]\narchitectures = 3\n",
            dir.path().join("out").display()
        ),
    );
    let out = bin()
        .args(["gradcheck", "--seed", "9,11", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    assert!(report.contains("\n  \"seeds\": [\n    9,\n    11\n  ],"), "{report}");
}

#[test]
fn plot_renders_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    write(
        &csv,
        "x0,x1,label,domain\n0.5,1.5,0,source\n-0.5,0.25,1,source\n1.0,0.0,0,generated\n",
    );
    let out = bin()
        .args(["plot", "--out"])
        .arg(dir.path().join("plots"))
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("plots/scatter.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains(">source<") && svg.contains(">generated<"));
}
