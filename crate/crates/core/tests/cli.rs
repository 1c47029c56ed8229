use std::path::Path;
use std::process::{Command, Output};

fn dsc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn dsc")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

const ONE_CELL: &str = r#"
[mesh]
generator = "box"
cells = [1, 1, 1]
extent = [0.01, 0.01, 0.01]

[initial]
temperature = 300.0

[[patch]]
name = "xmin"
velocity = "no-slip"
thermal = "isothermal"
temperature = 320.0

[[patch]]
name = "rest"
select = { box = { min = [-1.0, -1.0, -1.0], max = [1.0, 1.0, 1.0] } }
velocity = "no-slip"
thermal = "adiabatic"

[time]
tau = 0.01
max_steps = 10

[output]
dir = "out"
period = 1
vtk = true
checkpoint = true
"#;

#[test]
fn mesh_gen_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsc(
        &[
            "mesh", "gen", "box", "--cells", "2", "3", "4", "--extent", "1", "1", "2", "-o", "box.mesh",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("wrote 24 cells"));

    let out = dsc(&["mesh", "check", "box.mesh"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report = text(&out.stdout);
    assert!(report.contains("cells            24"), "{report}");
    assert!(report.contains("total volume     2.000000000000e0"), "{report}");
    assert!(report.contains("patch xmin"), "{report}");
}

#[test]
fn annulus_mesh_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsc(
        &[
            "mesh",
            "gen",
            "annulus",
            "--cells",
            "3",
            "16",
            "1",
            "--r-inner",
            "0.05",
            "--r-outer",
            "0.115",
            "--length",
            "0.02",
            "-o",
            "a.mesh",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let out = dsc(&["mesh", "check", "a.mesh"], dir.path());
    let report = text(&out.stdout);
    assert!(report.contains("cells            48"), "{report}");
    assert!(report.contains("patch inner"), "{report}");
}

#[test]
fn short_run_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), ONE_CELL).unwrap();
    let out = dsc(&["run", "run.toml"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[0].starts_with("step,time"));
    assert!(lines[10].starts_with("10,"));
    assert!(dir.path().join("out/fields_000010.vtk").exists());
    assert!(dir.path().join("out/checkpoint.bin").exists());

    let out = dsc(&["probe", "out/checkpoint.bin", "--cell", "0"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("step 10 "));
}

#[test]
fn missing_patch_tag_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ONE_CELL.replace("name = \"xmin\"", "name = \"heater\"");
    std::fs::write(dir.path().join("run.toml"), cfg).unwrap();
    let out = dsc(&["run", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("heater"), "{}", text(&out.stderr));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ONE_CELL.replace("tau = 0.01", "tau = 0.01\ntaux = 2");
    std::fs::write(dir.path().join("run.toml"), cfg).unwrap();
    let out = dsc(&["run", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("taux"));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dsc(&["mesh", "gen", "box"], dir.path()).status.code(), Some(1));
    assert_eq!(dsc(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(dsc(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn resume_appends_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), ONE_CELL).unwrap();
    let out = dsc(&["run", "run.toml"], dir.path());
    assert!(out.status.success());
    std::fs::copy(dir.path().join("out/checkpoint.bin"), dir.path().join("ten.bin")).unwrap();
    let cfg = ONE_CELL.replace("max_steps = 10", "max_steps = 15");
    std::fs::write(dir.path().join("run.toml"), cfg).unwrap();
    let out = dsc(&["run", "run.toml", "--resume", "ten.bin"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let steps: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(steps.len(), 15);
    assert_eq!(steps.last(), Some(&"15"));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ONE_CELL
        .replace("cells = [1, 1, 1]", "cells = [4, 3, 2]")
        .replace("extent = [0.01, 0.01, 0.01]", "extent = [0.04, 0.03, 0.02]")
        .replace("max_steps = 10", "max_steps = 30")
        .replace("vtk = true", "vtk = false");
    std::fs::write(dir.path().join("run.toml"), &cfg).unwrap();
    let one = dsc(&["--threads", "1", "run", "run.toml"], dir.path());
    assert!(one.status.success(), "{}", text(&one.stderr));
    let a = std::fs::read(dir.path().join("out/diagnostics.csv")).unwrap();
    let four = dsc(&["--threads", "4", "run", "run.toml"], dir.path());
    assert!(four.status.success());
    let b = std::fs::read(dir.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(a, b);
}
