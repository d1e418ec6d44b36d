//! End-to-end tests driving the binary through its public surface: file
//! formats, exit codes, and output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_acmtool")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("acmtool-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn gen_and_index_round_trip() {
    let dir = tmpdir("gen-index");
    let out = run(&dir, &["gen", "--kind", "sphere", "--two-s", "20", "--out", "spin"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for label in ["H1", "H2", "H3"] {
        assert!(dir.join(format!("spin_{label}.cmat")).exists());
    }
    let out = run(
        &dir,
        &[
            "index",
            "--formula",
            "bott-spec",
            "--in",
            "spin_H1.cmat",
            "spin_H2.cmat",
            "spin_H3.cmat",
        ],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"value\": 1"), "{text}");
    assert!(text.contains("bott-spec"));
}

#[test]
fn torus_formulas_agree() {
    let dir = tmpdir("torus");
    let out = run(&dir, &["gen", "--kind", "torus", "--n", "16", "--out", "cs"]);
    assert!(out.status.success());
    for formula in ["winding-det", "winding-log", "kappa", "kappa1"] {
        let out = run(
            &dir,
            &["index", "--formula", formula, "--in", "cs_U.cmat", "cs_V.cmat"],
        );
        assert!(out.status.success(), "{formula}");
        assert!(stdout(&out).contains("\"value\": 1"), "{formula}: {}", stdout(&out));
    }
}

#[test]
fn z2_on_doubled_triple() {
    let dir = tmpdir("z2");
    let out = run(&dir, &["gen", "--kind", "selfdual", "--two-s", "12", "--out", "sd"]);
    assert!(out.status.success());
    let out = run(
        &dir,
        &[
            "index",
            "--formula",
            "z2",
            "--in",
            "sd_H1.cmat",
            "sd_H2.cmat",
            "sd_H3.cmat",
        ],
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"value\": -1"));
}

#[test]
fn solve_reports_obstruction_and_success() {
    let dir = tmpdir("solve");
    run(&dir, &["gen", "--kind", "sphere", "--two-s", "16", "--out", "spin"]);
    // non-zero index: solver failure exit code
    let out = run(
        &dir,
        &[
            "solve",
            "--surface",
            "sphere",
            "--in",
            "spin_H1.cmat",
            "spin_H2.cmat",
            "spin_H3.cmat",
            "--out",
            "bad",
        ],
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    // the self-dual double has index zero and solves
    run(&dir, &["gen", "--kind", "selfdual", "--two-s", "16", "--out", "sd"]);
    let out = run(
        &dir,
        &[
            "solve",
            "--surface",
            "sphere",
            "--in",
            "sd_H1.cmat",
            "sd_H2.cmat",
            "sd_H3.cmat",
            "--out",
            "ok",
            "--report",
            "report.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    assert!(report.lines().next().unwrap().starts_with("# acmtool"));
    assert!(report.contains("stage,displacement,defect_before,defect_after"));
    assert!(report.contains("sphere-to-cylinder"));
    let text = stdout(&out);
    assert!(text.contains("output_defect"), "{text}");
}

#[test]
fn exit_codes_for_usage_and_io_and_undefined() {
    let dir = tmpdir("codes");
    // unknown flag: usage error
    let out = run(&dir, &["gen", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown kind: usage error
    let out = run(&dir, &["gen", "--kind", "moebius", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    // missing file: io error
    let out = run(&dir, &["index", "--formula", "bott-spec", "--in", "a.cmat", "b.cmat", "c.cmat"]);
    assert_eq!(out.status.code(), Some(5));
    // malformed file: io error with a line number
    std::fs::write(dir.join("bad.cmat"), "CMAT 1\n1.0+*j\n").unwrap();
    let out = run(&dir, &["index", "--formula", "bott-spec", "--in", "bad.cmat", "bad.cmat", "bad.cmat"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
    // index undefined: bott-trace outside its budget
    run(&dir, &["gen", "--kind", "sphere", "--two-s", "16", "--out", "spin"]);
    let out = run(
        &dir,
        &[
            "index",
            "--formula",
            "bott-trace",
            "--in",
            "spin_H1.cmat",
            "spin_H2.cmat",
            "spin_H3.cmat",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn lattice_outputs_are_deterministic() {
    let dir = tmpdir("lattice");
    let args = [
        "lattice",
        "--sites",
        "360",
        "--latitudes",
        "19",
        "--monopole",
        "12",
        "--fermi",
        "-1.5,-0.5",
        "--out",
    ];
    let out = run(&dir, &[&args[..], &["s1.csv", "--spectrum", "spec1.csv"][..]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&dir, &[&args[..], &["s2.csv", "--spectrum", "spec2.csv"][..]].concat());
    assert!(out.status.success());
    let s1 = std::fs::read(dir.join("s1.csv")).unwrap();
    let s2 = std::fs::read(dir.join("s2.csv")).unwrap();
    assert_eq!(s1, s2, "sweep CSV must be byte identical");
    assert_eq!(
        std::fs::read(dir.join("spec1.csv")).unwrap(),
        std::fs::read(dir.join("spec2.csv")).unwrap()
    );
    let text = String::from_utf8(s1).unwrap();
    assert!(text.starts_with("# acmtool"));
    assert!(text.contains("# config:"));
    assert!(text.contains("fermi,rank,bott,gap,max_comm,sos_min_eig,hall_raw"));
    // spectrum rows: header lines + 360 rows
    let spec = std::fs::read_to_string(dir.join("spec1.csv")).unwrap();
    assert_eq!(spec.lines().filter(|l| !l.starts_with('#')).count(), 361);
}

#[test]
fn lattice_config_file_and_flag_priority() {
    let dir = tmpdir("config");
    std::fs::write(
        dir.join("run.conf"),
        "sites = 360\nlatitudes = 19\nmonopole = 12\nfermi = -0.5\n",
    )
    .unwrap();
    let out = run(
        &dir,
        &["lattice", "--config", "run.conf", "--out", "a.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("a.csv")).unwrap();
    assert!(text.contains("# config: sites=360 latitudes=19 monopole=12"));
    // explicit flag beats the file
    let out = run(
        &dir,
        &["lattice", "--config", "run.conf", "--monopole", "6", "--out", "b.csv"],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.join("b.csv")).unwrap();
    assert!(text.contains("monopole=6"), "{text}");
    // unknown config key is a usage error
    std::fs::write(dir.join("bad.conf"), "wibble = 3\n").unwrap();
    let out = run(&dir, &["lattice", "--config", "bad.conf", "--out", "c.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let dir = tmpdir("selftest");
    let out = run(&dir, &["selftest"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("all selftest checks passed"));
}
