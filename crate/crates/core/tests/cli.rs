use std::fs;
use std::path::Path;
use std::process::Command;

use qbm_core::cli::{parse_config, run};

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path
}

fn qbm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbm"))
}

#[test]
fn free_run_agrees_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "reservoir.alpha = 0\nstate.kind = coherent\nstate.x0 = 1.5\nstate.p0 = -0.5\ngrid.dt = 0.01\ngrid.t_max = 10\nrun.modes = full, oracle\n",
    );
    let summary = run(&parse_config(&cfg).unwrap()).unwrap();
    let diff = summary.diff.expect("diff report");
    assert!(diff.max_deviation() < 1e-7, "{diff}");
    assert!(dir.path().join("out/diff_report.txt").exists());
    assert!(dir.path().join("out/oracle-full/oracle_observables.csv").exists());
}

#[test]
fn energy_is_insensitive_to_rwa() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "reservoir.alpha = 0.1\nreservoir.temperature = 1\nstate.kind = thermal\nstate.nbar = 0.5\ngrid.dt = 0.01\ngrid.t_max = 20\nrun.modes = norenorm, rwa\n",
    );
    let summary = run(&parse_config(&cfg).unwrap()).unwrap();
    let (a, b) = (&summary.series[0], &summary.series[1]);
    for (x, y) in a.energy.iter().zip(&b.energy) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn reruns_are_byte_identical_and_schemas_are_declared() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "reservoir.alpha = 0.05\nstate.kind = squeezed\nstate.r = 0.3\ngrid.dt = 0.02\ngrid.t_max = 4\nrun.modes = full, rwa, oracle\noracle.d = 24\nwigner.enabled = true\nwigner.times = 0, 4\nwigner.points = 21\nwigner.extent = 4\nwigner.z_points = 128\n",
    );
    let config = parse_config(&cfg).unwrap();
    let first = run(&config).unwrap();
    let snapshot: Vec<Vec<u8>> = first.files.iter().map(|f| fs::read(f).unwrap()).collect();
    let second = run(&config).unwrap();
    assert_eq!(first.files, second.files);
    for (f, before) in second.files.iter().zip(&snapshot) {
        assert_eq!(&fs::read(f).unwrap(), before, "{}", f.display());
        if f.extension().is_some_and(|e| e == "csv") {
            assert!(before.starts_with(b"# "), "{}", f.display());
        }
    }
    assert!(dir.path().join("out/full/wigner_t200.csv").exists());
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qbm().arg("--version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("qbm "));

    let bad = write_config(dir.path(), "reservoir.aplha = 0.1\n");
    let out = qbm().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reservoir.alpha"));

    let out = qbm().args(["run", "/nonexistent/run.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Lorentz-Drude diverges at zero lag.
    let div = write_config(
        dir.path(),
        "reservoir.family = lorentz_drude\nreservoir.alpha = 0.1\ngrid.dt = 0.01\ngrid.t_max = 1\nrun.modes = full\n",
    );
    let out = qbm().arg("run").arg(&div).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let leak = write_config(
        dir.path(),
        "reservoir.alpha = 0\nstate.x0 = 4\ngrid.dt = 0.01\ngrid.t_max = 1\nrun.modes = oracle\noracle.d = 12\n",
    );
    let out = qbm().arg("run").arg(&leak).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d >= 22"));
}

#[test]
fn ellipse_and_algebra_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    let out = qbm()
        .args(["ellipse", "--r", "0.1", "--gamma", "0.1", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("ellipse,")).count(), 360);
    assert_eq!(text.lines().filter(|l| l.starts_with("circle,")).count(), 360);

    let out = qbm().args(["ellipse", "--r", "0.5", "--gamma", "0.9"]).current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let report = dir.path().join("algebra_report.txt");
    let out = qbm().args(["algebra", "--d", "30", "--out"]).arg(&report).output().unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with("PASS")));
}
