use std::path::Path;
use std::process::{Command, Output};

use qaction::report::{Body, Report};

fn qaction(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qaction"));
    cmd.args(args).env_remove("QACTION_FIXTURES");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a report CSV (after the comment lines and the header).
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn solve_harmonic_energies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "potential = \"builtin:harmonic_1d\"\nn_min = 0\nn_max = 3\n");
    let out = qaction(&["solve", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("# qaction-report/1 kind=levels command=solve"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(row[0], n.to_string());
        let e: f64 = row[2].parse().unwrap();
        assert!((e - (n as f64 + 0.5)).abs() < 1e-8, "{row:?}");
        // |delta| column agrees with the two energy columns
        let oracle: f64 = row[3].parse().unwrap();
        let diff: f64 = row[4].parse().unwrap();
        assert_eq!(diff, (e - oracle).abs());
    }
}

#[test]
fn misspelled_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "potential = \"builtin:harmonic_1d\"\nlayercount = 100\n");
    let out = qaction(&["solve", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("layercount"));
}

#[test]
fn bad_flags_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "potential = \"builtin:harmonic_1d\"\n");
    for args in [
        vec!["solve", "--config", &cfg, "--engine", "fast"],
        vec!["solve", "--config", &cfg, "--layers", "0"],
        vec!["solve", "--config", &cfg, "--tol-j", "-1"],
        vec!["solve"],
        vec!["frobnicate"],
    ] {
        assert_eq!(qaction(&args, &[]).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn partial_spectrum_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ws.toml",
        "potential = \"builtin:woods_saxon\"\nparams.V0 = 0.1\nparams.r0 = 1\nn_max = 5\noracle = \"none\"\n",
    );
    let out = qaction(&["solve", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains(",error,"));
}

#[test]
fn scan_actions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "potential = \"builtin:harmonic_1d\"\nscan.energies = [0.5, 1.0, 1.5]\n");
    let out = qaction(&["scan", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# summary monotone.riccati=true"));
    let j: Vec<f64> = csv_rows(&text).iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((j[0] - 1.0).abs() < 1e-8 && (j[2] - 2.0).abs() < 1e-8, "{j:?}");
    assert!(j[1] > 1.0 && j[1] < 2.0);

    let cfg = write_config(dir.path(), "w.toml", "potential = \"builtin:infinite_well\"\n");
    let e = 2.25 * std::f64::consts::PI.powi(2) / 2.0;
    let out = qaction(&["scan", "--config", &cfg, "--energies", &format!("{e:?}"), "--engine", "both"], &[]);
    assert_eq!(out.status.code(), Some(0));
    for row in csv_rows(&stdout(&out)) {
        let j: f64 = row[2].parse().unwrap();
        assert!((j - 1.5).abs() < 1e-9, "{row:?}");
    }
}

#[test]
fn json_round_trip_and_csv_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "potential = \"builtin:coulomb_radial\"\nl = 1\nn_max = 2\n");
    let out = qaction(&["solve", "--config", &cfg, "--format", "json"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let report = Report::from_json(&text).unwrap();
    assert_eq!(Report::from_json(&report.to_json()).unwrap(), report);
    let Body::Levels(rows) = &report.body else { panic!("{text}") };
    assert_eq!(rows.len(), 3);

    let a = qaction(&["solve", "--config", &cfg], &[]).stdout;
    let b = qaction(&["solve", "--config", &cfg], &[]).stdout;
    assert_eq!(a, b);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "potential = \"builtin:harmonic_1d\"\nn_max = 1\n");
    let target = dir.path().join("report.csv");
    let out = qaction(&["solve", "--config", &cfg, "--out", target.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&target).unwrap().contains("E_present"));
}

#[test]
fn wavefunction_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", "potential = \"builtin:harmonic_1d\"\nwavefunction.n = 1\nwavefunction.samples = 101\n");
    let out = qaction(&["wavefunction", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\nx,psi\n"));
    assert!(text.contains("# summary node_count=1"));
    assert_eq!(csv_rows(&text).len(), 101);
}

#[test]
fn compare_langer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "potential = \"builtin:coulomb_radial\"\nl = 2\nn_max = 2\n");
    let out = qaction(&["compare", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0));
    for row in csv_rows(&stdout(&out)) {
        let err_wkb: f64 = row[6].parse().unwrap();
        let err_langer: f64 = row[7].parse().unwrap();
        assert!(err_langer < 1e-10 && err_wkb > 1e-5, "{row:?}");
    }
}

#[test]
fn bench_tables() {
    let out = qaction(&["bench", "table1"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# summary passed=9/9"));
    assert_eq!(text, stdout(&qaction(&["bench", "table1"], &[])));

    let out = qaction(&["bench", "table9"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown table"));
}

#[test]
fn fixture_directory_override() {
    let empty = tempfile::tempdir().unwrap();
    let out = qaction(&["bench", "table1"], &[("QACTION_FIXTURES", empty.path())]);
    assert_eq!(out.status.code(), Some(1));

    // a directory holding only the first three rows of table1
    let dir = tempfile::tempdir().unwrap();
    let bundled = include_str!("../../core/fixtures/reference_tables.csv");
    let subset: Vec<&str> = bundled.lines().take(4).collect();
    std::fs::write(dir.path().join("reference_tables.csv"), subset.join("\n") + "\n").unwrap();
    let out = qaction(&["bench", "table1"], &[("QACTION_FIXTURES", dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# summary passed=3/3"));
    assert_eq!(qaction(&["bench", "table2"], &[("QACTION_FIXTURES", dir.path())]).status.code(), Some(1));
}
