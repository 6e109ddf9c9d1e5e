use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lagmesh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagmesh"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run lagmesh")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn solve_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = lagmesh(
        dir.path(),
        &[
            "--task",
            "solve",
            "--potential",
            "gaussian",
            "--g",
            "15",
            "--N",
            "10",
            "--h",
            "1.0",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("1 bound state(s)"), "{stdout}");

    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
    let table = rows(&csv);
    assert_eq!(table[0], ["n", "l", "N", "h", "energy"]);
    assert_eq!(table.len(), 2);
    let energy: f64 = table[1][4].parse().unwrap();
    assert!((energy + 5.37859).abs() < 1e-4);
    // 17 significant digits
    let mantissa = table[1][4]
        .trim_start_matches('-')
        .split('e')
        .next()
        .unwrap()
        .replace('.', "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "# Gaussian ground state\ntask.name = solve\npotential.type = gaussian\npotential.g = 15\nmesh.n = 50\nmesh.h = 0.4   # plateau\n",
    );
    let out = lagmesh(dir.path(), &["--config", &cfg, "--h", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("solve.csv")).unwrap();
    let table = rows(&csv);
    assert_eq!(table[1][3].parse::<f64>().unwrap(), 0.5);
    let energy: f64 = table[1][4].parse().unwrap();
    assert!((energy + 5.3775999070682).abs() < 1e-9);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "task.name = scan-h\npotential.type = gaussian\npotential.g = 15\nmesh.n = 10\nscan.h = 0.6:1.2:0.2\nscan.states = 2\n",
    );
    let first = lagmesh(dir.path(), &["--config", &cfg, "--out", "a.csv"]);
    let second = lagmesh(dir.path(), &["--config", &cfg, "--out", "b.csv"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());

    let table = rows(&String::from_utf8(a).unwrap());
    assert_eq!(table[0], ["N", "h", "state", "energy", "bound"]);
    assert_eq!(table.len(), 1 + 4 * 2);
    let at_one = table
        .iter()
        .skip(1)
        .find(|r| r[1].parse::<f64>().unwrap() == 1.0 && r[2] == "0")
        .expect("row with h = 1.0");
    assert!((at_one[3].parse::<f64>().unwrap() + 5.37859).abs() < 1e-4);
    assert!(dir.path().join("a.csv.meta").exists());
}

#[test]
fn table_three_positional_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = lagmesh(dir.path(), &["--task", "table", "3", "--out", "t3.csv"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&fs::read_to_string(dir.path().join("t3.csv")).unwrap());
    assert_eq!(table[0], ["quantity", "column", "value"]);
    assert_eq!(table.len(), 1 + 24);
    let eps = table
        .iter()
        .find(|r| r[0] == "epsilon" && r[1] == "mom (0,0)")
        .unwrap();
    assert!((eps[2].parse::<f64>().unwrap() + 16.340415).abs() < 1e-5);
}

#[test]
fn p_wave_reduced_wavefunction_vanishes_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "task.name = wavefunction\npotential.type = gaussian\npotential.g = 15\nproblem.l = 1\nmesh.n = 30\nmesh.h = 0.5\nwavefunction.space = position\nwavefunction.grid = 0:2:0.5\n",
    );
    let out = lagmesh(dir.path(), &["--config", &cfg, "--out", "w.csv"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&fs::read_to_string(dir.path().join("w.csv")).unwrap());
    assert_eq!(table[0], ["r", "u_r"]);
    assert_eq!(table[1][1].parse::<f64>().unwrap(), 0.0);
    assert!(table[3][1].parse::<f64>().unwrap().abs() > 1e-3);
}

#[test]
fn compare_reports_small_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "task.name = compare\npotential.type = gaussian\npotential.g = 15\nmesh.n = 50\nmesh.h = 0.5\nmesh.n_conf = 100\nmesh.h_conf = 0.4\n",
    );
    let out = lagmesh(dir.path(), &["--config", &cfg, "--out", "c.csv"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&fs::read_to_string(dir.path().join("c.csv")).unwrap());
    assert_eq!(
        table[0],
        [
            "n",
            "quantity",
            "momentum",
            "configuration",
            "abs_delta",
            "rel_delta"
        ]
    );
    let energy = table.iter().find(|r| r[1] == "energy").unwrap();
    assert!(energy[4].parse::<f64>().unwrap() < 1e-10);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &[
            "--task",
            "solve",
            "--potential",
            "gaussian",
            "--g",
            "15",
            "--N",
            "0",
            "--h",
            "1",
        ],
        &["--task", "launch"],
        &["--task", "table", "4"],
        &["--bogus"],
    ];
    for args in cases {
        let out = lagmesh(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }

    let cfg = write_config(dir.path(), "task.name = solve\nmesh.size = 10\n");
    let out = lagmesh(dir.path(), &["--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("[cli]") && err.contains("line 2"), "{err}");

    let cfg = write_config(
        dir.path(),
        "task.name = compare\nkinetics.type = salpeter\npotential.type = gaussian\npotential.a = 3\npotential.b = 1\nmesh.n = 10\nmesh.h = 0.5\n",
    );
    assert_eq!(
        lagmesh(dir.path(), &["--config", &cfg]).status.code(),
        Some(1)
    );
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "task.name = wavefunction\npotential.type = gaussian\npotential.g = 15\nmesh.n = 20\nmesh.h = 0.5\nwavefunction.state = 3\n",
    );
    let out = lagmesh(dir.path(), &["--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("numerical failure"), "{err}");
}
