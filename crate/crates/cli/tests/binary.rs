//! The `coopscatter` binary: files, exit codes, precedence, reproducibility.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coopscatter"))
}

const SMALL_SWEEP: [&str; 6] = ["--set", "a-min=0.1", "--set", "a-max=0.4", "--set", "a-step=0.05"];

#[test]
fn writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let st = bin()
        .args(["sweep-lattice", "--out"])
        .arg(&out)
        .args(SMALL_SWEEP)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# artifact: coopscatter"));
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.csv.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["command"], "sweep-lattice");
    assert_eq!(side["failures"], 0);
}

#[test]
fn sidecar_reexecutes_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    assert!(bin()
        .args(["sweep-lattice", "--theta", "20", "--pol", "p", "--out"])
        .arg(&first)
        .args(SMALL_SWEEP)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["sweep-lattice", "--config"])
        .arg(dir.path().join("a.csv.json"))
        .arg("--out")
        .arg(&second)
        .status()
        .unwrap()
        .success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn output_is_independent_of_worker_count() {
    let run = |jobs: &str| {
        bin()
            .args(["angle-map", "--set", "n-k=11", "--jobs", jobs])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# saturation run\na = 0.3\nwaist = 2.0\n").unwrap();
    let out = bin()
        .args(["saturation", "--config"])
        .arg(&conf)
        .args(["--a", "0.4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().last().unwrap();
    assert!(row.starts_with("0.4,2.0,"), "{row}");
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["sweep-lattice", "--tol", "-1"],
        vec!["sweep-lattice", "--pol", "q"],
        vec!["sweep-lattice", "--set", "bogus=1"],
        vec!["beam", "--theta", "20", "--pol", "x"],
    ] {
        let st = bin().args(&args).output().unwrap().status;
        assert_eq!(st.code(), Some(2), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.json");
    fs::write(&conf, "{\"a\": [1]}").unwrap();
    let st = bin().args(["saturation", "--config"]).arg(&conf).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn failed_points_exit_three_with_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edge.csv");
    let st = bin()
        .args(["sweep-lattice", "--set", "a-min=0.99", "--set", "a-max=1.01", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.contains(",threshold\n") && csv.contains(",ok\n"));
}
