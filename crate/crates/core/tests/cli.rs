use std::path::Path;
use std::process::{Command, Output};

fn relaycache(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaycache"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_fully_connected() {
    let out = relaycache(&["solve", "--H", "5", "--K", "5", "--L", "5", "--t", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("optimum 2.000000000"), "{}", stdout(&out));
}

#[test]
fn verify_reports_success() {
    let out = relaycache(&["verify", "--K", "4", "--H", "3", "--t", "1", "--L", "2", "--seed", "3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("all users decoded: true"));
}

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = relaycache(&[
            "sweep-g",
            "--trials",
            "5",
            "--seed",
            "12",
            "--no-timing",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("scheme,sweep_name,sweep_value,trial,seed,objective_message_units,objective_file_units,wallclock_ms")
    );
    // 4 schemes x 5 g values x 5 trials
    assert_eq!(lines.count(), 100);
}

#[test]
fn capacity_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = relaycache(&[
        "sweep-capacity",
        "--H",
        "10",
        "--trials",
        "3",
        "--schemes",
        "lp,mgl",
        "--ce-values",
        "0.5,4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = relaycache::harness::read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert!(rows.iter().all(|r| r.sweep_name == "edge_capacity"));
}

#[test]
fn topology_file_flow() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let p = path.to_str().unwrap();
    assert!(
        relaycache(&["gen-topology", "--H", "4", "--L", "2", "--combination", "--out", p])
            .status
            .success()
    );
    let out = relaycache(&["dynamic", "--topology", p, "--t", "2", "--G", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("G=1 g=20"), "{}", stdout(&out));
    let json = dir.path().join("solve.json");
    let out = relaycache(&["solve", "--topology", p, "--t", "2", "--out", json.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    assert_eq!(doc["groups"].as_array().unwrap().len(), 20);
}

#[test]
fn errors_exit_nonzero() {
    let out = relaycache(&["solve", "--K", "3", "--t", "5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: invalid placement"));

    let out = relaycache(&["solve", "--topology", "/nonexistent/net.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("I/O error"));

    let out = relaycache(&["sweep-g", "--L", "9"]);
    assert!(!out.status.success());
    assert!(!Path::new("9").exists());
}
