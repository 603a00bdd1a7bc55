use std::process::Command;

fn nhtrack() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nhtrack"))
}

#[test]
fn bench_writes_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let out = nhtrack()
        .args([
            "bench",
            "--trials",
            "2",
            "--horizon",
            "20",
            "--rho-list",
            "0,0.1",
            "--format",
            "md",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let md = std::fs::read_to_string(dir.path().join("summary.md")).unwrap();
    assert!(md.contains("NH") && md.contains("PF"));
}

#[test]
fn simulate_writes_trace_and_tracker_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = nhtrack()
        .args([
            "simulate",
            "--horizon",
            "15",
            "--rho",
            "0.1",
            "--frames",
            "--track",
            "nh,pf",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = std::fs::read_to_string(&path).unwrap();
    let header = trace.lines().next().unwrap();
    assert!(header.starts_with("t,z_t,m_-500,"));
    assert_eq!(header.split(',').count(), 2 + 1001);
    assert_eq!(trace.lines().count(), 16);
    let nh = std::fs::read_to_string(dir.path().join("run_nh.csv")).unwrap();
    assert!(nh.starts_with("t,true_state,estimate,deleted,c_t\n"));
    assert!(dir.path().join("run_pf.csv").exists());
}

#[test]
fn sweep_and_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = nhtrack()
        .args([
            "sweep",
            "--param",
            "sigma-star",
            "--values",
            "100,400",
            "--trials",
            "2",
            "--horizon",
            "20",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("summary.csv").exists());

    let out = nhtrack()
        .args(["bench", "--trackers", "kalman", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = nhtrack()
        .args(["bench", "--rho-list", "1.5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}
