use std::process::{Command, Output};

fn mrigark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrigark")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const METHODS: [&str; 10] = [
    "SPC-SDIRK2(1)2",
    "SPC-ESDIRK2(1)3",
    "SPC-SDIRK3(2)4",
    "SPC-ESDIRK3(2)4",
    "SPC-SDIRK4(3)5",
    "SPC-ESDIRK4(3)6",
    "IPC-SDIRK2(1)2",
    "IPC-ESDIRK2(1)3",
    "IPC-SDIRK3(2)5",
    "IPC-SDIRK4(3)6",
];

#[test]
fn no_arguments_prints_usage() {
    let o = mrigark(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["frobnicate"],
        vec!["verify"],
        vec!["verify", "--all", "--method", "SPC-SDIRK2(1)2"],
        vec!["verify", "--method", "NOSUCH"],
        vec!["converge", "--method", "SPC-SDIRK2(1)2", "--problem", "nosuch", "--steps", "10"],
        vec!["converge", "--method", "SPC-SDIRK2(1)2", "--problem", "kpr", "--steps", "20,10"],
        vec!["stability", "--method", "SPC-SDIRK2(1)2", "--alpha", "120"],
        vec!["stability", "--method", "SPC-SDIRK2(1)2", "--window", "-1,0,1"],
    ] {
        assert_eq!(mrigark(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_all_lists_each_method_once() {
    let o = mrigark(&["verify", "--all"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for m in METHODS {
        assert_eq!(text.lines().filter(|l| l.split_whitespace().next() == Some(m)).count(), 1, "{m}");
    }
    assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), METHODS.len());

    let o = mrigark(&["verify", "--all", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(names, METHODS);
    assert!(v.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn verify_reads_exported_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let o = mrigark(&["export-methods", "--method", "IPC-SDIRK3(2)5", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = mrigark(&["verify", "--file", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));

    // Perturb one coupling coefficient; the verdict must flip.
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let g = &mut doc["gamma"][0][1][0];
    let v: f64 = g.as_str().map(|s| s.parse().unwrap()).unwrap_or_else(|| g.as_f64().unwrap());
    *g = serde_json::json!(v + 0.1);
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = mrigark(&["verify", "--file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "verification failed");
}

#[test]
fn export_all_round_trips() {
    let o = mrigark(&["export-methods"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), METHODS.len());
}

#[test]
fn converge_reports_third_order_slope() {
    let o = mrigark(&["converge", "--method", "SPC-SDIRK3(2)4", "--problem", "kpr", "--steps", "800,1600,3200,6400", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((2.7..=3.3).contains(&slope), "slope {slope}");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn converge_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = mrigark(&["converge", "--method", "IPC-SDIRK2(1)2", "--problem", "kpr", "--steps", "40,80,160", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(p).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert_eq!(a.lines().next().unwrap(), "scheme,steps,H,error,slope");
    assert_eq!(a.lines().count(), 4);
}

#[test]
fn work_precision_columns() {
    let o = mrigark(&["work-precision", "--methods", "SPC-SDIRK2(1)2,SDIRK2(1)2", "--problem", "kpr", "--h", "0.1,0.05", "--repetitions", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,H,error,seconds,newton_iters,inner_steps");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("SPC-SDIRK2(1)2,0.1,"));
}

#[test]
fn stability_writes_region_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("region.csv");
    let args = ["stability", "--method", "IPC-SDIRK2(1)2", "--kind", "scalar", "--rho", "inf", "--alpha", "30", "--window", "-4,0,-2,2", "--res", "5", "--out", p.to_str().unwrap()];
    assert_eq!(mrigark(&args).status.code(), Some(0));
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().next().unwrap(), "re,im,inside");
    assert_eq!(text.lines().count(), 26);
    assert!(text.lines().any(|l| l == "0.0,0.0,1"));

    let o = mrigark(&["stability", "--method", "IPC-SDIRK2(1)2", "--kind", "matrix", "--rho", "10", "--res", "3,2", "--radial", "4", "--angular", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn integrate_writes_trajectory_and_summary() {
    let o = mrigark(&["integrate", "--method", "SPC-SDIRK2(1)2", "--problem", "kpr", "--steps", "10", "--all-states"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t,y1,y2");
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().nth(1).unwrap().starts_with("0.0,2.0,1.7320508075688772"));

    let o = mrigark(&["integrate", "--method", "IPC-SDIRK2(1)2", "--problem", "inverter-chain", "--params", r#"{"m": 10, "t_end": 1.0}"#, "--steps", "10", "--inner", "implicit", "--substeps", "5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["steps"], 10);
    assert_eq!(v["stats"]["inner_steps"].as_u64().unwrap(), 5 * v["stats"]["inner_solves"].as_u64().unwrap());
}

#[test]
fn computation_failure_reports_json() {
    // Two macro steps drive the fast component negative, where its square root is undefined.
    let o = mrigark(&["integrate", "--method", "SPC-SDIRK2(1)2", "--problem", "kpr", "--steps", "2", "--inner", "fixed", "--substeps", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["command"], "integrate");
    assert!(err["error"].as_str().unwrap().contains("non-positive state"));
}
