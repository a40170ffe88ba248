use mrigark::harness::*;
use mrigark::integrators::InnerSolverConfig;
use mrigark::problems::ProblemConfig;

fn kpr() -> ProblemConfig {
    ProblemConfig::by_name("kpr").unwrap()
}

#[test]
fn kpr_third_order_slope() {
    let study = ConvergenceStudy::new("SPC-SDIRK3(2)4", kpr(), vec![800, 1600, 3200, 6400]);
    let report = run_convergence(&study, None).unwrap();
    let slope = report.slope.unwrap();
    assert!((2.7..=3.3).contains(&slope), "slope {slope}");
    assert_eq!(report.rows.len(), 4);
    assert!(report.rows.iter().all(|r| r.failure.is_none()));
}

#[test]
fn convergence_errors_are_deterministic() {
    let study = ConvergenceStudy::new("IPC-SDIRK2(1)2", kpr(), vec![50, 100]);
    let a = run_convergence(&study, None).unwrap();
    let b = run_convergence(&study, None).unwrap();
    assert_eq!(a, b);
    let mut x = Vec::new();
    let mut y = Vec::new();
    a.write_csv(&mut x).unwrap();
    b.write_csv(&mut y).unwrap();
    assert_eq!(x, y);
}

#[test]
fn convergence_csv_columns() {
    let study = ConvergenceStudy::new("SPC-SDIRK2(1)2", kpr(), vec![40, 80]);
    let mut buf = Vec::new();
    run_convergence(&study, None).unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,steps,H,error,slope");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("SPC-SDIRK2(1)2,40,0.19634954084936207,"));
}

#[test]
fn invalid_studies_are_rejected() {
    for steps in [vec![0, 10], vec![20, 10], vec![10, 10]] {
        assert!(run_convergence(&ConvergenceStudy::new("SPC-SDIRK2(1)2", kpr(), steps), None).is_err());
    }
    assert!(run_convergence(&ConvergenceStudy::new("NOSUCH", kpr(), vec![10]), None).is_err());
}

#[test]
fn single_rate_baseline_is_accepted() {
    let report = run_convergence(&ConvergenceStudy::new("SDIRK2(1)2", kpr(), vec![400, 800, 1600, 3200]), None).unwrap();
    let slope = report.slope.unwrap();
    assert!((1.75..=2.25).contains(&slope), "slope {slope}");
}

#[test]
fn work_precision_rows_and_columns() {
    let opts = WorkPrecisionOptions { inner: InnerSolverConfig::implicit(5), repetitions: 1, ..Default::default() };
    let schemes = vec!["SPC-SDIRK2(1)2".to_string(), "SDIRK2(1)2".to_string()];
    let runs = run_work_precision(&schemes, &kpr(), &[0.1, 0.05], &opts, None).unwrap();
    assert_eq!(runs.len(), 4);
    assert!(runs.iter().all(|r| r.error.is_some() && r.seconds > 0.0));
    assert!(runs[0].stats.inner_steps > 0);
    assert_eq!(runs[2].stats.inner_steps, 0);
    let mut buf = Vec::new();
    write_work_precision_csv(&runs, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "scheme,H,error,seconds,newton_iters,inner_steps");
    assert_eq!(text.lines().count(), 5);

    let again = run_work_precision(&schemes, &kpr(), &[0.1, 0.05], &opts, None).unwrap();
    for (a, b) in runs.iter().zip(&again) {
        assert_eq!(a.error, b.error);
        assert_eq!(a.stats, b.stats);
    }
}

#[test]
fn empty_step_list_gives_empty_table() {
    let runs = run_work_precision(&["SPC-SDIRK2(1)2".to_string()], &kpr(), &[], &WorkPrecisionOptions::default(), None).unwrap();
    assert!(runs.is_empty());
    let mut buf = Vec::new();
    write_work_precision_csv(&runs, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    assert!(run_work_precision(&["SPC-SDIRK2(1)2".to_string()], &kpr(), &[-0.1], &WorkPrecisionOptions::default(), None).is_err());
}
