use super::*;

fn rows(values: &[(f64, f64, f64)]) -> Vec<SweepRow> {
    values
        .iter()
        .map(|&(eps, value, stderr)| SweepRow {
            eps,
            value,
            stderr,
            n: 0,
            mode: Mode::Deterministic1d,
            abs_err: None,
            rel_err: None,
        })
        .collect()
}

#[test]
fn judge_converged_and_settled_elsewhere() {
    let r = rows(&[(0.4, 0.6, 0.0), (0.2, 0.8, 0.0), (0.1, 0.9, 0.0), (0.05, 0.97, 0.0)]);
    assert_eq!(judge(&r, Some(1.0), 1.0).0, Verdict::Converged);
    let r = rows(&[(0.4, 0.6, 0.0), (0.2, 0.66, 0.0), (0.1, 0.68, 0.0), (0.05, 0.685, 0.0)]);
    assert_eq!(judge(&r, Some(1.0), 1.0).0, Verdict::DivergedFromTarget);
    let r = rows(&[(0.4, 0.2, 0.0), (0.2, 0.4, 0.0), (0.1, 0.6, 0.0)]);
    assert_eq!(judge(&r, Some(1.0), 1.0).0, Verdict::Inconclusive);
    assert_eq!(judge(&[], Some(1.0), 1.0).0, Verdict::Inconclusive);
}

#[test]
fn judge_errors_must_not_grow() {
    let r = rows(&[(0.4, 0.99, 0.0), (0.2, 1.0, 0.0), (0.1, 1.04, 0.0)]);
    assert_ne!(judge(&r, Some(1.0), 1.0).0, Verdict::Converged);
    // within Monte Carlo noise it may
    let r = rows(&[(0.4, 0.99, 0.02), (0.2, 1.0, 0.02), (0.1, 1.04, 0.02)]);
    assert_eq!(judge(&r, Some(1.0), 1.0).0, Verdict::Converged);
}

#[test]
fn judge_zero_targets_use_the_scale() {
    let r = rows(&[(0.4, 0.3, 0.0), (0.2, 0.1, 0.0), (0.1, 0.04, 0.0)]);
    assert_eq!(judge(&r, Some(0.0), 1.0).0, Verdict::Converged);
    assert_eq!(judge(&r, Some(0.0), 0.1).0, Verdict::Inconclusive);
}

#[test]
fn judge_without_target() {
    let grow = rows(&[(1e-2, 2.0, 0.0), (1e-3, 4.3, 0.0), (1e-4, 6.6, 0.0)]);
    let (v, slope) = judge(&grow, None, 1.0);
    assert_eq!(v, Verdict::Diverged);
    assert!((slope.unwrap() - 2.3 / 10f64.ln()).abs() < 1e-12);
    let flat = rows(&[(1e-2, 4.0, 0.0), (1e-3, 4.3, 0.0), (1e-4, 4.31, 0.0)]);
    assert_eq!(judge(&flat, None, 1.0).0, Verdict::Converged);
    let slow = rows(&[(1e-2, 4.0, 0.0), (1e-3, 4.3, 0.0), (1e-4, 4.6, 0.0)]);
    assert_eq!(judge(&slow, None, 1.0).0, Verdict::Inconclusive);
}

#[test]
fn slope_of_a_line() {
    assert!((ls_slope(&[1.0, 2.0, 3.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-14);
}

#[test]
fn builtin_cases_are_valid_and_distinct() {
    let cases = builtin_suite_with(1, 1000).unwrap();
    assert!(cases.len() >= 12);
    let mut ids: Vec<&str> = cases.iter().map(|c| c.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), cases.len());
    for (i, c) in cases.iter().enumerate() {
        c.validate().unwrap();
        assert_eq!(c.seed, 1 + i as u64);
        assert_eq!(c.compute_target().unwrap(), c.target_value, "{}", c.id);
    }
    let kinds: Vec<TargetKind> = cases.iter().map(|c| c.target_kind).collect();
    for k in [TargetKind::GradLp, TargetKind::BvSeminorm, TargetKind::Zero, TargetKind::Pointwise, TargetKind::Divergent] {
        assert!(kinds.contains(&k), "{k:?}");
    }
}

#[test]
fn case_ids_do_not_depend_on_seed() {
    let a: Vec<String> = builtin_suite_with(1, 10).unwrap().into_iter().map(|c| c.id).collect();
    let b: Vec<String> = builtin_suite_with(99, 10).unwrap().into_iter().map(|c| c.id).collect();
    assert_eq!(a, b);
}

#[test]
fn cases_round_trip_through_json() {
    for c in builtin_suite_with(3, 100).unwrap() {
        let text = serde_json::to_string(&c).unwrap();
        let back: SweepCase = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}

#[test]
fn sweep_report_and_csv() {
    let cases = builtin_suite_with(7, 1000).unwrap();
    let case = cases.iter().find(|c| c.id == "sobolev-1d-stable").unwrap();
    let report = run_sweep(case).unwrap();
    assert_eq!(report.verdict, Verdict::Converged);
    assert!(report.as_expected());
    assert_eq!(report.rows.len(), case.eps_grid.len());
    let last = report.rows.last().unwrap();
    assert!((last.value - 1.98 / 2.04).abs() < 1e-9);
    assert!((last.rel_err.unwrap() - (1.0 - last.value)).abs() < 1e-12);

    let back: SweepReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(back, report);

    let csv = reports_to_csv(std::slice::from_ref(&report));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + case.eps_grid.len());
    assert!(lines[1].starts_with("sobolev-1d-stable,stable,1,2,0.4,"));
    assert!(lines.iter().all(|l| l.split(',').count() == 11));
}

#[test]
fn csv_quotes_commas() {
    assert_eq!(csv_field("a,b"), "\"a,b\"");
    assert_eq!(csv_field("plain"), "plain");
}

#[test]
fn estimator_failures_end_the_sweep() {
    let mut case = builtin_suite_with(1, 1000)
        .unwrap()
        .into_iter()
        .find(|c| c.id == "bv-1d-stable")
        .unwrap();
    // jump fields have infinite energy for p > 1
    case.p = 2.0;
    case.kernel = Some(KernelSpec::stable(1, 2.0, 0.4));
    case.target_kind = TargetKind::Divergent;
    case.target_value = None;
    let report = run_sweep(&case).unwrap();
    assert_eq!(report.verdict, Verdict::Failed);
    assert!(report.error.is_some());
    assert!(report.rows.is_empty());
}

#[test]
fn invalid_cases_are_rejected() {
    let base = builtin_suite_with(1, 1000).unwrap().remove(0);
    let mut c = base.clone();
    c.eps_grid = vec![0.1, 0.2];
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.eps_grid = vec![];
    assert!(c.validate().is_err());
    let mut c = base.clone();
    c.target_value = None;
    assert!(c.validate().is_err());
    let mut c = base;
    c.kernel = Some(KernelSpec::stable(1, 3.0, 0.4));
    assert!(c.validate().is_err());
}

#[test]
fn builtin_suite_behaves_as_expected() {
    let cases = builtin_suite_with(42, 100_000).unwrap();
    let report = run_suite(&cases, 42).unwrap();
    for r in &report.reports {
        assert!(r.as_expected(), "{}: {} (expected {}) {:?}", r.case_id, r.verdict, r.expected, r.error);
    }
    let again = run_suite(&cases, 42).unwrap();
    assert_eq!(again, report);
}
