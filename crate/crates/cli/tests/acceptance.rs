//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use implicit_online_cli::checks::{
    check_adaimplicit, check_constant_rate, check_doubling_fixed, check_doubling_lipschitz, check_lower_bound,
    check_protocol, check_prox_oracle, check_recurrence, check_step_properties, check_synthetic_ordering,
    prox_instances,
};
use implicit_online_cli::{CheckOutcome, CheckParams};

fn params() -> CheckParams {
    CheckParams::full()
}

/// Prints the verdict line and fails the test if any outcome failed or the
/// time limit was exceeded.
fn report(n: u32, title: &str, outcomes: &[CheckOutcome], elapsed: Duration, limit: Option<Duration>) {
    let mut passed = outcomes.iter().all(|o| o.passed);
    let mut parts: Vec<String> = outcomes
        .iter()
        .map(|o| format!("{} {} worst slack {:.3e} over {}", if o.passed { "ok" } else { "VIOLATED" }, o.name, o.worst, o.trials))
        .collect();
    if let Some(limit) = limit {
        let in_time = elapsed < limit;
        passed &= in_time;
        parts.push(format!("{:.2}s (limit {}s{})", elapsed.as_secs_f64(), limit.as_secs(), if in_time { "" } else { ", EXCEEDED" }));
    } else {
        parts.push(format!("{:.2}s", elapsed.as_secs_f64()));
    }
    println!("criterion {n} [{title}]: {} | {}", if passed { "PASS" } else { "FAIL" }, parts.join("; "));
    for o in outcomes.iter().filter(|o| !o.passed) {
        println!("    {o}");
    }
    assert!(passed, "criterion {n} [{title}] failed");
}

#[test]
fn criterion_01_prox_matches_oracle() {
    let p = params();
    let start = Instant::now();
    let instances = prox_instances(p.prox_instances, p.seed);
    assert_eq!(instances.len(), 5 * 1000);
    let outcome = check_prox_oracle(&instances).unwrap();
    report(1, "prox vs oracle", &[outcome], start.elapsed(), Some(Duration::from_secs(30)));
}

#[test]
fn criterion_02_step_properties() {
    let p = params();
    let start = Instant::now();
    let instances = prox_instances(p.prox_instances, p.seed);
    let mut outcomes = check_step_properties(&instances, None, p.seed).unwrap();
    outcomes.retain(|o| o.name != "step-delta-bound");
    assert_eq!(outcomes.len(), 5);
    report(2, "implicit step properties", &outcomes, start.elapsed(), None);
}

#[test]
fn criterion_03_per_step_delta_bound() {
    let p = params();
    let start = Instant::now();
    let instances = prox_instances(p.prox_instances, p.seed);
    let mut outcomes = check_step_properties(&instances, None, p.seed).unwrap();
    outcomes.retain(|o| o.name == "step-delta-bound");
    assert_eq!(outcomes.len(), 1);
    report(3, "per-step delta bound", &outcomes, start.elapsed(), None);
}

#[test]
fn criterion_04_adaimplicit_certificate() {
    let start = Instant::now();
    let outcomes = check_adaimplicit(&params()).unwrap();
    report(4, "adaimplicit certificate", &outcomes, start.elapsed(), Some(Duration::from_secs(10)));
}

#[test]
fn criterion_05_constant_rate_bound() {
    let start = Instant::now();
    let outcomes = check_constant_rate(&params()).unwrap();
    report(5, "constant-rate variability bound", &outcomes, start.elapsed(), None);
}

#[test]
fn criterion_06_recurrence_sweep() {
    let p = params();
    assert_eq!(p.recurrence_trials, 10_000);
    let start = Instant::now();
    let outcome = check_recurrence(&p);
    report(6, "recurrence sweep", &[outcome], start.elapsed(), None);
}

#[test]
fn criterion_07_doubling_trick() {
    let p = params();
    let start = Instant::now();
    let mut outcomes = check_doubling_fixed(&p).unwrap();
    outcomes.extend(check_doubling_lipschitz(&p).unwrap());
    report(7, "doubling trick", &outcomes, start.elapsed(), None);
}

#[test]
fn criterion_08_lower_bound_tightness() {
    let start = Instant::now();
    let outcomes = check_lower_bound(&params()).unwrap();
    report(8, "lower-bound tightness", &outcomes, start.elapsed(), None);
}

#[test]
fn criterion_09_synthetic_ordering() {
    let start = Instant::now();
    let outcome = check_synthetic_ordering().unwrap();
    println!("    {}", outcome.detail);
    report(9, "synthetic ordering", &[outcome], start.elapsed(), Some(Duration::from_secs(5)));
}

#[test]
fn criterion_10_sweep_protocol() {
    let p = params();
    assert_eq!((p.grid.lo_exp, p.grid.hi_exp, p.grid.points, p.repeats), (-20, 20, 41, 10));
    let start = Instant::now();
    let outcome = check_protocol(&p).unwrap();
    report(10, "sweep protocol", &[outcome], start.elapsed(), None);
}
