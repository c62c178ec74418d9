//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails if a criterion fails unexpectedly, or if a criterion listed
//! in `KNOWN_RED` starts passing (so the list cannot go stale).

use std::process::{Command, ExitCode};
use std::time::Instant;

use anaflow::algebra::{lift_a, lift_b, WeightSequence};
use anaflow::expr::{Expression, VectorField};
use anaflow::extension::{radius_at, DEFAULT_RADIUS_ORDER};
use anaflow::flow::{certify, flow_eval, CertifyOptions};
use anaflow::geometry::{CompactBox, Polydisc};
use anaflow::oracle::suites::{
    cauchy_bound_suite, continuity_suite, derivation_bound_suite, flow_accuracy_suite, lifted_weights_suite,
    multiplicativity_suite, picard_lie_suite, truncation_suite, DEFAULT_SEED,
};
use anaflow::oracle::{run_worked_examples, ExperimentReport};
use anaflow::seminorm::holo_supnorm;
use anaflow::timevarying::{StepField, TimeInterval};

/// Criteria that cannot hold as stated; see the decisions ledger.
const KNOWN_RED: &[u32] = &[1];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn tally(r: &ExperimentReport) -> (usize, usize) {
    (r.cases.iter().filter(|c| c.pass).count(), r.cases.len())
}

fn first_failure(r: &ExperimentReport) -> String {
    r.failures()
        .next()
        .map(|c| format!("; first failure: {} (got {:e}, bound {:e})", c.input, c.series, c.bound))
        .unwrap_or_default()
}

fn whole_suite(r: &ExperimentReport, expected: usize) -> Outcome {
    let (ok, n) = tally(r);
    Outcome::new(r.pass && n == expected, format!("{ok}/{n} cases{}", first_failure(r)))
}

// Independent closed forms for the lifted weights of a_m = 2^-m.
fn a_lift(n: usize, m: usize) -> f64 {
    let base = 0.5f64.powi(m as i32);
    if m == 0 {
        return base;
    }
    ((m as f64 + 1.0) / m as f64).powi(n.min(m) as i32) * base
}

fn b_lift(n: usize, m: usize) -> f64 {
    if m < 2 {
        return a_lift(n, m);
    }
    let mf = m as f64;
    (mf + 1.0) * (mf + 2.0) / ((mf - 1.0) * mf) * a_lift(n, m)
}

fn criterion_1() -> Outcome {
    const UPTO: usize = 50;
    const SLACK: f64 = 1e-12;
    let a = WeightSequence::geometric(1.0, 0.5, UPTO + 1).unwrap();
    let e = std::f64::consts::E;
    let mut agree = true;
    let mut holds = [true; 4];
    let mut identity_gap = 0.0f64;
    for n in 0..=UPTO {
        let (an, bn) = (lift_a(&a, n), lift_b(&a, n));
        for m in 0..=UPTO {
            agree &= (an.term(m) - a_lift(n, m)).abs() <= 1e-14 * a_lift(n, m);
            agree &= (bn.term(m) - b_lift(n, m)).abs() <= 1e-14 * b_lift(n, m);
            let am = 0.5f64.powi(m as i32);
            holds[0] &= a_lift(n, m) <= e * am * (1.0 + SLACK);
            holds[2] &= b_lift(n, m) <= 6.0 * e * am * (1.0 + SLACK);
            if n < UPTO && m < UPTO {
                let log_ratio: f64 = (0..=m + 1).map(|j| (a_lift(n + 1, j) / a_lift(n, j)).ln()).sum();
                holds[1] &= ((m as f64 + 1.0) / (n as f64 + 1.0)).ln() <= log_ratio + SLACK;
            }
            if m >= 2 {
                // prod a_(n,j) / (m-2)!  against  prod b_(n,j) / m!
                let log_l: f64 = (0..=m).map(|j| a_lift(n, j).ln()).sum::<f64>() - (2..=m - 2).map(|j| (j as f64).ln()).sum::<f64>();
                let log_r: f64 = (0..=m).map(|j| b_lift(n, j).ln()).sum::<f64>() - (2..=m).map(|j| (j as f64).ln()).sum::<f64>();
                let gap = ((log_l - log_r).exp() - 1.0).abs();
                holds[3] &= gap <= SLACK;
                identity_gap = identity_gap.max(gap);
            }
        }
    }
    let suite = lifted_weights_suite(UPTO);
    let suite_flags: Vec<bool> = suite.cases.iter().map(|c| c.pass).collect();
    let consistent = suite_flags == holds.to_vec();
    Outcome::new(
        agree && consistent && holds.iter().all(|h| *h),
        format!(
            "lifts match closed forms: {agree}; a_n<=e a: {}; ratio bound: {}; b_n<=6e a: {}; product identity: {} (max rel gap {identity_gap:.3e}); library suite agrees: {consistent}",
            holds[0], holds[1], holds[2], holds[3]
        ),
    )
}

fn criterion_2() -> Outcome {
    whole_suite(&derivation_bound_suite(DEFAULT_SEED, 100), 100)
}

fn criterion_3() -> Outcome {
    let suite = cauchy_bound_suite(DEFAULT_SEED, 25);
    // sup of |exp(c z)| over the polydisc of radius d around [-1/2, 1/2] is exp(c (1/2 + d))
    let (c, d) = (1.5f64, 0.75f64);
    let f = Expression::parse("exp(1.5*x1)", 1).unwrap();
    let k = CompactBox::interval(-0.5, 0.5).unwrap().with_grid(9);
    let sup = holo_supnorm(&f, &Polydisc::new(k, d).unwrap(), 0.0).unwrap();
    let exact = (c * (0.5 + d)).exp();
    let sup_ok = sup >= exact * (1.0 - 1e-12);
    let mut o = whole_suite(&suite, 25);
    o.pass &= sup_ok;
    o.detail += &format!("; sup-norm {sup:.6} covers closed form {exact:.6}: {sup_ok}");
    o
}

fn series_point(comp: &str, x0: f64, t: f64) -> f64 {
    let span = TimeInterval::new(0.0, t).unwrap();
    let x = StepField::constant(VectorField::parse(&[comp]).unwrap(), span).unwrap();
    let k = CompactBox::point(&[x0]).unwrap();
    let v = Polydisc::new(k.clone(), 0.5).unwrap();
    let c = certify(&x, span, &k, &v, &Expression::var(1, 0), 1e-16, &CertifyOptions::default()).unwrap();
    flow_eval(&x, 0.0, t, &[x0], &c).unwrap().point[0]
}

fn criterion_4() -> Outcome {
    let quad = series_point("x1^2", 0.5, 0.1);
    let lin = series_point("x1", 1.0, 1.0);
    let dq = (quad - 0.5 / 0.95).abs();
    let dl = (lin - 2.718281828459045).abs();
    let suite = flow_accuracy_suite();
    let rk4: Vec<_> = suite.cases.iter().filter(|c| c.input.starts_with("rk4")).collect();
    let rk4_ok = rk4.len() >= 10 && rk4.iter().all(|c| c.pass);
    Outcome::new(
        dq <= 1e-9 && dl <= 1e-9 && rk4_ok && suite.pass,
        format!(
            "x^2 flow err {dq:.2e}; linear flow err {dl:.2e}; rk4 {}/{} within residual+1e-7{}",
            rk4.iter().filter(|c| c.pass).count(),
            rk4.len(),
            first_failure(&suite)
        ),
    )
}

fn criterion_5() -> Outcome {
    let r = truncation_suite();
    let n = r.cases.len();
    whole_suite(&r, n)
}

fn criterion_6() -> Outcome {
    whole_suite(&multiplicativity_suite(DEFAULT_SEED, 50), 50)
}

fn criterion_7() -> Outcome {
    let r = continuity_suite();
    let slopes: Vec<f64> = r.fitted.iter().filter(|(k, _)| k.ends_with("slope")).map(|(_, v)| *v).collect();
    let ok = slopes.len() == 3 && slopes.iter().all(|s| (0.9..=1.1).contains(s));
    Outcome::new(ok && r.pass, format!("slopes {slopes:.4?}{}", first_failure(&r)))
}

fn criterion_8() -> Outcome {
    let reports = run_worked_examples();
    // radius of 1/(1+n^2 x^2) at the origin is 1/n
    let mut radii_ok = true;
    for n in 1..=8usize {
        let f = Expression::parse(&format!("1/(1+{}*x1^2)", n * n), 1).unwrap();
        let r = radius_at(&f, &[0.0], 0.0, DEFAULT_RADIUS_ORDER).unwrap();
        radii_ok &= (r - 1.0 / n as f64).abs() <= 0.1 / n as f64;
    }
    let exponent = reports
        .iter()
        .flat_map(|r| r.fitted.iter())
        .find(|(k, _)| k == "extent_exponent")
        .map(|(_, v)| *v);
    let exp_ok = exponent.is_some_and(|s| (s + 1.0).abs() <= 0.2);
    let summary: Vec<String> = reports
        .iter()
        .map(|r| {
            let (ok, n) = tally(r);
            format!("{} {ok}/{n}", r.name)
        })
        .collect();
    Outcome::new(
        radii_ok && exp_ok && reports.iter().all(|r| r.pass),
        format!("{}; direct radii within 10%: {radii_ok}; extent exponent {exponent:?}", summary.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    whole_suite(&picard_lie_suite(DEFAULT_SEED, 10), 10)
}

fn verify_once(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    // stdout lists paths under the temp dir, so only the files and exit code are compared
    let status = Command::new(env!("CARGO_BIN_EXE_anaflow"))
        .args(["verify", "--out"])
        .arg(dir)
        .output()
        .expect("run anaflow verify");
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in std::fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.push(("<exit>".into(), status.status.code().unwrap_or(-1).to_string().into_bytes()));
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = verify_once(a.path());
    let second = verify_once(b.path());
    let files = first.len() - 1;
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    Outcome::new(
        first.len() == second.len() && differing.is_empty() && files > 0,
        format!("{files} artifacts compared; differing: {differing:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "lifted weight relations", criterion_1),
        (2, "derivation seminorm bound", criterion_2),
        (3, "Cauchy bound on seminorms", criterion_3),
        (4, "flow accuracy", criterion_4),
        (5, "truncation certificate", criterion_5),
        (6, "multiplicativity of the flow operator", criterion_6),
        (7, "exponential continuity slope", criterion_7),
        (8, "worked examples", criterion_8),
        (9, "Picard iterates equal Lie truncations", criterion_9),
        (10, "verify is byte-identical across runs", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_RED.contains(&id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} [{tag}] {name} ({secs:.1}s): {}", o.detail);
        if o.pass == known || secs > 60.0 {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
