//! The verification suites run by `anaflow verify`. Each returns one
//! report; randomized suites draw from a ChaCha8 stream seeded by `seed`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    exp_continuity_experiment, random_poly, rk4_flow, rk4_self_convergence, run_worked_examples, CaseRow,
    ContinuityOptions, ExperimentReport,
};
use crate::algebra::{lift_a, lift_b, Poly, WeightSequence};
use crate::error::Result;
use crate::expr::{Expression, VectorField};
use crate::flow::{
    certify, flow_eval, lie_truncation_symbolic, observable_coeffs, picard_iterate, CertifyOptions, FlowOperator,
};
use crate::geometry::{CompactBox, Polydisc};
use crate::seminorm::{check_derivation_bound, holo_supnorm, seminorm_function, SeminormConfig};
use crate::timevarying::{StepField, TimeInterval};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Every suite, in a fixed order.
pub fn verify_all(seed: u64) -> Vec<ExperimentReport> {
    let mut out = vec![
        lifted_weights_suite(50),
        derivation_bound_suite(seed, 100),
        cauchy_bound_suite(seed, 25),
        flow_accuracy_suite(),
        rk4_convergence_suite(),
        truncation_suite(),
        multiplicativity_suite(seed, 50),
        continuity_suite(),
    ];
    out.extend(run_worked_examples());
    out.push(picard_lie_suite(seed, 10));
    out
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// The four relations between `a`, `a_n` and `b_n` for geometric `a` with
/// `d = 1`, over `m, n <= upto`; each row is the worst case.
pub fn lifted_weights_suite(upto: usize) -> ExperimentReport {
    let a = WeightSequence::geometric(1.0, 0.5, upto + 1).expect("geometric weights");
    let e = std::f64::consts::E;
    let mut worst = [(f64::NEG_INFINITY, 0, 0); 4];
    let note = |slot: usize, v: f64, n: usize, m: usize, worst: &mut [(f64, usize, usize); 4]| {
        if v > worst[slot].0 {
            worst[slot] = (v, n, m);
        }
    };
    for n in 0..=upto {
        let an = lift_a(&a, n);
        let bn = lift_b(&a, n);
        let an1 = lift_a(&a, n + 1);
        for m in 0..=upto {
            note(0, an.term(m) / (e * a.term(m)), n, m, &mut worst);
            note(2, bn.term(m) / (6.0 * e * a.term(m)), n, m, &mut worst);
            if n < upto && m < upto {
                // (m+1)/(n+1) <= prod_{j<=m+1} a_{n+1,j} / prod_{j<=m+1} a_{n,j}
                let log_ratio: f64 = (0..=m + 1).map(|j| an1.term(j).ln() - an.term(j).ln()).sum();
                let lhs = ((m as f64 + 1.0) / (n as f64 + 1.0)).ln();
                note(1, (lhs - log_ratio).exp(), n, m, &mut worst);
            }
            if m >= 2 {
                let left: f64 = (0..=m).map(|j| an.term(j).ln()).sum::<f64>() - ln_factorial(m - 2);
                let right: f64 = (0..=m).map(|j| bn.term(j).ln()).sum::<f64>() - ln_factorial(m);
                note(3, ((left - right).exp() - 1.0).abs(), n, m, &mut worst);
            }
        }
    }
    let at = |w: (f64, usize, usize)| format!("worst at n={}, m={}", w.1, w.2);
    let rows = vec![
        CaseRow::at_most(format!("a_(n,m) <= e a_m; {}", at(worst[0])), worst[0].0, 1.0, 1e-12),
        CaseRow::at_most(format!("(m+1)/(n+1) <= product ratio; {}", at(worst[1])), worst[1].0, 1.0, 1e-12),
        CaseRow::at_most(format!("b_(n,m) <= 6e a_m; {}", at(worst[2])), worst[2].0, 1.0, 1e-12),
        CaseRow::compare(
            format!("prod a_(n,j)/(m-2)! = prod b_(n,j)/m!; {}", at(worst[3])),
            worst[3].0,
            0.0,
            1e-12,
        ),
    ];
    ExperimentReport::new("lifted_weights", &format!("geometric d=1 ratio=1/2, m,n<={upto}"), rows, vec![])
}

fn symmetric_box(n: usize, r: f64) -> CompactBox {
    let grid = match n {
        1 => 9,
        2 => 5,
        _ => 3,
    };
    CompactBox::symmetric(n, r).expect("box").with_grid(grid)
}

/// `p_{K,a_n}(X̂f) <= 4N(n+1) p_{K,b_n}(X) p_{K,a_{n+1}}(f)` on random
/// polynomial pairs.
pub fn derivation_bound_suite(seed: u64, cases: usize) -> ExperimentReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = WeightSequence::geometric(1.0, 0.5, 64).expect("weights");
    let cfg = SeminormConfig::default();
    let mut rows = Vec::with_capacity(cases);
    for i in 0..cases {
        let dim = rng.gen_range(1..=3);
        let n = rng.gen_range(0..=2);
        let polys: Vec<Poly<f64>> = (0..dim).map(|_| random_poly(&mut rng, dim, 4, 4)).collect();
        let f = random_poly(&mut rng, dim, 4, 4);
        let x = VectorField::from_polys(&polys).expect("field");
        let fe = Expression::from_poly(&f);
        let k = symmetric_box(dim, 1.0);
        let label = format!("case {i}: N={dim} n={n} X={x} f={fe}");
        rows.push(match check_derivation_bound(&x, &fe, &k, &a, n, 0.0, &cfg) {
            Ok(r) => CaseRow::at_most(label, r.lhs, r.rhs, 1e-9),
            Err(e) => CaseRow::failed(format!("{label}: {e}")),
        });
    }
    ExperimentReport::new("derivation_bound", &format!("seed={seed} cases={cases}"), rows, vec![])
}

/// `p_{K,a}(f) <= 1.05 p_V(f)` for `a_m = d 2^{-m}` and `V` of radius `d`.
pub fn cauchy_bound_suite(seed: u64, cases: usize) -> ExperimentReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FFEE);
    let mut rows = Vec::with_capacity(cases);
    for i in 0..cases {
        let c: f64 = (rng.gen_range(1.0..3.0f64) * 100.0).round() / 100.0;
        let (text, dim, d) = match i % 5 {
            // poles at ±i sqrt(c), distance >= 1 from the real box
            0 => (format!("1/({c}+x1^2)"), 1, 0.5),
            1 => (format!("x1/({c}+x1^2+x2^2)"), 2, 0.4),
            2 => (format!("exp({c}*x1)"), 1, 0.75),
            3 => (format!("sin({c}*x1)*cos(x2)"), 2, 0.5),
            _ => (format!("{c}*x1^3 - x1 + 2"), 1, 1.0),
        };
        let f = Expression::parse(&text, dim).expect("valid template");
        let k = symmetric_box(dim, 0.5);
        let label = format!("case {i}: f={text} d={d}");
        let res = (|| -> Result<(f64, f64)> {
            let v = Polydisc::new(k.clone(), d)?;
            let a = WeightSequence::geometric(d, 0.5, 24)?;
            let cfg = SeminormConfig {
                max_order: 24,
                majorant: Some(v.clone()),
            };
            let s = seminorm_function(&f, &k, &a, 0.0, &cfg)?;
            Ok((s.value, holo_supnorm(&f, &v, 0.0)?))
        })();
        rows.push(match res {
            Ok((p, sup)) => CaseRow::at_most(label, p, 1.05 * sup, 0.0),
            Err(e) => CaseRow::failed(format!("{label}: {e}")),
        });
    }
    ExperimentReport::new("cauchy_bound", &format!("seed={seed} cases={cases}"), rows, vec![])
}

struct FlowCase {
    name: &'static str,
    field: StepField,
    x0: Vec<f64>,
    d: f64,
}

fn flow_cases() -> Vec<FlowCase> {
    let c = |name, comps: &[&str], t: f64, x0: &[f64], d: f64| FlowCase {
        name,
        field: StepField::constant(
            VectorField::parse(comps).expect("valid field"),
            TimeInterval::new(0.0, t).expect("interval"),
        )
        .expect("step field"),
        x0: x0.to_vec(),
        d,
    };
    let switched = StepField::new(
        vec![0.0, 0.5, 1.0],
        vec![VectorField::parse(&["x1"]).expect("field"), VectorField::parse(&["0 - x1"]).expect("field")],
    )
    .expect("step field");
    vec![
        c("linear", &["x1"], 1.0, &[1.0], 0.5),
        c("quadratic", &["x1^2"], 0.1, &[0.5], 0.5),
        c("rotation", &["x2", "0 - x1"], 2.0, &[1.0, 0.0], 0.5),
        c("logistic", &["x1*(1 - x1)"], 2.0, &[0.3], 0.4),
        c("sine", &["sin(x1)"], 1.0, &[1.0], 0.5),
        c("rational", &["1/(1 + x1^2)"], 1.0, &[0.2], 0.4),
        c("van der pol", &["x2", "(1 - x1^2)*x2 - x1"], 0.5, &[1.0, 0.0], 0.25),
        c("lotka-volterra", &["x1*(1 - x2)", "x2*(x1 - 1)"], 1.0, &[0.5, 0.5], 0.3),
        c("exp decay", &["exp(0 - x1)"], 1.0, &[0.0], 0.5),
        c("cubic 3d", &["x2", "x3", "0 - x1 - x2^3/10"], 1.0, &[0.5, 0.0, -0.5], 0.3),
        FlowCase {
            name: "switched",
            field: switched,
            x0: vec![1.0],
            d: 0.5,
        },
    ]
}

/// Closed-form checks plus series against RK4 with `10^5` steps.
pub fn flow_accuracy_suite() -> ExperimentReport {
    let mut rows = Vec::new();
    let closed = [
        ("x1^2 from 0.5 to t=0.1", "x1^2", 0.1, 0.5, 0.5 / 0.95),
        ("x1 from 1 to t=1", "x1", 1.0, 1.0, std::f64::consts::E),
    ];
    for (label, comp, t, x0, exact) in closed {
        let res = (|| -> Result<f64> {
            let span = TimeInterval::new(0.0, t)?;
            let x = StepField::constant(VectorField::parse(&[comp])?, span)?;
            let k = CompactBox::point(&[x0])?;
            let v = Polydisc::new(k.clone(), 0.5)?;
            let c = certify(&x, span, &k, &v, &Expression::var(1, 0), 1e-16, &CertifyOptions::default())?;
            Ok(flow_eval(&x, 0.0, t, &[x0], &c)?.point[0])
        })();
        rows.push(match res {
            Ok(v) => CaseRow::compare(label, v, exact, 1e-9),
            Err(e) => CaseRow::failed(format!("{label}: {e}")),
        });
    }
    for case in flow_cases() {
        let span = case.field.span();
        let res = (|| -> Result<(f64, f64, f64)> {
            let k = CompactBox::point(&case.x0)?;
            let v = Polydisc::new(k.clone(), case.d)?;
            let f = Expression::var(case.field.dim(), 0);
            let c = certify(&case.field, span, &k, &v, &f, 1e-14, &CertifyOptions::default())?;
            let p = flow_eval(&case.field, span.start, span.end, &case.x0, &c)?;
            let r = rk4_flow(&case.field, span.start, span.end, &case.x0, 100_000)?;
            let diff = p.point.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok((diff, p.residual_bound, p.point[0]))
        })();
        let label = format!("rk4 {} x0={:?} t={}", case.name, case.x0, span.end);
        rows.push(match res {
            Ok((diff, resid, value)) => {
                let mut row = CaseRow::compare(label, value, value, resid + 1e-7);
                row.oracle = value - diff;
                row.diff = diff;
                row.pass = diff <= row.bound;
                row
            }
            Err(e) => CaseRow::failed(format!("{label}: {e}")),
        });
    }
    ExperimentReport::new("flow_accuracy", "closed forms; 11 rk4 cases, 1e5 steps", rows, vec![])
}

/// Fitted RK4 order on problems with known solutions.
pub fn rk4_convergence_suite() -> ExperimentReport {
    let counts = [8, 16, 32, 64];
    let e = std::f64::consts::E;
    let problems: [(&str, Vec<&str>, f64, Vec<f64>, Vec<f64>); 3] = [
        ("x1", vec!["x1"], 1.0, vec![1.0], vec![e]),
        ("x1^2", vec!["x1^2"], 1.0, vec![0.5], vec![1.0]),
        ("rotation", vec!["x2", "0 - x1"], 1.0, vec![1.0, 0.0], vec![1f64.cos(), -1f64.sin()]),
    ];
    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    for (name, comps, t, x0, exact) in problems {
        let res = VectorField::parse(&comps)
            .and_then(|x| StepField::constant(x, TimeInterval::new(0.0, t)?))
            .and_then(|x| rk4_self_convergence(&x, 0.0, t, &x0, &exact, &counts));
        match res {
            Ok(p) => {
                rows.push(CaseRow::at_most(format!("order >= 3.7 for {name}"), 3.7, p, 0.0));
                fitted.push((format!("order_{name}"), p));
            }
            Err(e) => rows.push(CaseRow::failed(format!("{name}: {e}"))),
        }
    }
    ExperimentReport::new("rk4_convergence", "steps 8,16,32,64", rows, fitted)
}

/// On every certified subinterval, observed time-series terms of the
/// observable against `M^k M_f`, and the observed remainder against the
/// tail bound. Terms are sampled on a grid of each certified box.
pub fn truncation_suite() -> ExperimentReport {
    const EXTRA: usize = 30;
    let mut rows = Vec::new();
    let mut cases: Vec<(String, StepField, CompactBox, f64, Expression)> = flow_cases()
        .into_iter()
        .take(8)
        .map(|c| {
            let f = Expression::var(c.field.dim(), 0);
            (c.name.to_string(), c.field, CompactBox::point(&c.x0).expect("point"), c.d, f)
        })
        .collect();
    let span = TimeInterval::new(0.0, 0.5).expect("interval");
    cases.push((
        "rotation box, f = x1 x2".into(),
        StepField::constant(VectorField::parse(&["x2", "0 - x1"]).expect("field"), span).expect("step"),
        CompactBox::symmetric(2, 0.5).expect("box"),
        0.5,
        Expression::parse("x1*x2", 2).expect("observable"),
    ));
    cases.push((
        "logistic box, f = exp(x1)".into(),
        StepField::constant(VectorField::parse(&["x1*(1 - x1)"]).expect("field"), span).expect("step"),
        CompactBox::interval(0.1, 0.6).expect("box"),
        0.4,
        Expression::parse("exp(x1)", 1).expect("observable"),
    ));
    for (name, x, k, d, f) in cases {
        let res = (|| -> Result<(f64, f64, usize)> {
            let span = x.span();
            let v = Polydisc::new(k.clone(), d)?;
            let c = certify(&x, span, &k, &v, &f, 1e-12, &CertifyOptions::default())?;
            let (mut term_ratio, mut tail_ratio) = (0.0f64, 0.0f64);
            for sub in &c.subintervals {
                let field = &x.pieces()[sub.piece];
                let h = sub.len();
                let grid = sub.domain.clone().with_grid(5).grid_points();
                let mut observed = vec![0.0f64; sub.order + 1];
                let mut tail = 0.0f64;
                for y in &grid {
                    let coeffs = observable_coeffs(field, &f, y, sub.order + EXTRA)?;
                    for (kk, o) in observed.iter_mut().enumerate() {
                        *o = o.max(coeffs[kk].abs() * h.powi(kk as i32));
                    }
                    let rest: f64 = coeffs[sub.order + 1..]
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c.abs() * h.powi((sub.order + 1 + j) as i32))
                        .sum();
                    tail = tail.max(rest);
                }
                for (kk, o) in observed.iter().enumerate() {
                    let bound = sub.big_m.powi(kk as i32) * sub.m_f;
                    if *o > 0.0 {
                        term_ratio = term_ratio.max(o / bound);
                    }
                }
                if tail > 0.0 {
                    tail_ratio = tail_ratio.max(tail / sub.tail_bound);
                }
            }
            Ok((term_ratio, tail_ratio, c.subintervals.len()))
        })();
        match res {
            Ok((tr, tl, n)) => {
                rows.push(CaseRow::at_most(format!("{name}: terms / M^k M_f over {n} subintervals"), tr, 1.0, 0.0));
                rows.push(CaseRow::at_most(format!("{name}: remainder / tail bound"), tl, 1.0, 0.0));
            }
            Err(e) => rows.push(CaseRow::failed(format!("{name}: {e}"))),
        }
    }
    ExperimentReport::new("truncation_certificate", "8 point cases + 2 box cases, target 1e-12", rows, vec![])
}

/// `ζ(fg)` against `ζ(f) ζ(g)` on a grid, within three times the
/// propagated tail bounds.
pub fn multiplicativity_suite(seed: u64, cases: usize) -> ExperimentReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF10E);
    let mut rows = Vec::with_capacity(cases);
    for i in 0..cases {
        let dim = rng.gen_range(1..=2);
        let polys: Vec<Poly<f64>> = (0..dim).map(|_| random_poly(&mut rng, dim, 2, 3)).collect();
        let f = random_poly(&mut rng, dim, 2, 3);
        let g = random_poly(&mut rng, dim, 2, 3);
        let t_end: f64 = rng.gen_range(0.002..0.01);
        let x = VectorField::from_polys(&polys).expect("field");
        let label = format!("case {i}: X={x} f={} g={} t={t_end:.4}", Expression::from_poly(&f), Expression::from_poly(&g));
        let res = (|| -> Result<(f64, f64)> {
            let span = TimeInterval::new(0.0, t_end)?;
            let sf = StepField::constant(x.clone(), span)?;
            let k = symmetric_box(dim, 0.5);
            let v = Polydisc::new(k.clone(), 0.25)?;
            let c = certify(&sf, span, &k, &v, &Expression::from_poly(&f), 1e-8, &CertifyOptions::default())?;
            let op = FlowOperator::from_certificate(&sf, &c, t_end)?;
            let zf = op.apply(&f)?;
            let zg = op.apply(&g)?;
            let zfg = op.apply(&f.mul(&g))?;
            let last = c.subintervals.last().expect("subinterval");
            let reach = Polydisc::new(last.domain.inflate(last.field_sup * last.len()), 0.25)?;
            let pf = holo_supnorm(&Expression::from_poly(&f), &reach, t_end)?;
            let pg = holo_supnorm(&Expression::from_poly(&g), &reach, t_end)?;
            let bound = 3.0
                * (zfg.tail_bound + zf.tail_bound * (pg + zg.tail_bound) + pf * zg.tail_bound);
            let mut worst = 0.0f64;
            for p in k.grid_points() {
                let lhs = zfg.poly.eval(&p) - zf.poly.eval(&p) * zg.poly.eval(&p);
                worst = worst.max(lhs.abs());
            }
            Ok((worst, bound))
        })();
        rows.push(match res {
            Ok((w, b)) => CaseRow::at_most(label, w, b, 0.0),
            Err(e) => CaseRow::failed(format!("{label}: {e}")),
        });
    }
    ExperimentReport::new("multiplicativity", &format!("seed={seed} cases={cases}"), rows, vec![])
}

/// Three `(X, Y)` pairs with `ε in {1e-1, 1e-2, 1e-3}`.
pub fn continuity_suite() -> ExperimentReport {
    let eps = [1e-1, 1e-2, 1e-3];
    let mk = |comps: &[&str], t: TimeInterval| {
        StepField::constant(VectorField::parse(comps).expect("field"), t).expect("step")
    };
    let t1 = TimeInterval::new(0.0, 0.1).expect("interval");
    let t2 = TimeInterval::new(0.0, 0.2).expect("interval");
    let t3 = TimeInterval::new(0.0, 0.5).expect("interval");
    let pairs = vec![
        ("x1 + eps x1", mk(&["x1"], t1), mk(&["x1"], t1), "x1", CompactBox::point(&[1.0]).expect("point"), t1),
        (
            "x1^2 + eps",
            mk(&["x1^2"], t2),
            mk(&["1"], t2),
            "x1",
            CompactBox::interval(0.2, 0.4).expect("box").with_grid(5),
            t2,
        ),
        (
            "rotation + eps (x1 x2, 0)",
            mk(&["x2", "0 - x1"], t3),
            mk(&["x1*x2", "0"], t3),
            "x1^2 + x2",
            CompactBox::point(&[1.0, 0.0]).expect("point"),
            t3,
        ),
    ];
    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    for (name, x, y, f, k, t) in pairs {
        let f = Expression::parse(f, x.dim()).expect("observable");
        match exp_continuity_experiment(&x, &y, &eps, &f, &k, t, &ContinuityOptions::default()) {
            Ok(r) => {
                for mut row in r.cases {
                    row.input = format!("{name}: {}", row.input);
                    rows.push(row);
                }
                for (key, v) in r.fitted {
                    fitted.push((format!("{name}: {key}"), v));
                }
            }
            Err(e) => rows.push(CaseRow::failed(format!("{name}: {e}"))),
        }
    }
    ExperimentReport::new("exp_continuity", "three pairs, eps 1e-1,1e-2,1e-3", rows, fitted)
}

/// Picard iterates of single-piece polynomial fields against the truncated
/// Lie series, compared term by term in exact arithmetic.
pub fn picard_lie_suite(seed: u64, cases: usize) -> ExperimentReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9C4D);
    let mut rows = Vec::with_capacity(cases);
    for i in 0..cases {
        let dim = rng.gen_range(1..=2);
        let k = 1 + i % 6;
        let polys: Vec<Poly<f64>> = (0..dim).map(|_| random_poly(&mut rng, dim, 2, 3)).collect();
        let f = random_poly(&mut rng, dim, 2, 3);
        let x = VectorField::from_polys(&polys).expect("field");
        let label = format!("case {i}: X={x} f={} k={k}", Expression::from_poly(&f));
        let res = (|| -> Result<bool> {
            let span = TimeInterval::new(0.0, 1.0)?;
            let sf = StepField::constant(x.clone(), span)?;
            let picard = picard_iterate(&sf, span, &f, k)?;
            let xq: Vec<_> = polys.iter().map(|p| p.to_rational()).collect::<Result<_>>()?;
            let lie = lie_truncation_symbolic(&xq, &f.to_rational()?, k)?;
            Ok(picard.pieces[0].poly == lie)
        })();
        rows.push(match res {
            Ok(eq) => CaseRow::flag(label, eq),
            Err(e) => CaseRow::failed(format!("{label}: {e}")),
        });
    }
    ExperimentReport::new("picard_lie", &format!("seed={seed} cases={cases}"), rows, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_pass(r: &ExperimentReport) {
        assert!(r.pass, "{}: {:#?}", r.name, r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn product_identity_is_the_only_failure() {
        let r = lifted_weights_suite(50);
        assert!(r.cases[..3].iter().all(|c| c.pass), "{:#?}", r.cases);
        assert!(!r.cases[3].pass);
    }

    #[test]
    fn small_random_suites() {
        assert_pass(&derivation_bound_suite(1, 10));
        assert_pass(&cauchy_bound_suite(1, 10));
        assert_pass(&multiplicativity_suite(1, 5));
        assert_pass(&picard_lie_suite(1, 6));
    }

    #[test]
    fn deterministic() {
        assert_eq!(derivation_bound_suite(7, 5), derivation_bound_suite(7, 5));
    }
}
