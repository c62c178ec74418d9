//! The three worked examples: a family with shrinking radii of
//! convergence, a time-varying field with no uniform holomorphic extension,
//! and a family whose flows live on shrinking domains.

use super::{fit_slope, CaseRow, ExperimentReport};
use crate::algebra::WeightSequence;
use crate::expr::{Expression, VectorField};
use crate::extension::{domain_estimate, integrability_report, IntegrabilityOptions, Verdict, DEFAULT_RADIUS_ORDER};
use crate::flow::{certify, flow_eval, CertifyOptions};
use crate::geometry::{CompactBox, Polydisc};
use crate::timevarying::{StepField, TimeInterval};

pub fn run_worked_examples() -> Vec<ExperimentReport> {
    vec![shrinking_radii(), no_uniform_extension(), shrinking_flow_domain()]
}

fn rational(n: usize) -> VectorField {
    VectorField::parse(&[&format!("1/(1+{}*x1^2)", n * n)]).expect("valid field")
}

/// `1/(1+n²x²)` has radius `1/n` at the origin.
fn shrinking_radii() -> ExperimentReport {
    let k = CompactBox::interval(-1.0, 1.0).expect("box").with_grid(9);
    let mut rows = Vec::new();
    let (mut ln, mut lr) = (Vec::new(), Vec::new());
    for n in 1..=8usize {
        let exact = 1.0 / n as f64;
        match domain_estimate(&rational(n), &k, &[0.0], DEFAULT_RADIUS_ORDER) {
            Ok(d) => {
                rows.push(CaseRow::compare(format!("n={n}"), d.inf_radius, exact, 0.1 * exact));
                ln.push((n as f64).ln());
                lr.push(d.inf_radius.ln());
            }
            Err(e) => rows.push(CaseRow::failed(format!("n={n}: {e}"))),
        }
    }
    let fitted = fit_slope(&ln, &lr).map(|s| vec![("radius_exponent".to_string(), s)]).unwrap_or_default();
    ExperimentReport::new("example_radius_family", "1/(1+n^2 x1^2), n=1..8, K=[-1,1] grid 9, R=32", rows, fitted)
}

/// `t²/(t²+x²)`: poles at `±it` collapse onto the real axis as `t -> 0`.
fn no_uniform_extension() -> ExperimentReport {
    let x = VectorField::parse(&["t^2/(t^2+x1^2)"]).expect("valid field");
    let k = CompactBox::interval(-0.1, 0.1).expect("box").with_grid(9);
    let times = [0.1, 0.03, 0.01, 0.003, 0.001];
    let mut rows = Vec::new();
    match domain_estimate(&x, &k, &times, DEFAULT_RADIUS_ORDER) {
        Ok(d) => {
            for (t, r) in times.iter().zip(&d.per_time_inf) {
                rows.push(CaseRow::compare(format!("radius at t={t}"), *r, *t, 0.1 * t));
            }
            rows.push(CaseRow::flag("verdict radius_to_zero", d.verdict == Verdict::RadiusToZero));
        }
        Err(e) => rows.push(CaseRow::failed(format!("domain estimate: {e}"))),
    }
    let t = TimeInterval::new(-0.1, 0.1).expect("interval");
    let a = WeightSequence::geometric(0.05, 0.5, 64).expect("weights");
    let opts = IntegrabilityOptions {
        time_points: 21,
        max_order: 8,
    };
    let report = Polydisc::new(k.clone(), 0.05).and_then(|v| integrability_report(&x, t, &k, &a, &v, &opts));
    match report {
        Ok(r) => rows.push(CaseRow::flag("seminorm integral diverges", r.seminorm_integral_diverges)),
        Err(e) => rows.push(CaseRow::failed(format!("integrability: {e}"))),
    }
    ExperimentReport::new(
        "example_no_uniform_extension",
        "t^2/(t^2+x1^2), K=[-0.1,0.1] grid 9, times 0.1..0.001, T=[-0.1,0.1], d=0.05",
        rows,
        vec![],
    )
}

/// Largest `r` such that the flow of `n x² ∂x` is certified from `[0, r]`
/// over `[0, 1]`; `d` and the escape threshold scale like `1/n`.
pub(crate) fn certified_extent(n: usize, iterations: usize) -> Option<f64> {
    let nf = n as f64;
    let x = StepField::constant(
        VectorField::parse(&[&format!("{n}*x1^2")]).ok()?,
        TimeInterval::new(0.0, 1.0).ok()?,
    )
    .ok()?;
    let f = Expression::var(1, 0);
    let opts = CertifyOptions {
        max_subintervals: 2000,
        domain_limit: 10.0 / nf,
        ..Default::default()
    };
    let d = 0.25 / nf;
    let ok = |r: f64| -> bool {
        let k = match CompactBox::interval(0.0, r) {
            Ok(k) => k,
            Err(_) => return false,
        };
        let v = match Polydisc::new(k.clone(), d) {
            Ok(v) => v,
            Err(_) => return false,
        };
        certify(&x, x.span(), &k, &v, &f, 1e-12, &opts).is_ok()
    };
    let (mut lo, mut hi) = (0.0, 2.0 / nf);
    if !ok(lo + 1e-9 / nf) {
        return None;
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// `n x² ∂x` with flow `x/(1 - nxt)`.
fn shrinking_flow_domain() -> ExperimentReport {
    let mut rows = Vec::new();
    for (n, x0, t) in [(1usize, 0.5, 0.1), (3, 0.2, 0.5), (2, -0.4, 0.8), (5, 0.1, 1.0)] {
        let exact = x0 / (1.0 - n as f64 * x0 * t);
        let field = VectorField::parse(&[&format!("{n}*x1^2")]).expect("field");
        let span = TimeInterval::new(0.0, t).expect("interval");
        let res = StepField::constant(field, span).and_then(|x| {
            let k = CompactBox::point(&[x0])?;
            let v = Polydisc::new(k.clone(), 0.1)?;
            let c = certify(&x, span, &k, &v, &Expression::var(1, 0), 1e-15, &CertifyOptions::default())?;
            flow_eval(&x, 0.0, t, &[x0], &c)
        });
        let label = format!("n={n} x0={x0} t={t}");
        match res {
            Ok(p) => rows.push(CaseRow::compare(label, p.point[0], exact, 1e-8)),
            Err(e) => rows.push(CaseRow::failed(format!("{label}: {e}"))),
        }
    }
    let ns = [1usize, 2, 4, 8];
    let mut pts = (Vec::new(), Vec::new());
    for n in ns {
        match certified_extent(n, 14) {
            Some(r) if r > 0.0 => {
                rows.push(CaseRow::at_most(format!("certified extent n={n} inside [0, 1/n)"), r, 1.0 / n as f64, 0.0));
                pts.0.push((n as f64).ln());
                pts.1.push(r.ln());
            }
            _ => rows.push(CaseRow::failed(format!("certified extent n={n}"))),
        }
    }
    let mut fitted = Vec::new();
    if let Some(s) = fit_slope(&pts.0, &pts.1) {
        fitted.push(("extent_exponent".to_string(), s));
        rows.push(CaseRow::compare("fitted exponent of certified extent in n", s, -1.0, 0.2));
    }
    ExperimentReport::new(
        "example_shrinking_flow_domain",
        "n*x1^2 on [0,1]; flows at (1,0.5,0.1),(3,0.2,0.5),(2,-0.4,0.8),(5,0.1,1); extents n=1,2,4,8 with d=0.25/n",
        rows,
        fitted,
    )
}
