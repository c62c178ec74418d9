//! Independent reference computations and the experiment drivers that
//! compare the series engine against them.

mod continuity;
mod examples;
mod rk4;
pub mod suites;

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{MultiIndex, Poly};
use crate::serde_util::inf_as_null;

pub use continuity::{exp_continuity_experiment, ContinuityOptions};
pub use examples::run_worked_examples;
pub use rk4::{rk4_flow, rk4_self_convergence, RK4_GUARD};
pub use suites::{verify_all, DEFAULT_SEED};


/// One compared quantity. `pass` is `diff <= bound`; inequality checks
/// `lhs <= rhs` are stored as `series = lhs`, `oracle = rhs`,
/// `diff = max(lhs - rhs, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub input: String,
    #[serde(with = "inf_as_null")]
    pub series: f64,
    #[serde(with = "inf_as_null")]
    pub oracle: f64,
    #[serde(with = "inf_as_null")]
    pub diff: f64,
    #[serde(with = "inf_as_null")]
    pub bound: f64,
    pub pass: bool,
}

impl CaseRow {
    /// `|series - oracle| <= bound`.
    pub fn compare(input: impl Into<String>, series: f64, oracle: f64, bound: f64) -> Self {
        let diff = (series - oracle).abs();
        CaseRow {
            input: input.into(),
            series,
            oracle,
            diff,
            bound,
            pass: diff <= bound,
        }
    }

    /// `lhs <= rhs (1 + rel)`.
    pub fn at_most(input: impl Into<String>, lhs: f64, rhs: f64, rel: f64) -> Self {
        let diff = if lhs <= rhs { 0.0 } else { lhs - rhs };
        let bound = rel * rhs.abs();
        CaseRow {
            input: input.into(),
            series: lhs,
            oracle: rhs,
            diff,
            bound,
            pass: !lhs.is_nan() && !rhs.is_nan() && diff <= bound,
        }
    }

    /// A failure that produced no number (e.g. a certification error).
    pub fn failed(input: impl Into<String>) -> Self {
        CaseRow {
            input: input.into(),
            series: f64::NAN,
            oracle: f64::NAN,
            diff: f64::INFINITY,
            bound: 0.0,
            pass: false,
        }
    }

    pub fn flag(input: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        CaseRow::compare(input, v, 1.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    /// SHA-256 of the canonical description of the inputs.
    pub digest: String,
    pub cases: Vec<CaseRow>,
    pub pass: bool,
    /// Fitted scaling exponents, by name.
    pub fitted: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn new(name: &str, inputs: &str, cases: Vec<CaseRow>, fitted: Vec<(String, f64)>) -> Self {
        let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
        ExperimentReport {
            name: name.to_string(),
            digest: digest(inputs),
            cases,
            pass,
            fitted,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseRow> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("input,series,oracle,diff,bound,pass\n");
        for c in &self.cases {
            let _ = writeln!(
                s,
                "\"{}\",{},{},{},{},{}",
                c.input.replace('"', "'"),
                crate::extension::fmt_csv(c.series),
                crate::extension::fmt_csv(c.oracle),
                crate::extension::fmt_csv(c.diff),
                crate::extension::fmt_csv(c.bound),
                c.pass
            );
        }
        s
    }
}

pub fn digest(text: &str) -> String {
    let h = Sha256::digest(text.as_bytes());
    h.iter().map(|b| format!("{b:02x}")).collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Polynomial in `n` variables of total degree at most `deg` with small
/// integer coefficients and at most `terms` monomials.
pub fn random_poly<R: Rng>(rng: &mut R, n: usize, deg: usize, terms: usize) -> Poly<f64> {
    let mut p = Poly::zero(n);
    for _ in 0..terms {
        let mut e = vec![0u32; n];
        let mut budget = rng.gen_range(0..=deg) as u32;
        for slot in e.iter_mut() {
            let take = rng.gen_range(0..=budget);
            *slot = take;
            budget -= take;
        }
        let c = rng.gen_range(-3i32..=3) as f64;
        p = p.add(&Poly::monomial(MultiIndex::new(e), c));
    }
    if p.is_zero() {
        p = Poly::var(n, rng.gen_range(0..n));
    }
    p
}
