//! Analytic seminorms `p_{K,a}`, holomorphic sup-norms over polydiscs and
//! the derivation inequality relating them.
//!
//! `p_{K,a}(f) = sup { a_0 ... a_|r| / |r|! * |D^(r) f(x)| : x in K, r }`,
//! sampled on the grid of `K` and truncated at order `R`. Beyond `R` a
//! Cauchy estimate on a supplied polydisc bounds the remaining orders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{lift_a, lift_b, MultiIndex, WeightSequence};
use crate::error::{Error, Result};
use crate::expr::{Expression, VectorField};
use crate::geometry::{CompactBox, Polydisc};

pub const DEFAULT_MAX_ORDER: usize = 16;

/// Shrink factors of the interior sweeps used to catch poles that the
/// boundary samples alone would miss.
const INTERIOR_FRACTIONS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.9];
/// An interior value this much above the boundary maximum contradicts the
/// maximum-modulus principle.
const INTERIOR_TOLERANCE: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormConfig {
    pub max_order: usize,
    /// Polydisc on which a holomorphic bound certifies orders beyond the
    /// horizon.
    pub majorant: Option<Polydisc>,
}

impl Default for SeminormConfig {
    fn default() -> Self {
        SeminormConfig {
            max_order: DEFAULT_MAX_ORDER,
            majorant: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AchievedAt {
    pub order: usize,
    pub multi_index: MultiIndex,
    pub point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    /// Reported value: the computed sup, raised to the tail bound when that
    /// is larger and rigorous.
    pub value: f64,
    pub computed_sup: f64,
    pub achieved_at: Option<AchievedAt>,
    pub tail_bound: Option<f64>,
    pub rigorous: bool,
    /// Largest weighted derivative per order `0..=R`.
    pub order_trend: Vec<f64>,
}

impl SeminormValue {
    fn zero(orders: usize) -> Self {
        SeminormValue {
            value: 0.0,
            computed_sup: 0.0,
            achieved_at: None,
            tail_bound: Some(0.0),
            rigorous: true,
            order_trend: vec![0.0; orders],
        }
    }

    /// Whether the order trend is still growing at the horizon. Orders are
    /// compared in pairs so that even/odd coefficient patterns do not mask
    /// growth.
    pub fn trend_increasing(&self) -> bool {
        let tr = &self.order_trend;
        let n = tr.len();
        if n < 4 {
            return false;
        }
        tr[n - 2].max(tr[n - 1]) > tr[n - 4].max(tr[n - 3])
    }
}

/// `p_{K,a}(f)` at time `t`.
pub fn seminorm_function(
    f: &Expression,
    k: &CompactBox,
    a: &WeightSequence,
    t: f64,
    cfg: &SeminormConfig,
) -> Result<SeminormValue> {
    k.validate()?;
    if f.dim() != k.dim() {
        return Err(Error::Mismatch(format!(
            "expression dimension {} differs from box dimension {}",
            f.dim(),
            k.dim()
        )));
    }
    let horizon = cfg.max_order.min(a.max_order);
    if f.is_zero() {
        return Ok(SeminormValue::zero(horizon + 1));
    }
    // Polynomials have no derivatives past their degree, so the sup is exact.
    let exact_degree = f.to_poly(t).map(|p| p.degree()).filter(|d| *d <= horizon);
    let degree = exact_degree.unwrap_or(horizon);
    let weights = a.weights(degree);
    let points = k.grid_points();

    let per_point: Vec<Result<(f64, usize, Vec<f64>)>> = points
        .par_iter()
        .map(|x| {
            let jet = f.jet_at(x, t, degree)?;
            let layout = jet.layout();
            let mut best = (f64::NEG_INFINITY, 0usize);
            let mut trend = vec![0.0f64; degree + 1];
            for (pos, (r, c)) in layout.indices().iter().zip(jet.coeffs()).enumerate() {
                let ord = r.order();
                let v = weights[ord] * r.factorial() * c.abs();
                if v > best.0 {
                    best = (v, pos);
                }
                trend[ord] = trend[ord].max(v);
            }
            Ok((best.0, best.1, trend))
        })
        .collect();

    let mut computed = f64::NEG_INFINITY;
    let mut at = None;
    let mut trend = vec![0.0f64; degree + 1];
    for (x, res) in points.iter().zip(per_point) {
        let (v, pos, tr) = res?;
        for (acc, v) in trend.iter_mut().zip(tr) {
            *acc = acc.max(v);
        }
        if v > computed {
            computed = v;
            let r = crate::algebra::layout(k.dim(), degree).indices()[pos].clone();
            at = Some(AchievedAt {
                order: r.order(),
                multi_index: r,
                point: x.clone(),
                component: None,
            });
        }
    }
    trend.resize(horizon + 1, 0.0);

    let (tail, rigorous) = if exact_degree.is_some() {
        (Some(0.0), true)
    } else if let Some(v) = &cfg.majorant {
        match cauchy_tail(f, k, a, horizon, v, t) {
            Ok(tail) if tail.is_finite() => (Some(tail), true),
            _ => (None, false),
        }
    } else {
        (None, false)
    };
    let value = match (rigorous, tail) {
        (true, Some(tl)) => computed.max(tl),
        _ => computed,
    };
    Ok(SeminormValue {
        value,
        computed_sup: computed,
        achieved_at: at,
        tail_bound: tail,
        rigorous,
        order_trend: trend,
    })
}

/// Bound on the weighted derivatives of order above `horizon` from a
/// holomorphic sup-norm on `v`: Cauchy gives `|D^(r) f| <= (r)! p_V / d^|r|`,
/// and `(r)! <= |r|!`, so order `k` contributes at most
/// `p_V a_0 Π_{1<=j<=k} (a_j / d)`.
fn cauchy_tail(
    f: &Expression,
    k: &CompactBox,
    a: &WeightSequence,
    horizon: usize,
    v: &Polydisc,
    t: f64,
) -> Result<f64> {
    if !v.center.contains_box(k) {
        return Err(Error::invalid("majorant polydisc is not centred on a superset of K"));
    }
    let d = v.min_radius();
    if a.term(0) > d * (1.0 + 1e-12) {
        return Err(Error::invalid("weights exceed the majorant radius"));
    }
    let p = holo_supnorm(f, v, t)?;
    Ok(p * a.term(0) * geometric_tail(a, d, horizon))
}

/// `Σ_{k > horizon} Π_{1<=j<=k} (a_j / d)`, infinite if it fails to settle.
pub(crate) fn geometric_tail(a: &WeightSequence, d: f64, horizon: usize) -> f64 {
    let mut log_prod = 0.0;
    for j in 1..=horizon {
        log_prod += (a.term(j) / d).ln();
    }
    let mut sum = 0.0;
    for k in horizon + 1..horizon + 100_000 {
        log_prod += (a.term(k) / d).ln();
        let term = log_prod.exp();
        sum += term;
        if term <= 1e-17 * sum || term < 1e-300 {
            return sum;
        }
    }
    f64::INFINITY
}

/// `max_i p_{K,a}(X^i)`.
pub fn seminorm_field(
    x: &VectorField,
    k: &CompactBox,
    a: &WeightSequence,
    t: f64,
    cfg: &SeminormConfig,
) -> Result<SeminormValue> {
    let mut out: Option<SeminormValue> = None;
    for (i, c) in x.components.iter().enumerate() {
        let mut s = seminorm_function(c, k, a, t, cfg)?;
        if let Some(at) = s.achieved_at.as_mut() {
            at.component = Some(i);
        }
        out = Some(match out {
            None => s,
            Some(prev) => {
                let trend = prev
                    .order_trend
                    .iter()
                    .zip(&s.order_trend)
                    .map(|(p, q)| p.max(*q))
                    .collect();
                let tail = match (prev.tail_bound, s.tail_bound) {
                    (Some(p), Some(q)) => Some(p.max(q)),
                    _ => None,
                };
                let rigorous = prev.rigorous && s.rigorous;
                let mut best = if s.value > prev.value { s } else { prev };
                best.order_trend = trend;
                best.tail_bound = tail;
                best.rigorous = rigorous;
                best
            }
        });
    }
    out.ok_or_else(|| Error::invalid("empty vector field"))
}

/// `p_{K,a,f}(X) = p_{K,a}(X̂f)`; both notations denote this one quantity.
pub fn seminorm_operator(
    x: &VectorField,
    f: &Expression,
    k: &CompactBox,
    a: &WeightSequence,
    t: f64,
    cfg: &SeminormConfig,
) -> Result<SeminormValue> {
    seminorm_function(&x.apply(f)?, k, a, t, cfg)
}

/// `sup |f|` over the polydisc neighbourhood `v`, from boundary samples
/// (maximum modulus) times the safety factor. Interior sweeps reject
/// neighbourhoods that contain a singularity.
pub fn holo_supnorm(f: &Expression, v: &Polydisc, t: f64) -> Result<f64> {
    v.validate()?;
    if f.dim() != v.dim() {
        return Err(Error::Mismatch("expression and polydisc dimensions differ".into()));
    }
    let not_ext = |reason: String| Error::NotExtendable { t, reason };
    let sweep = |frac: f64| -> Result<f64> {
        let vals: Vec<Result<f64>> = v
            .boundary_points(frac)
            .par_iter()
            .map(|z| f.eval_complex(z, t).map(|w| w.norm()))
            .collect();
        let mut m = 0.0f64;
        for r in vals {
            match r {
                Ok(x) if x.is_finite() => m = m.max(x),
                Ok(_) => return Err(not_ext(format!("`{f}` is unbounded near the polydisc"))),
                Err(e) => return Err(not_ext(format!("`{f}`: {e}"))),
            }
        }
        Ok(m)
    };
    let boundary = sweep(1.0)?;
    // polynomials are entire; only other expressions can hide a pole
    let interior: &[f64] = if f.to_poly(t).is_some() { &[] } else { &INTERIOR_FRACTIONS };
    for &frac in interior {
        let inner = sweep(frac)?;
        if inner > boundary * INTERIOR_TOLERANCE + 1e-300 {
            return Err(not_ext(format!(
                "`{f}` exceeds its boundary maximum inside the polydisc (singularity at radius < {})",
                v.min_radius()
            )));
        }
    }
    Ok(boundary * v.safety)
}

/// `max_i p_V(X^i)`.
pub fn holo_supnorm_field(x: &VectorField, v: &Polydisc, t: f64) -> Result<f64> {
    let mut m = 0.0f64;
    for c in &x.components {
        if c.is_zero() {
            continue;
        }
        m = m.max(holo_supnorm(c, v, t)?);
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivationBoundReport {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `p_{K,a_n}(X̂f)` with
/// `4N(n+1) max_i p_{K,b_n}(X^i) p_{K,a_{n+1}}(f)`.
pub fn check_derivation_bound(
    x: &VectorField,
    f: &Expression,
    k: &CompactBox,
    a: &WeightSequence,
    n: usize,
    t: f64,
    cfg: &SeminormConfig,
) -> Result<DerivationBoundReport> {
    let an = lift_a(a, n);
    let bn = lift_b(a, n);
    let an1 = lift_a(a, n + 1);
    let lhs = seminorm_operator(x, f, k, &an, t, cfg)?.value;
    let px = seminorm_field(x, k, &bn, t, cfg)?.value;
    let pf = seminorm_function(f, k, &an1, t, cfg)?.value;
    let rhs = 4.0 * x.dim as f64 * (n as f64 + 1.0) * px * pf;
    Ok(DerivationBoundReport {
        n,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}
