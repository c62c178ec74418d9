//! Convergence certificates: subdivision of the time interval so that every
//! piece has `M(Δ) <= 1/2`, and choice of series order per piece.
//!
//! On a subinterval with box `K_j` and polydisc `V_j` of radius `d` around
//! it, `P_j = max_i p_V(X^i)` and `m_j = max(4N, 1/d) P_j`. The factor `1/d`
//! keeps `m_j` above the Cauchy rate `P_j/d` of the time-Taylor
//! coefficients, so `M^k M_f` also bounds the pointwise series terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expression, VectorField};
use crate::geometry::{CompactBox, Polydisc};
use crate::seminorm::{holo_supnorm, holo_supnorm_field};
use crate::timevarying::{StepField, TimeInterval};

pub const MAX_SERIES_ORDER: usize = 64;
pub const DEFAULT_MAX_SUBINTERVALS: usize = 20_000;
pub const DEFAULT_DOMAIN_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub max_order: usize,
    pub max_subintervals: usize,
    /// Coordinates beyond this modulus are treated as escape to infinity.
    pub domain_limit: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_order: MAX_SERIES_ORDER,
            max_subintervals: DEFAULT_MAX_SUBINTERVALS,
            domain_limit: DEFAULT_DOMAIN_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subinterval {
    pub start: f64,
    pub end: f64,
    pub piece: usize,
    /// Box containing every trajectory at `start`.
    pub domain: CompactBox,
    /// `max_i p_V(X^i)` on the recentred polydisc.
    pub field_sup: f64,
    pub m: f64,
    /// `M(Δ) = m Δ`.
    pub big_m: f64,
    pub order: usize,
    /// `M_f = p_V(f)`.
    pub m_f: f64,
    /// `p_V(X̂f)`.
    pub m_f_tilde: f64,
    /// `M^{n+1}/(1-M) M_f`.
    pub tail_bound: f64,
    /// Same bound for the coordinate displacement (majorant `d`).
    pub coord_tail: f64,
    /// Lipschitz constant of the field on the half-radius neighbourhood.
    pub lipschitz: f64,
}

impl Subinterval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowCertificate {
    pub field: StepField,
    pub interval: TimeInterval,
    pub domain: CompactBox,
    pub radius: f64,
    pub safety: f64,
    pub observable: Expression,
    pub target_tail: f64,
    pub order: usize,
    pub total_tail: f64,
    pub subintervals: Vec<Subinterval>,
}

impl FlowCertificate {
    /// Index of the subinterval containing `t` (last one owns its end).
    pub fn locate(&self, t: f64) -> Option<usize> {
        if !self.interval.contains(t) {
            return None;
        }
        let k = self.subintervals.partition_point(|s| s.end <= t);
        Some(k.min(self.subintervals.len().saturating_sub(1)))
    }

    pub fn check_field(&self, x: &StepField) -> Result<()> {
        if &self.field != x {
            return Err(Error::CertificateMismatch("certificate was issued for a different field".into()));
        }
        Ok(())
    }
}

/// Smallest `n` with `majorant M^{n+1}/(1-M) <= target`.
pub fn choose_order(big_m: f64, majorant: f64, target: f64, max_order: usize) -> Option<usize> {
    (0..=max_order).find(|&n| tail(big_m, n, majorant) <= target)
}

pub fn tail(big_m: f64, n: usize, majorant: f64) -> f64 {
    if big_m == 0.0 || majorant == 0.0 {
        return 0.0;
    }
    big_m.powi(n as i32 + 1) / (1.0 - big_m) * majorant
}

/// Certifies the flow of `x` over `t` starting anywhere in `k`, using
/// polydiscs of radius `v.radius` (first axis) recentred along the way.
pub fn certify(
    x: &StepField,
    t: TimeInterval,
    k: &CompactBox,
    v: &Polydisc,
    f: &Expression,
    target_tail: f64,
    opts: &CertifyOptions,
) -> Result<FlowCertificate> {
    k.validate()?;
    v.validate()?;
    if k.dim() != x.dim() || f.dim() != x.dim() || v.dim() != x.dim() {
        return Err(Error::Mismatch("field, box, polydisc and observable dimensions differ".into()));
    }
    if !(target_tail > 0.0) {
        return Err(Error::invalid("target tail must be positive"));
    }
    if let Some(i) = x.pieces().iter().position(|p| p.depends_on_time()) {
        return Err(Error::invalid(format!(
            "piece {i} depends on t; freeze time with simple_approximate first"
        )));
    }
    let n_dim = x.dim() as f64;
    let d = v.min_radius();
    let c = (4.0 * n_dim).max(1.0 / d);
    let mut domain = k.clone();
    let mut subs: Vec<Subinterval> = Vec::new();

    for (piece, seg) in x.segments(t.start, t.end)? {
        let field = &x.pieces()[piece];
        let mut s = seg.start;
        while s < seg.end {
            if subs.len() >= opts.max_subintervals {
                return Err(Error::BlowUp {
                    reached: s,
                    subintervals: subs.len(),
                    reason: "subdivision count exceeded".into(),
                });
            }
            if domain.max_abs() > opts.domain_limit {
                return Err(Error::BlowUp {
                    reached: s,
                    subintervals: subs.len(),
                    reason: format!("certified box left |x| <= {:e}", opts.domain_limit),
                });
            }
            let vj = Polydisc {
                center: domain.clone(),
                radius: vec![d; x.dim()],
                samples: v.samples,
                safety: v.safety,
            };
            let p = holo_supnorm_field(field, &vj, s).map_err(|e| {
                if subs.is_empty() {
                    shrink_hint(e)
                } else {
                    Error::BlowUp {
                        reached: s,
                        subintervals: subs.len(),
                        reason: format!("recentred polydisc is no longer admissible: {e}"),
                    }
                }
            })?;
            let m = c * p;
            let mut delta = seg.end - s;
            while m * delta > 0.5 {
                delta *= 0.5;
            }
            let mut end = s + delta;
            if seg.end - end <= 1e-12 * seg.end.abs().max(1.0) {
                end = seg.end;
            }
            if end <= s {
                return Err(Error::BlowUp {
                    reached: s,
                    subintervals: subs.len(),
                    reason: "step size underflow".into(),
                });
            }
            let big_m = m * (end - s);
            let m_f = holo_supnorm(f, &vj, s).map_err(shrink_hint)?;
            let xf = field.apply(f)?;
            let m_f_tilde = if xf.is_zero() { 0.0 } else { holo_supnorm(&xf, &vj, s).unwrap_or(f64::INFINITY) };
            let order = choose_order(big_m, m_f.max(d), target_tail, opts.max_order).ok_or(
                Error::TailUnreachable {
                    target: target_tail,
                    max_order: opts.max_order,
                    start: s,
                    end,
                },
            )?;
            let lipschitz = 2.0 * n_dim * p / d;
            let grow = p * (end - s);
            subs.push(Subinterval {
                start: s,
                end,
                piece,
                domain: domain.clone(),
                field_sup: p,
                m,
                big_m,
                order,
                m_f,
                m_f_tilde,
                tail_bound: tail(big_m, order, m_f),
                coord_tail: tail(big_m, order, d),
                lipschitz,
            });
            domain = advance_box(field, &domain, s, end - s, p, lipschitz).unwrap_or_else(|| domain.inflate(grow));
            s = end;
        }
    }
    let order = subs.iter().map(|s| s.order).max().unwrap_or(0);
    let total_tail = subs.iter().map(|s| s.tail_bound).sum();
    Ok(FlowCertificate {
        field: x.clone(),
        interval: t,
        domain: k.clone(),
        radius: d,
        safety: v.safety,
        observable: f.clone(),
        target_tail,
        order,
        total_tail,
        subintervals: subs,
    })
}

/// Samples per axis when bounding the field on the reachable region.
const ADVANCE_GRID: usize = 9;

/// Box containing every trajectory from `domain` after time `h`. Each axis
/// moves by `h` times sampled real bounds of that component over the
/// reachable region `domain ⊕ p h`, widened by the Lipschitz sampling error
/// and clamped to `[-p, p]`. `None` when the field cannot be sampled.
fn advance_box(field: &VectorField, domain: &CompactBox, s: f64, h: f64, p: f64, lipschitz: f64) -> Option<CompactBox> {
    let n = domain.dim();
    let mut g = ADVANCE_GRID;
    while g > 2 && g.pow(n as u32) > crate::geometry::MAX_BOUNDARY_POINTS {
        g -= 1;
    }
    let reach = domain.inflate(p * h).with_grid(g);
    let spacing = (0..n).map(|i| reach.width(i) / (g - 1) as f64).fold(0.0, f64::max);
    let margin = lipschitz * spacing / 2.0;
    let mut lo_v = vec![f64::INFINITY; n];
    let mut hi_v = vec![f64::NEG_INFINITY; n];
    for y in reach.grid_points() {
        let v = field.eval(&y, s).ok()?;
        for i in 0..n {
            lo_v[i] = lo_v[i].min(v[i]);
            hi_v[i] = hi_v[i].max(v[i]);
        }
    }
    let mut next = domain.clone();
    for i in 0..n {
        let lower = (lo_v[i] - margin).max(-p).min(0.0);
        let upper = (hi_v[i] + margin).min(p).max(0.0);
        next.lo[i] += h * lower;
        next.hi[i] += h * upper;
    }
    Some(next)
}

fn shrink_hint(e: Error) -> Error {
    match e {
        Error::NotExtendable { t, reason } => Error::NotExtendable {
            t,
            reason: format!("{reason}; shrink the box or the polydisc radius"),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::VectorField;

    fn step(texts: &[&str], t: TimeInterval) -> StepField {
        StepField::constant(VectorField::parse(texts).unwrap(), t).unwrap()
    }

    #[test]
    fn euler_field_rate() {
        let t = TimeInterval::new(0.0, 1.0).unwrap();
        let x = step(&["x1"], t);
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap().with_safety(1.0);
        let f = Expression::parse("x1", 1).unwrap();
        let c = certify(&x, TimeInterval::new(0.0, 1.0 / 12.0).unwrap(), &k, &v, &f, 1e-12, &Default::default()).unwrap();
        let first = &c.subintervals[0];
        assert!((first.m - 6.0).abs() < 1e-12);
        assert!(first.len() <= 1.0 / 12.0 + 1e-15);
        assert!(first.big_m <= 0.5 + 1e-12);
        let c = certify(&x, t, &k, &v, &f, 1e-12, &Default::default()).unwrap();
        assert!(c.subintervals.iter().all(|s| s.big_m <= 0.5));
        assert!(c.subintervals.iter().all(|s| s.tail_bound <= 1e-12));
        assert_eq!(c.subintervals.last().unwrap().end, 1.0);
    }

    #[test]
    fn zero_field() {
        let t = TimeInterval::new(0.0, 5.0).unwrap();
        let x = step(&["0"], t);
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap();
        let f = Expression::parse("x1", 1).unwrap();
        let c = certify(&x, t, &k, &v, &f, 1e-12, &Default::default()).unwrap();
        assert_eq!(c.subintervals.len(), 1);
        assert_eq!(c.subintervals[0].big_m, 0.0);
        assert_eq!(c.order, 0);
        assert_eq!(c.total_tail, 0.0);
    }

    #[test]
    fn pole_in_polydisc_is_rejected() {
        let t = TimeInterval::new(0.0, 0.1).unwrap();
        let x = step(&["1/(1+x1^2)"], t);
        let k = CompactBox::interval(-0.5, 0.5).unwrap();
        let v = Polydisc::new(k.clone(), 1.5).unwrap();
        let f = Expression::parse("x1", 1).unwrap();
        let err = certify(&x, t, &k, &v, &f, 1e-12, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::NotExtendable { .. }), "{err}");
    }

    #[test]
    fn blow_up_is_flagged() {
        let t = TimeInterval::new(0.0, 3.0).unwrap();
        let x = step(&["x1^2"], t);
        let k = CompactBox::interval(0.5, 0.9).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap();
        let f = Expression::parse("x1", 1).unwrap();
        let opts = CertifyOptions {
            max_subintervals: 2000,
            ..Default::default()
        };
        let err = certify(&x, t, &k, &v, &f, 1e-12, &opts).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }), "{err}");
        let ok = certify(&x, TimeInterval::new(0.0, 0.1).unwrap(), &k, &v, &f, 1e-12, &opts);
        assert!(ok.is_ok());
    }

    #[test]
    fn time_dependent_piece_is_rejected() {
        let t = TimeInterval::new(0.0, 1.0).unwrap();
        let x = step(&["t*x1"], t);
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap();
        let f = Expression::parse("x1", 1).unwrap();
        assert!(certify(&x, t, &k, &v, &f, 1e-12, &Default::default()).is_err());
    }

    #[test]
    fn order_choice() {
        assert_eq!(choose_order(0.0, 1.0, 1e-12, 64), Some(0));
        let n = choose_order(0.5, 1.0, 1e-12, 64).unwrap();
        assert!(tail(0.5, n, 1.0) <= 1e-12 && tail(0.5, n - 1, 1.0) > 1e-12);
        assert_eq!(choose_order(0.5, 1.0, 1e-40, 64), None);
    }
}
