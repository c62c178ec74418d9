//! Point flows: compose certified Lie steps along the subintervals and carry
//! a residual bound.
//!
//! The residual after subinterval `j` is `r_{j+1} = r_j exp(L_j h_j) + τ_j`
//! with `τ_j` the coordinate tail of the certificate and `L_j` a Cauchy
//! bound on the Lipschitz constant of the field on the half-radius
//! neighbourhood of the certified box.

use serde::{Deserialize, Serialize};

use super::certify::FlowCertificate;
use super::lie::lie_step_point;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::Polydisc;
use crate::seminorm::holo_supnorm;
use crate::timevarying::StepField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub t: f64,
    pub point: Vec<f64>,
    pub residual_bound: f64,
}

/// Relative slack when checking that a computed point stays in a certified
/// box.
const BOX_SLACK: f64 = 1e-9;

pub fn flow_eval(x: &StepField, t0: f64, t: f64, x0: &[f64], cert: &FlowCertificate) -> Result<FlowPoint> {
    Ok(flow_trajectory(x, t0, &[t], x0, cert)?.pop().expect("one time"))
}

/// Flow from `(t0, x0)` reported at each of the non-decreasing `times`.
pub fn flow_trajectory(
    x: &StepField,
    t0: f64,
    times: &[f64],
    x0: &[f64],
    cert: &FlowCertificate,
) -> Result<Vec<FlowPoint>> {
    cert.check_field(x)?;
    if x0.len() != x.dim() {
        return Err(Error::Mismatch("initial point dimension".into()));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times.first().map_or(false, |t| *t < t0) {
        return Err(Error::invalid("output times must be non-decreasing and not before t0"));
    }
    let last = times.last().copied().unwrap_or(t0);
    if !cert.interval.contains(t0) || !cert.interval.contains(last) {
        return Err(Error::CertificateMismatch(format!(
            "[{t0}, {last}] is not covered by the certified interval [{}, {}]",
            cert.interval.start, cert.interval.end
        )));
    }
    let mut j = cert.locate(t0).ok_or_else(|| Error::CertificateMismatch("no subinterval".into()))?;
    let first_box = if t0 == cert.interval.start {
        &cert.domain
    } else {
        &cert.subintervals[j].domain
    };
    if !inside(first_box, x0, 0.0) {
        return Err(Error::CertificateMismatch(format!("initial point {x0:?} lies outside the certified box")));
    }

    let mut y = x0.to_vec();
    let mut s = t0;
    let mut r = 0.0f64;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while s < target {
            let sub = &cert.subintervals[j];
            let stop = sub.end.min(target);
            let h = stop - s;
            if h > 0.0 {
                if !inside(&sub.domain, &y, r) {
                    return Err(Error::CertificateMismatch(format!(
                        "trajectory left the certified box at t = {s}"
                    )));
                }
                let field = &x.pieces()[sub.piece];
                y = lie_step_point(field, &y, h, sub.order)?;
                r = r * (sub.lipschitz * h).exp() + if sub.big_m > 0.0 { sub.coord_tail } else { 0.0 };
            }
            s = stop;
            if s >= sub.end && j + 1 < cert.subintervals.len() {
                j += 1;
            }
        }
        out.push(FlowPoint {
            t: target,
            point: y.clone(),
            residual_bound: r,
        });
    }
    Ok(out)
}

fn inside(b: &crate::geometry::CompactBox, y: &[f64], r: f64) -> bool {
    y.iter().enumerate().all(|(i, v)| {
        let pad = r + BOX_SLACK * (1.0 + v.abs());
        *v >= b.lo[i] - pad && *v <= b.hi[i] + pad
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableValue {
    pub value: f64,
    pub residual_bound: f64,
}

/// `f(φ(t, x0))` with the point residual pushed through a Cauchy gradient
/// bound of `f` on the certified radius.
pub fn flow_observable(
    x: &StepField,
    t0: f64,
    t: f64,
    x0: &[f64],
    f: &Expression,
    cert: &FlowCertificate,
) -> Result<ObservableValue> {
    let p = flow_eval(x, t0, t, x0, cert)?;
    let value = f.eval_real(&p.point, t)?;
    if p.residual_bound == 0.0 {
        return Ok(ObservableValue {
            value,
            residual_bound: 0.0,
        });
    }
    let d = cert.radius;
    if p.residual_bound >= d / 2.0 {
        return Ok(ObservableValue {
            value,
            residual_bound: f64::INFINITY,
        });
    }
    let v = Polydisc::new(crate::geometry::CompactBox::point(&p.point)?, d)?.with_safety(cert.safety);
    let sup = holo_supnorm(f, &v, t)?;
    Ok(ObservableValue {
        value,
        residual_bound: 2.0 * x.dim() as f64 * sup / d * p.residual_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::VectorField;
    use crate::flow::certify::{certify, CertifyOptions};
    use crate::geometry::CompactBox;
    use crate::timevarying::TimeInterval;

    fn setup(texts: &[&str], t: TimeInterval, k: CompactBox, d: f64, tail: f64) -> (StepField, FlowCertificate) {
        let x = StepField::constant(VectorField::parse(texts).unwrap(), t).unwrap();
        let v = Polydisc::new(k.clone(), d).unwrap();
        let f = Expression::var(texts.len(), 0);
        let c = certify(&x, t, &k, &v, &f, tail, &CertifyOptions::default()).unwrap();
        (x, c)
    }

    #[test]
    fn euler_number() {
        let (x, c) = setup(&["x1"], TimeInterval::new(0.0, 1.0).unwrap(), CompactBox::point(&[1.0]).unwrap(), 0.5, 1e-16);
        let p = flow_eval(&x, 0.0, 1.0, &[1.0], &c).unwrap();
        assert!((p.point[0] - std::f64::consts::E).abs() < 1e-9);
        assert!(p.residual_bound <= 1e-9, "{}", p.residual_bound);
        assert!((p.point[0] - std::f64::consts::E).abs() <= p.residual_bound + 1e-13);
    }

    #[test]
    fn quadratic_closed_form() {
        let (x, c) = setup(&["x1^2"], TimeInterval::new(0.0, 0.1).unwrap(), CompactBox::point(&[0.5]).unwrap(), 0.5, 1e-15);
        let p = flow_eval(&x, 0.0, 0.1, &[0.5], &c).unwrap();
        assert!((p.point[0] - 0.5 / 0.95).abs() < 1e-9);
    }

    #[test]
    fn identity_at_start() {
        let (x, c) = setup(&["x1^2"], TimeInterval::new(0.0, 0.1).unwrap(), CompactBox::point(&[0.5]).unwrap(), 0.5, 1e-15);
        let p = flow_eval(&x, 0.0, 0.0, &[0.5], &c).unwrap();
        assert_eq!(p.point, vec![0.5]);
        assert_eq!(p.residual_bound, 0.0);
    }

    #[test]
    fn mismatch_detected() {
        let t = TimeInterval::new(0.0, 0.1).unwrap();
        let (_, c) = setup(&["x1^2"], t, CompactBox::point(&[0.5]).unwrap(), 0.5, 1e-15);
        let other = StepField::constant(VectorField::parse(&["x1"]).unwrap(), t).unwrap();
        assert!(matches!(flow_eval(&other, 0.0, 0.1, &[0.5], &c), Err(Error::CertificateMismatch(_))));
        let (x, c) = setup(&["x1^2"], t, CompactBox::point(&[0.5]).unwrap(), 0.5, 1e-15);
        assert!(flow_eval(&x, 0.0, 0.1, &[0.7], &c).is_err());
        assert!(flow_eval(&x, 0.0, 0.2, &[0.5], &c).is_err());
    }

    #[test]
    fn rotation_preserves_radius() {
        let t = TimeInterval::new(0.0, 2.0).unwrap();
        let (x, c) = setup(&["x2", "0 - x1"], t, CompactBox::point(&[1.0, 0.0]).unwrap(), 0.5, 1e-15);
        let traj = flow_trajectory(&x, 0.0, &[0.5, 1.0, 2.0], &[1.0, 0.0], &c).unwrap();
        for p in traj {
            assert!((p.point[0] - p.t.cos()).abs() <= p.residual_bound + 1e-12);
            assert!((p.point[1] + p.t.sin()).abs() <= p.residual_bound + 1e-12);
        }
    }

    #[test]
    fn observable_value() {
        let t = TimeInterval::new(0.0, 0.5).unwrap();
        let (x, c) = setup(&["x1"], t, CompactBox::point(&[1.0]).unwrap(), 0.5, 1e-15);
        let f = Expression::parse("x1^2", 1).unwrap();
        let v = flow_observable(&x, 0.0, 0.5, &[1.0], &f, &c).unwrap();
        assert!((v.value - 1f64.exp()).abs() <= v.residual_bound + 1e-12);
    }
}
