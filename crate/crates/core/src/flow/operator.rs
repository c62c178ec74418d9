//! The flow as an operator on polynomial observables: `ζ(t) f = f ∘ φ(t)`,
//! composed from per-subinterval Lie-series pullbacks, last step first.

use serde::{Deserialize, Serialize};

use super::certify::{tail, FlowCertificate};
use super::lie::lie_series_poly;
use crate::algebra::Poly;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::Polydisc;
use crate::seminorm::holo_supnorm;
use crate::timevarying::StepField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorStep {
    pub start: f64,
    pub end: f64,
    pub field: Vec<String>,
    pub order: usize,
    pub big_m: f64,
    pub polydisc: Polydisc,
    #[serde(skip)]
    polys: Vec<Poly<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOperator {
    pub t0: f64,
    pub t: f64,
    pub steps: Vec<OperatorStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorImage {
    pub poly: Poly<f64>,
    /// Sum over steps of `M^{n+1}/(1-M)` times the sup-norm of the
    /// observable entering that step.
    pub tail_bound: f64,
}

impl FlowOperator {
    pub fn from_certificate(x: &StepField, cert: &FlowCertificate, t: f64) -> Result<Self> {
        cert.check_field(x)?;
        let t0 = cert.interval.start;
        if !cert.interval.contains(t) {
            return Err(Error::CertificateMismatch(format!("t = {t} is not certified")));
        }
        let mut steps = Vec::new();
        for sub in &cert.subintervals {
            if sub.start >= t {
                break;
            }
            let end = sub.end.min(t);
            let field = &x.pieces()[sub.piece];
            let polys = field
                .to_polys(0.0)
                .ok_or_else(|| Error::invalid("operator composition needs polynomial pieces"))?;
            steps.push(OperatorStep {
                start: sub.start,
                end,
                field: field.components.iter().map(|c| c.to_string()).collect(),
                order: sub.order,
                big_m: sub.m * (end - sub.start),
                polydisc: Polydisc {
                    center: sub.domain.clone(),
                    radius: vec![cert.radius; x.dim()],
                    samples: crate::geometry::DEFAULT_BOUNDARY_SAMPLES,
                    safety: cert.safety,
                },
                polys,
            });
        }
        Ok(FlowOperator { t0, t, steps })
    }

    /// `ζ(t)` at `t = t0`.
    pub fn identity(t0: f64) -> Self {
        FlowOperator {
            t0,
            t: t0,
            steps: Vec::new(),
        }
    }

    pub fn apply(&self, f: &Poly<f64>) -> Result<OperatorImage> {
        let mut g = f.clone();
        let mut tail_bound = 0.0;
        for step in self.steps.iter().rev() {
            if step.big_m > 0.0 {
                let sup = holo_supnorm(&Expression::from_poly(&g), &step.polydisc, step.start)?;
                tail_bound += tail(step.big_m, step.order, sup);
            }
            g = lie_series_poly(&step.polys, &g, &(step.end - step.start), step.order)?;
        }
        Ok(OperatorImage { poly: g, tail_bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::VectorField;
    use crate::flow::certify::{certify, CertifyOptions};
    use crate::geometry::CompactBox;
    use crate::timevarying::TimeInterval;

    #[test]
    fn identity_leaves_observable() {
        let f = Poly::var(2, 1);
        assert_eq!(FlowOperator::identity(0.0).apply(&f).unwrap().poly, f);
    }

    #[test]
    fn composition_matches_closed_form() {
        let t = TimeInterval::new(0.0, 0.2).unwrap();
        let x = StepField::new(
            vec![0.0, 0.1, 0.2],
            vec![VectorField::parse(&["x1"]).unwrap(), VectorField::parse(&["2*x1"]).unwrap()],
        )
        .unwrap();
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap();
        let f = Expression::var(1, 0);
        let cert = certify(&x, t, &k, &v, &f, 1e-14, &CertifyOptions::default()).unwrap();
        let op = FlowOperator::from_certificate(&x, &cert, 0.2).unwrap();
        let img = op.apply(&Poly::var(1, 0)).unwrap();
        let c = img.poly.coeff(&crate::algebra::MultiIndex::new(vec![1]));
        assert!((c - 0.3f64.exp()).abs() <= img.tail_bound + 1e-14);
    }
}
