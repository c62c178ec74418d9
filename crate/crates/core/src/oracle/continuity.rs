//! Sequential continuity of the exponential map, measured: the flow error
//! of `X + εY` against `X` scales linearly in the integrated sup-norm of the
//! perturbation.

use serde::{Deserialize, Serialize};

use super::{fit_slope, CaseRow, ExperimentReport};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::extension::common_majorant;
use crate::flow::{certify, flow_observable, CertifyOptions, FlowCertificate};
use crate::geometry::{CompactBox, Polydisc, DEFAULT_SAFETY};
use crate::seminorm::{holo_supnorm, holo_supnorm_field};
use crate::timevarying::{StepField, TimeInterval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityOptions {
    /// Candidate polydisc radii, tried largest first.
    pub d_grid: Vec<f64>,
    pub target_tail: f64,
    pub safety: f64,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        ContinuityOptions {
            d_grid: vec![0.05, 0.1, 0.25, 0.5],
            target_tail: 1e-15,
            safety: DEFAULT_SAFETY,
        }
    }
}

/// For each `ε`, `Δ(ε) = sup_K |f(φ^{X+εY}(T)) - f(φ^X(T))|` against
/// `I(ε) = ∫ max_i p_V(εY^i)`, with `V` the recentred polydiscs of the
/// certificate for `X`. The bound `Δ <= h I` uses `h = Lip(f) exp(∫ L)`,
/// where `L` is the certified Lipschitz constant of `X` plus that of `εY`.
pub fn exp_continuity_experiment(
    x: &StepField,
    y: &StepField,
    epsilons: &[f64],
    f: &Expression,
    k: &CompactBox,
    t: TimeInterval,
    opts: &ContinuityOptions,
) -> Result<ExperimentReport> {
    let family: Vec<StepField> = std::iter::once(Ok(x.clone()))
        .chain(epsilons.iter().map(|e| x.add_scaled(y, *e)))
        .collect::<Result<_>>()?;
    let cm = common_majorant(&family, k, &opts.d_grid, opts.safety)?;
    let d = cm.d_star.ok_or_else(|| Error::NotExtendable {
        t: cm.failure.as_ref().map_or(t.start, |f| f.t),
        reason: format!(
            "no common polydisc for the perturbed family: {}",
            cm.failure.as_ref().map_or("empty radius grid".into(), |f| f.reason.clone())
        ),
    })?;
    let v = Polydisc::new(k.clone(), d)?.with_safety(opts.safety);
    let copts = CertifyOptions::default();
    let certs: Vec<FlowCertificate> = family
        .iter()
        .map(|xe| certify(xe, t, k, &v, f, opts.target_tail, &copts))
        .collect::<Result<_>>()?;
    let base = &certs[0];
    let n = x.dim() as f64;

    let grid = k.grid_points();
    let values = |xe: &StepField, c: &FlowCertificate| -> Result<Vec<(f64, f64)>> {
        grid.iter()
            .map(|p| flow_observable(xe, t.start, t.end, p, f, c).map(|o| (o.value, o.residual_bound)))
            .collect()
    };
    let v0 = values(x, base)?;

    // Lipschitz constant of f near the final box
    let last = base.subintervals.last().expect("certificate has a subinterval");
    let final_box = last.domain.inflate(last.field_sup * last.len());
    let vf = Polydisc::new(final_box, d)?.with_safety(opts.safety);
    let lip_f = 2.0 * n * holo_supnorm(f, &vf, t.end)? / d;

    let mut rows = Vec::new();
    let mut logs = (Vec::new(), Vec::new());
    for (i, eps) in epsilons.iter().enumerate() {
        let xe = &family[i + 1];
        let ve = values(xe, &certs[i + 1])?;
        let mut delta = 0.0f64;
        let mut resid = 0.0f64;
        for (a, b) in v0.iter().zip(&ve) {
            delta = delta.max((a.0 - b.0).abs());
            resid = resid.max(a.1 + b.1);
        }
        let mut integral = 0.0;
        let mut lip = 0.0;
        for sub in &base.subintervals {
            let vj = Polydisc {
                center: sub.domain.clone(),
                radius: vec![d; x.dim()],
                samples: v.samples,
                safety: v.safety,
            };
            let mid = 0.5 * (sub.start + sub.end);
            let pert = y.field_at(mid)?.scale(*eps);
            let p = holo_supnorm_field(&pert, &vj, mid)?;
            integral += p * sub.len();
            lip += (sub.lipschitz + 2.0 * n * p / d) * sub.len();
        }
        let h = lip_f * lip.exp();
        let mut row = CaseRow::at_most(format!("eps={eps:e}"), delta, h * integral + resid, 0.0);
        row.oracle = integral;
        row.bound = h * integral + resid;
        row.diff = delta;
        // the Lipschitz bounds hold within half the radius of the certified boxes
        row.pass = delta <= row.bound && delta < d / 2.0;
        rows.push(row);
        if delta > 0.0 && integral > 0.0 {
            logs.0.push(integral.ln());
            logs.1.push(delta.ln());
        }
    }
    let mut fitted = Vec::new();
    if logs.0.len() >= 2 {
        let s = fit_slope(&logs.0, &logs.1).unwrap_or(f64::NAN);
        fitted.push(("slope".to_string(), s));
        rows.push(CaseRow::compare("fitted slope of log Δ against log I", s, 1.0, 0.1));
    }
    let inputs = format!(
        "X={x:?};Y={y:?};eps={epsilons:?};f={f};K={k:?};T={t:?};opts={opts:?}"
    );
    Ok(ExperimentReport::new("exp_continuity", &inputs, rows, fitted))
}
