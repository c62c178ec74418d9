//! Classical fixed-step fourth-order Runge-Kutta, aligned to the breakpoints
//! of a step field.

use crate::error::{Error, Result};
use crate::expr::VectorField;
use crate::timevarying::StepField;

use super::fit_slope;

/// Magnitude past which a trajectory is reported as escaping.
pub const RK4_GUARD: f64 = 1e12;

/// `x(t)` from `x(t0) = x0` with `steps` RK4 steps in total, distributed
/// over the pieces in proportion to their length (at least one each).
pub fn rk4_flow(x: &StepField, t0: f64, t: f64, x0: &[f64], steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::invalid("RK4 needs at least one step"));
    }
    if x0.len() != x.dim() {
        return Err(Error::Mismatch("initial point dimension".into()));
    }
    if t < t0 {
        return Err(Error::invalid("RK4 integrates forward in time"));
    }
    let mut y = x0.to_vec();
    if t == t0 {
        return Ok(y);
    }
    let total = t - t0;
    let mut taken = 0;
    for (piece, seg) in x.segments(t0, t)? {
        let field = &x.pieces()[piece];
        let n = ((steps as f64 * seg.len() / total).round() as usize).max(1);
        let h = seg.len() / n as f64;
        for i in 0..n {
            let s = seg.start + i as f64 * h;
            y = step(field, s, &y, h)?;
            taken += 1;
            if y.iter().any(|v| !(v.abs() <= RK4_GUARD)) {
                return Err(Error::BlowUp {
                    reached: s + h,
                    subintervals: taken,
                    reason: format!("RK4 trajectory exceeded {RK4_GUARD:e}"),
                });
            }
        }
    }
    Ok(y)
}

fn step(x: &VectorField, s: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let shift = |k: &[f64], c: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = x.eval(y, s)?;
    let k2 = x.eval(&shift(&k1, h / 2.0), s + h / 2.0)?;
    let k3 = x.eval(&shift(&k2, h / 2.0), s + h / 2.0)?;
    let k4 = x.eval(&shift(&k3, h), s + h)?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Observed order of convergence against a known solution: slope of
/// `log err` against `log h` over the given step counts.
pub fn rk4_self_convergence(
    x: &StepField,
    t0: f64,
    t: f64,
    x0: &[f64],
    exact: &[f64],
    step_counts: &[usize],
) -> Result<f64> {
    let mut lh = Vec::new();
    let mut le = Vec::new();
    for &n in step_counts {
        let y = rk4_flow(x, t0, t, x0, n)?;
        let err = y.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        lh.push(((t - t0) / n as f64).ln());
        le.push(err.ln());
    }
    fit_slope(&lh, &le).ok_or_else(|| Error::invalid("need at least two step counts"))
}
