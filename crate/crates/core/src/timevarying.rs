//! Time-varying fields as simple functions of time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::VectorField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() || start > end {
            return Err(Error::invalid(format!("invalid time interval [{start}, {end}]")));
        }
        Ok(TimeInterval { start, end })
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreezeRule {
    #[default]
    Midpoint,
    Left,
}

/// Piecewise-constant curve in field space: piece `i` is active on
/// `[breakpoints[i], breakpoints[i+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepField", into = "RawStepField")]
pub struct StepField {
    dim: usize,
    breakpoints: Vec<f64>,
    pieces: Vec<VectorField>,
}

#[derive(Serialize, Deserialize)]
struct RawPiece {
    components: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawStepField {
    n: usize,
    breakpoints: Vec<f64>,
    pieces: Vec<RawPiece>,
}

impl TryFrom<RawStepField> for StepField {
    type Error = Error;

    fn try_from(raw: RawStepField) -> Result<Self> {
        let pieces = raw
            .pieces
            .iter()
            .map(|p| {
                if p.components.len() != raw.n {
                    return Err(Error::invalid(format!(
                        "piece has {} components, expected {}",
                        p.components.len(),
                        raw.n
                    )));
                }
                let texts: Vec<&str> = p.components.iter().map(String::as_str).collect();
                VectorField::parse(&texts)
            })
            .collect::<Result<Vec<_>>>()?;
        StepField::new(raw.breakpoints, pieces)
    }
}

impl From<StepField> for RawStepField {
    fn from(s: StepField) -> Self {
        RawStepField {
            n: s.dim,
            breakpoints: s.breakpoints,
            pieces: s
                .pieces
                .iter()
                .map(|p| RawPiece {
                    components: p.components.iter().map(|c| c.to_string()).collect(),
                })
                .collect(),
        }
    }
}

impl StepField {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<VectorField>) -> Result<Self> {
        if pieces.is_empty() || breakpoints.len() != pieces.len() + 1 {
            return Err(Error::invalid(format!(
                "{} breakpoints cannot delimit {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breakpoints must be finite and strictly increasing"));
        }
        let dim = pieces[0].dim;
        if pieces.iter().any(|p| p.dim != dim) {
            return Err(Error::Mismatch("pieces have different dimensions".into()));
        }
        Ok(StepField {
            dim,
            breakpoints,
            pieces,
        })
    }

    /// One field on the whole interval.
    pub fn constant(x: VectorField, t: TimeInterval) -> Result<Self> {
        let end = if t.is_empty() { t.start + 1.0 } else { t.end };
        StepField::new(vec![t.start, end], vec![x])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[VectorField] {
        &self.pieces
    }

    pub fn span(&self) -> TimeInterval {
        TimeInterval {
            start: self.breakpoints[0],
            end: *self.breakpoints.last().expect("nonempty"),
        }
    }

    /// Index of the piece active at `t` (right-continuous, the last piece
    /// owns its right endpoint).
    pub fn piece_index(&self, t: f64) -> Result<usize> {
        let span = self.span();
        if !span.contains(t) {
            return Err(Error::invalid(format!(
                "time {t} outside the step field span [{}, {}]",
                span.start, span.end
            )));
        }
        let k = self.breakpoints.partition_point(|b| *b <= t);
        Ok(k.saturating_sub(1).min(self.pieces.len() - 1))
    }

    pub fn field_at(&self, t: f64) -> Result<&VectorField> {
        Ok(&self.pieces[self.piece_index(t)?])
    }

    /// `(piece, sub-interval)` pairs covering `[t0, t1]`, in time order.
    pub fn segments(&self, t0: f64, t1: f64) -> Result<Vec<(usize, TimeInterval)>> {
        TimeInterval::new(t0, t1)?;
        let span = self.span();
        if t0 < span.start || t1 > span.end {
            return Err(Error::invalid(format!(
                "[{t0}, {t1}] is not inside the step field span [{}, {}]",
                span.start, span.end
            )));
        }
        let mut out = Vec::new();
        for (i, w) in self.breakpoints.windows(2).enumerate() {
            let lo = w[0].max(t0);
            let hi = w[1].min(t1);
            if lo < hi {
                out.push((i, TimeInterval { start: lo, end: hi }));
            }
        }
        Ok(out)
    }

    /// `self + c·other` on the union of both breakpoint sets.
    pub fn add_scaled(&self, other: &StepField, c: f64) -> Result<StepField> {
        if self.span() != other.span() {
            return Err(Error::Mismatch("step fields cover different spans".into()));
        }
        let mut bps: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let pieces = bps
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.field_at(mid)?.add_scaled(other.field_at(mid)?, c)
            })
            .collect::<Result<Vec<_>>>()?;
        StepField::new(bps, pieces)
    }

    pub fn is_autonomous(&self) -> bool {
        !self.pieces.iter().any(VectorField::depends_on_time)
    }
}

/// Anything that yields a vector field at each time.
pub trait TimeVarying: Sync {
    fn dim(&self) -> usize;
    /// Field active at `t`; time-dependent components keep `t` symbolic.
    fn field_at_time(&self, t: f64) -> Result<VectorField>;
}

impl TimeVarying for VectorField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn field_at_time(&self, _t: f64) -> Result<VectorField> {
        Ok(self.clone())
    }
}

impl TimeVarying for StepField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn field_at_time(&self, t: f64) -> Result<VectorField> {
        self.field_at(t).cloned()
    }
}

/// Freezes `t` in a time-dependent field on each of `pieces` equal
/// sub-intervals of `t`.
pub fn simple_approximate(x: &VectorField, t: TimeInterval, pieces: usize, rule: FreezeRule) -> Result<StepField> {
    if pieces == 0 {
        return Err(Error::invalid("need at least one piece"));
    }
    if t.is_empty() {
        return Err(Error::invalid("cannot subdivide an empty interval"));
    }
    let h = t.len() / pieces as f64;
    let bps: Vec<f64> = (0..=pieces)
        .map(|i| if i == pieces { t.end } else { t.start + h * i as f64 })
        .collect();
    let fields = bps
        .windows(2)
        .map(|w| {
            let s = match rule {
                FreezeRule::Midpoint => 0.5 * (w[0] + w[1]),
                FreezeRule::Left => w[0],
            };
            let frozen = x.freeze_time(s);
            // surface domain errors in t now rather than during a flow
            for c in &frozen.components {
                if let Some(bad) = constant_time_subterm_error(c, s) {
                    return Err(bad);
                }
            }
            Ok(frozen)
        })
        .collect::<Result<Vec<_>>>()?;
    StepField::new(bps, fields)
}

fn constant_time_subterm_error(c: &crate::expr::Expression, t: f64) -> Option<Error> {
    if c.ast().max_var().is_none() {
        return c.eval_real(&vec![0.0; c.dim()], t).err();
    }
    None
}

/// Trapezoid integral of samples `values` at the increasing times `times`.
pub fn integrate_curve(times: &[f64], values: &[f64]) -> Result<f64> {
    Ok(*cumulative_trapezoid(times, values)?.last().unwrap_or(&0.0))
}

/// Running trapezoid integral; element `i` covers `[times[0], times[i]]`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::invalid("time grid and samples must be nonempty and of equal length"));
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("time grid must be non-decreasing"));
    }
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(times.len());
    out.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Exact integral of a step function given by piece values on `breakpoints`.
pub fn integrate_steps(breakpoints: &[f64], values: &[f64]) -> Result<f64> {
    if breakpoints.len() != values.len() + 1 {
        return Err(Error::invalid("step values must number one less than breakpoints"));
    }
    Ok(breakpoints
        .windows(2)
        .zip(values)
        .map(|(w, v)| v * (w[1] - w[0]))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tx() -> VectorField {
        VectorField::parse(&["t*x1"]).unwrap()
    }

    #[test]
    fn midpoint_freezing() {
        let s = simple_approximate(&tx(), TimeInterval::new(0.0, 1.0).unwrap(), 2, FreezeRule::Midpoint).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(s.pieces()[0].eval(&[1.0], 9.0).unwrap(), vec![0.25]);
        assert_eq!(s.pieces()[1].eval(&[1.0], 9.0).unwrap(), vec![0.75]);
        assert!(s.is_autonomous());
    }

    #[test]
    fn left_rule_refinement_is_deterministic() {
        let t = TimeInterval::new(0.0, 1.0).unwrap();
        let coarse = simple_approximate(&tx(), t, 2, FreezeRule::Left).unwrap();
        let fine = simple_approximate(&tx(), t, 4, FreezeRule::Left).unwrap();
        // pieces starting at the shared left endpoints carry the same field
        assert_eq!(coarse.pieces()[1].eval(&[1.0], 0.0), fine.pieces()[2].eval(&[1.0], 0.0));
    }

    #[test]
    fn autonomous_field_is_unchanged() {
        let x = VectorField::parse(&["x1^2"]).unwrap();
        let s = simple_approximate(&x, TimeInterval::new(0.0, 2.0).unwrap(), 5, FreezeRule::Midpoint).unwrap();
        assert!(s.pieces().iter().all(|p| p == &x));
    }

    #[test]
    fn piece_lookup() {
        let s = simple_approximate(&tx(), TimeInterval::new(0.0, 1.0).unwrap(), 4, FreezeRule::Left).unwrap();
        assert_eq!(s.piece_index(0.0).unwrap(), 0);
        assert_eq!(s.piece_index(0.25).unwrap(), 1);
        assert_eq!(s.piece_index(1.0).unwrap(), 3);
        assert!(s.piece_index(1.5).is_err());
        let segs = s.segments(0.1, 0.6).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].1.start, 0.1);
        assert_eq!(segs[2].1.end, 0.6);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n": 1, "breakpoints": [0, 1, 2], "pieces": [{"components": ["x1"]}, {"components": ["2*x1"]}]}"#;
        let s = StepField::from_json(text).unwrap();
        assert_eq!(s.pieces().len(), 2);
        let back = StepField::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"n": 1, "breakpoints": [0, 0], "pieces": [{"components": ["x1"]}]}"#;
        assert!(StepField::from_json(bad).is_err());
    }

    #[test]
    fn add_scaled_merges_breakpoints() {
        let a = StepField::new(vec![0.0, 1.0, 2.0], vec![VectorField::parse(&["x1"]).unwrap(); 2]).unwrap();
        let b = StepField::new(vec![0.0, 0.5, 2.0], vec![VectorField::parse(&["1"]).unwrap(); 2]).unwrap();
        let c = a.add_scaled(&b, 2.0).unwrap();
        assert_eq!(c.breakpoints(), &[0.0, 0.5, 1.0, 2.0]);
        assert_eq!(c.pieces()[1].eval(&[1.0], 0.0).unwrap(), vec![3.0]);
    }

    #[test]
    fn integrals() {
        assert_eq!(integrate_curve(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(integrate_steps(&[0.0, 1.0, 2.0], &[1.0, 3.0]).unwrap(), 4.0);
        let ts: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        assert_relative_eq!(integrate_curve(&ts, &ts).unwrap(), 0.5, epsilon = 1e-6);
    }
}
