//! Holomorphic extension diagnostics: per-point germ radii, extension
//! domains over boxes and time grids, common polydisc majorants for
//! families, and integrability of the sup-norm majorant in time.

use serde::{Deserialize, Serialize};

use crate::algebra::{Jet, WeightSequence};
use crate::error::{Error, Result};
use crate::expr::{Expression, VectorField};
use crate::geometry::{CompactBox, Polydisc};
use crate::seminorm::{holo_supnorm_field, seminorm_field, SeminormConfig};
use crate::serde_util::{inf_as_null, vec_inf_as_null};
use crate::timevarying::{cumulative_trapezoid, StepField, TimeInterval, TimeVarying};

pub const DEFAULT_RADIUS_ORDER: usize = 32;
pub const RADIUS_FLOOR: f64 = 1e-6;
/// Slope drift between the two halves of the fit window that marks
/// super-geometric decay.
const ENTIRE_DRIFT: f64 = 1.25;

/// Distance from `x0` to the nearest complex singularity of `f`, estimated
/// axis by axis from a log-linear fit of Taylor coefficients over orders
/// `[R/2, R]`. `+inf` when the coefficients decay faster than geometrically.
pub fn radius_at(f: &Expression, x0: &[f64], t: f64, order: usize) -> Result<f64> {
    if x0.len() != f.dim() {
        return Err(Error::Mismatch("point dimension".into()));
    }
    let order = order.max(8);
    let mut best = f64::INFINITY;
    for axis in 0..x0.len() {
        let seeds: Vec<Jet<f64>> = x0
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if j == axis {
                    Jet::from_coeffs(&[0.0], order, {
                        let mut c = vec![0.0; order + 1];
                        c[0] = *v;
                        c[1] = 1.0;
                        c
                    })
                } else {
                    Ok(Jet::constant(&[0.0], order, *v))
                }
            })
            .collect::<Result<_>>()?;
        let coeffs = f.eval_on_jets(&seeds, t)?.coeffs().to_vec();
        best = best.min(radius_from_coeffs(&coeffs));
    }
    Ok(best)
}

/// Cauchy-Hadamard radius from univariate Taylor coefficients.
pub fn radius_from_coeffs(c: &[f64]) -> f64 {
    let r = c.len() - 1;
    let lo = r / 2;
    // pairwise maxima smooth out even/odd zero patterns; an odd number of
    // them keeps the residual parity pattern symmetric so it adds no slope
    let mut hi = r - 1;
    if (hi - lo) % 2 == 1 {
        hi -= 1;
    }
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter_map(|k| {
            let m = c[k].abs().max(c[k + 1].abs());
            (m > 0.0 && m.is_finite()).then(|| (k as f64, m.ln()))
        })
        .collect();
    if pts.len() < 4 {
        return f64::INFINITY;
    }
    let slope = |p: &[(f64, f64)]| -> f64 {
        let n = p.len() as f64;
        let mx = p.iter().map(|q| q.0).sum::<f64>() / n;
        let my = p.iter().map(|q| q.1).sum::<f64>() / n;
        let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = p.iter().map(|q| (q.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    // odd-length halves, for the same reason
    let mut half = (pts.len() + 1) / 2;
    if half % 2 == 0 {
        half += 1;
    }
    let r_all = (-slope(&pts)).exp();
    let r_lo = (-slope(&pts[..half])).exp();
    let r_hi = (-slope(&pts[pts.len() - half..])).exp();
    if !r_all.is_finite() || r_hi > ENTIRE_DRIFT * r_lo {
        return f64::INFINITY;
    }
    r_all
}

/// Smallest radius over the components of a field.
pub fn field_radius_at(x: &VectorField, x0: &[f64], t: f64, order: usize) -> Result<f64> {
    let mut r = f64::INFINITY;
    for c in &x.components {
        r = r.min(radius_at(c, x0, t, order)?);
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    UniformlyExtendable,
    RadiusToZero,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRadius {
    pub t: f64,
    pub point: Vec<f64>,
    #[serde(with = "inf_as_null")]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainEstimate {
    pub points: Vec<PointRadius>,
    #[serde(with = "vec_inf_as_null")]
    pub per_time_inf: Vec<f64>,
    pub times: Vec<f64>,
    #[serde(with = "inf_as_null")]
    pub inf_radius: f64,
    pub verdict: Verdict,
    /// Radius of the polydisc on which extension is reported (half the
    /// infimum, capped at 1), when the verdict is uniform.
    pub polydisc_radius: Option<f64>,
}

pub fn domain_estimate<F: TimeVarying + ?Sized>(
    x: &F,
    k: &CompactBox,
    times: &[f64],
    order: usize,
) -> Result<DomainEstimate> {
    if times.is_empty() {
        return Err(Error::invalid("need at least one time"));
    }
    let grid = k.grid_points();
    let mut points = Vec::new();
    let mut per_time_inf = Vec::new();
    for &t in times {
        let field = x.field_at_time(t)?;
        let mut inf = f64::INFINITY;
        for p in &grid {
            let r = field_radius_at(&field, p, t, order)?;
            inf = inf.min(r);
            points.push(PointRadius {
                t,
                point: p.clone(),
                radius: r,
            });
        }
        per_time_inf.push(inf);
    }
    let inf_radius = per_time_inf.iter().copied().fold(f64::INFINITY, f64::min);
    let collapsing = per_time_inf.len() >= 3
        && per_time_inf
            .windows(2)
            .rev()
            .take(2)
            .all(|w| w[1].is_finite() && w[1] * 2.0 <= w[0]);
    let verdict = if inf_radius < RADIUS_FLOOR || collapsing {
        Verdict::RadiusToZero
    } else if inf_radius.is_infinite() || per_time_inf.len() < 3 || !decreasing(&per_time_inf) {
        Verdict::UniformlyExtendable
    } else {
        Verdict::Inconclusive
    };
    let polydisc_radius = (verdict == Verdict::UniformlyExtendable).then(|| (0.5 * inf_radius).min(1.0));
    Ok(DomainEstimate {
        points,
        per_time_inf,
        times: times.to_vec(),
        inf_radius,
        verdict,
        polydisc_radius,
    })
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantFailure {
    pub member: usize,
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonMajorant {
    pub d_star: Option<f64>,
    /// Family-wide sup of `∫ max_i p_V(X^i(t)) dt`.
    pub p_sup: Option<f64>,
    pub member_integrals: Vec<f64>,
    /// Why the smallest candidate radius failed, when none succeeded.
    pub failure: Option<MajorantFailure>,
}

/// Largest candidate `d` for which every member is bounded on the
/// radius-`d` polydisc over `k` at every piece.
pub fn common_majorant(family: &[StepField], k: &CompactBox, d_grid: &[f64], safety: f64) -> Result<CommonMajorant> {
    if family.is_empty() || d_grid.is_empty() {
        return Err(Error::invalid("family and radius grid must be nonempty"));
    }
    let mut grid = d_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let mut failure = None;
    'radius: for d in grid {
        let v = Polydisc::new(k.clone(), d)?.with_safety(safety);
        let mut integrals = Vec::with_capacity(family.len());
        for (i, member) in family.iter().enumerate() {
            let mut total = 0.0;
            for (p, w) in member.pieces().iter().zip(member.breakpoints().windows(2)) {
                let t = 0.5 * (w[0] + w[1]);
                match holo_supnorm_field(p, &v, t) {
                    Ok(s) => total += s * (w[1] - w[0]),
                    Err(e) => {
                        failure = Some(MajorantFailure {
                            member: i,
                            t,
                            reason: format!("d = {d}: {e}"),
                        });
                        continue 'radius;
                    }
                }
            }
            integrals.push(total);
        }
        let p_sup = integrals.iter().copied().fold(0.0, f64::max);
        return Ok(CommonMajorant {
            d_star: Some(d),
            p_sup: Some(p_sup),
            member_integrals: integrals,
            failure: None,
        });
    }
    Ok(CommonMajorant {
        d_star: None,
        p_sup: None,
        member_integrals: Vec::new(),
        failure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityOptions {
    pub time_points: usize,
    pub max_order: usize,
}

impl Default for IntegrabilityOptions {
    fn default() -> Self {
        IntegrabilityOptions {
            time_points: 101,
            max_order: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub times: Vec<f64>,
    #[serde(with = "vec_inf_as_null")]
    pub m_samples: Vec<f64>,
    #[serde(with = "vec_inf_as_null")]
    pub m_of_t: Vec<f64>,
    pub locally_integrally_bounded: bool,
    /// `M(T)` agrees within 1% after doubling the time grid.
    pub m_converged: bool,
    /// `∫ p_{K,a}(X(t)) dt` at the base and refined (time grid, horizon).
    #[serde(with = "vec_inf_as_null")]
    pub seminorm_integrals: Vec<f64>,
    pub seminorm_integral_diverges: bool,
    pub singular_times: Vec<f64>,
}

impl IntegrabilityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,m,M\n");
        for ((t, m), big) in self.times.iter().zip(&self.m_samples).zip(&self.m_of_t) {
            s.push_str(&format!("{},{},{}\n", fmt_csv(*t), fmt_csv(*m), fmt_csv(*big)));
        }
        s
    }
}

pub(crate) fn fmt_csv(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn uniform_grid(t: TimeInterval, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| if i == n - 1 { t.end } else { t.start + t.len() * i as f64 / (n - 1) as f64 })
        .collect()
}

/// `m(t) = 4N max_i p_V(X^i(t))` on a time grid, its running integral
/// `M(t)`, and a refinement test on `∫ p_{K,a}(X(t)) dt`.
pub fn integrability_report<F: TimeVarying + ?Sized>(
    x: &F,
    t: TimeInterval,
    k: &CompactBox,
    a: &WeightSequence,
    v: &Polydisc,
    opts: &IntegrabilityOptions,
) -> Result<IntegrabilityReport> {
    let n = x.dim() as f64;
    let mut singular = Vec::new();
    let m_on = |grid: &[f64], singular: &mut Vec<f64>| -> Result<Vec<f64>> {
        grid.iter()
            .map(|&s| {
                let field = x.field_at_time(s)?;
                Ok(match holo_supnorm_field(&field, v, s) {
                    Ok(p) => 4.0 * n * p,
                    Err(_) => {
                        singular.push(s);
                        f64::INFINITY
                    }
                })
            })
            .collect()
    };
    let times = uniform_grid(t, opts.time_points);
    let m_samples = m_on(&times, &mut singular)?;
    let m_of_t = cumulative_trapezoid(&times, &m_samples)?;
    let fine = uniform_grid(t, 2 * opts.time_points - 1);
    let mut scratch = Vec::new();
    let m_fine = m_on(&fine, &mut scratch)?;
    let total = *m_of_t.last().unwrap_or(&0.0);
    let total_fine = *cumulative_trapezoid(&fine, &m_fine)?.last().unwrap_or(&0.0);
    let m_converged = total.is_finite() && (total_fine - total).abs() <= 0.01 * total.abs().max(1e-300);

    let seminorm_integral = |grid: &[f64], order: usize, singular: &mut Vec<f64>| -> Result<f64> {
        let cfg = SeminormConfig {
            max_order: order,
            majorant: None,
        };
        let mut vals = Vec::with_capacity(grid.len());
        for &s in grid {
            let field = x.field_at_time(s)?;
            match seminorm_field(&field, k, a, s, &cfg) {
                Ok(p) => vals.push(p.value),
                Err(_) => {
                    singular.push(s);
                    vals.push(f64::INFINITY);
                }
            }
        }
        Ok(*cumulative_trapezoid(grid, &vals)?.last().unwrap_or(&0.0))
    };
    let s0 = seminorm_integral(&times, opts.max_order, &mut singular)?;
    let s1 = seminorm_integral(&fine, 2 * opts.max_order, &mut singular)?;
    singular.sort_by(f64::total_cmp);
    singular.dedup();
    let diverges = !singular.is_empty() || !s0.is_finite() || !s1.is_finite() || s1 > 2.0 * s0;
    Ok(IntegrabilityReport {
        locally_integrally_bounded: total.is_finite(),
        times,
        m_samples,
        m_of_t,
        m_converged,
        seminorm_integrals: vec![s0, s1],
        seminorm_integral_diverges: diverges,
        singular_times: singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e1(s: &str) -> Expression {
        Expression::parse(s, 1).unwrap()
    }

    #[test]
    fn rational_radius() {
        let r = radius_at(&e1("1/(1+4*x1^2)"), &[0.0], 0.0, 32).unwrap();
        assert!((r - 0.5).abs() < 0.05, "{r}");
        let mut prev = f64::INFINITY;
        for n in 1..=8 {
            let r = radius_at(&e1(&format!("1/(1+{}*x1^2)", n * n)), &[0.0], 0.0, 32).unwrap();
            assert!((r - 1.0 / n as f64).abs() < 0.1 / n as f64, "n={n}: {r}");
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn entire_functions() {
        for x0 in [-1.0, 0.0, 2.5] {
            assert!(radius_at(&e1("exp(x1)"), &[x0], 0.0, 32).unwrap().is_infinite());
        }
        assert!(radius_at(&e1("x1^3 + 2"), &[0.3], 0.0, 32).unwrap().is_infinite());
        assert!(radius_at(&e1("sin(x1)*cos(x1)"), &[0.3], 0.0, 32).unwrap().is_infinite());
    }

    #[test]
    fn radius_shrinks_toward_pole() {
        let f = e1("1/(1+16*x1^2)");
        let xs = [1.0, 0.6, 0.3, 0.1, 0.0];
        let rs: Vec<f64> = xs.iter().map(|x| radius_at(&f, &[*x], 0.0, 32).unwrap()).collect();
        for (x, r) in xs.iter().zip(&rs) {
            let exact = (x * x + 1.0 / 16.0f64).sqrt();
            assert!((r - exact).abs() < 0.15 * exact, "x={x}: {r} vs {exact}");
        }
        assert!(rs.windows(2).all(|w| w[1] < w[0] * 1.15));
    }

    #[test]
    fn polynomial_field_domain() {
        let x = VectorField::parse(&["x1"]).unwrap();
        let k = CompactBox::interval(-1.0, 1.0).unwrap().with_grid(5);
        let d = domain_estimate(&x, &k, &[0.0], 32).unwrap();
        assert!(d.inf_radius.is_infinite());
        assert_eq!(d.verdict, Verdict::UniformlyExtendable);
    }

    #[test]
    fn time_varying_rational_domain_collapses() {
        let x = VectorField::parse(&["t^2/(t^2+x1^2)"]).unwrap();
        let k = CompactBox::interval(-0.1, 0.1).unwrap().with_grid(5);
        let d = domain_estimate(&x, &k, &[0.1, 0.01, 0.001], 32).unwrap();
        for (t, r) in [0.1, 0.01, 0.001].iter().zip(&d.per_time_inf) {
            assert!((r - t).abs() < 0.1 * t, "t={t}: {r}");
        }
        assert_eq!(d.verdict, Verdict::RadiusToZero);
        assert!(d.points.iter().all(|p| d.inf_radius <= p.radius));
    }

    #[test]
    fn example_one_family_common_radius() {
        let k = CompactBox::interval(-1.0, 1.0).unwrap().with_grid(9);
        let mut inf = f64::INFINITY;
        for n in 1..=6 {
            let x = VectorField::parse(&[&format!("1/(1+{}*x1^2)", n * n)]).unwrap();
            inf = inf.min(domain_estimate(&x, &k, &[0.0], 32).unwrap().inf_radius);
        }
        assert!((inf - 1.0 / 6.0).abs() < 0.1 / 6.0, "{inf}");
    }

    #[test]
    fn majorant_of_linear_family() {
        let t = TimeInterval::new(0.0, 1.0).unwrap();
        let fam: Vec<StepField> = ["x1", "2*x1"]
            .iter()
            .map(|s| StepField::constant(VectorField::parse(&[s]).unwrap(), t).unwrap())
            .collect();
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let m = common_majorant(&fam, &k, &[0.25, 0.5, 1.0], 1.0).unwrap();
        assert_eq!(m.d_star, Some(1.0));
        assert_relative_eq!(m.p_sup.unwrap(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn majorant_fails_for_collapsing_family() {
        let fam: Vec<StepField> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|s| {
                let x = VectorField::parse(&["t^2/(t^2+x1^2)"]).unwrap().freeze_time(*s);
                StepField::constant(x, TimeInterval::new(0.0, 1.0).unwrap()).unwrap()
            })
            .collect();
        let k = CompactBox::interval(-0.1, 0.1).unwrap();
        let m = common_majorant(&fam, &k, &[0.01, 0.1, 0.5], 1.05).unwrap();
        assert!(m.d_star.is_none());
        let f = m.failure.unwrap();
        assert!(f.member >= 1, "{f:?}");
    }

    #[test]
    fn euler_field_integrability() {
        let x = VectorField::parse(&["x1"]).unwrap();
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap().with_safety(1.0);
        let a = WeightSequence::geometric(0.5, 0.5, 64).unwrap();
        let r = integrability_report(&x, TimeInterval::new(0.0, 1.0).unwrap(), &k, &a, &v, &Default::default()).unwrap();
        assert!(r.m_samples.iter().all(|m| (m - 6.0).abs() < 1e-12));
        assert_relative_eq!(*r.m_of_t.last().unwrap(), 6.0, max_relative = 1e-12);
        assert!(r.locally_integrally_bounded);
        assert!(!r.seminorm_integral_diverges);
        assert!(r.to_csv().starts_with("t,m,M\n0.0000000000000000e0,"));
    }

    #[test]
    fn zero_field_integrability() {
        let x = VectorField::zero(1);
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let v = Polydisc::new(k.clone(), 0.5).unwrap();
        let a = WeightSequence::geometric(0.5, 0.5, 64).unwrap();
        let r = integrability_report(&x, TimeInterval::new(0.0, 1.0).unwrap(), &k, &a, &v, &Default::default()).unwrap();
        assert!(r.m_of_t.iter().all(|m| *m == 0.0));
    }

    #[test]
    fn time_varying_rational_diverges() {
        let x = VectorField::parse(&["t^2/(t^2+x1^2)"]).unwrap();
        let k = CompactBox::interval(-0.1, 0.1).unwrap().with_grid(9);
        let v = Polydisc::new(k.clone(), 0.05).unwrap();
        let a = WeightSequence::geometric(0.05, 0.5, 64).unwrap();
        let opts = IntegrabilityOptions {
            time_points: 21,
            max_order: 8,
        };
        let r = integrability_report(&x, TimeInterval::new(-0.1, 0.1).unwrap(), &k, &a, &v, &opts).unwrap();
        assert!(r.seminorm_integral_diverges);
        assert!(!r.singular_times.is_empty());
    }
}
