//! Lie series `Σ_{k<=n} dt^k/k! X̂^k f` of an autonomous field, in three
//! backends: sparse polynomials, expression trees and jets; plus the
//! pointwise time-Taylor step used for point flows.

use crate::algebra::{Coeff, Jet, Poly};
use crate::error::{Error, Result};
use crate::expr::{Expression, VectorField};

/// Terms larger than this are treated as overflow.
pub const OVERFLOW_GUARD: f64 = 1e300;
/// Node budget for expression-tree series.
pub const EXPRESSION_NODE_LIMIT: usize = 2_000_000;

/// Exact polynomial backend, generic over the coefficient ring.
pub fn lie_series_poly<C: Coeff>(x: &[Poly<C>], f: &Poly<C>, dt: &C, n: usize) -> Result<Poly<C>> {
    let mut term = f.clone();
    let mut acc = f.clone();
    for k in 1..=n {
        term = term.apply_derivation(x)?;
        if term.is_zero() {
            break;
        }
        term = term.scale(&(dt.clone() / C::from_i64(k as i64)));
        if term.max_abs_coeff() > OVERFLOW_GUARD {
            return Err(Error::SizeGuard(format!("series term {k} overflows")));
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Individual terms `dt^k/k! X̂^k f` for `k = 0..=n`.
pub fn lie_terms_poly(x: &[Poly<f64>], f: &Poly<f64>, dt: f64, n: usize) -> Result<Vec<Poly<f64>>> {
    let mut out = vec![f.clone()];
    let mut term = f.clone();
    for k in 1..=n {
        term = term.apply_derivation(x)?.scale(&(dt / k as f64));
        out.push(term.clone());
    }
    Ok(out)
}

/// Symbolic series; polynomial inputs go through the polynomial backend,
/// anything else is derived as expression trees.
pub fn lie_series_apply(x: &VectorField, dt: f64, f: &Expression, n: usize) -> Result<Expression> {
    if x.depends_on_time() || f.depends_on_time() {
        return Err(Error::invalid("Lie series needs an autonomous field and observable"));
    }
    if dt == 0.0 || n == 0 {
        return Ok(f.clone());
    }
    if let (Some(xp), Some(fp)) = (x.to_polys(0.0), f.to_poly(0.0)) {
        return Ok(Expression::from_poly(&lie_series_poly(&xp, &fp, &dt, n)?));
    }
    let mut term = f.clone();
    let mut acc = f.clone();
    let mut coef = 1.0;
    for k in 1..=n {
        term = x.apply(&term)?;
        coef *= dt / k as f64;
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term.scale(coef));
        if acc.node_count() > EXPRESSION_NODE_LIMIT {
            return Err(Error::SizeGuard(format!(
                "expression series exceeds {EXPRESSION_NODE_LIMIT} nodes at order {k}"
            )));
        }
    }
    Ok(acc)
}

/// Jet backend: each application of `X̂` costs one degree, so the result has
/// degree `deg f - n`.
pub fn lie_series_jet(x: &VectorField, dt: f64, f: &Jet<f64>, n: usize) -> Result<Jet<f64>> {
    if f.degree() < n {
        return Err(Error::DegreeBudget {
            needed: n,
            available: f.degree(),
        });
    }
    let out_degree = f.degree() - n;
    let mut term = f.clone();
    let mut acc = f.truncate(out_degree);
    let mut coef = 1.0;
    for k in 1..=n {
        term = x.apply_jet(&term, 0.0)?;
        coef *= dt / k as f64;
        let scaled = term.truncate(out_degree).scale(coef);
        if scaled.coeffs().iter().any(|c| !(c.abs() <= OVERFLOW_GUARD)) {
            return Err(Error::SizeGuard(format!("series term {k} overflows")));
        }
        acc = acc.add(&scaled)?;
    }
    Ok(acc)
}

/// Taylor coefficients in time of the trajectory through `y`:
/// `coeffs[k][i] = (X̂^k x^i)(y) / k!`, for `k = 0..=n`.
pub fn trajectory_coeffs(x: &VectorField, y: &[f64], n: usize) -> Result<Vec<Vec<f64>>> {
    let dim = y.len();
    if dim != x.dim {
        return Err(Error::Mismatch("point and field dimensions differ".into()));
    }
    let mut coeffs: Vec<Vec<f64>> = vec![y.to_vec()];
    let base = [0.0];
    for k in 0..n {
        // X(x(τ)) is known through order k once x is known through order k
        let seeds: Vec<Jet<f64>> = (0..dim)
            .map(|i| Jet::from_coeffs(&base, k, coeffs.iter().map(|c| c[i]).collect()))
            .collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(dim);
        for comp in &x.components {
            let v = comp.eval_on_jets(&seeds, 0.0)?;
            next.push(v.coeffs()[k] / (k + 1) as f64);
        }
        if next.iter().any(|c| !(c.abs() <= OVERFLOW_GUARD)) {
            return Err(Error::SizeGuard(format!("trajectory coefficient {} overflows", k + 1)));
        }
        coeffs.push(next);
    }
    Ok(coeffs)
}

/// Time-Taylor coefficients of `f` along the trajectory through `y`:
/// `(X̂^k f)(y) / k!` for `k = 0..=n`.
pub fn observable_coeffs(x: &VectorField, f: &Expression, y: &[f64], n: usize) -> Result<Vec<f64>> {
    let traj = trajectory_coeffs(x, y, n)?;
    let seeds: Vec<Jet<f64>> = (0..y.len())
        .map(|i| Jet::from_coeffs(&[0.0], n, traj.iter().map(|c| c[i]).collect()))
        .collect::<Result<_>>()?;
    Ok(f.eval_on_jets(&seeds, 0.0)?.coeffs().to_vec())
}

/// Truncated Lie series of the coordinates at `y`, i.e. the order-`n` Taylor
/// step of the trajectory over time `h`.
pub fn lie_step_point(x: &VectorField, y: &[f64], h: f64, n: usize) -> Result<Vec<f64>> {
    let coeffs = trajectory_coeffs(x, y, n)?;
    let mut out = vec![0.0; y.len()];
    for c in coeffs.iter().rev() {
        for (o, ci) in out.iter_mut().zip(c) {
            *o = *o * h + ci;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiIndex;
    use approx::assert_relative_eq;
    use num_rational::BigRational;

    fn mono(e: u32, c: f64) -> Poly<f64> {
        Poly::monomial(MultiIndex::new(vec![e]), c)
    }

    #[test]
    fn euler_field_exponential() {
        let x = VectorField::parse(&["x1"]).unwrap();
        let f = Expression::parse("x1", 1).unwrap();
        let s = lie_series_apply(&x, 0.1, &f, 12).unwrap().to_poly(0.0).unwrap();
        let c = s.coeff(&MultiIndex::new(vec![1]));
        assert!((c - 0.1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_field_terms() {
        let x = [mono(2, 1.0)];
        let f = mono(1, 1.0);
        let mut term = f.clone();
        let mut fact = 1.0;
        for k in 1..=6u32 {
            term = term.apply_derivation(&x).unwrap();
            fact *= k as f64;
            assert_eq!(term, mono(k + 1, fact));
        }
        let dt = 0.25;
        let s = lie_series_poly(&x, &f, &dt, 6).unwrap();
        for k in 0..=6u32 {
            assert_relative_eq!(s.coeff(&MultiIndex::new(vec![k + 1])), dt.powi(k as i32), max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let x = VectorField::parse(&["sin(x1) + x2", "x1*x2"]).unwrap();
        let f = Expression::parse("exp(x1)*x2", 2).unwrap();
        assert_eq!(lie_series_apply(&x, 0.0, &f, 8).unwrap(), f);
        let y = [0.3, -0.7];
        assert_eq!(lie_step_point(&x, &y, 0.0, 8).unwrap(), y.to_vec());
    }

    #[test]
    fn exact_rational_series() {
        let x = [mono(2, 1.0).to_rational().unwrap()];
        let f = mono(1, 1.0).to_rational().unwrap();
        let dt = BigRational::new(1.into(), 3.into());
        let s = lie_series_poly(&x, &f, &dt, 4).unwrap();
        assert_eq!(s.coeff(&MultiIndex::new(vec![5])), BigRational::new(1.into(), 81.into()));
    }

    #[test]
    fn point_step_matches_closed_form() {
        let x = VectorField::parse(&["x1^2"]).unwrap();
        let y = lie_step_point(&x, &[0.5], 0.1, 40).unwrap();
        assert!((y[0] - 0.5 / 0.95).abs() < 1e-15);
    }

    #[test]
    fn backends_agree() {
        let x = VectorField::parse(&["x2", "0 - sin(x1)"]).unwrap();
        let f = Expression::parse("x1*x2", 2).unwrap();
        let y = [0.4, 0.2];
        let dt = 0.05;
        let n = 5;
        let sym = lie_series_apply(&x, dt, &f, n).unwrap().eval_real(&y, 0.0).unwrap();
        let jet = lie_series_jet(&x, dt, &f.jet_at(&y, 0.0, n).unwrap(), n).unwrap().value();
        let pt: f64 = observable_coeffs(&x, &f, &y, n)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(k, c)| c * dt.powi(k as i32))
            .sum();
        assert!((sym - jet).abs() < 1e-14);
        assert!((sym - pt).abs() < 1e-14);
    }

    #[test]
    fn jet_budget() {
        let x = VectorField::parse(&["x1"]).unwrap();
        let f = Expression::parse("x1", 1).unwrap().jet_at(&[1.0], 0.0, 3).unwrap();
        assert!(matches!(lie_series_jet(&x, 0.1, &f, 4), Err(Error::DegreeBudget { .. })));
    }

    #[test]
    fn overflow_guard() {
        let x = [mono(2, 1e200)];
        let f = mono(1, 1.0);
        assert!(matches!(lie_series_poly(&x, &f, &1.0, 5), Err(Error::SizeGuard(_))));
    }
}
