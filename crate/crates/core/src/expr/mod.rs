//! Analytic closed-form expressions: parsing, real/complex evaluation and
//! Taylor-jet extraction.

mod ast;
mod eval;
mod field;
mod parser;
pub mod symbolic;

pub use ast::{Expr, Func};
pub use eval::{eval_jet, eval_point, POLE_THRESHOLD};
pub use field::VectorField;
pub use parser::parse_expr;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{Jet, Poly};
use crate::error::{Error, Result};

/// A parsed expression over the state variables `x1..xN` and time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    ast: Expr,
    dim: usize,
}

impl Expression {
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let ast = parse_expr(text, dim)?;
        Ok(Expression { ast, dim })
    }

    pub fn from_ast(ast: Expr, dim: usize) -> Result<Self> {
        if let Some(i) = ast.max_var() {
            if i >= dim {
                return Err(Error::Mismatch(format!(
                    "expression uses x{} but the dimension is {dim}",
                    i + 1
                )));
            }
        }
        Ok(Expression { ast, dim })
    }

    pub fn constant(dim: usize, v: f64) -> Self {
        Expression {
            ast: Expr::Num(v),
            dim,
        }
    }

    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index out of range");
        Expression {
            ast: Expr::Var(i),
            dim,
        }
    }

    pub fn from_poly(p: &Poly<f64>) -> Self {
        Expression {
            ast: symbolic::from_poly(p),
            dim: p.dim(),
        }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.ast.node_count()
    }

    pub fn depends_on_time(&self) -> bool {
        self.ast.depends_on_time()
    }

    pub fn is_zero(&self) -> bool {
        self.ast.as_num() == Some(0.0)
    }

    pub fn eval_real(&self, x: &[f64], t: f64) -> Result<f64> {
        self.check_point(x.len())?;
        eval_point(&self.ast, x, t)
    }

    pub fn eval_complex(&self, z: &[Complex64], t: f64) -> Result<Complex64> {
        self.check_point(z.len())?;
        eval_point(&self.ast, z, t)
    }

    /// Taylor jet of degree `degree` at `x0` with time frozen at `t`.
    pub fn jet_at(&self, x0: &[f64], t: f64, degree: usize) -> Result<Jet<f64>> {
        self.check_point(x0.len())?;
        let seeds = seeds(x0, degree);
        eval_jet(&self.ast, &seeds, t)
    }

    pub fn jet_at_complex(&self, z0: &[Complex64], t: f64, degree: usize) -> Result<Jet<Complex64>> {
        self.check_point(z0.len())?;
        let seeds: Vec<_> = (0..z0.len()).map(|i| Jet::variable(z0, degree, i)).collect();
        eval_jet(&self.ast, &seeds, t)
    }

    /// Evaluates on a vector of seed jets (composition with a jet-valued map).
    pub fn eval_on_jets<S: crate::algebra::Scalar>(&self, seeds: &[Jet<S>], t: f64) -> Result<Jet<S>> {
        self.check_point(seeds.len())?;
        eval_jet(&self.ast, seeds, t)
    }

    pub fn derivative(&self, i: usize) -> Expression {
        Expression {
            ast: symbolic::derivative(&self.ast, i),
            dim: self.dim,
        }
    }

    pub fn freeze_time(&self, t: f64) -> Expression {
        Expression {
            ast: symbolic::freeze_time(&self.ast, t),
            dim: self.dim,
        }
    }

    /// Polynomial form in the state variables at time `t`, if there is one.
    pub fn to_poly(&self, t: f64) -> Option<Poly<f64>> {
        symbolic::to_poly(&self.ast, self.dim, t)
    }

    pub fn add(&self, other: &Expression) -> Expression {
        Expression {
            ast: Expr::add(self.ast.clone(), other.ast.clone()),
            dim: self.dim,
        }
    }

    pub fn mul(&self, other: &Expression) -> Expression {
        Expression {
            ast: Expr::mul(self.ast.clone(), other.ast.clone()),
            dim: self.dim,
        }
    }

    pub fn scale(&self, c: f64) -> Expression {
        Expression {
            ast: Expr::mul(Expr::Num(c), self.ast.clone()),
            dim: self.dim,
        }
    }

    fn check_point(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::Mismatch(format!(
                "point has {len} coordinates, expression dimension is {}",
                self.dim
            )));
        }
        Ok(())
    }
}

pub(crate) fn seeds(x0: &[f64], degree: usize) -> Vec<Jet<f64>> {
    (0..x0.len()).map(|i| Jet::variable(x0, degree, i)).collect()
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

/// Parses with the dimension inferred from the highest variable used.
impl FromStr for Expression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ast = parse_expr(s, usize::MAX)?;
        let dim = ast.max_var().map_or(1, |i| i + 1);
        Ok(Expression { ast, dim })
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expression {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn real_evaluation() {
        let e = Expression::parse("x1^2", 1).unwrap();
        assert_eq!(e.eval_real(&[3.0], 0.0).unwrap(), 9.0);
        let e = Expression::parse("t^2/(t^2+x1^2)", 1).unwrap();
        assert_relative_eq!(e.eval_real(&[1.0], 1.0).unwrap(), 0.5);
    }

    #[test]
    fn complex_evaluation_near_pole() {
        let e = Expression::parse("1/(1+x1^2)", 1).unwrap();
        let v = e.eval_complex(&[Complex64::new(0.0, 0.999)], 0.0).unwrap();
        let expected = 1.0 / (1.0 - 0.999f64 * 0.999);
        assert!((v.norm() - expected).abs() / expected < 0.01);
        assert!(v.norm() > 400.0);
        let err = e.eval_complex(&[Complex64::new(0.0, 1.0)], 0.0).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn log_branch_is_a_domain_error() {
        let e = Expression::parse("log(x1)", 1).unwrap();
        match e.eval_real(&[-1.0], 0.0) {
            Err(Error::Domain { subterm, .. }) => assert_eq!(subterm, "log(x1)"),
            other => panic!("{other:?}"),
        }
        assert!(e.eval_complex(&[Complex64::new(-1.0, 0.5)], 0.0).is_err());
        assert!(e.eval_complex(&[Complex64::new(1.0, 0.5)], 0.0).is_ok());
    }

    #[test]
    fn division_by_zero_reports_subterm() {
        let e = Expression::parse("1/(x1 - 1)", 1).unwrap();
        match e.eval_real(&[1.0], 0.0) {
            Err(Error::Domain { subterm, .. }) => assert_eq!(subterm, "x1 - 1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exp_jet() {
        let e = Expression::parse("exp(x1)", 1).unwrap();
        let j = e.jet_at(&[0.0], 0.0, 3).unwrap();
        let c = j.coeffs();
        assert_relative_eq!(c[0], 1.0);
        assert_relative_eq!(c[1], 1.0);
        assert_relative_eq!(c[2], 0.5);
        assert_relative_eq!(c[3], 1.0 / 6.0, max_relative = 1e-15);
    }

    #[test]
    fn rational_jet_matches_repeated_differentiation() {
        let e = Expression::parse("1/(1+x1^2)", 1).unwrap();
        let j = e.jet_at(&[0.0], 0.0, 4).unwrap();
        let expected = [1.0, 0.0, -1.0, 0.0, 1.0];
        for (c, want) in j.coeffs().iter().zip(expected) {
            assert!((c - want).abs() < 1e-14);
        }
        // brute force: k-th symbolic derivative at 0 divided by k!
        let mut d = e.clone();
        let mut fact = 1.0;
        for (k, want) in expected.iter().enumerate() {
            if k > 0 {
                d = d.derivative(0);
                fact *= k as f64;
            }
            let v = d.eval_real(&[0.0], 0.0).unwrap() / fact;
            assert!((v - want).abs() < 1e-12, "k={k}: {v}");
        }
    }

    #[test]
    fn polynomial_jet_is_exact_shift() {
        let e = Expression::parse("x1^3 - 2*x1*x2 + 5", 2).unwrap();
        let x0 = [1.5, -0.5];
        let p = e.to_poly(0.0).unwrap();
        let j = e.jet_at(&x0, 0.0, 3).unwrap();
        let dx = [0.3, 0.7];
        let shifted = j.eval(&dx).unwrap();
        let direct = p.eval(&[x0[0] + dx[0], x0[1] + dx[1]]);
        assert!((shifted - direct).abs() < 1e-12);
        assert_eq!(j.value(), e.eval_real(&x0, 0.0).unwrap());
    }

    #[test]
    fn jet_derivatives_match_symbolic() {
        let e = Expression::parse("sin(x1*x2) + exp(x2)/(2 + cos(x1))", 2).unwrap();
        let x0 = [0.3, -0.2];
        let j = e.jet_at(&x0, 0.0, 3).unwrap();
        let d1 = e.derivative(0).eval_real(&x0, 0.0).unwrap();
        let d12 = e.derivative(0).derivative(1).eval_real(&x0, 0.0).unwrap();
        let r1 = crate::algebra::MultiIndex::new(vec![1, 0]);
        let r12 = crate::algebra::MultiIndex::new(vec![1, 1]);
        assert!((j.derivative(&r1) - d1).abs() < 1e-12);
        assert!((j.derivative(&r12) - d12).abs() < 1e-12);
    }

    #[test]
    fn taylor_consistency_exponent() {
        for (text, degree) in [("exp(x1)*sin(x1)", 3usize), ("1/(2+x1^2)", 4), ("log(1+x1^2)", 2)] {
            let e = Expression::parse(text, 1).unwrap();
            let x0 = [0.4];
            let j = e.jet_at(&x0, 0.0, degree).unwrap();
            let hs = [0.02, 0.01, 0.005];
            let errs: Vec<f64> = hs
                .iter()
                .map(|h| (e.eval_real(&[x0[0] + h], 0.0).unwrap() - j.eval(&[*h]).unwrap()).abs())
                .collect();
            let slope = (errs[0].ln() - errs[2].ln()) / (hs[0].ln() - hs[2].ln());
            assert!(slope >= degree as f64 + 0.5, "{text}: slope {slope}");
        }
    }

    #[test]
    fn display_round_trip() {
        for text in ["x1^2 + sin(x2)", "1/(1 + 4*x1^2)", "t^2/(t^2 + x1^2)", "exp(x1 - x2)*log(2)"] {
            let e = Expression::parse(text, 2).unwrap();
            let again = Expression::parse(&e.to_string(), 2).unwrap();
            assert_eq!(e, again);
        }
        let json = serde_json::to_string(&Expression::parse("x2*x1", 2).unwrap()).unwrap();
        assert_eq!(json, "\"x2*x1\"");
    }

    proptest! {
        #[test]
        fn real_and_complex_agree(x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let e = Expression::parse("exp(x1)*cos(x2) + x1^3/(3 + x2^2) - sin(x1*x2)", 2).unwrap();
            let r = e.eval_real(&[x, y], 0.0).unwrap();
            let c = e.eval_complex(&[Complex64::new(x, 0.0), Complex64::new(y, 0.0)], 0.0).unwrap();
            prop_assert!((r - c.re).abs() <= 1e-14 * r.abs().max(1.0));
            prop_assert!(c.im.abs() <= 1e-14);
        }

        #[test]
        fn conjugate_symmetry(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let e = Expression::parse("exp(x1)/(3 + x1^2) + sin(x1)*cos(2*x1)", 1).unwrap();
            let z = Complex64::new(a, b);
            let v = e.eval_complex(&[z], 0.0).unwrap();
            let w = e.eval_complex(&[z.conj()], 0.0).unwrap();
            prop_assert!((v.conj() - w).norm() <= 1e-13 * v.norm().max(1.0));
        }
    }
}
