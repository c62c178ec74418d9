//! Exact symbolic manipulation: differentiation, time freezing and
//! conversion to polynomials.

use super::ast::{Expr, Func};
use crate::algebra::Poly;

/// `d e / d x_i`, lightly simplified.
pub fn derivative(e: &Expr, i: usize) -> Expr {
    match e {
        Expr::Num(_) | Expr::Time => Expr::Num(0.0),
        Expr::Var(j) => Expr::Num(if *j == i { 1.0 } else { 0.0 }),
        Expr::Add(a, b) => Expr::add(derivative(a, i), derivative(b, i)),
        Expr::Sub(a, b) => Expr::sub(derivative(a, i), derivative(b, i)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(derivative(a, i), (**b).clone()),
            Expr::mul((**a).clone(), derivative(b, i)),
        ),
        Expr::Div(a, b) => {
            let da = derivative(a, i);
            let db = derivative(b, i);
            if db.as_num() == Some(0.0) {
                return Expr::div(da, (**b).clone());
            }
            Expr::div(
                Expr::sub(
                    Expr::mul(da, (**b).clone()),
                    Expr::mul((**a).clone(), db),
                ),
                Expr::pow((**b).clone(), 2),
            )
        }
        Expr::Pow(a, k) => {
            let da = derivative(a, i);
            if *k == 0 {
                return Expr::Num(0.0);
            }
            Expr::mul(
                Expr::mul(Expr::Num(*k as f64), Expr::pow((**a).clone(), k - 1)),
                da,
            )
        }
        Expr::Call(f, a) => {
            let da = derivative(a, i);
            if da.as_num() == Some(0.0) {
                return Expr::Num(0.0);
            }
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => Expr::div(Expr::Num(1.0), (**a).clone()),
                Func::Sin => Expr::call(Func::Cos, (**a).clone()),
                Func::Cos => Expr::sub(Expr::Num(0.0), Expr::call(Func::Sin, (**a).clone())),
            };
            Expr::mul(outer, da)
        }
    }
}

/// Replaces the time variable by a constant.
pub fn freeze_time(e: &Expr, t: f64) -> Expr {
    match e {
        Expr::Time => Expr::Num(t),
        Expr::Num(_) | Expr::Var(_) => e.clone(),
        Expr::Add(a, b) => Expr::Add(Box::new(freeze_time(a, t)), Box::new(freeze_time(b, t))),
        Expr::Sub(a, b) => Expr::Sub(Box::new(freeze_time(a, t)), Box::new(freeze_time(b, t))),
        Expr::Mul(a, b) => Expr::Mul(Box::new(freeze_time(a, t)), Box::new(freeze_time(b, t))),
        Expr::Div(a, b) => Expr::Div(Box::new(freeze_time(a, t)), Box::new(freeze_time(b, t))),
        Expr::Pow(a, k) => Expr::Pow(Box::new(freeze_time(a, t)), *k),
        Expr::Call(f, a) => Expr::Call(*f, Box::new(freeze_time(a, t))),
    }
}

/// Polynomial form in the state variables with time fixed at `t`, or `None`
/// when the expression is not a polynomial.
pub fn to_poly(e: &Expr, n: usize, t: f64) -> Option<Poly<f64>> {
    Some(match e {
        Expr::Num(v) => Poly::constant(n, *v),
        Expr::Time => Poly::constant(n, t),
        Expr::Var(i) => {
            if *i >= n {
                return None;
            }
            Poly::var(n, *i)
        }
        Expr::Add(a, b) => to_poly(a, n, t)?.add(&to_poly(b, n, t)?),
        Expr::Sub(a, b) => to_poly(a, n, t)?.sub(&to_poly(b, n, t)?),
        Expr::Mul(a, b) => to_poly(a, n, t)?.mul(&to_poly(b, n, t)?),
        Expr::Div(a, b) => {
            let den = to_poly(b, n, t)?;
            if den.degree() > 0 {
                return None;
            }
            let c = den.coeff(&crate::algebra::MultiIndex::zero(n));
            if c == 0.0 {
                return None;
            }
            to_poly(a, n, t)?.scale(&(1.0 / c))
        }
        Expr::Pow(a, k) => to_poly(a, n, t)?.powi(*k),
        Expr::Call(..) => {
            // constant subtrees only
            if e.max_var().is_some() {
                return None;
            }
            let v = super::eval::eval_point::<f64>(e, &[], t).ok()?;
            Poly::constant(n, v)
        }
    })
}

/// Expression tree for a polynomial (sum of monomials).
pub fn from_poly(p: &Poly<f64>) -> Expr {
    let mut acc: Option<Expr> = None;
    for (r, c) in p.terms() {
        let mut mono: Option<Expr> = None;
        for (i, &e) in r.entries().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let f = Expr::pow(Expr::Var(i), e);
            mono = Some(match mono {
                None => f,
                Some(m) => Expr::Mul(Box::new(m), Box::new(f)),
            });
        }
        let mag = c.abs();
        let term = match mono {
            None => Expr::Num(mag),
            Some(m) if mag == 1.0 => m,
            Some(m) => Expr::Mul(Box::new(Expr::Num(mag)), Box::new(m)),
        };
        acc = Some(match (acc, *c < 0.0) {
            (None, false) => term,
            (None, true) => Expr::Sub(Box::new(Expr::Num(0.0)), Box::new(term)),
            (Some(a), false) => Expr::Add(Box::new(a), Box::new(term)),
            (Some(a), true) => Expr::Sub(Box::new(a), Box::new(term)),
        });
    }
    acc.unwrap_or(Expr::Num(0.0))
}
