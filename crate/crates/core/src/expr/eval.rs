//! Point and jet evaluation of expression trees.

use super::ast::{Expr, Func};
use crate::algebra::{Jet, Scalar};
use crate::error::{Error, Result};

/// Smallest admissible denominator modulus.
pub const POLE_THRESHOLD: f64 = 1e-300;

pub fn eval_point<S: Scalar>(e: &Expr, x: &[S], t: f64) -> Result<S> {
    let v = match e {
        Expr::Num(v) => S::from_f64(*v),
        Expr::Var(i) => *x
            .get(*i)
            .ok_or_else(|| Error::Mismatch(format!("point has no coordinate x{}", i + 1)))?,
        Expr::Time => S::from_f64(t),
        Expr::Add(a, b) => eval_point(a, x, t)? + eval_point(b, x, t)?,
        Expr::Sub(a, b) => eval_point(a, x, t)? - eval_point(b, x, t)?,
        Expr::Mul(a, b) => eval_point(a, x, t)? * eval_point(b, x, t)?,
        Expr::Div(a, b) => {
            let num = eval_point(a, x, t)?;
            let den = eval_point(b, x, t)?;
            if !(den.modulus() > POLE_THRESHOLD) {
                return Err(Error::domain(b.to_string(), "division by zero"));
            }
            num / den
        }
        Expr::Pow(a, k) => eval_point(a, x, t)?.powi(*k as i32),
        Expr::Call(f, a) => {
            let u = eval_point(a, x, t)?;
            match f {
                Func::Exp => u.exp(),
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Log => {
                    if !u.log_admissible() {
                        return Err(Error::domain(
                            e.to_string(),
                            "logarithm outside the positive branch",
                        ));
                    }
                    u.ln()
                }
            }
        }
    };
    if !v.is_finite() {
        return Err(Error::domain(e.to_string(), "non-finite value"));
    }
    Ok(v)
}

/// Evaluates with every state variable replaced by a jet. All seeds must
/// share dimension, degree and base point.
pub fn eval_jet<S: Scalar>(e: &Expr, seeds: &[Jet<S>], t: f64) -> Result<Jet<S>> {
    let proto = seeds
        .first()
        .ok_or_else(|| Error::invalid("jet evaluation needs at least one seed"))?;
    eval_jet_inner(e, seeds, proto, t)
}

fn eval_jet_inner<S: Scalar>(e: &Expr, seeds: &[Jet<S>], proto: &Jet<S>, t: f64) -> Result<Jet<S>> {
    let constant = |v: f64| Jet::constant(proto.base(), proto.degree(), S::from_f64(v));
    let out = match e {
        Expr::Num(v) => constant(*v),
        Expr::Time => constant(t),
        Expr::Var(i) => seeds
            .get(*i)
            .cloned()
            .ok_or_else(|| Error::Mismatch(format!("no seed for x{}", i + 1)))?,
        Expr::Add(a, b) => eval_jet_inner(a, seeds, proto, t)?.add(&eval_jet_inner(b, seeds, proto, t)?)?,
        Expr::Sub(a, b) => eval_jet_inner(a, seeds, proto, t)?.sub(&eval_jet_inner(b, seeds, proto, t)?)?,
        Expr::Mul(a, b) => {
            // constant factors are cheap to apply directly
            match (a.as_num(), b.as_num()) {
                (Some(c), _) => eval_jet_inner(b, seeds, proto, t)?.scale(S::from_f64(c)),
                (_, Some(c)) => eval_jet_inner(a, seeds, proto, t)?.scale(S::from_f64(c)),
                _ => eval_jet_inner(a, seeds, proto, t)?.mul(&eval_jet_inner(b, seeds, proto, t)?)?,
            }
        }
        Expr::Div(a, b) => {
            let num = eval_jet_inner(a, seeds, proto, t)?;
            let den = eval_jet_inner(b, seeds, proto, t)?;
            num.div(&den)
                .map_err(|_| Error::domain(b.to_string(), "division by zero"))?
        }
        Expr::Pow(a, k) => eval_jet_inner(a, seeds, proto, t)?.powi(*k),
        Expr::Call(f, a) => {
            let u = eval_jet_inner(a, seeds, proto, t)?;
            match f {
                Func::Exp => u.exp(),
                Func::Log => u
                    .ln()
                    .map_err(|_| Error::domain(e.to_string(), "logarithm outside the positive branch"))?,
                Func::Sin => u.sin_cos().0,
                Func::Cos => u.sin_cos().1,
            }
        }
    };
    if !out.coeffs().iter().all(|c| c.is_finite()) {
        return Err(Error::domain(e.to_string(), "non-finite Taylor coefficient"));
    }
    Ok(out)
}
