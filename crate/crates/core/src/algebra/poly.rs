//! Sparse multivariate polynomials over a coefficient ring.
//!
//! `Poly<f64>` is the numeric symbolic backend; `Poly<BigRational>` gives
//! exact comparisons between independently computed series.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::multiindex::MultiIndex;
use crate::error::{Error, Result};

pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    /// Exact for rationals (binary expansion of the double).
    fn from_f64(v: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
}

impl Coeff for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Option<Self> {
        Some(v)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }
    fn to_f64(&self) -> f64 {
        if let Some(v) = ToPrimitive::to_f64(self) {
            return v;
        }
        // fall back for huge numerators/denominators
        let n = self.numer().to_f64().unwrap_or(f64::NAN);
        let d = self.denom().to_f64().unwrap_or(f64::NAN);
        if self.is_negative() {
            -(n.abs() / d)
        } else {
            n / d
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly<C: Coeff = f64> {
    n: usize,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero(n: usize) -> Self {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C) -> Self {
        let mut p = Self::zero(n);
        p.insert(MultiIndex::zero(n), c);
        p
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.insert(MultiIndex::unit(n, i), C::one());
        p
    }

    pub fn monomial(r: MultiIndex, c: C) -> Self {
        let mut p = Self::zero(r.dim());
        p.insert(r, c);
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Self {
        let mut p = Self::zero(n);
        for (r, c) in terms {
            assert_eq!(r.dim(), n, "multi-index dimension");
            let cur = p.terms.remove(&r).unwrap_or_else(C::zero);
            p.insert(r, cur + c);
        }
        p
    }

    fn insert(&mut self, r: MultiIndex, c: C) {
        if !c.is_zero() {
            self.terms.insert(r, c);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, r: &MultiIndex) -> C {
        self.terms.get(r).cloned().unwrap_or_else(C::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, c) in &other.terms {
            let cur = out.terms.remove(r).unwrap_or_else(C::zero);
            out.insert(r.clone(), cur + c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.n);
        for (r, c) in &self.terms {
            out.insert(r.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (ra, ca) in &self.terms {
            for (rb, cb) in &other.terms {
                let r = ra.add(rb);
                let prod = ca.clone() * cb.clone();
                match acc.get_mut(&r) {
                    Some(v) => *v = v.clone() + prod,
                    None => {
                        acc.insert(r, prod);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Poly { n: self.n, terms: acc }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut result = Self::constant(self.n, C::one());
        for _ in 0..e {
            result = result.mul(self);
        }
        result
    }

    pub fn diff(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (r, c) in &self.terms {
            let e = r.entries()[i];
            if e == 0 {
                continue;
            }
            let mut down = r.entries().to_vec();
            down[i] -= 1;
            out.insert(MultiIndex::new(down), c.clone() * C::from_i64(e as i64));
        }
        out
    }

    /// Antiderivative in `x_i` vanishing at `x_i = 0`.
    pub fn integrate(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (r, c) in &self.terms {
            let mut up = r.entries().to_vec();
            up[i] += 1;
            let e = up[i] as i64;
            out.insert(MultiIndex::new(up), c.clone() / C::from_i64(e));
        }
        out
    }

    /// Substitutes `x_i = value`, keeping the dimension.
    pub fn substitute(&self, i: usize, value: &C) -> Self {
        let mut out = Self::zero(self.n);
        for (r, c) in &self.terms {
            let e = r.entries()[i];
            let mut v = c.clone();
            for _ in 0..e {
                v = v * value.clone();
            }
            let mut down = r.entries().to_vec();
            down[i] = 0;
            let key = MultiIndex::new(down);
            let cur = out.terms.remove(&key).unwrap_or_else(C::zero);
            out.insert(key, cur + v);
        }
        out
    }

    /// Embeds into a space with `extra` trailing variables.
    pub fn extend_dim(&self, extra: usize) -> Self {
        let n = self.n + extra;
        let mut out = Self::zero(n);
        for (r, c) in &self.terms {
            let mut e = r.entries().to_vec();
            e.extend(std::iter::repeat(0).take(extra));
            out.insert(MultiIndex::new(e), c.clone());
        }
        out
    }

    /// Drops trailing variables that no term uses.
    pub fn shrink_dim(&self, n: usize) -> Result<Self> {
        let mut out = Self::zero(n);
        for (r, c) in &self.terms {
            if r.entries()[n..].iter().any(|&e| e > 0) {
                return Err(Error::Mismatch("polynomial still depends on dropped variables".into()));
            }
            out.insert(MultiIndex::new(r.entries()[..n].to_vec()), c.clone());
        }
        Ok(out)
    }

    /// Terms of total order at most `d`.
    pub fn truncate(&self, d: usize) -> Self {
        Poly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(r, _)| r.order() <= d)
                .map(|(r, c)| (r.clone(), c.clone()))
                .collect(),
        }
    }

    /// Degree truncation restricted to one variable.
    pub fn truncate_in(&self, i: usize, d: usize) -> Self {
        Poly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(r, _)| (r.entries()[i] as usize) <= d)
                .map(|(r, c)| (r.clone(), c.clone()))
                .collect(),
        }
    }

    /// `X(f) = sum_i X^i df/dx_i`.
    pub fn apply_derivation(&self, field: &[Poly<C>]) -> Result<Self> {
        if field.len() > self.n {
            return Err(Error::Mismatch(format!(
                "field has {} components, polynomial dimension {}",
                field.len(),
                self.n
            )));
        }
        let mut out = Self::zero(self.n);
        for (i, xi) in field.iter().enumerate() {
            if xi.dim() != self.n {
                return Err(Error::Mismatch("field component dimension".into()));
            }
            if xi.is_zero() {
                continue;
            }
            let d = self.diff(i);
            if !d.is_zero() {
                out = out.add(&xi.mul(&d));
            }
        }
        Ok(out)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::<D>::zero(self.n);
        for (r, c) in &self.terms {
            out.insert(r.clone(), f(c));
        }
        out
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(r, c)| c.to_f64() * r.monomial(x))
            .sum()
    }

    pub fn eval_complex(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, c) in &self.terms {
            let mut m = Complex64::new(c.to_f64(), 0.0);
            for (zi, &e) in z.iter().zip(r.entries()) {
                if e > 0 {
                    m *= zi.powi(e as i32);
                }
            }
            acc += m;
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl Poly<f64> {
    /// Exact conversion of every coefficient.
    pub fn to_rational(&self) -> Result<Poly<BigRational>> {
        let mut out = Poly::<BigRational>::zero(self.n);
        for (r, c) in &self.terms {
            let q = BigRational::from_float(*c)
                .ok_or_else(|| Error::invalid(format!("coefficient {c} is not finite")))?;
            out.insert(r.clone(), q);
        }
        Ok(out)
    }
}
