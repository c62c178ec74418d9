//! Decreasing weight sequences and their lifted variants.
//!
//! A weight sequence `a = (a_0, a_1, ...)` with `0 < a_m <= d` parameterizes
//! the analytic seminorms through the order-`k` weight
//! `a_0 a_1 ... a_k / k!`. The lifts `a_n` and `b_n` are the sequences that
//! appear when a vector field acts on a function.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the order-zero weight is read from the product `a_0 a_1 ... a_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightConvention {
    /// `k = 0` contributes the single factor `a_0`.
    IncludeA0,
    /// The product starts at `a_1`; the order-zero weight is 1.
    OmitA0,
}

pub const WEIGHT_CONVENTION: WeightConvention = WeightConvention::IncludeA0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `a_m = scale * ratio^m`
    Geometric { scale: f64, ratio: f64 },
    /// `a_m = scale / (m + 1)`
    Harmonic { scale: f64 },
    /// Explicit values; beyond the last entry the final value is repeated.
    Explicit { values: Vec<f64> },
    LiftA { base: Box<WeightSequence>, n: u32 },
    LiftB { base: Box<WeightSequence>, n: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub bound: f64,
    pub generator: Generator,
    pub max_order: usize,
}

impl WeightSequence {
    /// `a_m = d * ratio^m`, requires `0 < ratio < 1`.
    pub fn geometric(d: f64, ratio: f64, max_order: usize) -> Result<Self> {
        if !(d > 0.0) || !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::invalid(format!(
                "geometric weights need d > 0 and 0 < ratio < 1 (got d={d}, ratio={ratio})"
            )));
        }
        Ok(WeightSequence {
            bound: d,
            generator: Generator::Geometric { scale: d, ratio },
            max_order,
        })
    }

    pub fn harmonic(d: f64, max_order: usize) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::invalid("harmonic weights need d > 0"));
        }
        Ok(WeightSequence {
            bound: d,
            generator: Generator::Harmonic { scale: d },
            max_order,
        })
    }

    pub fn explicit(values: Vec<f64>, max_order: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("explicit weights need at least one value"));
        }
        let bound = values.iter().cloned().fold(0.0, f64::max);
        let seq = WeightSequence {
            bound,
            generator: Generator::Explicit { values },
            max_order,
        };
        seq.validate()?;
        Ok(seq)
    }

    /// `a_m` for any `m`, ignoring the truncation horizon.
    pub fn term(&self, m: usize) -> f64 {
        match &self.generator {
            Generator::Geometric { scale, ratio } => scale * ratio.powi(m as i32),
            Generator::Harmonic { scale } => scale / (m as f64 + 1.0),
            Generator::Explicit { values } => values[m.min(values.len() - 1)],
            Generator::LiftA { base, n } => {
                if m == 0 {
                    return base.term(0);
                }
                let factor = (m as f64 + 1.0) / m as f64;
                let exponent = if m > *n as usize { *n as i32 } else { m as i32 };
                factor.powi(exponent) * base.term(m)
            }
            Generator::LiftB { base, n } => {
                let lifted = lift_a(base, *n as usize).term(m);
                if m <= 1 {
                    lifted
                } else {
                    let m = m as f64;
                    (m + 1.0) * (m + 2.0) / ((m - 1.0) * m) * lifted
                }
            }
        }
    }

    pub fn terms(&self, upto: usize) -> Vec<f64> {
        (0..=upto).map(|m| self.term(m)).collect()
    }

    /// Largest term over `0..=max_order`.
    pub fn sup(&self) -> f64 {
        (0..=self.max_order).map(|m| self.term(m)).fold(0.0, f64::max)
    }

    /// Checks positivity, monotonicity and the bound up to the horizon.
    pub fn validate(&self) -> Result<()> {
        let mut prev = f64::INFINITY;
        for m in 0..=self.max_order {
            let a = self.term(m);
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::invalid(format!("weight a_{m} = {a} is not positive")));
            }
            if a > prev * (1.0 + 1e-15) {
                return Err(Error::invalid(format!("weights increase at m = {m}")));
            }
            if a > self.bound * (1.0 + 1e-15) {
                return Err(Error::invalid(format!("a_{m} = {a} exceeds bound {}", self.bound)));
            }
            prev = a;
        }
        Ok(())
    }

    /// `a_0 a_1 ... a_k / k!`, errors past the horizon.
    pub fn weight(&self, k: usize) -> Result<f64> {
        self.weight_with(k, WEIGHT_CONVENTION)
    }

    pub fn weight_with(&self, k: usize, convention: WeightConvention) -> Result<f64> {
        if k > self.max_order {
            return Err(Error::HorizonExceeded {
                order: k,
                horizon: self.max_order,
            });
        }
        Ok(self.log_weight_with(k, convention).exp())
    }

    /// `ln(a_0 ... a_k / k!)` without the horizon check; stays finite where
    /// the product itself would underflow.
    pub fn log_weight(&self, k: usize) -> f64 {
        self.log_weight_with(k, WEIGHT_CONVENTION)
    }

    fn log_weight_with(&self, k: usize, convention: WeightConvention) -> f64 {
        let start = match convention {
            WeightConvention::IncludeA0 => 0,
            WeightConvention::OmitA0 => 1,
        };
        let mut acc = 0.0;
        for j in start..=k {
            acc += self.term(j).ln();
        }
        for j in 2..=k {
            acc -= (j as f64).ln();
        }
        acc
    }

    /// Weights for orders `0..=upto` (unchecked horizon).
    pub fn weights(&self, upto: usize) -> Vec<f64> {
        (0..=upto).map(|k| self.log_weight(k).exp()).collect()
    }
}

/// The lifted sequence `a_n`: `a_{n,m} = ((m+1)/m)^min(n,m) a_m`, with the
/// `m = 0` factor taken as 1. Bounded by `e * d`.
pub fn lift_a(a: &WeightSequence, n: usize) -> WeightSequence {
    WeightSequence {
        bound: E * a.bound,
        generator: Generator::LiftA {
            base: Box::new(a.clone()),
            n: n as u32,
        },
        max_order: a.max_order,
    }
}

/// The lifted sequence `b_n`: equal to `a_n` at `m in {0, 1}` and
/// `(m+1)(m+2)/((m-1)m) a_{n,m}` beyond. Bounded by `6 e d`.
pub fn lift_b(a: &WeightSequence, n: usize) -> WeightSequence {
    WeightSequence {
        bound: 6.0 * E * a.bound,
        generator: Generator::LiftB {
            base: Box::new(a.clone()),
            n: n as u32,
        },
        max_order: a.max_order,
    }
}
