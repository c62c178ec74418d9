//! Multi-indices and their combinatorics.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A tuple of non-negative exponents, one per state variable.
///
/// Ordering is graded-lexicographic: lower total order first, then
/// lexicographically *descending* entries, so `(1,0)` precedes `(0,1)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit index `e_i` in dimension `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|r|`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `(r)! = r_1! r_2! ... r_N!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `binom((r), (s)) = prod_i binom(r_i, s_i)`; zero unless `s <= r`.
    pub fn binomial(&self, s: &MultiIndex) -> f64 {
        if !s.le(self) {
            return 0.0;
        }
        self.0
            .iter()
            .zip(&s.0)
            .map(|(&r, &s)| binomial(r as usize, s as usize))
            .product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` when some entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn with_incremented(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// `x^{(r)}` for a real point.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All multi-indices of dimension `n` with `|r| <= max_order`, in
/// graded-lexicographic order.
pub fn enumerate_multiindices(n: usize, max_order: usize) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be at least 1");
    let mut out = Vec::with_capacity(count_multiindices(n, max_order));
    for k in 0..=max_order {
        let mut buf = vec![0u32; n];
        fill_homogeneous(&mut buf, 0, k as u32, &mut out);
    }
    out
}

/// Multi-indices of exact order `k`, descending lexicographic.
pub fn homogeneous_multiindices(n: usize, k: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut buf = vec![0u32; n];
    fill_homogeneous(&mut buf, 0, k as u32, &mut out);
    out
}

fn fill_homogeneous(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        buf[pos] = e;
        fill_homogeneous(buf, pos + 1, remaining - e, out);
    }
    buf[pos] = 0;
}

/// `binom(n + D, D)`, the number of multi-indices with `|r| <= D`.
pub fn count_multiindices(n: usize, max_order: usize) -> usize {
    binomial(n + max_order, max_order).round() as usize
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(n: usize, d: usize) -> Vec<MultiIndex> {
        let mut all = Vec::new();
        let total = (d + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push((c % (d + 1)) as u32);
                c /= d + 1;
            }
            let mi = MultiIndex::new(v);
            if mi.order() <= d {
                all.push(mi);
            }
        }
        all.sort();
        all
    }

    #[test]
    fn one_dimensional() {
        let v = enumerate_multiindices(1, 2);
        assert_eq!(
            v,
            vec![
                MultiIndex::new(vec![0]),
                MultiIndex::new(vec![1]),
                MultiIndex::new(vec![2])
            ]
        );
    }

    #[test]
    fn two_dimensional_order_one() {
        let v = enumerate_multiindices(2, 1);
        let e: Vec<Vec<u32>> = v.iter().map(|m| m.entries().to_vec()).collect();
        assert_eq!(e, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn count_matches_brute_force() {
        let v = enumerate_multiindices(3, 4);
        let b = brute_force(3, 4);
        assert_eq!(b.len(), 35);
        assert_eq!(v.len(), 35);
        assert_eq!(v, b);
        assert_eq!(count_multiindices(3, 4), 35);
    }

    #[test]
    fn enumeration_is_sorted_and_unique() {
        for n in 1..=4 {
            for d in 0..=5 {
                let v = enumerate_multiindices(n, d);
                assert!(v.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(v, brute_force(n, d));
            }
        }
    }

    #[test]
    fn factorial_and_binomial() {
        let r = MultiIndex::new(vec![2, 3]);
        assert_eq!(r.order(), 5);
        assert_eq!(r.factorial(), 12.0);
        let s = MultiIndex::new(vec![1, 1]);
        assert!(s.le(&r));
        assert_eq!(r.binomial(&s), 6.0);
        assert_eq!(s.binomial(&r), 0.0);
        assert_eq!(MultiIndex::zero(3).factorial(), 1.0);
    }
}
