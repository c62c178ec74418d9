//! Truncated multivariate Taylor jets.
//!
//! A jet of degree `D` at `x0` stores the Taylor coefficients
//! `c_r = D^{(r)} f(x0) / (r)!` for `|r| <= D`, laid out in
//! graded-lexicographic order so that lower-degree layouts are prefixes of
//! higher-degree ones.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::multiindex::{count_multiindices, enumerate_multiindices, MultiIndex};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Index tables shared by every jet of a given `(N, D)`.
#[derive(Debug)]
pub struct JetLayout {
    n: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    orders: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
    /// `block_start[k]` is the first position of order `k`; has `D + 2` entries.
    block_start: Vec<usize>,
    pair_offsets: Vec<usize>,
    /// For each target `t`, all `(i, l)` with `r_i + r_l = r_t`.
    pairs: Vec<(u32, u32)>,
}

impl JetLayout {
    fn build(n: usize, degree: usize) -> Self {
        let indices = enumerate_multiindices(n, degree);
        let orders: Vec<usize> = indices.iter().map(MultiIndex::order).collect();
        let lookup: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        // count_multiindices(n, k-1) entries precede order k.
        let block_start: Vec<usize> = (0..=degree + 1)
            .map(|k| if k == 0 { 0 } else { count_multiindices(n, k - 1) })
            .collect();

        let mut pair_offsets = Vec::with_capacity(indices.len() + 1);
        let mut pairs = Vec::new();
        for target in &indices {
            pair_offsets.push(pairs.len());
            let mut sub = vec![0u32; n];
            loop {
                let left = MultiIndex::new(sub.clone());
                let right = target.checked_sub(&left).expect("sub-index");
                pairs.push((lookup[&left] as u32, lookup[&right] as u32));
                // odometer over 0..=target
                let mut pos = 0;
                loop {
                    if pos == n {
                        break;
                    }
                    if sub[pos] < target.entries()[pos] {
                        sub[pos] += 1;
                        break;
                    }
                    sub[pos] = 0;
                    pos += 1;
                }
                if pos == n {
                    break;
                }
            }
        }
        pair_offsets.push(pairs.len());

        JetLayout {
            n,
            degree,
            indices,
            orders,
            lookup,
            block_start,
            pair_offsets,
            pairs,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn order_of(&self, pos: usize) -> usize {
        self.orders[pos]
    }

    pub fn position(&self, r: &MultiIndex) -> Option<usize> {
        self.lookup.get(r).copied()
    }

    /// Positions of the order-`k` block.
    pub fn block(&self, k: usize) -> std::ops::Range<usize> {
        self.block_start[k]..self.block_start[k + 1]
    }

    fn pairs_of(&self, t: usize) -> &[(u32, u32)] {
        &self.pairs[self.pair_offsets[t]..self.pair_offsets[t + 1]]
    }
}

/// Shared layout for `(n, degree)`.
pub fn layout(n: usize, degree: usize) -> Arc<JetLayout> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(l) = cache.lock().expect("layout cache").get(&(n, degree)) {
        return l.clone();
    }
    let built = Arc::new(JetLayout::build(n, degree));
    cache
        .lock()
        .expect("layout cache")
        .entry((n, degree))
        .or_insert(built)
        .clone()
}

#[derive(Debug, Clone)]
pub struct Jet<S: Scalar = f64> {
    layout: Arc<JetLayout>,
    base: Vec<S>,
    coeffs: Vec<S>,
}

impl<S: Scalar> PartialEq for Jet<S> {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.degree() == other.degree()
            && self.base == other.base
            && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> Jet<S> {
    pub fn constant(base: &[S], degree: usize, value: S) -> Self {
        let layout = layout(base.len(), degree);
        let mut coeffs = vec![S::zero(); layout.len()];
        coeffs[0] = value;
        Jet {
            layout,
            base: base.to_vec(),
            coeffs,
        }
    }

    /// The coordinate function `x_i` expanded at `base`.
    pub fn variable(base: &[S], degree: usize, i: usize) -> Self {
        let mut j = Self::constant(base, degree, base[i]);
        if degree >= 1 {
            let pos = j
                .layout
                .position(&MultiIndex::unit(base.len(), i))
                .expect("unit index");
            j.coeffs[pos] = S::one();
        }
        j
    }

    /// Builds a jet from coefficients in layout order.
    pub fn from_coeffs(base: &[S], degree: usize, coeffs: Vec<S>) -> Result<Self> {
        let layout = layout(base.len(), degree);
        if coeffs.len() != layout.len() {
            return Err(Error::Mismatch(format!(
                "expected {} coefficients, got {}",
                layout.len(),
                coeffs.len()
            )));
        }
        Ok(Jet {
            layout,
            base: base.to_vec(),
            coeffs,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Jet {
            layout: self.layout.clone(),
            base: self.base.clone(),
            coeffs: vec![S::zero(); self.coeffs.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.n
    }

    pub fn degree(&self) -> usize {
        self.layout.degree
    }

    pub fn base(&self) -> &[S] {
        &self.base
    }

    pub fn layout(&self) -> &JetLayout {
        &self.layout
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn value(&self) -> S {
        self.coeffs[0]
    }

    pub fn coeff(&self, r: &MultiIndex) -> S {
        self.layout
            .position(r)
            .map(|p| self.coeffs[p])
            .unwrap_or_else(S::zero)
    }

    /// Raw partial derivative `D^{(r)} f(x0) = (r)! c_r`.
    pub fn derivative(&self, r: &MultiIndex) -> S {
        self.coeff(r) * S::from_f64(r.factorial())
    }

    pub fn truncate(&self, degree: usize) -> Self {
        if degree >= self.degree() {
            return self.clone();
        }
        let layout = layout(self.dim(), degree);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet {
            layout,
            base: self.base.clone(),
            coeffs,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Mismatch(format!(
                "jet dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        if self.base != other.base {
            return Err(Error::Mismatch("jets expanded at different base points".into()));
        }
        Ok(())
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        self.check_compatible(other)?;
        let d = self.degree().min(other.degree());
        Ok((self.truncate(d), other.truncate(d)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.aligned(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += *y;
        }
        Ok(a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.aligned(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= *y;
        }
        Ok(a)
    }

    pub fn scale(&self, s: S) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-S::one())
    }

    pub fn add_scalar(&self, s: S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Truncated product; the result has the smaller of the two degrees.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let mut out = a.zeros_like();
        for t in 0..out.coeffs.len() {
            let mut acc = S::zero();
            for &(i, l) in a.layout.pairs_of(t) {
                acc += a.coeffs[i as usize] * b.coeffs[l as usize];
            }
            out.coeffs[t] = acc;
        }
        Ok(out)
    }

    /// `self / other` by series inversion; requires `|other_0| > 1e-300`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let b0 = b.coeffs[0];
        if !(b0.modulus() > 1e-300) {
            return Err(Error::domain("/", "division by a series with zero constant term"));
        }
        let layout = a.layout.clone();
        let mut w = a.zeros_like();
        for t in 0..w.coeffs.len() {
            let mut acc = a.coeffs[t];
            for &(i, l) in layout.pairs_of(t) {
                if layout.orders[i as usize] >= 1 {
                    acc -= b.coeffs[i as usize] * w.coeffs[l as usize];
                }
            }
            w.coeffs[t] = acc / b0;
        }
        Ok(w)
    }

    pub fn exp(&self) -> Self {
        let layout = self.layout.clone();
        let mut v = self.zeros_like();
        v.coeffs[0] = self.coeffs[0].exp();
        for t in 1..v.coeffs.len() {
            let k = layout.orders[t] as f64;
            let mut acc = S::zero();
            for &(i, l) in layout.pairs_of(t) {
                let oi = layout.orders[i as usize];
                if oi >= 1 {
                    acc += S::from_f64(oi as f64) * self.coeffs[i as usize] * v.coeffs[l as usize];
                }
            }
            v.coeffs[t] = acc / S::from_f64(k);
        }
        v
    }

    pub fn ln(&self) -> Result<Self> {
        let u0 = self.coeffs[0];
        if !u0.log_admissible() {
            return Err(Error::domain("log", format!("argument {u0:?} outside the positive branch")));
        }
        let layout = self.layout.clone();
        let mut v = self.zeros_like();
        v.coeffs[0] = u0.ln();
        for t in 1..v.coeffs.len() {
            let k = layout.orders[t] as f64;
            let mut acc = S::from_f64(k) * self.coeffs[t];
            for &(i, l) in layout.pairs_of(t) {
                let oi = layout.orders[i as usize];
                let ol = layout.orders[l as usize];
                if oi >= 1 && ol >= 1 {
                    acc -= S::from_f64(ol as f64) * self.coeffs[i as usize] * v.coeffs[l as usize];
                }
            }
            v.coeffs[t] = acc / (S::from_f64(k) * u0);
        }
        Ok(v)
    }

    /// `(sin u, cos u)` computed jointly.
    pub fn sin_cos(&self) -> (Self, Self) {
        let layout = self.layout.clone();
        let mut s = self.zeros_like();
        let mut c = self.zeros_like();
        s.coeffs[0] = self.coeffs[0].sin();
        c.coeffs[0] = self.coeffs[0].cos();
        for t in 1..s.coeffs.len() {
            let k = S::from_f64(layout.orders[t] as f64);
            let mut acc_s = S::zero();
            let mut acc_c = S::zero();
            for &(i, l) in layout.pairs_of(t) {
                let oi = layout.orders[i as usize];
                if oi >= 1 {
                    let w = S::from_f64(oi as f64) * self.coeffs[i as usize];
                    acc_s += w * c.coeffs[l as usize];
                    acc_c -= w * s.coeffs[l as usize];
                }
            }
            s.coeffs[t] = acc_s / k;
            c.coeffs[t] = acc_c / k;
        }
        (s, c)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::constant(&self.base, self.degree(), S::one());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same layout");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same layout");
            }
        }
        result
    }

    /// `d/dx_i`; the degree drops by one.
    pub fn diff(&self, i: usize) -> Result<Self> {
        if i >= self.dim() {
            return Err(Error::Mismatch(format!("no variable x{} in dimension {}", i + 1, self.dim())));
        }
        if self.degree() == 0 {
            return Err(Error::DegreeBudget { needed: 1, available: 0 });
        }
        let target = layout(self.dim(), self.degree() - 1);
        let coeffs = target
            .indices
            .iter()
            .map(|r| {
                let up = r.with_incremented(i);
                let pos = self.layout.position(&up).expect("index within degree");
                self.coeffs[pos] * S::from_f64((r.entries()[i] + 1) as f64)
            })
            .collect();
        Ok(Jet {
            layout: target,
            base: self.base.clone(),
            coeffs,
        })
    }

    /// Antiderivative in `x_i` vanishing on `x_i = x0_i`; degree rises by one.
    pub fn integrate(&self, i: usize) -> Result<Self> {
        if i >= self.dim() {
            return Err(Error::Mismatch(format!("no variable x{} in dimension {}", i + 1, self.dim())));
        }
        let target = layout(self.dim(), self.degree() + 1);
        let coeffs = target
            .indices
            .iter()
            .map(|r| {
                let e = r.entries()[i];
                if e == 0 {
                    return S::zero();
                }
                let mut down = r.entries().to_vec();
                down[i] -= 1;
                let pos = self.layout.position(&MultiIndex::new(down)).expect("index");
                self.coeffs[pos] / S::from_f64(e as f64)
            })
            .collect();
        Ok(Jet {
            layout: target,
            base: self.base.clone(),
            coeffs,
        })
    }

    /// Evaluates the truncated polynomial at `x0 + dx`.
    pub fn eval(&self, dx: &[S]) -> Result<S> {
        if dx.len() != self.dim() {
            return Err(Error::Mismatch(format!(
                "displacement has {} entries, jet dimension {}",
                dx.len(),
                self.dim()
            )));
        }
        // powers[i][e] = dx_i^e
        let powers: Vec<Vec<S>> = dx
            .iter()
            .map(|&d| {
                let mut p = Vec::with_capacity(self.degree() + 1);
                let mut acc = S::one();
                for _ in 0..=self.degree() {
                    p.push(acc);
                    acc *= d;
                }
                p
            })
            .collect();
        let mut sum = S::zero();
        // highest order first for a little less cancellation
        for pos in (0..self.coeffs.len()).rev() {
            let c = self.coeffs[pos];
            if c == S::zero() {
                continue;
            }
            let mut term = c;
            for (i, &e) in self.layout.indices[pos].entries().iter().enumerate() {
                if e > 0 {
                    term *= powers[i][e as usize];
                }
            }
            sum += term;
        }
        Ok(sum)
    }

    /// Largest coefficient modulus in each order block.
    pub fn block_max(&self) -> Vec<f64> {
        (0..=self.degree())
            .map(|k| {
                self.layout
                    .block(k)
                    .map(|p| self.coeffs[p].modulus())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn poly1(coeffs: &[f64], degree: usize) -> Jet {
        let mut c = vec![0.0; degree + 1];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet::from_coeffs(&[0.0], degree, c).unwrap()
    }

    #[test]
    fn layout_sizes() {
        for n in 1..=3 {
            for d in 0..=6 {
                let l = layout(n, d);
                assert_eq!(l.len(), count_multiindices(n, d));
                for k in 0..=d {
                    assert!(l.block(k).all(|p| l.order_of(p) == k));
                }
            }
        }
    }

    #[test]
    fn product_of_conjugates() {
        let a = poly1(&[1.0, 1.0], 2);
        let b = poly1(&[1.0, -1.0], 2);
        assert_eq!(a.mul(&b).unwrap().coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn derivative_of_square() {
        let x2 = poly1(&[0.0, 0.0, 1.0], 2);
        assert_eq!(x2.diff(0).unwrap().coeffs(), &[0.0, 2.0]);
    }

    #[test]
    fn exp_series_evaluation() {
        let x = Jet::variable(&[0.0], 10, 0);
        let e = x.exp();
        let v = e.eval(&[0.1]).unwrap();
        // exp(0.1) with the order-10 tail bounded by 0.1^11/11! * e^0.1 < 3e-19
        assert!((v - 0.1f64.exp()).abs() < 1e-12);
        assert_relative_eq!(e.coeffs()[3], 1.0 / 6.0, max_relative = 1e-15);
    }

    #[test]
    fn eval_at_base_returns_constant() {
        let j = Jet::variable(&[0.3, -0.2], 4, 1).exp();
        assert_eq!(j.eval(&[0.0, 0.0]).unwrap(), j.value());
    }

    #[test]
    fn mismatched_base_points() {
        let a = Jet::variable(&[0.0], 3, 0);
        let b = Jet::variable(&[1.0], 3, 0);
        assert!(matches!(a.mul(&b), Err(Error::Mismatch(_))));
    }

    #[test]
    fn division_pivot() {
        let x = Jet::variable(&[0.0], 3, 0);
        let one = Jet::constant(&[0.0], 3, 1.0);
        assert!(one.div(&x).is_err());
        let r = one.div(&x.add_scalar(1.0)).unwrap();
        assert_relative_eq!(r.coeffs()[3], -1.0);
    }

    #[test]
    fn log_and_trig_match_known_series() {
        let x = Jet::variable(&[0.0], 5, 0);
        let l = x.add_scalar(1.0).ln().unwrap();
        let expected = [0.0, 1.0, -0.5, 1.0 / 3.0, -0.25, 0.2];
        for (c, e) in l.coeffs().iter().zip(expected) {
            assert_relative_eq!(*c, e, epsilon = 1e-15);
        }
        let (s, c) = x.sin_cos();
        assert_relative_eq!(s.coeffs()[3], -1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(c.coeffs()[4], 1.0 / 24.0, epsilon = 1e-15);
        assert!(Jet::variable(&[-1.0], 3, 0).ln().is_err());
    }

    #[test]
    fn multivariate_exp_matches_product() {
        // exp(x + y) = exp(x) exp(y)
        let base = [0.2, -0.4];
        let x = Jet::variable(&base, 6, 0);
        let y = Jet::variable(&base, 6, 1);
        let lhs = x.add(&y).unwrap().exp();
        let rhs = x.exp().mul(&y.exp()).unwrap();
        for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-13);
        }
    }

    #[test]
    fn integrate_inverts_diff() {
        let base = [0.5, 1.0];
        let x = Jet::variable(&base, 5, 0);
        let y = Jet::variable(&base, 5, 1);
        let f = x.mul(&y).unwrap().exp();
        let back = f.diff(0).unwrap().integrate(0).unwrap();
        for (pos, r) in back.layout().indices().iter().enumerate() {
            if r.entries()[0] > 0 {
                assert_relative_eq!(back.coeffs()[pos], f.coeff(r), max_relative = 1e-13);
            }
        }
    }

    fn random_jet(coeffs: Vec<f64>, n: usize, d: usize) -> Jet {
        let base = vec![0.0; n];
        let len = count_multiindices(n, d);
        Jet::from_coeffs(&base, d, coeffs[..len].to_vec()).unwrap()
    }

    fn close(a: &Jet, b: &Jet) -> bool {
        a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| {
            let scale = 1.0f64.max(x.abs()).max(y.abs());
            (x - y).abs() <= 1e-12 * scale * 10.0
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn ring_axioms(
            n in 1usize..=2,
            d in 0usize..=10,
            ca in proptest::collection::vec(-1.0f64..1.0, 66),
            cb in proptest::collection::vec(-1.0f64..1.0, 66),
            cc in proptest::collection::vec(-1.0f64..1.0, 66),
        ) {
            let a = random_jet(ca, n, d);
            let b = random_jet(cb, n, d);
            let c = random_jet(cc, n, d);
            prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
            prop_assert!(close(&a.mul(&b).unwrap().mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()));
            prop_assert!(close(
                &a.mul(&b.add(&c).unwrap()).unwrap(),
                &a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            ));
        }

        #[test]
        fn leibniz_rule(
            d in 1usize..=8,
            ca in proptest::collection::vec(-1.0f64..1.0, 45),
            cb in proptest::collection::vec(-1.0f64..1.0, 45),
            i in 0usize..2,
        ) {
            let f = random_jet(ca, 2, d);
            let g = random_jet(cb, 2, d);
            let lhs = f.mul(&g).unwrap().diff(i).unwrap();
            let rhs = f.diff(i).unwrap().mul(&g).unwrap()
                .add(&f.mul(&g.diff(i).unwrap()).unwrap()).unwrap();
            prop_assert!(close(&lhs, &rhs));
        }
    }
}
