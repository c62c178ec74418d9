use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Expression;
use crate::algebra::{Jet, Poly};
use crate::error::{Error, Result};

/// A vector field `X = Σ X^i ∂/∂x^i` with closed-form components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField")]
pub struct VectorField {
    pub dim: usize,
    pub components: Vec<Expression>,
    #[serde(default)]
    pub label: String,
}

#[derive(Deserialize)]
struct RawField {
    components: Vec<String>,
    #[serde(default)]
    label: String,
}

impl TryFrom<RawField> for VectorField {
    type Error = Error;

    fn try_from(raw: RawField) -> Result<Self> {
        let texts: Vec<&str> = raw.components.iter().map(String::as_str).collect();
        Ok(VectorField::parse(&texts)?.with_label(raw.label))
    }
}

impl VectorField {
    pub fn new(components: Vec<Expression>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::invalid("vector field needs at least one component"));
        }
        if components.iter().any(|c| c.dim() > dim) {
            return Err(Error::Mismatch("component uses more variables than the field dimension".into()));
        }
        let components = components
            .into_iter()
            .map(|c| Expression::from_ast(c.ast().clone(), dim))
            .collect::<Result<_>>()?;
        Ok(VectorField {
            dim,
            components,
            label: String::new(),
        })
    }

    pub fn parse(texts: &[&str]) -> Result<Self> {
        let dim = texts.len();
        let components = texts
            .iter()
            .map(|s| Expression::parse(s, dim))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(components)
    }

    pub fn zero(dim: usize) -> Self {
        VectorField {
            dim,
            components: vec![Expression::constant(dim, 0.0); dim],
            label: String::new(),
        }
    }

    pub fn from_polys(polys: &[Poly<f64>]) -> Result<Self> {
        VectorField::new(polys.iter().map(Expression::from_poly).collect())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Expression::is_zero)
    }

    pub fn depends_on_time(&self) -> bool {
        self.components.iter().any(Expression::depends_on_time)
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval_real(x, t)).collect()
    }

    pub fn eval_complex(&self, z: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        self.components.iter().map(|c| c.eval_complex(z, t)).collect()
    }

    pub fn jets(&self, x0: &[f64], t: f64, degree: usize) -> Result<Vec<Jet<f64>>> {
        self.components.iter().map(|c| c.jet_at(x0, t, degree)).collect()
    }

    pub fn freeze_time(&self, t: f64) -> VectorField {
        VectorField {
            dim: self.dim,
            components: self.components.iter().map(|c| c.freeze_time(t)).collect(),
            label: self.label.clone(),
        }
    }

    /// Polynomial components at time `t`, if every component is polynomial.
    pub fn to_polys(&self, t: f64) -> Option<Vec<Poly<f64>>> {
        self.components.iter().map(|c| c.to_poly(t)).collect()
    }

    /// `self + c·other`, componentwise.
    pub fn add_scaled(&self, other: &VectorField, c: f64) -> Result<VectorField> {
        if other.dim != self.dim {
            return Err(Error::Mismatch(format!(
                "cannot add fields of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| if c == 0.0 { a.clone() } else { a.add(&b.scale(c)) })
            .collect();
        Ok(VectorField {
            dim: self.dim,
            components,
            label: self.label.clone(),
        })
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField {
            dim: self.dim,
            components: self.components.iter().map(|e| e.scale(c)).collect(),
            label: self.label.clone(),
        }
    }

    /// `X̂f = Σ X^i ∂f/∂x^i`, exact and symbolic. Time stays symbolic.
    pub fn apply(&self, f: &Expression) -> Result<Expression> {
        if f.dim() != self.dim {
            return Err(Error::Mismatch(format!(
                "observable dimension {} differs from field dimension {}",
                f.dim(),
                self.dim
            )));
        }
        let mut acc = Expression::constant(self.dim, 0.0);
        for (i, xi) in self.components.iter().enumerate() {
            let df = f.derivative(i);
            if xi.is_zero() || df.is_zero() {
                continue;
            }
            acc = acc.add(&xi.mul(&df));
        }
        Ok(acc)
    }

    /// Jet form of `X̂f` at the base point of `f`, at time `t`. The result has
    /// one degree less than `f`.
    pub fn apply_jet(&self, f: &Jet<f64>, t: f64) -> Result<Jet<f64>> {
        if f.dim() != self.dim {
            return Err(Error::Mismatch("jet dimension differs from field dimension".into()));
        }
        if f.degree() == 0 {
            return Err(Error::DegreeBudget {
                needed: 1,
                available: 0,
            });
        }
        let out_degree = f.degree() - 1;
        let xs = self.jets(f.base(), t, out_degree)?;
        let mut acc = Jet::constant(f.base(), out_degree, 0.0);
        for (i, xi) in xs.iter().enumerate() {
            acc = acc.add(&xi.mul(&f.diff(i)?)?)?;
        }
        Ok(acc)
    }

    /// Polynomial form of `X̂` acting on a polynomial observable at time `t`.
    pub fn apply_poly(&self, f: &Poly<f64>, t: f64) -> Result<Poly<f64>> {
        let polys = self
            .to_polys(t)
            .ok_or_else(|| Error::invalid("field is not polynomial"))?;
        f.apply_derivation(&polys)
    }
}

impl std::fmt::Display for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, n: usize, deg: usize) -> Poly<f64> {
        let mut terms = Vec::new();
        for r in crate::algebra::enumerate_multiindices(n, deg) {
            if rng.gen_bool(0.5) {
                terms.push((r, rng.gen_range(-3i32..=3) as f64));
            }
        }
        Poly::from_terms(n, terms)
    }

    #[test]
    fn euler_field_on_linear_function() {
        let x = VectorField::parse(&["x1"]).unwrap();
        let f = Expression::parse("x1", 1).unwrap();
        assert_eq!(x.apply(&f).unwrap().to_string(), "x1");
    }

    #[test]
    fn quadratic_field_iterates() {
        let x = VectorField::parse(&["1*x1^2"]).unwrap();
        let f = Expression::parse("x1", 1).unwrap();
        let once = x.apply(&f).unwrap();
        let twice = x.apply(&once).unwrap();
        let p1 = once.to_poly(0.0).unwrap();
        let p2 = twice.to_poly(0.0).unwrap();
        assert_eq!(p1, Poly::monomial(MultiIndex::new(vec![2]), 1.0));
        assert_eq!(p2, Poly::monomial(MultiIndex::new(vec![3]), 2.0));
    }

    #[test]
    fn leibniz_expression_backend() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..200 {
            let n = 1 + case % 3;
            let field: Vec<_> = (0..n).map(|_| random_poly(&mut rng, n, 3)).collect();
            let x = VectorField::from_polys(&field).unwrap();
            let f = random_poly(&mut rng, n, 3);
            let g = random_poly(&mut rng, n, 3);
            let fe = Expression::from_poly(&f);
            let ge = Expression::from_poly(&g);
            let lhs = x.apply(&fe.mul(&ge)).unwrap().to_poly(0.0).unwrap();
            let xf = x.apply(&fe).unwrap().to_poly(0.0).unwrap();
            let xg = x.apply(&ge).unwrap().to_poly(0.0).unwrap();
            let rhs = xf.mul(&g).add(&f.mul(&xg));
            assert_eq!(lhs, rhs, "case {case}");
        }
    }

    #[test]
    fn leibniz_jet_backend() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..200 {
            let n = 1 + case % 3;
            let field: Vec<_> = (0..n).map(|_| random_poly(&mut rng, n, 3)).collect();
            let x = VectorField::from_polys(&field).unwrap();
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = Expression::from_poly(&random_poly(&mut rng, n, 3)).jet_at(&x0, 0.0, 6).unwrap();
            let g = Expression::from_poly(&random_poly(&mut rng, n, 3)).jet_at(&x0, 0.0, 6).unwrap();
            let lhs = x.apply_jet(&f.mul(&g).unwrap(), 0.0).unwrap();
            let rhs = x
                .apply_jet(&f, 0.0)
                .unwrap()
                .mul(&g.truncate(5))
                .unwrap()
                .add(&f.truncate(5).mul(&x.apply_jet(&g, 0.0).unwrap()).unwrap())
                .unwrap();
            let scale = lhs.coeffs().iter().chain(rhs.coeffs()).fold(1.0f64, |m, c| m.max(c.abs()));
            for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                assert!((a - b).abs() <= 1e-10 * scale, "case {case}");
            }
        }
    }

    #[test]
    fn jet_backend_matches_expression_backend() {
        let x = VectorField::parse(&["sin(x2)", "x1*exp(x2)"]).unwrap();
        let f = Expression::parse("x1^2*cos(x2)", 2).unwrap();
        let x0 = [0.3, 0.1];
        let jet = x.apply_jet(&f.jet_at(&x0, 0.0, 4).unwrap(), 0.0).unwrap();
        let sym = x.apply(&f).unwrap().jet_at(&x0, 0.0, 3).unwrap();
        for (a, b) in jet.coeffs().iter().zip(sym.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_budget() {
        let x = VectorField::parse(&["x1"]).unwrap();
        let f = Expression::parse("x1", 1).unwrap().jet_at(&[0.0], 0.0, 0).unwrap();
        assert!(matches!(x.apply_jet(&f, 0.0), Err(Error::DegreeBudget { .. })));
    }

    #[test]
    fn serde_shape() {
        let x = VectorField::parse(&["x2", "0 - x1"]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let back: VectorField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }
}
