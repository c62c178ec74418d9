//! Compact boxes in R^N and the complex polydisc neighbourhoods around them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 33;

/// Axis-aligned box `Π [lo_i, hi_i]` with a uniform sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Samples per axis (degenerate axes always use one).
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

impl CompactBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let b = CompactBox {
            lo,
            hi,
            grid: DEFAULT_GRID,
        };
        b.validate()?;
        Ok(b)
    }

    /// The cube `[-r, r]^n`.
    pub fn symmetric(n: usize, r: f64) -> Result<Self> {
        CompactBox::new(vec![-r; n], vec![r; n])
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        CompactBox::new(vec![lo], vec![hi])
    }

    pub fn point(x: &[f64]) -> Result<Self> {
        CompactBox::new(x.to_vec(), x.to_vec())
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return Err(Error::invalid("box bounds must be nonempty and of equal length"));
        }
        for (l, h) in self.lo.iter().zip(&self.hi) {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::invalid(format!("invalid box axis [{l}, {h}]")));
            }
        }
        if self.grid == 0 {
            return Err(Error::invalid("grid resolution must be positive"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(i, v)| *v >= self.lo[i] && *v <= self.hi[i])
    }

    pub fn contains_box(&self, other: &CompactBox) -> bool {
        (0..self.dim()).all(|i| other.lo[i] >= self.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Box grown by `delta` on every side.
    pub fn inflate(&self, delta: f64) -> CompactBox {
        CompactBox {
            lo: self.lo.iter().map(|l| l - delta).collect(),
            hi: self.hi.iter().map(|h| h + delta).collect(),
            grid: self.grid,
        }
    }

    /// Largest coordinate modulus over the box.
    pub fn max_abs(&self) -> f64 {
        self.lo
            .iter()
            .chain(&self.hi)
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn axis_samples(&self, i: usize) -> Vec<f64> {
        let (l, h) = (self.lo[i], self.hi[i]);
        if l == h || self.grid == 1 {
            return vec![if self.grid == 1 { 0.5 * (l + h) } else { l }];
        }
        let g = self.grid;
        (0..g)
            .map(|k| if k == g - 1 { h } else { l + (h - l) * k as f64 / (g - 1) as f64 })
            .collect()
    }

    /// All grid points, first axis varying slowest.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|i| self.axis_samples(i)).collect();
        cartesian(&axes)
    }
}

pub(crate) fn cartesian<T: Clone>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for v in axis {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

pub const DEFAULT_SAFETY: f64 = 1.05;
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 64;
/// Cap on boundary samples per sweep; per-axis counts shrink in higher
/// dimension to respect it.
pub const MAX_BOUNDARY_POINTS: usize = 4_096;

/// Union of the complex polydiscs of radius `radius_i` centred on the points
/// of a box, i.e. the product over axes of the stadium
/// `{z : dist(z, [lo_i, hi_i]) <= radius_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polydisc {
    pub center: CompactBox,
    pub radius: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_safety")]
    pub safety: f64,
}

fn default_samples() -> usize {
    DEFAULT_BOUNDARY_SAMPLES
}

fn default_safety() -> f64 {
    DEFAULT_SAFETY
}

impl Polydisc {
    pub fn new(center: CompactBox, d: f64) -> Result<Self> {
        let n = center.dim();
        let v = Polydisc {
            center,
            radius: vec![d; n],
            samples: DEFAULT_BOUNDARY_SAMPLES,
            safety: DEFAULT_SAFETY,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn disc(center: f64, d: f64) -> Result<Self> {
        Polydisc::new(CompactBox::point(&[center])?, d)
    }

    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples.max(4);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.center.validate()?;
        if self.radius.len() != self.center.dim() {
            return Err(Error::invalid("polydisc radius count differs from box dimension"));
        }
        if self.radius.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::invalid("polydisc radius must be positive"));
        }
        if !(self.safety >= 1.0) {
            return Err(Error::invalid("sampling safety factor must be at least 1"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn min_radius(&self) -> f64 {
        self.radius.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same radii around a different box.
    pub fn recentered(&self, center: CompactBox) -> Polydisc {
        Polydisc {
            center,
            radius: self.radius.clone(),
            samples: self.samples,
            safety: self.safety,
        }
    }

    fn per_axis_samples(&self) -> usize {
        let n = self.dim() as f64;
        let cap = (MAX_BOUNDARY_POINTS as f64).powf(1.0 / n).floor() as usize;
        self.samples.min(cap).max(4)
    }

    /// Distinguished-boundary samples of the polydisc shrunk to the fraction
    /// `frac` of its radius (`frac = 1` is the true boundary).
    pub fn boundary_points(&self, frac: f64) -> Vec<Vec<Complex64>> {
        let s = self.per_axis_samples();
        let axes: Vec<Vec<Complex64>> = (0..self.dim())
            .map(|i| stadium(self.center.lo[i], self.center.hi[i], frac * self.radius[i], s))
            .collect();
        cartesian(&axes)
    }
}

/// `s` points spread by arclength over the boundary of the stadium around
/// `[lo, hi]` of radius `d`, plus both real extreme points.
fn stadium(lo: f64, hi: f64, d: f64, s: usize) -> Vec<Complex64> {
    let len = hi - lo;
    let arc = PI * d;
    let perimeter = 2.0 * len + 2.0 * arc;
    if perimeter == 0.0 {
        return vec![Complex64::new(lo, 0.0)];
    }
    let at = |mut u: f64| -> Complex64 {
        // right quarter arc, top segment, left half arc, bottom segment, right quarter arc
        if u < arc / 2.0 {
            let th = u / d.max(f64::MIN_POSITIVE);
            return Complex64::new(hi, 0.0) + Complex64::from_polar(d, th);
        }
        u -= arc / 2.0;
        if u < len {
            return Complex64::new(hi - u, d);
        }
        u -= len;
        if u < arc {
            let th = PI / 2.0 + u / d.max(f64::MIN_POSITIVE);
            return Complex64::new(lo, 0.0) + Complex64::from_polar(d, th);
        }
        u -= arc;
        if u < len {
            return Complex64::new(lo + u, -d);
        }
        u -= len;
        let th = 1.5 * PI + u / d.max(f64::MIN_POSITIVE);
        Complex64::new(hi, 0.0) + Complex64::from_polar(d, th)
    };
    let mut pts: Vec<Complex64> = (0..s).map(|k| at(perimeter * k as f64 / s as f64)).collect();
    pts.push(Complex64::new(lo - d, 0.0));
    pts.push(Complex64::new(hi + d, 0.0));
    pts
}
