//! The literal Picard construction
//! `φ_k(t) f = f + ∫_{t0}^t φ_{k-1}(τ)(X̂(τ) f) dτ`
//! over a step field, with exact rational arithmetic. Each result is a
//! polynomial in the state and in the local time `s = t - piece_start`.

use num_rational::BigRational;

use crate::algebra::{Coeff, MultiIndex, Poly};
use crate::error::{Error, Result};
use crate::timevarying::{StepField, TimeInterval};

pub type Q = BigRational;

/// Term budget for intermediate polynomials.
pub const PICARD_TERM_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PicardPiece {
    pub start: f64,
    pub end: f64,
    /// Polynomial in `(x_1, ..., x_N, s)`.
    pub poly: Poly<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardResult {
    pub dim: usize,
    pub pieces: Vec<PicardPiece>,
}

impl PicardResult {
    /// `φ_k(t) f` as a polynomial in the state.
    pub fn at(&self, t: f64) -> Result<Poly<Q>> {
        let piece = self
            .pieces
            .iter()
            .find(|p| t >= p.start && t <= p.end)
            .ok_or_else(|| Error::invalid(format!("t = {t} outside the Picard interval")))?;
        let s = Q::from_f64(t - piece.start).ok_or_else(|| Error::invalid("non-finite time"))?;
        piece.poly.substitute(self.dim, &s).shrink_dim(self.dim)
    }
}

struct Ctx {
    dim: usize,
    fields: Vec<Vec<Poly<Q>>>,
    lengths: Vec<Q>,
}

pub fn picard_iterate(x: &StepField, t: TimeInterval, f: &Poly<f64>, k: usize) -> Result<PicardResult> {
    let dim = x.dim();
    if f.dim() != dim {
        return Err(Error::Mismatch("observable dimension".into()));
    }
    let segs = x.segments(t.start, t.end)?;
    let mut fields = Vec::new();
    let mut lengths = Vec::new();
    for (piece, seg) in &segs {
        let polys = x.pieces()[*piece]
            .to_polys(0.0)
            .filter(|_| !x.pieces()[*piece].depends_on_time())
            .ok_or_else(|| Error::invalid("Picard iteration needs autonomous polynomial pieces"))?;
        fields.push(
            polys
                .iter()
                .map(|p| Ok(p.to_rational()?.extend_dim(1)))
                .collect::<Result<Vec<_>>>()?,
        );
        lengths.push(Q::from_f64(seg.end - seg.start).ok_or_else(|| Error::invalid("non-finite breakpoint"))?);
    }
    let ctx = Ctx { dim, fields, lengths };
    let g = f.to_rational()?.extend_dim(1);
    let polys = iterate(&ctx, k, &g, segs.len())?;
    Ok(PicardResult {
        dim,
        pieces: segs
            .iter()
            .zip(polys)
            .map(|((_, seg), poly)| PicardPiece {
                start: seg.start,
                end: seg.end,
                poly,
            })
            .collect(),
    })
}

/// `φ_k(·) g` restricted to each of the first `upto` pieces.
fn iterate(ctx: &Ctx, k: usize, g: &Poly<Q>, upto: usize) -> Result<Vec<Poly<Q>>> {
    if k == 0 {
        return Ok(vec![g.clone(); upto]);
    }
    let s = ctx.dim;
    let mut out = Vec::with_capacity(upto);
    let mut before = Poly::zero(ctx.dim + 1);
    for p in 0..upto {
        let h = g.apply_derivation(&ctx.fields[p])?;
        let inner = if h.is_zero() {
            Poly::zero(ctx.dim + 1)
        } else {
            iterate(ctx, k - 1, &h, p + 1)?.pop().expect("piece p")
        };
        let running = inner.integrate(s);
        if running.term_count() > PICARD_TERM_LIMIT {
            return Err(Error::SizeGuard(format!(
                "Picard iterate exceeds {PICARD_TERM_LIMIT} terms"
            )));
        }
        out.push(g.add(&before).add(&running));
        before = before.add(&running.substitute(s, &ctx.lengths[p]));
    }
    Ok(out)
}

/// `Σ_{j<=k} s^j/j! X̂^j f` as a polynomial in `(x, s)`.
pub fn lie_truncation_symbolic(x: &[Poly<Q>], f: &Poly<Q>, k: usize) -> Result<Poly<Q>> {
    let n = f.dim();
    let xs: Vec<Poly<Q>> = x.iter().map(|p| p.extend_dim(1)).collect();
    let s = Poly::monomial(MultiIndex::unit(n + 1, n), Q::from_i64(1));
    let mut term = f.extend_dim(1);
    let mut acc = term.clone();
    for j in 1..=k {
        term = term
            .apply_derivation(&xs)?
            .scale(&Q::new(1.into(), (j as i64).into()))
            .mul(&s);
        acc = acc.add(&term);
    }
    Ok(acc)
}
