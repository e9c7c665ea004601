//! Exact step functions on `[0, α)`: canonical form, rearrangement,
//! distribution and maximal functions, dilation and integration.

mod monotone;
mod sequence;

pub use monotone::{distribution, maximal, rearrange, Distribution, MaximalFunction, MaximalPiece, MonotoneStep, Step};
pub use sequence::SequenceFn;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json;
use crate::value::{ExtRational, Rational};

/// One interval `[a, b)` carrying the constant value `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub a: Rational,
    pub b: ExtRational,
    pub v: Rational,
}

impl Piece {
    pub fn new(a: Rational, b: ExtRational, v: Rational) -> Self {
        Piece { a, b, v }
    }
}

/// A maximal constancy interval of a full layout of `[0, α)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: Rational,
    pub end: ExtRational,
    pub value: Rational,
}

impl Segment {
    pub fn length(&self) -> ExtRational {
        match &self.end {
            ExtRational::Finite(e) => ExtRational::Finite(e - &self.start),
            ExtRational::Infinite => ExtRational::Infinite,
        }
    }
}

/// Anything that is a non-negative step function covering `[0, α)`.
pub trait Layout {
    /// Contiguous segments covering `[0, α)` in order.
    fn segments(&self) -> Vec<Segment>;
    fn domain(&self) -> &ExtRational;

    fn value_at(&self, x: &Rational) -> Option<Rational> {
        let x_ext = ExtRational::Finite(x.clone());
        self.segments()
            .into_iter()
            .find(|s| &s.start <= x && x_ext < s.end)
            .map(|s| s.value)
    }
}

/// Non-negative step function: disjoint pieces plus a value on the rest.
///
/// Always stored in canonical form: adjacent equal values are merged, no piece
/// carries the tail value, and on a finite domain the tail is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepFunction {
    pieces: Vec<Piece>,
    tail: Rational,
    alpha: ExtRational,
}

impl StepFunction {
    pub fn new(mut pieces: Vec<Piece>, tail: Rational, alpha: ExtRational) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidStep(m));
        match &alpha {
            ExtRational::Finite(a) if !a.is_positive() => return bad("domain bound must be positive".into()),
            _ => {}
        }
        if tail.is_negative() {
            return bad("tail must be non-negative".into());
        }
        pieces.retain(|p| ExtRational::Finite(p.a.clone()) != p.b);
        pieces.sort_by(|x, y| x.a.cmp(&y.a));
        for p in &pieces {
            if p.a.is_negative() || p.v.is_negative() {
                return bad(format!("negative endpoint or value in piece starting at {}", p.a));
            }
            if p.b < ExtRational::Finite(p.a.clone()) {
                return bad(format!("piece with b < a at {}", p.a));
            }
            if p.b > alpha {
                return bad(format!("piece ending at {} exceeds domain bound {}", p.b, alpha));
            }
        }
        for w in pieces.windows(2) {
            if w[0].b > ExtRational::Finite(w[1].a.clone()) {
                return bad(format!("overlapping pieces at {}", w[1].a));
            }
        }
        let raw = StepFunction { pieces, tail, alpha };
        let segments = raw.segments();
        Ok(StepFunction::from_segments(segments, raw.alpha))
    }

    /// Canonical function from a contiguous cover of `[0, α)`.
    pub(crate) fn from_segments(segments: Vec<Segment>, alpha: ExtRational) -> Self {
        let mut merged: Vec<Segment> = Vec::with_capacity(segments.len());
        for s in segments {
            if ExtRational::Finite(s.start.clone()) == s.end {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.value == s.value => last.end = s.end,
                _ => merged.push(s),
            }
        }
        let tail = match (&alpha, merged.last()) {
            (ExtRational::Infinite, Some(last)) => last.value.clone(),
            _ => Rational::zero(),
        };
        let pieces = merged
            .into_iter()
            .filter(|s| s.value != tail)
            .map(|s| Piece { a: s.start, b: s.end, v: s.value })
            .collect();
        StepFunction { pieces, tail, alpha }
    }

    pub fn zero(alpha: ExtRational) -> Self {
        StepFunction { pieces: vec![], tail: Rational::zero(), alpha }
    }

    pub fn constant(c: Rational) -> Self {
        StepFunction { pieces: vec![], tail: c, alpha: ExtRational::Infinite }
    }

    /// `v·χ_[a,b)` on `[0, ∞)`.
    pub fn indicator(a: Rational, b: ExtRational, v: Rational) -> Self {
        StepFunction::new(vec![Piece { a, b, v }], Rational::zero(), ExtRational::Infinite)
            .expect("valid indicator")
    }

    /// Pieces `(a, b, v)` with finite endpoints on `[0, ∞)`, tail zero.
    pub fn from_triples(triples: &[(Rational, Rational, Rational)]) -> Result<Self> {
        let pieces = triples
            .iter()
            .map(|(a, b, v)| Piece { a: a.clone(), b: ExtRational::Finite(b.clone()), v: v.clone() })
            .collect();
        StepFunction::new(pieces, Rational::zero(), ExtRational::Infinite)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tail(&self) -> &Rational {
        &self.tail
    }

    pub fn alpha(&self) -> &ExtRational {
        &self.alpha
    }

    pub fn is_zero(&self) -> bool {
        self.tail.is_zero() && self.pieces.iter().all(|p| p.v.is_zero())
    }

    /// Right end of the support; `∞` when the tail is positive.
    pub fn support_end(&self) -> ExtRational {
        if !self.tail.is_zero() {
            return ExtRational::Infinite;
        }
        self.pieces
            .iter()
            .filter(|p| !p.v.is_zero())
            .map(|p| p.b.clone())
            .max()
            .unwrap_or_else(ExtRational::zero)
    }

    /// Same function with a new domain bound; fails if pieces do not fit.
    pub fn with_alpha(&self, alpha: ExtRational) -> Result<Self> {
        if alpha.is_infinite() {
            return StepFunction::new(self.pieces.clone(), self.tail.clone(), alpha);
        }
        if !self.tail.is_zero() && self.alpha.is_infinite() {
            return Err(Error::InvalidStep("positive tail cannot be moved to a finite domain".into()));
        }
        StepFunction::new(self.pieces.clone(), self.tail.clone(), alpha)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = json::object(v)?;
        let pieces = match obj.get("pieces") {
            Some(Value::Array(items)) => items
                .iter()
                .map(|item| {
                    let o = json::object(item)?;
                    Ok(Piece {
                        a: json::rational_field(o, "a")?,
                        b: json::as_ext_rational(json::field(o, "b")?)?,
                        v: json::rational_field(o, "v")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            Some(other) => return Err(Error::Parse(format!("\"pieces\" must be an array, got {other}"))),
            None => vec![],
        };
        let tail = match obj.get("tail") {
            Some(t) => json::as_rational(t)?,
            None => Rational::zero(),
        };
        let alpha = json::ext_field_or(obj, "alpha", ExtRational::Infinite)?;
        StepFunction::new(pieces, tail, alpha)
    }

    pub fn to_json(&self) -> Value {
        let pieces: Vec<Value> = self
            .pieces
            .iter()
            .map(|p| json!({"a": json::string(&ExtRational::Finite(p.a.clone())), "b": json::string(&p.b), "v": json::string(&ExtRational::Finite(p.v.clone()))}))
            .collect();
        json!({
            "pieces": pieces,
            "tail": json::string(&ExtRational::Finite(self.tail.clone())),
            "alpha": json::string(&self.alpha),
        })
    }
}

impl Layout for StepFunction {
    fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(2 * self.pieces.len() + 1);
        let mut cursor = ExtRational::zero();
        for p in &self.pieces {
            let a = ExtRational::Finite(p.a.clone());
            if cursor < a {
                out.push(Segment {
                    start: cursor.finite().expect("finite cursor").clone(),
                    end: a,
                    value: self.tail.clone(),
                });
            }
            out.push(Segment { start: p.a.clone(), end: p.b.clone(), value: p.v.clone() });
            cursor = p.b.clone();
        }
        if cursor < self.alpha {
            out.push(Segment {
                start: cursor.finite().expect("finite cursor").clone(),
                end: self.alpha.clone(),
                value: self.tail.clone(),
            });
        }
        out
    }

    fn domain(&self) -> &ExtRational {
        &self.alpha
    }
}

/// Common refinement of two covers of the same domain: `(start, end, left, right)`.
pub fn refine(f: &[Segment], g: &[Segment]) -> Vec<(Rational, ExtRational, Rational, Rational)> {
    let mut out = Vec::with_capacity(f.len() + g.len());
    let (mut i, mut j) = (0, 0);
    let mut start = Rational::zero();
    while i < f.len() && j < g.len() {
        let end = std::cmp::min(f[i].end.clone(), g[j].end.clone());
        out.push((start.clone(), end.clone(), f[i].value.clone(), g[j].value.clone()));
        if f[i].end == end {
            i += 1;
        }
        if g[j].end == end {
            j += 1;
        }
        match end {
            ExtRational::Finite(e) => start = e,
            ExtRational::Infinite => break,
        }
    }
    out
}

fn check_same_domain(f: &ExtRational, g: &ExtRational) -> Result<()> {
    if f != g {
        return Err(Error::DomainMismatch(format!("domain bounds {f} and {g} differ")));
    }
    Ok(())
}

/// Exact `∫_from^to f` (with `∞` when the integrand has infinite mass).
pub fn integrate(f: &impl Layout, from: &Rational, to: &ExtRational) -> Result<ExtRational> {
    if from.is_negative() || &ExtRational::Finite(from.clone()) > to || to > f.domain() {
        return Err(Error::OutOfRange(format!("integration range [{from}, {to}) outside [0, {})", f.domain())));
    }
    let mut total = ExtRational::zero();
    for s in f.segments() {
        let lo = std::cmp::max(&s.start, from).clone();
        let hi = std::cmp::min(&s.end, to).clone();
        if hi <= ExtRational::Finite(lo.clone()) || s.value.is_zero() {
            continue;
        }
        let len = match hi {
            ExtRational::Finite(h) => ExtRational::Finite(h - lo),
            ExtRational::Infinite => ExtRational::Infinite,
        };
        total = total.add(&len.mul(&ExtRational::Finite(s.value.clone())));
    }
    Ok(total)
}

/// Exact `∫ f·g` over the common domain.
pub fn integrate_product(f: &impl Layout, g: &impl Layout) -> Result<ExtRational> {
    check_same_domain(f.domain(), g.domain())?;
    let mut total = ExtRational::zero();
    for (start, end, u, v) in refine(&f.segments(), &g.segments()) {
        let w = u * v;
        if w.is_zero() {
            continue;
        }
        let len = match end {
            ExtRational::Finite(e) => ExtRational::Finite(e - start),
            ExtRational::Infinite => ExtRational::Infinite,
        };
        total = total.add(&len.mul(&ExtRational::Finite(w)));
    }
    Ok(total)
}

pub fn add(f: &StepFunction, g: &StepFunction) -> Result<StepFunction> {
    check_same_domain(f.alpha(), g.alpha())?;
    let segments = refine(&f.segments(), &g.segments())
        .into_iter()
        .map(|(start, end, u, v)| Segment { start, end, value: u + v })
        .collect();
    Ok(StepFunction::from_segments(segments, f.alpha.clone()))
}

pub fn scale(f: &StepFunction, c: &Rational) -> Result<StepFunction> {
    if c.is_negative() {
        return Err(Error::OutOfRange("scale factor must be non-negative".into()));
    }
    let segments = f
        .segments()
        .into_iter()
        .map(|s| Segment { value: s.value * c, ..s })
        .collect();
    Ok(StepFunction::from_segments(segments, f.alpha.clone()))
}

/// `D_t f(s) = f(ts)`: endpoints divided by `t`.
pub fn dilate(f: &StepFunction, t: &Rational) -> Result<StepFunction> {
    if !f.alpha.is_infinite() {
        return Err(Error::DomainMismatch("dilation needs the domain [0, ∞)".into()));
    }
    if !t.is_positive() {
        return Err(Error::OutOfRange("dilation parameter must be positive".into()));
    }
    let pieces = f
        .pieces
        .iter()
        .map(|p| Piece {
            a: &p.a / t,
            b: match &p.b {
                ExtRational::Finite(b) => ExtRational::Finite(b / t),
                ExtRational::Infinite => ExtRational::Infinite,
            },
            v: p.v.clone(),
        })
        .collect();
    StepFunction::new(pieces, f.tail.clone(), ExtRational::Infinite)
}

/// Restriction windows used by the amalgam construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// `[0, 1]`
    Local,
    /// `(1, ∞)`, values kept in place.
    Global,
}

/// `f*·χ_window` as a step function on the domain of `f*`.
pub fn restrict(fstar: &MonotoneStep, window: Window) -> StepFunction {
    let one = ExtRational::Finite(Rational::from_integer(1.into()));
    let segments = fstar
        .segments()
        .into_iter()
        .flat_map(|s| {
            let (lo, hi) = match window {
                Window::Local => (ExtRational::zero(), one.clone()),
                Window::Global => (one.clone(), ExtRational::Infinite),
            };
            let start = ExtRational::Finite(s.start.clone());
            let inside_lo = std::cmp::max(start.clone(), lo);
            let inside_hi = std::cmp::min(s.end.clone(), hi);
            let mut parts = Vec::new();
            if inside_lo < inside_hi {
                if start < inside_lo {
                    parts.push(Segment { start: s.start.clone(), end: inside_lo.clone(), value: Rational::zero() });
                }
                parts.push(Segment {
                    start: inside_lo.finite().expect("finite").clone(),
                    end: inside_hi.clone(),
                    value: s.value.clone(),
                });
                if inside_hi < s.end {
                    parts.push(Segment {
                        start: inside_hi.finite().expect("finite").clone(),
                        end: s.end.clone(),
                        value: Rational::zero(),
                    });
                }
            } else {
                parts.push(Segment { value: Rational::zero(), ..s });
            }
            parts
        })
        .collect();
    StepFunction::from_segments(segments, fstar.alpha().clone())
}
