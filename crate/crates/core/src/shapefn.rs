//! Candidate fundamental functions: piecewise `c·t^p + d` on a partition of `(0, α)`.
//!
//! Almost everything is a monomial (`d = 0`); the offset exists so that shapes
//! such as `1 + t` and piecewise-linear majorants are representable. Closed
//! forms cover monomial pieces; offset pieces fall back to float search where
//! no closed form is available.

use std::cmp::Ordering;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json;
use crate::numeric;
use crate::value::{int, rational_from_f64, rational_to_f64, ExtRational, ExtValue, Rational};

/// `t ↦ coef·t^exp + offset` on `(from, to]`.
#[derive(Clone, Debug)]
pub struct ShapePiece {
    from: Rational,
    to: ExtRational,
    coef: Rational,
    exp: Rational,
    offset: Rational,
    cf: f64,
    pf: f64,
    df: f64,
    pi: Option<i32>,
}

impl PartialEq for ShapePiece {
    fn eq(&self, other: &Self) -> bool {
        self.from == other.from
            && self.to == other.to
            && self.coef == other.coef
            && self.exp == other.exp
            && self.offset == other.offset
    }
}

impl ShapePiece {
    pub fn new(from: Rational, to: ExtRational, coef: Rational, exp: Rational, offset: Rational) -> Self {
        let pi = if exp.denom().is_one() { exp.numer().to_i32() } else { None };
        ShapePiece {
            cf: rational_to_f64(&coef),
            pf: rational_to_f64(&exp),
            df: rational_to_f64(&offset),
            pi,
            from,
            to,
            coef,
            exp,
            offset,
        }
    }

    pub fn from(&self) -> &Rational {
        &self.from
    }

    pub fn to(&self) -> &ExtRational {
        &self.to
    }

    pub fn coef(&self) -> &Rational {
        &self.coef
    }

    pub fn exp(&self) -> &Rational {
        &self.exp
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn is_monomial(&self) -> bool {
        self.offset.is_zero()
    }

    fn same_formula(&self, other: &ShapePiece) -> bool {
        self.coef == other.coef && self.exp == other.exp && self.offset == other.offset
    }

    /// The piece formula at `t`; at `t = 0` its right limit.
    pub fn value(&self, t: &Rational) -> ExtValue {
        if t.is_zero() {
            return self.limit_zero();
        }
        let tp = ExtValue::rational(t.clone()).powr(&self.exp);
        tp.mul_rational(&self.coef).add(&ExtValue::rational(self.offset.clone()))
    }

    pub fn value_f64(&self, t: f64) -> f64 {
        let tp = match self.pi {
            Some(0) => 1.0,
            Some(n) => t.powi(n),
            None => t.powf(self.pf),
        };
        self.cf * tp + self.df
    }

    fn limit_zero(&self) -> ExtValue {
        match self.exp.cmp(&Rational::zero()) {
            Ordering::Greater => ExtValue::rational(self.offset.clone()),
            Ordering::Equal => ExtValue::rational(&self.coef + &self.offset),
            Ordering::Less => ExtValue::Infinite,
        }
    }

    fn limit_infinity(&self) -> ExtValue {
        match self.exp.cmp(&Rational::zero()) {
            Ordering::Greater => ExtValue::Infinite,
            Ordering::Equal => ExtValue::rational(&self.coef + &self.offset),
            Ordering::Less => ExtValue::rational(self.offset.clone()),
        }
    }

    /// Right limit at `from`.
    pub fn start_value(&self) -> ExtValue {
        self.value(&self.from)
    }

    /// Left limit at `to` (the limit at infinity when `to = ∞`).
    pub fn end_value(&self) -> ExtValue {
        match &self.to {
            ExtRational::Finite(b) => self.value(b),
            ExtRational::Infinite => self.limit_infinity(),
        }
    }

    fn end_f64(&self) -> f64 {
        self.to.to_f64()
    }
}

/// A shape function `φ` on `(0, α)`, left-continuous, `φ(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeFunction {
    pieces: Vec<ShapePiece>,
    alpha: ExtRational,
}

impl ShapeFunction {
    /// Checks that the pieces tile `(0, α)` with positive coefficients and
    /// non-negative offsets. Monotonicity is reported by [`ShapeFunction::is_monotone`].
    pub fn new(pieces: Vec<ShapePiece>, alpha: ExtRational) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidShape(m));
        if let ExtRational::Finite(a) = &alpha {
            if !a.is_positive() {
                return bad("domain bound must be positive".into());
            }
        }
        let first = match pieces.first() {
            Some(p) => p,
            None => return bad("a shape needs at least one piece".into()),
        };
        if !first.from.is_zero() {
            return bad("first piece must start at 0".into());
        }
        for (i, p) in pieces.iter().enumerate() {
            if ExtRational::Finite(p.from.clone()) >= p.to {
                return bad(format!("empty piece ({}, {}]", p.from, p.to));
            }
            if !p.coef.is_positive() {
                return bad(format!("coefficient must be positive on piece {i}"));
            }
            if p.offset.is_negative() {
                return bad(format!("offset must be non-negative on piece {i}"));
            }
            if let Some(next) = pieces.get(i + 1) {
                if p.to != ExtRational::Finite(next.from.clone()) {
                    return bad(format!("pieces {i} and {} are not contiguous", i + 1));
                }
            }
        }
        if pieces.last().map(|p| &p.to) != Some(&alpha) {
            return bad("last piece must end at the domain bound".into());
        }
        Ok(ShapeFunction { pieces, alpha })
    }

    /// `c·t^p` on `(0, ∞)`.
    pub fn power(coef: Rational, exp: Rational) -> Self {
        let piece = ShapePiece::new(Rational::zero(), ExtRational::Infinite, coef, exp, Rational::zero());
        ShapeFunction { pieces: vec![piece], alpha: ExtRational::Infinite }
    }

    /// Monomial pieces `(from, to, coef, exp)` on `(0, ∞)`; `to = None` means ∞.
    pub fn from_monomials(parts: &[(Rational, Option<Rational>, Rational, Rational)]) -> Result<Self> {
        let pieces = parts
            .iter()
            .map(|(a, b, c, p)| {
                let to = b.clone().map_or(ExtRational::Infinite, ExtRational::Finite);
                ShapePiece::new(a.clone(), to, c.clone(), p.clone(), Rational::zero())
            })
            .collect();
        ShapeFunction::new(pieces, ExtRational::Infinite)
    }

    pub fn pieces(&self) -> &[ShapePiece] {
        &self.pieces
    }

    pub fn alpha(&self) -> &ExtRational {
        &self.alpha
    }

    pub fn is_monomial(&self) -> bool {
        self.pieces.iter().all(ShapePiece::is_monomial)
    }

    /// Interior breakpoints.
    pub fn breakpoints(&self) -> Vec<Rational> {
        self.pieces.iter().skip(1).map(|p| p.from.clone()).collect()
    }

    /// Index of the piece whose interval `(from, to]` contains `t > 0`.
    pub fn piece_index(&self, t: &Rational) -> usize {
        let te = ExtRational::Finite(t.clone());
        self.pieces.iter().position(|p| te <= p.to).unwrap_or(self.pieces.len() - 1)
    }

    pub fn piece_index_f64(&self, t: f64) -> usize {
        self.pieces.iter().position(|p| t <= p.end_f64()).unwrap_or(self.pieces.len() - 1)
    }

    /// Left-continuous evaluation on `[0, α)`.
    pub fn eval(&self, t: &Rational) -> Result<ExtValue> {
        if t.is_negative() || ExtRational::Finite(t.clone()) >= self.alpha {
            return Err(Error::OutOfRange(format!("t = {t} outside [0, {})", self.alpha)));
        }
        if t.is_zero() {
            return Ok(ExtValue::zero());
        }
        Ok(self.pieces[self.piece_index(t)].value(t))
    }

    /// Float evaluation; `t ≥ α` uses the last piece formula.
    pub fn eval_f64(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.pieces[self.piece_index_f64(t)].value_f64(t)
    }

    /// `φ(t)` for `t ∈ (0, α]` or `t = ∞`, using left limits at `α` and `lim φ` at `∞`.
    pub fn at(&self, t: &ExtRational) -> ExtValue {
        match t {
            ExtRational::Finite(x) if x.is_zero() => ExtValue::zero(),
            ExtRational::Finite(x) if t < &self.alpha => self.pieces[self.piece_index(x)].value(x),
            _ => self.pieces.last().expect("non-empty").end_value(),
        }
    }

    /// Right limit `φ(t+)` for `t ∈ [0, α)`.
    pub fn right_limit(&self, t: &Rational) -> ExtValue {
        let te = ExtRational::Finite(t.clone());
        let idx = self.pieces.iter().position(|p| te < p.to).unwrap_or(self.pieces.len() - 1);
        self.pieces[idx].value(t)
    }

    pub fn limit_at_0(&self) -> ExtValue {
        self.pieces[0].start_value()
    }

    /// `lim_{t→∞} φ`, or the left limit at `α` on a finite domain.
    pub fn limit_at_inf(&self) -> ExtValue {
        self.pieces.last().expect("non-empty").end_value()
    }

    /// Non-decreasing: non-negative exponents and no downward jumps.
    pub fn is_monotone(&self) -> bool {
        if self.pieces.iter().any(|p| p.exp.is_negative()) {
            return false;
        }
        self.pieces.windows(2).all(|w| w[0].end_value().le_tol(&w[1].start_value(), 1e-12, 0.0))
    }

    /// Continuous on `(0, α)`: no jumps at interior breakpoints.
    pub fn is_continuous(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].end_value().approx_eq(&w[1].start_value(), 1e-12, 1e-15))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = json::object(v)?;
        let items = match json::field(obj, "pieces")? {
            Value::Array(items) => items,
            other => return Err(Error::Parse(format!("\"pieces\" must be an array, got {other}"))),
        };
        let alpha = json::ext_field_or(obj, "alpha", ExtRational::Infinite)?;
        let pieces = items
            .iter()
            .map(|item| {
                let o = json::object(item)?;
                let offset = match o.get("offset") {
                    Some(d) => json::as_rational(d)?,
                    None => Rational::zero(),
                };
                Ok(ShapePiece::new(
                    json::rational_field(o, "from")?,
                    json::as_ext_rational(json::field(o, "to")?)?,
                    json::rational_field(o, "coef")?,
                    json::rational_field(o, "exp")?,
                    offset,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        ShapeFunction::new(pieces, alpha)
    }

    pub fn to_json(&self) -> Value {
        let pieces: Vec<Value> = self
            .pieces
            .iter()
            .map(|p| {
                let mut o = json!({
                    "from": json::string(&ExtRational::Finite(p.from.clone())),
                    "to": json::string(&p.to),
                    "coef": number_or_string(&p.coef),
                    "exp": number_or_string(&p.exp),
                });
                if !p.offset.is_zero() {
                    o["offset"] = number_or_string(&p.offset);
                }
                o
            })
            .collect();
        json!({"pieces": pieces, "alpha": json::string(&self.alpha)})
    }
}

fn number_or_string(r: &Rational) -> Value {
    let x = rational_to_f64(r);
    match rational_from_f64(x) {
        Ok(back) if &back == r => json!(x),
        _ => json::string(&ExtRational::Finite(r.clone())),
    }
}

/// Admissibility verdict and the constants behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeReport {
    pub admissible: bool,
    pub monotone: bool,
    pub delta2_constant: ExtValue,
    pub wqc_constant: ExtValue,
    pub limit_at_0: ExtValue,
    pub limit_at_inf: ExtValue,
}

impl ShapeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "admissible": self.admissible,
            "monotone": self.monotone,
            "delta2_constant": self.delta2_constant.to_string(),
            "wqc_constant": self.wqc_constant.to_string(),
            "limit_at_0": self.limit_at_0.to_string(),
            "limit_at_inf": self.limit_at_inf.to_string(),
        })
    }
}

pub fn eval_limits(phi: &ShapeFunction) -> (ExtValue, ExtValue) {
    (phi.limit_at_0(), phi.limit_at_inf())
}

pub fn check_admissible(phi: &ShapeFunction) -> ShapeReport {
    let monotone = phi.is_monotone();
    let delta2 = if monotone { delta2_constant(phi) } else { ExtValue::Infinite };
    let wqc = if monotone { wqc_constant(phi) } else { ExtValue::Infinite };
    ShapeReport {
        admissible: monotone && delta2.is_finite(),
        monotone,
        delta2_constant: delta2,
        wqc_constant: wqc,
        limit_at_0: phi.limit_at_0(),
        limit_at_inf: phi.limit_at_inf(),
    }
}

fn two_pow(p: &Rational) -> ExtValue {
    ExtValue::rational(int(2)).powr(p)
}

fn ratio(a: &ExtValue, b: &ExtValue) -> ExtValue {
    a.checked_div(b).unwrap_or_else(ExtValue::one)
}

/// Sub-intervals of `(0, limit)` between consecutive points of `cuts ∪ {0, limit}`.
pub(crate) fn cells(mut cuts: Vec<Rational>, limit: &ExtRational) -> Vec<(Rational, ExtRational)> {
    cuts.push(Rational::zero());
    cuts.retain(|c| !c.is_negative() && &ExtRational::Finite(c.clone()) < limit);
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len());
    for (i, c) in cuts.iter().enumerate() {
        let end = match cuts.get(i + 1) {
            Some(n) => ExtRational::Finite(n.clone()),
            None => limit.clone(),
        };
        out.push((c.clone(), end));
    }
    out
}

pub(crate) fn midpoint(u: &Rational, w: &ExtRational) -> Rational {
    match w {
        ExtRational::Finite(w) => (u + w) / int(2),
        ExtRational::Infinite => u + Rational::one(),
    }
}

/// Float range used when searching an open cell numerically.
pub(crate) fn search_range(u: &Rational, w: &ExtRational) -> (f64, f64) {
    let lo = rational_to_f64(u);
    let hi = w.to_f64();
    let hi = if hi.is_finite() { hi } else { lo.max(1.0) * 1e8 };
    let lo = if lo > 0.0 { lo } else { hi * 1e-9 };
    (lo, hi)
}

/// `sup_{t ∈ (0, α/2)} φ(2t)/φ(t)`.
///
/// On each cell of the partition by breakpoints and half-breakpoints both
/// `t` and `2t` stay inside single pieces, so for monomial pieces the ratio is
/// a monomial and its sup is an endpoint value or one-sided limit.
pub fn delta2_constant(phi: &ShapeFunction) -> ExtValue {
    let half_alpha = match &phi.alpha {
        ExtRational::Finite(a) => ExtRational::Finite(a / int(2)),
        ExtRational::Infinite => ExtRational::Infinite,
    };
    let mut cuts = Vec::new();
    for b in phi.breakpoints() {
        cuts.push(&b / int(2));
        cuts.push(b);
    }
    let two = int(2);
    let mut best = ExtValue::zero();
    for (u, w) in cells(cuts, &half_alpha) {
        let m = midpoint(&u, &w);
        let pi = &phi.pieces[phi.piece_index(&m)];
        let pj = &phi.pieces[phi.piece_index(&(&m * &two))];
        let at_u = if u.is_zero() {
            match (pi.exp.is_positive(), pi.is_monomial()) {
                (true, true) => two_pow(&pi.exp),
                _ => ExtValue::one(),
            }
        } else {
            ratio(&pj.value(&(&u * &two)), &pi.value(&u))
        };
        let at_w = match &w {
            ExtRational::Finite(x) => ratio(&pj.value(&(x * &two)), &pi.value(x)),
            ExtRational::Infinite => {
                if pi.exp.is_positive() {
                    two_pow(&pi.exp)
                } else {
                    ExtValue::one()
                }
            }
        };
        best = best.max(at_u).max(at_w);
        if !pi.is_monomial() || !pj.is_monomial() {
            let (lo, hi) = search_range(&u, &w);
            let f = |t: f64| pj.value_f64(2.0 * t) / pi.value_f64(t);
            best = best.max(ExtValue::from_f64(numeric::sup_sampled(&f, lo, hi, 256)));
        }
    }
    best
}

/// `ψ = φ/t` on one monotone stretch: values at the left (right limit) and right end.
fn psi_stretches(phi: &ShapeFunction) -> Vec<(ExtValue, ExtValue)> {
    let mut out = Vec::new();
    for p in &phi.pieces {
        let one = Rational::one();
        let start = if p.from.is_zero() {
            if !p.is_monomial() {
                ExtValue::Infinite
            } else {
                match p.exp.cmp(&one) {
                    Ordering::Less => ExtValue::Infinite,
                    Ordering::Equal => ExtValue::rational(p.coef.clone()),
                    Ordering::Greater => ExtValue::zero(),
                }
            }
        } else {
            ratio(&p.value(&p.from), &ExtValue::rational(p.from.clone()))
        };
        let end = match &p.to {
            ExtRational::Finite(b) => ratio(&p.value(b), &ExtValue::rational(b.clone())),
            ExtRational::Infinite => match p.exp.cmp(&one) {
                Ordering::Less => ExtValue::zero(),
                Ordering::Equal => ExtValue::rational(p.coef.clone()),
                Ordering::Greater => ExtValue::Infinite,
            },
        };
        // c·t^{p-1} + d/t with p > 1 and d > 0 has an interior minimum.
        if !p.is_monomial() && p.exp > one {
            let tstar = (p.df / (p.cf * (p.pf - 1.0))).powf(1.0 / p.pf);
            if tstar > rational_to_f64(&p.from) && tstar < p.end_f64() {
                let mid = ExtValue::from_f64(p.value_f64(tstar) / tstar);
                out.push((start, mid.clone()));
                out.push((mid, end));
                continue;
            }
        }
        out.push((start, end));
    }
    out
}

/// `K = sup_{s ≤ t} ψ(t)/ψ(s)` with `ψ(t) = φ(t)/t`, scanning monotone stretches
/// of `ψ` while tracking the running infimum.
pub fn wqc_constant(phi: &ShapeFunction) -> ExtValue {
    let mut running = ExtValue::Infinite;
    let mut k = ExtValue::one();
    for (a, b) in psi_stretches(phi) {
        let lo = running.clone().min(a.clone());
        k = k.max(ratio(&a, &lo));
        let lo2 = lo.min(b.clone());
        k = k.max(ratio(&b, &lo2));
        running = lo2;
    }
    k
}

/// A piecewise-linear concave majorant on a geometric grid.
#[derive(Clone, Debug)]
pub struct Majorant {
    pub shape: ShapeFunction,
    /// Hull vertices `(t, φ̃(t))`, starting with `(0, φ(0+))`.
    pub knots: Vec<(f64, f64)>,
    /// `max φ̃/φ` over the grid.
    pub ratio: f64,
}

impl Majorant {
    pub fn eval_f64(&self, t: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|&(x, _)| x <= t).clamp(1, k.len().max(2) - 1);
        if k.len() == 1 {
            return k[0].1;
        }
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        y0 + (y1 - y0) / (x1 - x0) * (t - x0)
    }
}

/// Grid of `n` geometric points covering the breakpoints of `φ` generously.
pub fn geometric_grid(phi: &ShapeFunction, n: usize) -> Vec<f64> {
    let bps: Vec<f64> = phi.breakpoints().iter().map(rational_to_f64).collect();
    let lo = bps.iter().cloned().fold(1.0, f64::min) / 1e3;
    let hi = match &phi.alpha {
        ExtRational::Finite(a) => rational_to_f64(a),
        ExtRational::Infinite => bps.iter().cloned().fold(1.0, f64::max) * 1e3,
    };
    let n = n.max(2);
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Least concave majorant of the samples of `φ` on a geometric grid (plus
/// right limits at breakpoints and `φ(0+)` at the origin).
pub fn concave_majorant(phi: &ShapeFunction, grid_size: usize) -> Result<Majorant> {
    if grid_size < 2 {
        return Err(Error::OutOfRange("grid_size must be at least 2".into()));
    }
    if !phi.is_monotone() || wqc_constant(phi).is_infinite() {
        return Err(Error::Precondition("concave majorant needs a weakly quasiconcave shape".into()));
    }
    let grid = geometric_grid(phi, grid_size);
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let mut points: Vec<(f64, f64)> = vec![(0.0, phi.limit_at_0().to_f64())];
    points.extend(grid.iter().map(|&t| (t, phi.eval_f64(t))));
    for (i, b) in phi.breakpoints().iter().enumerate() {
        let x = rational_to_f64(b);
        if x > lo && x < hi {
            points.push((x, phi.pieces[i + 1].start_value().to_f64()));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points {
        if let Some(last) = hull.last() {
            if last.0 == p.0 {
                hull.pop();
            }
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut pieces = Vec::with_capacity(hull.len());
    for (i, w) in hull.windows(2).enumerate() {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let slope = ((y1 - y0) / (x1 - x0)).max(0.0);
        let intercept = (y0 - slope * x0).max(0.0);
        let from = rational_from_f64(x0)?;
        let is_last = i + 2 == hull.len();
        let to = if is_last && phi.alpha.is_infinite() {
            ExtRational::Infinite
        } else if is_last {
            phi.alpha.clone()
        } else {
            ExtRational::Finite(rational_from_f64(x1)?)
        };
        pieces.push(linear_piece(from, to, slope, intercept)?);
    }
    let shape = ShapeFunction::new(merge_pieces(pieces), phi.alpha.clone())?;
    let maj = Majorant { shape, knots: hull, ratio: 0.0 };
    let ratio = grid.iter().map(|&t| maj.eval_f64(t) / phi.eval_f64(t)).fold(1.0, f64::max);
    Ok(Majorant { ratio, ..maj })
}

fn linear_piece(from: Rational, to: ExtRational, slope: f64, intercept: f64) -> Result<ShapePiece> {
    Ok(if slope > 0.0 {
        ShapePiece::new(from, to, rational_from_f64(slope)?, Rational::one(), rational_from_f64(intercept)?)
    } else {
        ShapePiece::new(from, to, rational_from_f64(intercept.max(f64::MIN_POSITIVE))?, Rational::zero(), Rational::zero())
    })
}

fn merge_pieces(pieces: Vec<ShapePiece>) -> Vec<ShapePiece> {
    let mut out: Vec<ShapePiece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match out.last_mut() {
            Some(last) if last.same_formula(&p) => {
                *last = ShapePiece::new(last.from.clone(), p.to.clone(), p.coef.clone(), p.exp.clone(), p.offset.clone());
            }
            _ => out.push(p),
        }
    }
    out
}

/// `φ̄(t) = t/φ(t)`: coefficients inverted, exponents `1 − p`. The result may
/// fail to be monotone (check with [`ShapeFunction::is_monotone`]).
pub fn bar(phi: &ShapeFunction) -> Result<ShapeFunction> {
    if !phi.is_monomial() {
        return Err(Error::Unsupported("t/φ is only representable for monomial pieces".into()));
    }
    let pieces = phi
        .pieces
        .iter()
        .map(|p| ShapePiece::new(p.from.clone(), p.to.clone(), p.coef.recip(), Rational::one() - &p.exp, Rational::zero()))
        .collect();
    ShapeFunction::new(pieces, phi.alpha.clone())
}

/// `∫_u^w ds / (c s^p + d)` over a sub-range of one piece.
fn piece_reciprocal(p: &ShapePiece, u: &Rational, w: &ExtRational) -> ExtValue {
    let one = Rational::one();
    if p.is_monomial() {
        let e = &one - &p.exp;
        let c = ExtValue::rational(p.coef.clone());
        let upow = ExtValue::rational(u.clone()).powr(&e);
        let wpow = ExtValue::from_ext_rational(w).powr(&e);
        return match e.cmp(&Rational::zero()) {
            Ordering::Greater => {
                let denom = c.mul_rational(&e);
                wpow.sub_clamped(&upow).checked_div(&denom).unwrap_or(ExtValue::Infinite)
            }
            Ordering::Less => {
                let denom = c.mul_rational(&-e);
                upow.sub_clamped(&wpow).checked_div(&denom).unwrap_or(ExtValue::Infinite)
            }
            Ordering::Equal => {
                if u.is_zero() || w.is_infinite() {
                    ExtValue::Infinite
                } else {
                    let ratio = rational_to_f64(w.finite().expect("finite")) / rational_to_f64(u);
                    ExtValue::from_f64(ratio.ln() / p.cf)
                }
            }
        };
    }
    let (c, d) = (p.cf, p.df);
    if p.exp.is_zero() {
        let len = match w {
            ExtRational::Finite(w) => ExtValue::rational(w - u),
            ExtRational::Infinite => return ExtValue::Infinite,
        };
        return len.checked_div(&ExtValue::rational(&p.coef + &p.offset)).expect("finite");
    }
    let uf = rational_to_f64(u);
    if p.exp == one {
        return match w {
            ExtRational::Finite(w) => ExtValue::from_f64(((c * rational_to_f64(w) + d) / (c * uf + d)).ln() / c),
            ExtRational::Infinite => ExtValue::Infinite,
        };
    }
    if w.is_infinite() && p.exp < one {
        return ExtValue::Infinite;
    }
    let f = |s: f64| 1.0 / p.value_f64(s);
    let wf = w.to_f64();
    let head_end = if uf > 0.0 { uf } else { wf.min(1.0) };
    let head = if uf > 0.0 { 0.0 } else { numeric::integrate(&f, 0.0, head_end, 1e-14) };
    let decay = if wf.is_infinite() { Some(p.pf - 1.0) } else { None };
    let rest = if head_end < wf { numeric::integrate_log(&f, head_end, wf, decay) } else { 0.0 };
    ExtValue::from_f64(head + rest)
}

/// `∫_a^b 1/φ` for `0 ≤ a ≤ b ≤ α` (`b` may be `∞` on an infinite domain).
pub fn reciprocal_integral_range(phi: &ShapeFunction, a: &Rational, b: &ExtRational) -> Result<ExtValue> {
    if a.is_negative() || &ExtRational::Finite(a.clone()) > b || b > &phi.alpha {
        return Err(Error::OutOfRange(format!("range [{a}, {b}] outside [0, {}]", phi.alpha)));
    }
    let mut total = ExtValue::zero();
    for p in &phi.pieces {
        let lo = std::cmp::max(&p.from, a).clone();
        let hi = std::cmp::min(&p.to, b).clone();
        if hi <= ExtRational::Finite(lo.clone()) {
            continue;
        }
        total = total.add(&piece_reciprocal(p, &lo, &hi));
        if total.is_infinite() {
            break;
        }
    }
    Ok(total)
}

/// `∫₀ᵗ 1/φ` for `0 < t ≤ α`.
pub fn reciprocal_integral(phi: &ShapeFunction, t: &Rational) -> Result<ExtValue> {
    if !t.is_positive() {
        return Err(Error::OutOfRange("reciprocal integral needs t > 0".into()));
    }
    reciprocal_integral_range(phi, &Rational::zero(), &ExtRational::Finite(t.clone()))
}

/// Crossings of two piece formulas strictly inside `(u, w)`.
fn crossings(a: &ShapePiece, b: &ShapePiece, u: &Rational, w: &ExtRational) -> Result<Vec<Rational>> {
    let inside = |t: &Rational| t > u && &ExtRational::Finite(t.clone()) < w;
    if a.is_monomial() && b.is_monomial() {
        if a.exp == b.exp {
            return Ok(vec![]);
        }
        let e = (&a.exp - &b.exp).recip();
        let t = ExtValue::rational(&b.coef / &a.coef).powr(&e);
        let t = match t.as_rational() {
            Some(r) => r.clone(),
            None => rational_from_f64(t.to_f64())?,
        };
        return Ok(if inside(&t) { vec![t] } else { vec![] });
    }
    let (lo, hi) = search_range(u, w);
    let g = |t: f64| a.value_f64(t) - b.value_f64(t);
    numeric::roots(&g, lo, hi, 512)
        .into_iter()
        .map(rational_from_f64)
        .filter(|r| r.as_ref().map_or(true, inside))
        .collect()
}

/// Pointwise maximum of two shapes on the same domain.
pub fn max_with(phi0: &ShapeFunction, phi1: &ShapeFunction) -> Result<ShapeFunction> {
    if phi0.alpha != phi1.alpha {
        return Err(Error::DomainMismatch("shapes on different domains".into()));
    }
    let mut cuts = phi0.breakpoints();
    cuts.extend(phi1.breakpoints());
    let mut pieces = Vec::new();
    for (u, w) in cells(cuts, &phi0.alpha) {
        let m = midpoint(&u, &w);
        let a = &phi0.pieces[phi0.piece_index(&m)];
        let b = &phi1.pieces[phi1.piece_index(&m)];
        let mut sub = crossings(a, b, &u, &w)?;
        sub.sort();
        sub.dedup();
        let mut start = u.clone();
        for end in sub.iter().map(|t| ExtRational::Finite(t.clone())).chain(std::iter::once(w.clone())) {
            let mid = midpoint(&start, &end);
            let pick = if a.value(&mid) >= b.value(&mid) { a } else { b };
            pieces.push(ShapePiece::new(start.clone(), end.clone(), pick.coef.clone(), pick.exp.clone(), pick.offset.clone()));
            if let ExtRational::Finite(e) = end {
                start = e;
            }
        }
    }
    ShapeFunction::new(merge_pieces(pieces), phi0.alpha.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    fn sqrt_shape() -> ShapeFunction {
        ShapeFunction::power(int(1), rat(1, 2))
    }

    fn two_piece(c0: i64, p0: Rational, c1: i64, p1: Rational) -> ShapeFunction {
        ShapeFunction::from_monomials(&[(int(0), Some(int(1)), int(c0), p0), (int(1), None, int(c1), p1)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(sqrt_shape().eval(&int(4)).unwrap(), ExtValue::rational(int(2)));
        let jump = two_piece(1, int(1), 2, int(1));
        assert_eq!(jump.eval(&int(1)).unwrap(), ExtValue::one());
        assert_eq!(jump.right_limit(&int(1)), ExtValue::rational(int(2)));
        let m = two_piece(1, int(0), 1, int(1));
        assert_eq!(eval_limits(&m), (ExtValue::one(), ExtValue::Infinite));
        let bounded = ShapeFunction::new(vec![ShapePiece::new(int(0), ExtRational::int(3), int(1), int(1), int(0))], ExtRational::int(3)).unwrap();
        assert!(bounded.eval(&int(3)).is_err());
        assert_eq!(bounded.limit_at_inf(), ExtValue::rational(int(3)));
    }

    #[test]
    fn construction_rejects_bad_tilings() {
        let gap = vec![
            ShapePiece::new(int(0), ExtRational::int(1), int(1), int(1), int(0)),
            ShapePiece::new(int(2), ExtRational::Infinite, int(1), int(1), int(0)),
        ];
        assert!(ShapeFunction::new(gap, ExtRational::Infinite).is_err());
        let zero_coef = vec![ShapePiece::new(int(0), ExtRational::Infinite, int(0), int(1), int(0))];
        assert!(ShapeFunction::new(zero_coef, ExtRational::Infinite).is_err());
        let down = two_piece(2, int(1), 1, int(1));
        assert!(!down.is_monotone());
    }

    #[test]
    fn delta2_examples() {
        for (p, expected) in [(int(0), 1.0), (rat(1, 2), 2f64.sqrt()), (int(1), 2.0), (int(2), 4.0)] {
            let c = delta2_constant(&ShapeFunction::power(int(1), p));
            assert!((c.to_f64() - expected).abs() < 1e-15);
            assert!(c.is_exact());
        }
        assert_eq!(delta2_constant(&two_piece(1, int(1), 1, int(2))), ExtValue::rational(int(4)));
        assert_eq!(delta2_constant(&two_piece(1, int(1), 2, int(1))), ExtValue::rational(int(4)));
        assert_eq!(delta2_constant(&two_piece(1, int(1), 1, int(3))), ExtValue::rational(int(8)));
    }

    #[test]
    fn admissibility_reports() {
        let r = check_admissible(&sqrt_shape());
        assert!(r.admissible);
        assert_eq!(r.delta2_constant, ExtValue::rational(int(2)).powr(&rat(1, 2)));
        let r = check_admissible(&ShapeFunction::power(int(1), int(0)));
        assert!(r.admissible);
        assert_eq!(r.delta2_constant, ExtValue::one());
        assert!(!check_admissible(&two_piece(2, int(1), 1, int(1))).admissible);
    }

    #[test]
    fn wqc_examples() {
        assert_eq!(wqc_constant(&sqrt_shape()), ExtValue::one());
        assert!(wqc_constant(&ShapeFunction::power(int(1), int(2))).is_infinite());
        assert_eq!(wqc_constant(&ShapeFunction::power(int(1), int(0))), ExtValue::one());
        let jump = two_piece(1, int(1), 2, int(1));
        assert_eq!(wqc_constant(&jump), ExtValue::rational(int(2)));
    }

    #[test]
    fn bar_examples() {
        assert_eq!(bar(&sqrt_shape()).unwrap(), sqrt_shape());
        assert_eq!(bar(&ShapeFunction::power(int(1), int(1))).unwrap(), ShapeFunction::power(int(1), int(0)));
        let min_t_1 = two_piece(1, int(1), 1, int(0));
        assert_eq!(bar(&min_t_1).unwrap(), two_piece(1, int(0), 1, int(1)));
        let jump = two_piece(1, int(1), 2, int(1));
        assert!(!bar(&jump).unwrap().is_monotone());
        assert_eq!(bar(&bar(&jump).unwrap()).unwrap(), jump);
    }

    #[test]
    fn reciprocal_integral_examples() {
        assert_eq!(reciprocal_integral(&sqrt_shape(), &int(1)).unwrap(), ExtValue::rational(int(2)));
        assert!(reciprocal_integral(&ShapeFunction::power(int(1), int(1)), &int(3)).unwrap().is_infinite());
        assert_eq!(reciprocal_integral(&ShapeFunction::power(int(1), int(0)), &int(5)).unwrap(), ExtValue::rational(int(5)));
        let m = two_piece(1, int(0), 1, int(1));
        let v = reciprocal_integral(&m, &int(4)).unwrap();
        assert!((v.to_f64() - (1.0 + 4f64.ln())).abs() < 1e-12);
        let one_plus_t = ShapeFunction::new(vec![ShapePiece::new(int(0), ExtRational::Infinite, int(1), int(1), int(1))], ExtRational::Infinite).unwrap();
        let v = reciprocal_integral(&one_plus_t, &int(3)).unwrap();
        assert!((v.to_f64() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn max_with_examples() {
        let t = ShapeFunction::power(int(1), int(1));
        let one = ShapeFunction::power(int(1), int(0));
        assert_eq!(max_with(&t, &one).unwrap(), two_piece(1, int(0), 1, int(1)));
        let sq = ShapeFunction::power(int(1), int(2));
        assert_eq!(max_with(&sqrt_shape(), &sq).unwrap(), two_piece(1, rat(1, 2), 1, int(2)));
        assert_eq!(max_with(&sqrt_shape(), &sqrt_shape()).unwrap(), sqrt_shape());
    }

    #[test]
    fn majorant_of_min_is_itself() {
        let min_t_1 = two_piece(1, int(1), 1, int(0));
        let maj = concave_majorant(&min_t_1, 200).unwrap();
        assert!((maj.ratio - 1.0).abs() < 1e-12);
        for t in [0.01, 0.5, 1.0, 3.0, 100.0] {
            assert!((maj.shape.eval_f64(t) - min_t_1.eval_f64(t)).abs() < 1e-12);
        }
        assert!(concave_majorant(&ShapeFunction::power(int(1), int(2)), 10).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"pieces":[{"from":"0","to":"1","coef":1.0,"exp":0.5},{"from":"1","to":"inf","coef":"1","exp":"2"}],"alpha":"inf"}"#;
        let phi = ShapeFunction::from_json(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(phi, two_piece(1, rat(1, 2), 1, int(2)));
        assert_eq!(ShapeFunction::from_json(&phi.to_json()).unwrap(), phi);
    }
}
