//! Rearrangement-invariant quasinorms evaluated on step functions.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::corpus::{random_step, trial_rng, StepOptions};
use crate::error::{Error, Result};
use crate::json;
use crate::represent;
use crate::shapefn::{self, ShapeFunction, ShapePiece};
use crate::stepcore::{self, maximal, rearrange, restrict, Layout, MonotoneStep, SequenceFn, StepFunction, Window};
use crate::value::{format_float, int, rational_from_f64, ExtRational, ExtValue, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSpec {
    Lp(ExtRational),
    Lorentz(ExtRational, ExtRational),
    /// `m_φ`: `sup φ(t) f*(t)`.
    WeakMarcinkiewicz(ShapeFunction),
    /// `M_φ`: `sup φ(t) f**(t)`.
    Marcinkiewicz(ShapeFunction),
    /// `Λ_φ`: `∫ f* dφ`.
    LorentzEndpoint(ShapeFunction),
    SumL1Linf,
    CapL1Linf,
    WL(Box<SpaceSpec>, Box<SpaceSpec>),
    Atomic(Rational, Box<SpaceSpec>),
}

fn positive_exponent(p: &ExtRational, name: &str) -> Result<()> {
    match p {
        ExtRational::Finite(x) if !x.is_positive() => Err(Error::InvalidSpace(format!("{name} must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn monotone_shape(phi: &ShapeFunction) -> Result<()> {
    if !phi.is_monotone() {
        return Err(Error::InvalidShape("φ must be non-decreasing".into()));
    }
    Ok(())
}

impl SpaceSpec {
    pub fn lp(p: ExtRational) -> Result<Self> {
        positive_exponent(&p, "p")?;
        Ok(SpaceSpec::Lp(p))
    }

    pub fn lorentz(p: ExtRational, q: ExtRational) -> Result<Self> {
        positive_exponent(&p, "p")?;
        positive_exponent(&q, "q")?;
        if p.is_infinite() && !q.is_infinite() {
            return Err(Error::InvalidSpace("Lorentz space with p = ∞ needs q = ∞".into()));
        }
        Ok(SpaceSpec::Lorentz(p, q))
    }

    pub fn weak_marcinkiewicz(phi: ShapeFunction) -> Result<Self> {
        monotone_shape(&phi)?;
        Ok(SpaceSpec::WeakMarcinkiewicz(phi))
    }

    pub fn marcinkiewicz(phi: ShapeFunction) -> Result<Self> {
        monotone_shape(&phi)?;
        Ok(SpaceSpec::Marcinkiewicz(phi))
    }

    /// Requires every piece to be concave (`0 ≤ p ≤ 1`).
    pub fn lorentz_endpoint(phi: ShapeFunction) -> Result<Self> {
        monotone_shape(&phi)?;
        if phi.pieces().iter().any(|p| p.exp() > &Rational::one()) {
            return Err(Error::InvalidShape("Lorentz endpoint space needs concave pieces".into()));
        }
        Ok(SpaceSpec::LorentzEndpoint(phi))
    }

    pub fn wl(local: SpaceSpec, global: SpaceSpec) -> Result<Self> {
        if local.is_atomic() || global.is_atomic() {
            return Err(Error::InvalidSpace("amalgam components must be non-atomic".into()));
        }
        Ok(SpaceSpec::WL(Box::new(local), Box::new(global)))
    }

    pub fn atomic(beta: Rational, inner: SpaceSpec) -> Result<Self> {
        if !beta.is_positive() {
            return Err(Error::InvalidSpace("atom measure must be positive".into()));
        }
        if inner.is_atomic() {
            return Err(Error::InvalidSpace("inner space must be non-atomic".into()));
        }
        Ok(SpaceSpec::Atomic(beta, Box::new(inner)))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, SpaceSpec::Atomic(..))
    }

    pub fn shape(&self) -> Option<&ShapeFunction> {
        match self {
            SpaceSpec::WeakMarcinkiewicz(phi) | SpaceSpec::Marcinkiewicz(phi) | SpaceSpec::LorentzEndpoint(phi) => Some(phi),
            _ => None,
        }
    }

    /// Domain bound forced by the spec's shape function, if any.
    pub fn domain(&self) -> Option<&ExtRational> {
        match self {
            SpaceSpec::WL(a, b) => a.domain().or_else(|| b.domain()),
            SpaceSpec::Atomic(_, inner) => inner.domain(),
            _ => self.shape().map(ShapeFunction::alpha),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpaceSpec::Lp(p) => format!("L^{p}"),
            SpaceSpec::Lorentz(p, q) => format!("L^{{{p},{q}}}"),
            SpaceSpec::WeakMarcinkiewicz(_) => "m_phi".into(),
            SpaceSpec::Marcinkiewicz(_) => "M_phi".into(),
            SpaceSpec::LorentzEndpoint(_) => "Lambda_phi".into(),
            SpaceSpec::SumL1Linf => "L^1+L^inf".into(),
            SpaceSpec::CapL1Linf => "L^1∩L^inf".into(),
            SpaceSpec::WL(a, b) => format!("WL({}, {})", a.label(), b.label()),
            SpaceSpec::Atomic(beta, inner) => format!("atomic({beta}, {})", inner.label()),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = json::object(v)?;
        let kind = match json::field(obj, "kind")? {
            Value::String(s) => s.as_str(),
            other => return Err(Error::Parse(format!("\"kind\" must be a string, got {other}"))),
        };
        let exponent = |key: &str| json::as_ext_rational(json::field(obj, key)?);
        let phi = || ShapeFunction::from_json(json::field(obj, "phi")?);
        match kind {
            "lp" => SpaceSpec::lp(exponent("p")?),
            "lorentz" => SpaceSpec::lorentz(exponent("p")?, exponent("q")?),
            "weak_marcinkiewicz" => SpaceSpec::weak_marcinkiewicz(phi()?),
            "marcinkiewicz" => SpaceSpec::marcinkiewicz(phi()?),
            "lorentz_endpoint" => SpaceSpec::lorentz_endpoint(phi()?),
            "sum_l1_linf" => Ok(SpaceSpec::SumL1Linf),
            "cap_l1_linf" => Ok(SpaceSpec::CapL1Linf),
            "wl" => SpaceSpec::wl(
                SpaceSpec::from_json(json::field(obj, "local")?)?,
                SpaceSpec::from_json(json::field(obj, "global")?)?,
            ),
            "atomic" => SpaceSpec::atomic(json::rational_field(obj, "beta")?, SpaceSpec::from_json(json::field(obj, "inner")?)?),
            other => Err(Error::Parse(format!("unknown space kind \"{other}\""))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SpaceSpec::Lp(p) => json!({"kind": "lp", "p": json::string(p)}),
            SpaceSpec::Lorentz(p, q) => json!({"kind": "lorentz", "p": json::string(p), "q": json::string(q)}),
            SpaceSpec::WeakMarcinkiewicz(phi) => json!({"kind": "weak_marcinkiewicz", "phi": phi.to_json()}),
            SpaceSpec::Marcinkiewicz(phi) => json!({"kind": "marcinkiewicz", "phi": phi.to_json()}),
            SpaceSpec::LorentzEndpoint(phi) => json!({"kind": "lorentz_endpoint", "phi": phi.to_json()}),
            SpaceSpec::SumL1Linf => json!({"kind": "sum_l1_linf"}),
            SpaceSpec::CapL1Linf => json!({"kind": "cap_l1_linf"}),
            SpaceSpec::WL(a, b) => json!({"kind": "wl", "local": a.to_json(), "global": b.to_json()}),
            SpaceSpec::Atomic(beta, inner) => {
                json!({"kind": "atomic", "beta": json::string(&ExtRational::Finite(beta.clone())), "inner": inner.to_json()})
            }
        }
    }
}

fn check_domain(phi: &ShapeFunction, fstar: &MonotoneStep) -> Result<()> {
    if phi.alpha() != fstar.alpha() {
        return Err(Error::DomainMismatch(format!("φ lives on (0, {}) but f on [0, {})", phi.alpha(), fstar.alpha())));
    }
    Ok(())
}

pub fn norm(spec: &SpaceSpec, f: &StepFunction) -> Result<ExtValue> {
    norm_rearranged(spec, &rearrange(f))
}

/// Quasinorm evaluated directly on `f*`.
pub fn norm_rearranged(spec: &SpaceSpec, fstar: &MonotoneStep) -> Result<ExtValue> {
    let segs = fstar.segments();
    match spec {
        SpaceSpec::Lp(ExtRational::Infinite) | SpaceSpec::Lorentz(ExtRational::Infinite, _) => {
            Ok(ExtValue::rational(fstar.head().clone()))
        }
        SpaceSpec::Lp(ExtRational::Finite(p)) => {
            let mut sum = ExtValue::zero();
            for s in segs.iter().filter(|s| !s.value.is_zero()) {
                let term = ExtValue::rational(s.value.clone()).powr(p).mul(&ExtValue::from_ext_rational(&s.length()));
                sum = sum.add(&term);
            }
            Ok(sum.powr(&p.recip()))
        }
        SpaceSpec::Lorentz(ExtRational::Finite(p), ExtRational::Infinite) => {
            let e = p.recip();
            Ok(segs.iter().fold(ExtValue::zero(), |best, s| {
                best.max(ExtValue::from_ext_rational(&s.end).powr(&e).mul_rational(&s.value))
            }))
        }
        SpaceSpec::Lorentz(ExtRational::Finite(p), ExtRational::Finite(q)) => {
            // (p/q) Σ b_i^{q/p} (v_i^q − v_{i+1}^q), then the 1/q-th power.
            let e = q / p;
            let mut sum = ExtValue::zero();
            for (i, s) in segs.iter().enumerate() {
                let next = segs.get(i + 1).map_or_else(Rational::zero, |n| n.value.clone());
                let drop = ExtValue::rational(s.value.clone()).powr(q).sub_clamped(&ExtValue::rational(next).powr(q));
                sum = sum.add(&ExtValue::from_ext_rational(&s.end).powr(&e).mul(&drop));
            }
            Ok(sum.mul_rational(&(p / q)).powr(&q.recip()))
        }
        SpaceSpec::WeakMarcinkiewicz(phi) => {
            check_domain(phi, fstar)?;
            Ok(segs.iter().fold(ExtValue::zero(), |best, s| best.max(phi.at(&s.end).mul_rational(&s.value))))
        }
        SpaceSpec::Marcinkiewicz(phi) => {
            check_domain(phi, fstar)?;
            Ok(marcinkiewicz_norm(phi, fstar))
        }
        SpaceSpec::LorentzEndpoint(phi) => {
            check_domain(phi, fstar)?;
            let mut sum = ExtValue::zero();
            for (i, s) in segs.iter().enumerate() {
                let next = segs.get(i + 1).map_or_else(Rational::zero, |n| n.value.clone());
                sum = sum.add(&phi.at(&s.end).mul_rational(&(&s.value - next)));
            }
            Ok(sum)
        }
        SpaceSpec::SumL1Linf => {
            let one = ExtRational::Finite(Rational::one());
            let end = std::cmp::min(&one, fstar.alpha()).clone();
            Ok(ExtValue::from_ext_rational(&stepcore::integrate(fstar, &Rational::zero(), &end)?))
        }
        SpaceSpec::CapL1Linf => {
            let total = stepcore::integrate(fstar, &Rational::zero(), fstar.alpha())?;
            Ok(ExtValue::from_ext_rational(&total.add(&ExtRational::Finite(fstar.head().clone()))))
        }
        SpaceSpec::WL(local, global) => {
            let a = norm(local, &restrict(fstar, Window::Local))?;
            let b = norm(global, &restrict(fstar, Window::Global))?;
            Ok(a.add(&b))
        }
        SpaceSpec::Atomic(beta, inner) => represent::rep_norm_rearranged(beta, inner, fstar),
    }
}

/// `sup φ(t) f**(t)`. On a cell where both `φ = c t^p + d` and `f* = v` are
/// single formulas, `φ(t)(v + B/t)` has no interior maximum, so only the cell
/// ends (and the limit at infinity) matter.
fn marcinkiewicz_norm(phi: &ShapeFunction, fstar: &MonotoneStep) -> ExtValue {
    let mf = maximal(fstar);
    let mut cuts: Vec<Rational> = fstar.steps().iter().map(|s| s.start.clone()).collect();
    cuts.extend(phi.breakpoints());
    let mut best = ExtValue::zero();
    for (u, w) in shapefn::cells(cuts, phi.alpha()) {
        let piece = &phi.pieces()[phi.piece_index(&shapefn::midpoint(&u, &w))];
        let at_u = if u.is_zero() {
            piece.value(&u).mul_rational(fstar.head())
        } else {
            piece.value(&u).mul_rational(&mf.value_at(&u))
        };
        let at_w = match &w {
            ExtRational::Finite(x) => piece.value(x).mul_rational(&mf.value_at(x)),
            ExtRational::Infinite => marcinkiewicz_limit(piece, fstar, &mf),
        };
        best = best.max(at_u).max(at_w);
    }
    best
}

fn marcinkiewicz_limit(piece: &ShapePiece, fstar: &MonotoneStep, mf: &stepcore::MaximalFunction) -> ExtValue {
    let tail = fstar.tail();
    if tail.is_positive() {
        return piece.end_value().mul_rational(tail);
    }
    let last = fstar.steps().last().expect("non-empty");
    let area = mf.integral_to(&last.start);
    if area.is_zero() {
        return ExtValue::zero();
    }
    match piece.exp().cmp(&Rational::one()) {
        Ordering::Less => ExtValue::zero(),
        Ordering::Equal => ExtValue::rational(piece.coef() * area),
        Ordering::Greater => ExtValue::Infinite,
    }
}

/// Quasinorm of a sequence through the step realization of `g*`.
pub fn norm_seq(spec: &SpaceSpec, g: &SequenceFn) -> Result<ExtValue> {
    match spec {
        SpaceSpec::Atomic(beta, inner) => {
            if beta != g.atom() {
                return Err(Error::DomainMismatch(format!("atom measure {} differs from {beta}", g.atom())));
            }
            norm(inner, &g.realization())
        }
        _ => Err(Error::Precondition("sequence norms need an atomic space".into())),
    }
}

/// A fundamental function, flagged when only equivalent to `t ↦ ‖χ_[0,t)‖`.
///
/// When the closed form has an irrational coefficient `c·t^e`, `shape` carries
/// the nearest float coefficient and `exact` keeps `(c, e)` for [`Fundamental::value`].
#[derive(Clone, Debug, PartialEq)]
pub struct Fundamental {
    pub shape: ShapeFunction,
    pub up_to_equivalence: bool,
    pub exact: Option<(ExtValue, Rational)>,
}

impl Fundamental {
    /// `φ(t)`, exact whenever the closed form is.
    pub fn value(&self, t: &Rational) -> Result<ExtValue> {
        let rounded = self.shape.eval(t)?;
        Ok(match &self.exact {
            Some((c, e)) => ExtValue::rational(t.clone()).powr(e).mul(c),
            None => rounded,
        })
    }
}

fn monomial(from: Rational, to: ExtRational, coef: Rational, exp: Rational) -> ShapePiece {
    ShapePiece::new(from, to, coef, exp, Rational::zero())
}

/// `φ` cut down to `(0, α)`; `α` must not exceed the domain of `φ`.
pub fn truncate(phi: &ShapeFunction, alpha: &ExtRational) -> Result<ShapeFunction> {
    if alpha > phi.alpha() {
        return Err(Error::DomainMismatch(format!("cannot extend φ beyond {}", phi.alpha())));
    }
    let pieces = phi
        .pieces()
        .iter()
        .filter(|p| &ExtRational::Finite(p.from().clone()) < alpha)
        .map(|p| {
            let to = std::cmp::min(p.to(), alpha).clone();
            ShapePiece::new(p.from().clone(), to, p.coef().clone(), p.exp().clone(), p.offset().clone())
        })
        .collect();
    ShapeFunction::new(pieces, alpha.clone())
}

fn single(coef: Rational, exp: Rational, alpha: &ExtRational) -> Result<ShapeFunction> {
    truncate(&ShapeFunction::power(coef, exp), alpha)
}

/// Closed-form `t ↦ ‖χ_[0,t)‖_X` on `(0, α)`.
pub fn fundamental(spec: &SpaceSpec, alpha: &ExtRational) -> Result<Fundamental> {
    let exact = |shape| Ok(Fundamental { shape, up_to_equivalence: false, exact: None });
    match spec {
        SpaceSpec::Lp(ExtRational::Infinite) | SpaceSpec::Lorentz(ExtRational::Infinite, _) => {
            exact(single(int(1), int(0), alpha)?)
        }
        SpaceSpec::Lp(ExtRational::Finite(p)) => exact(single(int(1), p.recip(), alpha)?),
        SpaceSpec::Lorentz(ExtRational::Finite(p), ExtRational::Infinite) => exact(single(int(1), p.recip(), alpha)?),
        SpaceSpec::Lorentz(ExtRational::Finite(p), ExtRational::Finite(q)) => {
            let c = ExtValue::rational(p / q).powr(&q.recip());
            match c.as_rational() {
                Some(r) => exact(single(r.clone(), p.recip(), alpha)?),
                None => Ok(Fundamental {
                    shape: single(rational_from_f64(c.to_f64())?, p.recip(), alpha)?,
                    up_to_equivalence: false,
                    exact: Some((c, p.recip())),
                }),
            }
        }
        SpaceSpec::WeakMarcinkiewicz(phi) | SpaceSpec::Marcinkiewicz(phi) | SpaceSpec::LorentzEndpoint(phi) => {
            if phi.alpha() != alpha {
                return Err(Error::DomainMismatch(format!("φ lives on (0, {}) not (0, {alpha})", phi.alpha())));
            }
            exact(phi.clone())
        }
        SpaceSpec::SumL1Linf => {
            let pieces = vec![
                monomial(int(0), ExtRational::int(1), int(1), int(1)),
                monomial(int(1), ExtRational::Infinite, int(1), int(0)),
            ];
            exact(truncate(&ShapeFunction::new(pieces, ExtRational::Infinite)?, alpha)?)
        }
        SpaceSpec::CapL1Linf => {
            let piece = ShapePiece::new(int(0), ExtRational::Infinite, int(1), int(1), int(1));
            exact(truncate(&ShapeFunction::new(vec![piece], ExtRational::Infinite)?, alpha)?)
        }
        SpaceSpec::WL(local, global) => {
            let one = ExtRational::int(1);
            let a = fundamental(local, alpha)?;
            if alpha <= &one {
                return Ok(a);
            }
            let b = fundamental(global, alpha)?;
            // ‖χ_[0,t)‖ = φ_A(1) + φ_B(t − 1) for t > 1, replaced by the equivalent φ_A(1) + φ_B(t).
            let head = truncate(&a.shape, &one)?;
            let lift = head.at(&one);
            let lift = match lift.as_rational() {
                Some(r) => r.clone(),
                None => rational_from_f64(lift.to_f64())?,
            };
            let mut pieces: Vec<ShapePiece> = head.pieces().to_vec();
            for p in b.shape.pieces() {
                if p.to() <= &one {
                    continue;
                }
                let from = std::cmp::max(p.from(), &int(1)).clone();
                pieces.push(ShapePiece::new(from, p.to().clone(), p.coef().clone(), p.exp().clone(), p.offset() + &lift));
            }
            Ok(Fundamental { shape: ShapeFunction::new(pieces, alpha.clone())?, up_to_equivalence: true, exact: None })
        }
        SpaceSpec::Atomic(..) => Err(Error::Unsupported("fundamental functions are defined for non-atomic spaces".into())),
    }
}

/// Globally concave on `(0, α)`: concave pieces, no jumps, non-increasing slopes.
pub fn is_concave(phi: &ShapeFunction) -> bool {
    let pieces = phi.pieces();
    if pieces.iter().any(|p| p.exp().is_negative() || p.exp() > &Rational::one()) || !phi.is_continuous() {
        return false;
    }
    pieces.windows(2).all(|w| {
        let b = w[1].from();
        let slope = |p: &ShapePiece| {
            if p.exp().is_zero() {
                ExtValue::zero()
            } else {
                ExtValue::rational(b.clone()).powr(&(p.exp() - Rational::one())).mul_rational(&(p.coef() * p.exp()))
            }
        };
        slope(&w[1]).le_tol(&slope(&w[0]), 1e-12, 0.0)
    })
}

/// Declared modulus of concavity; `∞` when no bound is claimed.
pub fn modulus_bound(spec: &SpaceSpec) -> ExtValue {
    let two = ExtValue::rational(int(2));
    match spec {
        SpaceSpec::Lp(ExtRational::Finite(p)) if p < &Rational::one() => two.powr(&(p.recip() - Rational::one())),
        SpaceSpec::Lp(_) => ExtValue::one(),
        SpaceSpec::Lorentz(ExtRational::Infinite, _) => ExtValue::one(),
        SpaceSpec::Lorentz(ExtRational::Finite(p), q) => {
            let inner = match q {
                ExtRational::Finite(q) if q < &Rational::one() => two.powr(&(q.recip() - Rational::one())),
                _ => ExtValue::one(),
            };
            two.powr(&p.recip()).mul(&inner)
        }
        SpaceSpec::WeakMarcinkiewicz(phi) => shapefn::delta2_constant(phi),
        SpaceSpec::Marcinkiewicz(_) | SpaceSpec::SumL1Linf | SpaceSpec::CapL1Linf => ExtValue::one(),
        SpaceSpec::LorentzEndpoint(phi) => {
            if is_concave(phi) {
                ExtValue::one()
            } else {
                ExtValue::Infinite
            }
        }
        SpaceSpec::WL(..) => ExtValue::Infinite,
        SpaceSpec::Atomic(_, inner) => {
            let c = modulus_bound(inner);
            c.mul(&c).mul_rational(&int(4))
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeResult {
    pub measured: f64,
    pub bound: ExtValue,
    pub trials: usize,
    /// The pair attaining `measured`.
    pub witness: Option<(StepFunction, StepFunction)>,
}

impl ProbeResult {
    pub fn within_bound(&self) -> bool {
        ExtValue::from_f64(self.measured).le_tol(&self.bound, 1e-9, 0.0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "measured": format_float(self.measured),
            "bound": self.bound.to_string(),
            "trials": self.trials,
            "within_bound": self.within_bound(),
        })
    }
}

/// Ratio `‖f+g‖ / (‖f‖ + ‖g‖)`, or `None` when undefined.
pub fn triangle_ratio(spec: &SpaceSpec, f: &StepFunction, g: &StepFunction) -> Result<Option<f64>> {
    let sum = stepcore::add(f, g)?;
    let lhs = norm(spec, &sum)?;
    let rhs = norm(spec, f)?.add(&norm(spec, g)?);
    if rhs.is_zero() || rhs.is_infinite() {
        return Ok(None);
    }
    Ok(Some(lhs.ratio(&rhs)))
}

/// Largest `‖f+g‖/(‖f‖+‖g‖)` over seeded random pairs.
pub fn modulus_probe(spec: &SpaceSpec, trials: usize, seed: u64) -> Result<ProbeResult> {
    let alpha = spec.domain().cloned().unwrap_or(ExtRational::Infinite);
    let opts = StepOptions::default().with_alpha(alpha);
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let f = random_step(&mut rng, &opts);
            let g = random_step(&mut rng, &opts);
            triangle_ratio(spec, &f, &g).map(|r| (r, f, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ProbeResult { measured: 0.0, bound: modulus_bound(spec), trials, witness: None };
    for (r, f, g) in results {
        if let Some(r) = r {
            if r > out.measured {
                out.measured = r;
                out.witness = Some((f, g));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    fn lp(p: Rational) -> SpaceSpec {
        SpaceSpec::lp(ExtRational::Finite(p)).unwrap()
    }

    fn step(triples: &[(i64, i64, i64)]) -> StepFunction {
        StepFunction::from_triples(&triples.iter().map(|&(a, b, v)| (int(a), int(b), int(v))).collect::<Vec<_>>()).unwrap()
    }

    fn t_shape() -> ShapeFunction {
        ShapeFunction::power(int(1), int(1))
    }

    #[test]
    fn lp_values() {
        assert_eq!(norm(&lp(int(2)), &step(&[(0, 4, 1)])).unwrap(), ExtValue::rational(int(2)));
        let linf = SpaceSpec::lp(ExtRational::Infinite).unwrap();
        assert_eq!(norm(&linf, &step(&[(1, 2, 3)])).unwrap(), ExtValue::rational(int(3)));
        let f = step(&[(0, 1, 3), (1, 2, 1), (2, 3, 2)]);
        assert_eq!(norm(&lp(int(2)), &f).unwrap(), ExtValue::rational(int(14)).powr(&rat(1, 2)));
        assert_eq!(norm(&lp(rat(1, 2)), &step(&[(0, 2, 1)])).unwrap(), ExtValue::rational(int(4)));
        let tail = StepFunction::new(vec![], int(1), ExtRational::Infinite).unwrap();
        assert!(norm(&lp(int(1)), &tail).unwrap().is_infinite());
    }

    #[test]
    fn endpoint_spaces() {
        let f = step(&[(0, 1, 2), (1, 2, 1)]);
        let m = SpaceSpec::weak_marcinkiewicz(t_shape()).unwrap();
        assert_eq!(norm(&m, &f).unwrap(), ExtValue::rational(int(2)));
        let big_m = SpaceSpec::marcinkiewicz(t_shape()).unwrap();
        assert_eq!(norm(&big_m, &f).unwrap(), ExtValue::rational(int(3)));
        assert_eq!(norm(&lp(int(1)), &f).unwrap(), ExtValue::rational(int(3)));
        let lambda = SpaceSpec::lorentz_endpoint(ShapeFunction::power(int(1), rat(1, 2))).unwrap();
        let chi = step(&[(0, 4, 1)]);
        assert_eq!(norm(&lambda, &chi).unwrap(), ExtValue::rational(int(2)));
        assert!(SpaceSpec::lorentz_endpoint(ShapeFunction::power(int(1), int(2))).is_err());
    }

    #[test]
    fn sum_and_cap() {
        let f = step(&[(0, 2, 2)]);
        assert_eq!(norm(&SpaceSpec::SumL1Linf, &f).unwrap(), ExtValue::rational(int(2)));
        assert_eq!(norm(&SpaceSpec::CapL1Linf, &f).unwrap(), ExtValue::rational(int(6)));
    }

    #[test]
    fn lorentz_values() {
        let chi = step(&[(0, 4, 1)]);
        let l21 = SpaceSpec::lorentz(ExtRational::int(2), ExtRational::int(1)).unwrap();
        assert_eq!(norm(&l21, &chi).unwrap(), ExtValue::rational(int(4)));
        let l2inf = SpaceSpec::lorentz(ExtRational::int(2), ExtRational::Infinite).unwrap();
        assert_eq!(norm(&l2inf, &chi).unwrap(), ExtValue::rational(int(2)));
        let l22 = SpaceSpec::lorentz(ExtRational::int(2), ExtRational::int(2)).unwrap();
        let f = step(&[(0, 1, 3), (1, 3, 1)]);
        assert_eq!(norm(&l22, &f).unwrap(), norm(&lp(int(2)), &f).unwrap());
        assert!(SpaceSpec::lorentz(ExtRational::Infinite, ExtRational::int(1)).is_err());
    }

    #[test]
    fn sequences() {
        let g = SequenceFn::from_values(&[int(3), int(1), int(2)], int(1)).unwrap();
        let l1 = SpaceSpec::atomic(int(1), lp(int(1))).unwrap();
        let linf = SpaceSpec::atomic(int(1), SpaceSpec::lp(ExtRational::Infinite).unwrap()).unwrap();
        assert_eq!(norm_seq(&l1, &g).unwrap(), ExtValue::rational(int(6)));
        assert_eq!(norm_seq(&linf, &g).unwrap(), ExtValue::rational(int(3)));
        let half = SpaceSpec::atomic(int(1), lp(rat(1, 2))).unwrap();
        let ones = SequenceFn::from_values(&[int(1), int(1)], int(1)).unwrap();
        assert_eq!(norm_seq(&half, &ones).unwrap(), ExtValue::rational(int(4)));
        let other = SpaceSpec::atomic(int(2), lp(int(1))).unwrap();
        assert!(norm_seq(&other, &g).is_err());
    }

    #[test]
    fn fundamentals() {
        let inf = ExtRational::Infinite;
        let sum = fundamental(&SpaceSpec::SumL1Linf, &inf).unwrap();
        assert_eq!(sum.shape.eval(&rat(1, 2)).unwrap(), ExtValue::rational(rat(1, 2)));
        assert_eq!(sum.shape.eval(&int(5)).unwrap(), ExtValue::one());
        let cap = fundamental(&SpaceSpec::CapL1Linf, &inf).unwrap();
        assert_eq!(cap.shape.eval(&int(3)).unwrap(), ExtValue::rational(int(4)));
        let weak = fundamental(&SpaceSpec::lorentz(ExtRational::int(3), inf.clone()).unwrap(), &inf).unwrap();
        assert_eq!(weak.shape, ShapeFunction::power(int(1), rat(1, 3)));
        let wl = SpaceSpec::wl(lp(int(1)), SpaceSpec::lp(inf.clone()).unwrap()).unwrap();
        assert!(fundamental(&wl, &inf).unwrap().up_to_equivalence);
        let bounded = fundamental(&SpaceSpec::SumL1Linf, &rat(1, 2).into()).unwrap();
        assert_eq!(bounded.shape.pieces().len(), 1);
    }

    #[test]
    fn modulus_bounds() {
        assert_eq!(modulus_bound(&lp(rat(1, 2))), ExtValue::rational(int(2)));
        assert_eq!(modulus_bound(&SpaceSpec::weak_marcinkiewicz(t_shape()).unwrap()), ExtValue::rational(int(2)));
        let probe = modulus_probe(&lp(int(1)), 50, 3).unwrap();
        assert!(probe.within_bound());
        assert!(probe.measured <= 1.0);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind":"wl","local":{"kind":"lorentz","p":"2","q":"1"},"global":{"kind":"lp","p":"inf"}}"#;
        let spec = SpaceSpec::from_json(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(SpaceSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(SpaceSpec::from_json(&json!({"kind": "lp", "p": "0"})).is_err());
        assert!(SpaceSpec::from_json(&json!({"kind": "orlicz"})).is_err());
    }
}
