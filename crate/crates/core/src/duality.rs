//! Associate functionals: closed forms, candidate-based lower estimates,
//! Hölder and resonance checks.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::shapefn::{self, ShapeFunction};
use crate::spaces::{self, SpaceSpec};
use crate::stepcore::{self, rearrange, Layout, MonotoneStep, StepFunction};
use crate::value::{format_float, int, rational_from_f64, ExtRational, ExtValue, Rational};

/// A closed-form associate functional.
#[derive(Clone, Debug, PartialEq)]
pub enum AssociateForm {
    Space(SpaceSpec),
    /// `f ↦ ∫ f*/φ`, possibly identically `∞` on nonzero functions.
    WeightedL1(ShapeFunction),
}

impl AssociateForm {
    pub fn to_json(&self) -> Value {
        match self {
            AssociateForm::Space(spec) => spec.to_json(),
            AssociateForm::WeightedL1(phi) => json!({"kind": "weighted_l1", "phi": phi.to_json()}),
        }
    }

    pub fn value(&self, f: &StepFunction) -> Result<ExtValue> {
        match self {
            AssociateForm::Space(spec) => spaces::norm(spec, f),
            AssociateForm::WeightedL1(phi) => weighted_integral(phi, &rearrange(f)),
        }
    }

    /// `‖χ_[0,t)‖` under the associate functional.
    pub fn fundamental_at(&self, t: &Rational) -> Result<ExtValue> {
        match self {
            AssociateForm::Space(spec) => {
                let alpha = spec.domain().cloned().unwrap_or(ExtRational::Infinite);
                spaces::norm(spec, &StepFunction::indicator(Rational::zero(), ExtRational::Finite(t.clone()), Rational::one()).with_alpha(alpha)?)
            }
            AssociateForm::WeightedL1(phi) => shapefn::reciprocal_integral(phi, t),
        }
    }
}

/// `∫ f*/φ` summed over the constancy intervals of `f*`.
pub fn weighted_integral(phi: &ShapeFunction, fstar: &MonotoneStep) -> Result<ExtValue> {
    if phi.alpha() != fstar.alpha() {
        return Err(Error::DomainMismatch("φ and f live on different domains".into()));
    }
    let mut total = ExtValue::zero();
    for s in fstar.segments().iter().filter(|s| !s.value.is_zero()) {
        let part = shapefn::reciprocal_integral_range(phi, &s.start, &s.end)?;
        total = total.add(&part.mul_rational(&s.value));
        if total.is_infinite() {
            break;
        }
    }
    Ok(total)
}

fn dual_exponent(p: &Rational) -> ExtRational {
    if p.is_one() {
        ExtRational::Infinite
    } else {
        ExtRational::Finite(p / (p - Rational::one()))
    }
}

/// The associate functional where a closed form is known.
pub fn associate_closed_form(spec: &SpaceSpec) -> Option<AssociateForm> {
    let space = |s: Result<SpaceSpec>| s.ok().map(AssociateForm::Space);
    match spec {
        SpaceSpec::Lp(ExtRational::Infinite) | SpaceSpec::Lorentz(ExtRational::Infinite, _) => {
            space(SpaceSpec::lp(ExtRational::int(1)))
        }
        SpaceSpec::Lp(ExtRational::Finite(p)) if p >= &Rational::one() => space(SpaceSpec::lp(dual_exponent(p))),
        SpaceSpec::Lorentz(ExtRational::Finite(p), ExtRational::Finite(q)) if p == q && p >= &Rational::one() => {
            space(SpaceSpec::lp(dual_exponent(p)))
        }
        SpaceSpec::Lorentz(ExtRational::Finite(p), ExtRational::Infinite) => {
            Some(AssociateForm::WeightedL1(ShapeFunction::power(int(1), p.recip())))
        }
        SpaceSpec::WeakMarcinkiewicz(phi) => Some(AssociateForm::WeightedL1(phi.clone())),
        SpaceSpec::Marcinkiewicz(phi) => space(shapefn::bar(phi).and_then(SpaceSpec::lorentz_endpoint)),
        SpaceSpec::LorentzEndpoint(phi) => space(shapefn::bar(phi).and_then(SpaceSpec::marcinkiewicz)),
        _ => None,
    }
}

/// `x` rounded to `bits` significant binary digits, as an exact rational.
fn short_dyadic(x: f64, bits: i32) -> Result<Rational> {
    let scale = 2f64.powi(bits - 1 - x.log2().floor() as i32);
    rational_from_f64((x * scale).round() / scale)
}

/// Lower step approximation of `min(1/φ, 1/φ(ε))` on `[0, n)`: geometric
/// knots with the given ratio, each interval carrying `1/φ` at its right end.
pub fn reciprocal_candidate(phi: &ShapeFunction, eps: f64, n: f64, ratio: f64) -> Result<MonotoneStep> {
    if !(eps > 0.0 && n > eps && ratio > 1.0) {
        return Err(Error::OutOfRange("candidate needs 0 < ε < N and ratio > 1".into()));
    }
    let n = n.min(phi.alpha().to_f64());
    let knot = |t: f64| short_dyadic(t, 20);
    let value = |t: f64| short_dyadic(1.0 / phi.eval_f64(t), 32);
    let mut pairs = vec![(Rational::zero(), value(eps)?)];
    let mut t = eps;
    while t < n {
        let next = (t * ratio).min(n);
        pairs.push((knot(t)?, value(next)?));
        t = next;
    }
    pairs.push((knot(n)?, Rational::zero()));
    MonotoneStep::from_pairs(pairs, phi.alpha().clone())
}

#[derive(Clone, Debug)]
pub struct AssociateEstimate {
    pub value: ExtValue,
    /// Index of the best candidate; `None` for the built-in `1/φ` candidate.
    pub best: Option<usize>,
    pub attaining_candidate: MonotoneStep,
}

/// Candidates with their norms precomputed, reusable across many `f`.
#[derive(Clone, Debug)]
pub struct AssociateEstimator {
    pool: Vec<(Option<usize>, MonotoneStep, ExtValue)>,
}

impl AssociateEstimator {
    /// Keeps candidates with finite nonzero norm; for `m_φ` adds `1/φ` on `[10⁻⁴, 10⁴]`.
    pub fn new(spec: &SpaceSpec, candidates: &[MonotoneStep]) -> Result<Self> {
        let mut raw: Vec<(Option<usize>, MonotoneStep)> = candidates.iter().cloned().enumerate().map(|(i, g)| (Some(i), g)).collect();
        if let SpaceSpec::WeakMarcinkiewicz(phi) = spec {
            raw.push((None, reciprocal_candidate(phi, 1e-4, 1e4, 1.002)?));
        }
        let mut pool = Vec::with_capacity(raw.len());
        for (idx, g) in raw {
            let gn = spaces::norm_rearranged(spec, &g)?;
            if !gn.is_zero() && gn.is_finite() {
                pool.push((idx, g, gn));
            }
        }
        if pool.is_empty() {
            return Err(Error::Precondition("every candidate has zero or infinite norm".into()));
        }
        Ok(AssociateEstimator { pool })
    }

    /// `max_g ∫ f*g*/‖g‖_X`.
    pub fn estimate(&self, f: &StepFunction) -> Result<AssociateEstimate> {
        let fstar = rearrange(f);
        let mut best: Option<AssociateEstimate> = None;
        for (idx, g, gn) in &self.pool {
            let pairing = ExtValue::from_ext_rational(&stepcore::integrate_product(&fstar, g)?);
            let value = pairing.checked_div(gn).expect("finite norm");
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(AssociateEstimate { value, best: *idx, attaining_candidate: g.clone() });
            }
        }
        Ok(best.expect("non-empty pool"))
    }
}

/// `max_g ∫ f*g*/‖g‖_X` over the candidates (plus `1/φ` for `m_φ`).
pub fn associate_estimate(spec: &SpaceSpec, f: &StepFunction, candidates: &[MonotoneStep]) -> Result<AssociateEstimate> {
    AssociateEstimator::new(spec, candidates)?.estimate(f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderCheck {
    pub pairing: ExtValue,
    pub bound: ExtValue,
    pub slack: f64,
    pub holds: bool,
}

impl HolderCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "pairing": self.pairing.to_string(),
            "bound": self.bound.to_string(),
            "slack": format_float(self.slack),
            "holds": self.holds,
        })
    }
}

/// `∫ fg ≤ ‖g‖_X ‖f‖_{X'}` with `0·∞ = ∞` on the right.
pub fn holder_check(spec: &SpaceSpec, f: &StepFunction, g: &StepFunction) -> Result<HolderCheck> {
    let dual = associate_closed_form(spec).ok_or_else(|| Error::Precondition(format!("no closed-form associate for {}", spec.label())))?;
    let pairing = ExtValue::from_ext_rational(&stepcore::integrate_product(f, g)?);
    let gn = spaces::norm(spec, g)?;
    let fn_dual = dual.value(f)?;
    let bound = if gn.is_infinite() || fn_dual.is_infinite() { ExtValue::Infinite } else { gn.mul(&fn_dual) };
    let slack = if bound.is_infinite() { f64::INFINITY } else { bound.to_f64() - pairing.to_f64() };
    let holds = pairing.le_tol(&bound, 1e-12, 0.0);
    Ok(HolderCheck { pairing, bound, slack, holds })
}

/// Best rearranged pairing against the Hardy–Littlewood bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceGap {
    pub best: ExtValue,
    pub bound: ExtValue,
}

/// Values of `f` on `n` equal blocks covering the joint support.
fn block_values(f: &StepFunction, block: &Rational, n: usize) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lo = block * Rational::from_integer(k.into());
        let hi = ExtRational::Finite(&lo + block);
        let mut values = f
            .segments()
            .into_iter()
            .filter(|s| ExtRational::Finite(s.start.clone()) < hi && s.end > ExtRational::Finite(lo.clone()))
            .map(|s| s.value);
        let v = values.next().unwrap_or_else(Rational::zero);
        if values.any(|w| w != v) {
            return Err(Error::Precondition(format!("function is not constant on block {k}")));
        }
        out.push(v);
    }
    Ok(out)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    heap(n, &mut current, &mut out);
    out
}

/// Max over block permutations `π` of `∫ f·(g∘π)` against `∫ f*g*`, for
/// functions constant on `n ≤ 8` equal blocks covering their supports.
pub fn resonance_gap(f: &StepFunction, g: &StepFunction, n: usize) -> Result<ResonanceGap> {
    if n == 0 || n > 8 {
        return Err(Error::OutOfRange("block count must be between 1 and 8".into()));
    }
    if f.tail().is_positive() || g.tail().is_positive() {
        return Err(Error::Precondition("resonance check needs bounded supports".into()));
    }
    let end = std::cmp::max(f.support_end(), g.support_end());
    let end = match end {
        ExtRational::Finite(e) if e.is_positive() => e,
        _ => {
            let bound = ExtValue::from_ext_rational(&stepcore::integrate_product(&rearrange(f), &rearrange(g))?);
            return Ok(ResonanceGap { best: bound.clone(), bound });
        }
    };
    let block = end / Rational::from_integer(n.into());
    let fv = block_values(f, &block, n)?;
    let gv = block_values(g, &block, n)?;
    let best = permutations(n)
        .into_iter()
        .map(|pi| fv.iter().zip(&pi).map(|(a, &j)| a * &gv[j]).sum::<Rational>() * &block)
        .max()
        .unwrap_or_else(Rational::zero);
    let fstar = rearrange(f);
    let gstar = rearrange(g).to_step_function().with_alpha(fstar.alpha().clone())?;
    let bound = stepcore::integrate_product(&fstar, &gstar)?;
    Ok(ResonanceGap { best: ExtValue::rational(best), bound: ExtValue::from_ext_rational(&bound) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    fn step(triples: &[(i64, i64, i64)]) -> StepFunction {
        StepFunction::from_triples(&triples.iter().map(|&(a, b, v)| (int(a), int(b), int(v))).collect::<Vec<_>>()).unwrap()
    }

    fn lp(p: i64) -> SpaceSpec {
        SpaceSpec::lp(ExtRational::int(p)).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(associate_closed_form(&lp(1)), Some(AssociateForm::Space(SpaceSpec::lp(ExtRational::Infinite).unwrap())));
        assert_eq!(associate_closed_form(&lp(3)), Some(AssociateForm::Space(SpaceSpec::lp(rat(3, 2).into()).unwrap())));
        let phi = ShapeFunction::power(int(1), rat(1, 3));
        let lambda = SpaceSpec::lorentz_endpoint(phi.clone()).unwrap();
        let expected = SpaceSpec::marcinkiewicz(ShapeFunction::power(int(1), rat(2, 3))).unwrap();
        assert_eq!(associate_closed_form(&lambda), Some(AssociateForm::Space(expected)));
        assert!(associate_closed_form(&SpaceSpec::SumL1Linf).is_none());
        assert!(associate_closed_form(&SpaceSpec::lp(rat(1, 2).into()).unwrap()).is_none());
    }

    #[test]
    fn weak_l1_associate_is_infinite() {
        let m = SpaceSpec::weak_marcinkiewicz(ShapeFunction::power(int(1), int(1))).unwrap();
        let form = associate_closed_form(&m).unwrap();
        assert!(form.value(&step(&[(2, 3, 1)])).unwrap().is_infinite());
        assert!(form.value(&StepFunction::zero(ExtRational::Infinite)).unwrap().is_zero());
    }

    #[test]
    fn estimates() {
        let chi = MonotoneStep::from_pairs(vec![(int(0), int(1)), (int(1), int(0))], ExtRational::Infinite).unwrap();
        let est = associate_estimate(&lp(1), &step(&[(0, 1, 1)]), std::slice::from_ref(&chi)).unwrap();
        assert_eq!(est.value, ExtValue::one());
        let est = associate_estimate(&lp(1), &step(&[(5, 6, 1)]), &[chi]).unwrap();
        assert_eq!(est.value, ExtValue::one());

        let phi = ShapeFunction::power(int(1), rat(1, 2));
        let m = SpaceSpec::weak_marcinkiewicz(phi.clone()).unwrap();
        let truncated = reciprocal_candidate(&phi, 0.01, 1.0, 1.01).unwrap();
        let f = step(&[(0, 1, 1)]);
        let est = associate_estimate(&m, &f, &[truncated]).unwrap();
        let closed = associate_closed_form(&m).unwrap().value(&f).unwrap();
        assert_eq!(closed, ExtValue::rational(int(2)));
        assert!(est.value.to_f64() >= 0.99 * 2.0 && est.value.le_tol(&closed, 1e-12, 0.0));
    }

    #[test]
    fn holder_examples() {
        let chi = step(&[(0, 1, 1)]);
        let c = holder_check(&lp(2), &chi, &chi).unwrap();
        assert!(c.holds && c.slack.abs() < 1e-15);
        let c = holder_check(&lp(1), &step(&[(0, 1, 2)]), &step(&[(0, 2, 1)])).unwrap();
        assert_eq!((c.pairing.to_f64(), c.bound.to_f64()), (2.0, 4.0));
        let weak = SpaceSpec::weak_marcinkiewicz(ShapeFunction::power(int(1), int(1))).unwrap();
        let c = holder_check(&weak, &chi, &StepFunction::zero(ExtRational::Infinite)).unwrap();
        assert!(c.bound.is_infinite() && c.holds);
    }

    #[test]
    fn resonance_examples() {
        let f = step(&[(0, 1, 3), (1, 2, 1)]);
        let g = step(&[(0, 1, 1), (1, 2, 2)]);
        let r = resonance_gap(&f, &g, 2).unwrap();
        assert_eq!(r.best, ExtValue::rational(int(7)));
        assert_eq!(r.best, r.bound);
        let r = resonance_gap(&step(&[(0, 3, 2)]), &g, 1).unwrap_err();
        assert!(matches!(r, Error::Precondition(_)));
        assert_eq!(permutations(4).len(), 24);
    }
}
