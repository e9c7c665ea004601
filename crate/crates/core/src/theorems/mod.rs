//! Checkers for the endpoint-space theorems and the `L^∞` diagnostics.

mod verify;

pub use verify::{run_suite, CheckReport, Suite, Verdict};

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::corpus::{random_step, trial_rng, StepOptions};
use crate::duality::reciprocal_candidate;
use crate::error::{Error, Result};
use crate::numeric;
use crate::shapefn::{self, ShapeFunction, ShapePiece};
use crate::spaces::{self, SpaceSpec};
use crate::stepcore::{self, distribution, rearrange, Layout, MonotoneStep, Piece, StepFunction};
use crate::value::{format_float, format_rational, int, rational_from_f64, rational_to_f64, ExtRational, ExtValue, Rational};

/// `sup_t φ(t)/t · ∫₀ᵗ 1/φ` together with the resulting classification.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointReport {
    pub s: ExtValue,
    pub wqc: ExtValue,
    pub equivalent: bool,
}

impl EndpointReport {
    pub fn to_json(&self) -> Value {
        json!({"S": self.s.to_string(), "wqc_constant": self.wqc.to_string(), "equivalent": self.equivalent})
    }
}

/// `h(t) = φ(t)/t · R(t)` at a finite `t > 0` using the formula of `piece`.
fn endpoint_h(piece: &ShapePiece, t: &Rational, r: &ExtValue) -> ExtValue {
    piece.value(t).checked_div(&ExtValue::rational(t.clone())).expect("finite").mul(r)
}

/// The endpoint constant `S`. On a monomial piece `h(t) = cK t^{p−1} + 1/(1−p)`
/// is monotone (and constant on the first piece), so only piece ends matter.
pub fn endpoint_constant(phi: &ShapeFunction) -> Result<ExtValue> {
    let one = Rational::one();
    let mut best = ExtValue::zero();
    let mut r = ExtValue::zero();
    for piece in phi.pieces() {
        let a = piece.from().clone();
        if piece.is_monomial() {
            if a.is_zero() {
                if piece.exp() >= &one {
                    return Ok(ExtValue::Infinite);
                }
                best = best.max(ExtValue::rational((&one - piece.exp()).recip()));
            } else {
                best = best.max(endpoint_h(piece, &a, &r));
            }
        } else {
            let r0 = r.to_f64();
            let h = |t: f64| {
                let tr = rational_from_f64(t).expect("finite sample");
                let part = shapefn::reciprocal_integral_range(phi, &a, &ExtRational::Finite(tr)).map_or(f64::INFINITY, |v| v.to_f64());
                piece.value_f64(t) / t * (r0 + part)
            };
            let (lo, hi) = shapefn::search_range(&a, piece.to());
            best = best.max(ExtValue::from_f64(numeric::sup_sampled(&h, lo, hi, 128)));
            if a.is_positive() {
                best = best.max(endpoint_h(piece, &a, &r));
            } else {
                best = best.max(ExtValue::one());
            }
        }
        r = r.add(&shapefn::reciprocal_integral_range(phi, &a, piece.to())?);
        let at_end = match piece.to() {
            ExtRational::Finite(b) => endpoint_h(piece, b, &r),
            ExtRational::Infinite => match piece.exp().cmp(&one) {
                Ordering::Less => ExtValue::rational((&one - piece.exp()).recip()),
                _ => ExtValue::Infinite,
            },
        };
        best = best.max(at_end);
        if best.is_infinite() {
            break;
        }
    }
    Ok(best)
}

pub fn endpoint_equivalence(phi: &ShapeFunction) -> Result<EndpointReport> {
    let s = endpoint_constant(phi)?;
    let wqc = shapefn::wqc_constant(phi);
    let equivalent = s.is_finite() && wqc.is_finite();
    Ok(EndpointReport { s, wqc, equivalent })
}

/// `‖f‖_{M_φ} / ‖f‖_{m_φ}`, `None` when `f = 0` or a norm is infinite.
pub fn endpoint_ratio(phi: &ShapeFunction, fstar: &MonotoneStep) -> Result<Option<f64>> {
    let m = spaces::norm_rearranged(&SpaceSpec::WeakMarcinkiewicz(phi.clone()), fstar)?;
    let big = spaces::norm_rearranged(&SpaceSpec::Marcinkiewicz(phi.clone()), fstar)?;
    if m.is_zero() || m.is_infinite() || big.is_infinite() {
        return Ok(None);
    }
    Ok(Some(big.ratio(&m)))
}

/// Step approximation of `1/φ` on `[ε, N]`, nearly extremal for `M_φ/m_φ`.
pub fn sharp_witness(phi: &ShapeFunction) -> Result<MonotoneStep> {
    reciprocal_candidate(phi, 1e-2, 1e2, 1.01)
}

/// `Σ_{j<k} 2^{−j} χ_[2^j, 2^{j+1})`: bounded in weak `L¹` with `∫ = k`.
pub fn weak_l1_witness(k: u32) -> StepFunction {
    let pieces = (0..k)
        .map(|j| {
            let a = Rational::from_integer(num_bigint::BigInt::from(1u64 << j));
            let b = &a * int(2);
            Piece::new(a.clone(), ExtRational::Finite(b), a.recip())
        })
        .collect();
    StepFunction::new(pieces, Rational::zero(), ExtRational::Infinite).expect("disjoint dyadic blocks")
}

/// Verdict and evidence for one embedding criterion.
#[derive(Clone, Debug)]
pub struct EmbeddingReport {
    /// Value of the analytic criterion.
    pub criterion: ExtValue,
    pub embeds: bool,
    /// Constant the embedding is confirmed with (when it embeds).
    pub constant: ExtValue,
    /// Largest trial ratio (when it embeds) or witness ratio (when it does not).
    pub measured: f64,
    /// Witness ratios at growing truncation levels (when it does not embed).
    pub witness_growth: Vec<f64>,
    pub witness: Option<StepFunction>,
}

impl EmbeddingReport {
    /// Numeric evidence agrees with the analytic classification.
    pub fn consistent(&self) -> bool {
        if self.embeds {
            ExtValue::from_f64(self.measured).le_tol(&self.constant, 1e-9, 0.0)
        } else {
            self.witness_growth.windows(2).all(|w| w[1] > w[0])
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "criterion": self.criterion.to_string(),
            "embeds": self.embeds,
            "constant": self.constant.to_string(),
            "measured": format_float(self.measured),
            "witness_growth": self.witness_growth.iter().map(|x| format_float(*x)).collect::<Vec<_>>(),
            "consistent": self.consistent(),
        })
    }
}

fn trial_ratios(trials: usize, seed: u64, alpha: &ExtRational, ratio: impl Fn(&StepFunction) -> Result<Option<f64>>) -> Result<f64> {
    let opts = StepOptions::default().with_alpha(alpha.clone());
    let mut best = 0f64;
    for t in 0..trials as u64 {
        let f = random_step(&mut trial_rng(seed, t), &opts);
        if let Some(r) = ratio(&f)? {
            best = best.max(r);
        }
    }
    Ok(best)
}

fn norm_ratio(x: &SpaceSpec, y: &SpaceSpec, f: &StepFunction) -> Result<Option<f64>> {
    let a = spaces::norm(x, f)?;
    let b = spaces::norm(y, f)?;
    if b.is_zero() || b.is_infinite() || a.is_infinite() {
        return Ok(None);
    }
    Ok(Some(a.ratio(&b)))
}

/// Lower dyadic steps of `1/φ` on `[2^{−k}, 1]`: `‖·‖_{m_φ} ≤ 1` (up to rounding).
pub fn reciprocal_dyadic(phi: &ShapeFunction, k: u32) -> Result<StepFunction> {
    let mut pieces = Vec::new();
    for j in 1..=k {
        let a = Rational::new(1.into(), num_bigint::BigInt::from(1u64) << j);
        let b = &a * int(2);
        let v = phi.at(&ExtRational::Finite(b.clone()));
        let v = ExtValue::one().checked_div(&v).expect("finite");
        let v = match v.as_rational() {
            Some(r) => r.clone(),
            None => rational_from_f64(v.to_f64())?,
        };
        pieces.push(Piece::new(a, ExtRational::Finite(b), v));
    }
    StepFunction::new(pieces, Rational::zero(), phi.alpha().clone())
}

/// `m_φ ↪ L¹+L^∞` iff `∫₀¹ 1/φ < ∞`.
pub fn embedding_sum(phi: &ShapeFunction, trials: usize, seed: u64) -> Result<EmbeddingReport> {
    let end = std::cmp::min(ExtRational::int(1), phi.alpha().clone());
    let criterion = shapefn::reciprocal_integral_range(phi, &Rational::zero(), &end)?;
    let m = SpaceSpec::weak_marcinkiewicz(phi.clone())?;
    if criterion.is_finite() {
        let measured = trial_ratios(trials, seed, phi.alpha(), |f| norm_ratio(&SpaceSpec::SumL1Linf, &m, f))?;
        return Ok(EmbeddingReport { constant: criterion.clone(), criterion, embeds: true, measured, witness_growth: vec![], witness: None });
    }
    let mut growth = Vec::new();
    let mut witness = None;
    for k in [5, 10, 20] {
        let f = reciprocal_dyadic(phi, k)?;
        growth.push(norm_ratio(&SpaceSpec::SumL1Linf, &m, &f)?.unwrap_or(f64::INFINITY));
        witness = Some(f);
    }
    Ok(EmbeddingReport {
        criterion,
        embeds: false,
        constant: ExtValue::Infinite,
        measured: *growth.last().expect("non-empty"),
        witness_growth: growth,
        witness,
    })
}

/// `sup_{t ∈ (2, α)} φ(t)/t`; on each piece `φ/t` has no interior maximum.
pub fn sup_ratio_beyond_two(phi: &ShapeFunction) -> ExtValue {
    let two = int(2);
    let mut best = ExtValue::zero();
    for p in phi.pieces() {
        if p.to() <= &ExtRational::Finite(two.clone()) {
            continue;
        }
        let lo = std::cmp::max(p.from(), &two).clone();
        best = best.max(p.value(&lo).checked_div(&ExtValue::rational(lo)).expect("finite"));
        let hi = match p.to() {
            ExtRational::Finite(b) => p.value(b).checked_div(&ExtValue::rational(b.clone())).expect("finite"),
            ExtRational::Infinite => match p.exp().cmp(&Rational::one()) {
                Ordering::Less => ExtValue::zero(),
                Ordering::Equal => ExtValue::rational(p.coef().clone()),
                Ordering::Greater => ExtValue::Infinite,
            },
        };
        best = best.max(hi);
    }
    best
}

/// `L¹∩L^∞ ↪ m_φ` iff `sup_{t>2} φ(t)/t < ∞`, confirmed with the constant
/// `max(φ(2), sup_{t>2} φ(t)/t)`.
pub fn embedding_cap(phi: &ShapeFunction, trials: usize, seed: u64) -> Result<EmbeddingReport> {
    let criterion = sup_ratio_beyond_two(phi);
    let m = SpaceSpec::weak_marcinkiewicz(phi.clone())?;
    if criterion.is_finite() {
        let two = std::cmp::min(ExtRational::int(2), phi.alpha().clone());
        let constant = criterion.clone().max(phi.at(&two));
        let measured = trial_ratios(trials, seed, phi.alpha(), |f| norm_ratio(&m, &SpaceSpec::CapL1Linf, f))?;
        return Ok(EmbeddingReport { criterion, embeds: true, constant, measured, witness_growth: vec![], witness: None });
    }
    let mut growth = Vec::new();
    let mut witness = None;
    for k in [4u32, 8, 16] {
        let f = StepFunction::indicator(Rational::zero(), ExtRational::Finite(Rational::from_integer(num_bigint::BigInt::from(1u64 << k))), Rational::one());
        growth.push(norm_ratio(&m, &SpaceSpec::CapL1Linf, &f)?.unwrap_or(f64::INFINITY));
        witness = Some(f);
    }
    Ok(EmbeddingReport {
        criterion,
        embeds: false,
        constant: ExtValue::Infinite,
        measured: *growth.last().expect("non-empty"),
        witness_growth: growth,
        witness,
    })
}

/// Output of the forward set construction.
#[derive(Clone, Debug)]
pub struct ForwardSets {
    pub threshold: ExtValue,
    pub e_prime: Vec<(Rational, Rational)>,
    pub measure_e: Rational,
    pub measure_e_prime: Rational,
    pub integral: Rational,
    pub integral_bound: ExtValue,
    pub measure_ok: bool,
    pub integral_ok: bool,
}

impl ForwardSets {
    pub fn to_json(&self) -> Value {
        let fmt = |r: &Rational| Value::String(format_rational(r));
        json!({
            "threshold": self.threshold.to_string(),
            "e_prime": self.e_prime.iter().map(|(a, b)| json!([fmt(a), fmt(b)])).collect::<Vec<_>>(),
            "measure_e": fmt(&self.measure_e),
            "measure_e_prime": fmt(&self.measure_e_prime),
            "integral": fmt(&self.integral),
            "integral_bound": self.integral_bound.to_string(),
            "measure_ok": self.measure_ok,
            "integral_ok": self.integral_ok,
        })
    }
}

fn check_intervals(e: &[(Rational, Rational)], alpha: &ExtRational) -> Result<Rational> {
    let mut total = Rational::zero();
    let mut prev = Rational::zero();
    for (i, (a, b)) in e.iter().enumerate() {
        if a >= b || a.is_negative() || (i > 0 && a < &prev) || &ExtRational::Finite(b.clone()) > alpha {
            return Err(Error::Precondition("E must be sorted disjoint intervals inside the domain".into()));
        }
        total += b - a;
        prev = b.clone();
    }
    if total.is_zero() {
        return Err(Error::Precondition("E must have positive measure".into()));
    }
    Ok(total)
}

/// `E' = E \ {|f| > C_φ^k A / φ(μ(E))}` with both bounds checked exactly.
pub fn dual_sets_forward(f: &StepFunction, phi: &ShapeFunction, e: &[(Rational, Rational)], k: u32, a: &ExtValue) -> Result<ForwardSets> {
    let measure_e = check_intervals(e, f.alpha())?;
    let norm = spaces::norm(&SpaceSpec::weak_marcinkiewicz(phi.clone())?, f)?;
    if !norm.le_tol(a, 1e-12, 0.0) {
        return Err(Error::Precondition(format!("‖f‖ = {norm} exceeds A = {a}")));
    }
    let ck = shapefn::delta2_constant(phi).powr(&Rational::from_integer(k.into()));
    let phi_e = phi.at(&ExtRational::Finite(measure_e.clone()));
    let threshold = ck.mul(a).checked_div(&phi_e).expect("finite");
    let mut e_prime: Vec<(Rational, Rational)> = Vec::new();
    let mut integral = Rational::zero();
    let segments = f.segments();
    for (lo, hi) in e {
        for s in &segments {
            let from = std::cmp::max(&s.start, lo).clone();
            let to = match &s.end {
                ExtRational::Finite(x) => std::cmp::min(x, hi).clone(),
                ExtRational::Infinite => hi.clone(),
            };
            if from >= to || ExtValue::rational(s.value.clone()) > threshold {
                continue;
            }
            integral += &s.value * (&to - &from);
            match e_prime.last_mut() {
                Some(last) if last.1 == from => last.1 = to,
                _ => e_prime.push((from, to)),
            }
        }
    }
    let measure_e_prime: Rational = e_prime.iter().map(|(a, b)| b - a).sum();
    let keep = Rational::one() - Rational::new(1.into(), num_bigint::BigInt::from(1u8) << k);
    let measure_ok = measure_e_prime >= keep * &measure_e;
    let integral_bound = ExtValue::rational(measure_e.clone()).checked_div(&phi_e).expect("finite").mul(&ck).mul(a);
    let integral_ok = ExtValue::rational(integral.clone()) <= integral_bound;
    Ok(ForwardSets { threshold, e_prime, measure_e, measure_e_prime, integral, integral_bound, measure_ok, integral_ok })
}

/// Least admissible `A` over the probed sets, and the implied bound `A/C`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetOracle {
    pub a: ExtValue,
    pub bound: ExtValue,
}

/// Measures of the super-level sets `{|f| > t}`, `t > 0`.
pub fn level_measures(fstar: &MonotoneStep) -> Vec<Rational> {
    fstar
        .segments()
        .into_iter()
        .filter(|s| s.value.is_positive())
        .filter_map(|s| s.end.finite().cloned())
        .collect()
}

/// For each probe measure `m` the top portion `E` of `f*` with `μ(E) = m` and
/// its cheapest subset `E'` of measure `C·m` give `A ≥ φ(m)/m · ∫_{(1−C)m}^{m} f*`.
pub fn norm_from_set_oracle(f: &StepFunction, phi: &ShapeFunction, c: &Rational, probes: Option<&[Rational]>) -> Result<SetOracle> {
    if !c.is_positive() || c > &Rational::one() {
        return Err(Error::OutOfRange("C must lie in (0, 1]".into()));
    }
    let fstar = rearrange(f);
    let measures = match probes {
        Some(p) => p.to_vec(),
        None => level_measures(&fstar),
    };
    let mut a = ExtValue::zero();
    for m in &measures {
        if !m.is_positive() || &ExtRational::Finite(m.clone()) > fstar.alpha() {
            return Err(Error::OutOfRange(format!("probe measure {m} outside (0, {}]", fstar.alpha())));
        }
        let lo = (Rational::one() - c) * m;
        let part = stepcore::integrate(&fstar, &lo, &ExtRational::Finite(m.clone()))?;
        let part = ExtValue::from_ext_rational(&part);
        let am = phi.at(&ExtRational::Finite(m.clone())).mul(&part).checked_div(&ExtValue::rational(m.clone())).expect("finite");
        a = a.max(am);
    }
    if fstar.tail().is_positive() && fstar.alpha().is_infinite() {
        a = a.max(phi.limit_at_inf().mul_rational(&(c * fstar.tail())));
    }
    let bound = a.checked_div(&ExtValue::rational(c.clone())).expect("finite");
    Ok(SetOracle { a, bound })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupEquality {
    pub lhs: ExtValue,
    pub rhs: ExtValue,
    pub equal: bool,
}

/// `sup_t f*(t)φ(t)` against `sup_s s·φ(f_*(s))`, each by interval analysis.
pub fn sup_equality(f: &StepFunction, phi: &ShapeFunction) -> Result<SupEquality> {
    if phi.alpha() != f.alpha() {
        return Err(Error::DomainMismatch("φ and f live on different domains".into()));
    }
    let fstar = rearrange(f);
    let lhs = fstar.segments().iter().fold(ExtValue::zero(), |best, s| best.max(phi.at(&s.end).mul_rational(&s.value)));
    let mut rhs = ExtValue::zero();
    for (_, end, measure) in distribution(f).intervals() {
        if measure.is_zero() {
            continue;
        }
        let s = ExtValue::from_ext_rational(&end);
        rhs = rhs.max(s.mul(&phi.at(&measure)));
    }
    let equal = lhs.approx_eq(&rhs, 1e-9, 0.0);
    Ok(SupEquality { lhs, rhs, equal })
}

/// Two-sided constants of `‖·‖_X ≍ ‖·‖_Y` measured on a corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    /// `max ‖f‖_X / ‖f‖_Y`
    pub upper: f64,
    /// `max ‖f‖_Y / ‖f‖_X`
    pub lower: f64,
}

impl Equivalence {
    pub fn to_json(&self) -> Value {
        json!({"upper": format_float(self.upper), "lower": format_float(self.lower)})
    }
}

pub fn measure_equivalence(x: &SpaceSpec, y: &SpaceSpec, trials: usize, seed: u64) -> Result<Equivalence> {
    let opts = StepOptions::default().with_tail(0.2);
    let mut out = Equivalence { upper: 0.0, lower: 0.0 };
    for t in 0..trials as u64 {
        let f = random_step(&mut trial_rng(seed, t), &opts);
        let a = spaces::norm(x, &f)?;
        let b = spaces::norm(y, &f)?;
        if a.is_zero() || b.is_zero() || a.is_infinite() || b.is_infinite() {
            continue;
        }
        out.upper = out.upper.max(a.ratio(&b));
        out.lower = out.lower.max(b.ratio(&a));
    }
    Ok(out)
}

/// Limits of `φ_X` and the amalgam identities they imply.
#[derive(Clone, Debug)]
pub struct LinftyReport {
    pub limit_at_0: ExtValue,
    pub limit_at_inf: ExtValue,
    /// `X ≍ WL(L^∞, X)` when `φ_X(0+) > 0`.
    pub local_identity: Option<Equivalence>,
    /// `X ≍ WL(X, L^∞)` when `φ_X(∞) < ∞`.
    pub global_identity: Option<Equivalence>,
}

impl LinftyReport {
    pub fn to_json(&self) -> Value {
        json!({
            "limit_at_0": self.limit_at_0.to_string(),
            "limit_at_inf": self.limit_at_inf.to_string(),
            "local_identity": self.local_identity.as_ref().map(Equivalence::to_json),
            "global_identity": self.global_identity.as_ref().map(Equivalence::to_json),
        })
    }
}

pub fn linfty_diagnostics(spec: &SpaceSpec, trials: usize, seed: u64) -> Result<LinftyReport> {
    let phi = spaces::fundamental(spec, &ExtRational::Infinite)?.shape;
    let (limit_at_0, limit_at_inf) = shapefn::eval_limits(&phi);
    let linf = SpaceSpec::lp(ExtRational::Infinite)?;
    let local_identity = if limit_at_0.is_zero() {
        None
    } else {
        Some(measure_equivalence(spec, &SpaceSpec::wl(linf.clone(), spec.clone())?, trials, seed)?)
    };
    let global_identity = if limit_at_inf.is_infinite() {
        None
    } else {
        Some(measure_equivalence(spec, &SpaceSpec::wl(spec.clone(), linf)?, trials, seed)?)
    };
    Ok(LinftyReport { limit_at_0, limit_at_inf, local_identity, global_identity })
}

/// `m_{max(φ₀,1)}` against `WL(L^∞, m_{φ₀})`.
#[derive(Clone, Debug)]
pub struct AmalgamReport {
    pub measured: Equivalence,
    /// `max(1, φ₀(2), C_{φ₀})`
    pub upper_bound: ExtValue,
    pub lower_bound: ExtValue,
}

impl AmalgamReport {
    pub fn holds(&self) -> bool {
        ExtValue::from_f64(self.measured.upper).le_tol(&self.upper_bound, 1e-9, 0.0)
            && ExtValue::from_f64(self.measured.lower).le_tol(&self.lower_bound, 1e-9, 0.0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "measured": self.measured.to_json(),
            "upper_bound": self.upper_bound.to_string(),
            "lower_bound": self.lower_bound.to_string(),
            "holds": self.holds(),
        })
    }
}

pub fn amalgam_max_identity(phi0: &ShapeFunction, trials: usize, seed: u64) -> Result<AmalgamReport> {
    if !phi0.alpha().is_infinite() {
        return Err(Error::DomainMismatch("amalgam identity needs φ₀ on (0, ∞)".into()));
    }
    let phi = shapefn::max_with(phi0, &ShapeFunction::power(int(1), int(0)))?;
    let m = SpaceSpec::weak_marcinkiewicz(phi)?;
    let wl = SpaceSpec::wl(SpaceSpec::lp(ExtRational::Infinite)?, SpaceSpec::weak_marcinkiewicz(phi0.clone())?)?;
    let measured = measure_equivalence(&m, &wl, trials, seed)?;
    let upper_bound = ExtValue::one().max(phi0.at(&ExtRational::int(2))).max(shapefn::delta2_constant(phi0));
    Ok(AmalgamReport { measured, upper_bound, lower_bound: ExtValue::rational(int(2)) })
}

/// `max` over a log grid of `‖χ_[0,t)‖_{X'} / φ̄_X(t)` and its inverse.
pub fn dual_fundamental_constants(spec: &SpaceSpec, samples: &[Rational]) -> Result<Option<Equivalence>> {
    let form = match crate::duality::associate_closed_form(spec) {
        Some(form) => form,
        None => return Ok(None),
    };
    let phi = spaces::fundamental(spec, &ExtRational::Infinite)?.shape;
    let bar = shapefn::bar(&phi)?;
    let mut out = Equivalence { upper: 0.0, lower: 0.0 };
    for t in samples {
        let dual = form.fundamental_at(t)?;
        let expected = bar.eval(t)?;
        out.upper = out.upper.max(dual.ratio(&expected));
        out.lower = out.lower.max(expected.ratio(&dual));
    }
    Ok(Some(out))
}

/// `n` log-spaced rationals in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<Rational>> {
    (0..n)
        .map(|k| {
            let x = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n.max(2) - 1) as f64).exp();
            rational_from_f64(x)
        })
        .collect()
}

/// Sort-based rearrangement: values with their total measures, largest first.
pub fn rearrange_by_sorting(f: &StepFunction) -> MonotoneStep {
    let mut blocks: Vec<(Rational, ExtRational)> = f.segments().into_iter().filter(|s| s.value.is_positive()).map(|s| (s.value.clone(), s.length())).collect();
    blocks.sort_by(|a, b| b.0.cmp(&a.0));
    let mut pairs = Vec::new();
    let mut start = ExtRational::zero();
    for (v, len) in blocks {
        if let ExtRational::Finite(s) = &start {
            pairs.push((s.clone(), v));
        }
        start = start.add(&len);
    }
    match start {
        ExtRational::Finite(s) => pairs.push((s, Rational::zero())),
        ExtRational::Infinite if pairs.is_empty() => pairs.push((Rational::zero(), Rational::zero())),
        ExtRational::Infinite => {}
    }
    MonotoneStep::from_pairs(pairs, f.alpha().clone()).expect("sorted blocks")
}

/// Float value of a rational, for reports.
pub fn approx(r: &Rational) -> f64 {
    rational_to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;

    fn sqrt() -> ShapeFunction {
        ShapeFunction::power(int(1), rat(1, 2))
    }

    fn t() -> ShapeFunction {
        ShapeFunction::power(int(1), int(1))
    }

    fn step(triples: &[(Rational, Rational, Rational)]) -> StepFunction {
        StepFunction::from_triples(triples).unwrap()
    }

    #[test]
    fn endpoint_examples() {
        let r = endpoint_equivalence(&sqrt()).unwrap();
        assert_eq!(r.s, ExtValue::rational(int(2)));
        assert!(r.equivalent);
        assert!(endpoint_constant(&t()).unwrap().is_infinite());
        let one = endpoint_equivalence(&ShapeFunction::power(int(1), int(0))).unwrap();
        assert_eq!(one.s, ExtValue::one());
        assert!(one.equivalent);
        // max(t^{1/2}, t^{1/3}) with the kink at 1: first piece 3/2, then 2 in the limit.
        let kink = ShapeFunction::from_monomials(&[(int(0), Some(int(1)), int(1), rat(1, 3)), (int(1), None, int(1), rat(1, 2))]).unwrap();
        let s = endpoint_constant(&kink).unwrap();
        assert_eq!(s, ExtValue::rational(int(2)));
    }

    #[test]
    fn endpoint_against_grid() {
        let kink = ShapeFunction::from_monomials(&[(int(0), Some(int(1)), int(1), rat(1, 2)), (int(1), None, int(1), rat(1, 4))]).unwrap();
        let s = endpoint_constant(&kink).unwrap().to_f64();
        let mut grid_max = 0f64;
        for k in -200..=400 {
            let x = 10f64.powf(k as f64 / 50.0);
            let r = shapefn::reciprocal_integral(&kink, &rational_from_f64(x).unwrap()).unwrap().to_f64();
            grid_max = grid_max.max(kink.eval_f64(x) / x * r);
        }
        assert!(grid_max <= s * (1.0 + 1e-9));
        assert!(grid_max >= s * (1.0 - 1e-3));
    }

    #[test]
    fn weak_l1_divergence() {
        let f = weak_l1_witness(10);
        let r = endpoint_ratio(&t(), &rearrange(&f)).unwrap().unwrap();
        assert!(r >= (1024f64).ln() / 2.0);
    }

    #[test]
    fn sharp_witness_nearly_attains() {
        let r = endpoint_ratio(&sqrt(), &sharp_witness(&sqrt()).unwrap()).unwrap().unwrap();
        assert!(r > 1.9 && r <= 2.0);
    }

    #[test]
    fn embedding_examples() {
        let e = embedding_sum(&sqrt(), 50, 1).unwrap();
        assert!(e.embeds && e.consistent());
        assert_eq!(e.constant, ExtValue::rational(int(2)));
        let e = embedding_sum(&t(), 0, 1).unwrap();
        assert!(!e.embeds && e.consistent());
        let tail = ShapeFunction::from_monomials(&[(int(0), Some(int(1)), int(1), int(1)), (int(1), None, int(1), int(2))]).unwrap();
        let e = embedding_cap(&tail, 0, 1).unwrap();
        assert!(!e.embeds && e.consistent());
        assert!(embedding_cap(&sqrt(), 30, 2).unwrap().consistent());
    }

    #[test]
    fn forward_examples() {
        let f = step(&[(int(0), rat(1, 2), int(2)), (rat(1, 2), int(1), int(1))]);
        let r = dual_sets_forward(&f, &t(), &[(int(0), int(1))], 1, &ExtValue::one()).unwrap();
        assert_eq!(r.threshold, ExtValue::rational(int(2)));
        assert_eq!(r.e_prime, vec![(int(0), int(1))]);
        assert_eq!(r.integral, rat(3, 2));
        assert!(r.measure_ok && r.integral_ok);
        let zero = StepFunction::zero(ExtRational::Infinite);
        let r = dual_sets_forward(&zero, &t(), &[(int(0), int(1))], 0, &ExtValue::one()).unwrap();
        assert!(r.integral.is_zero() && r.measure_ok && r.integral_ok);
        assert!(dual_sets_forward(&f, &t(), &[(int(0), int(1))], 1, &ExtValue::rational(rat(1, 2))).is_err());
    }

    #[test]
    fn set_oracle_examples() {
        let chi = step(&[(int(0), int(1), int(1))]);
        assert_eq!(norm_from_set_oracle(&chi, &t(), &int(1), None).unwrap().bound, ExtValue::one());
        let half = norm_from_set_oracle(&chi, &t(), &rat(1, 2), None).unwrap();
        assert!(half.bound >= ExtValue::one());
        let zero = StepFunction::zero(ExtRational::Infinite);
        assert!(norm_from_set_oracle(&zero, &t(), &int(1), None).unwrap().bound.is_zero());
        // Two levels: the C = 1 oracle sees f** rather than f*.
        let two = step(&[(int(0), int(1), int(2)), (int(1), int(2), int(1))]);
        assert_eq!(norm_from_set_oracle(&two, &t(), &int(1), None).unwrap().bound, ExtValue::rational(int(3)));
    }

    #[test]
    fn sup_equality_examples() {
        let f = step(&[(int(0), int(1), int(2)), (int(1), int(2), int(1))]);
        let r = sup_equality(&f, &sqrt()).unwrap();
        assert_eq!(r.lhs, ExtValue::rational(int(2)));
        assert!(r.equal);
        let bounded = ShapeFunction::from_monomials(&[(int(0), Some(int(1)), int(1), int(1)), (int(1), None, int(1), int(0))]).unwrap();
        let tail = StepFunction::new(vec![Piece::new(int(0), ExtRational::int(1), int(3))], int(1), ExtRational::Infinite).unwrap();
        let r = sup_equality(&tail, &bounded).unwrap();
        assert!(r.equal && r.lhs == ExtValue::rational(int(3)));
        let zero = sup_equality(&StepFunction::zero(ExtRational::Infinite), &sqrt()).unwrap();
        assert!(zero.equal && zero.lhs.is_zero());
    }

    #[test]
    fn dual_fundamental_of_weak_lp_is_p_prime() {
        let spec = SpaceSpec::weak_marcinkiewicz(ShapeFunction::power(int(1), rat(2, 3))).unwrap();
        let c = dual_fundamental_constants(&spec, &log_grid(1e-3, 1e3, 20).unwrap()).unwrap().unwrap();
        assert!((c.upper - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sorting_oracle_matches_examples() {
        let f = step(&[(int(0), int(1), int(1)), (int(2), int(5), int(3))]);
        assert_eq!(rearrange_by_sorting(&f), rearrange(&f));
        let tail = StepFunction::new(vec![Piece::new(int(1), ExtRational::int(2), int(5))], int(2), ExtRational::Infinite).unwrap();
        assert_eq!(rearrange_by_sorting(&tail), rearrange(&tail));
    }
}
