//! Seeded verification campaigns grouped into suites.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::*;
use crate::corpus::random_sequence;
use crate::duality::{associate_closed_form, holder_check, resonance_gap, AssociateEstimator, AssociateForm};
use crate::represent::{block_average_t, psi_decompose, shifted_block_average_s, verify_identity, AtomicRepresentation};
use crate::stepcore::{dilate, integrate_product, maximal, SequenceFn};
use crate::value::rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Vacuous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Vacuous => "vacuous",
        }
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    pub measured_constants: BTreeMap<String, String>,
    pub witness: Option<Value>,
    pub seed: u64,
    pub trials: usize,
}

impl CheckReport {
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "verdict": self.verdict.as_str(),
            "measured_constants": self.measured_constants,
            "witness": self.witness,
            "seed": self.seed,
            "trials": self.trials,
        })
    }

    fn single(name: impl Into<String>, verdict: Verdict, constants: Vec<(&str, String)>, witness: Option<Value>, seed: u64, trials: usize) -> Self {
        CheckReport {
            name: name.into(),
            verdict,
            measured_constants: constants.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            witness,
            seed,
            trials,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Rearrange,
    Hl,
    LemmaSup,
    Endpoint,
    Embed,
    Dual,
    Represent,
    Amalgam,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 9] = ["rearrange", "hl", "lemma-sup", "endpoint", "embed", "dual", "represent", "amalgam", "all"];

    const EACH: [Suite; 8] = [
        Suite::Rearrange,
        Suite::Hl,
        Suite::LemmaSup,
        Suite::Endpoint,
        Suite::Embed,
        Suite::Dual,
        Suite::Represent,
        Suite::Amalgam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rearrange => "rearrange",
            Suite::Hl => "hl",
            Suite::LemmaSup => "lemma-sup",
            Suite::Endpoint => "endpoint",
            Suite::Embed => "embed",
            Suite::Dual => "dual",
            Suite::Represent => "represent",
            Suite::Amalgam => "amalgam",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}; expected one of {}", Suite::NAMES.join(", "))))
    }
}

/// Runs every check of `suite` with `trials` seeded trials each.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let ctx = Ctx { trials, seed };
    match suite {
        Suite::Rearrange => rearrange_suite(&ctx),
        Suite::Hl => hl_suite(&ctx),
        Suite::LemmaSup => lemma_sup_suite(&ctx),
        Suite::Endpoint => endpoint_suite(&ctx),
        Suite::Embed => embed_suite(&ctx),
        Suite::Dual => dual_suite(&ctx),
        Suite::Represent => represent_suite(&ctx),
        Suite::Amalgam => amalgam_suite(&ctx),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::EACH {
                out.extend(run_suite(s, trials, seed)?);
            }
            Ok(out)
        }
    }
}

struct Ctx {
    trials: usize,
    seed: u64,
}

/// Result of one trial: pass/fail, measured quantities, and what to show on failure.
struct Trial {
    ok: bool,
    measures: Vec<(&'static str, f64)>,
    witness: Value,
}

impl Trial {
    fn new(ok: bool, witness: Value) -> Self {
        Trial { ok, measures: Vec::new(), witness }
    }

    fn measure(mut self, key: &'static str, x: f64) -> Self {
        self.measures.push((key, x));
        self
    }
}

impl Ctx {
    /// Runs `body` on every trial in parallel; constants are maxima over trials
    /// and the witness comes from the first failing trial.
    fn campaign<F>(&self, name: &str, body: F) -> Result<CheckReport>
    where
        F: Fn(u64, &mut ChaCha8Rng) -> Result<Trial> + Sync,
    {
        if self.trials == 0 {
            return Ok(CheckReport::single(name, Verdict::Vacuous, vec![], None, self.seed, 0));
        }
        let outcomes = (0..self.trials as u64)
            .into_par_iter()
            .map(|t| body(t, &mut trial_rng(self.seed, t)))
            .collect::<Result<Vec<_>>>()?;
        let mut maxima: BTreeMap<String, f64> = BTreeMap::new();
        let mut witness = None;
        for (t, out) in outcomes.into_iter().enumerate() {
            for (k, x) in out.measures {
                let e = maxima.entry(k.to_string()).or_insert(f64::NEG_INFINITY);
                if x > *e {
                    *e = x;
                }
            }
            if !out.ok && witness.is_none() {
                witness = Some(json!({"trial": t, "data": out.witness}));
            }
        }
        let verdict = if witness.is_some() { Verdict::Fails } else { Verdict::Holds };
        Ok(CheckReport {
            name: name.to_string(),
            verdict,
            measured_constants: maxima.into_iter().map(|(k, v)| (k, format_float(v))).collect(),
            witness,
            seed: self.seed,
            trials: self.trials,
        })
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

fn power(num: i64, den: i64) -> ShapeFunction {
    ShapeFunction::power(int(1), rat(num, den))
}

fn two_piece(p0: Rational, p1: Rational) -> ShapeFunction {
    ShapeFunction::from_monomials(&[(int(0), Some(int(1)), int(1), p0), (int(1), None, int(1), p1)]).expect("valid split")
}

/// Shape functions on `(0, ∞)` shared by the suites.
fn family() -> Vec<(&'static str, ShapeFunction)> {
    vec![
        ("t", power(1, 1)),
        ("sqrt", power(1, 2)),
        ("cbrt", power(1, 3)),
        ("one", power(0, 1)),
        ("t2", power(2, 1)),
        ("sqrt_then_quarter", two_piece(rat(1, 2), rat(1, 4))),
        ("t_then_sqrt", two_piece(int(1), rat(1, 2))),
        ("cbrt_then_sqrt", two_piece(rat(1, 3), rat(1, 2))),
        ("t_then_one", two_piece(int(1), int(0))),
    ]
}

fn space(kind: &str, phi: ShapeFunction) -> SpaceSpec {
    match kind {
        "m" => SpaceSpec::weak_marcinkiewicz(phi),
        "M" => SpaceSpec::marcinkiewicz(phi),
        _ => SpaceSpec::lorentz_endpoint(phi),
    }
    .expect("monotone φ")
}

fn lp(p: Rational) -> SpaceSpec {
    SpaceSpec::lp(ExtRational::Finite(p)).expect("valid exponent")
}

fn linf() -> SpaceSpec {
    SpaceSpec::lp(ExtRational::Infinite).expect("valid exponent")
}

fn tailed() -> StepOptions {
    StepOptions::default().with_tail(0.3)
}

fn rearrange_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let opts_for = |t: u64| {
        if t % 3 == 2 {
            StepOptions::default().with_alpha(ExtRational::int(6))
        } else {
            tailed()
        }
    };
    let sort = ctx.campaign("rearrange.sort_oracle", |t, rng| {
        let f = random_step(rng, &opts_for(t));
        let fstar = rearrange(&f);
        let ok = fstar == rearrange_by_sorting(&f) && distribution(&fstar.to_step_function()) == distribution(&f);
        Ok(Trial::new(ok, json!({"f": f.to_json()})))
    })?;
    let maximal_check = ctx.campaign("rearrange.maximal_dominates", |t, rng| {
        let f = random_step(rng, &opts_for(t));
        let fstar = rearrange(&f);
        let mf = maximal(&fstar);
        let mut points: Vec<Rational> = Vec::new();
        for s in fstar.segments() {
            let end = s.end.finite().cloned().unwrap_or_else(|| &s.start + int(4));
            points.push((&s.start + &end) / int(2));
            points.push(end);
        }
        points.retain(|x| ExtRational::Finite(x.clone()) < *fstar.alpha());
        let dominates = points.iter().all(|x| fstar.value_at(x).is_none_or(|v| mf.value_at(x) >= v));
        let monotone = points.windows(2).all(|w| mf.value_at(&w[1]) <= mf.value_at(&w[0]));
        Ok(Trial::new(dominates && monotone, json!({"f": f.to_json()})))
    })?;
    let dilation = ctx.campaign("rearrange.dilation", |_, rng| {
        let f = random_step(rng, &tailed());
        let s = [rat(1, 2), int(2), int(3), rat(1, 3)][rng.gen_range(0..4)].clone();
        let lhs = rearrange(&dilate(&f, &s)?);
        let rhs = rearrange(&f).scale_breakpoints(&s.recip());
        Ok(Trial::new(lhs == rhs, json!({"f": f.to_json(), "t": format_rational(&s)})))
    })?;
    Ok(vec![sort, maximal_check, dilation])
}

/// Constant on `n` blocks of width 1/2 with a nonzero last block.
fn block_step(rng: &mut ChaCha8Rng, n: usize) -> StepFunction {
    let pieces = (0..n)
        .map(|k| {
            let lo = rat(k as i64, 2);
            let v = if k + 1 == n { rng.gen_range(1..=8) } else { rng.gen_range(0..=8) };
            Piece::new(lo.clone(), ExtRational::Finite(lo + rat(1, 2)), int(v))
        })
        .collect();
    StepFunction::new(pieces, Rational::zero(), ExtRational::Infinite).expect("adjacent blocks")
}

fn hl_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let inequality = ctx.campaign("hl.inequality", |_, rng| {
        let f = random_step(rng, &tailed());
        let g = random_step(rng, &StepOptions::default());
        let lhs = integrate_product(&f, &g)?;
        let rhs = integrate_product(&rearrange(&f), &rearrange(&g))?;
        Ok(Trial::new(lhs <= rhs, json!({"f": f.to_json(), "g": g.to_json()})))
    })?;
    let monotone = ctx.campaign("hl.monotone_equality", |_, rng| {
        let f = rearrange(&random_step(rng, &tailed())).to_step_function();
        let g = rearrange(&random_step(rng, &StepOptions::default())).to_step_function();
        let lhs = integrate_product(&f, &g)?;
        let rhs = integrate_product(&rearrange(&f), &rearrange(&g))?;
        Ok(Trial::new(lhs == rhs, json!({"f": f.to_json(), "g": g.to_json()})))
    })?;
    let resonance = ctx.campaign("hl.resonance", |_, rng| {
        let n = rng.gen_range(1..=6);
        let f = block_step(rng, n);
        let g = block_step(rng, n);
        let gap = resonance_gap(&f, &g, n)?;
        Ok(Trial::new(gap.best == gap.bound, json!({"f": f.to_json(), "g": g.to_json(), "n": n})))
    })?;
    Ok(vec![inequality, monotone, resonance])
}

fn lemma_sup_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let shapes = family();
    let check = ctx.campaign("lemma_sup.equality", |t, rng| {
        let (name, phi) = &shapes[t as usize % shapes.len()];
        let f = random_step(rng, &tailed());
        let r = sup_equality(&f, phi)?;
        let gap = if r.lhs.is_infinite() || r.rhs.is_infinite() {
            if r.lhs == r.rhs { 0.0 } else { f64::INFINITY }
        } else {
            (r.lhs.to_f64() - r.rhs.to_f64()).abs() / r.lhs.to_f64().max(f64::MIN_POSITIVE)
        };
        Ok(Trial::new(r.equal, json!({"phi": name, "f": f.to_json()})).measure("max_relative_gap", gap))
    })?;
    Ok(vec![check])
}

/// Ratios `‖g‖_M/‖g‖_m` for `1/φ` candidates on `[2^{−k}, 2^k]`.
fn divergence_growth(phi: &ShapeFunction) -> Result<Vec<f64>> {
    [4i32, 8, 16]
        .into_iter()
        .map(|k| {
            let g = reciprocal_candidate(phi, 2f64.powi(-k), 2f64.powi(k), 2.0)?;
            Ok(endpoint_ratio(phi, &g)?.unwrap_or(f64::INFINITY))
        })
        .collect()
}

fn endpoint_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (name, phi) in family() {
        let rep = endpoint_equivalence(&phi)?;
        let name = format!("endpoint.{name}");
        let mut constants = vec![("S", rep.s.to_string()), ("wqc_constant", rep.wqc.to_string())];
        if !rep.wqc.is_finite() {
            out.push(CheckReport::single(name, Verdict::Vacuous, constants, None, ctx.seed, 0));
            continue;
        }
        if rep.s.is_finite() {
            let s = rep.s.clone();
            let mut report = ctx.campaign(&name, |_, rng| {
                let f = random_step(rng, &tailed());
                let r = endpoint_ratio(&phi, &rearrange(&f))?.unwrap_or(0.0);
                Ok(Trial::new(ExtValue::from_f64(r).le_tol(&s, 1e-9, 0.0), json!({"f": f.to_json()})).measure("max_ratio", r))
            })?;
            let sharp = endpoint_ratio(&phi, &sharp_witness(&phi)?)?.unwrap_or(0.0);
            if !ExtValue::from_f64(sharp).le_tol(&s, 1e-9, 0.0) {
                report.verdict = Verdict::Fails;
                report.witness.get_or_insert(json!({"sharp_witness_ratio": format_float(sharp)}));
            }
            constants.push(("sharp_witness_ratio", format_float(sharp)));
            report.measured_constants.extend(constants.into_iter().map(|(k, v)| (k.to_string(), v)));
            out.push(report);
        } else {
            let growth = divergence_growth(&phi)?;
            let ok = growth.windows(2).all(|w| w[1] > w[0]);
            constants.push(("witness_ratio", format_float(*growth.last().expect("non-empty"))));
            let witness = json!({"ratios": growth.iter().map(|x| format_float(*x)).collect::<Vec<_>>()});
            out.push(CheckReport::single(name, verdict(ok), constants, Some(witness), ctx.seed, 0));
        }
    }
    Ok(out)
}

fn embedding_check(name: String, e: &EmbeddingReport, ctx: &Ctx) -> CheckReport {
    let constants = vec![
        ("criterion", e.criterion.to_string()),
        ("constant", e.constant.to_string()),
        ("measured", format_float(e.measured)),
    ];
    let witness = e.witness.as_ref().map(|w| json!({"f": w.to_json(), "growth": e.to_json()["witness_growth"].clone()}));
    let trials = if e.embeds { ctx.trials } else { 0 };
    CheckReport::single(name, verdict(e.consistent()), constants, witness, ctx.seed, trials)
}

fn embed_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (name, phi) in family() {
        let sum = embedding_sum(&phi, ctx.trials, ctx.seed)?;
        out.push(embedding_check(format!("embed.sum.{name}"), &sum, ctx));
        let cap = embedding_cap(&phi, ctx.trials, ctx.seed)?;
        out.push(embedding_check(format!("embed.cap.{name}"), &cap, ctx));
    }
    Ok(out)
}

fn random_intervals(rng: &mut ChaCha8Rng) -> Vec<(Rational, Rational)> {
    let opts = StepOptions { max_value: 1, value_den: 1, ..StepOptions::default() };
    let e = random_step(rng, &opts);
    e.pieces().iter().filter_map(|p| p.b.finite().map(|b| (p.a.clone(), b.clone()))).collect()
}

fn dual_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let sqrt = power(1, 2);
    let mut out = Vec::new();

    let holder_specs = vec![
        lp(int(1)),
        lp(int(2)),
        lp(int(3)),
        lp(rat(3, 2)),
        linf(),
        SpaceSpec::lorentz(ExtRational::int(2), ExtRational::int(2))?,
        SpaceSpec::lorentz(ExtRational::int(2), ExtRational::Infinite)?,
        space("m", sqrt.clone()),
        space("M", sqrt.clone()),
        space("L", sqrt.clone()),
        space("L", power(1, 3)),
    ];
    out.push(ctx.campaign("dual.holder", |t, rng| {
        let spec = &holder_specs[t as usize % holder_specs.len()];
        let f = random_step(rng, &StepOptions::default());
        let g = random_step(rng, &tailed());
        let h = holder_check(spec, &f, &g)?;
        let ratio = if h.bound.is_infinite() { 0.0 } else { h.pairing.ratio(&h.bound) };
        Ok(Trial::new(h.holds, json!({"space": spec.to_json(), "f": f.to_json(), "g": g.to_json()})).measure("max_pairing_over_bound", ratio))
    })?);

    let candidates: Vec<MonotoneStep> = [
        vec![(int(0), int(1)), (int(1), int(0))],
        vec![(int(0), int(1)), (int(4), int(0))],
        vec![(int(0), int(2)), (int(1), int(1)), (int(3), int(0))],
    ]
    .into_iter()
    .map(|pairs| MonotoneStep::from_pairs(pairs, ExtRational::Infinite))
    .collect::<Result<_>>()?;
    let estimator_specs = [space("m", sqrt.clone()), lp(int(2)), space("M", sqrt.clone()), space("L", sqrt.clone())];
    let estimators = estimator_specs
        .iter()
        .map(|s| Ok((AssociateEstimator::new(s, &candidates)?, associate_closed_form(s).expect("closed form"))))
        .collect::<Result<Vec<_>>>()?;
    out.push(ctx.campaign("dual.estimator_soundness", |t, rng| {
        let i = t as usize % estimators.len();
        let (est, form) = &estimators[i];
        let f = random_step(rng, &StepOptions::default());
        let lower = est.estimate(&f)?.value;
        let exact = form.value(&f)?;
        let ratio = if exact.is_zero() || exact.is_infinite() { 0.0 } else { lower.ratio(&exact) };
        Ok(Trial::new(lower.le_tol(&exact, 1e-9, 0.0), json!({"space": estimator_specs[i].to_json(), "f": f.to_json()}))
            .measure("max_estimate_over_closed_form", ratio))
    })?);

    let shapes = [power(1, 1), sqrt.clone(), power(1, 3)];
    out.push(ctx.campaign("dual.forward_sets", |t, rng| {
        let phi = &shapes[t as usize % shapes.len()];
        let f = random_step(rng, &StepOptions::default());
        let e = random_intervals(rng);
        let k = rng.gen_range(0..=10u32);
        let norm = spaces::norm(&space("m", phi.clone()), &f)?;
        let a = if norm.is_zero() { ExtValue::one() } else { norm };
        let r = dual_sets_forward(&f, phi, &e, k, &a)?;
        Ok(Trial::new(r.measure_ok && r.integral_ok, json!({"f": f.to_json(), "k": k, "sets": r.to_json()})))
    })?);

    let oracle_shapes = [power(1, 1), sqrt.clone(), power(0, 1)];
    out.push(ctx.campaign("dual.set_oracle", |t, rng| {
        let phi = &oracle_shapes[t as usize % oracle_shapes.len()];
        let c = [int(1), rat(1, 2), rat(1, 3)][(t as usize / oracle_shapes.len()) % 3].clone();
        let f = random_step(rng, &tailed());
        let norm = spaces::norm(&space("m", phi.clone()), &f)?;
        let oracle = norm_from_set_oracle(&f, phi, &c, None)?;
        let mut trial = Trial::new(norm.le_tol(&oracle.bound, 1e-9, 0.0), json!({"f": f.to_json(), "C": format_rational(&c)}));
        if c.is_one() && !norm.is_zero() && oracle.bound.is_finite() {
            trial = trial.measure("c1_bound_over_norm", oracle.bound.ratio(&norm));
        }
        Ok(trial)
    })?);

    let reversal_shapes = [sqrt.clone(), power(1, 3), power(2, 3)];
    let reversal_forms = reversal_shapes
        .iter()
        .map(|phi| (associate_closed_form(&space("M", phi.clone())).expect("closed"), associate_closed_form(&space("m", phi.clone())).expect("closed")))
        .collect::<Vec<_>>();
    out.push(ctx.campaign("dual.order_reversal", |t, rng| {
        let (big, small) = &reversal_forms[t as usize % reversal_forms.len()];
        let f = random_step(rng, &StepOptions::default());
        let lhs = big.value(&f)?;
        let rhs = small.value(&f)?;
        Ok(Trial::new(lhs.le_tol(&rhs, 1e-9, 0.0), json!({"f": f.to_json()})))
    })?);

    let second = [space("L", sqrt.clone()), space("M", sqrt.clone()), space("L", power(1, 3))];
    out.push(ctx.campaign("dual.second_associate", |t, rng| {
        let x = &second[t as usize % second.len()];
        let twice = match associate_closed_form(x) {
            Some(AssociateForm::Space(dual)) => associate_closed_form(&dual),
            _ => None,
        };
        let f = random_step(rng, &StepOptions::default());
        let ok = match twice {
            Some(form) => form.value(&f)?.approx_eq(&spaces::norm(x, &f)?, 1e-9, 0.0),
            None => false,
        };
        Ok(Trial::new(ok, json!({"space": x.to_json(), "f": f.to_json()})))
    })?);

    let grid = log_grid(1e-3, 1e3, 20)?;
    let fundamentals = [("lambda_sqrt", space("L", sqrt.clone())), ("M_sqrt", space("M", sqrt.clone())), ("m_sqrt", space("m", sqrt.clone())), ("L2", lp(int(2)))];
    for (name, spec) in fundamentals {
        let c = dual_fundamental_constants(&spec, &grid)?.expect("closed form");
        let ok = c.upper <= 2.0 + 1e-9 && c.lower <= 2.0 + 1e-9;
        let constants = vec![("upper", format_float(c.upper)), ("lower", format_float(c.lower))];
        out.push(CheckReport::single(format!("dual.fundamental.{name}"), verdict(ok), constants, None, ctx.seed, 0));
    }
    Ok(out)
}

fn bounded() -> StepOptions {
    StepOptions::default()
}

fn inner_spaces() -> Vec<SpaceSpec> {
    vec![lp(int(1)), lp(int(2)), linf(), lp(rat(1, 2)), SpaceSpec::lorentz(ExtRational::int(2), ExtRational::int(1)).expect("valid")]
}

fn represent_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let inners = inner_spaces();
    let betas = [int(1), int(2), rat(1, 2)];
    let rep_for = |t: u64| {
        let inner = inners[t as usize % inners.len()].clone();
        let beta = betas[(t as usize / inners.len()) % betas.len()].clone();
        AtomicRepresentation::new(beta, inner)
    };
    let identity = ctx.campaign("represent.identity", |t, rng| {
        let rep = rep_for(t)?;
        let g = SequenceFn::from_values(&random_sequence(rng, 8, 12, 4), rep.beta().clone())?;
        let check = verify_identity(&rep, &g)?;
        Ok(Trial::new(check.holds, json!({"space": rep.spec().to_json(), "g": g.to_json()})))
    })?;
    let t_vs_s = ctx.campaign("represent.t_vs_s", |t, rng| {
        let rep = rep_for(t)?;
        let f1 = random_step(rng, &bounded());
        let f2 = random_step(rng, &bounded());
        let lhs = block_average_t(&rep, &stepcore::add(&f1, &f2)?)?;
        let rhs = shifted_block_average_s(&rep, &f1)?.add(&shifted_block_average_s(&rep, &f2)?)?.scale(&int(2));
        Ok(Trial::new(lhs.le(&rhs), json!({"beta": format_rational(rep.beta()), "f1": f1.to_json(), "f2": f2.to_json()})))
    })?;
    let s_vs_t = ctx.campaign("represent.s_vs_t", |t, rng| {
        let rep = rep_for(t)?;
        let f = random_step(rng, &bounded());
        let spec = rep.spec();
        let s = spaces::norm_seq(&spec, &shifted_block_average_s(&rep, &f)?)?;
        let tn = spaces::norm_seq(&spec, &block_average_t(&rep, &f)?)?;
        let c = spaces::modulus_bound(rep.inner()).mul_rational(&int(2));
        let ratio = if tn.is_zero() { 0.0 } else { s.ratio(&tn) };
        Ok(Trial::new(s.le_tol(&c.mul(&tn), 1e-9, 0.0), json!({"space": spec.to_json(), "f": f.to_json()})).measure("max_s_over_t", ratio))
    })?;
    let psi = ctx.campaign("represent.psi", |t, rng| {
        let rep = rep_for(t)?;
        let f = random_step(rng, &bounded());
        let d = psi_decompose(&rep, &f)?;
        let tf = block_average_t(&rep, &f)?;
        let sf = shifted_block_average_s(&rep, &f)?;
        let ok = d.even_compressed.le(&tf) && d.odd_compressed.le(&tf) && sf.le(&d.even.add(&d.odd)?);
        Ok(Trial::new(ok, json!({"beta": format_rational(rep.beta()), "f": f.to_json()})))
    })?;
    let monotone = ctx.campaign("represent.t_monotone", |t, rng| {
        let rep = rep_for(t)?;
        let f1 = random_step(rng, &bounded());
        let f2 = stepcore::add(&f1, &random_step(rng, &bounded()))?;
        let ok = block_average_t(&rep, &f1)?.le(&block_average_t(&rep, &f2)?);
        Ok(Trial::new(ok, json!({"beta": format_rational(rep.beta()), "f1": f1.to_json(), "f2": f2.to_json()})))
    })?;
    let quasi = AtomicRepresentation::new(int(1), lp(rat(1, 2)))?;
    let probe = spaces::modulus_probe(&quasi.spec(), ctx.trials, ctx.seed)?;
    let modulus = CheckReport::single(
        "represent.modulus",
        if ctx.trials == 0 { Verdict::Vacuous } else { verdict(probe.within_bound()) },
        vec![("measured", format_float(probe.measured)), ("bound", probe.bound.to_string())],
        probe.witness.as_ref().filter(|_| !probe.within_bound()).map(|(f, g)| json!({"f": f.to_json(), "g": g.to_json()})),
        ctx.seed,
        ctx.trials,
    );
    Ok(vec![identity, t_vs_s, s_vs_t, psi, monotone, modulus])
}

fn equivalence_constants(e: &Equivalence) -> Vec<(&'static str, String)> {
    vec![("upper", format_float(e.upper)), ("lower", format_float(e.lower))]
}

fn amalgam_suite(ctx: &Ctx) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (name, phi0) in [("t", power(1, 1)), ("sqrt", power(1, 2)), ("cbrt", power(1, 3))] {
        let r = amalgam_max_identity(&phi0, ctx.trials, ctx.seed)?;
        let mut constants = equivalence_constants(&r.measured);
        constants.push(("upper_bound", r.upper_bound.to_string()));
        constants.push(("lower_bound", r.lower_bound.to_string()));
        out.push(CheckReport::single(format!("amalgam.max_identity.{name}"), verdict(r.holds()), constants, None, ctx.seed, ctx.trials));
    }
    let diagnosed = [
        ("cap_l1_linf", SpaceSpec::CapL1Linf),
        ("sum_l1_linf", SpaceSpec::SumL1Linf),
        ("l2", lp(int(2))),
        ("m_t_then_one", space("m", two_piece(int(1), int(0)))),
        ("linf", linf()),
    ];
    for (name, spec) in diagnosed {
        let r = linfty_diagnostics(&spec, ctx.trials, ctx.seed)?;
        let mut constants = vec![("limit_at_0", r.limit_at_0.to_string()), ("limit_at_inf", r.limit_at_inf.to_string())];
        let mut ok = true;
        for (key, e) in [("local", &r.local_identity), ("global", &r.global_identity)] {
            if let Some(e) = e {
                ok &= e.upper.is_finite() && e.lower.is_finite();
                constants.push((if key == "local" { "local_upper" } else { "global_upper" }, format_float(e.upper)));
                constants.push((if key == "local" { "local_lower" } else { "global_lower" }, format_float(e.lower)));
            }
        }
        let v = if r.local_identity.is_none() && r.global_identity.is_none() { Verdict::Vacuous } else { verdict(ok) };
        out.push(CheckReport::single(format!("amalgam.linfty.{name}"), v, constants, None, ctx.seed, ctx.trials));
    }
    let endpoints = [
        ("wl_l1_linf_vs_sum", SpaceSpec::wl(lp(int(1)), linf())?, SpaceSpec::SumL1Linf),
        ("wl_linf_l1_vs_cap", SpaceSpec::wl(linf(), lp(int(1)))?, SpaceSpec::CapL1Linf),
    ];
    for (name, x, y) in endpoints {
        let e = measure_equivalence(&x, &y, ctx.trials, ctx.seed)?;
        let ok = e.upper <= 2.0 + 1e-9 && e.lower <= 2.0 + 1e-9;
        out.push(CheckReport::single(format!("amalgam.{name}"), verdict(ok), equivalence_constants(&e), None, ctx.seed, ctx.trials));
    }
    Ok(out)
}
