//! The twelve acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL` line to stderr before asserting.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::Command;

use num_traits::{One, Signed, Zero};
use rikit::corpus::{random_sequence, random_step, trial_rng, StepOptions};
use rikit::duality::{associate_closed_form, holder_check, reciprocal_candidate, resonance_gap, AssociateEstimator};
use rikit::represent::{block_average_t, shifted_block_average_s, verify_identity, AtomicRepresentation};
use rikit::shapefn::{self, ShapeFunction};
use rikit::spaces::{fundamental, modulus_probe, norm, SpaceSpec};
use rikit::stepcore::{self, dilate, distribution, integrate_product, rearrange, Layout, MonotoneStep, Piece, SequenceFn, StepFunction};
use rikit::theorems::{self, dual_sets_forward, embedding_sum, endpoint_equivalence, endpoint_ratio, norm_from_set_oracle, sup_equality};
use rikit::value::{int, rat, rational_from_f64, rational_to_f64};
use rikit::{ExtRational, ExtValue, Rational};

const SEED: u64 = 20240601;

type ClosedForm = Box<dyn Fn(f64) -> f64>;

fn report(n: u32, ok: bool, detail: String) {
    let line = format!("criterion {n}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(ok, "criterion {n} failed: {detail}");
}

fn corpus(seed: u64, t: u64, opts: &StepOptions) -> StepFunction {
    random_step(&mut trial_rng(seed, t), opts)
}

fn tailed() -> StepOptions {
    StepOptions::default().with_tail(0.3)
}

fn power(num: i64, den: i64) -> ShapeFunction {
    ShapeFunction::power(int(1), rat(num, den))
}

fn two_piece(p0: Rational, p1: Rational) -> ShapeFunction {
    ShapeFunction::from_monomials(&[(int(0), Some(int(1)), int(1), p0), (int(1), None, int(1), p1)]).unwrap()
}

fn lp(p: Rational) -> SpaceSpec {
    SpaceSpec::lp(ExtRational::Finite(p)).unwrap()
}

fn linf() -> SpaceSpec {
    SpaceSpec::lp(ExtRational::Infinite).unwrap()
}

fn m(phi: ShapeFunction) -> SpaceSpec {
    SpaceSpec::weak_marcinkiewicz(phi).unwrap()
}

/// Values of `f` with the total measure carrying each, largest first, cut
/// after the first infinite measure.
fn sort_oracle(f: &StepFunction) -> Vec<(Rational, ExtRational)> {
    let mut by_value: BTreeMap<Rational, ExtRational> = BTreeMap::new();
    for s in f.segments().into_iter().filter(|s| s.value.is_positive()) {
        let e = by_value.entry(s.value.clone()).or_insert_with(ExtRational::zero);
        *e = e.add(&s.length());
    }
    let mut out = Vec::new();
    for (v, len) in by_value.into_iter().rev() {
        let done = len.is_infinite();
        out.push((v, len));
        if done {
            break;
        }
    }
    out
}

fn level_measures(fstar: &MonotoneStep) -> Vec<(Rational, ExtRational)> {
    fstar.segments().into_iter().filter(|s| s.value.is_positive()).map(|s| (s.value.clone(), s.length())).collect()
}

#[test]
fn criterion_01_rearrangement_oracle() {
    let mut bad = 0;
    for t in 0..1000u64 {
        let opts = if t % 4 == 3 { StepOptions::default().with_alpha(ExtRational::int(5)) } else { tailed() };
        let f = corpus(SEED, t, &opts);
        let fstar = rearrange(&f);
        if level_measures(&fstar) != sort_oracle(&f) || distribution(&fstar.to_step_function()) != distribution(&f) {
            bad += 1;
        }
    }
    report(1, bad == 0, format!("{bad} mismatches in 1000 functions"));
}

fn blocks(rng_values: &[i64]) -> StepFunction {
    let pieces = rng_values
        .iter()
        .enumerate()
        .map(|(k, &v)| Piece::new(rat(k as i64, 2), ExtRational::Finite(rat(k as i64 + 1, 2)), int(v)))
        .collect();
    StepFunction::new(pieces, Rational::zero(), ExtRational::Infinite).unwrap()
}

#[test]
fn criterion_02_hardy_littlewood() {
    use rand::Rng;
    let (mut ineq, mut eq, mut res) = (0, 0, 0);
    for t in 0..1000u64 {
        let f = corpus(SEED, 2 * t, &tailed());
        let g = corpus(SEED, 2 * t + 1, &StepOptions::default());
        if integrate_product(&f, &g).unwrap() > integrate_product(&rearrange(&f), &rearrange(&g)).unwrap() {
            ineq += 1;
        }
        let (fs, gs) = (rearrange(&f).to_step_function(), rearrange(&g).to_step_function());
        if integrate_product(&fs, &gs).unwrap() != integrate_product(&rearrange(&fs), &rearrange(&gs)).unwrap() {
            eq += 1;
        }
        let mut rng = trial_rng(SEED + 1, t);
        let n = rng.gen_range(1..=6usize);
        let mut fv: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=8)).collect();
        let mut gv: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=8)).collect();
        fv[n - 1] = fv[n - 1].max(1);
        let gap = resonance_gap(&blocks(&fv), &blocks(&gv), n).unwrap();
        fv.sort_unstable_by(|a, b| b.cmp(a));
        gv.sort_unstable_by(|a, b| b.cmp(a));
        let sorted = rat(fv.iter().zip(&gv).map(|(a, b)| a * b).sum::<i64>(), 2);
        if gap.best != gap.bound || gap.bound != ExtValue::rational(sorted) {
            res += 1;
        }
    }
    report(2, ineq + eq + res == 0, format!("inequality violations {ineq}, monotone equality misses {eq}, resonance misses {res} over 1000"));
}

#[test]
fn criterion_03_sup_characterisation() {
    let integer = [
        power(1, 1),
        power(0, 1),
        power(2, 1),
        two_piece(int(1), int(0)),
        two_piece(int(0), int(1)),
        two_piece(int(2), int(1)),
    ];
    let fractional = [power(1, 2), power(1, 3), two_piece(rat(1, 2), rat(1, 4))];
    let (mut exact_miss, mut approx_miss) = (0, 0);
    for t in 0..500u64 {
        let f = corpus(SEED, t, &tailed());
        let k = t as usize % (integer.len() + fractional.len());
        let (phi, exact) = if k < integer.len() { (&integer[k], true) } else { (&fractional[k - integer.len()], false) };
        let r = sup_equality(&f, phi).unwrap();
        let direct = norm(&m(phi.clone()), &f).unwrap();
        let ok = if exact { r.lhs == r.rhs && r.lhs.is_exact() && r.lhs == direct } else { r.lhs.approx_eq(&r.rhs, 1e-9, 0.0) && r.lhs.approx_eq(&direct, 1e-9, 0.0) };
        if !ok {
            if exact {
                exact_miss += 1;
            } else {
                approx_miss += 1;
            }
        }
    }
    report(3, exact_miss + approx_miss == 0, format!("exact misses {exact_miss}, 1e-9 misses {approx_miss} over 500 pairs"));
}

#[test]
fn criterion_04_quasi_triangle_constants() {
    let sqrt = power(1, 2);
    let cases: Vec<(&str, SpaceSpec, f64)> = vec![
        ("m_t", m(power(1, 1)), 2.0),
        ("m_sqrt", m(sqrt.clone()), 2f64.sqrt()),
        ("m_max(t,1)", m(two_piece(int(0), int(1))), 2.0),
        ("L1", lp(int(1)), 1.0),
        ("Linf", linf(), 1.0),
        ("Lambda_sqrt", SpaceSpec::lorentz_endpoint(sqrt.clone()).unwrap(), 1.0),
        ("M_sqrt", SpaceSpec::marcinkiewicz(sqrt).unwrap(), 1.0),
        ("L1/2", lp(rat(1, 2)), 2.0),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, spec, bound) in cases {
        let probe = modulus_probe(&spec, 500, SEED).unwrap();
        ok &= probe.measured <= bound * (1.0 + 1e-12);
        detail.push(format!("{name} {:.6}<={:.6}", probe.measured, bound));
    }
    report(4, ok, detail.join(", "));
}

#[test]
fn criterion_05_endpoint_equivalence() {
    let sqrt = power(1, 2);
    let rep = endpoint_equivalence(&sqrt).unwrap();
    // φ(t)/t·∫₀ᵗ s^{-1/2} ds = 2 for every t.
    let s_ok = rep.s == ExtValue::rational(int(2)) && rep.equivalent;
    let mut best = 0f64;
    for t in 0..500u64 {
        let f = corpus(SEED, t, &tailed());
        best = best.max(endpoint_ratio(&sqrt, &rearrange(&f)).unwrap().unwrap_or(0.0));
    }
    for (eps, n, ratio) in [(1e-2, 1e2, 1.01), (1e-3, 1e3, 1.02), (1e-1, 1e1, 1.005)] {
        let g = reciprocal_candidate(&sqrt, eps, n, ratio).unwrap();
        best = best.max(endpoint_ratio(&sqrt, &g).unwrap().unwrap_or(0.0));
    }
    let weak = theorems::weak_l1_witness(10);
    let divergence = endpoint_ratio(&power(1, 1), &rearrange(&weak)).unwrap().unwrap_or(0.0);
    let target = (1024f64).ln() / 2.0;
    let ok = s_ok && best > 1.9 && best <= 2.0 * (1.0 + 1e-12) && divergence >= target;
    report(5, ok, format!("S = {}, max ratio {best:.6}, weak-L1 witness ratio {divergence:.4} >= {target:.4}", rep.s));
}

#[test]
fn criterion_06_embedding_criteria() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, expect) in [(rat(1, 2), false), (int(1), false), (int(2), true)] {
        let phi = ShapeFunction::power(int(1), p.recip());
        let e = embedding_sum(&phi, 0, SEED).unwrap();
        ok &= e.embeds == expect && e.consistent();
        detail.push(format!("p={p}: embeds {}", e.embeds));
    }
    let sqrt = power(1, 2);
    let e = embedding_sum(&sqrt, 0, SEED).unwrap();
    ok &= e.constant == ExtValue::rational(int(2));
    let mut worst = 0f64;
    for t in 0..500u64 {
        let f = corpus(SEED, t, &StepOptions::default());
        let lhs = norm(&SpaceSpec::SumL1Linf, &f).unwrap();
        let rhs = norm(&m(sqrt.clone()), &f).unwrap().mul_rational(&int(2));
        ok &= lhs.le_tol(&rhs, 1e-12, 0.0);
        if !rhs.is_zero() {
            worst = worst.max(lhs.ratio(&rhs));
        }
    }
    detail.push(format!("constant {} with max ||f||_sum/(2||f||_m) = {worst:.6}", e.constant));
    report(6, ok, detail.join(", "));
}

fn random_intervals(seed: u64, t: u64) -> Vec<(Rational, Rational)> {
    let opts = StepOptions { max_value: 1, value_den: 1, ..StepOptions::default() };
    let mut e: Vec<(Rational, Rational)> = corpus(seed, t, &opts).pieces().iter().map(|p| (p.a.clone(), p.b.finite().unwrap().clone())).collect();
    if e.is_empty() {
        e.push((int(0), int(1)));
    }
    e
}

#[test]
fn criterion_07_dualisation() {
    let shapes = [power(1, 1), power(1, 2)];
    let (mut forward_bad, mut upper_bad, mut equality_bad) = (0, 0, 0);
    let mut example = None;
    for t in 0..200u64 {
        let phi = &shapes[t as usize % 2];
        let f = corpus(SEED, t, &StepOptions::default());
        let e = random_intervals(SEED + 7, t);
        let k = (t % 11) as u32;
        let exact = norm(&m(phi.clone()), &f).unwrap();
        let a = if exact.is_zero() { ExtValue::one() } else { exact.clone() };
        let sets = dual_sets_forward(&f, phi, &e, k, &a).unwrap();
        if !(sets.measure_ok && sets.integral_ok) {
            forward_bad += 1;
        }
        for c in [int(1), rat(1, 2), rat(1, 3)] {
            if !exact.le_tol(&norm_from_set_oracle(&f, phi, &c, None).unwrap().bound, 1e-12, 0.0) {
                upper_bad += 1;
            }
        }
        let at_one = norm_from_set_oracle(&f, phi, &int(1), None).unwrap().bound;
        if at_one != exact {
            equality_bad += 1;
            example.get_or_insert_with(|| format!("f = {}, oracle {at_one} vs norm {exact}", f.to_json()));
        }
    }
    let ok = forward_bad + upper_bad + equality_bad == 0;
    report(
        7,
        ok,
        format!(
            "forward bound misses {forward_bad}/200, upper bound misses {upper_bad}/600, C=1 equality misses {equality_bad}/200{}",
            example.map(|e| format!("; first: {e}")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_08_representation() {
    let mut misses = BTreeMap::new();
    for (label, inner, exact) in [("l1", lp(int(1)), true), ("linf", linf(), true), ("l2", lp(int(2)), false), ("l1/2", lp(rat(1, 2)), false)] {
        for beta in [int(1), int(2)] {
            let rep = AtomicRepresentation::new(beta.clone(), inner.clone()).unwrap();
            for t in 0..200u64 {
                let values = random_sequence(&mut trial_rng(SEED, t), 8, 12, 4);
                let g = SequenceFn::from_values(&values, beta.clone()).unwrap();
                let check = verify_identity(&rep, &g).unwrap();
                let direct = match label {
                    "l1" => Some(ExtValue::rational(values.iter().sum::<Rational>() * &beta)),
                    "linf" => Some(ExtValue::rational(values.iter().max().cloned().unwrap_or_else(Rational::zero))),
                    _ => None,
                };
                let ok = if exact {
                    check.sequence_norm == check.function_norm && direct.is_none_or(|d| d == check.sequence_norm)
                } else {
                    check.holds && check.sequence_norm.approx_eq(&check.function_norm, 1e-12, 0.0)
                };
                if !ok {
                    *misses.entry(format!("{label} beta={beta}")).or_insert(0) += 1;
                }
            }
        }
    }
    let rep = AtomicRepresentation::new(int(1), lp(int(1))).unwrap();
    let mut split_bad = 0;
    for t in 0..1000u64 {
        let f1 = corpus(SEED, 2 * t, &StepOptions::default());
        let f2 = corpus(SEED, 2 * t + 1, &StepOptions::default());
        let lhs = block_average_t(&rep, &stepcore::add(&f1, &f2).unwrap()).unwrap();
        let rhs = shifted_block_average_s(&rep, &f1).unwrap().add(&shifted_block_average_s(&rep, &f2).unwrap()).unwrap().scale(&int(2));
        if !lhs.le(&rhs) {
            split_bad += 1;
        }
    }
    let quasi = AtomicRepresentation::new(int(1), lp(rat(1, 2))).unwrap();
    let probe = modulus_probe(&quasi.spec(), 500, SEED).unwrap();
    let ok = misses.is_empty() && split_bad == 0 && probe.measured <= 16.0;
    report(8, ok, format!("identity misses {misses:?}, split misses {split_bad}/1000, modulus {:.6} <= 16", probe.measured));
}

#[test]
fn criterion_09_associate_closed_forms() {
    let sqrt = power(1, 2);
    let spec = m(sqrt);
    let estimator = AssociateEstimator::new(&spec, &[]).unwrap();
    let form = associate_closed_form(&spec).unwrap();
    let weak_l1 = associate_closed_form(&m(power(1, 1))).unwrap();
    let (mut low, mut over, mut finite_weak) = (0, 0, 0);
    let mut worst = f64::INFINITY;
    let half_grid = StepOptions { grid: 2, ..StepOptions::default() };
    for t in 0..200u64 {
        let f = corpus(SEED, t, &half_grid);
        if f.is_zero() {
            continue;
        }
        let exact = form.value(&f).unwrap();
        let est = estimator.estimate(&f).unwrap().value;
        worst = worst.min(est.ratio(&exact));
        if est < exact.mul_rational(&rat(99, 100)) {
            low += 1;
        }
        if est > exact {
            over += 1;
        }
        if !weak_l1.value(&f).unwrap().is_infinite() {
            finite_weak += 1;
        }
    }
    let sqrt = power(1, 2);
    let specs = [
        lp(int(1)),
        lp(int(2)),
        lp(rat(3, 2)),
        linf(),
        SpaceSpec::lorentz(ExtRational::int(2), ExtRational::int(2)).unwrap(),
        SpaceSpec::lorentz(ExtRational::int(2), ExtRational::Infinite).unwrap(),
        m(sqrt.clone()),
        SpaceSpec::marcinkiewicz(sqrt.clone()).unwrap(),
        SpaceSpec::lorentz_endpoint(sqrt).unwrap(),
    ];
    let mut negative_slack = 0;
    for (i, spec) in specs.iter().enumerate() {
        for t in 0..100u64 {
            let f = corpus(SEED + i as u64, 2 * t, &StepOptions::default());
            let g = corpus(SEED + i as u64, 2 * t + 1, &tailed());
            let h = holder_check(spec, &f, &g).unwrap();
            if !(h.holds && h.slack >= -1e-12 * h.bound.to_f64().max(1.0)) {
                negative_slack += 1;
            }
        }
    }
    let ok = low + over + finite_weak + negative_slack == 0;
    report(
        9,
        ok,
        format!("estimate below 0.99 {low}, above closed form {over}, min ratio {worst:.6}, finite weak-L1 associates {finite_weak}, negative Hölder slack {negative_slack}"),
    );
}

#[test]
fn criterion_10_fundamental_functions() {
    let grid: Vec<Rational> = (0..20).map(|k| rational_from_f64(1e-3 * 1e6f64.powf(k as f64 / 19.0)).unwrap()).collect();
    let sqrt = power(1, 2);
    let lorentz = |p: i64, q: Option<i64>| {
        let qq = q.map_or(ExtRational::Infinite, ExtRational::int);
        let coef = q.map_or(1.0, |q| (p as f64 / q as f64).powf(1.0 / q as f64));
        (SpaceSpec::lorentz(ExtRational::int(p), qq).unwrap(), Box::new(move |t: f64| coef * t.powf(1.0 / p as f64)) as ClosedForm)
    };
    let mut cases: Vec<(String, SpaceSpec, ClosedForm)> = Vec::new();
    for (p, q) in [(2, Some(1)), (2, Some(2)), (3, Some(2)), (2, Some(4)), (2, None)] {
        let (spec, closed) = lorentz(p, q);
        cases.push((format!("L({p},{q:?})"), spec, closed));
    }
    cases.push(("sum".into(), SpaceSpec::SumL1Linf, Box::new(|t: f64| t.min(1.0))));
    cases.push(("cap".into(), SpaceSpec::CapL1Linf, Box::new(|t: f64| 1.0 + t)));
    cases.push(("m_sqrt".into(), m(sqrt.clone()), Box::new(|t: f64| t.sqrt())));
    cases.push(("M_sqrt".into(), SpaceSpec::marcinkiewicz(sqrt.clone()).unwrap(), Box::new(|t: f64| t.sqrt())));
    cases.push(("Lambda_sqrt".into(), SpaceSpec::lorentz_endpoint(sqrt).unwrap(), Box::new(|t: f64| t.sqrt())));
    cases.push(("m_t_then_one".into(), m(two_piece(int(1), int(0))), Box::new(|t: f64| t.min(1.0))));
    let mut misses = Vec::new();
    for (name, spec, closed) in &cases {
        let fun = fundamental(spec, &ExtRational::Infinite).unwrap();
        for t in &grid {
            let chi = StepFunction::indicator(Rational::zero(), ExtRational::Finite(t.clone()), Rational::one());
            let direct = norm(spec, &chi).unwrap();
            let value = fun.value(t).unwrap();
            let expected = closed(rational_to_f64(t));
            let exact_ok = match (value.as_rational(), direct.as_rational()) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            };
            let rel = |x: f64| (x - expected).abs() <= 1e-12 * expected.abs();
            if !(exact_ok && value.approx_eq(&direct, 1e-12, 0.0) && rel(value.to_f64()) && rel(direct.to_f64())) {
                misses.push(format!("{name} at {t}"));
            }
        }
    }
    let mut dilation_bad = 0;
    for p in [1, 2] {
        let x = SpaceSpec::lorentz(ExtRational::int(p), ExtRational::Infinite).unwrap();
        for t in 0..200u64 {
            let f = corpus(SEED, t, &tailed());
            let lhs = norm(&x, &dilate(&f, &rat(1, 2)).unwrap()).unwrap();
            let rhs = ExtValue::rational(int(2)).powr(&rat(1, p)).mul(&norm(&x, &f).unwrap());
            if lhs != rhs {
                dilation_bad += 1;
            }
        }
    }
    report(10, misses.is_empty() && dilation_bad == 0, format!("fundamental misses {misses:?}, dilation misses {dilation_bad}/400"));
}

#[test]
fn criterion_11_dual_fundamentals() {
    let grid = theorems::log_grid(1e-3, 1e3, 40).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, phi) in [("sqrt", power(1, 2)), ("cbrt", power(1, 3)), ("sqrt_then_quarter", two_piece(rat(1, 2), rat(1, 4)))] {
        let spec = SpaceSpec::lorentz_endpoint(phi.clone()).unwrap();
        let bar = shapefn::bar(&phi).unwrap();
        match associate_closed_form(&spec) {
            Some(rikit::duality::AssociateForm::Space(SpaceSpec::Marcinkiewicz(dual))) if dual == bar => {}
            _ => ok = false,
        }
        let c = theorems::dual_fundamental_constants(&spec, &grid).unwrap().unwrap();
        ok &= c.upper <= 2.0 && c.lower <= 2.0;
        detail.push(format!("Lambda_{name} ({:.4}, {:.4})", c.upper, c.lower));
    }
    for p in [2i64, 3, 4] {
        let spec = m(power(1, p));
        let c = theorems::dual_fundamental_constants(&spec, &grid).unwrap().unwrap();
        // ∫₀ᵗ s^{-1/p} ds = p'·t^{1/p'} against φ̄ = t^{1/p'}.
        let p_prime = p as f64 / (p as f64 - 1.0);
        ok &= c.upper <= 2.0 && c.lower <= 2.0 && (c.upper - p_prime).abs() <= 1e-12 * p_prime;
        detail.push(format!("m_t^(1/{p}) ({:.4}, {:.4})", c.upper, c.lower));
    }
    report(11, ok, detail.join(", "));
}

fn run_verify() -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_rikit")).args(["verify", "--suite", "all", "--seed", "7"]).output().unwrap();
    (out.stdout, out.status.code())
}

#[test]
fn criterion_12_cli_determinism() {
    let (first, code1) = run_verify();
    let (second, code2) = run_verify();
    let parsed: serde_json::Value = serde_json::from_slice(&first).unwrap_or(serde_json::Value::Null);
    let checks = parsed.as_array().map_or(0, |a| a.len());
    let ok = first == second && code1 == Some(0) && code2 == Some(0) && checks > 0;
    report(12, ok, format!("{checks} checks, {} bytes, identical {}, exit codes {code1:?}/{code2:?}", first.len(), first == second));
}
