use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use super::{Layout, Segment, StepFunction};
use crate::error::{Error, Result};
use crate::json;
use crate::value::{ExtRational, Rational};

/// Value `value` from `start` up to the next step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub start: Rational,
    pub value: Rational,
}

/// Non-increasing right-continuous step function on `[0, α)`; the last step
/// runs to `α`, so its value is the tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneStep {
    steps: Vec<Step>,
    alpha: ExtRational,
}

impl MonotoneStep {
    pub fn new(steps: Vec<Step>, alpha: ExtRational) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidStep(m.to_string()));
        match steps.first() {
            None => return bad("a monotone step function needs at least one step"),
            Some(s) if !s.start.is_zero() => return bad("first step must start at 0"),
            _ => {}
        }
        for w in steps.windows(2) {
            if w[1].start <= w[0].start {
                return bad("step starts must increase");
            }
            if w[1].value >= w[0].value {
                return bad("step values must strictly decrease");
            }
        }
        if steps.iter().any(|s| s.value.is_negative()) {
            return bad("step values must be non-negative");
        }
        if let Some(last) = steps.last() {
            if ExtRational::Finite(last.start.clone()) >= alpha {
                return bad("steps must start inside the domain");
            }
        }
        Ok(MonotoneStep { steps, alpha })
    }

    /// Builds from `(start, value)` pairs, merging equal neighbours and dropping empty steps.
    pub fn from_pairs(pairs: Vec<(Rational, Rational)>, alpha: ExtRational) -> Result<Self> {
        let mut steps: Vec<Step> = Vec::with_capacity(pairs.len());
        for (start, value) in pairs {
            if ExtRational::Finite(start.clone()) >= alpha {
                break;
            }
            match steps.last_mut() {
                Some(last) if last.start == start => last.value = value,
                Some(last) if last.value == value => {}
                _ => steps.push(Step { start, value }),
            }
        }
        MonotoneStep::new(steps, alpha)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn alpha(&self) -> &ExtRational {
        &self.alpha
    }

    /// `f*(0)`, the essential supremum.
    pub fn head(&self) -> &Rational {
        &self.steps[0].value
    }

    /// Value on the last step.
    pub fn tail(&self) -> &Rational {
        &self.steps.last().expect("non-empty").value
    }

    pub fn is_zero(&self) -> bool {
        self.head().is_zero()
    }

    /// Right end of step `i`.
    pub fn end_of(&self, i: usize) -> ExtRational {
        match self.steps.get(i + 1) {
            Some(s) => ExtRational::Finite(s.start.clone()),
            None => self.alpha.clone(),
        }
    }

    pub fn to_step_function(&self) -> StepFunction {
        StepFunction::from_segments(self.segments(), self.alpha.clone())
    }

    /// `t ↦ f(t/c)`: every breakpoint multiplied by `c`.
    pub fn scale_breakpoints(&self, c: &Rational) -> MonotoneStep {
        let steps = self
            .steps
            .iter()
            .map(|s| Step { start: &s.start * c, value: s.value.clone() })
            .collect();
        let alpha = match &self.alpha {
            ExtRational::Finite(a) => ExtRational::Finite(a * c),
            ExtRational::Infinite => ExtRational::Infinite,
        };
        MonotoneStep { steps, alpha }
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| json!({"t": json::string(&ExtRational::Finite(s.start.clone())), "v": json::string(&ExtRational::Finite(s.value.clone()))}))
            .collect();
        json!({"steps": steps, "alpha": json::string(&self.alpha)})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = json::object(v)?;
        let items = match json::field(obj, "steps")? {
            Value::Array(items) => items,
            other => return Err(Error::Parse(format!("\"steps\" must be an array, got {other}"))),
        };
        let steps = items
            .iter()
            .map(|item| {
                let o = json::object(item)?;
                Ok(Step { start: json::rational_field(o, "t")?, value: json::rational_field(o, "v")? })
            })
            .collect::<Result<Vec<_>>>()?;
        let alpha = json::ext_field_or(obj, "alpha", ExtRational::Infinite)?;
        MonotoneStep::new(steps, alpha)
    }
}

impl Layout for MonotoneStep {
    fn segments(&self) -> Vec<Segment> {
        (0..self.steps.len())
            .map(|i| Segment {
                start: self.steps[i].start.clone(),
                end: self.end_of(i),
                value: self.steps[i].value.clone(),
            })
            .collect()
    }

    fn domain(&self) -> &ExtRational {
        &self.alpha
    }
}

/// The distribution function `s ↦ λ{f > s}` on `[0, ∞)`.
///
/// It equals `∞` on `[0, c)` when the tail `c` is positive on an infinite
/// domain; the finite part is a right-continuous non-increasing step function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    infinite_below: Option<Rational>,
    steps: Vec<Step>,
}

impl Distribution {
    pub fn infinite_below(&self) -> Option<&Rational> {
        self.infinite_below.as_ref()
    }

    /// Finite steps; the first starts at `infinite_below` (or 0), the last has value 0.
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn value_at(&self, s: &Rational) -> ExtRational {
        if let Some(c) = &self.infinite_below {
            if s < c {
                return ExtRational::Infinite;
            }
        }
        let idx = self.steps.partition_point(|st| &st.start <= s);
        ExtRational::Finite(self.steps[idx - 1].value.clone())
    }

    /// All constancy intervals `[start, end)` including the infinite one.
    pub fn intervals(&self) -> Vec<(Rational, ExtRational, ExtRational)> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        if let Some(c) = &self.infinite_below {
            out.push((Rational::zero(), ExtRational::Finite(c.clone()), ExtRational::Infinite));
        }
        for (i, s) in self.steps.iter().enumerate() {
            let end = match self.steps.get(i + 1) {
                Some(n) => ExtRational::Finite(n.start.clone()),
                None => ExtRational::Infinite,
            };
            out.push((s.start.clone(), end, ExtRational::Finite(s.value.clone())));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| json!({"s": json::string(&ExtRational::Finite(s.start.clone())), "measure": json::string(&ExtRational::Finite(s.value.clone()))}))
            .collect();
        json!({
            "infinite_below": self.infinite_below.as_ref().map(|c| json::string(&ExtRational::Finite(c.clone()))),
            "steps": steps,
        })
    }
}

/// Distribution function by summing the measures of super-level sets.
pub fn distribution(f: &StepFunction) -> Distribution {
    let mut by_value: BTreeMap<Rational, ExtRational> = BTreeMap::new();
    for s in f.segments() {
        let len = s.length();
        let slot = by_value.entry(s.value).or_insert_with(ExtRational::zero);
        *slot = slot.add(&len);
    }
    let levels: Vec<(Rational, ExtRational)> = by_value.into_iter().rev().collect();
    let mut cum = Vec::with_capacity(levels.len());
    let mut running = ExtRational::zero();
    for (_, m) in &levels {
        running = running.add(m);
        cum.push(running.clone());
    }
    let m = levels.len() - 1;
    let mut raw: Vec<(Rational, ExtRational)> = Vec::with_capacity(levels.len() + 1);
    if levels[m].0.is_positive() {
        raw.push((Rational::zero(), cum[m].clone()));
    }
    for j in (0..m).rev() {
        raw.push((levels[j + 1].0.clone(), cum[j].clone()));
    }
    raw.push((levels[0].0.clone(), ExtRational::zero()));

    let mut infinite_below = None;
    let mut steps = Vec::with_capacity(raw.len());
    for (start, value) in raw {
        match value {
            ExtRational::Infinite => {}
            ExtRational::Finite(v) => {
                if steps.is_empty() && !start.is_zero() {
                    infinite_below = Some(start.clone());
                }
                steps.push(Step { start, value: v });
            }
        }
    }
    Distribution { infinite_below, steps }
}

/// Non-increasing rearrangement `f*(t) = inf{s : f_*(s) ≤ t}`, obtained by
/// inverting the distribution function.
pub fn rearrange(f: &StepFunction) -> MonotoneStep {
    let d = distribution(f);
    let alpha = f.alpha().clone();
    let steps: Vec<Step> = d
        .steps
        .iter()
        .rev()
        .filter(|s| ExtRational::Finite(s.value.clone()) < alpha)
        .map(|s| Step { start: s.value.clone(), value: s.start.clone() })
        .collect();
    MonotoneStep { steps, alpha }
}

/// On `[start, next)`: `f**(t) = (area + slope·(t − start)) / t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalPiece {
    pub start: Rational,
    pub area: Rational,
    pub slope: Rational,
}

/// Exact representation of `f**(t) = t⁻¹∫₀ᵗ f*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalFunction {
    pieces: Vec<MaximalPiece>,
    alpha: ExtRational,
}

impl MaximalFunction {
    pub fn pieces(&self) -> &[MaximalPiece] {
        &self.pieces
    }

    pub fn alpha(&self) -> &ExtRational {
        &self.alpha
    }

    fn piece_for(&self, t: &Rational) -> &MaximalPiece {
        let idx = self.pieces.partition_point(|p| &p.start <= t);
        &self.pieces[idx.max(1) - 1]
    }

    /// `∫₀ᵗ f* = t·f**(t)`.
    pub fn integral_to(&self, t: &Rational) -> Rational {
        let p = self.piece_for(t);
        &p.area + &p.slope * (t - &p.start)
    }

    /// `f**(t)` for `t > 0`; at `t = 0` the right limit `f*(0)`.
    pub fn value_at(&self, t: &Rational) -> Rational {
        if t.is_zero() {
            return self.pieces[0].slope.clone();
        }
        self.integral_to(t) / t
    }
}

pub fn maximal(fstar: &MonotoneStep) -> MaximalFunction {
    let mut pieces = Vec::with_capacity(fstar.steps.len());
    let mut area = Rational::zero();
    for (i, s) in fstar.steps.iter().enumerate() {
        pieces.push(MaximalPiece { start: s.start.clone(), area: area.clone(), slope: s.value.clone() });
        if let ExtRational::Finite(end) = fstar.end_of(i) {
            area += &s.value * (end - &s.start);
        }
    }
    MaximalFunction { pieces, alpha: fstar.alpha.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepcore::{integrate, Piece};
    use crate::value::{int, rat};

    fn fin(n: i64) -> ExtRational {
        ExtRational::int(n)
    }

    fn steps(pairs: &[(i64, i64)]) -> Vec<Step> {
        pairs.iter().map(|&(t, v)| Step { start: int(t), value: int(v) }).collect()
    }

    #[test]
    fn rearrange_examples() {
        let f = StepFunction::indicator(int(2), fin(5), int(1));
        assert_eq!(rearrange(&f).steps(), &steps(&[(0, 1), (3, 0)])[..]);
        let f = StepFunction::from_triples(&[(int(0), int(1), int(3)), (int(1), int(2), int(1)), (int(4), int(6), int(5))]).unwrap();
        assert_eq!(rearrange(&f).steps(), &steps(&[(0, 5), (2, 3), (3, 1), (4, 0)])[..]);
        let f = StepFunction::new(vec![Piece::new(int(0), fin(1), int(2))], int(1), ExtRational::Infinite).unwrap();
        let r = rearrange(&f);
        assert_eq!(r.steps(), &steps(&[(0, 2), (1, 1)])[..]);
        assert_eq!(r.tail(), &int(1));
    }

    #[test]
    fn rearrange_zero_and_finite_domain() {
        assert_eq!(rearrange(&StepFunction::zero(ExtRational::Infinite)).steps(), &steps(&[(0, 0)])[..]);
        let f = StepFunction::new(vec![Piece::new(int(1), fin(2), int(3))], int(1), fin(4)).unwrap();
        let r = rearrange(&f);
        assert_eq!(r.steps(), &steps(&[(0, 3), (1, 1)])[..]);
        assert_eq!(r.alpha(), &fin(4));
    }

    #[test]
    fn distribution_examples() {
        let d = distribution(&StepFunction::indicator(int(0), fin(3), int(1)));
        assert_eq!(d.steps(), &steps(&[(0, 3), (1, 0)])[..]);
        assert!(d.infinite_below().is_none());
        let f = StepFunction::from_triples(&[(int(0), int(1), int(2)), (int(1), int(3), int(1))]).unwrap();
        assert_eq!(distribution(&f).steps(), &steps(&[(0, 3), (1, 1), (2, 0)])[..]);
        let f = StepFunction::new(vec![Piece::new(int(0), fin(1), int(2))], int(1), ExtRational::Infinite).unwrap();
        let d = distribution(&f);
        assert_eq!(d.infinite_below(), Some(&int(1)));
        assert_eq!(d.steps(), &steps(&[(1, 1), (2, 0)])[..]);
        assert!(d.value_at(&rat(1, 2)).is_infinite());
        assert_eq!(d.value_at(&int(1)), fin(1));
    }

    #[test]
    fn maximal_examples() {
        let m = maximal(&rearrange(&StepFunction::indicator(int(0), fin(1), int(1))));
        assert_eq!(m.value_at(&rat(1, 2)), int(1));
        assert_eq!(m.value_at(&int(4)), rat(1, 4));
        let f = StepFunction::from_triples(&[(int(0), int(1), int(2)), (int(1), int(2), int(1))]).unwrap();
        let m = maximal(&rearrange(&f));
        assert_eq!(m.value_at(&int(1)), int(2));
        assert_eq!(m.value_at(&rat(3, 2)), rat(5, 3));
        assert_eq!(m.value_at(&int(6)), rat(1, 2));
        let m = maximal(&rearrange(&StepFunction::constant(int(7))));
        assert_eq!(m.value_at(&int(100)), int(7));
    }

    #[test]
    fn maximal_agrees_with_integral() {
        let f = StepFunction::from_triples(&[(int(0), int(3), int(2)), (int(5), int(6), int(9))]).unwrap();
        let fs = rearrange(&f);
        let m = maximal(&fs);
        for t in 1..12 {
            let t = rat(t, 2);
            assert_eq!(ExtRational::Finite(m.integral_to(&t)), integrate(&fs, &int(0), &ExtRational::Finite(t.clone())).unwrap());
        }
    }

    #[test]
    fn monotone_validation() {
        assert!(MonotoneStep::new(steps(&[(0, 1), (1, 2)]), ExtRational::Infinite).is_err());
        assert!(MonotoneStep::new(steps(&[(1, 1)]), ExtRational::Infinite).is_err());
        let m = MonotoneStep::new(steps(&[(0, 3), (2, 1)]), ExtRational::Infinite).unwrap();
        assert_eq!(MonotoneStep::from_json(&m.to_json()).unwrap(), m);
    }
}
