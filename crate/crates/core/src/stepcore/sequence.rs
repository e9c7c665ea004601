use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use super::{Piece, StepFunction};
use crate::error::{Error, Result};
use crate::json;
use crate::value::{ExtRational, Rational};

/// Finitely supported non-negative sequence on `ℕ` with atoms of measure `β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceFn {
    entries: BTreeMap<u64, Rational>,
    atom: Rational,
}

impl SequenceFn {
    pub fn new(entries: BTreeMap<u64, Rational>, atom: Rational) -> Result<Self> {
        if !atom.is_positive() {
            return Err(Error::InvalidStep("atom measure must be positive".into()));
        }
        if entries.values().any(|v| v.is_negative()) {
            return Err(Error::InvalidStep("sequence entries must be non-negative".into()));
        }
        let entries = entries.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Ok(SequenceFn { entries, atom })
    }

    pub fn from_values(values: &[Rational], atom: Rational) -> Result<Self> {
        let entries = values.iter().enumerate().map(|(i, v)| (i as u64, v.clone())).collect();
        SequenceFn::new(entries, atom)
    }

    pub fn entries(&self) -> &BTreeMap<u64, Rational> {
        &self.entries
    }

    pub fn atom(&self) -> &Rational {
        &self.atom
    }

    pub fn get(&self, n: u64) -> Rational {
        self.entries.get(&n).cloned().unwrap_or_else(Rational::zero)
    }

    /// One past the largest index with a nonzero entry.
    pub fn len(&self) -> u64 {
        self.entries.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero entries sorted non-increasingly: the leading part of `g*`.
    pub fn rearranged_values(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.entries.values().cloned().collect();
        v.sort_by(|a, b| b.cmp(a));
        v
    }

    /// `Σ g*(n) χ_[βn, β(n+1))`.
    pub fn realization(&self) -> StepFunction {
        self.blocks(self.rearranged_values().into_iter().enumerate().map(|(i, v)| (i as u64, v)))
    }

    /// `Σ g(n) χ_[βn, β(n+1))` without rearranging.
    pub fn layout(&self) -> StepFunction {
        self.blocks(self.entries.iter().map(|(k, v)| (*k, v.clone())))
    }

    fn blocks(&self, items: impl Iterator<Item = (u64, Rational)>) -> StepFunction {
        let pieces = items
            .map(|(n, v)| {
                let a = &self.atom * Rational::from_integer(n.into());
                let b = &a + &self.atom;
                Piece::new(a, ExtRational::Finite(b), v)
            })
            .collect();
        StepFunction::new(pieces, Rational::zero(), ExtRational::Infinite).expect("disjoint blocks")
    }

    pub fn add(&self, other: &SequenceFn) -> Result<SequenceFn> {
        if self.atom != other.atom {
            return Err(Error::DomainMismatch("sequences with different atom measures".into()));
        }
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            *entries.entry(*k).or_insert_with(Rational::zero) += v;
        }
        SequenceFn::new(entries, self.atom.clone())
    }

    pub fn scale(&self, c: &Rational) -> SequenceFn {
        let entries = self.entries.iter().map(|(k, v)| (*k, v * c)).collect();
        SequenceFn::new(entries, self.atom.clone()).expect("non-negative scale")
    }

    /// Entrywise `self ≤ other`.
    pub fn le(&self, other: &SequenceFn) -> bool {
        self.entries.iter().all(|(k, v)| v <= &other.get(*k))
    }

    pub fn to_json(&self) -> Value {
        let n = self.len();
        let values: Vec<Value> = (0..n).map(|i| json::string(&ExtRational::Finite(self.get(i)))).collect();
        json!({"values": values, "beta": json::string(&ExtRational::Finite(self.atom.clone()))})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = json::object(v)?;
        let values = match json::field(obj, "values")? {
            Value::Array(items) => items.iter().map(json::as_rational).collect::<Result<Vec<_>>>()?,
            other => return Err(Error::Parse(format!("\"values\" must be an array, got {other}"))),
        };
        let beta = match obj.get("beta") {
            Some(b) => json::as_rational(b)?,
            None => Rational::from_integer(1.into()),
        };
        SequenceFn::from_values(&values, beta)
    }
}
