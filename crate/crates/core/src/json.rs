//! Helpers for the JSON wire formats: rationals travel as strings, `"inf"` marks ∞.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::value::{parse_rational, rational_from_f64, ExtRational, Rational};

pub fn object(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Parse(format!("expected a JSON object, got {v}")))
}

pub fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

pub fn as_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => rational_from_f64(n.as_f64().unwrap_or(f64::NAN)),
        },
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

pub fn as_ext_rational(v: &Value) -> Result<ExtRational> {
    match v {
        Value::String(s) => ExtRational::parse(s),
        _ => as_rational(v).map(ExtRational::Finite),
    }
}

pub fn rational_field(obj: &Map<String, Value>, key: &str) -> Result<Rational> {
    as_rational(field(obj, key)?)
}

pub fn ext_field_or(obj: &Map<String, Value>, key: &str, default: ExtRational) -> Result<ExtRational> {
    match obj.get(key) {
        Some(v) => as_ext_rational(v),
        None => Ok(default),
    }
}

pub fn string(r: &impl std::fmt::Display) -> Value {
    Value::String(r.to_string())
}
