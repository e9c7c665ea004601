//! Scalar types: exact rationals, extended rationals, real radicals and the
//! extended non-negative value type used by every evaluator.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest bit length a radicand may reach before exact arithmetic gives up.
const MAX_BITS: u64 = 4096;
/// Largest root index kept exact.
const MAX_INDEX: u64 = 1024;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(n.into())
}

/// Exact binary value of a finite float.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite number {x}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.numer().bits() < 1000 && r.denom().bits() < 1000 {
        return r.to_f64().unwrap_or(f64::NAN);
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * (ln_bigint(&r.numer().abs()) - ln_bigint(r.denom())).exp()
}

fn ln_bigint(n: &BigInt) -> f64 {
    let b = n.bits();
    if b <= 1000 {
        return n.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = b - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_rational(r: &Rational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Parses `"p/q"`, integers and decimals such as `"0.25"` or `"1e-3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32 - 1;
    if scale.abs() > 4000 {
        return Err(bad());
    }
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Formats a float with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("float exponent");
    let exp: i32 = exp.parse().expect("float exponent");
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mant), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn bits(r: &Rational) -> u64 {
    r.numer().bits().max(r.denom().bits())
}

/// `r^e` for an integer exponent, refusing results beyond the size cap.
pub fn rational_pow(r: &Rational, e: i64) -> Option<Rational> {
    if e == 0 {
        return Some(Rational::one());
    }
    if r.is_zero() {
        return if e > 0 { Some(Rational::zero()) } else { None };
    }
    if bits(r).saturating_mul(e.unsigned_abs()) > MAX_BITS {
        return None;
    }
    let p = num_traits::pow(r.clone(), e.unsigned_abs() as usize);
    Some(if e < 0 { p.recip() } else { p })
}

fn perfect_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Exact `k`-th root of a non-negative rational, if it is rational.
pub fn rational_root(r: &Rational, k: u32) -> Option<Rational> {
    Some(BigRational::new(perfect_root(r.numer(), k)?, perfect_root(r.denom(), k)?))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A non-negative real `radicand^(1/index)` with rational radicand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    radicand: Rational,
    index: u32,
}

impl Surd {
    pub fn new(radicand: Rational, index: u64) -> Option<Surd> {
        if radicand.is_negative() || index == 0 {
            return None;
        }
        if radicand.is_zero() {
            return Some(Surd::rational(radicand));
        }
        if index > MAX_INDEX || bits(&radicand) > MAX_BITS {
            return None;
        }
        let mut r = radicand;
        let mut n = index;
        'outer: loop {
            for p in prime_factors(n) {
                if let Some(root) = rational_root(&r, p as u32) {
                    r = root;
                    n /= p;
                    continue 'outer;
                }
            }
            break;
        }
        Some(Surd { radicand: r, index: n as u32 })
    }

    pub fn rational(r: Rational) -> Surd {
        Surd { radicand: r, index: 1 }
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        (self.index == 1).then_some(&self.radicand)
    }

    pub fn is_zero(&self) -> bool {
        self.radicand.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        if self.index == 1 {
            rational_to_f64(&self.radicand)
        } else if self.radicand.is_zero() {
            0.0
        } else {
            let x = rational_to_f64(&self.radicand);
            if x.is_finite() && x > 1e-300 {
                match self.index {
                    2 => x.sqrt(),
                    3 => x.cbrt(),
                    n => x.powf(1.0 / n as f64),
                }
            } else {
                (ln_rational(&self.radicand) / self.index as f64).exp()
            }
        }
    }

    /// Raises to a rational power; `None` for `0^negative` or size overflow.
    pub fn powr(&self, e: &Rational) -> Option<Surd> {
        let a = e.numer().to_i64()?;
        let b = e.denom().to_u64()?;
        let raised = rational_pow(&self.radicand, a)?;
        Surd::new(raised, (self.index as u64).checked_mul(b)?)
    }

    fn lifted(&self, l: u64) -> Option<Rational> {
        rational_pow(&self.radicand, (l / self.index as u64) as i64)
    }

    pub fn mul(&self, other: &Surd) -> Option<Surd> {
        let l = (self.index as u64).lcm(&(other.index as u64));
        if l > MAX_INDEX {
            return None;
        }
        Surd::new(self.lifted(l)? * other.lifted(l)?, l)
    }

    pub fn recip(&self) -> Option<Surd> {
        if self.radicand.is_zero() {
            return None;
        }
        Some(Surd { radicand: self.radicand.recip(), index: self.index })
    }

    pub fn div(&self, other: &Surd) -> Option<Surd> {
        self.mul(&other.recip()?)
    }

    pub fn add(&self, other: &Surd) -> Option<Surd> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        if self.index == 1 && other.index == 1 {
            return Some(Surd::rational(&self.radicand + &other.radicand));
        }
        let q = other.div(self)?;
        let q = q.as_rational()?;
        self.mul(&Surd::rational(Rational::one() + q))
    }

    /// `self - other` when the difference is non-negative and exactly representable.
    pub fn sub(&self, other: &Surd) -> Option<Surd> {
        if other.is_zero() {
            return Some(self.clone());
        }
        if self.index == 1 && other.index == 1 {
            let d = &self.radicand - &other.radicand;
            return (!d.is_negative()).then(|| Surd::rational(d));
        }
        if self.is_zero() {
            return None;
        }
        let q = other.div(self)?;
        let q = q.as_rational()?;
        let f = Rational::one() - q;
        if f.is_negative() {
            return None;
        }
        self.mul(&Surd::rational(f))
    }

    /// Exact comparison when the lifted radicands fit, float comparison otherwise.
    pub fn compare(&self, other: &Surd) -> Ordering {
        if self.index == other.index {
            return self.radicand.cmp(&other.radicand);
        }
        let l = (self.index as u64).lcm(&(other.index as u64));
        match (self.lifted(l), other.lifted(l)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.to_f64().partial_cmp(&other.to_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 1 {
            write!(f, "{}", format_rational(&self.radicand))
        } else if self.radicand.is_integer() {
            write!(f, "{}^(1/{})", format_rational(&self.radicand), self.index)
        } else {
            write!(f, "({})^(1/{})", format_rational(&self.radicand), self.index)
        }
    }
}

/// A rational or `+∞`. Used for breakpoints, measures and exact integrals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinite,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(Rational::zero())
    }

    pub fn int(n: i64) -> Self {
        ExtRational::Finite(int(n))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtRational::Finite(r) if r.is_zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinite => None,
        }
    }

    pub fn add(&self, other: &ExtRational) -> ExtRational {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinite,
        }
    }

    /// Product with the convention `0·∞ = 0`.
    pub fn mul(&self, other: &ExtRational) -> ExtRational {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a * b),
            _ if self.is_zero() || other.is_zero() => ExtRational::zero(),
            _ => ExtRational::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(r) => rational_to_f64(r),
            ExtRational::Infinite => f64::INFINITY,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(ExtRational::Infinite),
            t => parse_rational(t).map(ExtRational::Finite),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{}", format_rational(r)),
            ExtRational::Infinite => write!(f, "inf"),
        }
    }
}

/// Extended non-negative real: exact radical, float approximation, or `+∞`.
///
/// Products follow `0·∞ = 0`. Exact operands stay exact whenever the result is
/// again a single radical; otherwise the result degrades to a float.
#[derive(Clone, Debug)]
pub enum ExtValue {
    Exact(Surd),
    Approx(f64),
    Infinite,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Exact(Surd::rational(Rational::zero()))
    }

    pub fn one() -> Self {
        ExtValue::Exact(Surd::rational(Rational::one()))
    }

    pub fn rational(r: Rational) -> Self {
        ExtValue::Exact(Surd::rational(r))
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN is not an extended value");
        if x == f64::INFINITY {
            ExtValue::Infinite
        } else {
            ExtValue::Approx(x.max(0.0))
        }
    }

    pub fn from_ext_rational(x: &ExtRational) -> Self {
        match x {
            ExtRational::Finite(r) => ExtValue::rational(r.clone()),
            ExtRational::Infinite => ExtValue::Infinite,
        }
    }

    pub fn from_surd(s: Option<Surd>, fallback: impl FnOnce() -> f64) -> Self {
        match s {
            Some(s) => ExtValue::Exact(s),
            None => ExtValue::from_f64(fallback()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExtValue::Exact(s) => s.is_zero(),
            ExtValue::Approx(x) => *x == 0.0,
            ExtValue::Infinite => false,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtValue::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, ExtValue::Approx(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ExtValue::Exact(s) => s.as_rational(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtValue::Exact(s) => s.to_f64(),
            ExtValue::Approx(x) => *x,
            ExtValue::Infinite => f64::INFINITY,
        }
    }

    pub fn add(&self, other: &ExtValue) -> ExtValue {
        match (self, other) {
            (ExtValue::Infinite, _) | (_, ExtValue::Infinite) => ExtValue::Infinite,
            (ExtValue::Exact(a), ExtValue::Exact(b)) => {
                ExtValue::from_surd(a.add(b), || a.to_f64() + b.to_f64())
            }
            _ if self.is_zero() => other.clone(),
            _ if other.is_zero() => self.clone(),
            _ => ExtValue::from_f64(self.to_f64() + other.to_f64()),
        }
    }

    /// `self - other`, clamped at zero; exact when representable.
    pub fn sub_clamped(&self, other: &ExtValue) -> ExtValue {
        match (self, other) {
            (_, ExtValue::Infinite) => ExtValue::zero(),
            (ExtValue::Infinite, _) => ExtValue::Infinite,
            (ExtValue::Exact(a), ExtValue::Exact(b)) => {
                if a.compare(b) != Ordering::Greater {
                    return ExtValue::zero();
                }
                ExtValue::from_surd(a.sub(b), || (a.to_f64() - b.to_f64()).max(0.0))
            }
            _ => ExtValue::from_f64((self.to_f64() - other.to_f64()).max(0.0)),
        }
    }

    pub fn mul(&self, other: &ExtValue) -> ExtValue {
        if self.is_zero() || other.is_zero() {
            return ExtValue::zero();
        }
        match (self, other) {
            (ExtValue::Infinite, _) | (_, ExtValue::Infinite) => ExtValue::Infinite,
            (ExtValue::Exact(a), ExtValue::Exact(b)) => {
                ExtValue::from_surd(a.mul(b), || a.to_f64() * b.to_f64())
            }
            _ => ExtValue::from_f64(self.to_f64() * other.to_f64()),
        }
    }

    pub fn mul_rational(&self, r: &Rational) -> ExtValue {
        self.mul(&ExtValue::rational(r.clone()))
    }

    /// Quotient with `x/0 = ∞` for `x > 0`, `0/0 = 0`, `x/∞ = 0`; `None` for `∞/∞`.
    pub fn checked_div(&self, other: &ExtValue) -> Option<ExtValue> {
        Some(match (self, other) {
            (ExtValue::Infinite, ExtValue::Infinite) => return None,
            _ if self.is_zero() => ExtValue::zero(),
            (_, ExtValue::Infinite) => ExtValue::zero(),
            (ExtValue::Infinite, _) => ExtValue::Infinite,
            _ if other.is_zero() => ExtValue::Infinite,
            (ExtValue::Exact(a), ExtValue::Exact(b)) => {
                ExtValue::from_surd(a.div(b), || a.to_f64() / b.to_f64())
            }
            _ => ExtValue::from_f64(self.to_f64() / other.to_f64()),
        })
    }

    /// Quotient as a float; `∞/∞` is NaN.
    pub fn ratio(&self, other: &ExtValue) -> f64 {
        match self.checked_div(other) {
            Some(v) => v.to_f64(),
            None => f64::NAN,
        }
    }

    /// Rational power; `0^e` for negative `e` is `∞`, `x^0 = 1`.
    pub fn powr(&self, e: &Rational) -> ExtValue {
        if e.is_zero() {
            return ExtValue::one();
        }
        match self {
            ExtValue::Infinite => {
                if e.is_positive() {
                    ExtValue::Infinite
                } else {
                    ExtValue::zero()
                }
            }
            _ if self.is_zero() => {
                if e.is_positive() {
                    ExtValue::zero()
                } else {
                    ExtValue::Infinite
                }
            }
            ExtValue::Exact(s) => {
                ExtValue::from_surd(s.powr(e), || s.to_f64().powf(rational_to_f64(e)))
            }
            ExtValue::Approx(x) => ExtValue::from_f64(x.powf(rational_to_f64(e))),
        }
    }

    pub fn max(self, other: ExtValue) -> ExtValue {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtValue) -> ExtValue {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Equality up to `rel` relative / `abs` absolute error; exact operands compare exactly.
    pub fn approx_eq(&self, other: &ExtValue, rel: f64, abs: f64) -> bool {
        match (self, other) {
            (ExtValue::Infinite, ExtValue::Infinite) => true,
            (ExtValue::Infinite, _) | (_, ExtValue::Infinite) => false,
            (ExtValue::Exact(a), ExtValue::Exact(b)) => a.compare(b) == Ordering::Equal,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= abs + rel * a.abs().max(b.abs())
            }
        }
    }

    /// `self ≤ other` allowing the same tolerance as [`ExtValue::approx_eq`] for floats.
    pub fn le_tol(&self, other: &ExtValue, rel: f64, abs: f64) -> bool {
        self <= other || self.approx_eq(other, rel, abs)
    }
}

impl PartialEq for ExtValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtValue {}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtValue::Infinite, ExtValue::Infinite) => Ordering::Equal,
            (ExtValue::Infinite, _) => Ordering::Greater,
            (_, ExtValue::Infinite) => Ordering::Less,
            (ExtValue::Exact(a), ExtValue::Exact(b)) => a.compare(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()).unwrap_or(Ordering::Equal),
        }
    }
}

impl From<Rational> for ExtValue {
    fn from(r: Rational) -> Self {
        ExtValue::rational(r)
    }
}

impl From<&ExtRational> for ExtValue {
    fn from(x: &ExtRational) -> Self {
        ExtValue::from_ext_rational(x)
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Exact(s) => write!(f, "{s}"),
            ExtValue::Approx(x) => write!(f, "{}", format_float(*x)),
            ExtValue::Infinite => write!(f, "inf"),
        }
    }
}
