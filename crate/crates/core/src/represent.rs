//! Representation of an atomic r.i. quasinorm by block averages of `f*`.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::spaces::{self, SpaceSpec};
use crate::stepcore::{self, rearrange, MonotoneStep, Piece, SequenceFn, StepFunction};
use crate::value::{int, ExtRational, ExtValue, Rational};

/// Atoms of measure `β` carrying the sequence quasinorm `inner`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicRepresentation {
    beta: Rational,
    inner: SpaceSpec,
}

impl AtomicRepresentation {
    pub fn new(beta: Rational, inner: SpaceSpec) -> Result<Self> {
        SpaceSpec::atomic(beta.clone(), inner.clone())?;
        Ok(AtomicRepresentation { beta, inner })
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Atomic(beta, inner) => AtomicRepresentation::new(beta.clone(), (**inner).clone()),
            _ => Err(Error::Precondition("expected an atomic space".into())),
        }
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn inner(&self) -> &SpaceSpec {
        &self.inner
    }

    pub fn spec(&self) -> SpaceSpec {
        SpaceSpec::Atomic(self.beta.clone(), Box::new(self.inner.clone()))
    }

    /// `4·C_X²`.
    pub fn modulus_bound(&self) -> ExtValue {
        spaces::modulus_bound(&self.spec())
    }
}

/// End of the support of `f*`; an error for infinite mass on `[0, ∞)`.
fn support_end(fstar: &MonotoneStep) -> Result<Rational> {
    let last = fstar.steps().last().expect("non-empty");
    if last.value.is_zero() {
        return Ok(last.start.clone());
    }
    match fstar.alpha() {
        ExtRational::Finite(a) => Ok(a.clone()),
        ExtRational::Infinite => Err(Error::Precondition("block averages need bounded support".into())),
    }
}

/// `n ↦ β⁻¹ ∫_{n·w}^{(n+1)·w} f*` for blocks of width `w`, up to the block
/// where `f*` reaches its tail; the returned tail value repeats forever.
fn block_values(fstar: &MonotoneStep, width: &Rational, beta: &Rational) -> Result<(Vec<Rational>, Rational)> {
    let last = fstar.steps().last().expect("non-empty");
    let (end, tail) = if last.value.is_positive() && fstar.alpha().is_infinite() {
        (last.start.clone(), last.value.clone())
    } else {
        (support_end(fstar)?, Rational::zero())
    };
    let count: u64 = (&end / width).ceil().to_integer().try_into().map_err(|_| Error::OutOfRange("too many blocks".into()))?;
    let mut values = Vec::with_capacity(count as usize);
    for n in 0..count {
        let lo = width * Rational::from_integer(n.into());
        let hi = std::cmp::min(ExtRational::Finite(&lo + width), fstar.alpha().clone());
        let area = stepcore::integrate(fstar, &lo, &hi)?;
        values.push(area.finite().expect("finite block") / beta);
    }
    Ok((values, tail * width / beta))
}

fn block_integrals(fstar: &MonotoneStep, width: &Rational, beta: &Rational) -> Result<SequenceFn> {
    support_end(fstar)?;
    let (values, _) = block_values(fstar, width, beta)?;
    SequenceFn::from_values(&values, beta.clone())
}

/// `T(f)(n) = β⁻¹ ∫_{βn}^{β(n+1)} f*`.
pub fn block_average_t(rep: &AtomicRepresentation, f: &StepFunction) -> Result<SequenceFn> {
    block_integrals(&rearrange(f), &rep.beta, &rep.beta)
}

/// `S(f)(n) = β⁻¹ ∫_{βn/2}^{β(n+1)/2} f*`.
pub fn shifted_block_average_s(rep: &AtomicRepresentation, f: &StepFunction) -> Result<SequenceFn> {
    block_integrals(&rearrange(f), &(&rep.beta / int(2)), &rep.beta)
}

/// The sequences `ψ_f`, its even and odd parts, and their compressions.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiDecomposition {
    pub psi: SequenceFn,
    pub even: SequenceFn,
    pub odd: SequenceFn,
    pub even_compressed: SequenceFn,
    pub odd_compressed: SequenceFn,
}

impl PsiDecomposition {
    pub fn to_json(&self) -> Value {
        json!({
            "psi": self.psi.to_json(),
            "even": self.even.to_json(),
            "odd": self.odd.to_json(),
            "even_compressed": self.even_compressed.to_json(),
            "odd_compressed": self.odd_compressed.to_json(),
        })
    }
}

/// `ψ_f(n)` integrates `f*/β` over `[βm, β(m+1))` with `m = ⌊n/2⌋`, so both
/// compressions coincide with `T(f)`.
pub fn psi_decompose(rep: &AtomicRepresentation, f: &StepFunction) -> Result<PsiDecomposition> {
    let fstar = rearrange(f);
    let half = &rep.beta / int(2);
    let mut psi = Vec::new();
    let end = support_end(&fstar)?;
    let count: u64 = (&end / &half).ceil().to_integer().try_into().map_err(|_| Error::OutOfRange("too many blocks".into()))?;
    let count = count + count % 2;
    for n in 0..count {
        let m = Rational::from_integer((n - n % 2).into());
        let lo = &half * m;
        let hi = std::cmp::min(ExtRational::Finite(&lo + &rep.beta), fstar.alpha().clone());
        let area = stepcore::integrate(&fstar, &lo, &hi)?;
        psi.push(area.finite().expect("bounded support") / &rep.beta);
    }
    let pick = |parity: u64| -> Vec<Rational> {
        psi.iter()
            .enumerate()
            .map(|(n, v)| if n as u64 % 2 == parity { v.clone() } else { Rational::zero() })
            .collect()
    };
    let compress = |parity: usize| -> Vec<Rational> { psi.iter().skip(parity).step_by(2).cloned().collect() };
    let seq = |v: Vec<Rational>| SequenceFn::from_values(&v, rep.beta.clone());
    Ok(PsiDecomposition {
        psi: seq(psi.clone())?,
        even: seq(pick(0))?,
        odd: seq(pick(1))?,
        even_compressed: seq(compress(0))?,
        odd_compressed: seq(compress(1))?,
    })
}

/// `‖f‖ = ‖T(f)‖_X`.
pub fn rep_norm(rep: &AtomicRepresentation, f: &StepFunction) -> Result<ExtValue> {
    rep_norm_rearranged(&rep.beta, &rep.inner, &rearrange(f))
}

pub(crate) fn rep_norm_rearranged(beta: &Rational, inner: &SpaceSpec, fstar: &MonotoneStep) -> Result<ExtValue> {
    let (values, tail) = block_values(fstar, beta, beta)?;
    let pieces = values
        .into_iter()
        .enumerate()
        .map(|(n, v)| {
            let a = beta * Rational::from_integer((n as u64).into());
            let b = ExtRational::Finite(&a + beta);
            Piece::new(a, b, v)
        })
        .collect();
    spaces::norm(inner, &StepFunction::new(pieces, tail, ExtRational::Infinite)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub sequence_norm: ExtValue,
    pub function_norm: ExtValue,
    pub holds: bool,
}

/// `‖g‖_X` against the representation norm of the step realization of `g*`.
pub fn verify_identity(rep: &AtomicRepresentation, g: &SequenceFn) -> Result<IdentityCheck> {
    let sequence_norm = spaces::norm_seq(&rep.spec(), g)?;
    let function_norm = rep_norm(rep, &g.realization())?;
    let holds = sequence_norm.approx_eq(&function_norm, 1e-12, 0.0);
    Ok(IdentityCheck { sequence_norm, function_norm, holds })
}
