#![allow(dead_code)]

use proptest::prelude::*;
use rikit::stepcore::{Piece, StepFunction};
use rikit::value::rat;
use rikit::{ExtRational, Rational};

/// Pieces on a quarter grid: `(gap, length, value)` triples laid out left to right.
pub fn step_on(alpha: ExtRational, with_tail: bool) -> impl Strategy<Value = StepFunction> {
    let tail = if with_tail { (0i64..4).boxed() } else { Just(0i64).boxed() };
    (prop::collection::vec((0i64..4, 1i64..5, 1i64..13), 0..6), tail).prop_map(move |(parts, tail)| {
        let mut pos = 0;
        let mut pieces = Vec::new();
        for (gap, len, v) in parts {
            let a = pos + gap;
            let b = a + len;
            if let ExtRational::Finite(end) = &alpha {
                if &rat(b, 4) > end {
                    break;
                }
            }
            pieces.push(Piece::new(rat(a, 4), ExtRational::Finite(rat(b, 4)), rat(v, 4)));
            pos = b;
        }
        let tail = if alpha.is_infinite() { rat(tail, 4) } else { Rational::from_integer(0.into()) };
        StepFunction::new(pieces, tail, alpha.clone()).expect("ordered pieces")
    })
}

pub fn step() -> impl Strategy<Value = StepFunction> {
    step_on(ExtRational::Infinite, false)
}

pub fn step_with_tail() -> impl Strategy<Value = StepFunction> {
    step_on(ExtRational::Infinite, true)
}
