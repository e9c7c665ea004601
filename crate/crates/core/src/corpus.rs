//! Seeded random step functions and sequences for property checks.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stepcore::{Piece, StepFunction};
use crate::value::{ExtRational, Rational};

/// Deterministic generator for trial `trial` of a campaign seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial)
}

#[derive(Clone, Debug)]
pub struct StepOptions {
    pub max_pieces: usize,
    /// Breakpoints are multiples of `1/grid`.
    pub grid: i64,
    /// Breakpoints lie in `[0, span]` on an infinite domain.
    pub span: i64,
    /// Values are `n/value_den` with `0 ≤ n ≤ max_value`.
    pub max_value: i64,
    pub value_den: i64,
    pub tail_probability: f64,
    pub alpha: ExtRational,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            max_pieces: 6,
            grid: 4,
            span: 8,
            max_value: 12,
            value_den: 4,
            tail_probability: 0.0,
            alpha: ExtRational::Infinite,
        }
    }
}

impl StepOptions {
    pub fn with_alpha(mut self, alpha: ExtRational) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_tail(mut self, probability: f64) -> Self {
        self.tail_probability = probability;
        self
    }
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn random_value(rng: &mut impl Rng, opts: &StepOptions) -> Rational {
    ratio(rng.gen_range(0..=opts.max_value), opts.value_den)
}

pub fn random_step(rng: &mut impl Rng, opts: &StepOptions) -> StepFunction {
    let slots = match &opts.alpha {
        ExtRational::Finite(a) => (a * Rational::from_integer(opts.grid.into())).floor().to_integer().try_into().unwrap_or(i64::MAX),
        ExtRational::Infinite => opts.span * opts.grid,
    }
    .max(1);
    let k = rng.gen_range(1..=opts.max_pieces.max(1));
    let picks = (2 * k).min(slots as usize + 1);
    let mut points: Vec<i64> = index::sample(rng, slots as usize + 1, picks).into_iter().map(|i| i as i64).collect();
    points.sort_unstable();
    let pieces = points
        .chunks_exact(2)
        .map(|w| {
            let v = ratio(rng.gen_range(1..=opts.max_value.max(1)), opts.value_den);
            Piece::new(ratio(w[0], opts.grid), ExtRational::Finite(ratio(w[1], opts.grid)), v)
        })
        .collect();
    let tail = if opts.alpha.is_infinite() && opts.tail_probability > 0.0 && rng.gen_bool(opts.tail_probability) {
        ratio(rng.gen_range(1..=opts.max_value.max(1)), opts.value_den)
    } else {
        Rational::from_integer(0.into())
    };
    StepFunction::new(pieces, tail, opts.alpha.clone()).expect("sorted disjoint pieces")
}

pub fn random_sequence(rng: &mut impl Rng, max_len: usize, max_value: i64, den: i64) -> Vec<Rational> {
    let len = rng.gen_range(1..=max_len.max(1));
    (0..len).map(|_| ratio(rng.gen_range(0..=max_value), den)).collect()
}
