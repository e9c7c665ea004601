//! Exact computation with rearrangement-invariant quasinorms on step functions.

pub mod duality;
pub mod error;
pub mod corpus;
pub mod json;
pub mod numeric;
pub mod represent;
pub mod shapefn;
pub mod spaces;
pub mod stepcore;
pub mod theorems;
pub mod value;

pub use error::{Error, Result};
pub use value::{ExtRational, ExtValue, Rational, Surd};
