//! Dynamics of rational maps on the p-adic projective line.

pub mod cli;
pub mod decomposition;
pub mod dynamics;
pub mod error;
pub mod padic;
pub mod p2criterion;
pub mod parse;
pub mod poly;
pub mod projective;
pub mod search;
pub mod ratmap;

pub use error::{Error, Result};
pub use padic::{ExactRational, PrimeContext, Residue, Valuation};
pub use projective::{ProjectiveBall, ProjectivePoint, Side};
pub use ratmap::{Chart, Mobius, RationalMap, ReducedMap};
