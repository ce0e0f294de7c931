//! Computational asymptotic density on subsets of the natural numbers.
//!
//! The crate revolves around [`SetExpr`], a symbolic, lazily evaluable subset
//! of ℕ (the naturals excluding 0). Partial averages `ν_N(A) = |A ∩ {1..N}| / N`
//! are computed as exact rationals; where a closed form exists the limiting
//! charge `ν(A)` is produced exactly, and otherwise upper/lower Cesàro limits
//! are estimated from a checkpoint schedule and labelled heuristic.
//!
//! On top of that sit the null-modification construction (trimming a null set
//! so partial averages never exceed the limit), chain analysis with uniform
//! convergence certificates, almost-everywhere equivalence over the null
//! ideal, and pseudonorms of simple real sequences.

pub mod chains;
pub mod constructions;
pub mod density;
pub mod error;
pub mod kp;
pub mod nullmod;
pub mod quotient;
pub mod rational;
pub mod sets;

pub use error::Error;
pub use rational::Rat;
pub use sets::SetExpr;

/// Largest horizon accepted by counting routines (63-bit guard).
pub const MAX_HORIZON: u64 = i64::MAX as u64;
