//! Exact moment distances `E|X_{k+r} - Y_k|^a` between arrival events of two
//! i.i.d. Poisson processes, with independent oracles and the bicolored
//! matching experiment built on them.
//!
//! All closed forms return exact rationals; Gamma values at half-integers
//! carry `sqrt(pi)` symbolically until it cancels.

pub mod closed_forms;
pub mod error;
pub mod exact_arith;
pub mod identities;
pub mod matching_lab;
pub mod oracles;
pub mod quadrature;

pub use closed_forms::{
    diagonal_moment, even_moment_general, moment, odd_moment_lemma2, odd_moment_lemma3,
    odd_moment_theorem4, sum_moments, sum_moments_termwise, MomentQuery, MomentValue,
};
pub use error::{Error, Result};
pub use exact_arith::{GammaFactor, HalfInt, Rat};
pub use identities::{GridLimits, IdentityReport, Suite};
pub use matching_lab::{MatchingRun, RateCoupling, ScalingFit};
pub use oracles::{exact_moment_first_principles, mc_moment, ArrivalSequence, MCEstimate};
