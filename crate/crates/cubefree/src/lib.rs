//! Counting and exponential-sum diagnostics for cube-free values of floor
//! powers [n^c].
//!
//! The crate computes, exactly and at scale: floors of rational powers
//! (certified by interval arithmetic, never by float luck), segmented sieves
//! for primes / Moebius values / cube-free integers, joint counts of n with
//! [n^c] cube-free against their predicted main terms, the exact integer
//! split of those counts into short- and long-divisor sums, sawtooth and
//! exponential-sum diagnostics with certified phases, and runnable forms of
//! three classical approximations to the sawtooth function with residual
//! checks against their stated majorants.

pub mod cli;
pub mod counting;
pub mod decomp;
pub mod error;
pub mod expsum;
pub mod power;
pub mod psi_approx;
pub mod rational;
pub mod report;
pub mod sieve;
pub mod sum;

pub use error::{Error, Result};
