//! Substitutive structure of low-complexity minimal subshifts.
//!
//! This crate builds and analyzes S-adic subshifts generated by the
//! two-parameter-plus-remainder substitution family `tau_{m,n,r}`:
//!
//! ```text
//! r = 0:  0 -> 0^(m-1) 1            1 -> 0^(n-m) 0^(m-1) 1
//! r > 0:  0 -> 0^(m-1) 1 0^(r-1) 1  1 -> 0^(n-m) 0^(m-1) 1 0^(r-1) 1
//! ```
//!
//! seeded by an outer substitution `pi` on `{0,1}`. On top of the exact
//! word algebra it provides:
//!
//! * brute-force language sampling and word-complexity analysis, with the
//!   closed-form complexity-increment and special-length formulas,
//! * the derived integer sequences `a_k`, `b_k`, `|v_k|`, the continued
//!   fraction data `beta_k`, decay certification and parameter constraints,
//! * exact rational enclosures for the additive eigenvalues `alpha_k`,
//!   the eigenvalue-group exponent maps `L`/`R`, and rational offsets,
//! * maximal-equicontinuous-factor descriptors (odometer x adelic
//!   nilmanifold), character evaluation, and orbit-equivalence comparison,
//! * balance/letter-frequency/dimension-group data, and
//! * a realizer that constructs a system matching a prescribed odometer,
//!   nilmanifold exponent map, and complexity slope target.
//!
//! All arithmetic that feeds a verdict is exact (big integers and big
//! rationals); floating point appears only in display-level fits.

pub mod balance;
pub mod complexity;
pub mod error;
pub mod fixtures;
pub mod mef;
pub mod rat;
pub mod realize;
pub mod spectrum;
pub mod structure;
pub mod word;

pub use error::Error;
pub use word::{Alphabet, SadicSystem, Substitution, TauParams, Word};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
