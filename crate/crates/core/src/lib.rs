//! Exact-arithmetic toolkit for smooth square-free representatives of
//! residue classes.
//!
//! The crate computes, at desk scale and with exact integer arithmetic:
//!
//! - per-modulus cover bounds: the least `M` such that every residue class
//!   modulo `p` holds a `p`-smooth square-free integer `<= M`, and the
//!   budgeted `q^alpha`-smooth variant over reduced classes
//!   ([`representatives`]);
//! - multiplicative character groups, character sums over square-free
//!   integers, and exceptional-prime censuses ([`characters`]);
//! - double Kloosterman sums over prime windows with full residue maxima
//!   and equidistribution discrepancy ([`kloosterman`]);
//! - exact counts of congruence solutions with fast/naive dual routes
//!   ([`congruences`]);
//! - short-window censuses against predicted main terms ([`lemma_lab`]);
//! - a deterministic verification suite over the exact identities
//!   ([`verify`]).
//!
//! Sweeps are data-parallel with rayon when the default `parallel` feature
//! is on; disabling it yields a fully sequential build with identical
//! results.

pub mod arith;
pub mod characters;
pub mod congruences;
pub mod error;
pub mod kloosterman;
pub mod lemma_lab;
mod parallel;
pub mod report;
pub mod representatives;
pub mod verify;

pub use arith::{Factorization, PrimeWindow, SieveTables};
pub use error::{Error, Result};
pub use report::CountReport;
