//! Computer algebra and rigorous numerics for rings of generalized numbers
//! parametrized by a gauge, and for the generalized holomorphic functions
//! built on top of them.
//!
//! A *net* is a family `x_eps` of complex numbers indexed by `eps` in `(0,1]`.
//! Fixing a gauge `rho` (a net decreasing to zero), the moderate nets —
//! `|x_eps| = O(rho_eps^-N)` for some `N` — modulo the negligible ones —
//! `|x_eps| = O(rho_eps^N)` for every `N` — form a ring with a rich
//! non-Archimedean order theory. This crate represents nets both symbolically
//! (a small closed expression grammar, see [`netlang`]) and as sampled values
//! on a geometric grid of `eps` points, and turns the classical definitions
//! (invertibility, sharp balls, little-oh calculus, Cauchy derivatives,
//! mollifier embeddings of distributions) into *verdicts*: three-valued
//! answers carrying the order at which they were decided and the evidence
//! used.
//!
//! Most numerical answers are desk-scale certificates, not proofs; whenever a
//! symbolic rule gap or an oscillating tail prevents an exact decision the
//! verdict honestly degrades to `Undecidable` or to a sampled estimate with
//! `exact = false`.

pub mod basicfn;
pub mod embed;
mod error;
pub mod gauge;
pub mod holo;
pub mod netlang;
pub mod order;
pub mod par;
pub mod quad;
pub mod report;
pub mod scalars;
pub mod sets;
pub mod wide;

pub use error::{Error, Result};
pub use gauge::{EpsGrid, Gauge};
pub use scalars::{GenNumber, Verdict, VerdictValue};
