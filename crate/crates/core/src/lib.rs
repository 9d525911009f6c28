//! Spatial supply/demand matching on random bipartite geometric graphs.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`geom`]: point sampling on `[0,1]^k`, service ranges, the compatibility
//!   graph under the volume and radius parametrizations, and grid trimming.
//! - [`matching`]: Hopcroft–Karp, the one-dimensional earliest-deadline greedy
//!   matcher, the set of demand nodes left exposed by some maximum matching,
//!   and the window-measure functional built on it.
//! - [`majorize`]: the majorization preorder and the constructive
//!   T-transform decomposition between majorized vectors.
//! - [`dualrange`]: the dual-service-range model, its lead-time Markov chain,
//!   the left-to-right generative process, closed forms, stationary densities
//!   and bounds.
//! - [`quad`]: piecewise Gauss–Legendre quadrature used to check the
//!   stationary densities.
//!
//! Randomness is always supplied by the caller through [`rand::Rng`], so every
//! routine is deterministic given a seeded generator.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dualrange;
mod error;
pub mod geom;
pub mod majorize;
pub mod matching;
pub mod quad;
pub mod sampling;

pub use error::{Error, Result};
