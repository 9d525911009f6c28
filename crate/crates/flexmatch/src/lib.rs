//! Experiments, CSV output and configuration on top of `flexmatch-core`.
//!
//! The `flexmatch` binary is a thin front end over [`experiments`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod family;
pub mod output;
pub mod seeds;
pub mod stats;

pub use flexmatch_core as core;
