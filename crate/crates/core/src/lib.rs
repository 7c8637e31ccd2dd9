//! Simulation and analysis of the intrinsically secure communications graph.
//!
//! Legitimate nodes and eavesdroppers are scattered in the plane as two
//! independent homogeneous Poisson processes. A directed edge `x_i -> x_j`
//! exists when the maximum secrecy rate of that link exceeds a threshold.
//! This crate samples such networks ([`spatial`]), evaluates link secrecy
//! ([`channel`]), builds the secure-link graph under several edge rules
//! ([`graph`]), evaluates the closed-form connectivity results
//! ([`analytic`]) and estimates the same quantities by Monte Carlo
//! ([`montecarlo`]) so that the two can be checked against each other
//! ([`validation`]).
//!
//! The `isgraph` binary is a thin front end over [`cli`].

// `!(x > 0.0)` is the NaN-rejecting form used throughout input checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod cli;
mod error;
pub mod graph;
pub mod montecarlo;
pub mod quadrature;
pub mod seed;
pub mod spatial;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
