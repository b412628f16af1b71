//! Modeling and optimization of tweet injection in a follower network.
//!
//! A social network instance is a directed follower graph together with
//! per-type retweet probabilities. Exposure to each tweet type evolves as a
//! linear dynamical system `x_(k+1) = A_t x_(k) + b_t` driven by an injection
//! policy `b`, and converges to the limiting state `(I - A_t)^-1 b_t`.
//! On top of that model this crate computes:
//!
//! * the closed-form engagement-optimal policy and its value,
//! * the engagement optimum subject to a minimum per-user, per-type exposure
//!   (`delta`-diversity), via a self-contained simplex solver,
//! * the cost of diversity and its theoretical bounds, swept across a grid
//!   of diversity levels and probability scalings,
//! * analytical `delta`-uniform and `delta`-exact policies with certified
//!   engagement guarantees,
//! * empirical verification harnesses for the convergence and bound theorems,
//! * an ingestion pipeline that reconstructs instances from raw follower
//!   edges and hashtag-labeled tweet records.
//!
//! All randomized code takes explicit seeds (ChaCha8 PRNG); every function is
//! a pure map from inputs to outputs, so values are safe to share across
//! threads.

// Matrix kernels walk columns of row-major storage; index loops are the
// clear form there.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod dynamics;
pub mod ingest;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod net;
pub mod policies;

pub use net::{Instance, InjectionPolicy, State, TypeMatrices};

/// Upper cap applied to retweet probabilities everywhere one is inferred or
/// rescaled, keeping them strictly inside `[0, 1)`.
pub const PROBABILITY_CAP: f64 = 0.99;
