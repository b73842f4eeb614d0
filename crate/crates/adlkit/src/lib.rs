//! Stochastic bit-budgeted compressors for finite function classes.
//!
//! A *function class* here is a finite set of hypotheses, each mapping a finite
//! point set to vectors in `R^d`. The crate measures how many bits a stochastic,
//! unbiased, variance-controlled description of a hypothesis costs, and how that
//! cost relates to classical capacity measures (covering numbers, packing
//! numbers, VC dimension):
//!
//! - [`sketch`]: one-coordinate importance sketches of vectors, their prefix-free
//!   codec, and the sketch compressor for norm balls.
//! - [`compressor`]: the compressor interface, Monte Carlo verification of
//!   unbiasedness and directional second moments, and the combinators
//!   (averaging amplification, median boosting, isometric transport).
//! - [`cover`]: distances between hypotheses, exact and greedy covers, greedy
//!   packings, VC dimension, and multiscale cover chains.
//! - [`chain`]: the chain compressor built from a cover chain, with exact
//!   expected-bits accounting and a geometric variance envelope.
//! - [`separation`]: the Hadamard-embedded sign cube whose covering numbers
//!   collapse while sketch-compression cost keeps growing with the cube
//!   dimension.
//! - [`bounds`]: representativeness (uniform-deviation) estimates and the
//!   closed-form bound chain connecting description length, covers, and
//!   generalization.
//!
//! Everything randomized draws from [`core::RandomStream`], a seeded stream
//! with counter-derived substreams, so every experiment is reproducible
//! bit-for-bit regardless of thread count.

pub mod bounds;
pub mod chain;
pub mod compressor;
pub mod core;
pub mod cover;
pub mod error;
pub mod separation;
pub mod sketch;

pub use error::{AdlError, Result};
