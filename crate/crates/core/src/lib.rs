//! Reduced-noise probabilistic linear amplifiers ("μ²-amplifiers").
//!
//! A μ²-amplifier cascades an immaculate Kraus stage of gain `g1` with a
//! phase-insensitive linear amplifier of gain `g2`, giving overall gain
//! `G = g1 g2` and normally ordered output noise `μ²(G² − 1)`. The crate
//! provides
//!
//! - [`fock`]: truncated Fock-space states, moments and coherent overlaps,
//! - [`channels`]: the immaculate stage, the linear-amplifier channel and the
//!   full pipeline,
//! - [`metrics`]: closed-form probabilities, fidelities, PFPs, SNRs and noise
//!   figures,
//! - [`quasiprob`]: Husimi Q-function grids and output-state SNRs,
//! - [`oracle`]: a brute-force two-mode-squeezing reference channel.

pub mod channels;
pub mod error;
pub mod fock;
pub mod metrics;
pub mod oracle;
pub mod quasiprob;

pub use error::{Error, Result};
pub use num_complex::Complex64;
