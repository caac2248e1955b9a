//! Finite-blocklength achievable rates for energy-harvesting AWGN channels.
//!
//! The transmitter runs a save-and-transmit scheme: it first gathers energy for
//! `N_n` slots into an infinite buffer, then sends an `n`-symbol Gaussian
//! codeword whose symbols are gated off once the buffer would run dry. The
//! receiver uses an information-density threshold decoder.
//!
//! The crate is split into:
//!
//! * [`numerics`]: Gaussian special functions, Gauss-Hermite quadrature,
//!   counter-based random streams and binomial confidence intervals.
//! * [`bounds`]: capacities, dispersions, the save-phase schedule, the error
//!   budget `ε_n`, the exact achievable `log M` and its closed asymptotic form.
//! * [`ehmodel`]: harvest processes, the save phase and the buffer random walk
//!   with the Chebyshev and Kolmogorov outage bounds.
//! * [`codec`]: random codebooks, the gated encoder, the AWGN channel, the
//!   threshold decoder and end-to-end Monte Carlo of the error events.
//! * [`harness`]: JSON experiment configs, parameter sweeps and CSV/JSON/plot
//!   output.
//!
//! All information quantities are in bits. Monte Carlo work runs on rayon when
//! the `parallel` feature is enabled (the default) and sequentially otherwise;
//! results are identical either way.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod codec;
pub mod ehmodel;
mod error;
pub mod exec;
pub mod harness;
pub mod numerics;

pub use error::{Error, Result};
