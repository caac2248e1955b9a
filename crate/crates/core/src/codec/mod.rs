//! Random Gaussian codebook, energy-gated encoder, AWGN channel and the
//! information-density threshold decoder.

mod sim;

pub use sim::{
    berry_esseen_check, berry_esseen_check_with, monte_carlo, monte_carlo_with, run_trial,
    BerryEsseenCheck, McResult, SimConfig, TrialOutcome,
};

use crate::bounds::ChannelParams;
use crate::numerics::{derive_stream, RngStream, LOG2_E};
use crate::{Error, Result};

/// Upper limit on `M·n` for a materialized codebook.
pub const MAX_CODEBOOK_ENTRIES: u64 = 100_000_000;

/// `M × n` matrix of i.i.d. `N(0, input_var)` amplitudes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    messages: usize,
    len: usize,
    input_var: f64,
    symbols: Vec<f64>,
}

fn check_size(messages: usize, len: usize) -> Result<()> {
    if messages == 0 || len == 0 {
        return Err(Error::domain("codebook needs at least one message and one symbol"));
    }
    let entries = messages as u64 * len as u64;
    if entries > MAX_CODEBOOK_ENTRIES {
        return Err(Error::Size(format!(
            "codebook of {messages} x {len} = {entries} entries exceeds {MAX_CODEBOOK_ENTRIES}"
        )));
    }
    Ok(())
}

impl Codebook {
    /// Draws every row in order from one stream.
    pub fn draw(messages: usize, len: usize, input_var: f64, stream: &mut RngStream) -> Result<Self> {
        check_size(messages, len)?;
        let symbols = (0..messages * len).map(|_| stream.normal(input_var)).collect();
        Ok(Codebook {
            messages,
            len,
            input_var,
            symbols,
        })
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    /// Codeword length `n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn input_var(&self) -> f64 {
        self.input_var
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.symbols[m * self.len..(m + 1) * self.len]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.symbols.chunks_exact(self.len)
    }
}

/// Generates a codebook whose row `m` comes from `derive_stream(seed, m)`.
pub fn generate_codebook(messages: usize, len: usize, input_var: f64, seed: u64) -> Result<Codebook> {
    check_size(messages, len)?;
    if !(input_var > 0.0) {
        return Err(Error::domain(format!("input variance must be positive, got {input_var}")));
    }
    let mut symbols = Vec::with_capacity(messages * len);
    for m in 0..messages {
        let mut s = derive_stream(seed, m as u64);
        symbols.extend((0..len).map(|_| s.normal(input_var)));
    }
    Ok(Codebook {
        messages,
        len,
        input_var,
        symbols,
    })
}

/// Zeroes every symbol from the first `k` at which the ungated walk
/// `S_k = Σ_{l≤k} (Y_l − x_l²)` drops below `−e0n`.
pub fn encode_gated(codeword: &[f64], harvests: &[f64], e0n: f64) -> Result<Vec<f64>> {
    if codeword.len() != harvests.len() {
        return Err(Error::domain(format!(
            "codeword and harvest lengths differ ({} vs {})",
            codeword.len(),
            harvests.len()
        )));
    }
    let mut s = 0.0;
    let mut open = true;
    Ok(codeword
        .iter()
        .zip(harvests)
        .map(|(&x, &y)| {
            s += y - x * x;
            open &= s >= -e0n;
            if open {
                x
            } else {
                0.0
            }
        })
        .collect())
}

/// `w_i = x_i + ζ_i` with `ζ_i ~ N(0, noise_var)`.
pub fn awgn_transmit(x: &[f64], noise_var: f64, stream: &mut RngStream) -> Result<Vec<f64>> {
    if !(noise_var > 0.0) {
        return Err(Error::domain(format!("noise variance must be positive, got {noise_var}")));
    }
    Ok(x.iter().map(|&xi| xi + stream.normal(noise_var)).collect())
}

fn norm_sq(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|a| a * a).sum()
}

/// `i(x; w)` in bits against the output law `N(0, (E[Y]+σ²) I)`.
pub fn info_density(x: &[f64], w: &[f64], params: &ChannelParams) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::domain(format!(
            "input and output lengths differ ({} vs {})",
            x.len(),
            w.len()
        )));
    }
    let s = params.output_var();
    let w2 = norm_sq(w.iter().copied());
    let r2 = norm_sq(x.iter().zip(w).map(|(a, b)| b - a));
    Ok(density_from_norms(x.len(), w2, r2, params, s))
}

fn density_from_norms(len: usize, w2: f64, r2: f64, params: &ChannelParams, s: f64) -> f64 {
    0.5 * len as f64 * (s / params.noise_var).log2()
        + LOG2_E * (w2 / (2.0 * s) - r2 / (2.0 * params.noise_var))
}

/// Messages whose normalized density exceeds `log_m_bits/n + eta_n`.
pub fn threshold_decode(
    w: &[f64],
    book: &Codebook,
    log_m_bits: f64,
    eta_n: f64,
    params: &ChannelParams,
) -> Result<Vec<usize>> {
    if w.len() != book.len() {
        return Err(Error::domain(format!(
            "received length {} does not match codebook length {}",
            w.len(),
            book.len()
        )));
    }
    let s = params.output_var();
    let w2 = norm_sq(w.iter().copied());
    let threshold = log_m_bits + w.len() as f64 * eta_n;
    Ok(book
        .rows()
        .enumerate()
        .filter(|(_, x)| {
            let r2 = norm_sq(x.iter().zip(w).map(|(a, b)| b - a));
            density_from_norms(w.len(), w2, r2, params, s) > threshold
        })
        .map(|(m, _)| m)
        .collect())
}
