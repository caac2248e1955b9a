use super::{check_positive, ChannelParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Save-phase schedule for transmission length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Transmission-phase length.
    pub n: u64,
    /// Exponent of the logarithm in the save length.
    pub a: f64,
    /// Save-phase length `⌈√n (ln n)^a⌉`.
    pub save_len: u64,
    /// Energy the save phase is expected to gather, `N_n·E[Y]/2`.
    pub e0n: f64,
    /// Decoder threshold slack `log₂(n)/n` in bits per use.
    pub eta_n: f64,
}

impl Schedule {
    /// Total blocklength `n + N_n`.
    pub fn n_hat(&self) -> u64 {
        self.n + self.save_len
    }
}

/// `⌈√n (ln n)^a⌉`.
pub fn save_length(n: u64, a: f64) -> u64 {
    let nf = n as f64;
    (nf.sqrt() * nf.ln().powf(a)).ceil() as u64
}

/// Builds the schedule `N_n = ⌈√n (ln n)^a⌉`, `E_0n = N_n E[Y]/2`,
/// `η_n = log₂(n)/n`.
pub fn make_schedule(n: u64, a: f64, params: &ChannelParams) -> Result<Schedule> {
    if n < 2 {
        return Err(Error::domain(format!(
            "schedule needs n >= 2 so that ln n > 0, got {n}"
        )));
    }
    check_positive("a", a)?;
    params.validate()?;
    let save_len = save_length(n, a);
    let nf = n as f64;
    Ok(Schedule {
        n,
        a,
        save_len,
        e0n: save_len as f64 * params.harvest_mean / 2.0,
        eta_n: nf.log2() / nf,
    })
}
