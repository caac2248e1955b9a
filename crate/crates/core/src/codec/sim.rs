//! End-to-end Monte Carlo of the save-and-transmit scheme.

use super::{awgn_transmit, encode_gated, threshold_decode, Codebook, MAX_CODEBOOK_ENTRIES};
use crate::bounds::{eh_capacity, eh_dispersion, ChannelParams, MomentSet, Schedule};
use crate::ehmodel::{buffer_walk, trial_streams, HarvestModel};
use crate::exec::{self, Exec};
use crate::numerics::{derive_stream, dkw_epsilon, std_normal_cdf, BinomialEstimate};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

const NOISE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Everything a trial needs. Message 0 is always the one sent.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ChannelParams,
    pub harvest: HarvestModel,
    pub schedule: Schedule,
    pub messages: usize,
    /// `None` draws a fresh codebook for every trial (the random-coding
    /// ensemble); `Some` reuses one fixed codebook.
    pub codebook: Option<Arc<Codebook>>,
}

impl SimConfig {
    pub fn new(
        params: ChannelParams,
        harvest: HarvestModel,
        schedule: Schedule,
        messages: usize,
    ) -> Result<Self> {
        params.validate()?;
        harvest.validate()?;
        if (harvest.mean() - params.harvest_mean).abs() > 1e-12 * params.harvest_mean {
            return Err(Error::domain(format!(
                "harvest model mean {} differs from channel harvest_mean {}",
                harvest.mean(),
                params.harvest_mean
            )));
        }
        if messages == 0 {
            return Err(Error::domain("need at least one message"));
        }
        if messages as u64 * schedule.n > MAX_CODEBOOK_ENTRIES {
            return Err(Error::Size(format!(
                "{messages} messages of length {} exceed the codebook guard",
                schedule.n
            )));
        }
        Ok(SimConfig {
            params,
            harvest,
            schedule,
            messages,
            codebook: None,
        })
    }

    /// Uses `book` for every trial instead of drawing per trial.
    pub fn with_codebook(mut self, book: Arc<Codebook>) -> Result<Self> {
        if book.messages() != self.messages || book.len() as u64 != self.schedule.n {
            return Err(Error::domain("codebook shape does not match the configuration"));
        }
        self.codebook = Some(book);
        Ok(self)
    }

    /// `log₂ M`.
    pub fn log_m_bits(&self) -> f64 {
        (self.messages as f64).log2()
    }
}

/// Error-event indicators of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Save phase gathered less than `E_0n`.
    pub e0: bool,
    /// Ungated walk fell below `−E_0n`.
    pub e1: bool,
    /// Some message other than 0 passed the threshold.
    pub e2: bool,
    /// Message 0 failed the threshold.
    pub e3: bool,
    /// The unique passing message, if exactly one passed.
    pub decoded: Option<usize>,
    /// `decoded != Some(0)`.
    pub error: bool,
    /// The encoder zeroed at least one symbol.
    pub gated: bool,
}

/// Runs trial `trial_index`: save phase, gated encoding of message 0, channel
/// and threshold decoding.
///
/// A failed save phase does not stop the trial; the encoder then gates on the
/// energy actually gathered.
pub fn run_trial(config: &SimConfig, trial_index: u64, seed: u64) -> TrialOutcome {
    let sched = &config.schedule;
    let n = sched.n as usize;
    let (mut hs, mut cs) = trial_streams(seed, trial_index);
    let mut noise = derive_stream(seed ^ NOISE_SALT, trial_index);

    let gathered: f64 = (0..sched.save_len).map(|_| config.harvest.sample(&mut hs)).sum();
    let e0 = gathered < sched.e0n;
    let harvests: Vec<f64> = (0..n).map(|_| config.harvest.sample(&mut hs)).collect();

    let drawn;
    let book: &Codebook = match &config.codebook {
        Some(b) => b,
        None => {
            drawn = Codebook::draw(config.messages, n, config.params.harvest_mean, &mut cs)
                .expect("shape validated by SimConfig::new");
            &drawn
        }
    };
    let x = book.row(0);
    let energy: Vec<f64> = x.iter().map(|v| v * v).collect();
    let e1 = buffer_walk(&harvests, &energy, sched.e0n)
        .expect("equal lengths")
        .outage;

    let sent = encode_gated(x, &harvests, sched.e0n.min(gathered)).expect("equal lengths");
    let gated = sent.iter().zip(x).any(|(a, b)| a != b);
    let w = awgn_transmit(&sent, config.params.noise_var, &mut noise).expect("validated noise");
    let passing = threshold_decode(&w, book, config.log_m_bits(), sched.eta_n, &config.params)
        .expect("matching lengths");

    let e3 = !passing.contains(&0);
    let e2 = passing.iter().any(|&m| m != 0);
    let decoded = (passing.len() == 1).then(|| passing[0]);
    TrialOutcome {
        e0,
        e1,
        e2,
        e3,
        decoded,
        error: decoded != Some(0),
        gated,
    }
}

/// Aggregated event frequencies with 95% Clopper-Pearson intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub trials: u64,
    pub messages: usize,
    pub e0: BinomialEstimate,
    pub e1: BinomialEstimate,
    pub e2: BinomialEstimate,
    pub e3: BinomialEstimate,
    pub error: BinomialEstimate,
    pub gated: BinomialEstimate,
}

pub fn monte_carlo(config: &SimConfig, trials: u64, seed: u64) -> Result<McResult> {
    monte_carlo_with(config, trials, seed, Exec::default())
}

/// Runs `trials` independent trials. Counts are integers, so any executor
/// gives the same result.
pub fn monte_carlo_with(config: &SimConfig, trials: u64, seed: u64, exec: Exec) -> Result<McResult> {
    if trials < 100 {
        return Err(Error::domain(format!("need at least 100 trials, got {trials}")));
    }
    let counts = exec::map_reduce(
        exec,
        trials,
        |t| {
            let o = run_trial(config, t, seed);
            [o.e0, o.e1, o.e2, o.e3, o.error, o.gated].map(u64::from)
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    let est = |k: u64| BinomialEstimate::new(k, trials);
    Ok(McResult {
        trials,
        messages: config.messages,
        e0: est(counts[0]),
        e1: est(counts[1]),
        e2: est(counts[2]),
        e3: est(counts[3]),
        error: est(counts[4]),
        gated: est(counts[5]),
    })
}

/// Empirical check of the Berry-Esseen envelope for `Σ G_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenCheck {
    pub n: u64,
    pub samples: u64,
    /// `sup_u |F̂(u) − Φ(u)|` for the normalized sum.
    pub sup_distance: f64,
    /// `K/√n`.
    pub envelope: f64,
    /// DKW half-width at 99% confidence.
    pub dkw: f64,
}

impl BerryEsseenCheck {
    pub fn holds(&self) -> bool {
        self.sup_distance <= self.envelope + self.dkw
    }
}

pub fn berry_esseen_check(
    params: &ChannelParams,
    moments: &MomentSet,
    n: u64,
    samples: u64,
    seed: u64,
) -> Result<BerryEsseenCheck> {
    berry_esseen_check_with(params, moments, n, samples, seed, Exec::default())
}

/// Samples `(Σ G_i − n C)/√(n V)` over `n` channel uses, `samples` times, and
/// measures the Kolmogorov distance to `Φ`.
pub fn berry_esseen_check_with(
    params: &ChannelParams,
    moments: &MomentSet,
    n: u64,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<BerryEsseenCheck> {
    params.validate()?;
    if n == 0 || samples < 2 {
        return Err(Error::domain("need n >= 1 and at least 2 samples"));
    }
    let c = eh_capacity(params);
    let v = eh_dispersion(params);
    let scale = (n as f64 * v).sqrt();
    let mut sums = exec::map_collect(exec, samples, |i| {
        let mut s = derive_stream(seed, i);
        let total: f64 = (0..n)
            .map(|_| {
                let x = s.normal(params.harvest_mean);
                let w = x + s.normal(params.noise_var);
                crate::bounds::info_density_nats(params, x, w)
            })
            .sum::<f64>()
            * crate::numerics::LOG2_E;
        (total - n as f64 * c) / scale
    });
    sums.sort_by(f64::total_cmp);
    let m = samples as f64;
    let sup_distance = sums
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let f = std_normal_cdf(u);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max);
    Ok(BerryEsseenCheck {
        n,
        samples,
        sup_distance,
        envelope: moments.k / (n as f64).sqrt(),
        dkw: dkw_epsilon(samples, 0.01),
    })
}
