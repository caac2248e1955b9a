//! Energy-harvest processes, the save phase and the buffer random walk.
//!
//! The buffer evolves as `B_{i+1} = B_i + Y_i − X_i²`. After a save phase that
//! banks `E_0n`, the transmission phase is feasible as long as the walk
//! `S_k = Σ_{l≤k} (Y_l − X_l²)` stays at or above `−E_0n`.

use crate::bounds::ChannelParams;
use crate::exec::{self, Exec};
use crate::numerics::{derive_stream, BinomialEstimate, RngStream};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

/// I.i.d. nonnegative harvest law with mean `mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HarvestModel {
    /// `Y ≡ mean`.
    Constant { mean: f64 },
    /// Exponential with the given mean.
    Exponential { mean: f64 },
    /// Uniform on `[mean − width/2, mean + width/2]`, `0 ≤ width ≤ 2·mean`.
    Uniform { mean: f64, width: f64 },
    /// `mean/p` with probability `p`, else 0.
    BernoulliScaled { mean: f64, p: f64 },
}

impl HarvestModel {
    /// Uniform on `[0, 2·mean]`.
    pub fn uniform(mean: f64) -> Self {
        HarvestModel::Uniform {
            mean,
            width: 2.0 * mean,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            HarvestModel::Constant { mean }
            | HarvestModel::Exponential { mean }
            | HarvestModel::Uniform { mean, .. }
            | HarvestModel::BernoulliScaled { mean, .. } => mean,
        }
    }

    /// Analytic `Var(Y)`.
    pub fn variance(&self) -> f64 {
        match *self {
            HarvestModel::Constant { .. } => 0.0,
            HarvestModel::Exponential { mean } => mean * mean,
            HarvestModel::Uniform { width, .. } => width * width / 12.0,
            HarvestModel::BernoulliScaled { mean, p } => mean * mean * (1.0 - p) / p,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarvestModel::Constant { .. } => "constant",
            HarvestModel::Exponential { .. } => "exponential",
            HarvestModel::Uniform { .. } => "uniform",
            HarvestModel::BernoulliScaled { .. } => "bernoulli_scaled",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mean = self.mean();
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::domain(format!("harvest mean must be positive, got {mean}")));
        }
        match *self {
            HarvestModel::Uniform { width, .. } if !(0.0..=2.0 * mean).contains(&width) => Err(
                Error::domain(format!("uniform width must lie in [0, 2·mean], got {width}")),
            ),
            HarvestModel::BernoulliScaled { p, .. } if !(p > 0.0 && p <= 1.0) => Err(
                Error::domain(format!("Bernoulli probability must lie in (0, 1], got {p}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            HarvestModel::Constant { mean } => mean,
            HarvestModel::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            HarvestModel::Uniform { mean, width } => {
                let u: f64 = rng.random();
                (mean - width / 2.0 + width * u).max(0.0)
            }
            HarvestModel::BernoulliScaled { mean, p } => {
                let u: f64 = rng.random();
                if u < p {
                    mean / p
                } else {
                    0.0
                }
            }
        }
    }
}

/// `count` i.i.d. harvest draws from `stream`.
pub fn sample_harvest(model: &HarvestModel, stream: &mut RngStream, count: usize) -> Vec<f64> {
    (0..count).map(|_| model.sample(stream)).collect()
}

/// Chebyshev bound `min(1, N_n Var(Y)/(N_n E[Y] − E_0n)²)` on a failed save phase.
pub fn chebyshev_bound_e0(save_len: u64, e0n: f64, mean: f64, var_y: f64) -> Result<f64> {
    let expected = save_len as f64 * mean;
    if !(e0n > 0.0 && e0n < expected) {
        return Err(Error::domain(format!(
            "energy target must satisfy 0 < E0n < N_n·E[Y] = {expected}, got {e0n}"
        )));
    }
    let margin = expected - e0n;
    Ok((save_len as f64 * var_y / (margin * margin)).min(1.0))
}

/// Kolmogorov maximal-inequality bound `min(1, n Var(Z)/E_0n²)` on buffer outage.
pub fn kolmogorov_bound_e1(n: u64, e0n: f64, var_z: f64) -> Result<f64> {
    if !(e0n > 0.0) {
        return Err(Error::domain(format!("E0n must be positive, got {e0n}")));
    }
    Ok((n as f64 * var_z / (e0n * e0n)).min(1.0))
}

/// Outcome of the energy-gathering phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavePhase {
    pub gathered: f64,
    pub success: bool,
}

/// Runs `save_len` harvest slots without transmitting.
pub fn simulate_save_phase(
    model: &HarvestModel,
    save_len: u64,
    e0n: f64,
    stream: &mut RngStream,
) -> Result<SavePhase> {
    if save_len == 0 {
        return Err(Error::domain("save phase needs at least one slot"));
    }
    let gathered: f64 = (0..save_len).map(|_| model.sample(stream)).sum();
    Ok(SavePhase {
        gathered,
        success: gathered >= e0n,
    })
}

/// Trajectory summary of `S_k = Σ_{l≤k} (Y_l − x_l²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkResult {
    /// `min_k S_k` over `k = 1..n` (0 for an empty walk).
    pub min_s: f64,
    /// Some `S_k < −E_0n`.
    pub outage: bool,
    /// First `k` (1-based) with `S_k < −E_0n`.
    pub outage_index: Option<usize>,
    pub final_s: f64,
}

/// Walks the buffer increments and reports the first outage below `−e0n`.
pub fn buffer_walk(harvests: &[f64], energy_uses: &[f64], e0n: f64) -> Result<WalkResult> {
    if harvests.len() != energy_uses.len() {
        return Err(Error::domain(format!(
            "harvest and energy sequences differ in length ({} vs {})",
            harvests.len(),
            energy_uses.len()
        )));
    }
    let mut s = 0.0;
    let mut min_s = if harvests.is_empty() { 0.0 } else { f64::INFINITY };
    let mut outage_index = None;
    for (k, (y, e)) in harvests.iter().zip(energy_uses).enumerate() {
        s += y - e;
        min_s = min_s.min(s);
        if outage_index.is_none() && s < -e0n {
            outage_index = Some(k + 1);
        }
    }
    Ok(WalkResult {
        min_s,
        outage: outage_index.is_some(),
        outage_index,
        final_s: s,
    })
}

/// Streams for one trial: harvests on `2t`, codewords on `2t + 1`.
pub(crate) fn trial_streams(seed: u64, trial: u64) -> (RngStream, RngStream) {
    (derive_stream(seed, 2 * trial), derive_stream(seed, 2 * trial + 1))
}

/// Monte Carlo frequency of the outage event on the ungated walk, with
/// codeword energies `X²`, `X ~ N(0, E[Y])`.
pub fn estimate_outage(
    model: &HarvestModel,
    params: &ChannelParams,
    n: usize,
    e0n: f64,
    trials: u64,
    seed: u64,
) -> Result<BinomialEstimate> {
    estimate_outage_with(model, params, n, e0n, trials, seed, Exec::default())
}

pub fn estimate_outage_with(
    model: &HarvestModel,
    params: &ChannelParams,
    n: usize,
    e0n: f64,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<BinomialEstimate> {
    model.validate()?;
    params.validate()?;
    if trials < 100 {
        return Err(Error::domain(format!("need at least 100 trials, got {trials}")));
    }
    let outages = exec::map_reduce(
        exec,
        trials,
        |t| {
            let (mut hs, mut cs) = trial_streams(seed, t);
            let mut s = 0.0;
            for _ in 0..n {
                let x = cs.normal(params.harvest_mean);
                s += model.sample(&mut hs) - x * x;
                if s < -e0n {
                    return 1u64;
                }
            }
            0
        },
        |a, b| a + b,
    );
    Ok(BinomialEstimate::new(outages, trials))
}

/// Monte Carlo frequency of a failed save phase.
pub fn estimate_save_failure(
    model: &HarvestModel,
    save_len: u64,
    e0n: f64,
    trials: u64,
    seed: u64,
) -> Result<BinomialEstimate> {
    model.validate()?;
    if trials < 100 {
        return Err(Error::domain(format!("need at least 100 trials, got {trials}")));
    }
    let failures = exec::map_reduce(
        Exec::default(),
        trials,
        |t| {
            let (mut hs, _) = trial_streams(seed, t);
            match simulate_save_phase(model, save_len, e0n, &mut hs) {
                Ok(sp) if !sp.success => 1u64,
                _ => 0,
            }
        },
        |a, b| a + b,
    );
    Ok(BinomialEstimate::new(failures, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn models(mean: f64) -> Vec<HarvestModel> {
        vec![
            HarvestModel::Constant { mean },
            HarvestModel::Exponential { mean },
            HarvestModel::uniform(mean),
            HarvestModel::Uniform { mean, width: mean },
            HarvestModel::BernoulliScaled { mean, p: 0.5 },
            HarvestModel::BernoulliScaled { mean, p: 0.1 },
        ]
    }

    #[test]
    fn constant_draws() {
        let mut s = derive_stream(1, 0);
        assert_eq!(
            sample_harvest(&HarvestModel::Constant { mean: 2.0 }, &mut s, 5),
            vec![2.0; 5]
        );
    }

    #[test]
    fn bernoulli_support() {
        let m = HarvestModel::BernoulliScaled { mean: 1.0, p: 0.5 };
        let mut s = derive_stream(3, 0);
        let draws = sample_harvest(&m, &mut s, 10_000);
        assert!(draws.iter().all(|&y| y == 0.0 || y == 2.0));
        assert!(draws.contains(&0.0) && draws.contains(&2.0));
    }

    #[test]
    fn sample_moments_match_analytic() {
        let n = 1_000_000;
        for (i, m) in models(1.0).into_iter().enumerate() {
            let mut s = derive_stream(99, i as u64);
            let draws = sample_harvest(&m, &mut s, n);
            assert!(draws.iter().all(|&y| y >= 0.0));
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
            let se = (m.variance() / n as f64).sqrt();
            assert!((mean - 1.0).abs() <= 4.0 * se + 1e-12, "{m:?}: mean {mean}");
            if m.variance() > 0.0 {
                assert!((var / m.variance() - 1.0).abs() < 0.03, "{m:?}: var {var}");
            }
        }
        // Exponential(1) mean within 4·10⁻³ over 10⁶ draws.
        let mut s = derive_stream(5, 5);
        let d = sample_harvest(&HarvestModel::Exponential { mean: 1.0 }, &mut s, n);
        assert!((d.iter().sum::<f64>() / n as f64 - 1.0).abs() < 4e-3);
    }

    #[test]
    fn zero_drift_and_increment_variance() {
        // Z = Y − X² with X ~ N(0, E[Y]): E Z = 0, Var Z = Var Y + 2E[Y]².
        let n = 1_000_000;
        let ey = 1.5;
        for (i, m) in models(ey).into_iter().enumerate() {
            let (mut hs, mut cs) = trial_streams(1234, i as u64);
            let z: Vec<f64> = (0..n)
                .map(|_| {
                    let x = cs.normal(ey);
                    m.sample(&mut hs) - x * x
                })
                .collect();
            let mean = z.iter().sum::<f64>() / n as f64;
            let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let want = m.variance() + 2.0 * ey * ey;
            assert!(mean.abs() < 4.0 * (want / n as f64).sqrt(), "{m:?}: {mean}");
            assert!((var / want - 1.0).abs() < 0.03, "{m:?}: {var} vs {want}");
        }
    }

    #[test]
    fn validation() {
        assert!(HarvestModel::Constant { mean: 0.0 }.validate().is_err());
        assert!(HarvestModel::Uniform { mean: 1.0, width: 2.5 }.validate().is_err());
        assert!(HarvestModel::BernoulliScaled { mean: 1.0, p: 0.0 }.validate().is_err());
        assert!(HarvestModel::BernoulliScaled { mean: 1.0, p: 1.0 }.validate().is_ok());
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_bound_e0(100, 50.0, 1.0, 0.0).unwrap(), 0.0);
        let b = chebyshev_bound_e0(922, 461.0, 1.0, 1.0).unwrap();
        assert!((b - 0.004_338_394_793_926_247).abs() < 1e-15);
        let b2 = chebyshev_bound_e0(1844, 922.0, 1.0, 1.0).unwrap();
        assert!((b2 - b / 2.0).abs() < 1e-15);
        assert_eq!(chebyshev_bound_e0(10, 5.0, 1.0, 100.0).unwrap(), 1.0);
        assert!(chebyshev_bound_e0(10, 10.0, 1.0, 1.0).is_err());
        assert!(chebyshev_bound_e0(10, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn kolmogorov_examples() {
        assert_eq!(kolmogorov_bound_e1(1000, 200.0, 0.0).unwrap(), 0.0);
        assert!((kolmogorov_bound_e1(1000, 200.0, 3.0).unwrap() - 0.075).abs() < 1e-15);
        let b = kolmogorov_bound_e1(1000, 400.0, 3.0).unwrap();
        assert!((b - kolmogorov_bound_e1(1000, 100.0, 3.0).unwrap() / 16.0).abs() < 1e-15);
        assert_eq!(kolmogorov_bound_e1(1000, 50.0, 3.0).unwrap(), 1.0);
        assert!(kolmogorov_bound_e1(1000, 0.0, 3.0).is_err());
    }

    #[test]
    fn save_phase() {
        let m = HarvestModel::Constant { mean: 1.3 };
        let mut s = derive_stream(0, 0);
        let sp = simulate_save_phase(&m, 40, 40.0 * 1.3 / 2.0, &mut s).unwrap();
        assert!(sp.success);
        assert!((sp.gathered - 52.0).abs() < 1e-12);
        assert!(simulate_save_phase(&m, 0, 1.0, &mut s).is_err());

        // Coupled streams: extending the phase never lowers the gathered energy.
        let e = HarvestModel::Exponential { mean: 1.0 };
        let mut prev = 0.0;
        for len in [1, 2, 5, 10, 50] {
            let mut s = derive_stream(8, 3);
            let g = simulate_save_phase(&e, len, 0.1, &mut s).unwrap().gathered;
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn save_failure_rate_below_chebyshev() {
        let m = HarvestModel::Exponential { mean: 1.0 };
        let (len, e0) = (40, 20.0);
        let est = estimate_save_failure(&m, len, e0, 100_000, 17).unwrap();
        let bound = chebyshev_bound_e0(len, e0, 1.0, 1.0).unwrap();
        assert!(est.rate <= bound + 3.0 * est.std_error(), "{est:?} vs {bound}");
    }

    #[test]
    fn walk_examples() {
        let w = buffer_walk(&[1.0, 0.5, 2.0], &[0.0; 3], 0.0).unwrap();
        assert!(w.min_s >= 0.0 && !w.outage && w.outage_index.is_none());
        let e0n = 5.0;
        let w = buffer_walk(&[0.0; 4], &[e0n + 1.0, 0.0, 0.0, 0.0], e0n).unwrap();
        assert!(w.outage);
        assert_eq!(w.outage_index, Some(1));
        // Equality is not an outage.
        let w = buffer_walk(&[0.0], &[e0n], e0n).unwrap();
        assert!(!w.outage);
        assert!(buffer_walk(&[1.0], &[], 1.0).is_err());
        let w = buffer_walk(&[], &[], 1.0).unwrap();
        assert_eq!((w.min_s, w.final_s, w.outage), (0.0, 0.0, false));
    }

    #[test]
    fn outage_rate_below_kolmogorov() {
        let params = ChannelParams::new(1.0, 1.0).unwrap();
        let m = HarvestModel::Constant { mean: 1.0 };
        // Var Z = 2 with constant harvest; use the exponential model for Var Z = 3.
        let e = HarvestModel::Exponential { mean: 1.0 };
        let est = estimate_outage(&e, &params, 1000, 200.0, 10_000, 4).unwrap();
        let bound = kolmogorov_bound_e1(1000, 200.0, 3.0).unwrap();
        assert_eq!(bound, 0.075);
        assert!(est.rate <= bound + 3.0 * est.std_error(), "{est:?}");
        assert!(est.ci_low <= est.rate && est.rate <= est.ci_high);
        let none = estimate_outage(&m, &params, 100, 1e9, 1000, 4).unwrap();
        assert_eq!(none.successes, 0);
        assert!(estimate_outage(&m, &params, 100, 1.0, 99, 4).is_err());
    }

    #[test]
    fn outage_is_executor_independent() {
        let params = ChannelParams::new(1.0, 1.0).unwrap();
        let m = HarvestModel::uniform(1.0);
        let a = estimate_outage_with(&m, &params, 300, 20.0, 2000, 9, Exec::Sequential).unwrap();
        let b = estimate_outage_with(&m, &params, 300, 20.0, 2000, 9, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.successes > 0);
    }

    proptest! {
        #[test]
        fn walk_translation_consistent(
            steps in proptest::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..60),
            e0n in 0.0f64..5.0,
            c in 0.0f64..5.0,
        ) {
            let (ys, xs): (Vec<f64>, Vec<f64>) = steps.into_iter().unzip();
            let base = buffer_walk(&ys, &xs, e0n).unwrap();
            let shifted = buffer_walk(&ys, &xs, e0n + c).unwrap();
            // Raising E0n by c lowers the outage threshold to −E0n − c.
            let first = {
                let mut s = 0.0;
                ys.iter().zip(&xs).position(|(y, x)| { s += y - x; s < -e0n - c }).map(|k| k + 1)
            };
            prop_assert_eq!(shifted.outage_index, first);
            prop_assert_eq!(shifted.min_s, base.min_s);
            prop_assert!(base.min_s <= base.final_s);
            prop_assert_eq!(base.outage, base.min_s < -e0n);
            if shifted.outage { prop_assert!(base.outage); }
        }
    }
}
