//! Closed-form capacities and dispersions, the save-phase schedule, the error
//! budget `ε_n`, the computable achievable `log M` and the closed asymptotic
//! form of the achievability bound.
//!
//! Every information quantity is in bits; variances of the information density
//! are in bits². The `O(1)` and `O(log n)` residuals of the asymptotic
//! expansions are dropped wherever they appear.

mod achievable;
mod moments;
mod schedule;

pub use achievable::{
    achievable_log_m, epsilon_n, error_budget, split_blocklength, taylor_slope_bound,
    theorem1_closed_form, theorem1_closed_form_with, BoundReport, BoundTerms, ClosedFormOptions,
    ErrorBudget, TaylorSlope,
};
pub use moments::{
    info_density_moments, info_density_nats, mc_moments, mc_moments_with, quadrature_moments,
    McMoments, MomentMethod, MomentSet,
};
pub use schedule::{make_schedule, save_length, Schedule};

use crate::numerics::{std_normal_quantile, LOG2_E};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Noise variance `σ²` and mean harvested energy per slot `E[Y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub noise_var: f64,
    pub harvest_mean: f64,
}

impl ChannelParams {
    pub fn new(noise_var: f64, harvest_mean: f64) -> Result<Self> {
        let p = ChannelParams {
            noise_var,
            harvest_mean,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("noise_var", self.noise_var)?;
        check_positive("harvest_mean", self.harvest_mean)
    }

    /// `E[Y]/σ²`.
    pub fn snr(&self) -> f64 {
        self.harvest_mean / self.noise_var
    }

    /// Variance of the capacity-achieving output law, `E[Y] + σ²`.
    pub fn output_var(&self) -> f64 {
        self.harvest_mean + self.noise_var
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

pub(crate) fn check_probability(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// AWGN capacity `½ log₂(1 + P/σ²)` in bits per channel use.
pub fn awgn_capacity(power: f64, noise_var: f64) -> Result<f64> {
    check_positive("power", power)?;
    check_positive("noise_var", noise_var)?;
    Ok(0.5 * (power / noise_var).ln_1p() * LOG2_E)
}

/// AWGN dispersion `P(P+2σ²)/(2(P+σ²)²)·(log₂ e)²` in bits² per use.
pub fn awgn_dispersion(power: f64, noise_var: f64) -> Result<f64> {
    check_positive("power", power)?;
    check_positive("noise_var", noise_var)?;
    let s = power + noise_var;
    Ok(power * (power + 2.0 * noise_var) / (2.0 * s * s) * LOG2_E * LOG2_E)
}

/// Normal approximation `n·C + √(n·V)·Φ⁻¹(ε)` of the AWGN maximal code size,
/// without the `O(log n)` remainder.
pub fn normal_approx_log_m(n: u64, eps: f64, power: f64, noise_var: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("blocklength must be at least 1"));
    }
    check_probability("eps", eps)?;
    let nf = n as f64;
    Ok(nf * awgn_capacity(power, noise_var)?
        + (nf * awgn_dispersion(power, noise_var)?).sqrt() * std_normal_quantile(eps)?)
}

/// Capacity of the energy-harvesting channel, `½ log₂(1 + E[Y]/σ²)`.
pub fn eh_capacity(params: &ChannelParams) -> f64 {
    0.5 * params.snr().ln_1p() * LOG2_E
}

/// Variance of the per-letter information density under the Gaussian
/// codebook, `E[Y]/(E[Y]+σ²)` nats² converted to bits².
pub fn eh_dispersion(params: &ChannelParams) -> f64 {
    params.harvest_mean / params.output_var() * LOG2_E * LOG2_E
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const V11: f64 = 0.780_513_367_877_102_9; // (3/8)(log₂e)², mpmath

    #[test]
    fn capacity_examples() {
        assert_eq!(awgn_capacity(1.0, 1.0).unwrap(), 0.5);
        assert!((awgn_capacity(3.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((awgn_capacity(6.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((awgn_capacity(15.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(awgn_capacity(0.0, 1.0).is_err());
        assert!(awgn_capacity(1.0, -1.0).is_err());
    }

    #[test]
    fn dispersion_examples() {
        assert!((awgn_dispersion(1.0, 1.0).unwrap() - V11).abs() < 1e-12);
        let hi = awgn_dispersion(1e12, 1.0).unwrap();
        assert!((hi - 0.5 * LOG2_E * LOG2_E).abs() < 1e-9);
        assert!(awgn_dispersion(1e-12, 1.0).unwrap() < 1e-11);
        assert!(awgn_dispersion(-1.0, 1.0).is_err());
    }

    #[test]
    fn normal_approx_examples() {
        assert!((normal_approx_log_m(777, 0.5, 2.0, 1.0).unwrap()
            - 777.0 * awgn_capacity(2.0, 1.0).unwrap())
        .abs()
            < 1e-9);
        // n = 1000, P = σ² = 1, ε = 0.025: 500 + √(1000·V)·Φ⁻¹(0.025), mpmath.
        let v = normal_approx_log_m(1000, 0.025, 1.0, 1.0).unwrap();
        assert!((v - 445.243_174_291_224_9).abs() < 1e-9, "{v}");
        let lo = normal_approx_log_m(1000, 0.01, 1.0, 1.0).unwrap();
        assert!(lo < v);
        assert!(normal_approx_log_m(0, 0.1, 1.0, 1.0).is_err());
        assert!(normal_approx_log_m(10, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn eh_examples() {
        let p = ChannelParams::new(1.0, 1.0).unwrap();
        assert_eq!(eh_capacity(&p), 0.5);
        assert!((eh_capacity(&ChannelParams::new(1.0, 3.0).unwrap()) - 1.0).abs() < 1e-15);
        assert!((eh_dispersion(&p) - 0.5 * LOG2_E * LOG2_E).abs() < 1e-15);
        assert!((eh_dispersion(&p) - 1.040_684_490_502_803_9).abs() < 1e-12);
        assert!(eh_dispersion(&ChannelParams::new(1.0, 1e-12).unwrap()) < 1e-11);
        let big = eh_dispersion(&ChannelParams::new(1.0, 1e12).unwrap());
        assert!((big - LOG2_E * LOG2_E).abs() < 1e-9);
        assert!(ChannelParams::new(0.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn eh_capacity_is_awgn_capacity(nv in 1e-3f64..1e3, ey in 1e-3f64..1e3) {
            let p = ChannelParams::new(nv, ey).unwrap();
            prop_assert_eq!(eh_capacity(&p), awgn_capacity(ey, nv).unwrap());
        }
    }
}
