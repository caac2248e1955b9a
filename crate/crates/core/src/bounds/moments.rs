//! Moments of the per-letter information density
//! `G = log( N(w; x, σ²) / N(w; 0, E[Y]+σ²) )` with `x ~ N(0, E[Y])` and
//! `w = x + z`, `z ~ N(0, σ²)`.

use super::ChannelParams;
use crate::exec::{self, Exec};
use crate::numerics::{
    derive_stream, LegendreRule, QuadratureRule, DEFAULT_ORDER, LOG2_E,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Mean, variance and centered absolute third moment of `G` (bits), the
/// Berry-Esseen coefficient `K` and the variance of the walk increment `Z = Y − X²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean_bits: f64,
    pub var_bits2: f64,
    pub abs3_bits3: f64,
    /// `E|G − E G|³ / (2·Var(G)^{3/2})`.
    pub k: f64,
    /// `Var(Y) + 2E[Y]²`.
    pub var_z: f64,
}

impl MomentSet {
    pub fn from_parts(mean_bits: f64, var_bits2: f64, abs3_bits3: f64, var_z: f64) -> Self {
        let k = if var_bits2 > 0.0 {
            abs3_bits3 / (2.0 * var_bits2.powf(1.5))
        } else {
            0.0
        };
        MomentSet {
            mean_bits,
            var_bits2,
            abs3_bits3,
            k,
            var_z,
        }
    }
}

/// How [`info_density_moments`] evaluates the expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentMethod {
    /// Gauss-Hermite quadrature of the given order, checked against twice the order.
    Quadrature { order: usize },
    /// Plain Monte Carlo, cross-checked against quadrature.
    MonteCarlo { trials: u64, seed: u64 },
}

impl Default for MomentMethod {
    fn default() -> Self {
        MomentMethod::Quadrature {
            order: DEFAULT_ORDER,
        }
    }
}

/// Monte Carlo moment estimates with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMoments {
    pub set: MomentSet,
    pub trials: u64,
    pub se_mean: f64,
    pub se_var: f64,
    pub se_abs3: f64,
}

/// Per-letter information density in nats.
pub fn info_density_nats(params: &ChannelParams, x: f64, w: f64) -> f64 {
    let s = params.output_var();
    let z = w - x;
    0.5 * (s / params.noise_var).ln() + w * w / (2.0 * s) - z * z / (2.0 * params.noise_var)
}

fn var_z(params: &ChannelParams, var_y: f64) -> Result<f64> {
    if !(var_y >= 0.0) || !var_y.is_finite() {
        return Err(Error::domain(format!(
            "harvest variance must be finite and nonnegative, got {var_y}"
        )));
    }
    Ok(var_y + 2.0 * params.harvest_mean * params.harvest_mean)
}

/// Evaluates the moments of `G` with the requested method.
///
/// `var_y` is the harvest variance, used only for [`MomentSet::var_z`].
pub fn info_density_moments(
    params: &ChannelParams,
    var_y: f64,
    method: MomentMethod,
) -> Result<MomentSet> {
    params.validate()?;
    match method {
        MomentMethod::Quadrature { order } => quadrature_moments(params, var_y, order),
        MomentMethod::MonteCarlo { trials, seed } => {
            let mc = mc_moments(params, var_y, trials, seed)?;
            let q = quadrature_moments(params, var_y, DEFAULT_ORDER)?;
            let checks = [
                ("mean", mc.set.mean_bits, q.mean_bits, mc.se_mean),
                ("variance", mc.set.var_bits2, q.var_bits2, mc.se_var),
                ("abs third moment", mc.set.abs3_bits3, q.abs3_bits3, mc.se_abs3),
            ];
            for (name, m, qv, se) in checks {
                if (m - qv).abs() > 5.0 * se {
                    return Err(Error::NumericInconsistency(format!(
                        "{name}: Monte Carlo {m} vs quadrature {qv} differ by more than 5 standard errors ({se})"
                    )));
                }
            }
            Ok(mc.set)
        }
    }
}

struct NatMoments {
    mean: f64,
    var: f64,
    abs3: f64,
}

// E[R⁶] for R² ~ χ²₂.
const CHI2_2_SIXTH: f64 = 48.0;

fn quadrature_nats(
    params: &ChannelParams,
    rule: &QuadratureRule,
    arc_rule: &LegendreRule,
) -> Result<NatMoments> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let p = params.harvest_mean;
    let nv = params.noise_var;
    let g = |x: f64, z: f64| info_density_nats(params, x, x + z);
    let mean = rule.expect(|x| rule.expect(|z| g(x, z), 0.0, nv), 0.0, p);
    let var = rule.expect(|x| rule.expect(|z| (g(x, z) - mean).powi(2), 0.0, nv), 0.0, p);

    // In standardized coordinates (u, t) = (x/√E[Y], z/σ), G − E G is a
    // quadratic form, so on polar coordinates it factors as r²·h(θ) and
    // E|G − E G|³ = E[r⁶]·E|h(Θ)|³ with Θ uniform. h has period π and the
    // shape α + β cos 2θ + γ sin 2θ; its zeros split [0, π) into arcs on
    // which |h|³ is smooth.
    let q = |u: f64, t: f64| g(p.sqrt() * u, nv.sqrt() * t) - mean;
    let offset = q(0.0, 0.0);
    if offset.abs() > 1e-10 * var.sqrt().max(1e-300) {
        return Err(Error::NumericInconsistency(format!(
            "information density is not centred by its mean (offset {offset})"
        )));
    }
    let h = |th: f64| q(th.cos(), th.sin()) - offset;
    let (h0, h4, h2) = (h(0.0), h(FRAC_PI_4), h(FRAC_PI_2));
    let alpha = 0.5 * (h0 + h2);
    let beta = 0.5 * (h0 - h2);
    let gamma = h4 - alpha;
    let rho = beta.hypot(gamma);
    let mut breaks = vec![0.0];
    if rho > alpha.abs() {
        let phi = gamma.atan2(beta);
        let delta = (-alpha / rho).acos();
        for r in [0.5 * (phi + delta), 0.5 * (phi - delta)] {
            breaks.push(r.rem_euclid(PI));
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.push(PI);
    let abs_h3 = |th: f64| h(th).abs().powi(3);
    let angular: f64 = breaks
        .windows(2)
        .map(|w| arc_rule.integrate(abs_h3, w[0], w[1]))
        .sum::<f64>()
        / PI;
    Ok(NatMoments {
        mean,
        var,
        abs3: CHI2_2_SIXTH * angular,
    })
}

/// Moments by Gauss-Hermite quadrature.
///
/// Mean and variance are polynomial in the two Gaussian inputs and come out
/// exact. The absolute third moment is reduced to an angular integral that is
/// evaluated by Gauss-Legendre on the arcs between sign changes. The result is recomputed at twice the
/// order and rejected if the two disagree by more than 1e-9 relative.
pub fn quadrature_moments(params: &ChannelParams, var_y: f64, order: usize) -> Result<MomentSet> {
    params.validate()?;
    let var_z = var_z(params, var_y)?;
    let base = quadrature_nats(
        params,
        &QuadratureRule::gauss_hermite(order)?,
        &LegendreRule::new(order)?,
    )?;
    let check = quadrature_nats(
        params,
        &QuadratureRule::gauss_hermite(2 * order)?,
        &LegendreRule::new(2 * order)?,
    )?;
    for (name, a, b) in [
        ("mean", base.mean, check.mean),
        ("variance", base.var, check.var),
        ("abs third moment", base.abs3, check.abs3),
    ] {
        let scale = a.abs().max(b.abs()).max(1e-300);
        if (a - b).abs() > 1e-9 * scale {
            return Err(Error::NumericInconsistency(format!(
                "{name}: order {order} gives {a}, order {} gives {b}",
                2 * order
            )));
        }
    }
    Ok(MomentSet::from_parts(
        base.mean * LOG2_E,
        base.var * LOG2_E * LOG2_E,
        base.abs3 * LOG2_E.powi(3),
        var_z,
    ))
}

const MC_CHUNK: u64 = 1 << 16;

/// Moments by Monte Carlo on the default executor.
pub fn mc_moments(params: &ChannelParams, var_y: f64, trials: u64, seed: u64) -> Result<McMoments> {
    mc_moments_with(params, var_y, trials, seed, Exec::default())
}

/// Moments by Monte Carlo. Chunk `c` of `2¹⁶` samples draws from
/// `derive_stream(seed, c)`, so the result does not depend on `exec`.
pub fn mc_moments_with(
    params: &ChannelParams,
    var_y: f64,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<McMoments> {
    params.validate()?;
    let var_z = var_z(params, var_y)?;
    if trials < 2 {
        return Err(Error::domain("Monte Carlo moments need at least 2 trials"));
    }
    let chunks = trials.div_ceil(MC_CHUNK);
    let samples = |c: u64| {
        let len = MC_CHUNK.min(trials - c * MC_CHUNK);
        let mut rng = derive_stream(seed, c);
        (0..len).map(move |_| {
            let x = rng.normal(params.harvest_mean);
            let z = rng.normal(params.noise_var);
            info_density_nats(params, x, x + z) * LOG2_E
        })
    };
    let n = trials as f64;
    let mean = exec::map_collect(exec, chunks, |c| samples(c).sum::<f64>())
        .into_iter()
        .sum::<f64>()
        / n;
    let sums = exec::map_collect(exec, chunks, |c| {
        samples(c).fold([0.0; 4], |mut acc, g| {
            let d = g - mean;
            let d2 = d * d;
            acc[0] += d2;
            acc[1] += d2 * d2;
            acc[2] += d2 * d.abs();
            acc[3] += d2 * d2 * d2;
            acc
        })
    });
    let mut tot = [0.0; 4];
    for s in sums {
        for (t, v) in tot.iter_mut().zip(s) {
            *t += v;
        }
    }
    let [m2, m4, m3, m6] = tot.map(|t| t / n);
    Ok(McMoments {
        set: MomentSet::from_parts(mean, m2, m3, var_z),
        trials,
        se_mean: (m2 / n).sqrt(),
        se_var: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
        se_abs3: ((m6 - m3 * m3).max(0.0) / n).sqrt(),
    })
}
