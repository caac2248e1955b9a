use super::{check_positive, check_probability, make_schedule, save_length, ChannelParams, MomentSet, Schedule};
use crate::ehmodel::{chebyshev_bound_e0, kolmogorov_bound_e1};
use crate::numerics::{quantile_derivative, std_normal_cdf, std_normal_quantile};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Analytic upper bounds on the four error events, each clipped to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Save phase gathers less than `E_0n` (Chebyshev).
    pub e0: f64,
    /// Buffer walk dips below `−E_0n` (Kolmogorov).
    pub e1: f64,
    /// Some wrong codeword passes the threshold, `2^{−nη_n}`.
    pub e2: f64,
    /// The sent codeword fails the threshold (Berry-Esseen).
    pub e3: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.e0 + self.e1 + self.e2 + self.e3
    }
}

/// Four-term union bound on the error probability when `log_m_bits` bits are
/// sent with schedule `sched`.
pub fn error_budget(
    log_m_bits: f64,
    sched: &Schedule,
    moments: &MomentSet,
    var_y: f64,
    params: &ChannelParams,
) -> Result<ErrorBudget> {
    let nf = sched.n as f64;
    let e0 = chebyshev_bound_e0(sched.save_len, sched.e0n, params.harvest_mean, var_y)?;
    let e1 = kolmogorov_bound_e1(sched.n, sched.e0n, moments.var_z)?;
    let e2 = (-nf * sched.eta_n).exp2().min(1.0);
    let u = (log_m_bits + nf * (sched.eta_n - moments.mean_bits)) / (nf * moments.var_bits2).sqrt();
    let e3 = (std_normal_cdf(u) + moments.k / nf.sqrt()).min(1.0);
    Ok(ErrorBudget { e0, e1, e2, e3 })
}

/// Error budget left for the threshold test,
/// `ε − N_n Var(Y)/(N_n E[Y] − E_0n)² − n Var(Z)/E_0n² − 2^{−nη_n} − K/√n`.
///
/// Nonpositive values mean the schedule cannot meet `eps` at this `n`.
pub fn epsilon_n(
    eps: f64,
    sched: &Schedule,
    moments: &MomentSet,
    var_y: f64,
    params: &ChannelParams,
) -> f64 {
    let nf = sched.n as f64;
    let save = sched.save_len as f64;
    let margin = save * params.harvest_mean - sched.e0n;
    eps - save * var_y / (margin * margin)
        - nf * moments.var_z / (sched.e0n * sched.e0n)
        - (-nf * sched.eta_n).exp2()
        - moments.k / nf.sqrt()
}

/// Additive pieces of a bound in bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    pub capacity_term: f64,
    pub dispersion_term: f64,
    pub slack_term: f64,
    pub save_penalty: f64,
    pub taylor_term: f64,
    pub log_term: f64,
}

impl BoundTerms {
    pub const LABELS: [&'static str; 6] = [
        "capacity_term",
        "dispersion_term",
        "slack_term",
        "save_penalty",
        "taylor_term",
        "log_term",
    ];

    pub fn values(&self) -> [f64; 6] {
        [
            self.capacity_term,
            self.dispersion_term,
            self.slack_term,
            self.save_penalty,
            self.taylor_term,
            self.log_term,
        ]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> {
        Self::LABELS.into_iter().zip(self.values())
    }

    pub fn sum(&self) -> f64 {
        self.values().iter().sum()
    }
}

/// Data behind the Taylor correction of the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorSlope {
    /// Smallest scanned transmission length with `ε_n > 0`.
    pub n0: u64,
    pub eps_n0: f64,
    /// `max{(Φ⁻¹)'(ε_{n₀}), (Φ⁻¹)'(ε)}`.
    pub f_hat: f64,
    /// `4·√V·Var(Z)·f̂ / E[Y]²` in bits.
    pub c_hat: f64,
}

/// A lower bound on `log₂ M*` with its term breakdown.
///
/// `log_m_bits` is present iff `feasible`, i.e. iff `epsilon_n > 0`, and then
/// equals `terms.sum()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Transmission length.
    pub n: u64,
    /// Total blocklength including the save phase.
    pub n_hat: u64,
    pub eps: f64,
    pub a: f64,
    pub epsilon_n: f64,
    pub feasible: bool,
    pub log_m_bits: Option<f64>,
    /// Evaluated pieces. Always set for the closed form; unset for an
    /// infeasible exact bound.
    pub terms: Option<BoundTerms>,
    /// Closed form with the `√(n̂V)` dispersion coefficient, valid for `ε < 1/2`.
    pub sharp_log_m_bits: Option<f64>,
    pub taylor: Option<TaylorSlope>,
}

impl BoundReport {
    /// Sum of the evaluated terms regardless of feasibility.
    pub fn expression_bits(&self) -> Option<f64> {
        self.terms.map(|t| t.sum())
    }

    /// `log_m_bits / n_hat`.
    pub fn rate_bits_per_use(&self) -> Option<f64> {
        self.log_m_bits.map(|l| l / self.n_hat as f64)
    }
}

/// Exact computable bound `n C + √(nV) Φ⁻¹(ε_n) − n η_n − 1` for blocklength
/// `n + N_n`. The `−1` is reported as `log_term`.
pub fn achievable_log_m(
    eps: f64,
    sched: &Schedule,
    moments: &MomentSet,
    var_y: f64,
    params: &ChannelParams,
) -> Result<BoundReport> {
    check_probability("eps", eps)?;
    let en = epsilon_n(eps, sched, moments, var_y, params);
    let feasible = en > 0.0;
    let nf = sched.n as f64;
    let terms = if feasible {
        Some(BoundTerms {
            capacity_term: nf * moments.mean_bits,
            dispersion_term: (nf * moments.var_bits2).sqrt() * std_normal_quantile(en)?,
            slack_term: -nf * sched.eta_n,
            log_term: -1.0,
            ..BoundTerms::default()
        })
    } else {
        None
    };
    Ok(BoundReport {
        n: sched.n,
        n_hat: sched.n_hat(),
        eps,
        a: sched.a,
        epsilon_n: en,
        feasible,
        log_m_bits: terms.map(|t| t.sum()),
        terms,
        sharp_log_m_bits: None,
        taylor: None,
    })
}

/// Largest transmission length `n ≥ 2` with `n + ⌈√n (ln n)^a⌉ ≤ n_hat`,
/// together with its save length.
pub fn split_blocklength(n_hat: u64, a: f64) -> Option<(u64, u64)> {
    let total = |n: u64| n + save_length(n, a);
    if n_hat < 2 || total(2) > n_hat {
        return None;
    }
    let (mut lo, mut hi) = (2u64, n_hat);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if total(mid) <= n_hat {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Some((lo, save_length(lo, a)))
}

/// Options for [`theorem1_closed_form_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormOptions {
    /// Transmission lengths scanned for `n₀`. The evaluated `n` is always added.
    pub ladder: Vec<u64>,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        ClosedFormOptions {
            ladder: (1..=12).map(|k| 10u64.pow(k)).collect(),
        }
    }
}

/// Finds `n₀` (the smallest `n` in `ladder` with `ε_n > 0`) and the slope
/// bound `f̂` used by the Taylor step of the closed form.
pub fn taylor_slope_bound(
    eps: f64,
    a: f64,
    moments: &MomentSet,
    var_y: f64,
    params: &ChannelParams,
    ladder: &[u64],
) -> Result<TaylorSlope> {
    check_probability("eps", eps)?;
    let mut ns: Vec<u64> = ladder.iter().copied().filter(|&n| n >= 2).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let sched = make_schedule(n, a, params)?;
        let en = epsilon_n(eps, &sched, moments, var_y, params);
        if en > 0.0 {
            let f_hat = quantile_derivative(en)?.max(quantile_derivative(eps)?);
            let c_hat = 4.0 * moments.var_bits2.sqrt() * moments.var_z * f_hat
                / (params.harvest_mean * params.harvest_mean);
            return Ok(TaylorSlope {
                n0: n,
                eps_n0: en,
                f_hat,
                c_hat,
            });
        }
    }
    Err(Error::Regime(format!(
        "no scanned blocklength has a positive error budget for eps = {eps}, a = {a}"
    )))
}

/// Closed asymptotic form of the bound at total blocklength `n_hat`, with the
/// default `n₀` ladder.
pub fn theorem1_closed_form(
    n_hat: u64,
    eps: f64,
    a: f64,
    moments: &MomentSet,
    var_y: f64,
    params: &ChannelParams,
) -> Result<BoundReport> {
    theorem1_closed_form_with(n_hat, eps, a, moments, var_y, params, &ClosedFormOptions::default())
}

/// `n̂C − √n̂(ln n̂)^a C + √(n̂V/2) Φ⁻¹(ε) − √n̂ Ĉ/(ln(n̂/2))^{2a} − log₂ n̂`,
/// up to an additive constant.
///
/// The `√(V/2)` dispersion coefficient is used for every `ε`; for `ε < 1/2`
/// the variant with `√V` is reported in `sharp_log_m_bits`. Feasibility is
/// that of the exact bound at the transmission length `n` with
/// `n + N_n ≤ n̂`; the terms are evaluated either way.
pub fn theorem1_closed_form_with(
    n_hat: u64,
    eps: f64,
    a: f64,
    moments: &MomentSet,
    var_y: f64,
    params: &ChannelParams,
    opts: &ClosedFormOptions,
) -> Result<BoundReport> {
    check_probability("eps", eps)?;
    check_positive("a", a)?;
    let (n, save_len) = split_blocklength(n_hat, a).ok_or_else(|| {
        Error::Regime(format!("n_hat = {n_hat} is too short for any save phase"))
    })?;
    if 2 * save_len >= n_hat {
        return Err(Error::Regime(format!(
            "save phase {save_len} is at least half of n_hat = {n_hat}"
        )));
    }
    let sched = make_schedule(n, a, params)?;
    let en = epsilon_n(eps, &sched, moments, var_y, params);
    let mut ladder = opts.ladder.clone();
    ladder.push(n);
    let taylor = taylor_slope_bound(eps, a, moments, var_y, params, &ladder)?;

    let nh = n_hat as f64;
    let c = moments.mean_bits;
    let q = std_normal_quantile(eps)?;
    let terms = BoundTerms {
        capacity_term: nh * c,
        save_penalty: -nh.sqrt() * nh.ln().powf(a) * c,
        dispersion_term: (nh * moments.var_bits2 / 2.0).sqrt() * q,
        taylor_term: -nh.sqrt() * taylor.c_hat / (nh / 2.0).ln().powf(2.0 * a),
        log_term: -nh.log2(),
        slack_term: 0.0,
    };
    let feasible = en > 0.0;
    let sharp = (feasible && eps < 0.5).then(|| {
        terms.sum() - terms.dispersion_term + (nh * moments.var_bits2).sqrt() * q
    });
    Ok(BoundReport {
        n,
        n_hat,
        eps,
        a,
        epsilon_n: en,
        feasible,
        log_m_bits: feasible.then(|| terms.sum()),
        terms: Some(terms),
        sharp_log_m_bits: sharp,
        taylor: Some(taylor),
    })
}
