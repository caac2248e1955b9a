use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

/// Event count with its point estimate and a two-sided exact interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BinomialEstimate {
    /// Clopper-Pearson estimate at 95% confidence.
    pub fn new(successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(successes, trials, 0.05);
        BinomialEstimate {
            successes,
            trials,
            rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }

    /// Plug-in binomial standard error `√(p(1−p)/n)`.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.rate * (1.0 - self.rate) / self.trials as f64).sqrt()
    }
}

// Inverse of the regularized incomplete beta function by bisection.
fn beta_quantile(q: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clopper-Pearson interval for `k` successes out of `n` at level `1 − alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (kf, nf) = (k as f64, n as f64);
    let low = if k == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, kf, nf - kf + 1.0)
    };
    let high = if k == n {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, kf + 1.0, nf - kf)
    };
    (low, high)
}

/// Dvoretzky-Kiefer-Wolfowitz half-width: with probability `1 − alpha` the
/// empirical CDF of `n` samples stays within this sup-distance of the truth.
pub fn dkw_epsilon(n: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}
