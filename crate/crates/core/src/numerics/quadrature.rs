use crate::{Error, Result};

/// Default Gauss-Hermite order for moment integrals.
pub const DEFAULT_ORDER: usize = 64;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Gauss-Hermite rule for the weight `e^{-x²}` (physicists' convention).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the `order`-point rule by Newton iteration on the orthonormal
    /// Hermite recurrence.
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::domain(format!(
                "Gauss-Hermite order must be at least 2, got {order}"
            )));
        }
        let n = order;
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let mut z = 0.0_f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.166_67),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let (mut p1, mut p2) = (pim4, 0.0);
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NumericInconsistency(format!(
                    "Gauss-Hermite node {i} of order {n} did not converge"
                )));
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        // Ascending order.
        nodes.reverse();
        weights.reverse();
        Ok(QuadratureRule {
            order,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(X)]` for `X ~ N(mean, variance)`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F, mean: f64, variance: f64) -> f64 {
        let scale = (2.0 * variance).sqrt();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mean + scale * x))
            .sum::<f64>()
            / SQRT_PI
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LegendreRule {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::domain(format!(
                "Gauss-Legendre order must be at least 2, got {order}"
            )));
        }
        let n = order;
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-16 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NumericInconsistency(format!(
                    "Gauss-Legendre node {i} of order {n} did not converge"
                )));
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(LegendreRule { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_lo^hi f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, lo: f64, hi: f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// `E[f(X)]` for `X ~ N(mean, variance)` by an `order`-point Gauss-Hermite rule.
///
/// Exact for polynomials of degree up to `2·order − 1`.
pub fn gauss_hermite_expect<F: FnMut(f64) -> f64>(
    f: F,
    mean: f64,
    variance: f64,
    order: usize,
) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::domain(format!(
            "variance must be positive, got {variance}"
        )));
    }
    Ok(QuadratureRule::gauss_hermite(order)?.expect(f, mean, variance))
}
