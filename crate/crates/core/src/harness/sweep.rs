use super::config::ExperimentConfig;
use crate::bounds::{
    achievable_log_m, eh_capacity, eh_dispersion, error_budget, make_schedule,
    normal_approx_log_m, quadrature_moments, split_blocklength, theorem1_closed_form, mc_moments,
    McMoments, MomentSet,
};
use crate::codec::{monte_carlo_with, SimConfig};
use crate::ehmodel::HarvestModel;
use crate::exec::{self, Exec};
use crate::numerics::BinomialEstimate;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// One grid point: inputs and every computed output, flat.
///
/// Missing values are `None` (empty CSV cell, JSON `null`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: u64,
    pub n_hat: u64,
    pub save_len: u64,
    pub e0n: Option<f64>,
    pub eta_n: Option<f64>,
    pub eps: f64,
    pub a: f64,
    pub noise_var: f64,
    pub harvest_mean: f64,
    pub harvest_kind: String,
    pub harvest_var: f64,
    pub var_z: f64,
    pub capacity_bits: f64,
    pub dispersion_bits2: f64,
    pub k: f64,
    pub feasible: bool,
    pub epsilon_n: Option<f64>,
    pub log_m_bits: Option<f64>,
    pub rate_bits_per_use: Option<f64>,
    pub capacity_term: Option<f64>,
    pub dispersion_term: Option<f64>,
    pub slack_term: Option<f64>,
    pub save_penalty: Option<f64>,
    pub taylor_term: Option<f64>,
    pub log_term: Option<f64>,
    /// Closed-form expression, evaluated even where infeasible.
    pub closed_form_bits: Option<f64>,
    pub closed_form_sharp_bits: Option<f64>,
    /// `(C − closed_form_bits/n̂)·√n̂/(ln n̂)^a`.
    pub backoff_ratio: Option<f64>,
    pub n0: Option<u64>,
    pub f_hat: Option<f64>,
    pub normal_approx_bits: Option<f64>,
    pub budget_log_m_bits: Option<f64>,
    pub bound_e0: Option<f64>,
    pub bound_e1: Option<f64>,
    pub bound_e2: Option<f64>,
    pub bound_e3: Option<f64>,
    pub bound_total: Option<f64>,
    pub mc_seed: Option<u64>,
    pub mc_trials: Option<u64>,
    pub mc_messages: Option<u64>,
    pub rate_e0: Option<f64>,
    pub ci_low_e0: Option<f64>,
    pub ci_high_e0: Option<f64>,
    pub rate_e1: Option<f64>,
    pub ci_low_e1: Option<f64>,
    pub ci_high_e1: Option<f64>,
    pub rate_e2: Option<f64>,
    pub ci_low_e2: Option<f64>,
    pub ci_high_e2: Option<f64>,
    pub rate_e3: Option<f64>,
    pub ci_low_e3: Option<f64>,
    pub ci_high_e3: Option<f64>,
    pub rate_error: Option<f64>,
    pub ci_low_error: Option<f64>,
    pub ci_high_error: Option<f64>,
    /// First per-row failure, if any.
    pub error: Option<String>,
}

/// A typed cell used for CSV and plot output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Cell<'a> {
    Int(Option<u64>),
    Float(Option<f64>),
    Bool(bool),
    Text(Option<&'a str>),
}

impl ResultRow {
    /// Column names in output order.
    pub fn columns() -> Vec<&'static str> {
        ResultRow::default().cells().into_iter().map(|(k, _)| k).collect()
    }

    pub(crate) fn cells(&self) -> Vec<(&'static str, Cell<'_>)> {
        use Cell::*;
        vec![
            ("n", Int(Some(self.n))),
            ("n_hat", Int(Some(self.n_hat))),
            ("save_len", Int(Some(self.save_len))),
            ("e0n", Float(self.e0n)),
            ("eta_n", Float(self.eta_n)),
            ("eps", Float(Some(self.eps))),
            ("a", Float(Some(self.a))),
            ("noise_var", Float(Some(self.noise_var))),
            ("harvest_mean", Float(Some(self.harvest_mean))),
            ("harvest_kind", Text(Some(&self.harvest_kind))),
            ("harvest_var", Float(Some(self.harvest_var))),
            ("var_z", Float(Some(self.var_z))),
            ("capacity_bits", Float(Some(self.capacity_bits))),
            ("dispersion_bits2", Float(Some(self.dispersion_bits2))),
            ("k", Float(Some(self.k))),
            ("feasible", Bool(self.feasible)),
            ("epsilon_n", Float(self.epsilon_n)),
            ("log_m_bits", Float(self.log_m_bits)),
            ("rate_bits_per_use", Float(self.rate_bits_per_use)),
            ("capacity_term", Float(self.capacity_term)),
            ("dispersion_term", Float(self.dispersion_term)),
            ("slack_term", Float(self.slack_term)),
            ("save_penalty", Float(self.save_penalty)),
            ("taylor_term", Float(self.taylor_term)),
            ("log_term", Float(self.log_term)),
            ("closed_form_bits", Float(self.closed_form_bits)),
            ("closed_form_sharp_bits", Float(self.closed_form_sharp_bits)),
            ("backoff_ratio", Float(self.backoff_ratio)),
            ("n0", Int(self.n0)),
            ("f_hat", Float(self.f_hat)),
            ("normal_approx_bits", Float(self.normal_approx_bits)),
            ("budget_log_m_bits", Float(self.budget_log_m_bits)),
            ("bound_e0", Float(self.bound_e0)),
            ("bound_e1", Float(self.bound_e1)),
            ("bound_e2", Float(self.bound_e2)),
            ("bound_e3", Float(self.bound_e3)),
            ("bound_total", Float(self.bound_total)),
            ("mc_seed", Int(self.mc_seed)),
            ("mc_trials", Int(self.mc_trials)),
            ("mc_messages", Int(self.mc_messages)),
            ("rate_e0", Float(self.rate_e0)),
            ("ci_low_e0", Float(self.ci_low_e0)),
            ("ci_high_e0", Float(self.ci_high_e0)),
            ("rate_e1", Float(self.rate_e1)),
            ("ci_low_e1", Float(self.ci_low_e1)),
            ("ci_high_e1", Float(self.ci_high_e1)),
            ("rate_e2", Float(self.rate_e2)),
            ("ci_low_e2", Float(self.ci_low_e2)),
            ("ci_high_e2", Float(self.ci_high_e2)),
            ("rate_e3", Float(self.rate_e3)),
            ("ci_low_e3", Float(self.ci_low_e3)),
            ("ci_high_e3", Float(self.ci_high_e3)),
            ("rate_error", Float(self.rate_error)),
            ("ci_low_error", Float(self.ci_low_error)),
            ("ci_high_error", Float(self.ci_high_error)),
            ("error", Text(self.error.as_deref())),
        ]
    }

    /// Numeric value of `column`; `Ok(None)` for an empty cell.
    pub fn numeric(&self, column: &str) -> Result<Option<f64>> {
        let cell = self
            .cells()
            .into_iter()
            .find(|(k, _)| *k == column)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::Validation(format!("unknown column `{column}`")))?;
        match cell {
            Cell::Int(v) => Ok(v.map(|x| x as f64)),
            Cell::Float(v) => Ok(v),
            Cell::Bool(b) => Ok(Some(f64::from(u8::from(b)))),
            Cell::Text(_) => Err(Error::Validation(format!("column `{column}` is not numeric"))),
        }
    }

    fn note(&mut self, e: Error) {
        if self.error.is_none() {
            self.error = Some(e.to_string());
        }
    }

    fn set_mc(&mut self, est: &[BinomialEstimate; 5]) {
        let f = |e: &BinomialEstimate| (Some(e.rate), Some(e.ci_low), Some(e.ci_high));
        (self.rate_e0, self.ci_low_e0, self.ci_high_e0) = f(&est[0]);
        (self.rate_e1, self.ci_low_e1, self.ci_high_e1) = f(&est[1]);
        (self.rate_e2, self.ci_low_e2, self.ci_high_e2) = f(&est[2]);
        (self.rate_e3, self.ci_low_e3, self.ci_high_e3) = f(&est[3]);
        (self.rate_error, self.ci_low_error, self.ci_high_error) = f(&est[4]);
    }
}

// splitmix64 finalizer; gives every row its own Monte Carlo seed.
fn row_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Point {
    grid_value: u64,
    eps: f64,
    a: f64,
}

fn evaluate_point(
    cfg: &ExperimentConfig,
    model: &HarvestModel,
    moments: &MomentSet,
    index: u64,
    pt: &Point,
    exec: Exec,
) -> ResultRow {
    let params = cfg.channel;
    let var_y = model.variance();
    let mut row = ResultRow {
        eps: pt.eps,
        a: pt.a,
        noise_var: params.noise_var,
        harvest_mean: params.harvest_mean,
        harvest_kind: model.kind().to_string(),
        harvest_var: var_y,
        var_z: moments.var_z,
        capacity_bits: eh_capacity(&params),
        dispersion_bits2: eh_dispersion(&params),
        k: moments.k,
        ..ResultRow::default()
    };
    let (n, save_len) = if cfg.grid_is_n_hat() {
        match split_blocklength(pt.grid_value, pt.a) {
            Some(split) => split,
            None => {
                row.n_hat = pt.grid_value;
                row.note(Error::Regime(format!(
                    "n_hat = {} leaves no room for a save phase",
                    pt.grid_value
                )));
                return row;
            }
        }
    } else {
        (pt.grid_value, crate::bounds::save_length(pt.grid_value, pt.a))
    };
    row.n = n;
    row.save_len = save_len;
    row.n_hat = if cfg.grid_is_n_hat() { pt.grid_value } else { n + save_len };

    let sched = match make_schedule(n, pt.a, &params) {
        Ok(s) => s,
        Err(e) => {
            row.note(e);
            return row;
        }
    };
    row.e0n = Some(sched.e0n);
    row.eta_n = Some(sched.eta_n);

    match achievable_log_m(pt.eps, &sched, moments, var_y, &params) {
        Ok(rep) => {
            row.feasible = rep.feasible;
            row.epsilon_n = Some(rep.epsilon_n);
            row.log_m_bits = rep.log_m_bits;
            row.rate_bits_per_use = rep.log_m_bits.map(|l| l / row.n_hat as f64);
            if let Some(t) = rep.terms {
                row.capacity_term = Some(t.capacity_term);
                row.dispersion_term = Some(t.dispersion_term);
                row.slack_term = Some(t.slack_term);
                row.save_penalty = Some(t.save_penalty);
                row.taylor_term = Some(t.taylor_term);
                row.log_term = Some(t.log_term);
            }
        }
        Err(e) => row.note(e),
    }

    match theorem1_closed_form(row.n_hat, pt.eps, pt.a, moments, var_y, &params) {
        Ok(rep) => {
            let nh = row.n_hat as f64;
            row.closed_form_bits = rep.expression_bits();
            row.closed_form_sharp_bits = rep.sharp_log_m_bits;
            row.backoff_ratio = rep
                .expression_bits()
                .map(|b| (row.capacity_bits - b / nh) * nh.sqrt() / nh.ln().powf(pt.a));
            if let Some(t) = rep.taylor {
                row.n0 = Some(t.n0);
                row.f_hat = Some(t.f_hat);
            }
        }
        Err(e) => row.note(e),
    }

    match normal_approx_log_m(row.n_hat, pt.eps, params.harvest_mean, params.noise_var) {
        Ok(v) => row.normal_approx_bits = Some(v),
        Err(e) => row.note(e),
    }

    let budget_log_m = if cfg.simulates() {
        cfg.messages.map(|m| (m as f64).log2())
    } else {
        row.log_m_bits
    };
    if let Some(lm) = budget_log_m {
        row.budget_log_m_bits = Some(lm);
        match error_budget(lm, &sched, moments, var_y, &params) {
            Ok(b) => {
                row.bound_e0 = Some(b.e0);
                row.bound_e1 = Some(b.e1);
                row.bound_e2 = Some(b.e2);
                row.bound_e3 = Some(b.e3);
                row.bound_total = Some(b.total());
            }
            Err(e) => row.note(e),
        }
    }

    if cfg.simulates() {
        let messages = cfg.messages.unwrap_or(1);
        let seed = row_seed(cfg.seed, index);
        row.mc_seed = Some(seed);
        row.mc_trials = Some(cfg.trials);
        row.mc_messages = Some(messages as u64);
        let result = SimConfig::new(params, *model, sched, messages)
            .and_then(|sim| monte_carlo_with(&sim, cfg.trials, seed, exec));
        match result {
            Ok(mc) => row.set_mc(&[mc.e0, mc.e1, mc.e2, mc.e3, mc.error]),
            Err(e) => row.note(e),
        }
    }
    row
}

/// Evaluates every `(n, eps, a)` grid point in that nesting order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    run_sweep_with(cfg, Exec::default())
}

/// Like [`run_sweep`] with an explicit executor. Rows come back in grid order
/// and are identical for every executor and thread count.
pub fn run_sweep_with(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let model = cfg.harvest_model()?;
    let moments = quadrature_moments(&cfg.channel, model.variance(), cfg.quadrature_order)?;
    let points: Vec<Point> = cfg
        .grid()
        .iter()
        .flat_map(|&g| {
            cfg.eps.iter().flat_map(move |&eps| {
                cfg.a.iter().map(move |&a| Point {
                    grid_value: g,
                    eps,
                    a,
                })
            })
        })
        .collect();
    Ok(exec::map_collect(exec, points.len() as u64, |i| {
        evaluate_point(cfg, &model, &moments, i, &points[i as usize], exec)
    }))
}

/// Quadrature and Monte Carlo moments side by side with the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub capacity_bits: f64,
    pub dispersion_bits2: f64,
    pub quadrature: MomentSet,
    pub monte_carlo: McMoments,
    /// Every MC moment is within 5 standard errors of quadrature.
    pub consistent: bool,
}

pub fn moments_report(cfg: &ExperimentConfig) -> Result<MomentsReport> {
    cfg.validate()?;
    let model = cfg.harvest_model()?;
    let var_y = model.variance();
    let quadrature = quadrature_moments(&cfg.channel, var_y, cfg.quadrature_order)?;
    let mc = mc_moments(&cfg.channel, var_y, cfg.trials, cfg.seed)?;
    let consistent = [
        (mc.set.mean_bits, quadrature.mean_bits, mc.se_mean),
        (mc.set.var_bits2, quadrature.var_bits2, mc.se_var),
        (mc.set.abs3_bits3, quadrature.abs3_bits3, mc.se_abs3),
    ]
    .iter()
    .all(|(m, q, se)| (m - q).abs() <= 5.0 * se);
    Ok(MomentsReport {
        capacity_bits: eh_capacity(&cfg.channel),
        dispersion_bits2: eh_dispersion(&cfg.channel),
        quadrature,
        monte_carlo: mc,
        consistent,
    })
}
