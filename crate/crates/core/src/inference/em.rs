use ndarray::Array2;
use rand_distr::{Distribution, Normal};

use super::forward_backward::{forward_backward_linked, FbOptions, Posteriors};
use super::mstep::m_step;
use super::stats::sufficient_stats;
use crate::analysis::half_weight_index;
use crate::error::{Error, Result};
use crate::math::logit;
use crate::model::{link_probabilities, GroupedData, LinkedProbs, ModelParams, THETA_MAX};
use crate::simulate::replicate_rng;

/// EM and M-step controls.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_em_iters: usize,
    /// Stop once `ln P(G)` improves by less than this.
    pub em_tol: f64,
    /// Stop coordinate cycles once `Q` improves by less than this.
    pub mstep_tol: f64,
    pub mstep_max_cycles: usize,
    pub newton_max_steps: usize,
    /// Maximum number of step halvings per Newton step.
    pub newton_damping: usize,
    /// Fit the classical hub model: `α = β = γ = 0` throughout.
    pub constrain_independent: bool,
    pub theta_max: f64,
    /// Extra starts: each seed perturbs the default initializer and the
    /// fit with the largest `ln P(G)` wins.
    pub restarts: Vec<u64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_em_iters: 500,
            em_tol: 1e-7,
            mstep_tol: 1e-8,
            mstep_max_cycles: 100,
            newton_max_steps: 25,
            newton_damping: 20,
            constrain_independent: false,
            theta_max: THETA_MAX,
            restarts: Vec::new(),
        }
    }
}

impl FitConfig {
    pub fn independent() -> Self {
        Self {
            constrain_independent: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.em_tol > 0.0 && self.mstep_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.theta_max > 0.0 && self.theta_max <= THETA_MAX) {
            return Err(Error::InvalidParameter(format!(
                "theta_max must lie in (0, {THETA_MAX}]"
            )));
        }
        if self.max_em_iters == 0 || self.mstep_max_cycles == 0 || self.newton_max_steps == 0 {
            return Err(Error::InvalidParameter("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ModelParams,
    pub linked: LinkedProbs,
    /// Posteriors at `params`.
    pub posteriors: Posteriors,
    /// `ln P(G)` at the initial point and after every M-step.
    pub loglik_trace: Vec<f64>,
    /// Number of M-steps taken.
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn log_marginal(&self) -> f64 {
        self.posteriors.log_marginal
    }
}

/// Starting point: `θ` from the half weight index, `u` from appearance
/// frequencies, adjustment factors zero.
pub fn initialize(data: &GroupedData, cfg: &FitConfig) -> Result<ModelParams> {
    cfg.validate()?;
    let n = data.n();
    let t_len = data.len() as f64;
    let h = half_weight_index(data);
    let theta = Array2::from_shape_fn((n, n), |(i, j)| {
        let x = h[[i, j]];
        if i == j {
            f64::INFINITY
        } else if x <= 0.0 {
            -cfg.theta_max
        } else if x >= 1.0 {
            cfg.theta_max
        } else {
            logit(x).clamp(-cfg.theta_max, cfg.theta_max)
        }
    });
    let floor = 1.0 / (2.0 * t_len);
    let mut u: Vec<f64> = data
        .appearance_counts()
        .into_iter()
        .map(|c| (c as f64 / t_len).max(floor).ln())
        .collect();
    let mean = u.iter().sum::<f64>() / n as f64;
    u.iter_mut().for_each(|x| *x -= mean);
    ModelParams::new(u, theta, 0.0, 0.0, 0.0)
}

/// Fits by EM from the default initializer (plus any configured restarts).
pub fn fit_em(data: &GroupedData, cfg: &FitConfig) -> Result<FitResult> {
    let start = initialize(data, cfg)?;
    let mut best = fit_em_from(data, start.clone(), cfg)?;
    for &seed in &cfg.restarts {
        let candidate = fit_em_from(data, perturb(&start, seed, cfg.theta_max)?, cfg)?;
        if candidate.log_marginal() > best.log_marginal() {
            best = candidate;
        }
    }
    Ok(best)
}

fn perturb(start: &ModelParams, seed: u64, theta_max: f64) -> Result<ModelParams> {
    let mut rng = replicate_rng(seed, 0);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut p = start.clone();
    let n = p.n();
    for r in 0..n {
        let x = p.u()[r] + noise.sample(&mut rng);
        p.set_u(r, x);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let x = (p.theta_at(i, j) + noise.sample(&mut rng)).clamp(-theta_max, theta_max);
            p.set_theta(i, j, x);
        }
    }
    Ok(p)
}

/// Fits by EM from a given starting point (warm start).
pub fn fit_em_from(data: &GroupedData, start: ModelParams, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if data.n() != start.n() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} nodes, starting point has {}",
            data.n(),
            start.n()
        )));
    }
    let mut params = start;
    if cfg.constrain_independent {
        params.alpha = 0.0;
        params.beta = 0.0;
        params.gamma = 0.0;
    }
    let mut linked = link_probabilities(&params)?;
    let mut posteriors = forward_backward_linked(data, &linked, FbOptions::default())?;
    let mut trace = vec![posteriors.log_marginal];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_em_iters {
        let stats = sufficient_stats(&posteriors, data)?;
        params = m_step(&stats, &params, cfg)?;
        linked = link_probabilities(&params)?;
        posteriors = forward_backward_linked(data, &linked, FbOptions::default())?;
        iterations += 1;
        let prev = *trace.last().expect("non-empty trace");
        trace.push(posteriors.log_marginal);
        if posteriors.log_marginal - prev < cfg.em_tol {
            converged = true;
            break;
        }
    }
    Ok(FitResult {
        params,
        linked,
        posteriors,
        loglik_trace: trace,
        iterations,
        converged,
    })
}
