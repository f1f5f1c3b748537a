use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{fit_em, FitConfig, FitResult};
use crate::model::ModelParams;
use crate::simulate::{replicate_rng, simulate_trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    /// Confidence level of the percentile intervals, e.g. 0.95.
    pub level: f64,
    pub seed: u64,
    /// Worker threads; 1 runs replicates sequentially on the caller.
    pub jobs: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 200,
            level: 0.95,
            seed: 0,
            jobs: 1,
        }
    }
}

/// Replicate estimates of `(α, β, γ)` with percentile intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// One row per successful replicate, in replicate order.
    pub estimates: Vec<[f64; 3]>,
    /// Replicate index of each row of `estimates`.
    pub replicate_ids: Vec<usize>,
    pub point: [f64; 3],
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub level: f64,
    pub failures: usize,
}

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Resimulates `shape = (T, n)` data sets from the fitted model, refits
/// each one and summarizes the spread of `(α̂, β̂, γ̂)`.
///
/// Failed replicate fits are dropped and counted; more than 10% failures
/// is an error.
pub fn parametric_bootstrap(
    fit: &FitResult,
    shape: (usize, usize),
    cfg: &BootstrapConfig,
    fit_cfg: &FitConfig,
) -> Result<BootstrapResult> {
    bootstrap_from_params(&fit.params, shape, cfg, fit_cfg)
}

/// As [`parametric_bootstrap`], starting from fitted parameters alone.
pub fn bootstrap_from_params(
    params: &ModelParams,
    shape: (usize, usize),
    cfg: &BootstrapConfig,
    fit_cfg: &FitConfig,
) -> Result<BootstrapResult> {
    let (t_len, n) = shape;
    if n != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "shape has n = {n}, fit has n = {}",
            params.n()
        )));
    }
    if cfg.replicates < 2 {
        return Err(Error::InvalidParameter("need at least 2 replicates".into()));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidParameter(format!("level {} not in (0, 1)", cfg.level)));
    }

    let run = |r: usize| -> Option<[f64; 3]> {
        let mut rng = replicate_rng(cfg.seed, r as u64);
        let (_, data) = simulate_trajectory(params, t_len, &mut rng).ok()?;
        let refit = fit_em(&data, fit_cfg).ok()?;
        let p = &refit.params;
        Some([p.alpha, p.beta, p.gamma])
    };
    let outcomes: Vec<Option<[f64; 3]>> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        pool.install(|| (0..cfg.replicates).into_par_iter().map(run).collect())
    } else {
        (0..cfg.replicates).map(run).collect()
    };

    let mut estimates = Vec::with_capacity(cfg.replicates);
    let mut replicate_ids = Vec::with_capacity(cfg.replicates);
    for (r, o) in outcomes.into_iter().enumerate() {
        if let Some(e) = o {
            estimates.push(e);
            replicate_ids.push(r);
        }
    }
    let failures = cfg.replicates - estimates.len();
    if failures * 10 > cfg.replicates || estimates.is_empty() {
        return Err(Error::TooManyFailures {
            failures,
            replicates: cfg.replicates,
        });
    }

    let tail = (1.0 - cfg.level) / 2.0;
    let mut lower = [0.0; 3];
    let mut upper = [0.0; 3];
    for k in 0..3 {
        let mut col: Vec<f64> = estimates.iter().map(|e| e[k]).collect();
        col.sort_by(f64::total_cmp);
        lower[k] = quantile_sorted(&col, tail);
        upper[k] = quantile_sorted(&col, 1.0 - tail);
    }
    let p = params;
    Ok(BootstrapResult {
        estimates,
        replicate_ids,
        point: [p.alpha, p.beta, p.gamma],
        lower,
        upper,
        level: cfg.level,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert!((quantile_sorted(&xs, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_sorted(&xs, 0.025) - 1.075).abs() < 1e-12);
        let two = [-1.0, 5.0];
        assert!((quantile_sorted(&two, 0.025) - (-1.0 + 0.025 * 6.0)).abs() < 1e-12);
    }
}
