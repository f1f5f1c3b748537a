//! Parameter generation and trajectory sampling from the generative model.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{link_probabilities, GroupedData, LeaderSequence, ModelParams, Regime};

/// Simulation design: network size, sample size, adjustment factors and
/// the normal distributions that `u` and off-diagonal `θ` are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_nodes: usize,
    pub n_groups: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub u_mean: f64,
    pub u_sd: f64,
    pub theta_mean: f64,
    pub theta_sd: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n_nodes: usize, n_groups: usize) -> Self {
        Self {
            n_nodes,
            n_groups,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            u_mean: 0.0,
            u_sd: std::f64::consts::SQRT_2,
            theta_mean: -2.0,
            theta_sd: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::InvalidParameter("n must be at least 2".into()));
        }
        if self.n_groups < 1 {
            return Err(Error::InvalidParameter("T must be at least 1".into()));
        }
        if !(self.u_sd > 0.0 && self.theta_sd > 0.0) {
            return Err(Error::InvalidParameter(
                "standard deviations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Symbolic persistence levels: `ln((n-1)/2)`, `ln(n-1)` and `ln(2(n-1))`
/// make the previous leader keep its role with probability roughly 1/3,
/// 1/2 and 2/3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaLevel {
    LogHalfN,
    LogN,
    Log2N,
}

impl AlphaLevel {
    pub fn value(self, n: usize) -> f64 {
        let m = (n as f64) - 1.0;
        match self {
            AlphaLevel::LogHalfN => (m / 2.0).ln(),
            AlphaLevel::LogN => m.ln(),
            AlphaLevel::Log2N => (2.0 * m).ln(),
        }
    }
}

/// Generator for replicate `index` of a study seeded with `seed`. Each
/// replicate gets its own ChaCha stream, so results do not depend on the
/// order in which replicates run.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_parameters<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<ModelParams> {
    cfg.validate()?;
    let n = cfg.n_nodes;
    let u_dist = Normal::new(cfg.u_mean, cfg.u_sd)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let theta_dist = Normal::new(cfg.theta_mean, cfg.theta_sd)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let u: Vec<f64> = (0..n).map(|_| u_dist.sample(rng)).collect();
    let mut theta = Array2::from_elem((n, n), f64::INFINITY);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = theta_dist.sample(rng);
            theta[[i, j]] = v;
            theta[[j, i]] = v;
        }
    }
    ModelParams::new(u, theta, cfg.alpha, cfg.beta, cfg.gamma)
}

fn sample_categorical<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if x < acc {
            return i;
        }
    }
    // rounding left the cumulative sum just below 1
    last
}

/// Samples leaders and groups for `n_groups` time points.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    params: &ModelParams,
    n_groups: usize,
    rng: &mut R,
) -> Result<(LeaderSequence, GroupedData)> {
    if n_groups == 0 {
        return Err(Error::InvalidParameter("T must be at least 1".into()));
    }
    let probs = link_probabilities(params)?;
    let n = params.n();
    let mut leaders = Vec::with_capacity(n_groups);
    let mut cells: Vec<u8> = Vec::with_capacity(n * n_groups);
    for t in 0..n_groups {
        let leader = match leaders.last() {
            None => sample_categorical(probs.rho.iter().copied(), rng),
            Some(&prev) => sample_categorical(probs.phi.column(prev).iter().copied(), rng),
        };
        let previous = t.checked_sub(1).map(|s| cells[s * n..(s + 1) * n].to_vec());
        let inside = previous.as_ref().is_some_and(|p| p[leader] == 1);
        for j in 0..n {
            let regime = match &previous {
                Some(p) if inside => {
                    if p[j] == 1 {
                        Regime::Stay
                    } else {
                        Regime::Join
                    }
                }
                _ => Regime::Fresh,
            };
            // diagonal inclusion probability is exactly 1
            let p = probs.inclusion(regime)[[leader, j]];
            let x: f64 = rng.random();
            cells.push(u8::from(x < p));
        }
        leaders.push(leader);
    }
    let data = GroupedData::from_cells(n, cells, None, None)?;
    Ok((LeaderSequence::new(leaders), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::complete_log_likelihood;

    #[test]
    fn fixed_seed_is_deterministic() {
        let mut cfg = SimConfig::new(8, 10);
        cfg.alpha = 1.0;
        let a = sample_parameters(&cfg, &mut replicate_rng(11, 0)).unwrap();
        let b = sample_parameters(&cfg, &mut replicate_rng(11, 0)).unwrap();
        assert_eq!(a, b);
        let c = sample_parameters(&cfg, &mut replicate_rng(11, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_theta_gives_half_links() {
        let mut cfg = SimConfig::new(5, 1);
        cfg.theta_mean = 0.0;
        cfg.theta_sd = 1e-300;
        let p = sample_parameters(&cfg, &mut replicate_rng(1, 0)).unwrap();
        let probs = link_probabilities(&p).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!((probs.a[[i, j]] - 0.5).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(SimConfig::new(1, 10).validate().is_err());
        assert!(SimConfig::new(3, 0).validate().is_err());
        let mut cfg = SimConfig::new(3, 3);
        cfg.u_sd = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn saturated_pair_always_groups_together() {
        let mut theta = Array2::zeros((2, 2));
        theta[[0, 1]] = 1e9;
        theta[[1, 0]] = 1e9;
        let params = ModelParams::new(vec![0.0, 0.3], theta, 0.5, 0.0, 0.0).unwrap();
        let (_, data) = simulate_trajectory(&params, 2000, &mut replicate_rng(3, 0)).unwrap();
        assert!(data.rows().all(|r| r == [1, 1]));
    }

    #[test]
    fn saturated_stay_keeps_members() {
        // one dominant leader that never changes; β pushes B to 1
        let n = 6;
        let mut u = vec![-30.0; n];
        u[0] = 0.0;
        let theta = Array2::from_elem((n, n), -1.0);
        let params = ModelParams::new(u, theta, 30.0, 200.0, 0.0).unwrap();
        let (z, data) = simulate_trajectory(&params, 500, &mut replicate_rng(5, 0)).unwrap();
        assert!(z.as_slice().iter().all(|&l| l == 0));
        for t in 1..data.len() {
            for j in 0..n {
                if data.get(t - 1, j) == 1 {
                    assert_eq!(data.get(t, j), 1);
                }
            }
        }
    }

    #[test]
    fn simulated_paths_have_finite_likelihood() {
        let mut cfg = SimConfig::new(7, 60);
        cfg.alpha = 2.0;
        cfg.beta = 3.0;
        cfg.gamma = -1.0;
        for r in 0..10 {
            let mut rng = replicate_rng(99, r);
            let params = sample_parameters(&cfg, &mut rng).unwrap();
            let (z, g) = simulate_trajectory(&params, cfg.n_groups, &mut rng).unwrap();
            for (t, &l) in z.as_slice().iter().enumerate() {
                assert_eq!(g.get(t, l), 1);
            }
            assert!(complete_log_likelihood(&z, &g, &params).unwrap().is_finite());
        }
    }

    #[test]
    fn alpha_levels() {
        assert!((AlphaLevel::LogN.value(50) - 49f64.ln()).abs() < 1e-15);
        assert!((AlphaLevel::LogHalfN.value(50) - 24.5f64.ln()).abs() < 1e-15);
        assert!((AlphaLevel::Log2N.value(50) - 98f64.ln()).abs() < 1e-15);
    }
}
