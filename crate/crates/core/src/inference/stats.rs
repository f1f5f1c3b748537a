//! Expected sufficient statistics, the `Q` function and its derivatives.

use ndarray::Array2;

use super::forward_backward::Posteriors;
use crate::error::{Error, Result};
use crate::math::{log_sigmoid, sigmoid, sigmoid_slope, LeaderNormalizers};
use crate::model::{GroupedData, ModelParams};

/// Posterior-weighted counts consumed by the M-step.
///
/// `d[0]..d[5]` hold `D¹..D⁶`: for leader `i` and node `j`, the expected
/// number of times `j` was included (`D¹`) or left out (`D²`) in a new
/// segment, stayed (`D³`) or left (`D⁴`) as a previous member, and joined
/// (`D⁵`) or stayed away (`D⁶`) as a previous outsider.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub r1: Vec<f64>,
    pub v: Array2<f64>,
    pub d: [Array2<f64>; 6],
}

impl SufficientStats {
    pub fn n(&self) -> usize {
        self.r1.len()
    }

    fn check(&self, params: &ModelParams) -> Result<()> {
        let n = self.n();
        if params.n() != n || self.v.dim() != (n, n) || self.d.iter().any(|d| d.dim() != (n, n)) {
            return Err(Error::DimensionMismatch(format!(
                "statistics and parameters disagree on n ({} vs {})",
                n,
                params.n()
            )));
        }
        Ok(())
    }
}

pub fn sufficient_stats(post: &Posteriors, data: &GroupedData) -> Result<SufficientStats> {
    let (t_len, n) = post.r.dim();
    if t_len != data.len() || n != data.n() || post.v.dim() != (n, n) {
        return Err(Error::DimensionMismatch(
            "posteriors do not match the grouped data".into(),
        ));
    }
    let mut d: [Array2<f64>; 6] = std::array::from_fn(|_| Array2::zeros((n, n)));
    for t in 0..t_len {
        let group = data.row(t);
        let prev = t.checked_sub(1).map(|s| data.row(s));
        for i in 0..n {
            let r = post.r[[t, i]];
            if r == 0.0 {
                continue;
            }
            match prev {
                Some(p) if p[i] == 1 => {
                    for j in 0..n {
                        let k = match (p[j], group[j]) {
                            (1, 1) => 2,
                            (1, _) => 3,
                            (_, 1) => 4,
                            _ => 5,
                        };
                        d[k][[i, j]] += r;
                    }
                }
                _ => {
                    for j in 0..n {
                        let k = if group[j] == 1 { 0 } else { 1 };
                        d[k][[i, j]] += r;
                    }
                }
            }
        }
    }
    Ok(SufficientStats {
        r1: post.r.row(0).to_vec(),
        v: post.v.clone(),
        d,
    })
}

/// `Q`: expected complete-data log-likelihood under `params`.
pub fn q_value(params: &ModelParams, stats: &SufficientStats) -> Result<f64> {
    stats.check(params)?;
    let n = params.n();
    let u = params.u();
    let norm = LeaderNormalizers::new(u, params.alpha);
    let mut q = 0.0;
    for i in 0..n {
        q += stats.r1[i] * (u[i] - norm.first);
        for j in 0..n {
            let bonus = if i == j { params.alpha } else { 0.0 };
            q += stats.v[[i, j]] * (u[i] + bonus - norm.column[j]);
        }
    }
    let d = &stats.d;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let th = params.theta_at(i, j);
            let (b, g) = (th + params.beta, th + params.gamma);
            q += d[0][[i, j]] * log_sigmoid(th)
                + d[1][[i, j]] * log_sigmoid(-th)
                + d[2][[i, j]] * log_sigmoid(b)
                + d[3][[i, j]] * log_sigmoid(-b)
                + d[4][[i, j]] * log_sigmoid(g)
                + d[5][[i, j]] * log_sigmoid(-g);
        }
    }
    Ok(q)
}

/// A scalar coordinate of the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Alpha,
    Beta,
    Gamma,
    U(usize),
    /// Off-diagonal pair; `(i, j)` and `(j, i)` name the same coordinate.
    Theta(usize, usize),
}

impl std::fmt::Display for Param {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Param::Alpha => write!(f, "alpha"),
            Param::Beta => write!(f, "beta"),
            Param::Gamma => write!(f, "gamma"),
            Param::U(r) => write!(f, "u[{r}]"),
            Param::Theta(i, j) => write!(f, "theta[{i}][{j}]"),
        }
    }
}

/// First and second partial derivatives of `Q` along one coordinate.
pub fn q_derivatives(which: Param, params: &ModelParams, stats: &SufficientStats) -> Result<(f64, f64)> {
    stats.check(params)?;
    let n = params.n();
    match which {
        Param::Alpha => Ok(LeaderBlock::new(stats).alpha_derivatives(params.u(), params.alpha)),
        Param::U(r) if r < n => Ok(LeaderBlock::new(stats).u_derivatives(r, params.u(), params.alpha)),
        Param::Beta => Ok(PairBlock::new(stats).shift_derivatives(params, Shift::Beta)),
        Param::Gamma => Ok(PairBlock::new(stats).shift_derivatives(params, Shift::Gamma)),
        Param::Theta(i, j) if i < n && j < n && i != j => {
            let counts = pair_counts(stats, i, j);
            Ok(theta_derivatives(&counts, params.theta_at(i, j), params.beta, params.gamma))
        }
        other => Err(Error::InvalidParameter(format!("no coordinate {other} for n = {n}"))),
    }
}

/// Leader-chain part of `Q`, reduced to O(n) aggregates:
/// `Σ r1_i u_i - |r1| ln Z + α tr V + Σ_i V_i· u_i - Σ_j V_·j ln Z_j`.
#[derive(Debug, Clone)]
pub(crate) struct LeaderBlock {
    r1: Vec<f64>,
    r1_sum: f64,
    trace: f64,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl LeaderBlock {
    pub(crate) fn new(stats: &SufficientStats) -> Self {
        let n = stats.n();
        let v = &stats.v;
        Self {
            r1: stats.r1.clone(),
            r1_sum: stats.r1.iter().sum(),
            trace: (0..n).map(|i| v[[i, i]]).sum(),
            row: (0..n).map(|i| v.row(i).sum()).collect(),
            col: (0..n).map(|j| v.column(j).sum()).collect(),
        }
    }

    pub(crate) fn value(&self, u: &[f64], alpha: f64) -> f64 {
        let norm = LeaderNormalizers::new(u, alpha);
        let mut q = alpha * self.trace - self.r1_sum * norm.first;
        for i in 0..u.len() {
            q += (self.r1[i] + self.row[i]) * u[i] - self.col[i] * norm.column[i];
        }
        q
    }

    pub(crate) fn alpha_derivatives(&self, u: &[f64], alpha: f64) -> (f64, f64) {
        let norm = LeaderNormalizers::new(u, alpha);
        let (mut g, mut h) = (self.trace, 0.0);
        for j in 0..u.len() {
            let stay = (u[j] + alpha - norm.column[j]).exp();
            g -= self.col[j] * stay;
            h -= self.col[j] * stay * (1.0 - stay);
        }
        (g, h)
    }

    pub(crate) fn u_derivatives(&self, r: usize, u: &[f64], alpha: f64) -> (f64, f64) {
        let norm = LeaderNormalizers::new(u, alpha);
        let rho = (u[r] - norm.first).exp();
        let mut g = self.r1[r] - self.r1_sum * rho + self.row[r];
        let mut h = -self.r1_sum * rho * (1.0 - rho);
        for j in 0..u.len() {
            let bonus = if j == r { alpha } else { 0.0 };
            let phi = (u[r] + bonus - norm.column[j]).exp();
            g -= self.col[j] * phi;
            h -= self.col[j] * phi * (1.0 - phi);
        }
        (g, h)
    }
}

/// Counts `D^k_ij + D^k_ji` for one unordered pair.
pub(crate) fn pair_counts(stats: &SufficientStats, i: usize, j: usize) -> [f64; 6] {
    std::array::from_fn(|k| stats.d[k][[i, j]] + stats.d[k][[j, i]])
}

pub(crate) fn pair_value(c: &[f64; 6], theta: f64, beta: f64, gamma: f64) -> f64 {
    let (b, g) = (theta + beta, theta + gamma);
    c[0] * log_sigmoid(theta)
        + c[1] * log_sigmoid(-theta)
        + c[2] * log_sigmoid(b)
        + c[3] * log_sigmoid(-b)
        + c[4] * log_sigmoid(g)
        + c[5] * log_sigmoid(-g)
}

pub(crate) fn theta_derivatives(c: &[f64; 6], theta: f64, beta: f64, gamma: f64) -> (f64, f64) {
    let (mut g, mut h) = (0.0, 0.0);
    for (k, x) in [theta, theta + beta, theta + gamma].into_iter().enumerate() {
        let (hit, miss) = (c[2 * k], c[2 * k + 1]);
        g += hit - (hit + miss) * sigmoid(x);
        h -= (hit + miss) * sigmoid_slope(x);
    }
    (g, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Shift {
    Beta,
    Gamma,
}

/// All unordered pairs with their symmetric counts.
#[derive(Debug, Clone)]
pub(crate) struct PairBlock {
    pub(crate) pairs: Vec<(usize, usize)>,
    pub(crate) counts: Vec<[f64; 6]>,
}

impl PairBlock {
    pub(crate) fn new(stats: &SufficientStats) -> Self {
        let n = stats.n();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        let mut counts = Vec::with_capacity(pairs.capacity());
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
                counts.push(pair_counts(stats, i, j));
            }
        }
        Self { pairs, counts }
    }

    fn hit_miss(&self, p: usize, which: Shift) -> (f64, f64) {
        let c = &self.counts[p];
        match which {
            Shift::Beta => (c[2], c[3]),
            Shift::Gamma => (c[4], c[5]),
        }
    }

    /// The part of `Q` that depends on `which`, evaluated at `value`.
    pub(crate) fn shift_value(&self, params: &ModelParams, which: Shift, value: f64) -> f64 {
        let mut q = 0.0;
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let (hit, miss) = self.hit_miss(p, which);
            if hit + miss == 0.0 {
                continue;
            }
            let x = params.theta_at(i, j) + value;
            q += hit * log_sigmoid(x) + miss * log_sigmoid(-x);
        }
        q
    }

    pub(crate) fn shift_derivatives_at(&self, params: &ModelParams, which: Shift, value: f64) -> (f64, f64) {
        let (mut g, mut h) = (0.0, 0.0);
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let (hit, miss) = self.hit_miss(p, which);
            if hit + miss == 0.0 {
                continue;
            }
            let x = params.theta_at(i, j) + value;
            g += hit - (hit + miss) * sigmoid(x);
            h -= (hit + miss) * sigmoid_slope(x);
        }
        (g, h)
    }

    fn shift_derivatives(&self, params: &ModelParams, which: Shift) -> (f64, f64) {
        let value = match which {
            Shift::Beta => params.beta,
            Shift::Gamma => params.gamma,
        };
        self.shift_derivatives_at(params, which, value)
    }
}
