//! Model parameters, their probability-scale transforms and likelihoods.
//!
//! The natural parameters are the leader propensities `u`, the symmetric
//! link matrix `θ` and the three adjustment factors `α` (leader
//! persistence), `β` (members staying) and `γ` (outsiders joining). Every
//! probability object used elsewhere is derived from them by
//! [`link_probabilities`].

mod data;
pub(crate) mod likelihood;

pub use data::{GroupedData, LeaderSequence};
pub use likelihood::{complete_log_likelihood, emission_log_prob, transition_log_prob};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::math::{log_sigmoid, sigmoid, LeaderNormalizers};

/// Off-diagonal `θ` values are clamped to `[-THETA_MAX, THETA_MAX]`.
pub const THETA_MAX: f64 = 30.0;

/// Natural parameters of the temporal-dependent hub model.
///
/// The diagonal of `theta` always holds `f64::INFINITY`; it is never used
/// in arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    u: Vec<f64>,
    theta: Array2<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ModelParams {
    /// Validates and normalizes the parameters: the diagonal of `theta` is
    /// replaced by the `+∞` sentinel and off-diagonal entries (which may be
    /// `±∞`) are clamped to `±THETA_MAX`.
    pub fn new(u: Vec<f64>, mut theta: Array2<f64>, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let n = u.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty network".into()));
        }
        if theta.dim() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "theta is {:?}, expected ({n}, {n})",
                theta.dim()
            )));
        }
        if let Some(r) = u.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("u[{r}] = {} is not finite", u[r])));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        for i in 0..n {
            theta[[i, i]] = f64::INFINITY;
            for j in (i + 1)..n {
                let (a, b) = (theta[[i, j]], theta[[j, i]]);
                if a.is_nan() || a != b {
                    return Err(Error::InvalidParameter(format!(
                        "theta[{i}][{j}] = {a} and theta[{j}][{i}] = {b} must be equal and not NaN"
                    )));
                }
                let c = a.clamp(-THETA_MAX, THETA_MAX);
                theta[[i, j]] = c;
                theta[[j, i]] = c;
            }
        }
        Ok(Self {
            u,
            theta,
            alpha,
            beta,
            gamma,
        })
    }

    /// Classical hub model parameters (`α = β = γ = 0`).
    pub fn independent(u: Vec<f64>, theta: Array2<f64>) -> Result<Self> {
        Self::new(u, theta, 0.0, 0.0, 0.0)
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn set_u(&mut self, r: usize, value: f64) {
        self.u[r] = value;
    }

    /// Adds `delta` to every leader propensity; the likelihood is unchanged.
    pub fn shift_u(&mut self, delta: f64) {
        self.u.iter_mut().for_each(|x| *x += delta);
    }

    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    #[inline]
    pub fn theta_at(&self, i: usize, j: usize) -> f64 {
        self.theta[[i, j]]
    }

    /// Sets `θ_ij = θ_ji`, clamped. Writes to the diagonal are ignored.
    pub fn set_theta(&mut self, i: usize, j: usize, value: f64) {
        if i == j {
            return;
        }
        let c = value.clamp(-THETA_MAX, THETA_MAX);
        self.theta[[i, j]] = c;
        self.theta[[j, i]] = c;
    }
}

/// Probability-scale view of [`ModelParams`].
///
/// `phi[[i, j]]` is `P(z^t = i | z^{t-1} = j)`, so columns sum to one.
/// Log tables are kept alongside so that likelihood code never takes the
/// log of a rounded probability.
#[derive(Debug, Clone)]
pub struct LinkedProbs {
    pub rho: Vec<f64>,
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub c: Array2<f64>,
    pub phi: Array2<f64>,
    pub(crate) log_rho: Vec<f64>,
    pub(crate) log_phi: Array2<f64>,
    pub(crate) log_in: [Array2<f64>; 3],
    pub(crate) log_out: [Array2<f64>; 3],
}

/// Which inclusion matrix governs a membership draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// New segment: `A`.
    Fresh = 0,
    /// Previous member staying: `B`.
    Stay = 1,
    /// Previous outsider joining: `C`.
    Join = 2,
}

impl LinkedProbs {
    pub fn n(&self) -> usize {
        self.rho.len()
    }

    /// `ln P(G_j = 1 | leader i)` under the given regime.
    #[inline]
    pub fn log_include(&self, regime: Regime, i: usize, j: usize) -> f64 {
        self.log_in[regime as usize][[i, j]]
    }

    /// `ln P(G_j = 0 | leader i)` under the given regime.
    #[inline]
    pub fn log_exclude(&self, regime: Regime, i: usize, j: usize) -> f64 {
        self.log_out[regime as usize][[i, j]]
    }

    pub fn inclusion(&self, regime: Regime) -> &Array2<f64> {
        match regime {
            Regime::Fresh => &self.a,
            Regime::Stay => &self.b,
            Regime::Join => &self.c,
        }
    }

    pub fn log_phi(&self, i: usize, j: usize) -> f64 {
        self.log_phi[[i, j]]
    }

    pub fn log_rho(&self, i: usize) -> f64 {
        self.log_rho[i]
    }
}

/// Derives `ρ`, `A`, `B`, `C` and `Φ` from the natural parameters.
pub fn link_probabilities(params: &ModelParams) -> Result<LinkedProbs> {
    let n = params.n();
    if let Some(r) = params.u.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("u[{r}] is not finite")));
    }
    let norm = LeaderNormalizers::new(&params.u, params.alpha);
    let log_rho: Vec<f64> = params.u.iter().map(|&x| x - norm.first).collect();
    let rho = log_rho.iter().map(|&x| x.exp()).collect();

    let log_phi = Array2::from_shape_fn((n, n), |(i, j)| {
        let bonus = if i == j { params.alpha } else { 0.0 };
        params.u[i] + bonus - norm.column[j]
    });
    let phi = log_phi.mapv(f64::exp);

    let shifts = [0.0, params.beta, params.gamma];
    let prob = |shift: f64| {
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                1.0
            } else {
                sigmoid(params.theta[[i, j]] + shift)
            }
        })
    };
    let log_in = shifts.map(|s| {
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                0.0
            } else {
                log_sigmoid(params.theta[[i, j]] + s)
            }
        })
    });
    let log_out = shifts.map(|s| {
        Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                f64::NEG_INFINITY
            } else {
                log_sigmoid(-(params.theta[[i, j]] + s))
            }
        })
    });

    Ok(LinkedProbs {
        rho,
        a: prob(0.0),
        b: prob(params.beta),
        c: prob(params.gamma),
        phi,
        log_rho,
        log_phi,
        log_in,
        log_out,
    })
}
