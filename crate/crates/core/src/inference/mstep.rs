//! M-step: coordinate ascent on `Q` with a safeguarded Newton solve per
//! coordinate.

use super::stats::{pair_value, q_value, theta_derivatives, LeaderBlock, PairBlock, Param, Shift, SufficientStats};
use super::FitConfig;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Limits of one 1-D Newton solve.
#[derive(Debug, Clone, Copy)]
struct Newton {
    max_steps: usize,
    max_halvings: usize,
    lower: f64,
    upper: f64,
}

impl Newton {
    /// Maximizes a concave 1-D objective starting from `x`. A step is
    /// halved until the objective does not decrease; if no halving works
    /// the current point is kept.
    fn solve(
        &self,
        param: Param,
        mut x: f64,
        mut objective: impl FnMut(f64) -> f64,
        mut derivatives: impl FnMut(f64) -> (f64, f64),
    ) -> Result<f64> {
        let failure = || Error::NumericalFailure {
            param: param.to_string(),
        };
        let mut fx = objective(x);
        if !fx.is_finite() {
            return Err(failure());
        }
        for _ in 0..self.max_steps {
            let (g, h) = derivatives(x);
            if !g.is_finite() || !h.is_finite() {
                return Err(failure());
            }
            if h >= 0.0 {
                // flat coordinate: its terms in Q are all zero
                break;
            }
            let step = -g / h;
            if step.abs() <= 1e-12 * (1.0 + x.abs()) {
                break;
            }
            // when the predicted gain is below the resolution of the
            // objective, the comparison is decided by rounding; accept a full
            // step that loses no more than that
            let resolution = 1e-13 * (1.0 + fx.abs());
            let unresolved = 0.5 * g * step <= resolution;
            let mut scale = 1.0;
            let mut moved = false;
            for _ in 0..=self.max_halvings {
                let candidate = (x + scale * step).clamp(self.lower, self.upper);
                let fc = objective(candidate);
                if fc.is_nan() {
                    return Err(failure());
                }
                if fc >= fx || (scale == 1.0 && unresolved && fc >= fx - resolution) {
                    moved = candidate != x;
                    x = candidate;
                    fx = fc;
                    break;
                }
                scale *= 0.5;
            }
            if !moved {
                break;
            }
        }
        Ok(x)
    }
}

/// One full M-step from `start`. The returned `u` is mean-centered.
pub fn m_step(stats: &SufficientStats, start: &ModelParams, cfg: &FitConfig) -> Result<ModelParams> {
    cfg.validate()?;
    let n = start.n();
    let mut params = start.clone();
    // u is identified only up to a shift; work from its centered version
    let mean = params.u().iter().sum::<f64>() / n as f64;
    params.shift_u(-mean);
    let mut q_prev = q_value(&params, stats)?;
    if !q_prev.is_finite() {
        return Err(Error::NumericalFailure {
            param: "starting point".into(),
        });
    }
    let leader = LeaderBlock::new(stats);
    let pairs = PairBlock::new(stats);
    let free = Newton {
        max_steps: cfg.newton_max_steps,
        max_halvings: cfg.newton_damping,
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };
    let boxed = Newton {
        lower: -cfg.theta_max,
        upper: cfg.theta_max,
        ..free
    };

    for _ in 0..cfg.mstep_max_cycles {
        let cycle_start = params.clone();
        if !cfg.constrain_independent {
            let mut u = params.u().to_vec();
            params.alpha = free.solve(
                Param::Alpha,
                params.alpha,
                |a| leader.value(&u, a),
                |a| leader.alpha_derivatives(&u, a),
            )?;
            let alpha = params.alpha;
            for r in 0..n {
                let ur = free.solve(
                    Param::U(r),
                    u[r],
                    |x| {
                        let mut w = u.clone();
                        w[r] = x;
                        leader.value(&w, alpha)
                    },
                    |x| {
                        let mut w = u.clone();
                        w[r] = x;
                        leader.u_derivatives(r, &w, alpha)
                    },
                )?;
                u[r] = ur;
                params.set_u(r, ur);
            }

            let snapshot = params.clone();
            params.beta = free.solve(
                Param::Beta,
                params.beta,
                |b| pairs.shift_value(&snapshot, Shift::Beta, b),
                |b| pairs.shift_derivatives_at(&snapshot, Shift::Beta, b),
            )?;
            let snapshot = params.clone();
            params.gamma = free.solve(
                Param::Gamma,
                params.gamma,
                |g| pairs.shift_value(&snapshot, Shift::Gamma, g),
                |g| pairs.shift_derivatives_at(&snapshot, Shift::Gamma, g),
            )?;
        } else {
            let mut u = params.u().to_vec();
            for r in 0..n {
                let ur = free.solve(
                    Param::U(r),
                    u[r],
                    |x| {
                        let mut w = u.clone();
                        w[r] = x;
                        leader.value(&w, 0.0)
                    },
                    |x| {
                        let mut w = u.clone();
                        w[r] = x;
                        leader.u_derivatives(r, &w, 0.0)
                    },
                )?;
                u[r] = ur;
                params.set_u(r, ur);
            }
        }

        let (beta, gamma) = (params.beta, params.gamma);
        for (p, &(i, j)) in pairs.pairs.iter().enumerate() {
            let c = &pairs.counts[p];
            let theta = params.theta_at(i, j);
            let updated = match saturated_direction(c) {
                Some(bound) => bound * cfg.theta_max,
                None => boxed.solve(
                    Param::Theta(i, j),
                    theta,
                    |x| pair_value(c, x, beta, gamma),
                    |x| theta_derivatives(c, x, beta, gamma),
                )?,
            };
            params.set_theta(i, j, updated);
        }

        let mut q = q_value(&params, stats)?;
        if q.is_finite() {
            (params, q) = extrapolate(&cycle_start, params, q, stats)?;
        }
        if !q.is_finite() {
            return Err(Error::NumericalFailure {
                param: "Q after coordinate cycle".into(),
            });
        }
        let gain = q - q_prev;
        q_prev = q;
        if gain < cfg.mstep_tol && max_gradient(&params, &leader, &pairs, cfg) < GRADIENT_TOL {
            break;
        }
    }
    Ok(params)
}

/// Pattern move: tries `end + s·(end - start)` for `s = 1, 2, 4, ...` and
/// keeps the best point while `Q` keeps rising.
fn extrapolate(
    start: &ModelParams,
    end: ModelParams,
    q_end: f64,
    stats: &SufficientStats,
) -> Result<(ModelParams, f64)> {
    let (mut best, mut q_best) = (end, q_end);
    let anchor = best.clone();
    let mut scale = 1.0;
    for _ in 0..MAX_EXTRAPOLATIONS {
        let candidate = moved_along(start, &anchor, scale);
        let q = q_value(&candidate, stats)?;
        if !(q > q_best) {
            break;
        }
        best = candidate;
        q_best = q;
        scale *= 2.0;
    }
    Ok((best, q_best))
}

const MAX_EXTRAPOLATIONS: usize = 8;

fn moved_along(start: &ModelParams, end: &ModelParams, scale: f64) -> ModelParams {
    let step = |a: f64, b: f64| b + scale * (b - a);
    let mut p = end.clone();
    p.alpha = step(start.alpha, end.alpha);
    p.beta = step(start.beta, end.beta);
    p.gamma = step(start.gamma, end.gamma);
    for r in 0..p.n() {
        p.set_u(r, step(start.u()[r], end.u()[r]));
    }
    for i in 0..p.n() {
        for j in (i + 1)..p.n() {
            p.set_theta(i, j, step(start.theta_at(i, j), end.theta_at(i, j)));
        }
    }
    p
}

/// A cycle with a negligible gain ends the M-step only once every free
/// coordinate is also this close to stationary.
const GRADIENT_TOL: f64 = 1e-8;

fn max_gradient(params: &ModelParams, leader: &LeaderBlock, pairs: &PairBlock, cfg: &FitConfig) -> f64 {
    let u = params.u();
    let mut worst: f64 = 0.0;
    let mut track = |g: f64| worst = worst.max(g.abs());
    if !cfg.constrain_independent {
        track(leader.alpha_derivatives(u, params.alpha).0);
        track(pairs.shift_derivatives_at(params, Shift::Beta, params.beta).0);
        track(pairs.shift_derivatives_at(params, Shift::Gamma, params.gamma).0);
    }
    for r in 0..u.len() {
        track(leader.u_derivatives(r, u, params.alpha).0);
    }
    for (p, &(i, j)) in pairs.pairs.iter().enumerate() {
        let theta = params.theta_at(i, j);
        if theta.abs() < cfg.theta_max {
            track(theta_derivatives(&pairs.counts[p], theta, params.beta, params.gamma).0);
        }
    }
    worst
}

/// `Some(+1.0)` when a pair was only ever observed together (its `θ`
/// objective increases without bound), `Some(-1.0)` when only apart.
fn saturated_direction(c: &[f64; 6]) -> Option<f64> {
    let hits = c[0] + c[2] + c[4];
    let misses = c[1] + c[3] + c[5];
    match (hits > 0.0, misses > 0.0) {
        (true, false) => Some(1.0),
        (false, true) => Some(-1.0),
        _ => None,
    }
}
