//! Exact E-step: forward, backward and the extra `c` recursion needed
//! because each group depends on the previous one.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::likelihood::emission_unchecked;
use crate::model::{link_probabilities, GroupedData, LinkedProbs, ModelParams};

/// Leader posteriors given all groups.
#[derive(Debug, Clone)]
pub struct Posteriors {
    /// `r[[t, i]] = P(z^t = i | G)`.
    pub r: Array2<f64>,
    /// `v[[i, j]] = Σ_{t≥2} P(z^t = i, z^{t-1} = j | G)`.
    pub v: Array2<f64>,
    /// Per-time pairwise posteriors, only kept when requested through
    /// [`FbOptions::keep_pairwise`]. Entry `s` is time `s + 1` (0-based).
    pub xi: Option<Vec<Array2<f64>>>,
    /// `ln P(G)`.
    pub log_marginal: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct FbOptions {
    pub keep_pairwise: bool,
    /// Renormalize each row of `a`, `b`, `c` (and shift the emission
    /// logs). Turning this off is only meaningful for short sequences.
    pub rescale: bool,
}

impl Default for FbOptions {
    fn default() -> Self {
        Self {
            keep_pairwise: false,
            rescale: true,
        }
    }
}

pub fn forward_backward(data: &GroupedData, params: &ModelParams) -> Result<Posteriors> {
    forward_backward_with(data, params, FbOptions::default())
}

pub fn forward_backward_with(
    data: &GroupedData,
    params: &ModelParams,
    opts: FbOptions,
) -> Result<Posteriors> {
    if data.n() != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} nodes, params have {}",
            data.n(),
            params.n()
        )));
    }
    let probs = link_probabilities(params)?;
    forward_backward_linked(data, &probs, opts)
}

pub(crate) fn forward_backward_linked(
    data: &GroupedData,
    probs: &LinkedProbs,
    opts: FbOptions,
) -> Result<Posteriors> {
    let n = data.n();
    let t_len = data.len();
    let phi = &probs.phi;

    // Emission likelihoods, scaled per row by the row maximum.
    let mut emit = Array2::<f64>::zeros((t_len, n));
    let mut log_scale = vec![0.0; t_len];
    for t in 0..t_len {
        let group = data.row(t);
        let prev = t.checked_sub(1).map(|s| data.row(s));
        let logs: Vec<f64> = (0..n)
            .map(|i| emission_unchecked(group, prev, i, probs))
            .collect();
        let m = if opts.rescale {
            logs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        } else {
            0.0
        };
        if m == f64::NEG_INFINITY {
            return Err(Error::ImpossibleData { t });
        }
        log_scale[t] = m;
        for i in 0..n {
            emit[[t, i]] = (logs[i] - m).exp();
        }
    }

    let normalize = |row: &mut [f64]| -> f64 {
        let s: f64 = row.iter().sum();
        if opts.rescale && s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        }
        s
    };

    // Forward: a^t_i ∝ P(z^t = i, G^{1:t}).
    let mut a = Array2::<f64>::zeros((t_len, n));
    let mut log_marginal = 0.0;
    for i in 0..n {
        a[[0, i]] = probs.rho[i] * emit[[0, i]];
    }
    for t in 0..t_len {
        if t > 0 {
            for i in 0..n {
                let e = emit[[t, i]];
                if e == 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for k in 0..n {
                    s += phi[[i, k]] * a[[t - 1, k]];
                }
                a[[t, i]] = s * e;
            }
        }
        let mut row = a.row_mut(t);
        let s = normalize(row.as_slice_mut().expect("standard layout"));
        if s == 0.0 || !s.is_finite() {
            return Err(Error::ImpossibleData { t });
        }
        if opts.rescale {
            log_marginal += s.ln() + log_scale[t];
        } else if t == t_len - 1 {
            log_marginal = s.ln();
        }
    }

    // Backward: b^t_i ∝ P(G^{t+1:T} | z^t = i, G^t).
    let mut b = Array2::<f64>::zeros((t_len, n));
    b.row_mut(t_len - 1).fill(1.0);
    if opts.rescale {
        normalize(b.row_mut(t_len - 1).as_slice_mut().unwrap());
    }
    for t in (0..t_len.saturating_sub(1)).rev() {
        let weighted: Vec<f64> = (0..n).map(|k| b[[t + 1, k]] * emit[[t + 1, k]]).collect();
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += weighted[k] * phi[[k, i]];
            }
            b[[t, i]] = s;
        }
        normalize(b.row_mut(t).as_slice_mut().unwrap());
    }

    // c^t_i ∝ P(G^{t:T} | z^t = i, G^{t-1}); the first row is never used.
    let mut c = Array2::<f64>::zeros((t_len, n));
    if t_len > 1 {
        for i in 0..n {
            c[[t_len - 1, i]] = emit[[t_len - 1, i]];
        }
        normalize(c.row_mut(t_len - 1).as_slice_mut().unwrap());
        for t in (1..t_len - 1).rev() {
            for i in 0..n {
                let e = emit[[t, i]];
                if e == 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for k in 0..n {
                    s += c[[t + 1, k]] * phi[[k, i]];
                }
                c[[t, i]] = s * e;
            }
            normalize(c.row_mut(t).as_slice_mut().unwrap());
        }
    }

    let mut r = Array2::<f64>::zeros((t_len, n));
    for t in 0..t_len {
        let mut s = 0.0;
        for i in 0..n {
            let x = a[[t, i]] * b[[t, i]];
            r[[t, i]] = x;
            s += x;
        }
        if s == 0.0 || !s.is_finite() {
            return Err(Error::ImpossibleData { t });
        }
        r.row_mut(t).iter_mut().for_each(|x| *x /= s);
    }

    let mut v = Array2::<f64>::zeros((n, n));
    let mut xi = opts.keep_pairwise.then(|| Vec::with_capacity(t_len.saturating_sub(1)));
    let mut w = Array2::<f64>::zeros((n, n));
    for t in 1..t_len {
        let mut total = 0.0;
        for i in 0..n {
            let ci = c[[t, i]];
            for j in 0..n {
                let x = if ci == 0.0 { 0.0 } else { a[[t - 1, j]] * phi[[i, j]] * ci };
                w[[i, j]] = x;
                total += x;
            }
        }
        if total == 0.0 || !total.is_finite() {
            return Err(Error::ImpossibleData { t });
        }
        w.mapv_inplace(|x| x / total);
        v += &w;
        if let Some(list) = xi.as_mut() {
            list.push(w.clone());
        }
    }

    Ok(Posteriors {
        r,
        v,
        xi,
        log_marginal,
    })
}
