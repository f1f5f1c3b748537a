//! Test-only oracles. Nothing here calls the forward-backward code.
#![allow(dead_code)]

use hubnet::model::{complete_log_likelihood, GroupedData, LeaderSequence, ModelParams};
use hubnet::simulate::replicate_rng;
use ndarray::Array2;
use rand::Rng;

pub struct Enumerated {
    pub r: Array2<f64>,
    /// `xi[s][[i, j]] = P(z^{s+1} = i, z^s = j | G)`.
    pub xi: Vec<Array2<f64>>,
    pub log_marginal: f64,
}

/// Calls `f` with every leader sequence in `{0..n}^t_len`.
pub fn for_each_sequence(n: usize, t_len: usize, mut f: impl FnMut(&[usize])) {
    let mut z = vec![0usize; t_len];
    loop {
        f(&z);
        let mut k = 0;
        loop {
            if k == t_len {
                return;
            }
            z[k] += 1;
            if z[k] < n {
                break;
            }
            z[k] = 0;
            k += 1;
        }
    }
}

/// Exact posteriors by summing `P(z, G)` over all `n^T` leader sequences.
pub fn enumerate_posteriors(data: &GroupedData, params: &ModelParams) -> Enumerated {
    let (n, t_len) = (data.n(), data.len());
    let mut joint = Vec::new();
    for_each_sequence(n, t_len, |z| {
        let ll = complete_log_likelihood(&LeaderSequence::new(z.to_vec()), data, params).unwrap();
        joint.push((z.to_vec(), ll));
    });
    let m = joint.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = joint.iter().map(|x| (x.1 - m).exp()).sum();
    let log_marginal = m + total.ln();
    let mut r = Array2::zeros((t_len, n));
    let mut xi = vec![Array2::zeros((n, n)); t_len.saturating_sub(1)];
    for (z, ll) in &joint {
        let w = (ll - log_marginal).exp();
        for t in 0..t_len {
            r[[t, z[t]]] += w;
            if t > 0 {
                xi[t - 1][[z[t], z[t - 1]]] += w;
            }
        }
    }
    Enumerated { r, xi, log_marginal }
}

fn sigma(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Joint log-likelihood written term by term with the leader indicator
/// matrix `S`, using probability-scale arithmetic.
pub fn literal_joint_log_likelihood(z: &[usize], data: &GroupedData, params: &ModelParams) -> f64 {
    let n = params.n();
    let t_len = data.len();
    let s: Vec<Vec<f64>> = z
        .iter()
        .map(|&l| (0..n).map(|i| if i == l { 1.0 } else { 0.0 }).collect())
        .collect();
    let g = |t: usize, j: usize| data.get(t, j) as f64;
    let u = params.u();
    let zsum: f64 = u.iter().map(|x| x.exp()).sum();
    let rho = |i: usize| u[i].exp() / zsum;
    let phi = |i: usize, j: usize| {
        let num = (u[i] + if i == j { params.alpha } else { 0.0 }).exp();
        let den: f64 = (0..n)
            .map(|k| (u[k] + if k == j { params.alpha } else { 0.0 }).exp())
            .sum();
        num / den
    };
    let link = |i: usize, j: usize, shift: f64| {
        if i == j {
            1.0
        } else {
            sigma(params.theta_at(i, j) + shift)
        }
    };
    // 0·ln 0 := 0 for the diagonal factors
    let xlog = |w: f64, p: f64| if w == 0.0 { 0.0 } else { w * p.ln() };

    let mut total = 0.0;
    for i in 0..n {
        total += xlog(s[0][i], rho(i));
    }
    for t in 1..t_len {
        for i in 0..n {
            for j in 0..n {
                total += xlog(s[t][i] * s[t - 1][j], phi(i, j));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let a = link(i, j, 0.0);
            total += xlog(s[0][i] * g(0, j), a) + xlog(s[0][i] * (1.0 - g(0, j)), 1.0 - a);
        }
    }
    for t in 1..t_len {
        for i in 0..n {
            for j in 0..n {
                let (a, b, c) = (link(i, j, 0.0), link(i, j, params.beta), link(i, j, params.gamma));
                let out = s[t][i] * (1.0 - g(t - 1, i));
                let inside = s[t][i] * g(t - 1, i);
                total += xlog(out * g(t, j), a) + xlog(out * (1.0 - g(t, j)), 1.0 - a);
                total += xlog(inside * g(t - 1, j) * g(t, j), b)
                    + xlog(inside * g(t - 1, j) * (1.0 - g(t, j)), 1.0 - b);
                total += xlog(inside * (1.0 - g(t - 1, j)) * g(t, j), c)
                    + xlog(inside * (1.0 - g(t - 1, j)) * (1.0 - g(t, j)), 1.0 - c);
            }
        }
    }
    total
}

pub fn random_params<R: Rng>(n: usize, rng: &mut R) -> ModelParams {
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut theta = Array2::from_elem((n, n), f64::INFINITY);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(-2.5..2.5);
            theta[[i, j]] = v;
            theta[[j, i]] = v;
        }
    }
    ModelParams::new(
        u,
        theta,
        rng.random_range(-1.0..3.0),
        rng.random_range(-1.0..3.0),
        rng.random_range(-2.0..1.0),
    )
    .unwrap()
}

pub fn random_groups<R: Rng>(n: usize, t_len: usize, density: f64, rng: &mut R) -> GroupedData {
    let rows = (0..t_len)
        .map(|_| {
            let mut row: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < density)).collect();
            if row.iter().all(|&x| x == 0) {
                row[rng.random_range(0..n)] = 1;
            }
            row
        })
        .collect();
    GroupedData::new(rows, None, None).unwrap()
}

/// A random instance: parameters plus independently drawn groups.
pub fn random_instance(seed: u64, index: u64, n: usize, t_len: usize) -> (ModelParams, GroupedData) {
    let mut rng = replicate_rng(seed, index);
    let params = random_params(n, &mut rng);
    let data = random_groups(n, t_len, 0.5, &mut rng);
    (params, data)
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
