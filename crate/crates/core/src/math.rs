//! Scalar helpers for logistic and log-sum-exp arithmetic.

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`; `ln(1 - σ(x))` is `log_sigmoid(-x)`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

/// `σ(x)(1 - σ(x))`, accurate in both tails.
#[inline]
pub fn sigmoid_slope(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Log normalizers of the leader distributions for a given `(u, α)`.
///
/// `first` is `ln Σ_k e^{u_k}`; `column[j]` is `ln Σ_k e^{u_k + α·1{k=j}}`,
/// the normalizer of column `j` of the transition matrix. Runs in O(n).
#[derive(Debug, Clone)]
pub struct LeaderNormalizers {
    pub first: f64,
    pub column: Vec<f64>,
}

impl LeaderNormalizers {
    pub fn new(u: &[f64], alpha: f64) -> Self {
        let m = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = u.iter().map(|&x| (x - m).exp()).collect();
        let total: f64 = scaled.iter().sum();
        let column = u
            .iter()
            .enumerate()
            .map(|(j, &uj)| {
                let mut rest = total - scaled[j];
                // cancellation when u_j dominates; recompute the remainder
                if rest < 1e-3 * total {
                    rest = scaled
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &e)| e)
                        .sum();
                }
                m + log_add_exp(rest.ln(), uj + alpha - m)
            })
            .collect();
        Self {
            first: m + total.ln(),
            column,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_tails_stay_finite() {
        assert!(log_sigmoid(-800.0).is_finite());
        assert_eq!(log_sigmoid(800.0), 0.0);
        assert!((sigmoid(1.0) - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert!(sigmoid_slope(700.0) > 0.0);
        assert!((sigmoid_slope(0.0) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn normalizers_match_direct_sums() {
        let u = [0.3, -1.2, 2.0, 0.0];
        let alpha = 1.7;
        let norm = LeaderNormalizers::new(&u, alpha);
        assert!((norm.first - log_sum_exp(&u)).abs() < 1e-14);
        for j in 0..u.len() {
            let mut shifted = u.to_vec();
            shifted[j] += alpha;
            assert!((norm.column[j] - log_sum_exp(&shifted)).abs() < 1e-14);
        }
    }

    #[test]
    fn normalizers_with_dominant_entry_and_negative_alpha() {
        let u = [40.0, 0.0, -1.0];
        let alpha = -50.0;
        let norm = LeaderNormalizers::new(&u, alpha);
        let direct = log_sum_exp(&[40.0 - 50.0, 0.0, -1.0]);
        assert!((norm.column[0] - direct).abs() < 1e-12);
    }
}
