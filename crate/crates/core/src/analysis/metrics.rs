use ndarray::Array2;

use crate::error::{Error, Result};

/// Root mean squared error over the off-diagonal pairs `i < j`.
pub fn rmse(estimate: &Array2<f64>, truth: &Array2<f64>) -> Result<f64> {
    if estimate.dim() != truth.dim() || estimate.nrows() != estimate.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "matrices of shape {:?} and {:?}",
            estimate.dim(),
            truth.dim()
        )));
    }
    let n = estimate.nrows();
    if n < 2 {
        return Err(Error::DimensionMismatch("need at least two nodes".into()));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = estimate[[i, j]] - truth[[i, j]];
            sum += d * d;
        }
    }
    Ok((sum / (n * (n - 1) / 2) as f64).sqrt())
}

/// Weighted density: mean off-diagonal entry.
pub fn graph_density(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a[[i, j]];
        }
    }
    sum / (n * (n - 1) / 2) as f64
}
