use crate::error::{Error, Result};

/// A time series of observed groups over a fixed node set, stored as a
/// row-major `T × n` binary matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedData {
    n: usize,
    cells: Vec<u8>,
    labels: Vec<String>,
    timestamps: Option<Vec<String>>,
}

impl GroupedData {
    /// Builds data from one binary row per group. Labels default to
    /// `v1..vn` when not given.
    pub fn new(
        rows: Vec<Vec<u8>>,
        labels: Option<Vec<String>>,
        timestamps: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = match (&labels, rows.first()) {
            (Some(l), _) => l.len(),
            (None, Some(r)) => r.len(),
            (None, None) => return Err(Error::InvalidData("no groups".into())),
        };
        let mut cells = Vec::with_capacity(rows.len() * n);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "group {t} has {} entries, expected {n}",
                    row.len()
                )));
            }
            cells.extend_from_slice(row);
        }
        Self::from_cells(n, cells, labels, timestamps)
    }

    pub fn from_cells(
        n: usize,
        cells: Vec<u8>,
        labels: Option<Vec<String>>,
        timestamps: Option<Vec<String>>,
    ) -> Result<Self> {
        if n == 0 || cells.is_empty() {
            return Err(Error::InvalidData("no groups or no nodes".into()));
        }
        if cells.len() % n != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} cells is not a multiple of n = {n}",
                cells.len()
            )));
        }
        let t_len = cells.len() / n;
        for (t, row) in cells.chunks(n).enumerate() {
            if let Some(&bad) = row.iter().find(|&&x| x > 1) {
                return Err(Error::InvalidData(format!(
                    "group {t} has non-binary entry {bad}"
                )));
            }
            if row.iter().all(|&x| x == 0) {
                return Err(Error::InvalidData(format!("group {t} is empty")));
            }
        }
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {n} nodes",
                    l.len()
                )))
            }
            Some(l) => l,
            None => (1..=n).map(|i| format!("v{i}")).collect(),
        };
        if let Some(ts) = &timestamps {
            if ts.len() != t_len {
                return Err(Error::DimensionMismatch(format!(
                    "{} timestamps for {t_len} groups",
                    ts.len()
                )));
            }
            check_monotone(ts)?;
        }
        Ok(Self {
            n,
            cells,
            labels,
            timestamps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of groups `T`.
    pub fn len(&self) -> usize {
        self.cells.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn row(&self, t: usize) -> &[u8] {
        &self.cells[t * self.n..(t + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u8]> {
        self.cells.chunks(self.n)
    }

    #[inline]
    pub fn get(&self, t: usize, i: usize) -> u8 {
        self.cells[t * self.n + i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    /// Number of groups each node appears in.
    pub fn appearance_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n];
        for row in self.rows() {
            for (c, &g) in counts.iter_mut().zip(row) {
                *c += g as usize;
            }
        }
        counts
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Result<Self> {
        if keep.iter().any(|&i| i >= self.n) {
            return Err(Error::DimensionMismatch("column index out of range".into()));
        }
        let cells = self
            .rows()
            .flat_map(|row| keep.iter().map(move |&i| row[i]))
            .collect();
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        Self::from_cells(keep.len(), cells, Some(labels), self.timestamps.clone())
    }
}

/// Numeric tags are compared as numbers, anything else lexicographically
/// (ISO dates sort correctly that way).
fn check_monotone(ts: &[String]) -> Result<()> {
    let numeric: Option<Vec<f64>> = ts.iter().map(|s| s.trim().parse().ok()).collect();
    let ordered = match numeric {
        Some(v) => v.windows(2).all(|w| w[0] <= w[1]),
        None => ts.windows(2).all(|w| w[0] <= w[1]),
    };
    if ordered {
        Ok(())
    } else {
        Err(Error::InvalidData("timestamps are not monotone".into()))
    }
}

/// The latent leader of each group, as 0-based node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderSequence(Vec<usize>);

impl LeaderSequence {
    pub fn new(leaders: Vec<usize>) -> Self {
        Self(leaders)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One-hot `T × n` indicator rows.
    pub fn indicator(&self, n: usize) -> Vec<Vec<u8>> {
        self.0
            .iter()
            .map(|&z| (0..n).map(|i| u8::from(i == z)).collect())
            .collect()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_group() {
        let err = GroupedData::new(vec![vec![1, 0], vec![0, 0]], None, None).unwrap_err();
        assert!(matches!(err, Error::InvalidData(_)));
    }

    #[test]
    fn rejects_non_binary() {
        assert!(GroupedData::new(vec![vec![1, 2]], None, None).is_err());
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(GroupedData::new(vec![vec![1, 0], vec![1]], None, None).is_err());
    }

    #[test]
    fn timestamps_must_be_monotone() {
        let rows = vec![vec![1, 0], vec![0, 1]];
        let ok = GroupedData::new(rows.clone(), None, Some(vec!["9".into(), "10".into()]));
        assert!(ok.is_ok());
        let bad = GroupedData::new(rows, None, Some(vec!["2009-02-01".into(), "2009-01-31".into()]));
        assert!(bad.is_err());
    }

    #[test]
    fn select_columns_keeps_labels() {
        let g = GroupedData::new(
            vec![vec![1, 0, 1], vec![0, 1, 1]],
            Some(vec!["a".into(), "b".into(), "c".into()]),
            None,
        )
        .unwrap();
        let s = g.select_columns(&[2, 0]).unwrap();
        assert_eq!(s.labels(), &["c".to_string(), "a".to_string()]);
        assert_eq!(s.row(1), &[1, 0]);
    }
}
