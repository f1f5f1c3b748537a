use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::GroupedData;

/// `m[[i, j]]` counts the groups containing both `i` and `j`; the
/// diagonal holds appearance counts.
pub fn co_occurrence(data: &GroupedData) -> Array2<u64> {
    let n = data.n();
    let mut m = Array2::<u64>::zeros((n, n));
    for row in data.rows() {
        let members: Vec<usize> = (0..n).filter(|&i| row[i] == 1).collect();
        for &i in &members {
            for &j in &members {
                m[[i, j]] += 1;
            }
        }
    }
    m
}

/// Half weight index `2·m_ij / (m_ii + m_jj)`, with `0/0` taken as 0.
pub fn half_weight_index(data: &GroupedData) -> Array2<f64> {
    let m = co_occurrence(data);
    let n = data.n();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let denom = m[[i, i]] + m[[j, j]];
        if denom == 0 {
            0.0
        } else {
            2.0 * m[[i, j]] as f64 / denom as f64
        }
    })
}

/// Intersection over union of two groups.
pub fn jaccard(first: &[u8], second: &[u8]) -> Result<f64> {
    if first.len() != second.len() {
        return Err(Error::DimensionMismatch(format!(
            "groups of length {} and {}",
            first.len(),
            second.len()
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in first.iter().zip(second) {
        inter += usize::from(a == 1 && b == 1);
        union += usize::from(a == 1 || b == 1);
    }
    if union == 0 {
        return Err(Error::UndefinedInput("Jaccard index of two empty groups".into()));
    }
    Ok(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Allison, Drew, Eliot, Keith, Ross, Sarah at three parties.
    fn birthday() -> GroupedData {
        GroupedData::new(
            vec![
                vec![1, 0, 0, 0, 1, 1],
                vec![0, 1, 1, 0, 1, 1],
                vec![1, 0, 1, 1, 1, 0],
            ],
            Some(["Allison", "Drew", "Eliot", "Keith", "Ross", "Sarah"].map(String::from).to_vec()),
            None,
        )
        .unwrap()
    }

    #[test]
    fn birthday_co_occurrence() {
        let m = co_occurrence(&birthday());
        assert_eq!(m[[4, 5]], 2);
        assert_eq!(m[[4, 4]], 3);
        assert_eq!(m[[0, 0]], 2);
    }

    #[test]
    fn birthday_half_weight() {
        let h = half_weight_index(&birthday());
        assert!((h[[0, 4]] - 0.8).abs() < 1e-15);
        assert_eq!(h[[2, 2]], 1.0);
        assert_eq!(h[[0, 1]], 0.0);
    }

    #[test]
    fn absent_node_has_zero_row() {
        let g = GroupedData::new(vec![vec![1, 0, 1], vec![1, 0, 0]], None, None).unwrap();
        let m = co_occurrence(&g);
        assert!(m.row(1).iter().all(|&x| x == 0));
        assert!(m.column(1).iter().all(|&x| x == 0));
        assert_eq!(half_weight_index(&g)[[1, 1]], 0.0);
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard(&[1, 1, 0], &[1, 1, 0]).unwrap(), 1.0);
        assert_eq!(jaccard(&[1, 0, 0], &[0, 1, 1]).unwrap(), 0.0);
        assert!((jaccard(&[1, 1, 0], &[0, 1, 1]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(jaccard(&[0, 0], &[0, 0]), Err(Error::UndefinedInput(_))));
        assert!(jaccard(&[1], &[1, 0]).is_err());
    }

    fn binary_rows(n: usize, t: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
        prop::collection::vec(prop::collection::vec(0u8..=1, n), t).prop_map(|mut rows| {
            for row in &mut rows {
                if row.iter().all(|&x| x == 0) {
                    row[0] = 1;
                }
            }
            rows
        })
    }

    proptest! {
        #[test]
        fn association_measures_symmetric(rows in binary_rows(6, 12)) {
            let g = GroupedData::new(rows, None, None).unwrap();
            let m = co_occurrence(&g);
            let h = half_weight_index(&g);
            let counts = g.appearance_counts();
            for i in 0..6 {
                prop_assert_eq!(m[[i, i]] as usize, counts[i]);
                for j in 0..6 {
                    prop_assert_eq!(m[[i, j]], m[[j, i]]);
                    prop_assert_eq!(h[[i, j]], h[[j, i]]);
                    prop_assert!((0.0..=1.0).contains(&h[[i, j]]));
                }
            }
        }

        #[test]
        fn jaccard_symmetric_and_one_iff_equal(a in binary_rows(7, 1), b in binary_rows(7, 1)) {
            let (a, b) = (&a[0], &b[0]);
            let x = jaccard(a, b).unwrap();
            prop_assert_eq!(x, jaccard(b, a).unwrap());
            prop_assert_eq!(x == 1.0, a == b);
        }
    }
}
