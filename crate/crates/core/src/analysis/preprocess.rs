use super::jaccard;
use crate::error::{Error, Result};
use crate::model::GroupedData;

/// One observation time with one or more candidate groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub time: String,
    pub candidates: Vec<Vec<u8>>,
}

/// Time-ordered observation events over a labelled node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecords {
    labels: Vec<String>,
    events: Vec<RawEvent>,
}

impl RawRecords {
    pub fn new(labels: Vec<String>, events: Vec<RawEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidData("no events".into()));
        }
        let n = labels.len();
        for (e, event) in events.iter().enumerate() {
            if event.candidates.is_empty() {
                return Err(Error::InvalidData(format!("event {e} has no groups")));
            }
            for group in &event.candidates {
                if group.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "event {e}: group of length {} for {n} labels",
                        group.len()
                    )));
                }
                if group.iter().all(|&x| x == 0) {
                    return Err(Error::InvalidData(format!("event {e} has an empty group")));
                }
            }
        }
        Ok(Self { labels, events })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn events(&self) -> &[RawEvent] {
        &self.events
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    pub data: GroupedData,
    /// Labels of nodes that never appear in a retained group.
    pub removed: Vec<String>,
    /// Index of the retained candidate for each event.
    pub retained: Vec<usize>,
}

fn size(group: &[u8]) -> usize {
    group.iter().map(|&x| x as usize).sum()
}

/// Reduces each event to one group and drops nodes that never appear.
///
/// The first event keeps its largest candidate. Later events keep the
/// candidate with the highest Jaccard index against the previously kept
/// group, preferring the larger group and then the first listed on ties.
pub fn preprocess(raw: &RawRecords) -> Result<Preprocessed> {
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(raw.events.len());
    let mut retained = Vec::with_capacity(raw.events.len());
    for event in &raw.events {
        let pick = match rows.last() {
            None => {
                let mut best = 0;
                for (k, g) in event.candidates.iter().enumerate() {
                    if size(g) > size(&event.candidates[best]) {
                        best = k;
                    }
                }
                best
            }
            Some(prev) => {
                let mut best = 0;
                let mut best_key = (jaccard(prev, &event.candidates[0])?, size(&event.candidates[0]));
                for (k, g) in event.candidates.iter().enumerate().skip(1) {
                    let key = (jaccard(prev, g)?, size(g));
                    if key.0 > best_key.0 || (key.0 == best_key.0 && key.1 > best_key.1) {
                        best = k;
                        best_key = key;
                    }
                }
                best
            }
        };
        retained.push(pick);
        rows.push(event.candidates[pick].clone());
    }

    let times = raw.events.iter().map(|e| e.time.clone()).collect();
    let full = GroupedData::new(rows, Some(raw.labels.clone()), Some(times))?;
    let counts = full.appearance_counts();
    let keep: Vec<usize> = (0..full.n()).filter(|&i| counts[i] > 0).collect();
    let removed = (0..full.n())
        .filter(|&i| counts[i] == 0)
        .map(|i| raw.labels[i].clone())
        .collect();
    Ok(Preprocessed {
        data: full.select_columns(&keep)?,
        removed,
        retained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i}")).collect()
    }

    fn event(time: &str, candidates: Vec<Vec<u8>>) -> RawEvent {
        RawEvent {
            time: time.into(),
            candidates,
        }
    }

    #[test]
    fn single_candidates_pass_through_minus_empty_columns() {
        let raw = RawRecords::new(
            labels(4),
            vec![event("1", vec![vec![1, 0, 1, 0]]), event("2", vec![vec![0, 0, 1, 0]])],
        )
        .unwrap();
        let out = preprocess(&raw).unwrap();
        assert_eq!(out.data.n(), 2);
        assert_eq!(out.data.row(0), &[1, 1]);
        assert_eq!(out.data.row(1), &[0, 1]);
        assert_eq!(out.removed, vec!["n1".to_string(), "n3".to_string()]);
        assert_eq!(out.retained, vec![0, 0]);
    }

    #[test]
    fn candidate_equal_to_previous_is_kept() {
        let raw = RawRecords::new(
            labels(4),
            vec![
                event("1", vec![vec![1, 1, 0, 0]]),
                event("2", vec![vec![0, 0, 1, 1], vec![1, 1, 0, 0]]),
            ],
        )
        .unwrap();
        assert_eq!(preprocess(&raw).unwrap().retained, vec![0, 1]);
    }

    #[test]
    fn first_event_keeps_largest() {
        let raw = RawRecords::new(
            labels(4),
            vec![event("1", vec![vec![1, 0, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 1, 1]])],
        )
        .unwrap();
        assert_eq!(preprocess(&raw).unwrap().retained, vec![1]);
    }

    #[test]
    fn jaccard_tie_prefers_larger_group() {
        // previous {0,1,2,3}; {0} scores 1/4, {0,1,4,5,6,7} scores 2/8 = 1/4
        let raw = RawRecords::new(
            labels(8),
            vec![
                event("1", vec![vec![1, 1, 1, 1, 0, 0, 0, 0]]),
                event("2", vec![vec![1, 0, 0, 0, 0, 0, 0, 0], vec![1, 1, 0, 0, 1, 1, 1, 1]]),
                event("3", vec![vec![1, 1, 0, 0, 1, 1, 1, 1], vec![0, 0, 1, 1, 0, 0, 0, 0]]),
            ],
        )
        .unwrap();
        let out = preprocess(&raw).unwrap();
        assert_eq!(out.retained, vec![0, 1, 0]);
        assert!(out.removed.is_empty());
    }

    #[test]
    fn empty_candidate_rejected() {
        assert!(RawRecords::new(labels(2), vec![event("1", vec![vec![0, 0]])]).is_err());
    }
}
