use super::FitResult;
use crate::error::{Error, Result};
use crate::model::GroupedData;

/// Inclusive range of 0-based time indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub leaders: Vec<usize>,
    pub segments: Vec<Segment>,
}

/// Most probable leader per group, and the segments they induce: a new
/// segment starts whenever the decoded leader was not in the previous
/// group.
pub fn decode_leaders(result: &FitResult, data: &GroupedData) -> Result<Decoded> {
    let r = &result.posteriors.r;
    if r.dim() != (data.len(), data.n()) {
        return Err(Error::DimensionMismatch("fit does not match the grouped data".into()));
    }
    let leaders: Vec<usize> = r
        .rows()
        .into_iter()
        .map(|row| {
            // first maximum wins ties
            let mut best = 0;
            for (i, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect();
    Ok(Decoded {
        segments: segments_for(&leaders, data),
        leaders,
    })
}

pub fn segments_for(leaders: &[usize], data: &GroupedData) -> Vec<Segment> {
    let mut segments: Vec<Segment> = Vec::new();
    for (t, &l) in leaders.iter().enumerate() {
        if t == 0 || data.get(t - 1, l) == 0 {
            segments.push(Segment { start: t, end: t });
        } else if let Some(last) = segments.last_mut() {
            last.end = t;
        }
    }
    segments
}
