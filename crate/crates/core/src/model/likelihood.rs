use super::{link_probabilities, GroupedData, LeaderSequence, LinkedProbs, ModelParams, Regime};
use crate::error::{Error, Result};

/// `ln P(G^t | z^t = leader, G^{t-1})`.
///
/// With no previous group, or a leader from outside it, every other node
/// joins through `A`. Otherwise previous members stay through `B` and
/// previous outsiders join through `C`. A leader outside its own group has
/// probability zero.
pub fn emission_log_prob(
    group: &[u8],
    previous: Option<&[u8]>,
    leader: usize,
    probs: &LinkedProbs,
) -> Result<f64> {
    let n = probs.n();
    if group.len() != n || previous.is_some_and(|p| p.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "group vectors must have length {n}"
        )));
    }
    if leader >= n {
        return Err(Error::DimensionMismatch(format!("leader {leader} out of range for n = {n}")));
    }
    Ok(emission_unchecked(group, previous, leader, probs))
}

#[inline]
pub(crate) fn emission_unchecked(
    group: &[u8],
    previous: Option<&[u8]>,
    leader: usize,
    probs: &LinkedProbs,
) -> f64 {
    if group[leader] == 0 {
        return f64::NEG_INFINITY;
    }
    let mut total = 0.0;
    match previous {
        Some(prev) if prev[leader] == 1 => {
            for (j, (&g, &p)) in group.iter().zip(prev).enumerate() {
                if j == leader {
                    continue;
                }
                let regime = if p == 1 { Regime::Stay } else { Regime::Join };
                total += if g == 1 {
                    probs.log_include(regime, leader, j)
                } else {
                    probs.log_exclude(regime, leader, j)
                };
            }
        }
        _ => {
            for (j, &g) in group.iter().enumerate() {
                if j == leader {
                    continue;
                }
                total += if g == 1 {
                    probs.log_include(Regime::Fresh, leader, j)
                } else {
                    probs.log_exclude(Regime::Fresh, leader, j)
                };
            }
        }
    }
    total
}

/// `ln ρ_current` for the first group, `ln Φ[current][previous]` after.
pub fn transition_log_prob(previous: Option<usize>, current: usize, probs: &LinkedProbs) -> f64 {
    match previous {
        None => probs.log_rho(current),
        Some(j) => probs.log_phi(current, j),
    }
}

/// Joint log-likelihood `ln P(S, G)` of a leader sequence and the groups.
///
/// Returns `-∞` (not an error) if some leader is outside its own group.
pub fn complete_log_likelihood(
    leaders: &LeaderSequence,
    data: &GroupedData,
    params: &ModelParams,
) -> Result<f64> {
    if leaders.len() != data.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} leaders for {} groups",
            leaders.len(),
            data.len()
        )));
    }
    if data.n() != params.n() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} nodes, params have {}",
            data.n(),
            params.n()
        )));
    }
    if let Some(&z) = leaders.as_slice().iter().find(|&&z| z >= data.n()) {
        return Err(Error::DimensionMismatch(format!("leader {z} out of range")));
    }
    let probs = link_probabilities(params)?;
    let z = leaders.as_slice();
    let mut total = 0.0;
    for t in 0..data.len() {
        let prev_leader = t.checked_sub(1).map(|s| z[s]);
        let prev_group = t.checked_sub(1).map(|s| data.row(s));
        total += transition_log_prob(prev_leader, z[t], &probs);
        total += emission_unchecked(data.row(t), prev_group, z[t], &probs);
        if total == f64::NEG_INFINITY {
            return Ok(total);
        }
    }
    Ok(total)
}
