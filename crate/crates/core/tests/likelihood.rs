mod common;

use common::{for_each_sequence, literal_joint_log_likelihood, random_instance};
use hubnet::model::{
    complete_log_likelihood, emission_log_prob, link_probabilities, transition_log_prob, GroupedData,
    LeaderSequence,
};
use hubnet::simulate::{replicate_rng, simulate_trajectory};
use rand::Rng;

#[test]
fn matches_literal_joint_formula() {
    for k in 0..30 {
        let (params, data) = random_instance(17, k, 4, 6);
        let mut rng = replicate_rng(18, k);
        // leaders drawn from each group so the value is finite
        let z: Vec<usize> = data
            .rows()
            .map(|row| {
                let members: Vec<usize> = (0..4).filter(|&i| row[i] == 1).collect();
                members[rng.random_range(0..members.len())]
            })
            .collect();
        let ours = complete_log_likelihood(&LeaderSequence::new(z.clone()), &data, &params).unwrap();
        let literal = literal_joint_log_likelihood(&z, &data, &params);
        assert!((ours - literal).abs() < 1e-10, "{ours} vs {literal}");
    }
}

#[test]
fn equals_sum_of_transition_and_emission_terms() {
    for k in 0..20 {
        let (params, _) = random_instance(21, k, 5, 8);
        let (z, data) = simulate_trajectory(&params, 8, &mut replicate_rng(22, k)).unwrap();
        let probs = link_probabilities(&params).unwrap();
        let zs = z.as_slice();
        let mut sum = 0.0;
        for t in 0..data.len() {
            let prev = t.checked_sub(1);
            sum += transition_log_prob(prev.map(|s| zs[s]), zs[t], &probs);
            sum += emission_log_prob(data.row(t), prev.map(|s| data.row(s)), zs[t], &probs).unwrap();
        }
        let total = complete_log_likelihood(&z, &data, &params).unwrap();
        assert!((sum - total).abs() < 1e-12);
    }
}

#[test]
fn single_group_reduces_to_hub_model() {
    let (params, data) = random_instance(5, 0, 4, 1);
    let probs = link_probabilities(&params).unwrap();
    let leader = (0..4).find(|&i| data.get(0, i) == 1).unwrap();
    let mut expected = probs.rho[leader].ln();
    for j in 0..4 {
        if j == leader {
            continue;
        }
        let a = probs.a[[leader, j]];
        expected += if data.get(0, j) == 1 { a.ln() } else { (1.0 - a).ln() };
    }
    let ll = complete_log_likelihood(&LeaderSequence::new(vec![leader]), &data, &params).unwrap();
    assert!((ll - expected).abs() < 1e-12);
}

#[test]
fn joint_distribution_normalizes() {
    // n = 2, T = 2: sum over all 2^2 leader sequences and all 2^4 matrices,
    // including matrices with empty rows (they carry zero probability).
    for k in 0..5 {
        let (params, _) = random_instance(9, k, 2, 1);
        let probs = link_probabilities(&params).unwrap();
        let mut total = 0.0;
        for cells in 0u8..16 {
            let g: Vec<Vec<u8>> = (0..2)
                .map(|t| (0..2).map(|j| (cells >> (2 * t + j)) & 1).collect())
                .collect();
            for_each_sequence(2, 2, |z| {
                let mut ll = 0.0;
                for t in 0..2usize {
                    let prev = t.checked_sub(1);
                    ll += transition_log_prob(prev.map(|s| z[s]), z[t], &probs);
                    ll += emission_log_prob(&g[t], prev.map(|s| g[s].as_slice()), z[t], &probs).unwrap();
                }
                total += ll.exp();
            });
            if g.iter().all(|row| row.iter().any(|&x| x == 1)) {
                let data = GroupedData::new(g.clone(), None, None).unwrap();
                let mut direct = 0.0;
                for_each_sequence(2, 2, |z| {
                    direct += complete_log_likelihood(&LeaderSequence::new(z.to_vec()), &data, &params)
                        .unwrap()
                        .exp();
                });
                assert!(direct > 0.0);
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "total probability {total}");
    }
}

#[test]
fn invariant_to_u_shift() {
    for k in 0..10 {
        let (params, _) = random_instance(31, k, 4, 1);
        let (z, data) = simulate_trajectory(&params, 12, &mut replicate_rng(32, k)).unwrap();
        let mut shifted = params.clone();
        shifted.shift_u(7.25 - k as f64);
        let a = complete_log_likelihood(&z, &data, &params).unwrap();
        let b = complete_log_likelihood(&z, &data, &shifted).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
