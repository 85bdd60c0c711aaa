use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Whether the oracle-best candidate `oracle_order[0]` is among the first
/// `k` entries of `agent_order`.
pub fn hit_at_k(agent_order: &[usize], oracle_order: &[usize], k: usize) -> Result<bool> {
    let n = oracle_order.len();
    if k == 0 || k > n {
        return Err(Error::BadK { k, n });
    }
    let best = oracle_order[0];
    Ok(agent_order.iter().take(k).any(|&c| c == best))
}

/// Fraction of unordered candidate pairs placed in the same relative order by
/// both rankings. Only candidates present in both are considered; with fewer
/// than two shared candidates the result is 1.
pub fn pairwise_agreement(agent_order: &[usize], oracle_order: &[usize]) -> f64 {
    let pos = |order: &[usize]| {
        let mut m = BTreeMap::new();
        for (p, &c) in order.iter().enumerate() {
            m.entry(c).or_insert(p);
        }
        m
    };
    let a = pos(agent_order);
    let o = pos(oracle_order);
    let shared: Vec<usize> = o.keys().copied().filter(|c| a.contains_key(c)).collect();
    let mut pairs = 0usize;
    let mut agree = 0usize;
    for (x, &i) in shared.iter().enumerate() {
        for &j in &shared[x + 1..] {
            pairs += 1;
            if (a[&i] < a[&j]) == (o[&i] < o[&j]) {
                agree += 1;
            }
        }
    }
    if pairs == 0 {
        1.0
    } else {
        agree as f64 / pairs as f64
    }
}

/// Fraction of `true` outcomes.
pub fn pass_rate(outcomes: &[bool]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(outcomes.iter().filter(|&&b| b).count() as f64 / outcomes.len() as f64)
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &c in order {
        if c >= n || seen[c] {
            return false;
        }
        seen[c] = true;
    }
    true
}

/// A graded ranking answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub agent_order: Vec<usize>,
    pub oracle_order: Vec<usize>,
    /// `k -> hit@k` for `k = 1..=n`.
    pub hit_at: BTreeMap<usize, bool>,
    pub pairwise_agreement: f64,
    /// The agent's order was not a permutation of the candidates.
    pub malformed: bool,
}

impl RankingResult {
    pub fn hit(&self, k: usize) -> Option<bool> {
        self.hit_at.get(&k).copied()
    }
}

/// Grades an agent ordering against the oracle ordering. A malformed order
/// misses at every `k`; its agreement covers only the valid, first-seen
/// candidates it mentions, and is 0 when fewer than two of them remain.
pub fn grade_ranking(agent_order: &[usize], oracle_order: &[usize]) -> RankingResult {
    let n = oracle_order.len();
    let malformed = !is_permutation(agent_order, n);
    let hit_at = (1..=n)
        .map(|k| {
            let hit = !malformed && hit_at_k(agent_order, oracle_order, k).unwrap_or(false);
            (k, hit)
        })
        .collect();
    let mut valid: Vec<usize> = Vec::new();
    for &c in agent_order {
        if c < n && !valid.contains(&c) {
            valid.push(c);
        }
    }
    let pairwise_agreement = if malformed && valid.len() < 2 {
        0.0
    } else {
        pairwise_agreement(&valid, oracle_order)
    };
    RankingResult {
        agent_order: agent_order.to_vec(),
        oracle_order: oracle_order.to_vec(),
        hit_at,
        pairwise_agreement,
        malformed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_examples() {
        let oracle = [2, 0, 1, 3];
        assert!(hit_at_k(&oracle, &oracle, 1).unwrap());
        let agent = [0, 1, 3, 2];
        assert!(!hit_at_k(&agent, &oracle, 3).unwrap());
        assert!(hit_at_k(&agent, &oracle, 4).unwrap());
        assert_eq!(hit_at_k(&agent, &oracle, 0), Err(Error::BadK { k: 0, n: 4 }));
        assert_eq!(hit_at_k(&agent, &oracle, 5), Err(Error::BadK { k: 5, n: 4 }));
    }

    #[test]
    fn agreement_examples() {
        let o = [0, 1, 2, 3];
        assert_eq!(pairwise_agreement(&o, &o), 1.0);
        assert_eq!(pairwise_agreement(&[3, 2, 1, 0], &o), 0.0);
        // One adjacent swap flips exactly one of six pairs.
        assert!((pairwise_agreement(&[1, 0, 2, 3], &o) - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn pass_rate_examples() {
        assert_eq!(pass_rate(&[true, true]).unwrap(), 1.0);
        assert_eq!(pass_rate(&[true, false, false, true]).unwrap(), 0.5);
        assert_eq!(pass_rate(&[]), Err(Error::EmptySet));
    }

    #[test]
    fn malformed_orders() {
        let o = [1, 0, 2];
        let r = grade_ranking(&[1, 1, 2], &o);
        assert!(r.malformed);
        assert!(r.hit_at.values().all(|h| !h));
        let r = grade_ranking(&[1, 2], &o);
        assert!(r.malformed);
        assert_eq!(r.pairwise_agreement, 1.0);
        let r = grade_ranking(&[], &o);
        assert!(r.malformed && r.hit(1) == Some(false));
        assert_eq!(r.pairwise_agreement, 0.0);
        let r = grade_ranking(&[1, 0, 2], &o);
        assert!(!r.malformed && r.hit(1) == Some(true) && r.pairwise_agreement == 1.0);
    }
}
