use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::Result;

/// Which direction of an oracle score is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    HigherBetter,
    LowerBetter,
}

impl Orientation {
    /// Maps a raw score so that larger is always better.
    pub fn orient(self, score: f64) -> f64 {
        match self {
            Orientation::HigherBetter => score,
            Orientation::LowerBetter => -score,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::HigherBetter => Orientation::LowerBetter,
            Orientation::LowerBetter => Orientation::HigherBetter,
        }
    }
}

/// Ground-truth-aware scorer of a candidate solution.
///
/// Implementations must accept every well-formed candidate of their task.
pub trait OracleHeuristic {
    type Candidate;
    type Gold: ?Sized;
    type Problem: ?Sized;

    fn score(&self, candidate: &Self::Candidate, gold: &Self::Gold, problem: &Self::Problem) -> Result<f64>;

    fn orientation(&self) -> Orientation;
}

/// `0` when the first candidate is at least as good as the second, `1`
/// otherwise. Ties go to the first argument.
pub fn compare<H: OracleHeuristic>(
    f: &H,
    first: &H::Candidate,
    second: &H::Candidate,
    gold: &H::Gold,
    problem: &H::Problem,
) -> Result<u8> {
    let o = f.orientation();
    let a = o.orient(f.score(first, gold, problem)?);
    let b = o.orient(f.score(second, gold, problem)?);
    Ok(if a >= b { 0 } else { 1 })
}

/// Candidate indices, best first. Equal scores keep their input order.
pub fn oracle_rank<H: OracleHeuristic>(
    f: &H,
    candidates: &[H::Candidate],
    gold: &H::Gold,
    problem: &H::Problem,
) -> Result<Vec<usize>> {
    let scores = candidates
        .iter()
        .map(|c| f.score(c, gold, problem))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_scores(&scores, f.orientation()))
}

/// Stable best-first ordering of precomputed scores. NaN sorts last.
pub fn rank_scores(scores: &[f64], orientation: Orientation) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (orientation.orient(scores[i]), orientation.orient(scores[j]));
        match (a.is_nan(), b.is_nan()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => b.partial_cmp(&a).unwrap_or(Ordering::Equal),
        }
    });
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Scores are the candidates themselves.
    struct Identity(Orientation);

    impl OracleHeuristic for Identity {
        type Candidate = f64;
        type Gold = ();
        type Problem = ();
        fn score(&self, c: &f64, _: &(), _: &()) -> Result<f64> {
            Ok(*c)
        }
        fn orientation(&self) -> Orientation {
            self.0
        }
    }

    #[test]
    fn compare_cases() {
        let f = Identity(Orientation::HigherBetter);
        assert_eq!(compare(&f, &3.0, &1.0, &(), &()).unwrap(), 0);
        assert_eq!(compare(&f, &1.0, &3.0, &(), &()).unwrap(), 1);
        assert_eq!(compare(&f, &2.0, &2.0, &(), &()).unwrap(), 0);
        let g = Identity(Orientation::LowerBetter);
        assert_eq!(compare(&g, &3.0, &1.0, &(), &()).unwrap(), 1);
        assert_eq!(compare(&g, &2.0, &2.0, &(), &()).unwrap(), 0);
    }

    #[test]
    fn rank_examples() {
        let f = Identity(Orientation::HigherBetter);
        assert_eq!(oracle_rank(&f, &[5.0, 9.0, 1.0], &(), &()).unwrap(), vec![1, 0, 2]);
        assert_eq!(oracle_rank(&f, &[4.0, 4.0, 4.0], &(), &()).unwrap(), vec![0, 1, 2]);
        let g = Identity(Orientation::LowerBetter);
        assert_eq!(oracle_rank(&g, &[5.0, 9.0, 1.0], &(), &()).unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn nan_sorts_last() {
        assert_eq!(rank_scores(&[f64::NAN, 1.0, 2.0], Orientation::HigherBetter), vec![2, 1, 0]);
    }

    #[test]
    fn signed_zeros_tie() {
        assert_eq!(rank_scores(&[-0.0, 0.0], Orientation::HigherBetter), vec![0, 1]);
        assert_eq!(rank_scores(&[0.0, -0.0], Orientation::LowerBetter), vec![0, 1]);
    }
}
