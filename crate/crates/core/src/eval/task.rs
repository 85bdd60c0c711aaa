use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::heuristic::{rank_scores, Orientation};

/// How much worked context accompanies a verifier or ranking query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShotMode {
    ZeroShot,
    FewShot,
    OneShot,
}

/// N rendered candidates to be ordered best-first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTask {
    pub problem_text: String,
    pub candidates: Vec<String>,
    /// Few-shot or one-shot material shown before the query.
    pub context: Option<String>,
    /// Hidden from agents.
    pub oracle_scores: Vec<f64>,
    pub orientation: Orientation,
}

impl RankingTask {
    pub fn oracle_order(&self) -> Vec<usize> {
        rank_scores(&self.oracle_scores, self.orientation)
    }
}

/// A verifier's judgement of one plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// The plan satisfies every constraint.
    pub feasible: bool,
    /// For tasks that also ask about optimality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<bool>,
}

/// One plan to be judged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierTask {
    pub problem_text: String,
    pub candidate_text: String,
    pub context: Option<String>,
    /// Whether the verifier must also judge optimality.
    pub asks_optimality: bool,
    /// Hidden from agents.
    pub oracle_verdict: Verdict,
}
