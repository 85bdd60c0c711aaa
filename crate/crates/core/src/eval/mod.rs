//! Task-agnostic grading: the comparative heuristic over an oracle scorer,
//! oracle rankings and the metrics used for every role.

mod heuristic;
mod metrics;
mod task;

pub use heuristic::{compare, oracle_rank, rank_scores, OracleHeuristic, Orientation};
pub use metrics::{grade_ranking, hit_at_k, is_permutation, mean, pairwise_agreement, pass_rate, RankingResult};
pub use task::{RankingTask, ShotMode, Verdict, VerifierTask};
