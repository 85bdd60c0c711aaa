//! Interactive fitness planning.
//!
//! A simulated user holds a hidden preference vector over an exercise bank.
//! Each iteration the agent proposes a reps vector, the user checks it against
//! their constraints and, when it is admissible, answers with a satisfaction
//! score mixing preference fit, closeness to the constrained optimum and
//! exercise reuse. Emergencies (injuries, lost time) may tighten the
//! constraints mid-episode.

mod episode;
mod feasibility;
mod knapsack;
mod render;
mod sample;
mod score;
mod tasks;
mod types;

pub use episode::{run_episode, step, EpisodeOutcome, FitnessEnv, SolverMetrics};
pub use feasibility::{check_feasibility, check_under, FeasibilityReport};
pub use knapsack::{desired_plan, desired_plan_under};
pub use render::{describe_constraints, describe_emergency, describe_plan, describe_profile};
pub use sample::{perturb_within, random_feasible_plan, sample_profile};
pub use score::{feedback_score, overlap_score, plan_score, rep_score};
pub use tasks::{
    build_heuristic_task, build_verifier_task, FitnessRankingTask, FitnessVerifierTask,
    FitnessWorld, HistoryEntry, SatisfactionHeuristic, TaskMode, HEURISTIC_RETRIES,
};
pub use types::{
    ActiveConstraints, Category, EmergencyCondition, EmergencyEffect, EpisodeConfig,
    EpisodeState, ExerciseSpec, Feedback, FitnessPlan, Intensity, Stamina, UserProfile,
};
