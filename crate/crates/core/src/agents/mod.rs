//! Agent interfaces for every role, plus scripted offline agents.
//!
//! The scripted agents make the whole pipeline runnable without a model:
//! [`RandomAgent`] is the chance baseline, [`OracleAgent`] cheats with access
//! to hidden preferences and oracle scores to bound metrics from above,
//! [`HillClimbAgent`] learns from feedback, and [`ZeroAgent`] always proposes
//! the empty plan.

mod scripted;

pub use scripted::{HillClimbAgent, OracleAgent, RandomAgent, ScriptedKind, ZeroAgent};

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::course::{AssignmentPlan, CourseInstance};
use crate::eval::{RankingTask, Verdict, VerifierTask};
use crate::fitness::{ActiveConstraints, EpisodeConfig, EpisodeState, ExerciseSpec, FitnessPlan, UserProfile};

/// An agent that did not deliver a usable answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentFailure {
    pub reason: String,
}

impl AgentFailure {
    pub fn new(reason: impl Into<String>) -> Self {
        Self { reason: reason.into() }
    }
}

/// What a fitness agent may look at before proposing the next plan.
///
/// `profile.preferences` is the hidden utility: only cheating baselines read it.
pub struct PlanningContext<'a> {
    pub profile: &'a UserProfile,
    pub bank: &'a [ExerciseSpec],
    /// Profile constraints with every active emergency applied.
    pub constraints: ActiveConstraints,
    pub state: &'a EpisodeState,
    pub config: &'a EpisodeConfig,
}

pub trait FitnessAgent {
    fn propose(&mut self, ctx: &PlanningContext<'_>) -> Result<FitnessPlan, AgentFailure>;
}

pub trait RankingAgent {
    /// Candidate indices, best first.
    fn rank(&mut self, task: &RankingTask) -> Result<alloc::vec::Vec<usize>, AgentFailure>;
}

pub trait VerifierAgent {
    fn verify(&mut self, task: &VerifierTask) -> Result<Verdict, AgentFailure>;
}

pub trait CourseSolverAgent {
    fn solve(&mut self, instance: &CourseInstance) -> Result<AssignmentPlan, AgentFailure>;
}

impl<T: FitnessAgent + ?Sized> FitnessAgent for &mut T {
    fn propose(&mut self, ctx: &PlanningContext<'_>) -> Result<FitnessPlan, AgentFailure> {
        (**self).propose(ctx)
    }
}
