use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{AgentFailure, CourseSolverAgent, FitnessAgent, PlanningContext, RankingAgent, VerifierAgent};
use crate::course::{solve_exact, AssignmentPlan, CourseInstance};
use crate::eval::{RankingTask, Verdict, VerifierTask};
use crate::fitness::{check_under, desired_plan_under, perturb_within, random_feasible_plan, FitnessPlan};
use crate::rng::{seeded, Rng};

/// Names accepted wherever a scripted agent is selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptedKind {
    Random,
    Oracle,
    HillClimb,
    Zero,
}

impl ScriptedKind {
    pub fn name(self) -> &'static str {
        match self {
            ScriptedKind::Random => "random",
            ScriptedKind::Oracle => "oracle",
            ScriptedKind::HillClimb => "hill-climb",
            ScriptedKind::Zero => "zero",
        }
    }
}

impl FromStr for ScriptedKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(ScriptedKind::Random),
            "oracle" | "greedy-oracle" => Ok(ScriptedKind::Oracle),
            "hill-climb" => Ok(ScriptedKind::HillClimb),
            "zero" => Ok(ScriptedKind::Zero),
            other => Err(alloc::format!("unknown scripted agent '{other}'")),
        }
    }
}

/// Uniformly random answers of the right shape.
pub struct RandomAgent {
    rng: Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self { rng: seeded(seed) }
    }
}

impl FitnessAgent for RandomAgent {
    fn propose(&mut self, ctx: &PlanningContext<'_>) -> Result<FitnessPlan, AgentFailure> {
        let max = ctx.constraints.max_reps.max(1);
        let reps = (0..ctx.bank.len())
            .map(|_| if self.rng.gen_bool(0.3) { self.rng.gen_range(1..=max) } else { 0 })
            .collect();
        Ok(FitnessPlan::new(reps))
    }
}

impl RankingAgent for RandomAgent {
    fn rank(&mut self, task: &RankingTask) -> Result<Vec<usize>, AgentFailure> {
        let mut order: Vec<usize> = (0..task.candidates.len()).collect();
        order.shuffle(&mut self.rng);
        Ok(order)
    }
}

impl VerifierAgent for RandomAgent {
    fn verify(&mut self, task: &VerifierTask) -> Result<Verdict, AgentFailure> {
        let feasible = self.rng.gen_bool(0.5);
        let optimal = task.asks_optimality.then(|| self.rng.gen_bool(0.5));
        Ok(Verdict { feasible, optimal })
    }
}

impl CourseSolverAgent for RandomAgent {
    fn solve(&mut self, instance: &CourseInstance) -> Result<AssignmentPlan, AgentFailure> {
        let rooms = instance.classrooms.len();
        if rooms == 0 {
            return Err(AgentFailure::new("instance has no classrooms"));
        }
        let mut plan = AssignmentPlan::default();
        for s in 0..instance.sections.len() {
            plan.assign(s, self.rng.gen_range(0..rooms));
        }
        Ok(plan)
    }
}

/// Answers from the oracle: the desired plan, the exact schedule, the oracle
/// ranking and the true verdict.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleAgent;

impl FitnessAgent for OracleAgent {
    fn propose(&mut self, ctx: &PlanningContext<'_>) -> Result<FitnessPlan, AgentFailure> {
        desired_plan_under(&ctx.profile.preferences, &ctx.constraints, ctx.bank)
            .map_err(|e| AgentFailure::new(alloc::format!("{e}")))
    }
}

impl RankingAgent for OracleAgent {
    fn rank(&mut self, task: &RankingTask) -> Result<Vec<usize>, AgentFailure> {
        Ok(task.oracle_order())
    }
}

impl VerifierAgent for OracleAgent {
    fn verify(&mut self, task: &VerifierTask) -> Result<Verdict, AgentFailure> {
        Ok(task.oracle_verdict)
    }
}

impl CourseSolverAgent for OracleAgent {
    fn solve(&mut self, instance: &CourseInstance) -> Result<AssignmentPlan, AgentFailure> {
        solve_exact(instance)
            .map(|(plan, _)| plan)
            .map_err(|e| AgentFailure::new(alloc::format!("{e}")))
    }
}

/// Keeps the best-rated plan so far and proposes small feasible variations of it.
pub struct HillClimbAgent {
    rng: Rng,
    best: Option<(FitnessPlan, f64)>,
}

impl HillClimbAgent {
    pub fn new(seed: u64) -> Self {
        Self { rng: seeded(seed), best: None }
    }
}

impl FitnessAgent for HillClimbAgent {
    fn propose(&mut self, ctx: &PlanningContext<'_>) -> Result<FitnessPlan, AgentFailure> {
        if let (Some(plan), Some(fb)) = (ctx.state.plan_history.last(), ctx.state.feedback_history.last()) {
            let better = self.best.as_ref().map_or(true, |(_, s)| fb.satisfaction > *s);
            if fb.feasible && better {
                self.best = Some((plan.clone(), fb.satisfaction));
            }
        }
        // An emergency may have invalidated the incumbent.
        let incumbent = self.best.as_ref().map(|(p, _)| p.clone()).filter(|p| {
            check_under(p, &ctx.constraints, ctx.bank).map_or(false, |r| r.feasible)
        });
        match incumbent {
            Some(p) => {
                let steps = self.rng.gen_range(1..=2);
                Ok(perturb_within(&p, &ctx.constraints, ctx.bank, steps, &mut self.rng).0)
            }
            None => {
                self.best = None;
                Ok(random_feasible_plan(&ctx.constraints, ctx.bank, &mut self.rng))
            }
        }
    }
}

/// Always proposes the empty plan.
#[derive(Debug, Default, Clone, Copy)]
pub struct ZeroAgent;

impl FitnessAgent for ZeroAgent {
    fn propose(&mut self, ctx: &PlanningContext<'_>) -> Result<FitnessPlan, AgentFailure> {
        Ok(FitnessPlan::zeros(ctx.bank.len()))
    }
}
