use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::feasibility::check_feasibility;
use super::knapsack::desired_plan_under;
use super::score::feedback_score;
use super::types::{
    ActiveConstraints, EmergencyCondition, EpisodeConfig, EpisodeState, ExerciseSpec, Feedback,
    FitnessPlan, UserProfile,
};
use crate::agents::{FitnessAgent, PlanningContext};
use crate::rng::{seeded, Rng as EnvRng};
use crate::{Error, Result};

/// Evaluates one proposed plan and advances the episode.
///
/// Infeasible plans get their violations back and no score. Afterwards an
/// emergency is drawn with probability `emergency_probability`; once drawn it
/// stays active for the rest of the episode.
pub fn step<R: Rng + ?Sized>(
    state: &mut EpisodeState,
    plan: FitnessPlan,
    profile: &UserProfile,
    bank: &[ExerciseSpec],
    emergency_bank: &[EmergencyCondition],
    config: &EpisodeConfig,
    rng: &mut R,
) -> Result<Feedback> {
    if state.iteration >= config.iterations {
        return Err(Error::EpisodeFinished(config.iterations));
    }
    let report = check_feasibility(&plan, profile, bank, &state.active_emergencies)?;
    let satisfaction = if report.feasible {
        feedback_score(&plan, state, profile, bank, config)?
    } else {
        0.0
    };
    let feedback = Feedback {
        satisfaction,
        feasible: report.feasible,
        violations: report.violations,
        emergency: None,
    };
    Ok(finish_step(state, plan, feedback, emergency_bank, config, rng))
}

fn finish_step<R: Rng + ?Sized>(
    state: &mut EpisodeState,
    plan: FitnessPlan,
    mut feedback: Feedback,
    emergency_bank: &[EmergencyCondition],
    config: &EpisodeConfig,
    rng: &mut R,
) -> Feedback {
    if rng.gen_bool(config.emergency_probability) && !emergency_bank.is_empty() {
        let e = emergency_bank[rng.gen_range(0..emergency_bank.len())].clone();
        state.active_emergencies.push(e.clone());
        feedback.emergency = Some(e);
    }
    state.plan_history.push(plan);
    state.feedback_history.push(feedback.clone());
    state.iteration += 1;
    feedback
}

/// A running episode: owns its state and its seeded generator.
pub struct FitnessEnv<'a> {
    profile: &'a UserProfile,
    bank: &'a [ExerciseSpec],
    emergency_bank: &'a [EmergencyCondition],
    config: EpisodeConfig,
    rng: EnvRng,
    state: EpisodeState,
}

impl<'a> FitnessEnv<'a> {
    pub fn new(
        profile: &'a UserProfile,
        bank: &'a [ExerciseSpec],
        emergency_bank: &'a [EmergencyCondition],
        config: EpisodeConfig,
    ) -> Result<Self> {
        config.validate()?;
        ExerciseSpec::validate_bank(bank)?;
        profile.validate(bank)?;
        for e in emergency_bank {
            e.validate()?;
        }
        Ok(Self {
            profile,
            bank,
            emergency_bank,
            rng: seeded(config.seed),
            config,
            state: EpisodeState::default(),
        })
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn into_state(self) -> EpisodeState {
        self.state
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.config.iterations
    }

    pub fn constraints(&self) -> ActiveConstraints {
        ActiveConstraints::new(self.profile, &self.state.active_emergencies)
    }

    /// Satisfaction the desired plan would earn if proposed now.
    pub fn reference_satisfaction(&self) -> Result<f64> {
        let desired = desired_plan_under(&self.profile.preferences, &self.constraints(), self.bank)?;
        feedback_score(&desired, &self.state, self.profile, self.bank, &self.config)
    }

    pub fn step(&mut self, plan: FitnessPlan) -> Result<Feedback> {
        step(
            &mut self.state,
            plan,
            self.profile,
            self.bank,
            self.emergency_bank,
            &self.config,
            &mut self.rng,
        )
    }

    /// Records an iteration in which the agent produced no usable plan.
    /// The history gets an all-zero plan and an infeasible feedback.
    pub fn step_failure(&mut self, reason: &str) -> Result<Feedback> {
        if self.is_finished() {
            return Err(Error::EpisodeFinished(self.config.iterations));
        }
        let feedback = Feedback {
            satisfaction: 0.0,
            feasible: false,
            violations: alloc::vec![format!("no usable plan was produced: {reason}")],
            emergency: None,
        };
        Ok(finish_step(
            &mut self.state,
            FitnessPlan::zeros(self.bank.len()),
            feedback,
            self.emergency_bank,
            &self.config,
            &mut self.rng,
        ))
    }
}

/// The four solver metrics of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetrics {
    /// Fraction of iterations with a feasible plan.
    pub feasibility: f64,
    /// Mean of `max(F_t, 0) / 10` over the last three iterations.
    pub optimality: f64,
    /// First 1-based iteration reaching the threshold, or `iterations + 1`.
    pub cost_utility: u32,
    /// Fraction of the bank used by at least one plan.
    pub diversity: f64,
}

impl SolverMetrics {
    /// Recomputes the metrics from an episode's logs. `references[t]` is the
    /// satisfaction the desired plan would have earned at iteration `t`.
    pub fn from_logs(
        plans: &[FitnessPlan],
        feedbacks: &[Feedback],
        references: &[f64],
        bank_size: usize,
        threshold: f64,
    ) -> Self {
        let n = feedbacks.len();
        if n == 0 {
            return Self {
                feasibility: 0.0,
                optimality: 0.0,
                cost_utility: 1,
                diversity: 0.0,
            };
        }
        let feasible = feedbacks.iter().filter(|f| f.feasible).count();
        let tail = &feedbacks[n.saturating_sub(3)..];
        let optimality = tail
            .iter()
            .map(|f| if f.feasible { f.satisfaction.max(0.0) / 10.0 } else { 0.0 })
            .sum::<f64>()
            / tail.len() as f64;
        let cost_utility = feedbacks
            .iter()
            .zip(references)
            .position(|(f, &r)| {
                let target = if r > 0.0 { threshold * r } else { r };
                f.feasible && f.satisfaction >= target - 1e-9
            })
            .map_or(n as u32 + 1, |t| t as u32 + 1);
        let used: BTreeSet<usize> = plans
            .iter()
            .flat_map(|p| p.reps.iter().enumerate().filter(|(_, &r)| r > 0).map(|(i, _)| i))
            .collect();
        let diversity = if bank_size == 0 {
            0.0
        } else {
            used.len() as f64 / bank_size as f64
        };
        Self {
            feasibility: feasible as f64 / n as f64,
            optimality,
            cost_utility,
            diversity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub state: EpisodeState,
    pub metrics: SolverMetrics,
    /// Reachable satisfaction per iteration (desired plan under the
    /// constraints active at that iteration).
    pub references: Vec<f64>,
    /// Why the agent failed to deliver a plan, per iteration.
    pub agent_failures: Vec<Option<String>>,
}

/// Runs a full episode of `config.iterations` steps with `agent`.
///
/// Agent failures (no plan, wrong length) count as infeasible iterations.
pub fn run_episode<A: FitnessAgent + ?Sized>(
    agent: &mut A,
    profile: &UserProfile,
    bank: &[ExerciseSpec],
    emergency_bank: &[EmergencyCondition],
    config: &EpisodeConfig,
) -> Result<EpisodeOutcome> {
    let mut env = FitnessEnv::new(profile, bank, emergency_bank, config.clone())?;
    let mut references = Vec::with_capacity(config.iterations as usize);
    let mut agent_failures = Vec::with_capacity(config.iterations as usize);
    while !env.is_finished() {
        references.push(env.reference_satisfaction()?);
        let proposal = {
            let ctx = PlanningContext {
                profile,
                bank,
                constraints: env.constraints(),
                state: env.state(),
                config: env.config(),
            };
            agent.propose(&ctx)
        };
        match proposal {
            Ok(plan) if plan.len() == bank.len() => {
                env.step(plan)?;
                agent_failures.push(None);
            }
            Ok(plan) => {
                let reason = format!("plan has {} entries, expected {}", plan.len(), bank.len());
                env.step_failure(&reason)?;
                agent_failures.push(Some(reason));
            }
            Err(failure) => {
                env.step_failure(&failure.reason)?;
                agent_failures.push(Some(failure.reason));
            }
        }
    }
    let state = env.into_state();
    let metrics = SolverMetrics::from_logs(
        &state.plan_history,
        &state.feedback_history,
        &references,
        bank.len(),
        config.cost_utility_threshold,
    );
    Ok(EpisodeOutcome {
        state,
        metrics,
        references,
        agent_failures,
    })
}
