use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::episode::FitnessEnv;
use super::feasibility::check_feasibility;
use super::knapsack::desired_plan_under;
use super::render::{describe_constraints, describe_emergency, describe_plan, describe_profile};
use super::sample::{perturb_within, random_feasible_plan, sample_profile};
use super::score::feedback_score_against;
use super::types::{
    ActiveConstraints, EmergencyCondition, EpisodeConfig, EpisodeState, ExerciseSpec, Feedback,
    FitnessPlan, UserProfile,
};
use crate::agents::{FitnessAgent, HillClimbAgent, PlanningContext};
use crate::eval::{rank_scores, OracleHeuristic, Orientation, RankingTask, ShotMode, Verdict, VerifierTask};
use crate::rng::{derive_seed, seeded, Rng};
use crate::{Error, Result};

/// Bounded resampling budget for heuristic tasks.
pub const HEURISTIC_RETRIES: usize = 32;

/// Alias kept for call sites that talk about fitness task modes.
pub type TaskMode = ShotMode;

/// Static material shared by every generated fitness task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessWorld {
    pub exercises: Vec<ExerciseSpec>,
    pub emergencies: Vec<EmergencyCondition>,
    /// Max reps given to sampled users.
    pub max_reps: u32,
    /// Scoring weights and emergency rate used for histories and oracle scores.
    pub episode: EpisodeConfig,
}

impl FitnessWorld {
    pub fn new(exercises: Vec<ExerciseSpec>, emergencies: Vec<EmergencyCondition>) -> Self {
        Self {
            exercises,
            emergencies,
            max_reps: 5,
            episode: EpisodeConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.exercises.is_empty() {
            return Err(Error::InvalidConfig("exercise bank is empty".into()));
        }
        ExerciseSpec::validate_bank(&self.exercises)?;
        self.episode.validate()
    }
}

/// A past iteration shown as context: plan `P_{j+1}` with its feedback `F_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub plan: FitnessPlan,
    pub feedback: Feedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessVerifierTask {
    pub mode: ShotMode,
    pub profile: UserProfile,
    pub history: Vec<HistoryEntry>,
    pub active_emergencies: Vec<EmergencyCondition>,
    pub candidate: FitnessPlan,
    pub task: VerifierTask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRankingTask {
    pub mode: ShotMode,
    pub profile: UserProfile,
    pub history: Vec<HistoryEntry>,
    pub active_emergencies: Vec<EmergencyCondition>,
    pub candidates: Vec<FitnessPlan>,
    pub task: RankingTask,
}

/// Satisfaction as an oracle heuristic: the candidate's feedback score
/// against the supplied desired plan, given the episode so far.
pub struct SatisfactionHeuristic<'a> {
    pub preferences: &'a [f64],
    pub state: &'a EpisodeState,
    pub config: &'a EpisodeConfig,
}

impl OracleHeuristic for SatisfactionHeuristic<'_> {
    type Candidate = FitnessPlan;
    type Gold = FitnessPlan;
    type Problem = ();

    fn score(&self, candidate: &FitnessPlan, desired: &FitnessPlan, _: &()) -> Result<f64> {
        feedback_score_against(candidate, desired, self.state, self.preferences, self.config)
    }

    fn orientation(&self) -> Orientation {
        Orientation::HigherBetter
    }
}

fn check_mode(mode: ShotMode) -> Result<()> {
    match mode {
        ShotMode::ZeroShot | ShotMode::FewShot => Ok(()),
        ShotMode::OneShot => Err(Error::InvalidConfig(
            "fitness tasks support zero-shot and few-shot modes".into(),
        )),
    }
}

/// Plays a short episode with a hill-climbing agent to produce history.
fn rollout(world: &FitnessWorld, profile: &UserProfile, seed: u64, rng: &mut Rng) -> Result<(Vec<HistoryEntry>, EpisodeState)> {
    let steps = rng.gen_range(1..=4u32);
    let config = EpisodeConfig {
        iterations: steps,
        seed: derive_seed(seed, 1),
        ..world.episode.clone()
    };
    let mut env = FitnessEnv::new(profile, &world.exercises, &world.emergencies, config)?;
    let mut agent = HillClimbAgent::new(derive_seed(seed, 2));
    while !env.is_finished() {
        let plan = {
            let ctx = PlanningContext {
                profile,
                bank: &world.exercises,
                constraints: env.constraints(),
                state: env.state(),
                config: env.config(),
            };
            agent.propose(&ctx).unwrap_or_else(|_| FitnessPlan::zeros(world.exercises.len()))
        };
        env.step(plan)?;
    }
    let state = env.into_state();
    let history = state
        .plan_history
        .iter()
        .zip(&state.feedback_history)
        .map(|(p, f)| HistoryEntry { plan: p.clone(), feedback: f.clone() })
        .collect();
    Ok((history, state))
}

fn render_history(history: &[HistoryEntry], bank: &[ExerciseSpec]) -> String {
    let mut s = String::new();
    for (j, h) in history.iter().enumerate() {
        let _ = writeln!(s, "Plan P_{}:\n{}", j + 1, describe_plan(&h.plan, bank));
        if h.feedback.feasible {
            let _ = writeln!(s, "Feedback F_{j}: satisfaction {:.2} out of 10", h.feedback.satisfaction);
        } else {
            let _ = writeln!(s, "Feedback F_{j}: inadmissible ({})", h.feedback.violations.join("; "));
        }
        if let Some(e) = &h.feedback.emergency {
            let _ = writeln!(s, "New condition reported: {}", describe_emergency(e));
        }
        s.push('\n');
    }
    s
}

fn render_problem(profile: &UserProfile, bank: &[ExerciseSpec], emergencies: &[EmergencyCondition]) -> String {
    let mut s = describe_profile(profile, bank, true);
    if !emergencies.is_empty() {
        let _ = writeln!(s, "Conditions reported since the start:");
        for e in emergencies {
            let _ = writeln!(s, "- {}", describe_emergency(e));
        }
        let _ = writeln!(s, "Constraints currently in force:");
        s.push_str(&describe_constraints(&ActiveConstraints::new(profile, emergencies)));
    }
    s
}

/// Makes a feasible plan inadmissible by exactly one kind of violation when
/// possible. Falls back to exceeding the rep limit, which always works.
fn inject_violation(plan: &FitnessPlan, c: &ActiveConstraints, bank: &[ExerciseSpec], rng: &mut Rng) -> FitnessPlan {
    let mut kinds = Vec::new();
    // Time: can the budget be exceeded without breaking the rep limit?
    let room: u64 = bank
        .iter()
        .filter(|ex| c.admits(ex))
        .map(|ex| u64::from(ex.duration_minutes) * u64::from(c.max_reps))
        .sum();
    if room > u64::from(c.time_budget) {
        kinds.push(0u8);
    }
    if bank.iter().any(|ex| !c.admits(ex)) {
        kinds.push(1);
    }
    kinds.push(2);
    let mut out = plan.clone();
    match kinds[rng.gen_range(0..kinds.len())] {
        0 => {
            let mut admissible: Vec<usize> = (0..bank.len()).filter(|&i| c.admits(&bank[i])).collect();
            admissible.shuffle(rng);
            for i in admissible.iter().cycle().take(admissible.len() * c.max_reps as usize) {
                if out.total_minutes(bank) > u64::from(c.time_budget) {
                    break;
                }
                if out.reps[*i] < c.max_reps {
                    out.reps[*i] += 1;
                }
            }
        }
        1 => {
            let banned: Vec<usize> = (0..bank.len()).filter(|&i| !c.admits(&bank[i])).collect();
            let i = banned[rng.gen_range(0..banned.len())];
            out.reps[i] = rng.gen_range(1..=c.max_reps.max(1));
        }
        _ => {
            let i = rng.gen_range(0..bank.len());
            out.reps[i] = c.max_reps + 1;
        }
    }
    out
}

/// Builds a fitness verifier task with a balanced label: half the candidates
/// are admissible, half carry an injected violation. The returned label is the
/// feasibility check run on the emitted task.
pub fn build_verifier_task(world: &FitnessWorld, mode: ShotMode, seed: u64) -> Result<(FitnessVerifierTask, bool)> {
    check_mode(mode)?;
    world.validate()?;
    let bank = &world.exercises;
    let mut rng = seeded(seed);
    let profile = sample_profile(bank, world.max_reps, &mut rng);
    let (history, state) = match mode {
        ShotMode::FewShot => rollout(world, &profile, seed, &mut rng)?,
        _ => (Vec::new(), EpisodeState::default()),
    };
    let constraints = ActiveConstraints::new(&profile, &state.active_emergencies);
    let want_feasible = rng.gen_bool(0.5);
    let base = if rng.gen_bool(0.5) {
        desired_plan_under(&profile.preferences, &constraints, bank)?
    } else {
        random_feasible_plan(&constraints, bank, &mut rng)
    };
    let candidate = if want_feasible {
        base
    } else {
        inject_violation(&base, &constraints, bank, &mut rng)
    };
    let truth = check_feasibility(&candidate, &profile, bank, &state.active_emergencies)?.feasible;

    let context = match mode {
        ShotMode::FewShot => Some(render_history(&history, bank)),
        _ => None,
    };
    let label = if mode == ShotMode::FewShot {
        format!("P_{}", history.len() + 1)
    } else {
        String::from("P_0")
    };
    let task = VerifierTask {
        problem_text: render_problem(&profile, bank, &state.active_emergencies),
        candidate_text: format!("Plan {label}:\n{}", describe_plan(&candidate, bank)),
        context,
        asks_optimality: false,
        oracle_verdict: Verdict { feasible: truth, optimal: None },
    };
    Ok((
        FitnessVerifierTask {
            mode,
            profile,
            history,
            active_emergencies: state.active_emergencies,
            candidate,
            task,
        },
        truth,
    ))
}

/// Candidate indices ordered by score, or `DegenerateTask` when the best
/// score is not unique.
pub(crate) fn unique_best_order(scores: &[f64], orientation: Orientation) -> Result<Vec<usize>> {
    let order = rank_scores(scores, orientation);
    if order.len() < 2 {
        return Err(Error::DegenerateTask);
    }
    let best = orientation.orient(scores[order[0]]);
    let second = orientation.orient(scores[order[1]]);
    if best > second + 1e-12 {
        Ok(order)
    } else {
        Err(Error::DegenerateTask)
    }
}

/// Builds a ranking task over `n_candidates` admissible plans at graded
/// distances from the desired plan. Returns the task and the oracle order
/// (best first, by satisfaction).
pub fn build_heuristic_task(
    world: &FitnessWorld,
    mode: ShotMode,
    n_candidates: usize,
    seed: u64,
) -> Result<(FitnessRankingTask, Vec<usize>)> {
    check_mode(mode)?;
    world.validate()?;
    if n_candidates < 2 {
        return Err(Error::InvalidConfig("a ranking task needs at least two candidates".into()));
    }
    let bank = &world.exercises;
    let mut rng = seeded(seed);
    let profile = sample_profile(bank, world.max_reps, &mut rng);
    let (history, state) = match mode {
        ShotMode::FewShot => rollout(world, &profile, seed, &mut rng)?,
        _ => (Vec::new(), EpisodeState::default()),
    };
    let constraints = ActiveConstraints::new(&profile, &state.active_emergencies);
    let desired = desired_plan_under(&profile.preferences, &constraints, bank)?;
    let heuristic = SatisfactionHeuristic {
        preferences: &profile.preferences,
        state: &state,
        config: &world.episode,
    };

    for _ in 0..HEURISTIC_RETRIES {
        let mut candidates: Vec<FitnessPlan> = (0..n_candidates)
            .map(|i| {
                let steps = 2 * i + rng.gen_range(0..=1usize) * usize::from(i > 0);
                perturb_within(&desired, &constraints, bank, steps, &mut rng).0
            })
            .collect();
        candidates.shuffle(&mut rng);
        let scores = candidates
            .iter()
            .map(|c| heuristic.score(c, &desired, &()))
            .collect::<Result<Vec<_>>>()?;
        let Ok(order) = unique_best_order(&scores, Orientation::HigherBetter) else {
            continue;
        };
        let task = RankingTask {
            problem_text: render_problem(&profile, bank, &state.active_emergencies),
            candidates: candidates.iter().map(|c| describe_plan(c, bank)).collect(),
            context: (mode == ShotMode::FewShot).then(|| render_history(&history, bank)),
            oracle_scores: scores,
            orientation: Orientation::HigherBetter,
        };
        return Ok((
            FitnessRankingTask {
                mode,
                profile,
                history,
                active_emergencies: state.active_emergencies,
                candidates,
                task,
            },
            order,
        ));
    }
    Err(Error::DegenerateTask)
}
