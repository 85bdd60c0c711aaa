use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Intensity {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    Aerobic,
    Anaerobic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stamina {
    Low,
    Medium,
    High,
}

/// One entry of the exercise bank. `duration_minutes` is the time of one rep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseSpec {
    pub name: String,
    pub duration_minutes: u32,
    pub intensity: Intensity,
    pub gym_required: bool,
    pub category: Category,
    #[serde(default)]
    pub muscle_groups: BTreeSet<String>,
}

impl ExerciseSpec {
    /// Checks bank-level invariants: unique names and positive durations.
    pub fn validate_bank(bank: &[ExerciseSpec]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for ex in bank {
            if ex.duration_minutes == 0 {
                return Err(Error::InvalidConfig(format!(
                    "exercise {} has zero duration",
                    ex.name
                )));
            }
            if !seen.insert(ex.name.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate exercise name {}",
                    ex.name
                )));
            }
        }
        Ok(())
    }
}

/// The simulated user. `preferences` is hidden from agents; the remaining
/// fields are the constraints they are told about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    #[serde(default)]
    pub name: String,
    pub preferences: Vec<f64>,
    pub available_time_minutes: u32,
    pub gym_access: bool,
    pub stamina: Stamina,
    #[serde(default = "default_max_reps")]
    pub max_reps: u32,
    #[serde(default)]
    pub excluded_muscle_groups: BTreeSet<String>,
}

fn default_max_reps() -> u32 {
    5
}

impl UserProfile {
    pub fn validate(&self, bank: &[ExerciseSpec]) -> Result<()> {
        if self.preferences.len() != bank.len() {
            return Err(Error::MismatchedDimensions {
                expected: bank.len(),
                found: self.preferences.len(),
            });
        }
        if let Some(u) = self
            .preferences
            .iter()
            .find(|u| !(0.0..=10.0).contains(*u))
        {
            return Err(Error::InvalidConfig(format!(
                "preference {u} outside [0, 10]"
            )));
        }
        Ok(())
    }
}

/// Reps per exercise, aligned with the bank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessPlan {
    pub reps: Vec<u32>,
}

impl FitnessPlan {
    pub fn new(reps: Vec<u32>) -> Self {
        Self { reps }
    }

    pub fn zeros(k: usize) -> Self {
        Self { reps: vec![0; k] }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.reps.iter().all(|&r| r == 0)
    }

    pub fn total_minutes(&self, bank: &[ExerciseSpec]) -> u64 {
        self.reps
            .iter()
            .zip(bank)
            .map(|(&r, ex)| u64::from(r) * u64::from(ex.duration_minutes))
            .sum()
    }

    pub(crate) fn check_len(&self, k: usize) -> Result<()> {
        if self.reps.len() == k {
            Ok(())
        } else {
            Err(Error::MismatchedDimensions {
                expected: k,
                found: self.reps.len(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EmergencyEffect {
    ExcludeMuscleGroup(String),
    ReduceAvailableTime(u32),
    ExcludeExercise(String),
}

/// A dynamic constraint reported by the user mid-episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmergencyCondition {
    pub description: String,
    pub effect: EmergencyEffect,
}

impl EmergencyCondition {
    pub fn validate(&self) -> Result<()> {
        match self.effect {
            EmergencyEffect::ReduceAvailableTime(0) => Err(Error::InvalidConfig(format!(
                "emergency '{}' reduces time by zero minutes",
                self.description
            ))),
            _ => Ok(()),
        }
    }
}

/// The constraint set a plan is checked against: the profile's static
/// constraints augmented by every active emergency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveConstraints {
    pub time_budget: u32,
    pub max_reps: u32,
    pub gym_access: bool,
    pub excluded_muscle_groups: BTreeSet<String>,
    pub excluded_exercises: BTreeSet<String>,
}

impl ActiveConstraints {
    pub fn new(profile: &UserProfile, emergencies: &[EmergencyCondition]) -> Self {
        let mut c = Self {
            time_budget: profile.available_time_minutes,
            max_reps: profile.max_reps,
            gym_access: profile.gym_access,
            excluded_muscle_groups: profile.excluded_muscle_groups.clone(),
            excluded_exercises: BTreeSet::new(),
        };
        for e in emergencies {
            match &e.effect {
                EmergencyEffect::ExcludeMuscleGroup(g) => {
                    c.excluded_muscle_groups.insert(g.clone());
                }
                EmergencyEffect::ReduceAvailableTime(d) => {
                    c.time_budget = c.time_budget.saturating_sub(*d);
                }
                EmergencyEffect::ExcludeExercise(name) => {
                    c.excluded_exercises.insert(name.clone());
                }
            }
        }
        c
    }

    /// Whether the boolean constraints allow selecting `ex` at all.
    pub fn admits(&self, ex: &ExerciseSpec) -> bool {
        (self.gym_access || !ex.gym_required)
            && !self.excluded_exercises.contains(&ex.name)
            && ex.muscle_groups.is_disjoint(&self.excluded_muscle_groups)
    }
}

/// Episode hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    /// Weight of the preference-fit term.
    pub alpha: f64,
    /// Weight of the reps-similarity term.
    pub beta: f64,
    /// Probability of an emergency after each iteration.
    pub emergency_probability: f64,
    /// Number of most recent plans (current one included) in the reuse term.
    pub overlap_window: usize,
    pub iterations: u32,
    pub seed: u64,
    /// Map the reuse term to `1 - used_fraction` instead of `-used_fraction`.
    pub overlap_positive: bool,
    /// Fraction of the reachable satisfaction that counts as "optimal" for
    /// the cost-utility metric.
    pub cost_utility_threshold: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            alpha: 0.4,
            beta: 0.4,
            emergency_probability: 0.2,
            overlap_window: 3,
            iterations: 10,
            seed: 0,
            overlap_positive: false,
            cost_utility_threshold: 0.95,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        unit("emergency_probability", self.emergency_probability)?;
        unit("cost_utility_threshold", self.cost_utility_threshold)?;
        if self.alpha + self.beta > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "alpha + beta = {} exceeds 1",
                self.alpha + self.beta
            )));
        }
        if self.overlap_window == 0 {
            return Err(Error::InvalidConfig("overlap_window must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be positive".into()));
        }
        Ok(())
    }

    /// Weight of the reuse term, `1 - alpha - beta`.
    pub fn overlap_weight(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }
}

/// What the user says back after trying a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    /// Satisfaction in `[-10, 10]`; zero when the plan was inadmissible.
    pub satisfaction: f64,
    pub feasible: bool,
    pub violations: Vec<String>,
    pub emergency: Option<EmergencyCondition>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeState {
    pub plan_history: Vec<FitnessPlan>,
    pub feedback_history: Vec<Feedback>,
    pub active_emergencies: Vec<EmergencyCondition>,
    pub iteration: u32,
}
