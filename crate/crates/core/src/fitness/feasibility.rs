use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::types::{ActiveConstraints, EmergencyCondition, ExerciseSpec, FitnessPlan, UserProfile};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// One complaint per violated constraint, phrased as the user would say it.
    pub violations: Vec<String>,
}

/// Checks `plan` against the profile's constraints plus `emergencies`.
pub fn check_feasibility(
    plan: &FitnessPlan,
    profile: &UserProfile,
    bank: &[ExerciseSpec],
    emergencies: &[EmergencyCondition],
) -> Result<FeasibilityReport> {
    check_under(plan, &ActiveConstraints::new(profile, emergencies), bank)
}

pub fn check_under(
    plan: &FitnessPlan,
    constraints: &ActiveConstraints,
    bank: &[ExerciseSpec],
) -> Result<FeasibilityReport> {
    plan.check_len(bank.len())?;
    let mut violations = Vec::new();

    let total = plan.total_minutes(bank);
    if total > u64::from(constraints.time_budget) {
        violations.push(format!(
            "time budget exceeded: the plan takes {total} minutes but only {} are available",
            constraints.time_budget
        ));
    }
    for (&reps, ex) in plan.reps.iter().zip(bank) {
        if reps == 0 {
            continue;
        }
        if reps > constraints.max_reps {
            violations.push(format!(
                "too many reps of {}: {reps} assigned, at most {} allowed",
                ex.name, constraints.max_reps
            ));
        }
        if ex.gym_required && !constraints.gym_access {
            violations.push(format!("{} needs a gym but there is no gym access", ex.name));
        }
        if constraints.excluded_exercises.contains(&ex.name) {
            violations.push(format!("{} cannot be done right now", ex.name));
        }
        for group in ex.muscle_groups.intersection(&constraints.excluded_muscle_groups) {
            violations.push(format!("{} works the excluded muscle group {group}", ex.name));
        }
    }

    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::types::{Category, EmergencyEffect, Intensity, Stamina};
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;
    use alloc::vec;

    fn ex(name: &str, t: u32, gym: bool, groups: &[&str]) -> ExerciseSpec {
        ExerciseSpec {
            name: name.to_string(),
            duration_minutes: t,
            intensity: Intensity::Medium,
            gym_required: gym,
            category: Category::Anaerobic,
            muscle_groups: groups.iter().map(|g| g.to_string()).collect(),
        }
    }

    fn bank() -> Vec<ExerciseSpec> {
        vec![
            ex("Jogging", 30, false, &["legs"]),
            ex("Jump Rope", 15, false, &["legs"]),
            ex("Push-Up", 2, false, &["chest", "arms"]),
            ex("Bench Press", 5, true, &["chest"]),
            ex("Shoulder Shrugs", 5, false, &["shoulders"]),
            ex("Lunges", 5, false, &["legs"]),
        ]
    }

    fn joe() -> UserProfile {
        UserProfile {
            name: "Joe".into(),
            preferences: vec![5.0; 6],
            available_time_minutes: 60,
            gym_access: false,
            stamina: Stamina::Medium,
            max_reps: 5,
            excluded_muscle_groups: BTreeSet::new(),
        }
    }

    #[test]
    fn initial_plan_runs_over_time() {
        // Jogging 1, Jump Rope 2, Push-Up 2, Shrugs 1, Lunges 2 = 79 minutes.
        let plan = FitnessPlan::new(vec![1, 2, 2, 0, 1, 2]);
        assert_eq!(plan.total_minutes(&bank()), 79);
        let r = check_feasibility(&plan, &joe(), &bank(), &[]).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].starts_with("time budget exceeded"));
    }

    #[test]
    fn refined_plan_fits() {
        let plan = FitnessPlan::new(vec![1, 1, 3, 0, 0, 1]);
        assert_eq!(plan.total_minutes(&bank()), 56);
        assert!(check_feasibility(&plan, &joe(), &bank(), &[]).unwrap().feasible);
    }

    #[test]
    fn zero_plan_is_feasible() {
        let r = check_feasibility(&FitnessPlan::zeros(6), &joe(), &bank(), &[]).unwrap();
        assert!(r.feasible && r.violations.is_empty());
    }

    #[test]
    fn gym_exercise_without_access() {
        let plan = FitnessPlan::new(vec![0, 0, 0, 1, 0, 0]);
        let r = check_feasibility(&plan, &joe(), &bank(), &[]).unwrap();
        assert!(!r.feasible);
        assert!(r.violations[0].contains("Bench Press"));
    }

    #[test]
    fn emergencies_tighten_constraints() {
        let plan = FitnessPlan::new(vec![1, 0, 0, 0, 0, 1]);
        let back = EmergencyCondition {
            description: "sore legs".into(),
            effect: EmergencyEffect::ExcludeMuscleGroup("legs".into()),
        };
        let r = check_feasibility(&plan, &joe(), &bank(), &[back]).unwrap();
        assert_eq!(r.violations.len(), 2);

        let busy = EmergencyCondition {
            description: "meeting".into(),
            effect: EmergencyEffect::ReduceAvailableTime(30),
        };
        let r = check_feasibility(&plan, &joe(), &bank(), &[busy.clone()]).unwrap();
        assert!(!r.feasible);
        let ok = FitnessPlan::new(vec![1, 0, 0, 0, 0, 0]);
        assert!(check_feasibility(&ok, &joe(), &bank(), &[busy]).unwrap().feasible);

        let no_pushups = EmergencyCondition {
            description: "wrist".into(),
            effect: EmergencyEffect::ExcludeExercise("Push-Up".into()),
        };
        let p = FitnessPlan::new(vec![0, 0, 1, 0, 0, 0]);
        assert!(!check_feasibility(&p, &joe(), &bank(), &[no_pushups]).unwrap().feasible);
    }

    #[test]
    fn max_reps_enforced() {
        let plan = FitnessPlan::new(vec![0, 0, 6, 0, 0, 0]);
        let r = check_feasibility(&plan, &joe(), &bank(), &[]).unwrap();
        assert!(!r.feasible);
        assert!(r.violations[0].contains("too many reps"));
    }

    #[test]
    fn length_mismatch() {
        assert!(check_feasibility(&FitnessPlan::zeros(2), &joe(), &bank(), &[]).is_err());
    }
}
