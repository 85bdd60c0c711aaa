//! Deterministic natural-language rendering of fitness objects for prompts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::types::{
    ActiveConstraints, Category, EmergencyCondition, EmergencyEffect, ExerciseSpec, FitnessPlan,
    Intensity, UserProfile,
};

fn intensity(i: Intensity) -> &'static str {
    match i {
        Intensity::Low => "L",
        Intensity::Medium => "M",
        Intensity::High => "H",
    }
}

fn category(c: Category) -> &'static str {
    match c {
        Category::Aerobic => "Aerobic",
        Category::Anaerobic => "Anaerobic",
    }
}

fn join<'a>(items: impl IntoIterator<Item = &'a String>) -> String {
    let v: Vec<&str> = items.into_iter().map(String::as_str).collect();
    if v.is_empty() {
        String::from("none")
    } else {
        v.join(", ")
    }
}

/// Exercise table plus the user's constraints. Preferences are included only
/// when `with_preferences` is set (they are hidden during solving).
pub fn describe_profile(profile: &UserProfile, bank: &[ExerciseSpec], with_preferences: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Exercise bank (time is minutes per rep):");
    for (i, ex) in bank.iter().enumerate() {
        let _ = write!(
            s,
            "- {} | time {} | intensity {} | gym {} | {} | muscles: {}",
            ex.name,
            ex.duration_minutes,
            intensity(ex.intensity),
            if ex.gym_required { "Yes" } else { "No" },
            category(ex.category),
            join(&ex.muscle_groups),
        );
        if with_preferences {
            let _ = write!(s, " | preference {}", profile.preferences[i]);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "User: {}", profile.name);
    let _ = writeln!(s, "Stamina: {:?}", profile.stamina);
    s.push_str(&describe_constraints(&ActiveConstraints::new(profile, &[])));
    s
}

pub fn describe_constraints(c: &ActiveConstraints) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Gym access: {}", if c.gym_access { "Yes" } else { "No" });
    let _ = writeln!(s, "Available time: {} minutes", c.time_budget);
    let _ = writeln!(s, "Maximum reps per exercise: {}", c.max_reps);
    let _ = writeln!(s, "Excluded muscle groups: {}", join(&c.excluded_muscle_groups));
    if !c.excluded_exercises.is_empty() {
        let _ = writeln!(s, "Excluded exercises: {}", join(&c.excluded_exercises));
    }
    s
}

/// `Exercise: reps` lines for the nonzero entries, or a note for an empty plan.
pub fn describe_plan(plan: &FitnessPlan, bank: &[ExerciseSpec]) -> String {
    let lines: Vec<String> = plan
        .reps
        .iter()
        .zip(bank)
        .filter(|(&r, _)| r > 0)
        .map(|(r, ex)| format!("{}: {}", ex.name, r))
        .collect();
    if lines.is_empty() {
        String::from("(no exercises)")
    } else {
        lines.join("\n")
    }
}

pub fn describe_emergency(e: &EmergencyCondition) -> String {
    let effect = match &e.effect {
        EmergencyEffect::ExcludeMuscleGroup(g) => format!("avoid exercises that work the {g}"),
        EmergencyEffect::ReduceAvailableTime(d) => format!("{d} fewer minutes are available"),
        EmergencyEffect::ExcludeExercise(n) => format!("{n} cannot be done"),
    };
    format!("{} ({effect})", e.description)
}
