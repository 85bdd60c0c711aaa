use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::types::{ActiveConstraints, ExerciseSpec, FitnessPlan, Stamina, UserProfile};

/// Draws a random user for `bank`.
///
/// Preferences are multiples of 0.5 so that preference sums are exact in
/// binary floating point and knapsack ties are decided without rounding noise.
pub fn sample_profile<R: Rng + ?Sized>(bank: &[ExerciseSpec], max_reps: u32, rng: &mut R) -> UserProfile {
    let preferences = (0..bank.len())
        .map(|_| f64::from(rng.gen_range(0..=20u32)) / 2.0)
        .collect();
    let stamina = *[Stamina::Low, Stamina::Medium, Stamina::High]
        .choose(rng)
        .expect("non-empty");
    let groups: Vec<&String> = bank
        .iter()
        .flat_map(|ex| ex.muscle_groups.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut excluded_muscle_groups = BTreeSet::new();
    if !groups.is_empty() && rng.gen_bool(0.25) {
        excluded_muscle_groups.insert(groups[rng.gen_range(0..groups.len())].clone());
    }
    let id: u32 = rng.gen_range(0..100_000);
    UserProfile {
        name: format!("user-{id:05}"),
        preferences,
        available_time_minutes: 5 * rng.gen_range(6..=18u32),
        gym_access: rng.gen_bool(0.5),
        stamina,
        max_reps: max_reps.max(1),
        excluded_muscle_groups,
    }
}

/// A random plan that satisfies `constraints` by construction.
pub fn random_feasible_plan<R: Rng + ?Sized>(
    constraints: &ActiveConstraints,
    bank: &[ExerciseSpec],
    rng: &mut R,
) -> FitnessPlan {
    let mut plan = FitnessPlan::zeros(bank.len());
    let mut order: Vec<usize> = (0..bank.len()).collect();
    order.shuffle(rng);
    let mut left = constraints.time_budget;
    for i in order {
        let ex = &bank[i];
        if !constraints.admits(ex) || !rng.gen_bool(0.5) {
            continue;
        }
        let fit = (left / ex.duration_minutes).min(constraints.max_reps);
        if fit == 0 {
            continue;
        }
        let reps = rng.gen_range(1..=fit);
        plan.reps[i] = reps;
        left -= reps * ex.duration_minutes;
    }
    plan
}

/// Applies up to `steps` random single-rep moves that keep `plan` within
/// `constraints`. Returns the perturbed plan and the number of moves made.
pub fn perturb_within<R: Rng + ?Sized>(
    plan: &FitnessPlan,
    constraints: &ActiveConstraints,
    bank: &[ExerciseSpec],
    steps: usize,
    rng: &mut R,
) -> (FitnessPlan, usize) {
    let mut out = plan.clone();
    let admissible: Vec<usize> = (0..bank.len()).filter(|&i| constraints.admits(&bank[i])).collect();
    if admissible.is_empty() {
        return (out, 0);
    }
    let mut used = out.total_minutes(bank);
    let mut made = 0;
    let mut attempts = 0;
    while made < steps && attempts < steps * 20 {
        attempts += 1;
        let i = admissible[rng.gen_range(0..admissible.len())];
        let t = u64::from(bank[i].duration_minutes);
        if rng.gen_bool(0.5) {
            if out.reps[i] < constraints.max_reps && used + t <= u64::from(constraints.time_budget) {
                out.reps[i] += 1;
                used += t;
                made += 1;
            }
        } else if out.reps[i] > 0 {
            out.reps[i] -= 1;
            used -= t;
            made += 1;
        }
    }
    (out, made)
}
