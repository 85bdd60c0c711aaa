use alloc::vec;
use alloc::vec::Vec;

use super::types::{ActiveConstraints, ExerciseSpec, FitnessPlan, UserProfile};
use crate::{Error, Result};

/// Objective values closer than this are treated as ties.
const TIE_EPS: f64 = 1e-9;

/// The user's desired plan under the profile's own constraints.
///
/// Maximizes `sum(u_i * p_i)` subject to `sum(t_i * p_i) <= T` and
/// `0 <= p_i <= max_reps`, with inadmissible exercises pinned to zero. Among
/// optimal plans the lexicographically smallest reps vector is returned.
pub fn desired_plan(profile: &UserProfile, bank: &[ExerciseSpec]) -> Result<FitnessPlan> {
    desired_plan_under(&profile.preferences, &ActiveConstraints::new(profile, &[]), bank)
}

/// [`desired_plan`] against an explicit constraint set (e.g. with emergencies applied).
pub fn desired_plan_under(
    preferences: &[f64],
    constraints: &ActiveConstraints,
    bank: &[ExerciseSpec],
) -> Result<FitnessPlan> {
    if preferences.len() != bank.len() {
        return Err(Error::MismatchedDimensions {
            expected: bank.len(),
            found: preferences.len(),
        });
    }
    let k = bank.len();
    let budget = constraints.time_budget as usize;
    let caps: Vec<usize> = bank
        .iter()
        .map(|ex| {
            if constraints.admits(ex) {
                constraints.max_reps as usize
            } else {
                0
            }
        })
        .collect();

    // best[i][w]: optimum over exercises i.. with w minutes left. Filling from
    // the back lets the forward reconstruction pick the smallest count first.
    let width = budget + 1;
    let mut best = vec![0.0f64; (k + 1) * width];
    for i in (0..k).rev() {
        let t = bank[i].duration_minutes as usize;
        let u = preferences[i];
        for w in 0..width {
            let mut v = best[(i + 1) * width + w];
            let mut p = 1;
            while p <= caps[i] && p * t <= w {
                let cand = p as f64 * u + best[(i + 1) * width + w - p * t];
                if cand > v {
                    v = cand;
                }
                p += 1;
            }
            best[i * width + w] = v;
        }
    }

    let mut reps = vec![0u32; k];
    let mut w = budget;
    for i in 0..k {
        let t = bank[i].duration_minutes as usize;
        let target = best[i * width + w];
        let mut p = 0;
        loop {
            let rest = best[(i + 1) * width + w - p * t];
            if p as f64 * preferences[i] + rest >= target - TIE_EPS {
                break;
            }
            p += 1;
        }
        reps[i] = p as u32;
        w -= p * t;
    }
    Ok(FitnessPlan::new(reps))
}
