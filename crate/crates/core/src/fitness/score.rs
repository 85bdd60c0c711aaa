use alloc::vec::Vec;

use super::knapsack::desired_plan_under;
use super::types::{ActiveConstraints, EpisodeConfig, EpisodeState, ExerciseSpec, FitnessPlan, UserProfile};
use crate::{Error, Result};

fn check_pair(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::MismatchedDimensions { expected: a, found: b })
    }
}

/// Mean preference of the selected exercises, scaled to `[0, 1]`.
/// An all-zero plan scores 0.
pub fn plan_score(plan: &FitnessPlan, preferences: &[f64]) -> Result<f64> {
    check_pair(preferences.len(), plan.len())?;
    let (sum, count) = plan
        .reps
        .iter()
        .zip(preferences)
        .filter(|(&r, _)| r != 0)
        .fold((0.0, 0usize), |(s, c), (_, &u)| (s + u, c + 1));
    if count == 0 {
        return Ok(0.0);
    }
    Ok(sum / count as f64 / 10.0)
}

/// Cosine similarity of the two reps vectors times
/// `min(1, |p|/|d|, |d|/|p|)`. Zero if either vector is all-zero.
pub fn rep_score(plan: &FitnessPlan, desired: &FitnessPlan) -> Result<f64> {
    check_pair(desired.len(), plan.len())?;
    let mut dot = 0.0f64;
    let mut pp = 0.0f64;
    let mut dd = 0.0f64;
    for (&a, &b) in plan.reps.iter().zip(&desired.reps) {
        let (a, b) = (f64::from(a), f64::from(b));
        dot += a * b;
        pp += a * a;
        dd += b * b;
    }
    if pp == 0.0 || dd == 0.0 {
        return Ok(0.0);
    }
    let cosine = dot / libm::sqrt(pp * dd);
    let ratio = libm::sqrt(pp / dd);
    let scale = 1.0f64.min(ratio).min(1.0 / ratio);
    Ok((cosine * scale).clamp(0.0, 1.0))
}

/// Minus the fraction of exercises used by at least one plan in the window.
/// Lies in `[-1, 0]`.
pub fn overlap_score(window: &[&FitnessPlan]) -> Result<f64> {
    let first = window.first().ok_or(Error::EmptyWindow)?;
    let n = first.len();
    for p in window {
        check_pair(n, p.len())?;
    }
    if n == 0 {
        return Ok(0.0);
    }
    let used = (0..n)
        .filter(|&i| window.iter().any(|p| p.reps[i] != 0))
        .count();
    Ok(-(used as f64) / n as f64)
}

/// Satisfaction `10 * (alpha*Plan + beta*Rep + (1-alpha-beta)*Overlap)` for a
/// plan that already passed the feasibility check.
///
/// `Rep` compares against the desired plan under the currently active
/// emergencies; `Overlap` covers the last `overlap_window` plans ending with
/// `plan`.
pub fn feedback_score(
    plan: &FitnessPlan,
    state: &EpisodeState,
    profile: &UserProfile,
    bank: &[ExerciseSpec],
    config: &EpisodeConfig,
) -> Result<f64> {
    let constraints = ActiveConstraints::new(profile, &state.active_emergencies);
    let desired = desired_plan_under(&profile.preferences, &constraints, bank)?;
    feedback_score_against(plan, &desired, state, &profile.preferences, config)
}

/// [`feedback_score`] with the desired plan supplied by the caller.
pub(crate) fn feedback_score_against(
    plan: &FitnessPlan,
    desired: &FitnessPlan,
    state: &EpisodeState,
    preferences: &[f64],
    config: &EpisodeConfig,
) -> Result<f64> {
    let plan_term = plan_score(plan, preferences)?;
    let rep_term = rep_score(plan, desired)?;

    let keep = config.overlap_window.saturating_sub(1);
    let start = state.plan_history.len().saturating_sub(keep);
    let mut window: Vec<&FitnessPlan> = state.plan_history[start..].iter().collect();
    window.push(plan);
    let mut overlap_term = overlap_score(&window)?;
    if config.overlap_positive {
        overlap_term += 1.0;
    }

    Ok(10.0
        * (config.alpha * plan_term
            + config.beta * rep_term
            + config.overlap_weight() * overlap_term))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(r: &[u32]) -> FitnessPlan {
        FitnessPlan::new(r.to_vec())
    }

    #[test]
    fn plan_score_examples() {
        assert_eq!(plan_score(&plan(&[1, 0, 3]), &[10.0, 2.0, 10.0]).unwrap(), 1.0);
        let s = plan_score(&plan(&[1, 0, 2]), &[5.0, 0.0, 7.0]).unwrap();
        assert!((s - 0.6).abs() < 1e-12);
        assert_eq!(plan_score(&plan(&[0, 0, 0]), &[5.0, 1.0, 7.0]).unwrap(), 0.0);
        assert!(matches!(
            plan_score(&plan(&[0, 0]), &[1.0]),
            Err(Error::MismatchedDimensions { .. })
        ));
    }

    #[test]
    fn rep_score_examples() {
        let d = plan(&[2, 1, 3]);
        assert_eq!(rep_score(&d, &d).unwrap(), 1.0);
        assert_eq!(rep_score(&plan(&[4, 2, 6]), &d).unwrap(), 0.5);
        assert_eq!(rep_score(&plan(&[1, 0]), &plan(&[0, 1])).unwrap(), 0.0);
        assert_eq!(rep_score(&plan(&[0, 0]), &plan(&[0, 1])).unwrap(), 0.0);
        assert_eq!(rep_score(&plan(&[1, 0]), &plan(&[0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn overlap_examples() {
        let z = plan(&[0, 0, 0, 0]);
        assert_eq!(overlap_score(&[&z, &z]).unwrap(), 0.0);
        let a = plan(&[1, 0, 0, 0]);
        let b = plan(&[0, 0, 2, 0]);
        assert_eq!(overlap_score(&[&a, &b, &z]).unwrap(), -0.5);
        let all = plan(&[1, 1, 1, 1]);
        assert_eq!(overlap_score(&[&z, &all]).unwrap(), -1.0);
        assert_eq!(overlap_score(&[]), Err(Error::EmptyWindow));
        assert!(overlap_score(&[&z, &plan(&[1])]).is_err());
    }
}
