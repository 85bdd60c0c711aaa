use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::types::{AssignmentPlan, CourseInstance};
use crate::rng::seeded;
use crate::Result;

/// Sections that are unassigned in `candidate` or placed in a different room
/// than in `gold`: the number of assign or reassign edits to reach `gold`.
pub fn plan_distance(candidate: &AssignmentPlan, gold: &AssignmentPlan, instance: &CourseInstance) -> Result<usize> {
    candidate.check_references(instance)?;
    gold.check_references(instance)?;
    Ok((0..instance.sections.len())
        .filter(|&s| candidate.room_of(s).is_none() || candidate.room_of(s) != gold.room_of(s))
        .count())
}

/// An intermediate state on the way to `gold`: a random subset of
/// `ceil(keep_fraction * m)` of its assignments, each moved to a different
/// room with probability `alter_rate`. `rooms` is the classroom count.
pub fn corrupt_plan(gold: &AssignmentPlan, rooms: usize, keep_fraction: f64, alter_rate: f64, seed: u64) -> AssignmentPlan {
    let mut rng = seeded(seed);
    let mut entries: Vec<(usize, usize)> = gold.assignments.iter().map(|(&s, &r)| (s, r)).collect();
    entries.shuffle(&mut rng);
    let keep = libm::ceil(keep_fraction.clamp(0.0, 1.0) * entries.len() as f64) as usize;
    let alter_rate = alter_rate.clamp(0.0, 1.0);

    let mut plan = AssignmentPlan::default();
    for &(s, r) in &entries[..keep.min(entries.len())] {
        let room = if rooms > 1 && rng.gen_bool(alter_rate) {
            let other = rng.gen_range(0..rooms - 1);
            if other >= r { other + 1 } else { other }
        } else {
            r
        };
        plan.assign(s, room);
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::course::generate::{generate_instance, Difficulty};
    use crate::course::solver::solve_exact;

    #[test]
    fn distance_examples() {
        let inst = generate_instance(Difficulty::Easy, 7).unwrap();
        let (gold, _) = solve_exact(&inst).unwrap();
        let m = inst.sections.len();
        assert_eq!(plan_distance(&gold, &gold, &inst).unwrap(), 0);
        assert_eq!(plan_distance(&AssignmentPlan::default(), &gold, &inst).unwrap(), m);

        let rooms = inst.classrooms.len();
        let mut moved = gold.clone();
        for s in [0, 3] {
            let r = moved.room_of(s).unwrap();
            moved.assign(s, (r + 1) % rooms);
        }
        assert_eq!(plan_distance(&moved, &gold, &inst).unwrap(), 2);
    }

    #[test]
    fn corruption_extremes() {
        let inst = generate_instance(Difficulty::Medium, 3).unwrap();
        let (gold, _) = solve_exact(&inst).unwrap();
        let n = inst.classrooms.len();
        let m = inst.sections.len();
        for seed in 0..20 {
            let same = corrupt_plan(&gold, n, 1.0, 0.0, seed);
            assert_eq!(same, gold);
            assert!(corrupt_plan(&gold, n, 0.0, 0.5, seed).is_empty());
            let all = corrupt_plan(&gold, n, 1.0, 1.0, seed);
            assert_eq!(plan_distance(&all, &gold, &inst).unwrap(), m);
            assert_eq!(corrupt_plan(&gold, n, 0.5, 0.3, seed), corrupt_plan(&gold, n, 0.5, 0.3, seed));
            assert_eq!(corrupt_plan(&gold, n, 0.5, 0.0, seed).len(), m.div_ceil(2));
        }
    }
}
