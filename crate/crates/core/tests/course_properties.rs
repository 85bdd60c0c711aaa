mod common;

use common::{instance, section, small_params};
use planeval_core::course::*;
use planeval_core::eval::ShotMode;
use planeval_core::Error;
use proptest::prelude::*;
use Weekday::*;

fn complete_plan(rooms: usize, m: usize) -> impl Strategy<Value = AssignmentPlan> {
    prop::collection::vec(0..rooms, m).prop_map(|r| AssignmentPlan::from_rooms(&r))
}

proptest! {
    #[test]
    fn exact_matches_brute_force(seed: u64, courses in 1usize..=3, rooms in 1usize..=4) {
        let inst = generate_with(&small_params(courses, (rooms, rooms)), seed);
        let Ok(inst) = inst else { return Ok(()); };
        prop_assume!(brute_force_solve(&inst).is_ok());
        let (plan, slack) = solve_exact(&inst).unwrap();
        let (bplan, bslack) = brute_force_solve(&inst).unwrap();
        prop_assert_eq!(slack, bslack);
        for p in [&plan, &bplan] {
            let a = assess(p, &inst, DEFAULT_DELTA).unwrap();
            prop_assert!(a.feasible);
            prop_assert_eq!(a.total_slack, slack);
        }
    }

    #[test]
    fn exact_is_optimal_among_feasible(seed: u64, rooms in 2usize..=3, q in prop::collection::vec(0usize..3, 9)) {
        let Ok(inst) = generate_with(&small_params(2, (rooms, rooms)), seed) else { return Ok(()); };
        let (_, best) = solve_exact(&inst).unwrap();
        let q: Vec<usize> = q.iter().take(inst.sections.len()).map(|r| r % rooms).collect();
        prop_assume!(q.len() == inst.sections.len());
        let a = assess(&AssignmentPlan::from_rooms(&q), &inst, DEFAULT_DELTA).unwrap();
        if a.feasible {
            prop_assert!(best <= a.total_slack);
        }
    }

    #[test]
    fn distance_is_a_metric(
        seed: u64,
        (a, b, c) in (2usize..5).prop_flat_map(|n| (complete_plan(n, 8), complete_plan(n, 8), complete_plan(n, 8))),
    ) {
        let mut inst = generate_with(&small_params(4, (5, 5)), seed).unwrap();
        inst.sections.truncate(8);
        prop_assume!(inst.sections.len() == 8);
        let d = |x: &AssignmentPlan, y: &AssignmentPlan| plan_distance(x, y, &inst).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }

    #[test]
    fn overlap_symmetric(d1 in 0usize..5, d2 in 1usize..5, d3 in 0usize..5, d4 in 1usize..5, s1 in 0usize..7, s2 in 0usize..7) {
        let pair = |a: usize, b: usize| vec![Weekday::ALL[a], Weekday::ALL[(a + b) % 5]];
        let x = TimeSlot::new(pair(d1, d2), PERIOD_STARTS[s1], PERIOD_STARTS[s1] + PERIOD_MINUTES).unwrap();
        let y = TimeSlot::new(pair(d3, d4), PERIOD_STARTS[s2], PERIOD_STARTS[s2] + PERIOD_MINUTES).unwrap();
        prop_assert_eq!(x.overlaps(&y), y.overlaps(&x));
        prop_assert!(x.overlaps(&x));
        let shared = x.days().iter().any(|d| y.days().contains(d));
        prop_assert_eq!(x.overlaps(&y), shared && s1 == s2);
    }

    #[test]
    fn generation_reproducible(seed: u64) {
        let d = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard][(seed % 3) as usize];
        let a = generate_instance(d, seed).unwrap();
        prop_assert_eq!(&a, &generate_instance(d, seed).unwrap());
        let (plan, slack) = solve_exact(&a).unwrap();
        let report = assess(&plan, &a, DEFAULT_DELTA).unwrap();
        prop_assert!(report.feasible);
        prop_assert_eq!(report.total_slack, slack);
    }
}

#[test]
fn slot_examples() {
    let a = TimeSlot::new(vec![Mon, Thu], 690, 765).unwrap();
    let b = TimeSlot::new(vec![Mon, Fri], 690, 765).unwrap();
    assert!(a.overlaps(&b));
    let early = TimeSlot::new(vec![Mon], 510, 585).unwrap();
    let later = TimeSlot::new(vec![Mon], 585, 660).unwrap();
    assert!(!early.overlaps(&later));
    let tt = TimeSlot::new(vec![Tue, Thu], 510, 900).unwrap();
    let mf = TimeSlot::new(vec![Mon, Fri], 510, 900).unwrap();
    assert!(!tt.overlaps(&mf));
}

#[test]
fn solver_small_cases() {
    let one = instance(vec![section(1, 1, &[Mon, Wed], 510, 22)], &[30]);
    let (plan, slack) = solve_exact(&one).unwrap();
    assert_eq!(plan.room_of(0), Some(0));
    assert_eq!(slack, 8);

    let clash = instance(
        vec![section(1, 1, &[Mon, Wed], 510, 22), section(2, 1, &[Wed, Fri], 510, 24)],
        &[30],
    );
    assert_eq!(solve_exact(&clash), Err(Error::Unsatisfiable));
    assert_eq!(brute_force_solve(&clash), Err(Error::Unsatisfiable));
    assert_eq!(solve_with_limit(&clash, None), SearchOutcome::Unsatisfiable);
}

#[test]
fn brute_force_guard() {
    let sections: Vec<Section> = (1..=12).map(|c| section(c, 1, &[Mon, Tue], PERIOD_STARTS[c % 7], 20)).collect();
    let big = instance(sections, &[30, 30, 30, 30]);
    assert!(matches!(brute_force_solve(&big), Err(Error::TooLarge { .. })));
    assert!(solve_exact(&big).is_ok());
}

#[test]
fn node_limit_reported() {
    let inst = generate_instance(Difficulty::Hard, 1).unwrap();
    assert_eq!(solve_with_limit(&inst, Some(1)), SearchOutcome::LimitReached);
}

#[test]
fn heuristic_task_orders_by_distance() {
    for seed in 0..30 {
        let inst = generate_instance(Difficulty::Medium, seed).unwrap();
        let (t, order) = build_course_heuristic_task(&inst, 4, ShotMode::ZeroShot, seed).unwrap();
        let d: Vec<usize> = t.candidates.iter().map(|c| plan_distance(c, &t.gold, &inst).unwrap()).collect();
        let mut sorted = d.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
        assert_eq!(order.iter().map(|&i| d[i]).collect::<Vec<_>>(), sorted);
    }
}

#[test]
fn verifier_balance() {
    let mut feasible = 0;
    for seed in 0..1000u64 {
        let inst = generate_instance(Difficulty::Easy, seed % 50).unwrap();
        let (t, v) = build_course_verifier_task(&inst, DEFAULT_DELTA, seed).unwrap();
        assert_eq!(v, t.task.oracle_verdict);
        feasible += usize::from(v.feasible);
    }
    assert!((feasible as f64 / 1000.0 - 0.5).abs() <= 0.05);
}
