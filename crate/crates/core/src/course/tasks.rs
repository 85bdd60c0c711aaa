use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::assess::{assess, PlanAssessment, DEFAULT_DELTA};
use super::distance::{corrupt_plan, plan_distance};
use super::solver::solve_exact;
use super::text::render_description;
use super::types::{AssignmentPlan, CourseInstance};
use crate::eval::{rank_scores, OracleHeuristic, Orientation, RankingTask, ShotMode, Verdict, VerifierTask};
use crate::fitness::HEURISTIC_RETRIES;
use crate::rng::{derive_seed, seeded};
use crate::{Error, Result};

/// `(keep_fraction, alter_rate)` pairs used to grade ranking candidates.
pub const CORRUPTION_GRADES: [(f64, f64); 4] = [(1.0, 0.2), (0.75, 0.2), (0.5, 0.2), (0.25, 0.2)];

const ONE_SHOT_EXAMPLE: &str = "\
Example problem: Course 1 Section 1 meets ['Monday', 'Wednesday'] at 8:30AM-9:45AM with 24 students, \
Course 1 Section 2 meets ['Monday', 'Friday'] at 8:30AM-9:45AM with 27 students, \
classroom 1 seats 30 and classroom 2 seats 25.

Candidate A:
Course 1 Section 1: classroom 2

Candidate B:
Course 1 Section 1: classroom 1
Course 1 Section 2: classroom 1

Heuristic: count the sections a plan leaves unassigned and the sections it places in a room that is too \
small or already used at an overlapping time. The plan with the smaller count is closer to a full \
solution. A leaves one section unassigned and breaks nothing, so its count is 1. B assigns both \
sections but they meet at the same time in classroom 1, so its count is 2. A is better.

Answer:
```
A > B
```";

/// Distance to the exact schedule as an oracle heuristic; lower is better.
#[derive(Debug, Default, Clone, Copy)]
pub struct PlanDistanceHeuristic;

impl OracleHeuristic for PlanDistanceHeuristic {
    type Candidate = AssignmentPlan;
    type Gold = AssignmentPlan;
    type Problem = CourseInstance;

    fn score(&self, candidate: &AssignmentPlan, gold: &AssignmentPlan, instance: &CourseInstance) -> Result<f64> {
        Ok(plan_distance(candidate, gold, instance)? as f64)
    }

    fn orientation(&self) -> Orientation {
        Orientation::LowerBetter
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseRankingTask {
    pub mode: ShotMode,
    pub gold: AssignmentPlan,
    pub candidates: Vec<AssignmentPlan>,
    pub task: RankingTask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseVerifierTask {
    pub candidate: AssignmentPlan,
    pub assessment: PlanAssessment,
    pub task: VerifierTask,
}

/// One `Course X Section Y: classroom Z` line per assigned section.
pub fn render_plan(plan: &AssignmentPlan, instance: &CourseInstance) -> String {
    if plan.is_empty() {
        return String::from("(no sections assigned)");
    }
    let mut out = String::new();
    for (&s, &r) in &plan.assignments {
        let (Some(sec), Some(room)) = (instance.sections.get(s), instance.classrooms.get(r)) else {
            continue;
        };
        let _ = writeln!(out, "{}: {}", sec.label(), room.room_id);
    }
    out.pop();
    out
}

fn problem_text(instance: &CourseInstance) -> String {
    if instance.text_description.is_empty() {
        render_description(instance)
    } else {
        instance.text_description.clone()
    }
}

/// Ranks `n_candidates` intermediate states produced by corrupting the exact
/// schedule at distinct grades. Returns the task and the oracle order
/// (closest to the exact schedule first).
pub fn build_course_heuristic_task(
    instance: &CourseInstance,
    n_candidates: usize,
    mode: ShotMode,
    seed: u64,
) -> Result<(CourseRankingTask, Vec<usize>)> {
    if mode == ShotMode::FewShot {
        return Err(Error::InvalidConfig("course ranking supports zero-shot and one-shot modes".into()));
    }
    if !(2..=CORRUPTION_GRADES.len()).contains(&n_candidates) {
        return Err(Error::InvalidConfig(format!(
            "course ranking takes 2 to {} candidates, not {n_candidates}",
            CORRUPTION_GRADES.len()
        )));
    }
    let (gold, _) = solve_exact(instance)?;
    let rooms = instance.classrooms.len();
    let mut rng = seeded(seed);

    for attempt in 0..HEURISTIC_RETRIES {
        let mut grades: Vec<(f64, f64)> = index::sample(&mut rng, CORRUPTION_GRADES.len(), n_candidates)
            .into_iter()
            .map(|g| CORRUPTION_GRADES[g])
            .collect();
        grades.shuffle(&mut rng);
        let candidates: Vec<AssignmentPlan> = grades
            .iter()
            .enumerate()
            .map(|(i, &(keep, alter))| {
                corrupt_plan(&gold, rooms, keep, alter, derive_seed(seed, (attempt * 8 + i) as u64))
            })
            .collect();
        let distances = candidates
            .iter()
            .map(|c| PlanDistanceHeuristic.score(c, &gold, instance))
            .collect::<Result<Vec<f64>>>()?;
        let distinct = distances
            .iter()
            .enumerate()
            .all(|(i, d)| distances[..i].iter().all(|e| e != d));
        if !distinct {
            continue;
        }
        let order = rank_scores(&distances, Orientation::LowerBetter);
        let task = RankingTask {
            problem_text: problem_text(instance),
            candidates: candidates.iter().map(|c| render_plan(c, instance)).collect(),
            context: (mode == ShotMode::OneShot).then(|| String::from(ONE_SHOT_EXAMPLE)),
            oracle_scores: distances,
            orientation: Orientation::LowerBetter,
        };
        return Ok((CourseRankingTask { mode, gold, candidates, task }, order));
    }
    Err(Error::DegenerateTask)
}

/// Breaks `gold` so that it is infeasible: a section moved into a room that
/// is too small, a section moved next to an overlapping one, or a dropped
/// section.
fn break_plan(gold: &AssignmentPlan, instance: &CourseInstance, rng: &mut crate::rng::Rng) -> AssignmentPlan {
    let m = instance.sections.len();
    let mut moves = Vec::new();
    for s in 0..m {
        for r in 0..instance.classrooms.len() {
            if Some(r) == gold.room_of(s) {
                continue;
            }
            let mut p = gold.clone();
            p.assign(s, r);
            moves.push(p);
        }
    }
    moves.shuffle(rng);
    let kind = rng.gen_range(0..3u8);
    if kind < 2 {
        let pick = moves.into_iter().find(|p| {
            assess(p, instance, DEFAULT_DELTA).is_ok_and(|a| !a.feasible)
        });
        if let Some(p) = pick {
            return p;
        }
    }
    let mut p = gold.clone();
    if m > 0 {
        p.assignments.remove(&rng.gen_range(0..m));
    }
    p
}

/// Either the exact schedule or a broken one, with equal probability. The
/// verdict asks for feasibility and for the occupancy bound `delta`.
pub fn build_course_verifier_task(instance: &CourseInstance, delta: f64, seed: u64) -> Result<(CourseVerifierTask, Verdict)> {
    let (gold, _) = solve_exact(instance)?;
    let mut rng = seeded(seed);
    let candidate = if rng.gen_bool(0.5) {
        gold
    } else {
        break_plan(&gold, instance, &mut rng)
    };
    let assessment = assess(&candidate, instance, delta)?;
    let verdict = Verdict {
        feasible: assessment.feasible,
        optimal: Some(assessment.threshold_pass),
    };
    let task = VerifierTask {
        problem_text: problem_text(instance),
        candidate_text: render_plan(&candidate, instance),
        context: None,
        asks_optimality: true,
        oracle_verdict: verdict,
    };
    Ok((CourseVerifierTask { candidate, assessment, task }, verdict))
}
