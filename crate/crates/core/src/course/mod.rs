//! Classroom assignment for course sections.
//!
//! Sections carry a weekly time slot and an enrollment; classrooms carry a
//! capacity. A plan maps sections to rooms and is feasible when it is
//! complete, no room hosts two overlapping sections and every room is large
//! enough. The objective is the total seat slack, which the exact solver
//! minimizes.

mod assess;
mod distance;
mod generate;
mod slot;
mod solver;
mod tasks;
mod text;
mod types;

pub use assess::{assess, PlanAssessment, DEFAULT_DELTA};
pub use distance::{corrupt_plan, plan_distance};
pub use generate::{generate_instance, generate_with, Difficulty, GeneratorParams, MAX_GENERATION_DRAWS, PERIOD_MINUTES, PERIOD_STARTS};
pub use slot::{TimeSlot, Weekday};
pub use solver::{brute_force_solve, solve_exact, solve_with_limit, SearchOutcome, BRUTE_FORCE_GUARD};
pub use tasks::{
    build_course_heuristic_task, build_course_verifier_task, render_plan, CORRUPTION_GRADES,
    CourseRankingTask, CourseVerifierTask, PlanDistanceHeuristic,
};
pub use text::render_description;
pub use types::{AssignmentPlan, Classroom, CourseInstance, Section};
