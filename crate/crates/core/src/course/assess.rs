use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::types::{AssignmentPlan, CourseInstance};
use crate::Result;

/// Occupancy bound for the optimality check.
pub const DEFAULT_DELTA: f64 = 1.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanAssessment {
    /// Every section is assigned.
    pub complete: bool,
    /// Complete, conflict-free and within capacity.
    pub feasible: bool,
    pub violations: Vec<String>,
    /// Sum of `capacity - enrollment` over assigned sections.
    pub total_slack: i64,
    /// Assigned seats over assigned enrollment (0 for an empty plan).
    pub occupancy_ratio: f64,
    /// Feasible and `occupancy_ratio <= delta`.
    pub threshold_pass: bool,
    /// The literal `total_slack > delta` predicate.
    pub slack_exceeds_delta: bool,
}

/// Grades `plan` on `instance` with occupancy bound `delta`.
pub fn assess(plan: &AssignmentPlan, instance: &CourseInstance, delta: f64) -> Result<PlanAssessment> {
    plan.check_references(instance)?;
    let sections = &instance.sections;
    let rooms = &instance.classrooms;
    let mut violations = Vec::new();

    for (i, s) in sections.iter().enumerate() {
        if plan.room_of(i).is_none() {
            violations.push(format!("{} is not assigned to any classroom", s.label()));
        }
    }
    let complete = violations.is_empty();
    let mut hard = 0usize;

    let mut seats = 0u64;
    let mut students = 0u64;
    for (&s, &r) in &plan.assignments {
        let (sec, room) = (&sections[s], &rooms[r]);
        seats += u64::from(room.capacity);
        students += u64::from(sec.enrollment);
        if sec.enrollment > room.capacity {
            hard += 1;
            violations.push(format!(
                "{} has {} students but {} seats only {}",
                sec.label(),
                sec.enrollment,
                room.room_id,
                room.capacity
            ));
        }
    }
    let assigned: Vec<(usize, usize)> = plan.assignments.iter().map(|(&s, &r)| (s, r)).collect();
    for (x, &(a, ra)) in assigned.iter().enumerate() {
        for &(b, rb) in &assigned[x + 1..] {
            if ra == rb && sections[a].slot.overlaps(&sections[b].slot) {
                hard += 1;
                violations.push(format!(
                    "{} and {} overlap in {}",
                    sections[a].label(),
                    sections[b].label(),
                    rooms[ra].room_id
                ));
            }
        }
    }

    let total_slack = seats as i64 - students as i64;
    let occupancy_ratio = if students == 0 { 0.0 } else { seats as f64 / students as f64 };
    let feasible = complete && hard == 0;
    Ok(PlanAssessment {
        complete,
        feasible,
        violations,
        total_slack,
        occupancy_ratio,
        threshold_pass: feasible && occupancy_ratio <= delta,
        slack_exceeds_delta: total_slack as f64 > delta,
    })
}
