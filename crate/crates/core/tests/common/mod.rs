#![allow(dead_code)]

use std::collections::BTreeSet;

use planeval_core::course::{Classroom, CourseInstance, GeneratorParams, Section, TimeSlot, Weekday};
use planeval_core::fitness::{
    Category, EmergencyCondition, EmergencyEffect, ExerciseSpec, Intensity, Stamina, UserProfile,
};

fn ex(name: &str, minutes: u32, intensity: Intensity, gym: bool, category: Category, muscles: &[&str]) -> ExerciseSpec {
    ExerciseSpec {
        name: name.into(),
        duration_minutes: minutes,
        intensity,
        gym_required: gym,
        category,
        muscle_groups: muscles.iter().map(|m| m.to_string()).collect(),
    }
}

/// The eight exercises of the worked fitness example.
pub fn table4_bank() -> Vec<ExerciseSpec> {
    use Category::*;
    use Intensity::*;
    vec![
        ex("Jogging", 30, Low, false, Aerobic, &["legs"]),
        ex("Cycling", 45, Medium, true, Aerobic, &["legs"]),
        ex("Swimming", 60, High, true, Aerobic, &["back", "shoulders"]),
        ex("Jump Rope", 15, High, false, Aerobic, &["legs"]),
        ex("Push-Up", 2, Medium, false, Anaerobic, &["chest", "arms"]),
        ex("Bench Press", 5, High, true, Anaerobic, &["chest", "arms"]),
        ex("Shoulder Shrugs", 5, Low, false, Anaerobic, &["shoulders", "back"]),
        ex("Lunges", 5, Medium, false, Anaerobic, &["legs"]),
    ]
}

pub fn emergencies() -> Vec<EmergencyCondition> {
    vec![
        EmergencyCondition {
            description: "back pain".into(),
            effect: EmergencyEffect::ExcludeMuscleGroup("back".into()),
        },
        EmergencyCondition {
            description: "late meeting".into(),
            effect: EmergencyEffect::ReduceAvailableTime(15),
        },
        EmergencyCondition {
            description: "rope broke".into(),
            effect: EmergencyEffect::ExcludeExercise("Jump Rope".into()),
        },
    ]
}

pub fn profile(preferences: Vec<f64>, minutes: u32, gym: bool, max_reps: u32) -> UserProfile {
    UserProfile {
        name: "test".into(),
        preferences,
        available_time_minutes: minutes,
        gym_access: gym,
        stamina: Stamina::Medium,
        max_reps,
        excluded_muscle_groups: BTreeSet::new(),
    }
}

/// Small instances whose full assignment space stays under the brute-force guard.
pub fn small_params(courses: usize, rooms: (usize, usize)) -> GeneratorParams {
    GeneratorParams {
        courses,
        sections_per_course: (2, 3),
        enrollment: (20, 30),
        enrollment_tilt: 0.0,
        rooms,
        rooms_tilt: 0.0,
        capacity: (25, 35),
        capacity_tilt: 0.0,
        node_limit: 1_000_000,
    }
}

pub fn section(course: usize, section: usize, days: &[Weekday], start: u16, enrollment: u32) -> Section {
    Section {
        course_id: format!("Course {course}"),
        section_id: format!("Section {section}"),
        slot: TimeSlot::new(days.to_vec(), start, start + 75).unwrap(),
        enrollment,
    }
}

pub fn instance(sections: Vec<Section>, capacities: &[u32]) -> CourseInstance {
    CourseInstance {
        sections,
        classrooms: capacities
            .iter()
            .enumerate()
            .map(|(i, &c)| Classroom { room_id: format!("classroom {}", i + 1), capacity: c })
            .collect(),
        difficulty: None,
        text_description: String::new(),
        seed: None,
    }
}
