use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::slot::{TimeSlot, Weekday};
use super::solver::{solve_with_limit, SearchOutcome};
use super::text::render_description;
use super::types::{Classroom, CourseInstance, Section};
use crate::rng::{seeded, Rng};
use crate::{Error, Result};

/// Length of every class meeting.
pub const PERIOD_MINUTES: u16 = 75;
/// Meeting start times in minutes after midnight: 8:30 through 17:30.
pub const PERIOD_STARTS: [u16; 7] = [510, 600, 690, 780, 870, 960, 1050];
/// Rejected draws after which generation gives up.
pub const MAX_GENERATION_DRAWS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn courses(self) -> usize {
        match self {
            Difficulty::Easy => 5,
            Difficulty::Medium => 7,
            Difficulty::Hard => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl core::str::FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(Error::InvalidConfig(format!("unknown difficulty {s:?}"))),
        }
    }
}

/// Inclusive ranges and sampling weights for instance generation.
///
/// Enrollments, room counts and capacities are drawn from their range with
/// weights proportional to `exp(tilt * (v - lo))`; a tilt of 0 is uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub courses: usize,
    pub sections_per_course: (usize, usize),
    pub enrollment: (u32, u32),
    pub enrollment_tilt: f64,
    pub rooms: (usize, usize),
    pub rooms_tilt: f64,
    pub capacity: (u32, u32),
    pub capacity_tilt: f64,
    /// Search nodes allowed when checking that a draw is solvable. Draws
    /// that exhaust it are rejected, which keeps exact solving cheap.
    pub node_limit: u64,
}

impl GeneratorParams {
    pub fn for_difficulty(difficulty: Difficulty) -> Self {
        let (rooms, rooms_tilt, enrollment_tilt, capacity_tilt) = match difficulty {
            Difficulty::Easy => ((3, 5), -0.2, -0.01, -0.07),
            Difficulty::Medium => ((4, 5), -0.1, -0.01, -0.04),
            Difficulty::Hard => ((4, 6), -0.4, 0.0, -0.06),
        };
        Self {
            courses: difficulty.courses(),
            sections_per_course: (2, 3),
            enrollment: (20, 30),
            enrollment_tilt,
            rooms,
            rooms_tilt,
            capacity: (25, 35),
            capacity_tilt,
            node_limit: 200_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.courses > 0
            && self.sections_per_course.0 >= 1
            && self.sections_per_course.0 <= self.sections_per_course.1
            && self.enrollment.0 >= 1
            && self.enrollment.0 <= self.enrollment.1
            && self.rooms.0 >= 1
            && self.rooms.0 <= self.rooms.1
            && self.capacity.0 >= 1
            && self.capacity.0 <= self.capacity.1
            && self.enrollment_tilt.is_finite()
            && self.capacity_tilt.is_finite()
            && self.rooms_tilt.is_finite()
            && self.node_limit > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad generator parameters {self:?}")))
        }
    }
}

struct Tilted {
    lo: u32,
    index: WeightedIndex<f64>,
}

impl Tilted {
    fn new((lo, hi): (u32, u32), tilt: f64) -> Self {
        let weights: Vec<f64> = (0..=hi - lo).map(|d| libm::exp(tilt * f64::from(d))).collect();
        Self {
            lo,
            index: WeightedIndex::new(weights).expect("positive finite weights"),
        }
    }

    fn sample(&self, rng: &mut Rng) -> u32 {
        self.lo + self.index.sample(rng) as u32
    }
}

/// Every slot of the catalog: ordered pairs of distinct weekdays times the
/// period starts. Pair order only affects rendering.
fn slot_catalog() -> Vec<TimeSlot> {
    let mut out = Vec::with_capacity(20 * PERIOD_STARTS.len());
    for a in Weekday::ALL {
        for b in Weekday::ALL {
            if a == b {
                continue;
            }
            for start in PERIOD_STARTS {
                out.push(TimeSlot::new(alloc::vec![a, b], start, start + PERIOD_MINUTES).expect("catalog slot"));
            }
        }
    }
    out
}

fn draw(params: &GeneratorParams, catalog: &[TimeSlot], dists: &[Tilted; 3], rng: &mut Rng) -> CourseInstance {
    let [enroll, rooms, cap] = dists;
    let mut sections = Vec::new();
    for c in 1..=params.courses {
        let k = rng.gen_range(params.sections_per_course.0..=params.sections_per_course.1);
        for j in 1..=k {
            sections.push(Section {
                course_id: format!("Course {c}"),
                section_id: format!("Section {j}"),
                slot: catalog.choose(rng).expect("non-empty catalog").clone(),
                enrollment: enroll.sample(rng),
            });
        }
    }
    let n = rooms.sample(rng);
    let classrooms = (1..=n)
        .map(|k| Classroom {
            room_id: format!("classroom {k}"),
            capacity: cap.sample(rng),
        })
        .collect();
    CourseInstance {
        sections,
        classrooms,
        difficulty: None,
        text_description: String::new(),
        seed: None,
    }
}

/// Draws instances from `params` until one is solvable within the node limit.
pub fn generate_with(params: &GeneratorParams, seed: u64) -> Result<CourseInstance> {
    params.validate()?;
    let catalog = slot_catalog();
    let dists = [
        Tilted::new(params.enrollment, params.enrollment_tilt),
        Tilted::new((params.rooms.0 as u32, params.rooms.1 as u32), params.rooms_tilt),
        Tilted::new(params.capacity, params.capacity_tilt),
    ];
    let mut rng = seeded(seed);
    for _ in 0..MAX_GENERATION_DRAWS {
        let mut instance = draw(params, &catalog, &dists, &mut rng);
        if let SearchOutcome::Solved(..) = solve_with_limit(&instance, Some(params.node_limit)) {
            instance.seed = Some(seed);
            instance.text_description = render_description(&instance);
            return Ok(instance);
        }
    }
    Err(Error::GenerationExhausted(MAX_GENERATION_DRAWS))
}

/// A solvable instance at `difficulty`, fully determined by `seed`.
pub fn generate_instance(difficulty: Difficulty, seed: u64) -> Result<CourseInstance> {
    let mut instance = generate_with(&GeneratorParams::for_difficulty(difficulty), seed)?;
    instance.difficulty = Some(difficulty);
    Ok(instance)
}
