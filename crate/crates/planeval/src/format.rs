//! On-disk formats: course instance files, fitness banks and dataset manifests.

use std::fs;
use std::path::Path;

use planeval_core::course::{AssignmentPlan, Classroom, CourseInstance, Difficulty, Section, TimeSlot};
use planeval_core::fitness::{EmergencyCondition, ExerciseSpec, UserProfile};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// A course instance file: the instance plus its reference solution, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CourseFile {
    pub instance: CourseInstance,
    pub solution: Option<AssignmentPlan>,
    pub optimal_score: Option<f64>,
}

const TOP_KEYS: [&str; 5] = ["raw_problem", "text_description", "solution", "optimal_score", "metadata"];

fn object<'a>(v: &'a Value, what: &str, path: &Path) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::format(path, format!("{what} is not an object")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, path: &Path) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| Error::format(path, format!("missing key {key:?}")))
}

fn positive(v: &Value, what: &str, path: &Path) -> Result<u32> {
    v.as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::format(path, format!("{what} is not a positive integer")))
}

/// Parses the instance-file JSON. `path` is used in error messages only.
pub fn course_from_json(text: &str, path: &Path) -> Result<CourseFile> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    let root = object(&root, "the document", path)?;
    if let Some(k) = root.keys().find(|k| !TOP_KEYS.contains(&k.as_str())) {
        return Err(Error::format(path, format!("unknown key {k:?}")));
    }
    let raw = object(field(root, "raw_problem", path)?, "raw_problem", path)?;
    let periods = object(field(raw, "Class Periods", path)?, "Class Periods", path)?;
    let seats = object(field(raw, "number_of_seats", path)?, "number_of_seats", path)?;
    let rooms = object(field(raw, "Classrooms", path)?, "Classrooms", path)?;

    let mut sections = Vec::new();
    for (course, secs) in periods {
        for (section, slot) in object(secs, course, path)? {
            let label = format!("{course} {section}");
            let slot_text = slot
                .as_str()
                .ok_or_else(|| Error::format(path, format!("time of {label} is not a string")))?;
            let slot: TimeSlot = slot_text
                .parse()
                .map_err(|e| Error::format(path, format!("{label}: {e}")))?;
            let enrollment = seats
                .get(course)
                .and_then(|c| c.get(section))
                .ok_or_else(|| Error::format(path, format!("no enrollment for {label}")))?;
            sections.push(Section {
                course_id: course.clone(),
                section_id: section.clone(),
                slot,
                enrollment: positive(enrollment, &format!("enrollment of {label}"), path)?,
            });
        }
    }
    for (course, secs) in seats {
        for section in object(secs, course, path)?.keys() {
            if !periods.get(course).is_some_and(|c| c.get(section).is_some()) {
                return Err(Error::format(path, format!("{course} {section} has seats but no time")));
            }
        }
    }
    let classrooms = rooms
        .iter()
        .map(|(id, cap)| {
            Ok(Classroom { room_id: id.clone(), capacity: positive(cap, &format!("capacity of {id}"), path)? })
        })
        .collect::<Result<Vec<_>>>()?;

    let (difficulty, seed) = match root.get("metadata") {
        None => (None, None),
        Some(m) => {
            let m = object(m, "metadata", path)?;
            let difficulty = match m.get("difficulty") {
                None => None,
                Some(d) => Some(
                    serde_json::from_value::<Difficulty>(d.clone()).map_err(|e| Error::format(path, e.to_string()))?,
                ),
            };
            let seed = match m.get("seed") {
                None => None,
                Some(s) => Some(s.as_u64().ok_or_else(|| Error::format(path, "metadata seed is not an integer"))?),
            };
            (difficulty, seed)
        }
    };
    let instance = CourseInstance {
        sections,
        classrooms,
        difficulty,
        text_description: root
            .get("text_description")
            .map(|t| t.as_str().map(str::to_string).ok_or_else(|| Error::format(path, "text_description is not a string")))
            .transpose()?
            .unwrap_or_default(),
        seed,
    };
    instance.validate().map_err(|e| Error::format(path, e.to_string()))?;

    let solution = match root.get("solution") {
        None => None,
        Some(sol) => {
            let mut plan = AssignmentPlan::default();
            for (course, secs) in object(sol, "solution", path)? {
                for (section, entry) in object(secs, course, path)? {
                    let label = format!("{course} {section}");
                    let s = instance
                        .section_index(course, section)
                        .ok_or_else(|| Error::format(path, format!("solution names unknown section {label}")))?;
                    let room = entry
                        .get("room")
                        .and_then(Value::as_str)
                        .ok_or_else(|| Error::format(path, format!("solution for {label} has no room")))?;
                    let r = instance
                        .room_index(room)
                        .ok_or_else(|| Error::format(path, format!("solution names unknown classroom {room}")))?;
                    let expected = i64::from(instance.classrooms[r].capacity) - i64::from(instance.sections[s].enrollment);
                    if entry.get("seat_diff").and_then(Value::as_i64) != Some(expected) {
                        return Err(Error::format(path, format!("seat_diff of {label} should be {expected}")));
                    }
                    plan.assign(s, r);
                }
            }
            Some(plan)
        }
    };
    let optimal_score = match root.get("optimal_score") {
        None => None,
        Some(v) => Some(v.as_f64().ok_or_else(|| Error::format(path, "optimal_score is not a number"))?),
    };
    Ok(CourseFile { instance, solution, optimal_score })
}

/// Serializes with four-space indentation and a trailing newline.
pub fn course_to_json(file: &CourseFile) -> String {
    let inst = &file.instance;
    let mut periods = Map::new();
    let mut seats = Map::new();
    for s in &inst.sections {
        let entry = |m: &mut Map<String, Value>| {
            m.entry(s.course_id.clone())
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("course entry is an object")
                .clone()
        };
        let mut p = entry(&mut periods);
        p.insert(s.section_id.clone(), s.slot.to_string().into());
        periods.insert(s.course_id.clone(), Value::Object(p));
        let mut n = entry(&mut seats);
        n.insert(s.section_id.clone(), s.enrollment.into());
        seats.insert(s.course_id.clone(), Value::Object(n));
    }
    let rooms: Map<String, Value> = inst.classrooms.iter().map(|c| (c.room_id.clone(), c.capacity.into())).collect();

    let mut root = Map::new();
    root.insert(
        "raw_problem".into(),
        json!({ "Class Periods": periods, "number_of_seats": seats, "Classrooms": rooms }),
    );
    root.insert("text_description".into(), inst.text_description.clone().into());
    if let Some(plan) = &file.solution {
        let mut sol = Map::new();
        for (&s, &r) in &plan.assignments {
            let (sec, room) = (&inst.sections[s], &inst.classrooms[r]);
            let diff = i64::from(room.capacity) - i64::from(sec.enrollment);
            let mut course = sol
                .get(&sec.course_id)
                .and_then(Value::as_object)
                .cloned()
                .unwrap_or_default();
            course.insert(sec.section_id.clone(), json!({ "room": room.room_id, "seat_diff": diff }));
            sol.insert(sec.course_id.clone(), Value::Object(course));
        }
        root.insert("solution".into(), Value::Object(sol));
    }
    if let Some(score) = file.optimal_score {
        root.insert("optimal_score".into(), json!(score));
    }
    if inst.difficulty.is_some() || inst.seed.is_some() {
        let mut meta = Map::new();
        if let Some(d) = inst.difficulty {
            meta.insert("difficulty".into(), json!(d));
        }
        if let Some(s) = inst.seed {
            meta.insert("seed".into(), s.into());
        }
        root.insert("metadata".into(), Value::Object(meta));
    }
    let mut out = pretty(&Value::Object(root));
    out.push('\n');
    out
}

/// JSON with four-space indentation.
pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let fmt = serde_json::ser::PrettyFormatter::with_indent(b"    ");
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).expect("JSON values serialize");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_course(path: &Path) -> Result<CourseFile> {
    course_from_json(&read_text(path)?, path)
}

pub fn save_course(path: &Path, file: &CourseFile) -> Result<()> {
    write_text(path, &course_to_json(file))
}

/// Instance files in `dir` (`*.json` except the manifest), sorted by name.
pub fn list_course_files(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != MANIFEST_NAME))
        .collect();
    files.sort();
    Ok(files)
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))
}

const EXERCISES: &str = include_str!("../data/exercises.json");
const EMERGENCIES: &str = include_str!("../data/emergencies.json");
const USERS: &str = include_str!("../data/users.json");

pub fn parse_exercises(text: &str, path: &Path) -> Result<Vec<ExerciseSpec>> {
    let bank: Vec<ExerciseSpec> = from_json(text, path)?;
    ExerciseSpec::validate_bank(&bank)?;
    Ok(bank)
}

pub fn parse_emergencies(text: &str, path: &Path) -> Result<Vec<EmergencyCondition>> {
    let bank: Vec<EmergencyCondition> = from_json(text, path)?;
    for e in &bank {
        e.validate()?;
    }
    Ok(bank)
}

pub fn parse_users(text: &str, path: &Path, exercises: &[ExerciseSpec]) -> Result<Vec<UserProfile>> {
    let users: Vec<UserProfile> = from_json(text, path)?;
    for u in &users {
        u.validate(exercises).map_err(|e| Error::format(path, format!("user {}: {e}", u.name)))?;
    }
    Ok(users)
}

pub fn default_exercises() -> Vec<ExerciseSpec> {
    parse_exercises(EXERCISES, Path::new("data/exercises.json")).expect("bundled exercise bank is valid")
}

pub fn default_emergencies() -> Vec<EmergencyCondition> {
    parse_emergencies(EMERGENCIES, Path::new("data/emergencies.json")).expect("bundled emergency bank is valid")
}

pub fn default_users() -> Vec<UserProfile> {
    parse_users(USERS, Path::new("data/users.json"), &default_exercises()).expect("bundled user bank is valid")
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Dataset averages reported per difficulty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatistics {
    pub instances: usize,
    pub courses: f64,
    pub avg_sections_per_course: f64,
    pub avg_students_per_section: f64,
    pub avg_classrooms: f64,
    pub avg_seats_per_classroom: f64,
    pub sections_per_classroom: f64,
}

impl DatasetStatistics {
    /// Per-instance means, averaged over instances.
    pub fn from_instances(instances: &[CourseInstance]) -> Self {
        let n = instances.len().max(1) as f64;
        let mut acc = [0.0f64; 6];
        for inst in instances {
            let m = inst.sections.len() as f64;
            let r = inst.classrooms.len() as f64;
            let courses = inst.course_ids().len() as f64;
            acc[0] += courses;
            acc[1] += m / courses.max(1.0);
            acc[2] += inst.sections.iter().map(|s| f64::from(s.enrollment)).sum::<f64>() / m.max(1.0);
            acc[3] += r;
            acc[4] += inst.classrooms.iter().map(|c| f64::from(c.capacity)).sum::<f64>() / r.max(1.0);
            acc[5] += m / r.max(1.0);
        }
        Self {
            instances: instances.len(),
            courses: acc[0] / n,
            avg_sections_per_course: acc[1] / n,
            avg_students_per_section: acc[2] / n,
            avg_classrooms: acc[3] / n,
            avg_seats_per_classroom: acc[4] / n,
            sections_per_classroom: acc[5] / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub difficulty: Difficulty,
    pub seed: u64,
    pub files: Vec<String>,
    pub statistics: DatasetStatistics,
}
