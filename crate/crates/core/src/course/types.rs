use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::generate::Difficulty;
use super::slot::TimeSlot;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub course_id: String,
    pub section_id: String,
    pub slot: TimeSlot,
    pub enrollment: u32,
}

impl Section {
    /// `Course 1 Section 2`
    pub fn label(&self) -> String {
        format!("{} {}", self.course_id, self.section_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classroom {
    pub room_id: String,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseInstance {
    pub sections: Vec<Section>,
    pub classrooms: Vec<Classroom>,
    /// Absent for instances that did not come from the generator.
    pub difficulty: Option<Difficulty>,
    pub text_description: String,
    pub seed: Option<u64>,
}

impl CourseInstance {
    pub fn section_index(&self, course_id: &str, section_id: &str) -> Option<usize> {
        self.sections
            .iter()
            .position(|s| s.course_id == course_id && s.section_id == section_id)
    }

    pub fn room_index(&self, room_id: &str) -> Option<usize> {
        self.classrooms.iter().position(|c| c.room_id == room_id)
    }

    /// Distinct course ids in order of first appearance.
    pub fn course_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for s in &self.sections {
            if !ids.contains(&s.course_id.as_str()) {
                ids.push(&s.course_id);
            }
        }
        ids
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sections.iter().find(|s| s.enrollment == 0) {
            return Err(Error::InvalidConfig(format!("{} has no enrollment", s.label())));
        }
        if let Some(c) = self.classrooms.iter().find(|c| c.capacity == 0) {
            return Err(Error::InvalidConfig(format!("{} has no seats", c.room_id)));
        }
        for (i, s) in self.sections.iter().enumerate() {
            if self.sections[..i]
                .iter()
                .any(|t| t.course_id == s.course_id && t.section_id == s.section_id)
            {
                return Err(Error::InvalidConfig(format!("{} listed twice", s.label())));
            }
        }
        for (i, c) in self.classrooms.iter().enumerate() {
            if self.classrooms[..i].iter().any(|d| d.room_id == c.room_id) {
                return Err(Error::InvalidConfig(format!("{} listed twice", c.room_id)));
            }
        }
        Ok(())
    }
}

/// Section index to classroom index. Partial plans are intermediate states.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssignmentPlan {
    pub assignments: BTreeMap<usize, usize>,
}

impl AssignmentPlan {
    pub fn from_rooms(rooms: &[usize]) -> Self {
        Self {
            assignments: rooms.iter().copied().enumerate().collect(),
        }
    }

    /// Assigns `section` to `room`, replacing any earlier room.
    pub fn assign(&mut self, section: usize, room: usize) {
        self.assignments.insert(section, room);
    }

    pub fn room_of(&self, section: usize) -> Option<usize> {
        self.assignments.get(&section).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn check_references(&self, instance: &CourseInstance) -> Result<()> {
        for (&s, &r) in &self.assignments {
            if s >= instance.sections.len() {
                return Err(Error::UnknownReference(format!("section #{s}")));
            }
            if r >= instance.classrooms.len() {
                return Err(Error::UnknownReference(format!("classroom #{r}")));
            }
        }
        Ok(())
    }
}
