use alloc::format;
use alloc::string::String;
use core::fmt::Write as _;

use super::types::CourseInstance;

/// Plain-language statement of an instance, listing every section with its
/// meeting time and enrollment and every classroom with its capacity.
pub fn render_description(instance: &CourseInstance) -> String {
    let mut out = String::from("The course schedule is organized as follows:\n");
    for course in instance.course_ids() {
        let _ = writeln!(out, "{course}:");
        for s in instance.sections.iter().filter(|s| s.course_id == course) {
            let _ = writeln!(out, "  - {} meets {} with {} students enrolled.", s.section_id, s.slot, s.enrollment);
        }
    }
    let _ = writeln!(out, "The following classrooms are available:");
    for c in &instance.classrooms {
        let _ = writeln!(out, "  - {} seats {} students.", c.room_id, c.capacity);
    }
    out.push_str(&format!(
        "Assign every section to exactly one classroom so that no classroom hosts two sections at overlapping times, \
         every classroom has at least as many seats as the section's enrollment, and the total number of empty seats \
         across all {} sections is as small as possible.",
        instance.sections.len()
    ));
    out
}
