//! Prompt templates and rendering for every role.
//!
//! Templates are plain-text files with `{{name}}` placeholders, compiled into
//! the binary. Their combined hash is stored in every record.

use std::fmt::Write as _;

use planeval_core::course::{AssignmentPlan, CourseInstance};
use planeval_core::eval::{RankingTask, Verdict, VerifierTask};
use planeval_core::fitness::{describe_constraints, describe_emergency, describe_profile, ActiveConstraints, ExerciseSpec, Feedback, FitnessPlan, UserProfile};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::client::Message;
use crate::config::Environment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Solver,
    Verifier,
    HeuristicRanker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptMode {
    Direct,
    #[serde(rename = "cot")]
    CoT,
    ZeroShot,
    FewShot,
    OneShot,
}

impl PromptMode {
    pub fn name(self) -> &'static str {
        match self {
            PromptMode::Direct => "direct",
            PromptMode::CoT => "cot",
            PromptMode::ZeroShot => "zero-shot",
            PromptMode::FewShot => "few-shot",
            PromptMode::OneShot => "one-shot",
        }
    }
}

impl std::str::FromStr for PromptMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [PromptMode::Direct, PromptMode::CoT, PromptMode::ZeroShot, PromptMode::FewShot, PromptMode::OneShot]
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown prompt mode {s:?}")))
    }
}

/// A named template and the answer-block instructions appended to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: &'static str,
    pub role: Role,
    pub text: &'static str,
    pub output_schema: &'static str,
}

macro_rules! template {
    ($file:literal) => {
        ($file, include_str!(concat!("../templates/", $file)))
    };
}

const FILES: [(&str, &str); 15] = [
    template!("system.txt"),
    template!("fitness_solver.txt"),
    template!("fitness_feedback.txt"),
    template!("course_solver.txt"),
    template!("verifier_fitness.txt"),
    template!("verifier_course.txt"),
    template!("ranker_fitness.txt"),
    template!("ranker_course.txt"),
    template!("strategy_direct.txt"),
    template!("strategy_cot.txt"),
    template!("schema_fitness_plan.txt"),
    template!("schema_course_plan.txt"),
    template!("schema_verdict.txt"),
    template!("schema_verdict_optimal.txt"),
    template!("schema_ranking.txt"),
];

fn file(name: &str) -> &'static str {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).expect("template compiled in")
}

pub fn template(role: Role, env: Environment) -> PromptTemplate {
    let (name, schema) = match (role, env) {
        (Role::Solver, Environment::Fitness) => ("fitness_solver.txt", "schema_fitness_plan.txt"),
        (Role::Solver, Environment::Course) => ("course_solver.txt", "schema_course_plan.txt"),
        (Role::Verifier, Environment::Fitness) => ("verifier_fitness.txt", "schema_verdict.txt"),
        (Role::Verifier, Environment::Course) => ("verifier_course.txt", "schema_verdict_optimal.txt"),
        (Role::HeuristicRanker, Environment::Fitness) => ("ranker_fitness.txt", "schema_ranking.txt"),
        (Role::HeuristicRanker, Environment::Course) => ("ranker_course.txt", "schema_ranking.txt"),
    };
    PromptTemplate { name, role, text: file(name), output_schema: file(schema) }
}

/// SHA-256 over every template file, in a fixed order.
pub fn templates_hash() -> String {
    let mut h = Sha256::new();
    for (name, text) in FILES {
        h.update(name.as_bytes());
        h.update([0]);
        h.update(text.as_bytes());
        h.update([0]);
    }
    hex(&h.finalize())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Substitutes every `{{name}}`. Unknown placeholders are an error; blank
/// lines left by empty bindings are collapsed.
pub fn fill(template: &str, text: &str, bindings: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        let close = after.find("}}").ok_or_else(|| Error::UnboundPlaceholder {
            template: template.into(),
            name: after.chars().take(20).collect(),
        })?;
        let name = after[..close].trim();
        let value = bindings
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::UnboundPlaceholder { template: template.into(), name: name.into() })?;
        out.push_str(value.trim_end_matches('\n'));
        rest = &after[close + 2..];
    }
    out.push_str(rest);
    let mut collapsed = String::with_capacity(out.len());
    let mut blank = 0;
    for line in out.trim().lines() {
        if line.trim().is_empty() {
            blank += 1;
            if blank > 1 {
                continue;
            }
        } else {
            blank = 0;
        }
        collapsed.push_str(line.trim_end());
        collapsed.push('\n');
    }
    Ok(collapsed)
}

fn strategy(mode: PromptMode) -> &'static str {
    match mode {
        PromptMode::CoT => file("strategy_cot.txt"),
        _ => file("strategy_direct.txt"),
    }
}

fn user_message(t: &PromptTemplate, mode: PromptMode, bindings: &[(&str, &str)], schema_bindings: &[(&str, &str)]) -> Result<Message> {
    let body = fill(t.name, t.text, bindings)?;
    let schema = fill(t.name, t.output_schema, schema_bindings)?;
    Ok(Message::user(format!("{body}\n{}\n{schema}", strategy(mode).trim_end())))
}

fn system() -> Message {
    Message::system(file("system.txt").trim_end())
}

pub fn candidate_label(i: usize) -> char {
    (b'A' + (i % 26) as u8) as char
}

/// Opening messages of a fitness episode. Preferences stay hidden.
pub fn render_fitness_solver(profile: &UserProfile, bank: &[ExerciseSpec], mode: PromptMode) -> Result<Vec<Message>> {
    let t = template(Role::Solver, Environment::Fitness);
    let profile_text = describe_profile(profile, bank, false);
    Ok(vec![system(), user_message(&t, mode, &[("profile", &profile_text)], &[])?])
}

/// The user's reply after day `day` (1-based).
pub fn render_fitness_feedback(day: u32, feedback: &Feedback, constraints: &ActiveConstraints) -> Result<Message> {
    let mut text = if feedback.feasible {
        format!("The plan was admissible. Satisfaction: {:.2} out of 10.", feedback.satisfaction)
    } else {
        let mut t = String::from("The plan is inadmissible:");
        for v in &feedback.violations {
            let _ = write!(t, "\n- {v}");
        }
        t
    };
    if let Some(e) = &feedback.emergency {
        let _ = write!(text, "\nNew condition: {}", describe_emergency(e));
    }
    let constraints = describe_constraints(constraints);
    let (d, n) = (day.to_string(), (day + 1).to_string());
    let body = fill(
        "fitness_feedback.txt",
        file("fitness_feedback.txt"),
        &[("day", &d), ("next_day", &n), ("feedback", &text), ("constraints", &constraints)],
    )?;
    Ok(Message::user(body.trim_end()))
}

pub fn render_course_solver(instance: &CourseInstance, mode: PromptMode) -> Result<Vec<Message>> {
    let t = template(Role::Solver, Environment::Course);
    let problem = problem_text(instance);
    Ok(vec![system(), user_message(&t, mode, &[("problem", &problem)], &[])?])
}

fn problem_text(instance: &CourseInstance) -> String {
    if instance.text_description.is_empty() {
        planeval_core::course::render_description(instance)
    } else {
        instance.text_description.clone()
    }
}

fn context_block(context: &Option<String>, heading: &str) -> String {
    context.as_ref().map(|c| format!("{heading}\n{c}")).unwrap_or_default()
}

pub fn render_verifier(task: &VerifierTask, env: Environment, mode: PromptMode, delta: f64) -> Result<Vec<Message>> {
    let t = template(Role::Verifier, env);
    let context = context_block(&task.context, "Earlier days:");
    let delta = delta.to_string();
    let msg = user_message(
        &t,
        mode,
        &[
            ("problem", &task.problem_text),
            ("context", &context),
            ("candidate", &task.candidate_text),
            ("delta", &delta),
        ],
        &[],
    )?;
    Ok(vec![system(), msg])
}

pub fn render_ranking(task: &RankingTask, env: Environment, mode: PromptMode) -> Result<Vec<Message>> {
    let t = template(Role::HeuristicRanker, env);
    let heading = match env {
        Environment::Fitness => "Earlier days:",
        Environment::Course => "Worked example:",
    };
    let context = context_block(&task.context, heading);
    let mut candidates = String::new();
    for (i, c) in task.candidates.iter().enumerate() {
        let _ = writeln!(candidates, "Candidate {}:\n{c}\n", candidate_label(i));
    }
    let example = render_order(&(0..task.candidates.len()).rev().collect::<Vec<_>>());
    let msg = user_message(
        &t,
        mode,
        &[("problem", &task.problem_text), ("context", &context), ("candidates", &candidates)],
        &[("example", &example)],
    )?;
    Ok(vec![system(), msg])
}

pub fn render_order(order: &[usize]) -> String {
    order.iter().map(|&i| candidate_label(i).to_string()).collect::<Vec<_>>().join(" > ")
}

fn fenced(body: &str) -> String {
    format!("```\n{body}\n```")
}

/// Canonical answer block for a fitness plan.
pub fn answer_fitness_plan(plan: &FitnessPlan, bank: &[ExerciseSpec]) -> String {
    let map: serde_json::Map<String, serde_json::Value> = plan
        .reps
        .iter()
        .zip(bank)
        .filter(|(&r, _)| r > 0)
        .map(|(&r, ex)| (ex.name.clone(), r.into()))
        .collect();
    fenced(&serde_json::Value::Object(map).to_string())
}

/// Canonical answer block for a classroom assignment.
pub fn answer_course_plan(plan: &AssignmentPlan, instance: &CourseInstance) -> String {
    let mut map = serde_json::Map::new();
    for (&s, &r) in &plan.assignments {
        let (Some(sec), Some(room)) = (instance.sections.get(s), instance.classrooms.get(r)) else {
            continue;
        };
        let course = map
            .entry(sec.course_id.clone())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
        if let serde_json::Value::Object(c) = course {
            c.insert(sec.section_id.clone(), room.room_id.clone().into());
        }
    }
    fenced(&serde_json::Value::Object(map).to_string())
}

pub fn answer_verdict(v: &Verdict) -> String {
    fenced(&serde_json::to_string(v).expect("verdict serializes"))
}

pub fn answer_ranking(order: &[usize]) -> String {
    fenced(&render_order(order))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_binds_and_rejects() {
        assert_eq!(fill("t", "a {{x}} b\n\n{{y}}\n\nc", &[("x", "1"), ("y", "")]).unwrap(), "a 1 b\n\nc\n");
        assert!(matches!(fill("t", "{{missing}}", &[]), Err(Error::UnboundPlaceholder { .. })));
        assert!(matches!(fill("t", "{{open", &[]), Err(Error::UnboundPlaceholder { .. })));
    }

    #[test]
    fn every_template_renders() {
        for env in [Environment::Fitness, Environment::Course] {
            for role in [Role::Solver, Role::Verifier, Role::HeuristicRanker] {
                let t = template(role, env);
                assert!(!t.text.is_empty() && !t.output_schema.is_empty());
            }
        }
        assert_eq!(templates_hash().len(), 64);
        assert_eq!(templates_hash(), templates_hash());
    }

    #[test]
    fn labels() {
        assert_eq!(render_order(&[1, 0, 3, 2]), "B > A > D > C");
    }
}
