//! Evaluation records: one JSON line per graded instance.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use planeval_core::course::{assess, AssignmentPlan, CourseInstance, PlanAssessment};
use planeval_core::eval::{grade_ranking, RankingResult, Verdict};
use planeval_core::fitness::{EmergencyCondition, Feedback, FitnessPlan, SolverMetrics};
use serde::{Deserialize, Serialize};

use crate::client::{Message, TokenUsage};
use crate::config::Environment;
use crate::error::{Error, Result};
use crate::parse::{course_plan_from, parse_answer, AnswerKind, ParseOutcome, ParsedAnswer};
use crate::prompt::{PromptMode, Role};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything said during one task and what was read from the final reply.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub parsed_answer: Option<ParsedAnswer>,
    pub parse_errors: Vec<String>,
    pub token_usage: Option<TokenUsage>,
    pub retries: u32,
    /// Set when the agent produced no reply at all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_error: Option<String>,
}

impl Transcript {
    pub fn add_usage(&mut self, usage: Option<TokenUsage>) {
        if let Some(u) = usage {
            let t = self.token_usage.get_or_insert_with(TokenUsage::default);
            t.prompt_tokens += u.prompt_tokens;
            t.completion_tokens += u.completion_tokens;
        }
    }

    pub fn set_parse(&mut self, parse: ParseOutcome) {
        self.parsed_answer = parse.answer;
        self.parse_errors = parse.errors;
    }

    /// The reply that gets graded: the last assistant message, or nothing.
    pub fn final_reply(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == "assistant")
            .map_or("", |m| m.content.as_str())
    }
}

/// One fitness iteration as seen by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    /// 1-based day.
    pub iteration: u32,
    pub plan: FitnessPlan,
    pub feasible: bool,
    pub violations: Vec<String>,
    pub satisfaction: f64,
    pub emergency: Option<EmergencyCondition>,
    /// Why no plan could be read, if so.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl StepLog {
    pub fn new(iteration: u32, plan: FitnessPlan, feedback: &Feedback, failure: Option<String>) -> Self {
        Self {
            iteration,
            plan,
            feasible: feedback.feasible,
            violations: feedback.violations.clone(),
            satisfaction: feedback.satisfaction,
            emergency: feedback.emergency.clone(),
            failure,
        }
    }

    fn feedback(&self) -> Feedback {
        Feedback {
            satisfaction: self.satisfaction,
            feasible: self.feasible,
            violations: self.violations.clone(),
            emergency: self.emergency.clone(),
        }
    }
}

/// The graded result, by role. Externally tagged so that integer-keyed maps
/// inside survive a round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    CourseSolver {
        instance: CourseInstance,
        optimal_slack: i64,
        delta: f64,
        plan: Option<AssignmentPlan>,
        plan_error: Option<String>,
        assessment: Option<PlanAssessment>,
        complete: bool,
        feasible: bool,
        /// Feasible and within the occupancy bound.
        optimal: bool,
        /// Seat slack equals the exact optimum.
        matches_optimum: bool,
    },
    FitnessSolver {
        steps: Vec<StepLog>,
        /// Satisfaction the desired plan would have earned each day.
        references: Vec<f64>,
        bank_size: usize,
        cost_utility_threshold: f64,
        metrics: SolverMetrics,
    },
    Verifier {
        expected: Verdict,
        predicted: Option<Verdict>,
        feasibility_correct: bool,
        optimality_correct: Option<bool>,
        pass: bool,
    },
    Ranking {
        oracle_order: Vec<usize>,
        agent_order: Option<Vec<usize>>,
        result: RankingResult,
    },
    TaskError {
        message: String,
    },
}

impl Outcome {
    pub fn is_task_error(&self) -> bool {
        matches!(self, Outcome::TaskError { .. })
    }
}

pub fn grade_verifier(parse: &ParseOutcome, expected: Verdict) -> Outcome {
    let predicted = match &parse.answer {
        Some(ParsedAnswer::Verdict(v)) => Some(*v),
        _ => None,
    };
    let feasibility_correct = predicted.is_some_and(|p| p.feasible == expected.feasible);
    let optimality_correct = expected.optimal.map(|o| predicted.and_then(|p| p.optimal) == Some(o));
    Outcome::Verifier {
        expected,
        predicted,
        feasibility_correct,
        optimality_correct,
        pass: feasibility_correct && optimality_correct.unwrap_or(true),
    }
}

pub fn grade_ranking_answer(parse: &ParseOutcome, oracle_order: &[usize]) -> Outcome {
    let agent_order = match &parse.answer {
        Some(ParsedAnswer::Ranking(o)) => Some(o.clone()),
        _ => None,
    };
    let result = grade_ranking(agent_order.as_deref().unwrap_or(&[]), oracle_order);
    Outcome::Ranking { oracle_order: oracle_order.to_vec(), agent_order, result }
}

pub fn grade_course_plan(parse: &ParseOutcome, instance: &CourseInstance, optimal_slack: i64, delta: f64) -> Outcome {
    let (plan, plan_error) = match &parse.answer {
        Some(ParsedAnswer::Plan(m)) => match course_plan_from(m, instance) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e)),
        },
        _ => (None, None),
    };
    let assessment = plan.as_ref().and_then(|p| assess(p, instance, delta).ok());
    let (complete, feasible, optimal, matches_optimum) = match &assessment {
        Some(a) => (a.complete, a.feasible, a.threshold_pass, a.feasible && a.total_slack == optimal_slack),
        None => (false, false, false, false),
    };
    Outcome::CourseSolver {
        instance: instance.clone(),
        optimal_slack,
        delta,
        plan,
        plan_error,
        assessment,
        complete,
        feasible,
        optimal,
        matches_optimum,
    }
}

pub fn grade_fitness_steps(steps: Vec<StepLog>, references: Vec<f64>, bank_size: usize, threshold: f64) -> Outcome {
    let plans: Vec<FitnessPlan> = steps.iter().map(|s| s.plan.clone()).collect();
    let feedbacks: Vec<Feedback> = steps.iter().map(StepLog::feedback).collect();
    let metrics = SolverMetrics::from_logs(&plans, &feedbacks, &references, bank_size, threshold);
    Outcome::FitnessSolver { steps, references, bank_size, cost_utility_threshold: threshold, metrics }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub instance_id: String,
    /// Place in the run's shuffled order.
    pub position: usize,
    pub seed: u64,
    pub environment: Environment,
    pub role: Role,
    pub mode: PromptMode,
    pub agent: String,
    pub condition: String,
    pub transcript: Transcript,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    /// Milliseconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl EvalRecord {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn from_line(line: &str) -> std::result::Result<Self, String> {
        let version = record_version(line).ok_or("missing schema_version")?;
        if version != u64::from(SCHEMA_VERSION) {
            return Err(format!("unsupported record schema version {version}"));
        }
        serde_json::from_str(line).map_err(|e| e.to_string())
    }

    /// Recomputes the outcome from the stored transcript and grading inputs.
    pub fn regrade(&self) -> Outcome {
        let reply = self.transcript.final_reply();
        match &self.outcome {
            Outcome::Verifier { expected, .. } => {
                let kind = AnswerKind::Verdict { optimality: expected.optimal.is_some() };
                grade_verifier(&parse_answer(kind, reply), *expected)
            }
            Outcome::Ranking { oracle_order, .. } => {
                let kind = AnswerKind::Ranking { candidates: oracle_order.len() };
                grade_ranking_answer(&parse_answer(kind, reply), oracle_order)
            }
            Outcome::CourseSolver { instance, optimal_slack, delta, .. } => {
                grade_course_plan(&parse_answer(AnswerKind::Plan, reply), instance, *optimal_slack, *delta)
            }
            Outcome::FitnessSolver { steps, references, bank_size, cost_utility_threshold, .. } => {
                grade_fitness_steps(steps.clone(), references.clone(), *bank_size, *cost_utility_threshold)
            }
            Outcome::TaskError { .. } => self.outcome.clone(),
        }
    }
}

fn record_version(line: &str) -> Option<u64> {
    #[derive(Deserialize)]
    struct Probe {
        schema_version: Option<u64>,
    }
    serde_json::from_str::<Probe>(line).ok()?.schema_version
}

/// Reads every record; any bad line is an error.
pub fn read_records(path: &Path) -> Result<Vec<EvalRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match EvalRecord::from_line(&line) {
            Ok(r) => out.push(r),
            Err(msg) => {
                if let Some(v) = record_version(&line) {
                    if v != u64::from(SCHEMA_VERSION) {
                        return Err(Error::SchemaVersion(v as u32));
                    }
                }
                return Err(Error::format(path, format!("line {}: {msg}", n + 1)));
            }
        }
    }
    Ok(out)
}

/// Records of an interrupted run. A trailing line without a newline, left by
/// a crash mid-write, is cut off; any other bad line is an error.
pub fn recover_records(path: &Path) -> Result<Vec<EvalRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    if complete < text.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
        f.set_len(complete as u64).map_err(|e| Error::io(path, e))?;
    }
    let mut out = Vec::new();
    for (n, line) in text[..complete].lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(EvalRecord::from_line(line).map_err(|m| Error::format(path, format!("line {}: {m}", n + 1)))?);
    }
    Ok(out)
}

/// Append-only JSONL sink.
pub struct RecordWriter {
    file: File,
    path: std::path::PathBuf,
}

impl RecordWriter {
    pub fn append(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { file, path: path.to_path_buf() })
    }

    pub fn write(&mut self, record: &EvalRecord) -> Result<()> {
        self.file
            .write_all(record.to_line().as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn record(outcome: Outcome, reply: &str) -> EvalRecord {
        EvalRecord {
            schema_version: SCHEMA_VERSION,
            config_hash: "h".into(),
            instance_id: "i".into(),
            position: 0,
            seed: 1,
            environment: Environment::Course,
            role: Role::Verifier,
            mode: PromptMode::Direct,
            agent: "random".into(),
            condition: "easy".into(),
            transcript: Transcript { messages: vec![Message::assistant(reply)], ..Default::default() },
            outcome,
            wall_time_ms: None,
            timestamp: None,
        }
    }

    #[test]
    fn verifier_grading() {
        let expected = Verdict { feasible: true, optimal: Some(false) };
        let p = parse_answer(AnswerKind::Verdict { optimality: true }, "```\n{\"feasible\": true, \"optimal\": false}\n```");
        let Outcome::Verifier { pass, .. } = grade_verifier(&p, expected) else { panic!() };
        assert!(pass);
        let p = parse_answer(AnswerKind::Verdict { optimality: true }, "feasible: yes, optimal: yes");
        let Outcome::Verifier { pass, feasibility_correct, .. } = grade_verifier(&p, expected) else { panic!() };
        assert!(feasibility_correct && !pass);
        let p = parse_answer(AnswerKind::Verdict { optimality: true }, "");
        let Outcome::Verifier { pass, predicted, .. } = grade_verifier(&p, expected) else { panic!() };
        assert!(!pass && predicted.is_none());
    }

    #[test]
    fn line_round_trip_and_regrade() {
        let reply = "Final answer: B > A > C";
        let parse = parse_answer(AnswerKind::Ranking { candidates: 3 }, reply);
        let r = record(grade_ranking_answer(&parse, &[1, 0, 2]), reply);
        let back = EvalRecord::from_line(&r.to_line()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.regrade(), r.outcome);
    }

    #[test]
    fn rejects_other_versions() {
        let mut v: Value = serde_json::to_value(record(Outcome::TaskError { message: "x".into() }, "")).unwrap();
        v["schema_version"] = 2.into();
        let err = EvalRecord::from_line(&v.to_string()).unwrap_err();
        assert!(err.contains("version 2"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        std::fs::write(&path, format!("{v}\n")).unwrap();
        assert!(matches!(read_records(&path), Err(Error::SchemaVersion(2))));
    }

    #[test]
    fn recovery_cuts_partial_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let r = record(Outcome::TaskError { message: "x".into() }, "");
        std::fs::write(&path, format!("{}{{\"schema_ver", r.to_line())).unwrap();
        let got = recover_records(&path).unwrap();
        assert_eq!(got, vec![r.clone()]);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), r.to_line());
    }
}
