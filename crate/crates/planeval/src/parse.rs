//! Extraction of structured answers from free-form replies.
//!
//! The last fenced code block wins. Without one, role-specific patterns are
//! tried on the whole reply. Parsing never fails hard: problems come back as
//! error strings.

use std::sync::OnceLock;

use planeval_core::course::{AssignmentPlan, CourseInstance};
use planeval_core::eval::Verdict;
use planeval_core::fitness::{ExerciseSpec, FitnessPlan};
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// What kind of answer a reply should contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerKind {
    Plan,
    Verdict { optimality: bool },
    Ranking { candidates: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ParsedAnswer {
    Plan(Map<String, Value>),
    Verdict(Verdict),
    /// Candidate indices, best first. May be partial.
    Ranking(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub answer: Option<ParsedAnswer>,
    pub errors: Vec<String>,
}

impl ParseOutcome {
    fn ok(answer: ParsedAnswer) -> Self {
        Self { answer: Some(answer), errors: Vec::new() }
    }

    fn fail(error: impl Into<String>) -> Self {
        Self { answer: None, errors: vec![error.into()] }
    }
}

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("valid pattern"))
}

fn last_fenced_block(text: &str) -> Option<&str> {
    static FENCE: OnceLock<Regex> = OnceLock::new();
    regex(&FENCE, r"(?s)```[A-Za-z0-9_-]*[ \t]*\r?\n?(.*?)```")
        .captures_iter(text)
        .last()
        .and_then(|c| c.get(1))
        .map(|m| m.as_str().trim())
}

pub fn parse_answer(kind: AnswerKind, raw: &str) -> ParseOutcome {
    if raw.trim().is_empty() {
        return ParseOutcome::fail("no answer found");
    }
    let block = last_fenced_block(raw);
    match kind {
        AnswerKind::Plan => parse_plan(block, raw),
        AnswerKind::Verdict { optimality } => parse_verdict(block, raw, optimality),
        AnswerKind::Ranking { candidates } => parse_ranking(block, raw, candidates),
    }
}

/// The last balanced `{...}` span that parses as a JSON object.
fn last_json_object(text: &str) -> Option<Map<String, Value>> {
    let bytes = text.as_bytes();
    let mut end = text.len();
    while let Some(close) = text[..end].rfind('}') {
        let mut depth = 0i32;
        let mut start = None;
        for i in (0..=close).rev() {
            match bytes[i] {
                b'}' => depth += 1,
                b'{' => {
                    depth -= 1;
                    if depth == 0 {
                        start = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            if let Ok(Value::Object(m)) = serde_json::from_str(&text[s..=close]) {
                return Some(m);
            }
        }
        end = close;
    }
    None
}

/// `name: value` lines, as a fallback for plans written as lists.
fn key_value_lines(text: &str) -> Option<Map<String, Value>> {
    static LINE: OnceLock<Regex> = OnceLock::new();
    let re = regex(&LINE, r"^\s*(?:[-*]\s*)?([^:=]+?)\s*[:=]\s*(.+?)\s*$");
    let mut map = Map::new();
    for line in text.lines() {
        if let Some(c) = re.captures(line) {
            let value = c[2].trim_end_matches([',', '.']);
            let v = value.parse::<u64>().map(Value::from).unwrap_or_else(|_| Value::from(value));
            map.insert(c[1].trim_matches(['"', '*']).to_string(), v);
        }
    }
    (!map.is_empty()).then_some(map)
}

fn parse_plan(block: Option<&str>, raw: &str) -> ParseOutcome {
    let found = block
        .and_then(last_json_object)
        .or_else(|| last_json_object(raw))
        .or_else(|| block.and_then(key_value_lines));
    match found {
        Some(m) => ParseOutcome::ok(ParsedAnswer::Plan(m)),
        None => ParseOutcome::fail("no plan object found"),
    }
}

fn as_bool(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::String(s) => word_bool(s),
        _ => None,
    }
}

fn word_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "yes" | "true" | "feasible" | "admissible" | "optimal" => Some(true),
        "no" | "false" | "infeasible" | "inadmissible" | "not feasible" | "not optimal" | "suboptimal" => Some(false),
        _ => None,
    }
}

fn keyed_bool(text: &str, key: &str) -> Option<bool> {
    let pattern = format!(r"(?i)\b{key}\b\W{{0,3}}\s*(yes|no|true|false)\b");
    Regex::new(&pattern)
        .ok()?
        .captures_iter(text)
        .last()
        .and_then(|c| word_bool(&c[1]))
}

fn parse_verdict(block: Option<&str>, raw: &str, optimality: bool) -> ParseOutcome {
    static TOKEN: OnceLock<Regex> = OnceLock::new();
    static OPT: OnceLock<Regex> = OnceLock::new();
    let json = block.and_then(last_json_object).or_else(|| last_json_object(raw));
    let (feasible, optimal) = if let Some(m) = json.filter(|m| m.contains_key("feasible")) {
        (m.get("feasible").and_then(as_bool), m.get("optimal").and_then(as_bool))
    } else {
        let text = block.unwrap_or(raw);
        let feasible = keyed_bool(text, "feasible").or_else(|| keyed_bool(text, "admissible")).or_else(|| {
            regex(&TOKEN, r"(?i)\b(inadmissible|admissible|infeasible|not feasible|feasible|yes|no)\b")
                .captures_iter(text)
                .last()
                .and_then(|c| word_bool(&c[1]))
        });
        let optimal = keyed_bool(text, "optimal").or_else(|| {
            regex(&OPT, r"(?i)\b(not optimal|suboptimal|optimal)\b")
                .captures_iter(text)
                .last()
                .and_then(|c| word_bool(&c[1]))
        });
        (feasible, optimal)
    };
    match (feasible, optimal) {
        (None, _) => ParseOutcome::fail("no feasibility verdict found"),
        (Some(_), None) if optimality => ParseOutcome::fail("no optimality verdict found"),
        (Some(f), o) => ParseOutcome::ok(ParsedAnswer::Verdict(Verdict {
            feasible: f,
            optimal: if optimality { o } else { None },
        })),
    }
}

fn parse_ranking(block: Option<&str>, raw: &str, n: usize) -> ParseOutcome {
    static CHAIN: OnceLock<Regex> = OnceLock::new();
    static LETTER: OnceLock<Regex> = OnceLock::new();
    let chain = regex(&CHAIN, r"\b[A-Z]\b(?:\s*(?:>|,|;|->)\s*\b[A-Z]\b)+");
    let letter = regex(&LETTER, r"\b[A-Z]\b");
    let find = |text: &str| {
        let cleaned: String = text.chars().filter(|c| !matches!(c, '"' | '\'' | '[' | ']' | '(' | ')')).collect();
        chain.find_iter(&cleaned).last().map(|m| m.as_str().to_string())
    };
    let Some(found) = block.and_then(find).or_else(|| find(raw)) else {
        return ParseOutcome::fail("no ranking found");
    };
    let mut order = Vec::new();
    for m in letter.find_iter(&found) {
        let idx = (m.as_str().as_bytes()[0] - b'A') as usize;
        if idx >= n {
            return ParseOutcome::fail(format!("label {} is not a candidate", m.as_str()));
        }
        if order.contains(&idx) {
            return ParseOutcome::fail(format!("label {} appears twice", m.as_str()));
        }
        order.push(idx);
    }
    ParseOutcome::ok(ParsedAnswer::Ranking(order))
}

fn reps(v: &Value) -> Option<u32> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .or_else(|| n.as_f64().filter(|f| f.fract() == 0.0 && *f >= 0.0).map(|f| f as u64))
            .and_then(|x| u32::try_from(x).ok()),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Reads a `{"exercise": reps}` object against `bank`. Unlisted exercises get 0.
pub fn fitness_plan_from(map: &Map<String, Value>, bank: &[ExerciseSpec]) -> Result<FitnessPlan, String> {
    let mut plan = FitnessPlan::zeros(bank.len());
    for (name, v) in map {
        let i = bank
            .iter()
            .position(|e| e.name.eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| format!("unknown exercise {name:?}"))?;
        plan.reps[i] = reps(v).ok_or_else(|| format!("reps for {name} are not a non-negative integer: {v}"))?;
    }
    Ok(plan)
}

fn room_name(v: &Value) -> Option<&str> {
    match v {
        Value::String(s) => Some(s),
        Value::Object(o) => o.get("room").and_then(Value::as_str),
        _ => None,
    }
}

/// Reads `{"Course": {"Section": "room"}}` or `{"Course Section": "room"}`
/// against `instance`. Unlisted sections stay unassigned.
pub fn course_plan_from(map: &Map<String, Value>, instance: &CourseInstance) -> Result<AssignmentPlan, String> {
    let mut plan = AssignmentPlan::default();
    let mut place = |label: &str, s: Option<usize>, room: Option<&str>| -> Result<(), String> {
        let s = s.ok_or_else(|| format!("unknown section {label:?}"))?;
        let room = room.ok_or_else(|| format!("no classroom given for {label}"))?;
        let r = instance.room_index(room.trim()).ok_or_else(|| format!("unknown classroom {room:?}"))?;
        if plan.room_of(s).is_some() {
            return Err(format!("{label} is assigned twice"));
        }
        plan.assign(s, r);
        Ok(())
    };
    for (key, v) in map {
        match v {
            Value::Object(sections) if !sections.contains_key("room") => {
                for (section, room) in sections {
                    let label = format!("{key} {section}");
                    place(&label, instance.section_index(key.trim(), section.trim()), room_name(room))?;
                }
            }
            _ => {
                let s = instance.sections.iter().position(|s| s.label() == key.trim());
                place(key, s, room_name(v))?;
            }
        }
    }
    Ok(plan)
}
