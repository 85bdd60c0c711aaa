//! Aggregate tables over evaluation records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Environment;
use crate::error::{Error, Result};
use crate::record::{read_records, EvalRecord, Outcome};
use crate::prompt::Role;

/// One aggregated row: a group of records and its metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub condition: String,
    pub agent: String,
    pub mode: String,
    /// Graded records in the group.
    pub n: usize,
    /// Records whose task could not be built; excluded from the metrics.
    pub task_errors: usize,
    /// Aligned with the table's columns; `None` when undefined for the group.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub environment: Environment,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub role: Role,
    pub tables: Vec<ReportTable>,
}

pub fn columns(role: Role, env: Environment) -> Vec<String> {
    let names: &[&str] = match (role, env) {
        (Role::Solver, Environment::Course) => &["Completeness", "Feasibility", "Optimality", "PassRate"],
        (Role::Solver, Environment::Fitness) => &["Feasibility", "Optimality", "Diversity", "CostUtility", "PassRate"],
        (Role::Verifier, _) => &["Feasibility", "Optimality", "PassRate"],
        (Role::HeuristicRanker, _) => &["Hit@1", "Hit@2", "Hit@3", "Comparison Accuracy", "Malformed"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn frac(bits: impl IntoIterator<Item = bool>) -> Option<f64> {
    mean(bits.into_iter().map(|b| if b { 1.0 } else { 0.0 }))
}

/// Course solver rates: completeness over all, feasibility over complete
/// plans, optimality over feasible plans, pass rate over all.
fn course_solver(outcomes: &[&Outcome]) -> Vec<Option<f64>> {
    let flags: Vec<(bool, bool, bool)> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::CourseSolver { complete, feasible, optimal, .. } => Some((*complete, *feasible, *optimal)),
            _ => None,
        })
        .collect();
    vec![
        frac(flags.iter().map(|f| f.0)),
        frac(flags.iter().filter(|f| f.0).map(|f| f.1)),
        frac(flags.iter().filter(|f| f.1).map(|f| f.2)),
        frac(flags.iter().map(|f| f.1 && f.2)),
    ]
}

fn fitness_solver(outcomes: &[&Outcome]) -> Vec<Option<f64>> {
    let metrics: Vec<_> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::FitnessSolver { metrics, .. } => Some(metrics),
            _ => None,
        })
        .collect();
    let feasibility = mean(metrics.iter().map(|m| m.feasibility));
    vec![
        feasibility,
        mean(metrics.iter().map(|m| m.optimality)),
        mean(metrics.iter().map(|m| m.diversity)),
        mean(metrics.iter().map(|m| f64::from(m.cost_utility))),
        feasibility,
    ]
}

fn verifier(outcomes: &[&Outcome]) -> Vec<Option<f64>> {
    let graded: Vec<_> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Verifier { feasibility_correct, optimality_correct, pass, .. } => {
                Some((*feasibility_correct, *optimality_correct, *pass))
            }
            _ => None,
        })
        .collect();
    vec![
        frac(graded.iter().map(|g| g.0)),
        frac(graded.iter().filter_map(|g| g.1)),
        frac(graded.iter().map(|g| g.2)),
    ]
}

fn ranking(outcomes: &[&Outcome]) -> Vec<Option<f64>> {
    let results: Vec<_> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Ranking { result, .. } => Some(result),
            _ => None,
        })
        .collect();
    let mut values: Vec<Option<f64>> = (1..=3)
        .map(|k| {
            if results.iter().any(|r| r.hit(k).is_none()) {
                None
            } else {
                frac(results.iter().filter_map(|r| r.hit(k)))
            }
        })
        .collect();
    values.push(mean(results.iter().map(|r| r.pairwise_agreement)));
    values.push(frac(results.iter().map(|r| r.malformed)));
    values
}

fn row_values(role: Role, env: Environment, outcomes: &[&Outcome]) -> Vec<Option<f64>> {
    match (role, env) {
        (Role::Solver, Environment::Course) => course_solver(outcomes),
        (Role::Solver, Environment::Fitness) => fitness_solver(outcomes),
        (Role::Verifier, _) => verifier(outcomes),
        (Role::HeuristicRanker, _) => ranking(outcomes),
    }
}

/// Groups by (environment, condition, agent, mode) and computes the role's
/// columns for every group.
pub fn build_report(records: &[EvalRecord]) -> Result<Report> {
    let first = records.first().ok_or(Error::EmptyInput)?;
    let role = first.role;
    if let Some(other) = records.iter().find(|r| r.role != role) {
        return Err(Error::MixedRoles(role.name().into(), other.role.name().into()));
    }
    type Key = (Environment, String, String, String);
    let mut groups: BTreeMap<Key, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.environment, r.condition.clone(), r.agent.clone(), r.mode.name().to_string());
        groups.entry(key).or_default().push(r);
    }
    let mut tables: Vec<ReportTable> = Vec::new();
    for ((env, condition, agent, mode), members) in groups {
        let outcomes: Vec<&Outcome> = members.iter().map(|r| &r.outcome).filter(|o| !o.is_task_error()).collect();
        let row = ReportRow {
            condition,
            agent,
            mode,
            n: outcomes.len(),
            task_errors: members.len() - outcomes.len(),
            values: row_values(role, env, &outcomes),
        };
        match tables.iter_mut().find(|t| t.environment == env) {
            Some(t) => t.rows.push(row),
            None => tables.push(ReportTable { environment: env, columns: columns(role, env), rows: vec![row] }),
        }
    }
    Ok(Report { role, tables })
}

pub fn report_files(paths: &[impl AsRef<Path>]) -> Result<Report> {
    let mut records = Vec::new();
    for p in paths {
        records.extend(read_records(p.as_ref())?);
    }
    build_report(&records)
}

impl Report {
    /// Fixed-width text, four decimals, `-` for undefined cells.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "{} {}", t.environment.name(), self.role.name());
            let mut header: Vec<String> = ["condition", "agent", "mode", "N", "errors"].map(String::from).to_vec();
            header.extend(t.columns.iter().cloned());
            let mut rows = vec![header];
            for r in &t.rows {
                let mut cells = vec![r.condition.clone(), r.agent.clone(), r.mode.clone(), r.n.to_string(), r.task_errors.to_string()];
                cells.extend(r.values.iter().map(|v| v.map_or("-".to_string(), |x| format!("{x:.4}"))));
                rows.push(cells);
            }
            let widths: Vec<usize> =
                (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
            for r in rows {
                let line: Vec<String> = r.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = crate::format::pretty(self);
        s.push('\n');
        s
    }

    /// Value of `column` in the row for (`condition`, `agent`) of `env`.
    pub fn value(&self, env: Environment, condition: &str, agent: &str, column: &str) -> Option<f64> {
        let t = self.tables.iter().find(|t| t.environment == env)?;
        let c = t.columns.iter().position(|c| c == column)?;
        t.rows.iter().find(|r| r.condition == condition && r.agent == agent)?.values[c]
    }
}
