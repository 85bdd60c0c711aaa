mod common;

use std::collections::HashSet;

use planeval::config::{AgentSpec, Environment, ExperimentConfig};
use planeval::harness::{run, RunOptions};
use planeval::parse::ParsedAnswer;
use planeval::prompt::{PromptMode, Role};
use planeval::record::{read_records, EvalRecord, Outcome};
use planeval::report::build_report;
use planeval_core::agents::ScriptedKind;

fn config(env: Environment, role: Role, agent: ScriptedKind, dir: &std::path::Path, name: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(env, role, AgentSpec::Scripted { name: agent }, dir.join(name));
    c.n_instances = 12;
    c.seed = 11;
    c
}

fn run_all(c: &ExperimentConfig) -> Vec<EvalRecord> {
    run(c, &RunOptions::default()).unwrap();
    read_records(&c.output_path).unwrap()
}

fn all_configs(dir: &std::path::Path) -> Vec<ExperimentConfig> {
    use Environment::*;
    use Role::*;
    use ScriptedKind::*;
    let mut v = vec![
        config(Course, Solver, Random, dir, "cs.jsonl"),
        config(Course, Verifier, Random, dir, "cv.jsonl"),
        config(Course, HeuristicRanker, Random, dir, "ch.jsonl"),
        config(Fitness, Solver, HillClimb, dir, "fs.jsonl"),
        config(Fitness, Verifier, Random, dir, "fv.jsonl"),
        config(Fitness, HeuristicRanker, Random, dir, "fh.jsonl"),
    ];
    v[2].mode = Some(PromptMode::OneShot);
    v[3].episode.iterations = 6;
    v[4].mode = Some(PromptMode::FewShot);
    v[5].mode = Some(PromptMode::FewShot);
    v
}

#[test]
fn every_role_regrades_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for c in all_configs(dir.path()) {
        let records = run_all(&c);
        assert_eq!(records.len(), 12);
        for r in &records {
            assert!(!r.outcome.is_task_error(), "{:?}", r.outcome);
            assert_eq!(r.regrade(), r.outcome, "{}", r.instance_id);
            assert!(r.transcript.parsed_answer.is_some() != !r.transcript.parse_errors.is_empty());
        }
        build_report(&records).unwrap();
    }
}

#[test]
fn parallel_and_serial_runs_match() {
    let dir = tempfile::tempdir().unwrap();
    for mut c in all_configs(dir.path()) {
        c.output_path = dir.path().join("serial.jsonl");
        run(&c, &RunOptions { fresh: true, ..Default::default() }).unwrap();
        let serial = std::fs::read(&c.output_path).unwrap();
        c.output_path = dir.path().join("parallel.jsonl");
        c.parallelism = 4;
        run(&c, &RunOptions { fresh: true, ..Default::default() }).unwrap();
        assert_eq!(std::fs::read(&c.output_path).unwrap(), serial);
    }
}

#[test]
fn interrupted_run_resumes_without_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Environment::Course, Role::HeuristicRanker, ScriptedKind::Random, dir.path(), "full.jsonl");
    c.n_instances = 30;
    run(&c, &RunOptions::default()).unwrap();
    let uninterrupted = std::fs::read_to_string(&c.output_path).unwrap();

    c.output_path = dir.path().join("resumed.jsonl");
    c.parallelism = 3;
    let first = run(&c, &RunOptions { max_new_records: Some(12), ..Default::default() }).unwrap();
    assert_eq!(first.written, 12);
    // A crash in the middle of a write leaves half a line behind.
    let mut partial = std::fs::read_to_string(&c.output_path).unwrap();
    partial.push_str("{\"schema_version\":1,\"config_h");
    std::fs::write(&c.output_path, partial).unwrap();

    let second = run(&c, &RunOptions::default()).unwrap();
    assert_eq!((second.skipped, second.written), (12, 18));
    let records = read_records(&c.output_path).unwrap();
    assert_eq!(records.len(), 30);
    let ids: HashSet<_> = records.iter().map(|r| r.instance_id.clone()).collect();
    assert_eq!(ids.len(), 30);
    assert_eq!(std::fs::read_to_string(&c.output_path).unwrap(), uninterrupted);

    let third = run(&c, &RunOptions::default()).unwrap();
    assert_eq!((third.skipped, third.written), (30, 0));
}

#[test]
fn resuming_with_another_configuration_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Environment::Fitness, Role::Verifier, ScriptedKind::Random, dir.path(), "v.jsonl");
    c.n_instances = 2;
    run(&c, &RunOptions::default()).unwrap();
    c.seed += 1;
    assert!(run(&c, &RunOptions::default()).is_err());
    run(&c, &RunOptions { fresh: true, ..Default::default() }).unwrap();
}

#[test]
fn records_are_in_shuffled_order() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Environment::Fitness, Role::HeuristicRanker, ScriptedKind::Random, dir.path(), "h.jsonl");
    c.n_instances = 20;
    let records = run_all(&c);
    let positions: Vec<usize> = records.iter().map(|r| r.position).collect();
    assert_eq!(positions, (0..20).collect::<Vec<_>>());
    let ids: Vec<&str> = records.iter().map(|r| r.instance_id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_ne!(ids, sorted);
}

#[test]
fn oracle_agent_ranks_course_tasks_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Environment::Course, Role::HeuristicRanker, ScriptedKind::Oracle, dir.path(), "o.jsonl");
    c.n_instances = 100;
    c.parallelism = 4;
    let report = build_report(&run_all(&c)).unwrap();
    assert_eq!(report.value(Environment::Course, "easy", "oracle", "Hit@1"), Some(1.0));
    assert_eq!(report.value(Environment::Course, "easy", "oracle", "Comparison Accuracy"), Some(1.0));
}

#[test]
fn zero_agent_is_feasible_but_never_varied() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Environment::Fitness, Role::Solver, ScriptedKind::Zero, dir.path(), "z.jsonl");
    c.episode.iterations = 20;
    c.n_instances = 5;
    let records = run_all(&c);
    for r in &records {
        let Outcome::FitnessSolver { metrics, steps, .. } = &r.outcome else { panic!() };
        assert_eq!(steps.len(), 20);
        assert_eq!(metrics.feasibility, 1.0);
        assert_eq!(metrics.diversity, 0.0);
    }
    let report = build_report(&records).unwrap();
    assert_eq!(report.value(Environment::Fitness, "20 iter", "zero", "Feasibility"), Some(1.0));
    assert_eq!(report.value(Environment::Fitness, "20 iter", "zero", "Diversity"), Some(0.0));
}

#[test]
fn fitness_transcripts_carry_feedback_between_days() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Environment::Fitness, Role::Solver, ScriptedKind::HillClimb, dir.path(), "f.jsonl");
    c.episode.iterations = 4;
    c.n_instances = 1;
    let r = &run_all(&c)[0];
    let roles: Vec<&str> = r.transcript.messages.iter().map(|m| m.role.as_str()).collect();
    assert_eq!(roles, ["system", "user", "assistant", "user", "assistant", "user", "assistant", "user", "assistant"]);
    assert!(r.transcript.messages[3].content.contains("plan for day 1"));
    assert!(matches!(r.transcript.parsed_answer, Some(ParsedAnswer::Plan(_))));
}

#[test]
fn fixed_users_are_cycled() {
    let dir = tempfile::tempdir().unwrap();
    let users = dir.path().join("users.json");
    std::fs::write(&users, std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/users.json")).unwrap()).unwrap();
    let mut c = config(Environment::Fitness, Role::Solver, ScriptedKind::Oracle, dir.path(), "u.jsonl");
    c.users = Some(users);
    c.episode.iterations = 3;
    c.episode.emergency_probability = 0.0;
    c.n_instances = 4;
    for r in run_all(&c) {
        let Outcome::FitnessSolver { metrics, .. } = &r.outcome else { panic!() };
        assert_eq!(metrics.feasibility, 1.0);
        assert_eq!(metrics.cost_utility, 1);
    }
    assert!(std::fs::read_to_string(&c.output_path).unwrap().contains("User: Joe"));
}
