//! Runs a configured evaluation and streams one record per instance.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use planeval_core::agents::{
    CourseSolverAgent, FitnessAgent, HillClimbAgent, OracleAgent, PlanningContext, RandomAgent, RankingAgent,
    ScriptedKind, VerifierAgent, ZeroAgent,
};
use planeval_core::course::{
    build_course_heuristic_task, build_course_verifier_task, generate_instance, solve_exact, CourseInstance,
    Difficulty,
};
use planeval_core::eval::{RankingTask, VerifierTask};
use planeval_core::fitness::{
    build_heuristic_task, build_verifier_task, sample_profile, EmergencyCondition, ExerciseSpec, FitnessEnv,
    FitnessPlan, FitnessWorld, UserProfile,
};
use planeval_core::rng::{derive_seed, seeded};
use rand::seq::SliceRandom;

use crate::client::{ChatClient, ChatError, Message};
use crate::config::{AgentSpec, Environment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::format::{
    self, list_course_files, load_course, save_course, CourseFile, DatasetManifest, DatasetStatistics, MANIFEST_NAME,
};
use crate::parse::{fitness_plan_from, parse_answer, AnswerKind, ParseOutcome, ParsedAnswer};
use crate::prompt::{
    answer_course_plan, answer_fitness_plan, answer_ranking, answer_verdict, render_course_solver,
    render_fitness_feedback, render_fitness_solver, render_ranking, render_verifier, PromptMode, Role,
};
use crate::record::{
    grade_course_plan, grade_fitness_steps, grade_ranking_answer, grade_verifier, recover_records, EvalRecord,
    Outcome, RecordWriter, StepLog, Transcript, SCHEMA_VERSION,
};

const SHUFFLE_STREAM: u64 = 0x5348_5546;
const AGENT_STREAM: u64 = 1;
const PROFILE_STREAM: u64 = 2;

/// Seed of the `index`-th instance of a run or dataset.
pub fn instance_seed(base: u64, index: usize) -> u64 {
    derive_seed(base, index as u64)
}

/// Writes `count` instance files plus a manifest into `out_dir`.
pub fn generate_dataset(difficulty: Difficulty, count: usize, seed: u64, out_dir: &Path) -> Result<DatasetManifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::with_capacity(count);
    let mut instances = Vec::with_capacity(count);
    for i in 0..count {
        let instance = generate_instance(difficulty, instance_seed(seed, i))?;
        let (plan, slack) = solve_exact(&instance)?;
        let name = format!("{}_{i:04}.json", difficulty.name());
        let file = CourseFile { instance, solution: Some(plan), optimal_score: Some(slack as f64) };
        save_course(&out_dir.join(&name), &file)?;
        files.push(name);
        instances.push(file.instance);
    }
    let manifest = DatasetManifest {
        difficulty,
        seed,
        files,
        statistics: DatasetStatistics::from_instances(&instances),
    };
    let mut text = format::pretty(&manifest);
    text.push('\n');
    format::write_text(&out_dir.join(MANIFEST_NAME), &text)?;
    Ok(manifest)
}

/// One unit of work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceSpec {
    pub index: usize,
    pub id: String,
    pub seed: u64,
}

/// Deterministic permutation of `0..n` for the run order.
pub fn shuffled_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(derive_seed(seed, SHUFFLE_STREAM)));
    order
}

#[derive(Default, Clone)]
pub struct RunOptions {
    /// Stop after this many new records, as if interrupted.
    pub max_new_records: Option<usize>,
    /// Discard existing output instead of resuming.
    pub fresh: bool,
    /// Use this client instead of building one from the configuration.
    pub client: Option<Arc<ChatClient>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub total: usize,
    pub skipped: usize,
    pub written: usize,
}

enum Backend {
    Scripted(ScriptedKind),
    Chat(Arc<ChatClient>),
}

struct Runner<'a> {
    config: &'a ExperimentConfig,
    hash: String,
    mode: PromptMode,
    agent: String,
    backend: Backend,
    exercises: Vec<ExerciseSpec>,
    emergencies: Vec<EmergencyCondition>,
    users: Option<Vec<UserProfile>>,
    course_files: Option<Vec<PathBuf>>,
}

/// Runs `config`, appending to its output file and skipping instances that
/// are already recorded there.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary> {
    config.validate()?;
    let runner = Runner::new(config, options)?;
    let instances = runner.instances()?;
    let order = shuffled_order(instances.len(), config.seed);

    let path = &config.output_path;
    let mut done = HashSet::new();
    if path.exists() && !options.fresh {
        for r in recover_records(path)? {
            if r.config_hash != runner.hash {
                return Err(Error::Config(format!(
                    "{} holds records of a different configuration; pass --fresh to overwrite",
                    path.display()
                )));
            }
            done.insert(r.instance_id);
        }
    } else if path.exists() {
        std::fs::remove_file(path).map_err(|e| Error::io(path, e))?;
    }
    let mut pending: Vec<(usize, &InstanceSpec)> = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| (pos, &instances[i]))
        .filter(|(_, s)| !done.contains(&s.id))
        .collect();
    let skipped = instances.len() - pending.len();
    if let Some(m) = options.max_new_records {
        pending.truncate(m);
    }
    let mut writer = RecordWriter::append(path)?;
    let written = runner.execute(&pending, &mut writer)?;
    Ok(RunSummary { total: instances.len(), skipped, written })
}

fn scripted_fitness(kind: ScriptedKind, seed: u64) -> Box<dyn FitnessAgent> {
    match kind {
        ScriptedKind::Random => Box::new(RandomAgent::new(seed)),
        ScriptedKind::Oracle => Box::new(OracleAgent),
        ScriptedKind::HillClimb => Box::new(HillClimbAgent::new(seed)),
        ScriptedKind::Zero => Box::new(ZeroAgent),
    }
}

fn scripted_other(kind: ScriptedKind, seed: u64) -> Result<Box<dyn ScriptedTaskAgent>> {
    match kind {
        ScriptedKind::Random => Ok(Box::new(RandomAgent::new(seed))),
        ScriptedKind::Oracle => Ok(Box::new(OracleAgent)),
        other => Err(Error::Config(format!("scripted agent {} only plays the fitness solver", other.name()))),
    }
}

trait ScriptedTaskAgent: RankingAgent + VerifierAgent + CourseSolverAgent {}
impl<T: RankingAgent + VerifierAgent + CourseSolverAgent> ScriptedTaskAgent for T {}

fn reask_text(errors: &[String]) -> String {
    format!(
        "Your answer could not be read ({}). Reply again with only the required answer block.",
        errors.join("; ")
    )
}

impl<'a> Runner<'a> {
    fn new(config: &'a ExperimentConfig, options: &RunOptions) -> Result<Self> {
        let backend = match (&config.agent, &options.client) {
            (AgentSpec::Scripted { name }, _) => Backend::Scripted(*name),
            (AgentSpec::Endpoint(_), Some(c)) => Backend::Chat(c.clone()),
            (AgentSpec::Endpoint(c), None) => {
                if std::env::var(&c.api_key_env).map_or(true, |k| k.is_empty()) {
                    return Err(ChatError::Auth(format!("environment variable {} is not set", c.api_key_env)).into());
                }
                Backend::Chat(Arc::new(ChatClient::new(c.clone())))
            }
        };
        let exercises = match &config.exercises {
            Some(p) => format::parse_exercises(&format::read_text(p)?, p)?,
            None => format::default_exercises(),
        };
        let emergencies = match &config.emergencies {
            Some(p) => format::parse_emergencies(&format::read_text(p)?, p)?,
            None => format::default_emergencies(),
        };
        let users = match &config.users {
            Some(p) => {
                let u = format::parse_users(&format::read_text(p)?, p, &exercises)?;
                if u.is_empty() {
                    return Err(Error::format(p, "user bank is empty"));
                }
                Some(u)
            }
            None => None,
        };
        let course_files = match (&config.dataset, config.environment) {
            (Some(dir), Environment::Course) => {
                let files = list_course_files(dir)?;
                if files.is_empty() {
                    return Err(Error::Config(format!("{} contains no instance files", dir.display())));
                }
                Some(files)
            }
            _ => None,
        };
        Ok(Self {
            config,
            hash: config.config_hash(),
            mode: config.effective_mode(),
            agent: config.agent.label(),
            backend,
            exercises,
            emergencies,
            users,
            course_files,
        })
    }

    fn instances(&self) -> Result<Vec<InstanceSpec>> {
        let c = self.config;
        if let Some(files) = &self.course_files {
            return Ok(files
                .iter()
                .take(c.n_instances)
                .enumerate()
                .map(|(index, p)| InstanceSpec {
                    index,
                    id: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                    seed: instance_seed(c.seed, index),
                })
                .collect());
        }
        let prefix = match c.environment {
            Environment::Course => format!("course-{}", c.effective_difficulty().name()),
            Environment::Fitness => "fitness".to_string(),
        };
        Ok((0..c.n_instances)
            .map(|index| InstanceSpec { index, id: format!("{prefix}-{index:04}"), seed: instance_seed(c.seed, index) })
            .collect())
    }

    fn execute(&self, pending: &[(usize, &InstanceSpec)], writer: &mut RecordWriter) -> Result<usize> {
        let next = AtomicUsize::new(0);
        let (tx, rx) = mpsc::channel::<(usize, EvalRecord)>();
        let workers = self.config.parallelism.min(pending.len()).max(1);
        thread::scope(|s| {
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                s.spawn(move || loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(position, spec)) = pending.get(k) else { break };
                    if tx.send((k, self.evaluate(position, spec))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut buffer = BTreeMap::new();
            let mut written = 0;
            for (k, record) in rx {
                buffer.insert(k, record);
                while let Some(r) = buffer.remove(&written) {
                    writer.write(&r)?;
                    written += 1;
                }
            }
            Ok(written)
        })
    }

    fn evaluate(&self, position: usize, spec: &InstanceSpec) -> EvalRecord {
        let start = Instant::now();
        let mut transcript = Transcript::default();
        let result = catch_unwind(AssertUnwindSafe(|| self.run_role(spec, &mut transcript)));
        let (outcome, condition) = match result {
            Ok(Ok(x)) => x,
            Ok(Err(e)) => (Outcome::TaskError { message: e.to_string() }, self.condition(None)),
            Err(_) => (Outcome::TaskError { message: "evaluation panicked".into() }, self.condition(None)),
        };
        let (wall_time_ms, timestamp) = if self.config.record_timing {
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
            (Some(start.elapsed().as_millis() as u64), Some(now))
        } else {
            (None, None)
        };
        EvalRecord {
            schema_version: SCHEMA_VERSION,
            config_hash: self.hash.clone(),
            instance_id: spec.id.clone(),
            position,
            seed: spec.seed,
            environment: self.config.environment,
            role: self.config.role,
            mode: self.mode,
            agent: self.agent.clone(),
            condition,
            transcript,
            outcome,
            wall_time_ms,
            timestamp,
        }
    }

    fn condition(&self, difficulty: Option<Difficulty>) -> String {
        if let Some(c) = &self.config.condition {
            return c.clone();
        }
        match (self.config.environment, self.config.role) {
            (Environment::Course, _) => difficulty.unwrap_or(self.config.effective_difficulty()).name().to_string(),
            (Environment::Fitness, Role::Solver) => format!("{} iter", self.config.episode.iterations),
            (Environment::Fitness, _) => "default".to_string(),
        }
    }

    fn run_role(&self, spec: &InstanceSpec, tr: &mut Transcript) -> Result<(Outcome, String)> {
        let agent_seed = derive_seed(spec.seed, AGENT_STREAM);
        match self.config.environment {
            Environment::Course => {
                let instance = self.course_instance(spec)?;
                let condition = self.condition(instance.difficulty);
                let outcome = match self.config.role {
                    Role::Solver => self.course_solver(&instance, agent_seed, tr)?,
                    Role::Verifier => {
                        let (t, _) = build_course_verifier_task(&instance, self.config.delta, spec.seed)?;
                        let messages = render_verifier(&t.task, Environment::Course, self.mode, self.config.delta)?;
                        self.verifier(t.task, messages, agent_seed, tr)?
                    }
                    Role::HeuristicRanker => {
                        let shot = self.config.shot_mode();
                        let (t, order) = build_course_heuristic_task(&instance, self.config.n_candidates, shot, spec.seed)?;
                        let messages = render_ranking(&t.task, Environment::Course, self.mode)?;
                        self.ranker(&t.task, &order, messages, agent_seed, tr)?
                    }
                };
                Ok((outcome, condition))
            }
            Environment::Fitness => {
                let outcome = match self.config.role {
                    Role::Solver => self.fitness_solver(spec, agent_seed, tr)?,
                    Role::Verifier => {
                        let (t, _) = build_verifier_task(&self.world(), self.config.shot_mode(), spec.seed)?;
                        let messages = render_verifier(&t.task, Environment::Fitness, self.mode, self.config.delta)?;
                        self.verifier(t.task, messages, agent_seed, tr)?
                    }
                    Role::HeuristicRanker => {
                        let world = self.world();
                        let shot = self.config.shot_mode();
                        let (t, order) = build_heuristic_task(&world, shot, self.config.n_candidates, spec.seed)?;
                        let messages = render_ranking(&t.task, Environment::Fitness, self.mode)?;
                        self.ranker(&t.task, &order, messages, agent_seed, tr)?
                    }
                };
                Ok((outcome, self.condition(None)))
            }
        }
    }

    fn world(&self) -> FitnessWorld {
        FitnessWorld {
            exercises: self.exercises.clone(),
            emergencies: self.emergencies.clone(),
            max_reps: self.config.max_reps,
            episode: self.config.episode.clone(),
        }
    }

    fn course_instance(&self, spec: &InstanceSpec) -> Result<CourseInstance> {
        match &self.course_files {
            Some(files) => Ok(load_course(&files[spec.index])?.instance),
            None => Ok(generate_instance(self.config.effective_difficulty(), spec.seed)?),
        }
    }

    /// Gets one answer: the scripted one if given, otherwise from the endpoint.
    fn exchange(
        &self,
        messages: &mut Vec<Message>,
        scripted: Option<Result<String, String>>,
        kind: AnswerKind,
        tr: &mut Transcript,
    ) -> ParseOutcome {
        tr.agent_error = None;
        match &self.backend {
            Backend::Scripted(_) => match scripted {
                Some(Ok(text)) => {
                    let parse = parse_answer(kind, &text);
                    messages.push(Message::assistant(text));
                    parse
                }
                Some(Err(reason)) => {
                    tr.agent_error = Some(reason);
                    parse_answer(kind, "")
                }
                None => {
                    tr.agent_error = Some("scripted agent gave no answer".into());
                    parse_answer(kind, "")
                }
            },
            Backend::Chat(client) => {
                let mut parse = ask(client, messages, kind, tr);
                if self.config.allow_reask && parse.answer.is_none() && tr.agent_error.is_none() {
                    messages.push(Message::user(reask_text(&parse.errors)));
                    parse = ask(client, messages, kind, tr);
                }
                parse
            }
        }
    }

    fn scripted_seeded<T>(&self, seed: u64, f: impl FnOnce(&mut dyn ScriptedTaskAgent) -> T) -> Result<Option<T>> {
        match &self.backend {
            Backend::Scripted(kind) => {
                let mut agent = scripted_other(*kind, seed)?;
                Ok(Some(f(agent.as_mut())))
            }
            Backend::Chat(_) => Ok(None),
        }
    }

    fn course_solver(&self, instance: &CourseInstance, seed: u64, tr: &mut Transcript) -> Result<Outcome> {
        let (_, optimal) = solve_exact(instance)?;
        let mut messages = render_course_solver(instance, self.mode)?;
        let scripted = self.scripted_seeded(seed, |a| {
            a.solve(instance).map(|p| answer_course_plan(&p, instance)).map_err(|f| f.reason)
        })?;
        let parse = self.exchange(&mut messages, scripted, AnswerKind::Plan, tr);
        let outcome = grade_course_plan(&parse, instance, optimal, self.config.delta);
        tr.messages = messages;
        tr.set_parse(parse);
        Ok(outcome)
    }

    fn verifier(&self, task: VerifierTask, mut messages: Vec<Message>, seed: u64, tr: &mut Transcript) -> Result<Outcome> {
        let scripted = self.scripted_seeded(seed, |a| a.verify(&task).map(|v| answer_verdict(&v)).map_err(|f| f.reason))?;
        let kind = AnswerKind::Verdict { optimality: task.asks_optimality };
        let parse = self.exchange(&mut messages, scripted, kind, tr);
        let outcome = grade_verifier(&parse, task.oracle_verdict);
        tr.messages = messages;
        tr.set_parse(parse);
        Ok(outcome)
    }

    fn ranker(
        &self,
        task: &RankingTask,
        oracle_order: &[usize],
        mut messages: Vec<Message>,
        seed: u64,
        tr: &mut Transcript,
    ) -> Result<Outcome> {
        let scripted = self.scripted_seeded(seed, |a| a.rank(task).map(|o| answer_ranking(&o)).map_err(|f| f.reason))?;
        let kind = AnswerKind::Ranking { candidates: task.candidates.len() };
        let parse = self.exchange(&mut messages, scripted, kind, tr);
        let outcome = grade_ranking_answer(&parse, oracle_order);
        tr.messages = messages;
        tr.set_parse(parse);
        Ok(outcome)
    }

    fn fitness_solver(&self, spec: &InstanceSpec, seed: u64, tr: &mut Transcript) -> Result<Outcome> {
        let bank = &self.exercises;
        let profile = match &self.users {
            Some(users) => users[spec.index % users.len()].clone(),
            None => sample_profile(bank, self.config.max_reps, &mut seeded(derive_seed(spec.seed, PROFILE_STREAM))),
        };
        let mut episode = self.config.episode.clone();
        episode.seed = spec.seed;
        let mut env = FitnessEnv::new(&profile, bank, &self.emergencies, episode.clone())?;
        let mut agent = match &self.backend {
            Backend::Scripted(kind) => Some(scripted_fitness(*kind, seed)),
            Backend::Chat(_) => None,
        };
        let mut messages = render_fitness_solver(&profile, bank, self.mode)?;
        let mut steps = Vec::with_capacity(episode.iterations as usize);
        let mut references = Vec::with_capacity(episode.iterations as usize);
        let mut last = ParseOutcome { answer: None, errors: Vec::new() };
        while !env.is_finished() {
            references.push(env.reference_satisfaction()?);
            let scripted = agent.as_mut().map(|a| {
                let ctx = PlanningContext {
                    profile: &profile,
                    bank,
                    constraints: env.constraints(),
                    state: env.state(),
                    config: env.config(),
                };
                a.propose(&ctx).map(|p| answer_fitness_plan(&p, bank)).map_err(|f| f.reason)
            });
            let parse = self.exchange(&mut messages, scripted, AnswerKind::Plan, tr);
            let plan = match &parse.answer {
                Some(ParsedAnswer::Plan(m)) => fitness_plan_from(m, bank),
                _ => Err(tr.agent_error.clone().unwrap_or_else(|| parse.errors.join("; "))),
            };
            let day = env.state().iteration + 1;
            let step = match plan {
                Ok(p) => {
                    let feedback = env.step(p.clone())?;
                    StepLog::new(day, p, &feedback, None)
                }
                Err(reason) => {
                    let feedback = env.step_failure(&reason)?;
                    StepLog::new(day, FitnessPlan::zeros(bank.len()), &feedback, Some(reason))
                }
            };
            if !env.is_finished() {
                let feedback = env.state().feedback_history.last().expect("a step was recorded");
                messages.push(render_fitness_feedback(day, feedback, &env.constraints())?);
            }
            steps.push(step);
            last = parse;
        }
        tr.messages = messages;
        tr.set_parse(last);
        Ok(grade_fitness_steps(steps, references, bank.len(), episode.cost_utility_threshold))
    }
}

fn ask(client: &ChatClient, messages: &mut Vec<Message>, kind: AnswerKind, tr: &mut Transcript) -> ParseOutcome {
    match client.complete(messages) {
        Ok(reply) => {
            tr.add_usage(reply.usage);
            tr.retries += reply.retries;
            let parse = parse_answer(kind, &reply.text);
            messages.push(Message::assistant(reply.text));
            parse
        }
        Err(e) => {
            tr.agent_error = Some(e.to_string());
            parse_answer(kind, "")
        }
    }
}
