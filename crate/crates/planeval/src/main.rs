use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use planeval::client::ChatEndpointConfig;
use planeval::config::{AgentSpec, Environment, ExperimentConfig};
use planeval::format::pretty;
use planeval::harness::{generate_dataset, run, RunOptions};
use planeval::prompt::{PromptMode, Role};
use planeval::report::report_files;
use planeval::{Error, Result};
use planeval_core::course::Difficulty;

#[derive(Parser)]
#[command(name = "planeval", version, about = "Generate planning tasks, evaluate agents and report metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a course dataset and its manifest.
    Generate {
        #[arg(long, default_value = "easy")]
        difficulty: Difficulty,
        #[arg(long, default_value_t = 400)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Course solver evaluation.
    Solve(RunArgs),
    /// Verifier evaluation.
    Verify(RunArgs),
    /// Heuristic ranking evaluation.
    Rank(RunArgs),
    /// Fitness solver episodes.
    FitnessRun(RunArgs),
    /// Aggregate JSONL records into a table.
    Report {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Write the machine-readable table here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the text table here as well as to stdout.
        #[arg(long)]
        text: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    environment: Option<Environment>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSONL file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Scripted agent: random, oracle, hill-climb or zero.
    #[arg(long, conflicts_with = "model")]
    agent: Option<String>,
    /// Model served at --base-url.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, requires = "model")]
    base_url: Option<String>,
    /// Environment variable holding the endpoint key.
    #[arg(long, requires = "model")]
    api_key_env: Option<String>,
    #[arg(long)]
    mode: Option<PromptMode>,
    #[arg(long)]
    difficulty: Option<Difficulty>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    n_instances: Option<usize>,
    #[arg(long)]
    n_candidates: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    iterations: Option<u32>,
    #[arg(long)]
    emergency_probability: Option<f64>,
    #[arg(long)]
    exercises: Option<PathBuf>,
    #[arg(long)]
    emergencies: Option<PathBuf>,
    #[arg(long)]
    users: Option<PathBuf>,
    #[arg(long)]
    condition: Option<String>,
    #[arg(long)]
    allow_reask: bool,
    #[arg(long)]
    record_timing: bool,
    /// Overwrite the output instead of resuming.
    #[arg(long)]
    fresh: bool,
    /// Stop after this many new records.
    #[arg(long, hide = true)]
    max_new_records: Option<usize>,
}

fn build_config(role: Role, fixed_env: Option<Environment>, a: &RunArgs) -> Result<ExperimentConfig> {
    let agent = match (&a.agent, &a.model) {
        (Some(name), _) => Some(AgentSpec::scripted(name)?),
        (None, Some(model)) => {
            let mut c = ChatEndpointConfig { model_name: model.clone(), ..Default::default() };
            if let Some(u) = &a.base_url {
                c.base_url = u.clone();
            }
            if let Some(k) = &a.api_key_env {
                c.api_key_env = k.clone();
            }
            Some(AgentSpec::Endpoint(c))
        }
        (None, None) => None,
    };
    let mut config = match &a.config {
        Some(path) => {
            let c = ExperimentConfig::load(path)?;
            if c.role != role {
                return Err(Error::Config(format!("{} configures the {} role", path.display(), c.role.name())));
            }
            c
        }
        None => {
            let env = fixed_env
                .or(a.environment)
                .ok_or_else(|| Error::Config("--environment is required without --config".into()))?;
            let agent = agent.clone().ok_or_else(|| Error::Config("--agent or --model is required without --config".into()))?;
            let out = a.out.clone().ok_or_else(|| Error::Config("--out is required without --config".into()))?;
            ExperimentConfig::new(env, role, agent, out)
        }
    };
    if let Some(env) = fixed_env.or(a.environment) {
        if a.config.is_some() && config.environment != env {
            return Err(Error::Config(format!("configuration is for the {} environment", config.environment.name())));
        }
    }
    if let Some(agent) = agent {
        config.agent = agent;
    }
    macro_rules! set {
        ($($flag:ident => $field:expr),* $(,)?) => {
            $(if let Some(v) = a.$flag.clone() { $field = v; })*
        };
    }
    set!(seed => config.seed, out => config.output_path, parallelism => config.parallelism,
        n_instances => config.n_instances, n_candidates => config.n_candidates, delta => config.delta,
        iterations => config.episode.iterations, emergency_probability => config.episode.emergency_probability);
    macro_rules! set_some {
        ($($flag:ident => $field:expr),* $(,)?) => {
            $(if a.$flag.is_some() { $field = a.$flag.clone(); })*
        };
    }
    set_some!(mode => config.mode, difficulty => config.difficulty, dataset => config.dataset,
        exercises => config.exercises, emergencies => config.emergencies, users => config.users,
        condition => config.condition);
    config.allow_reask |= a.allow_reask;
    config.record_timing |= a.record_timing;
    config.validate()?;
    Ok(config)
}

fn run_command(role: Role, env: Option<Environment>, a: &RunArgs) -> Result<()> {
    let config = build_config(role, env, a)?;
    let options = RunOptions { max_new_records: a.max_new_records, fresh: a.fresh, client: None };
    let s = run(&config, &options)?;
    println!(
        "{}: {} new records, {} already present, {} instances",
        config.output_path.display(),
        s.written,
        s.skipped,
        s.total
    );
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { difficulty, count, seed, out } => {
            let manifest = generate_dataset(difficulty, count, seed, &out)?;
            println!("{}", pretty(&manifest.statistics));
            Ok(())
        }
        Command::Solve(a) => run_command(Role::Solver, Some(Environment::Course), &a),
        Command::Verify(a) => run_command(Role::Verifier, None, &a),
        Command::Rank(a) => run_command(Role::HeuristicRanker, None, &a),
        Command::FitnessRun(a) => run_command(Role::Solver, Some(Environment::Fitness), &a),
        Command::Report { records, out, text } => {
            let report = report_files(&records)?;
            let table = report.to_text();
            print!("{table}");
            if let Some(p) = out {
                planeval::format::write_text(&p, &report.to_json())?;
            }
            if let Some(p) = text {
                planeval::format::write_text(&p, &table)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
