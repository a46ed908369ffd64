use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use symgrid::agent::restore_agent;
use symgrid::gridworld::{init_episode, Scenario};
use symgrid::harness::{
    best_run, run_episode, run_experiment, stream_rng, train_run, write_series_csv, write_summary_csv,
    ExperimentId, ExperimentSpec, Phase, Stream,
};
use symgrid::{Agent, AgentKind};

/// Symbolic reinforcement learning experiments on small grid worlds.
#[derive(Parser, Debug)]
#[command(name = "symgrid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train (and test, where the experiment has a test phase) and write CSVs.
    Run(RunArgs),
    /// Play one greedy episode and print every step as an ASCII grid.
    Replay(ReplayArgs),
    /// List experiments, agents and built-in scenarios.
    List,
    /// Train all runs and save the best run's learned store.
    Snapshot(SnapshotArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment id (see `list`).
    #[arg(long)]
    experiment: String,
    /// Agent kind: qlearn, srl, srlcs or dqn.
    #[arg(long, default_value = "srlcs")]
    agent: String,
    /// Base seed; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exploration rate during training.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Learning rate of the tabular and symbolic agents.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Discount factor.
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Scenario file replacing the experiment's training scenario
    /// (the played scenario for `replay`).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Network training cadence in environment steps (dqn only).
    #[arg(long, default_value_t = 1)]
    train_every: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Number of independent runs.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Training episodes per run.
    #[arg(long, default_value_t = 1000)]
    episodes: usize,
    /// Output directory for the CSV files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Maximum number of runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Also write the tested agent's snapshot to this file (best-run experiments).
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SnapshotArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 1000)]
    episodes: usize,
    /// Destination file.
    #[arg(long)]
    snapshot: PathBuf,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[command(flatten)]
    common: Common,
    /// Agent snapshot to load. Without it, run 0 is trained first.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Training episodes when no snapshot is given.
    #[arg(long, default_value_t = 1000)]
    episodes: usize,
}

fn build_spec(common: &Common, runs: usize, episodes: usize) -> Result<ExperimentSpec> {
    let id: ExperimentId = common.experiment.parse()?;
    let agent: AgentKind = common.agent.parse()?;
    let mut spec = ExperimentSpec::paper(id, agent, common.seed)?;
    spec.runs = runs;
    spec.episodes = episodes;
    spec.config.hp.epsilon = common.epsilon;
    spec.config.hp.alpha = common.alpha;
    spec.config.hp.gamma = common.gamma;
    spec.config.dqn.train_every = common.train_every;
    if let Some(path) = &common.scenario {
        spec.train = Scenario::load(path)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn run(args: &RunArgs) -> Result<()> {
    let spec = build_spec(&args.common, args.runs, args.episodes)?;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let result = run_experiment(&spec, args.parallel)?;
    let stem = format!("{}_{}", spec.id, spec.agent);

    let mut train_only = result.clone();
    train_only.test.clear();
    write_series_csv(create(&args.out.join(format!("{stem}_train.csv")))?, &[&train_only])?;
    if spec.test.is_some() {
        let mut test_only = result.clone();
        test_only.train.clear();
        write_series_csv(create(&args.out.join(format!("{stem}_test.csv")))?, &[&test_only])?;
    }
    let summary = result.summary();
    write_summary_csv(create(&args.out.join(format!("{stem}_summary.csv")))?, &summary)?;

    if let Some(path) = &args.snapshot {
        match &result.selected_snapshot {
            Some(text) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
            None => bail!("{} tests every run; use `snapshot` to save a trained agent", spec.id),
        }
    }
    for row in &summary {
        match row.value {
            Some(v) => println!("{} {} {} {v:.4}", row.experiment, row.agent, row.metric),
            None => println!("{} {} {} -", row.experiment, row.agent, row.metric),
        }
    }
    Ok(())
}

fn snapshot(args: &SnapshotArgs) -> Result<()> {
    let spec = build_spec(&args.common, args.runs, args.episodes)?;
    let mut agents = Vec::with_capacity(spec.runs);
    let mut series = Vec::with_capacity(spec.runs);
    for run in 0..spec.runs {
        let (agent, s) = train_run(&spec, run)?;
        agents.push(agent);
        series.push(s);
    }
    let best = best_run(&series);
    fs::write(&args.snapshot, agents[best].snapshot())
        .with_context(|| format!("cannot write {}", args.snapshot.display()))?;
    println!("saved run {best} to {}", args.snapshot.display());
    Ok(())
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let common = &args.common;
    let id: ExperimentId = common.experiment.parse()?;
    let mut spec = build_spec(&Common { scenario: None, ..common.clone() }, 1, args.episodes)?;
    let scenario = match &common.scenario {
        Some(path) => Scenario::load(path)?,
        None => spec.test.clone().unwrap_or_else(|| spec.train.clone()),
    };
    let mut agent: Box<dyn Agent> = match &args.snapshot {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            restore_agent(spec.agent, &spec.config, &text)?
        }
        None => {
            spec.test = None;
            train_run(&spec, 0)?.0
        }
    };

    let seed = spec.run_seed(0);
    let mut layout_rng = stream_rng(seed, Stream::TestLayout);
    let mut agent_rng = stream_rng(seed, Stream::TestAgent);
    let initial = init_episode(&scenario, &mut layout_rng)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{} {} on {}", id, spec.agent, scenario.name())?;
    write!(out, "{}", initial.render())?;
    let mut failed = None;
    let row = run_episode(&scenario, initial, agent.as_mut(), Phase::Test, 0.0, &mut agent_rng, |rec| {
        let o = rec.outcome;
        let mut line = format!("step {} {} reward {}", o.next.steps_taken(), rec.action.name(), o.reward);
        if let Some(kind) = o.collected {
            line.push_str(&format!(" collected {kind:?}"));
        }
        if let Err(e) = writeln!(out, "\n{line}").and_then(|_| write!(out, "{}", o.next.render())) {
            failed.get_or_insert(e);
        }
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    writeln!(
        out,
        "\nscore {} positives {} negatives {} steps {}{}",
        row.score,
        row.positives,
        row.negatives,
        row.steps,
        if row.truncated { " (budget exhausted)" } else { "" }
    )?;
    Ok(())
}

fn list() {
    println!("experiments:");
    for id in ExperimentId::ALL {
        let (train, test) = id.scenarios();
        let scenarios = match test {
            Some(test) => format!("{train} -> {test}"),
            None => train.to_owned(),
        };
        println!("  {:<10} {:<44} [{scenarios}]", id.name(), id.description());
    }
    println!("agents:");
    for kind in AgentKind::ALL {
        println!("  {kind}");
    }
    println!("scenarios:");
    for name in Scenario::builtin_names() {
        println!("  {name}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Replay(args) => replay(args),
        Command::Snapshot(args) => snapshot(args),
        Command::List => {
            list();
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
