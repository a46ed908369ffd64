//! Experimental protocols: seeded runs, optional frozen-agent test phases,
//! and CSV reporting.

mod metrics;
mod report;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{build_agent, Agent, AgentConfig, AgentKind};
use crate::dqn::tensor_len;
use crate::error::{Error, Result};
use crate::gridworld::{init_episode, step, Action, GridState, ObjectType, Scenario, StepOutcome};

pub use metrics::{
    mean_defined, rolling_mean, slope, summarize, EpisodeRow, Phase, RunSeries, SummaryRow, FINAL_WINDOW,
    ROLLING_WINDOW,
};
pub use report::{write_series_csv, write_summary_csv, SERIES_HEADER, SUMMARY_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentId {
    Exp1Grid3,
    Exp1Grid5,
    Exp1Grid7,
    Exp2,
    Exp3,
    Exp4,
    Exp5,
    Exp6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Exp1Grid3,
        ExperimentId::Exp1Grid5,
        ExperimentId::Exp1Grid7,
        ExperimentId::Exp2,
        ExperimentId::Exp3,
        ExperimentId::Exp4,
        ExperimentId::Exp5,
        ExperimentId::Exp6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Exp1Grid3 => "exp1_3x3",
            ExperimentId::Exp1Grid5 => "exp1_5x5",
            ExperimentId::Exp1Grid7 => "exp1_7x7",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
            ExperimentId::Exp4 => "exp4",
            ExperimentId::Exp5 => "exp5",
            ExperimentId::Exp6 => "exp6",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentId::Exp1Grid3 => "single random positive, 3x3 grid",
            ExperimentId::Exp1Grid5 => "single random positive, 5x5 grid",
            ExperimentId::Exp1Grid7 => "single random positive, 7x7 grid",
            ExperimentId::Exp2 => "train on the fixed 10x10 layout",
            ExperimentId::Exp3 => "train on random 10x10 layouts",
            ExperimentId::Exp4 => "train fixed, test frozen on random layouts",
            ExperimentId::Exp5 => "train corner (a), test best run on (b)",
            ExperimentId::Exp6 => "train corner (a), test best run on (c)",
        }
    }

    /// Built-in (train, test) scenario names.
    pub fn scenarios(self) -> (&'static str, Option<&'static str>) {
        match self {
            ExperimentId::Exp1Grid3 => ("exp1_3x3", None),
            ExperimentId::Exp1Grid5 => ("exp1_5x5", None),
            ExperimentId::Exp1Grid7 => ("exp1_7x7", None),
            ExperimentId::Exp2 => ("fixed10", None),
            ExperimentId::Exp3 => ("random10", None),
            ExperimentId::Exp4 => ("fixed10", Some("random10")),
            ExperimentId::Exp5 => ("corner_train", Some("corner_test_b")),
            ExperimentId::Exp6 => ("corner_train", Some("corner_test_c")),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Which trained agents go through the test phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSelection {
    /// Every run is tested with its own frozen agent.
    EveryRun,
    /// Only the run with the best final training score is tested.
    BestRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: String,
    pub train: Scenario,
    pub test: Option<Scenario>,
    pub agent: AgentKind,
    pub config: AgentConfig,
    pub runs: usize,
    pub episodes: usize,
    pub test_episodes: usize,
    pub selection: TestSelection,
    pub seed_base: u64,
}

impl ExperimentSpec {
    /// Protocol defaults: 10 runs of 1000 episodes.
    pub fn paper(id: ExperimentId, agent: AgentKind, seed_base: u64) -> Result<Self> {
        let (train, test) = id.scenarios();
        let (test_episodes, selection) = match id {
            ExperimentId::Exp5 | ExperimentId::Exp6 => (100, TestSelection::BestRun),
            _ => (1000, TestSelection::EveryRun),
        };
        Ok(ExperimentSpec {
            id: id.name().to_owned(),
            train: Scenario::builtin(train)?,
            test: test.map(Scenario::builtin).transpose()?,
            agent,
            config: AgentConfig::default(),
            runs: 10,
            episodes: 1000,
            test_episodes,
            selection,
            seed_base,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.config.hp.validate()?;
        self.config.dqn.validate()?;
        if self.runs == 0 || self.episodes == 0 {
            return Err(Error::Config("runs and episodes must be positive".into()));
        }
        if let Some(test) = &self.test {
            if self.test_episodes == 0 {
                return Err(Error::Config("test episodes must be positive".into()));
            }
            if self.agent == AgentKind::Dqn
                && tensor_len(test.width(), test.height()) != tensor_len(self.train.width(), self.train.height())
            {
                return Err(Error::Config(format!(
                    "dqn input size differs between {} and {}",
                    self.train.name(),
                    test.name()
                )));
            }
        }
        Ok(())
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed_base.wrapping_add(run as u64)
    }
}

/// Independent random streams of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    TrainLayout = 0,
    TrainAgent = 1,
    TestLayout = 2,
    TestAgent = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// One step of a played episode, for tracing.
pub struct StepRecord<'a> {
    pub before: &'a GridState,
    pub action: Action,
    pub outcome: &'a StepOutcome,
}

/// Plays one episode from `initial`. In [`Phase::Train`] the agent explores
/// with `epsilon` and learns from every step; in [`Phase::Test`] it acts
/// greedily and is never updated.
pub fn run_episode(
    scenario: &Scenario,
    initial: GridState,
    agent: &mut dyn Agent,
    phase: Phase,
    epsilon: f64,
    rng: &mut dyn RngCore,
    mut on_step: impl FnMut(&StepRecord<'_>),
) -> Result<EpisodeRow> {
    let scheme = *scenario.reward_scheme();
    let budget = scenario.step_budget();
    let epsilon = match phase {
        Phase::Train => epsilon,
        Phase::Test => 0.0,
    };
    let mut state = initial;
    let mut row = EpisodeRow {
        score: 0.0,
        positives: 0,
        negatives: 0,
        steps: 0,
        truncated: false,
    };
    if state.is_terminal() {
        return Ok(row);
    }
    loop {
        let action = agent.act(&state, epsilon, rng)?;
        let outcome = step(&state, action, &scheme, budget);
        if phase == Phase::Train {
            agent.observe(&state, action, &outcome, rng)?;
        }
        on_step(&StepRecord {
            before: &state,
            action,
            outcome: &outcome,
        });
        row.score += outcome.reward;
        row.steps += 1;
        match outcome.collected {
            Some(ObjectType::Positive) => row.positives += 1,
            Some(ObjectType::Negative) => row.negatives += 1,
            _ => {}
        }
        if outcome.terminal || outcome.truncated {
            row.truncated = outcome.truncated;
            return Ok(row);
        }
        state = outcome.next;
    }
}

#[allow(clippy::too_many_arguments)]
fn play_phase(
    scenario: &Scenario,
    agent: &mut dyn Agent,
    phase: Phase,
    episodes: usize,
    epsilon: f64,
    run: usize,
    agent_rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<RunSeries> {
    let mut layout_rng = stream_rng(
        seed,
        match phase {
            Phase::Train => Stream::TrainLayout,
            Phase::Test => Stream::TestLayout,
        },
    );
    let mut rows = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let initial = init_episode(scenario, &mut layout_rng)?;
        rows.push(run_episode(scenario, initial, agent, phase, epsilon, agent_rng, |_| {})?);
    }
    Ok(RunSeries { run, phase, rows })
}

/// Tests a frozen agent and checks that testing left it untouched.
pub fn test_frozen(spec: &ExperimentSpec, agent: &mut dyn Agent, run: usize) -> Result<RunSeries> {
    let scenario = spec.test.as_ref().ok_or_else(|| Error::Config(format!("{} has no test scenario", spec.id)))?;
    let before = agent.snapshot();
    let seed = spec.run_seed(run);
    let mut agent_rng = stream_rng(seed, Stream::TestAgent);
    let series = play_phase(scenario, agent, Phase::Test, spec.test_episodes, 0.0, run, &mut agent_rng, seed)?;
    if agent.snapshot() != before {
        return Err(Error::Inconsistent(format!("test phase of run {run} modified the agent")));
    }
    Ok(series)
}

/// Trains one run from scratch; returns the agent and its training series.
pub fn train_run(spec: &ExperimentSpec, run: usize) -> Result<(Box<dyn Agent>, RunSeries)> {
    let seed = spec.run_seed(run);
    let mut init_rng = stream_rng(seed, Stream::TrainAgent);
    let input = tensor_len(spec.train.width(), spec.train.height());
    let mut agent = build_agent(spec.agent, &spec.config, input, &mut init_rng)?;
    // Network initialisation draws from the agent stream before training starts.
    let series = play_phase(&spec.train, agent.as_mut(), Phase::Train, spec.episodes, spec.config.hp.epsilon, run, &mut init_rng, seed)?;
    Ok((agent, series))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: String,
    pub agent: AgentKind,
    pub train: Vec<RunSeries>,
    pub test: Vec<RunSeries>,
    /// Run whose agent was tested under [`TestSelection::BestRun`].
    pub selected_run: Option<usize>,
    /// Snapshot of the tested agent under [`TestSelection::BestRun`].
    pub selected_snapshot: Option<String>,
    /// Learned table size per run (0 for the network).
    pub table_sizes: Vec<usize>,
}

impl ExperimentResult {
    pub fn summary(&self) -> Vec<SummaryRow> {
        summarize(&self.experiment, self.agent, &self.train, &self.test)
    }
}

struct RunOutput {
    train: RunSeries,
    test: Option<RunSeries>,
    agent: Option<Box<dyn Agent>>,
    table_size: usize,
}

fn execute_run(spec: &ExperimentSpec, run: usize) -> Result<RunOutput> {
    let (mut agent, train) = train_run(spec, run)?;
    let table_size = agent.table_size();
    let (test, agent) = match (&spec.test, spec.selection) {
        (Some(_), TestSelection::EveryRun) => (Some(test_frozen(spec, agent.as_mut(), run)?), None),
        (Some(_), TestSelection::BestRun) => (None, Some(agent)),
        (None, _) => (None, None),
    };
    Ok(RunOutput {
        train,
        test,
        agent,
        table_size,
    })
}

/// Runs every seeded run of `spec`, at most `parallel` at a time. Output is
/// ordered by run index regardless of scheduling.
pub fn run_experiment(spec: &ExperimentSpec, parallel: usize) -> Result<ExperimentResult> {
    spec.validate()?;
    let workers = parallel.clamp(1, spec.runs);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RunOutput>>>> = Mutex::new((0..spec.runs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let run = next.fetch_add(1, Ordering::SeqCst);
                if run >= spec.runs {
                    break;
                }
                let out = execute_run(spec, run);
                let failed = out.is_err();
                slots.lock().expect("no worker panics while holding the lock")[run] = Some(out);
                if failed {
                    next.store(spec.runs, Ordering::SeqCst);
                }
            });
        }
    });

    let mut outputs = Vec::with_capacity(spec.runs);
    for slot in slots.into_inner().expect("workers joined") {
        match slot {
            Some(out) => outputs.push(out?),
            None => continue,
        }
    }

    let mut result = ExperimentResult {
        experiment: spec.id.clone(),
        agent: spec.agent,
        train: Vec::with_capacity(spec.runs),
        test: Vec::new(),
        selected_run: None,
        selected_snapshot: None,
        table_sizes: Vec::with_capacity(spec.runs),
    };
    let mut agents = Vec::new();
    for out in outputs {
        result.table_sizes.push(out.table_size);
        result.train.push(out.train);
        result.test.extend(out.test);
        agents.extend(out.agent);
    }

    if spec.test.is_some() && spec.selection == TestSelection::BestRun {
        let best = best_run(&result.train);
        let agent = &mut agents[best];
        result.test.push(test_frozen(spec, agent.as_mut(), best)?);
        result.selected_run = Some(best);
        result.selected_snapshot = Some(agent.snapshot());
    }
    Ok(result)
}

/// Highest mean score over the final training episodes; earliest run on ties.
pub fn best_run(train: &[RunSeries]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in train.iter().enumerate() {
        let score = s.mean_score_last(FINAL_WINDOW).unwrap_or(f64::NEG_INFINITY);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}
