mod common;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symgrid::gridworld::{init_episode, Action, GridState, ObjectType, Scenario, StepOutcome};
use symgrid::harness::{
    run_episode, run_experiment, test_frozen, train_run, ExperimentId, ExperimentSpec, Phase,
};
use symgrid::{Agent, AgentKind, Result};

/// Scripted agent with a fixed policy and no learning.
struct Scripted(fn(&GridState) -> Action);

impl Agent for Scripted {
    fn kind(&self) -> AgentKind {
        AgentKind::QLearn
    }

    fn act(&mut self, state: &GridState, _epsilon: f64, _rng: &mut dyn RngCore) -> Result<Action> {
        Ok((self.0)(state))
    }

    fn observe(&mut self, _: &GridState, _: Action, _: &StepOutcome, _: &mut dyn RngCore) -> Result<()> {
        Ok(())
    }

    fn snapshot(&self) -> String {
        String::new()
    }

    fn table_size(&self) -> usize {
        0
    }
}

fn toward_positive(state: &GridState) -> Action {
    let (pos, _) = state.objects().find(|(_, c)| c.kind == ObjectType::Positive).unwrap();
    let a = state.agent();
    if pos.x > a.x {
        Action::Right
    } else if pos.x < a.x {
        Action::Left
    } else if pos.y > a.y {
        Action::Up
    } else {
        Action::Down
    }
}

#[test]
fn shortest_path_agent_scores_one() {
    let scenario = Scenario::builtin("exp1_3x3").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let start = init_episode(&scenario, &mut rng).unwrap();
        let (pos, _) = start.objects().next().unwrap();
        let distance = (pos.x - start.agent().x).abs() + (pos.y - start.agent().y).abs();
        let row = run_episode(&scenario, start, &mut Scripted(toward_positive), Phase::Test, 0.0, &mut rng, |_| {}).unwrap();
        assert_eq!(row.score, 1.0);
        assert_eq!(row.steps, distance as u32);
        assert!(!row.truncated);
    }
}

#[test]
fn wall_hugging_agent_is_truncated() {
    let scenario = Scenario::parse("edge", "3 3 100 1 -1 0\n..+\nA..\n...\n").unwrap();
    let start = init_episode(&scenario, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let mut steps = 0;
    let row = run_episode(&scenario, start, &mut Scripted(|_| Action::Left), Phase::Train, 0.1, &mut ChaCha8Rng::seed_from_u64(0), |_| steps += 1)
        .unwrap();
    assert_eq!((row.score, row.steps, row.truncated), (0.0, 100, true));
    assert_eq!(steps, 100);
}

#[test]
fn testing_leaves_agents_untouched() {
    for agent in AgentKind::ALL {
        let mut spec = ExperimentSpec::paper(ExperimentId::Exp4, agent, 9).unwrap();
        spec.episodes = if agent == AgentKind::Dqn { 5 } else { 100 };
        spec.test_episodes = 30;
        let (mut trained, _) = train_run(&spec, 0).unwrap();
        let before = trained.snapshot();
        let first = test_frozen(&spec, trained.as_mut(), 0).unwrap();
        assert_eq!(trained.snapshot(), before, "{agent}");
        assert_eq!(test_frozen(&spec, trained.as_mut(), 0).unwrap(), first, "{agent}");
    }
}

#[test]
fn episode_accounting_matches_rewards() {
    for id in [ExperimentId::Exp3, ExperimentId::Exp6] {
        let mut spec = ExperimentSpec::paper(id, AgentKind::SrlCs, 3).unwrap();
        spec.runs = 2;
        spec.episodes = 200;
        let scheme = *spec.train.reward_scheme();
        let result = run_experiment(&spec, 1).unwrap();
        for series in result.train.iter().chain(&result.test) {
            for row in &series.rows {
                let expected = scheme.positive_reward * row.positives as f64 + scheme.negative_reward * row.negatives as f64;
                assert_eq!(row.score, expected);
            }
        }
    }
}

#[test]
fn flat_table_outgrows_symbolic_store() {
    let size = |agent| {
        let spec = ExperimentSpec::paper(ExperimentId::Exp3, agent, 0).unwrap();
        train_run(&spec, 0).unwrap().0.table_size()
    };
    let flat = size(AgentKind::QLearn);
    let symbolic = size(AgentKind::SrlCs);
    assert!(flat > 50 * symbolic, "flat {flat} vs symbolic {symbolic}");
}

#[test]
fn csv_output_is_reproducible() {
    common::csv_output_is_reproducible();
}
