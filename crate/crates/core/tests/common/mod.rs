//! Checks shared by the regular test targets and the acceptance report.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symgrid::abstraction::{extract, Offset, TypePair};
use symgrid::dqn::{td_gradient, td_loss, Experience};
use symgrid::gridworld::{full_state_key, step, Action, GridState, ObjectType, Position, RewardScheme};
use symgrid::harness::{run_experiment, write_series_csv, write_summary_csv, ExperimentId, ExperimentSpec};
use symgrid::symbolic::{srl_select, srlcs_select, srlcs_update, Hyperparams, SymTransition};
use symgrid::tabular::{tabular_select, tabular_update};
use symgrid::{AgentKind, FlatQTable64, Mlp64, QStore64};

pub const KINDS: [ObjectType; 3] = [ObjectType::Positive, ObjectType::Negative, ObjectType::Wall];

/// Random layout with an agent and up to `max_objects` other occupants.
pub fn random_state(rng: &mut ChaCha8Rng, width: i32, height: i32, max_objects: usize) -> GridState {
    let mut cells: Vec<Position> = (0..width).flat_map(|x| (0..height).map(move |y| Position::new(x, y))).collect();
    let count = rng.gen_range(1..=max_objects.min(cells.len() - 1) + 1).min(cells.len());
    let (chosen, _) = rand::seq::SliceRandom::partial_shuffle(&mut cells[..], rng, count);
    let agent = chosen[0];
    let objects: Vec<(Position, ObjectType)> =
        chosen[1..].iter().map(|p| (*p, KINDS[rng.gen_range(0..KINDS.len())])).collect();
    GridState::new(width, height, agent, objects).unwrap()
}

pub fn live_objects(state: &GridState) -> usize {
    state.objects().filter(|(_, c)| c.kind != ObjectType::Wall).count()
}

pub fn entries(store: &QStore64) -> BTreeMap<String, String> {
    store
        .to_snapshot()
        .lines()
        .map(|line| {
            let (key, value) = line.rsplit_once(' ').unwrap();
            (key.to_owned(), value.to_owned())
        })
        .collect()
}

pub fn changed(before: &QStore64, after: &QStore64) -> Vec<String> {
    let a = entries(before);
    let b = entries(after);
    let mut keys: Vec<String> = a.keys().chain(b.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| a.get(k) != b.get(k)).collect()
}

pub fn entry_key(pair: TypePair, offset: Offset, action: Action) -> String {
    format!("{} {} {} {}", pair.name(), offset.dx, offset.dy, action.name())
}

/// Store with distinct non-zero values on every offset a small grid can produce.
pub fn random_store(rng: &mut ChaCha8Rng, reach: i32) -> QStore64 {
    let mut store = QStore64::new();
    for pair in [TypePair::AgentPositive, TypePair::AgentNegative] {
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for action in Action::ALL {
                    store.set(pair, Offset::new(dx, dy), action, rng.gen_range(0.05..0.95));
                }
            }
        }
    }
    store
}

pub fn transition(state: &GridState, action: Action, budget: u32) -> (SymTransition, f64) {
    let outcome = step(state, action, &RewardScheme::STANDARD, budget);
    let tr = SymTransition {
        before: extract(state),
        action,
        reward: outcome.reward,
        after: extract(&outcome.next),
        collected_id: outcome.collected_id,
    };
    (tr, outcome.reward)
}

/// Every state of a 3x3 grid with an agent, one positive and up to one
/// negative, stepped with every action.
pub fn scripted_transitions() -> Vec<(GridState, Action)> {
    let cells: Vec<Position> = (0..3).flat_map(|x| (0..3).map(move |y| Position::new(x, y))).collect();
    let mut out = Vec::new();
    for &agent in &cells {
        for &pos in cells.iter().filter(|p| **p != agent) {
            let mut layouts = vec![vec![(pos, ObjectType::Positive)]];
            for &neg in cells.iter().filter(|p| **p != agent && **p != pos) {
                layouts.push(vec![(pos, ObjectType::Positive), (neg, ObjectType::Negative)]);
                for &other in cells.iter().filter(|p| **p != agent && **p != pos && **p != neg) {
                    layouts.push(vec![(pos, ObjectType::Positive), (neg, ObjectType::Negative), (other, ObjectType::Positive)]);
                }
            }
            for objects in layouts {
                let state = GridState::new(3, 3, agent, objects).unwrap();
                for action in Action::ALL {
                    out.push((state.clone(), action));
                }
            }
        }
    }
    out
}

/// Breadth-first distance from `start` to `goal` around walls.
pub fn bfs(w: i32, h: i32, walls: &[Position], start: Position, goal: Position) -> Option<u32> {
    let mut seen = HashMap::from([(start, 0u32)]);
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        if p == goal {
            return Some(seen[&p]);
        }
        for (dx, dy) in [(0, 1), (0, -1), (-1, 0), (1, 0)] {
            let q = Position::new(p.x + dx, p.y + dy);
            if q.x < 0 || q.y < 0 || q.x >= w || q.y >= h || walls.contains(&q) || seen.contains_key(&q) {
                continue;
            }
            seen.insert(q, seen[&p] + 1);
            queue.push_back(q);
        }
    }
    None
}

/// Sweeps Q-learning updates over every (state, action) of a single-positive
/// layout until nothing changes.
pub fn converge(w: i32, h: i32, walls: &[Position], goal: Position, hp: &Hyperparams) -> FlatQTable64 {
    let starts = free_cells(w, h, walls, goal);
    let mut table = FlatQTable64::new();
    for _ in 0..200 {
        let mut stable = true;
        for &agent in &starts {
            let state = layout(w, h, walls, goal, agent);
            let key = full_state_key(&state);
            for action in Action::ALL {
                let out = step(&state, action, &RewardScheme::STANDARD, 1000);
                let old = table.get(&key, action);
                tabular_update(&mut table, &key, action, out.reward, &full_state_key(&out.next), out.terminal, hp);
                stable &= table.get(&key, action) == old;
            }
        }
        if stable {
            return table;
        }
    }
    panic!("no convergence on {w}x{h} with goal {goal}");
}

pub fn layout(w: i32, h: i32, walls: &[Position], goal: Position, agent: Position) -> GridState {
    let objects = walls.iter().map(|p| (*p, ObjectType::Wall)).chain([(goal, ObjectType::Positive)]);
    GridState::new(w, h, agent, objects).unwrap()
}

pub fn free_cells(w: i32, h: i32, walls: &[Position], goal: Position) -> Vec<Position> {
    (0..w)
        .flat_map(|x| (0..h).map(move |y| Position::new(x, y)))
        .filter(|p| *p != goal && !walls.contains(p))
        .collect()
}

pub fn random_batch(rng: &mut ChaCha8Rng, input: usize, n: usize) -> Vec<Experience<f64>> {
    let vector = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..input).map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect()
    };
    (0..n)
        .map(|_| Experience {
            state: vector(rng),
            action: Action::from_index(rng.gen_range(0..4)),
            reward: rng.gen_range(-1.0..1.0),
            next_state: vector(rng),
            terminal: rng.gen_bool(0.3),
        })
        .collect()
}

pub fn csv_bytes(spec: &ExperimentSpec, parallel: usize) -> (Vec<u8>, Vec<u8>) {
    let result = run_experiment(spec, parallel).unwrap();
    let mut series = Vec::new();
    write_series_csv(&mut series, &[&result]).unwrap();
    let mut summary = Vec::new();
    write_summary_csv(&mut summary, &result.summary()).unwrap();
    (series, summary)
}

/// Gated updates change exactly the collected sub-state's entry.
pub fn gated_updates_touch_only_the_collected_object() {
    let hp = Hyperparams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rewarded = 0;
    for (state, action) in scripted_transitions() {
        let (tr, reward) = transition(&state, action, 100);
        let before = random_store(&mut rng, 3);
        let mut after = before.clone();
        srlcs_update(&mut after, &tr, &hp).unwrap();
        let diff = changed(&before, &after);
        if reward != 0.0 {
            rewarded += 1;
            let id = tr.collected_id.unwrap();
            let sub = tr.before.get(id).unwrap();
            assert_eq!(diff, vec![entry_key(sub.pair, sub.offset, action)], "\n{}", state.render());
            assert_eq!(after.get(sub.pair, sub.offset, action), reward);
        } else {
            for sub in &tr.before {
                assert!(diff.contains(&entry_key(sub.pair, sub.offset, action)));
            }
        }
    }
    assert!(rewarded > 1000, "only {rewarded} rewarded transitions");
}

/// Sub-states are unchanged by translating the whole layout.
pub fn abstraction_is_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (w, h) = (rng.gen_range(2..7), rng.gen_range(2..7));
        let state = random_state(&mut rng, w, h, 10);
        let (dx, dy) = (rng.gen_range(0..5), rng.gen_range(0..5));
        let shift = |p: Position| Position::new(p.x + dx, p.y + dy);
        let objects: Vec<(Position, ObjectType)> = state.objects().map(|(p, c)| (shift(p), c.kind)).collect();
        let moved = GridState::new(w + dx + rng.gen_range(0..3), h + dy + rng.gen_range(0..3), shift(state.agent()), objects).unwrap();
        assert_eq!(extract(&state), extract(&moved), "shift ({dx},{dy}) of\n{}", state.render());

        let (ix, iy) = (rng.gen_range(-2..3), rng.gen_range(-2..3));
        if let Some(inside) = state.translated(ix, iy) {
            assert_eq!(extract(&state), extract(&inside));
        }
    }
}

/// Scaling every Q-value by a positive constant keeps the greedy choice.
pub fn argmax_survives_positive_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..1000 {
        let state = random_state(&mut rng, 5, 5, 6);
        let view = extract(&state);
        let mut store = random_store(&mut rng, 4);
        if case % 4 == 0 {
            // Coarse values so that exact ties occur.
            for pair in [TypePair::AgentPositive, TypePair::AgentNegative] {
                for dx in -4..=4 {
                    for dy in -4..=4 {
                        for a in Action::ALL {
                            store.set(pair, Offset::new(dx, dy), a, rng.gen_range(-2..3) as f64);
                        }
                    }
                }
            }
        }
        let mut scaled = store.clone();
        let c = if case % 4 == 0 { 4.0 } else { 3.7 };
        scaled.scale(c);
        for draw in 0..4u64 {
            let seed = case * 16 + draw;
            let srl = srl_select(&store, &view, &mut ChaCha8Rng::seed_from_u64(seed));
            let srl_scaled = srl_select(&scaled, &view, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(srl, srl_scaled, "srl case {case}");
            let cs = srlcs_select(&store, &view, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let cs_scaled = srlcs_select(&scaled, &view, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(cs, cs_scaled, "srl+cs case {case}");
        }
    }
}

/// Converged tabular greedy paths have breadth-first length.
pub fn tabular_greedy_paths_are_shortest() {
    let hp = Hyperparams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for w in 2..=4 {
        for h in 2..=4 {
            let cells: Vec<Position> = (0..w).flat_map(|x| (0..h).map(move |y| Position::new(x, y))).collect();
            let mut wall_sets: Vec<Vec<Position>> = vec![vec![]];
            wall_sets.extend(cells.iter().map(|c| vec![*c]));
            for walls in &wall_sets {
                for &goal in cells.iter().filter(|c| !walls.contains(c)) {
                    let table = converge(w, h, walls, goal, &hp);
                    for start in free_cells(w, h, walls, goal) {
                        let Some(dist) = bfs(w, h, walls, start, goal) else { continue };
                        let mut state = layout(w, h, walls, goal, start);
                        let mut steps = 0;
                        while !state.is_terminal() && steps < 100 {
                            let action = tabular_select(&table, &full_state_key(&state), &mut rng);
                            state = step(&state, action, &RewardScheme::STANDARD, 1000).next;
                            steps += 1;
                        }
                        assert_eq!(steps, dist, "{w}x{h} walls {walls:?} goal {goal} start {start}");
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000);
}

/// Analytic TD gradient against central differences on 20 random nets.
pub fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let gamma = 0.9;
    let h = 1e-6;
    for case in 0..20 {
        let sizes = [rng.gen_range(3..9), rng.gen_range(3..8), rng.gen_range(3..8), 4];
        let mut net = Mlp64::glorot(&sizes, &mut rng).unwrap();
        // Nonzero biases keep hidden units off the rectifier's kink.
        for layer in net.layers_mut() {
            layer.bias_mut().iter_mut().for_each(|b| *b = rng.gen_range(-0.5..0.5));
        }
        let target = Mlp64::glorot(&sizes, &mut rng).unwrap();
        let batch = random_batch(&mut rng, sizes[0], 5);
        let refs: Vec<&Experience<f64>> = batch.iter().collect();
        let (_, grad) = td_gradient(&net, &target, &refs, gamma).unwrap();
        let analytic: Vec<f64> = grad.parameters().copied().collect();

        let mut worst: f64 = 0.0;
        for (i, a) in analytic.iter().enumerate() {
            let mut plus = net.clone();
            *plus.parameters_mut().nth(i).unwrap() += h;
            let mut minus = net.clone();
            *minus.parameters_mut().nth(i).unwrap() -= h;
            let numeric =
                (td_loss(&plus, &target, &refs, gamma).unwrap() - td_loss(&minus, &target, &refs, gamma).unwrap()) / (2.0 * h);
            let scale = a.abs().max(numeric.abs());
            if scale > 1e-7 {
                worst = worst.max((a - numeric).abs() / scale);
            }
        }
        assert!(worst < 1e-4, "case {case} sizes {sizes:?}: relative error {worst}");
    }
}

/// Same spec and seed give the same CSV bytes, serial or parallel.
pub fn csv_output_is_reproducible() {
    for (id, agent, episodes) in [
        (ExperimentId::Exp4, AgentKind::Srl, 60),
        (ExperimentId::Exp5, AgentKind::SrlCs, 100),
        (ExperimentId::Exp3, AgentKind::QLearn, 40),
        (ExperimentId::Exp1Grid3, AgentKind::Dqn, 15),
    ] {
        let mut spec = ExperimentSpec::paper(id, agent, 1234).unwrap();
        spec.runs = 3;
        spec.episodes = episodes;
        spec.test_episodes = 20;
        let first = csv_bytes(&spec, 1);
        assert_eq!(first, csv_bytes(&spec, 1), "{id} {agent}");
        assert_eq!(first, csv_bytes(&spec, 3), "{id} {agent} in parallel");
        let text = String::from_utf8(first.0).unwrap();
        assert!(!text.contains('\r'));

        spec.seed_base += 1;
        assert_ne!(text.into_bytes(), csv_bytes(&spec, 1).0, "{id} {agent} ignores the seed");
    }
}

